//! Saturation functions `f` used by the fermionic replacement rule
//! `c_i^† c_j -> psi_i^* psi_j f(|psi_i|^2) f(|psi_j|^2) * string`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// First-order forward-mode dual number `value + slope * eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub slope: f64,
}

impl Dual {
    pub fn constant(value: f64) -> Self {
        Self { value, slope: 0.0 }
    }

    pub fn variable(value: f64) -> Self {
        Self { value, slope: 1.0 }
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self { value: e, slope: e * self.slope }
    }

    pub fn ln(self) -> Self {
        Self { value: self.value.ln(), slope: self.slope / self.value }
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        Self { value: s, slope: self.slope / (2.0 * s) }
    }

    pub fn powi(self, n: i32) -> Self {
        Self { value: self.value.powi(n), slope: f64::from(n) * self.value.powi(n - 1) * self.slope }
    }

    pub fn powf(self, p: f64) -> Self {
        Self { value: self.value.powf(p), slope: p * self.value.powf(p - 1.0) * self.slope }
    }

    pub fn cos(self) -> Self {
        Self { value: self.value.cos(), slope: -self.value.sin() * self.slope }
    }

    pub fn sin(self) -> Self {
        Self { value: self.value.sin(), slope: self.value.cos() * self.slope }
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual { value: self.value + rhs.value, slope: self.slope + rhs.slope }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual { value: self.value - rhs.value, slope: self.slope - rhs.slope }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual { value: self.value * rhs.value, slope: self.slope * rhs.value + self.value * rhs.slope }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value / rhs.value,
            slope: (self.slope * rhs.value - self.value * rhs.slope) / (rhs.value * rhs.value),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { value: -self.value, slope: -self.slope }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual { value: self.value + rhs, slope: self.slope }
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        Dual { value: self.value - rhs, slope: self.slope }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual { value: self.value * rhs, slope: self.slope * rhs }
    }
}

impl Sub<Dual> for f64 {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual { value: self - rhs.value, slope: -rhs.slope }
    }
}

impl Mul<Dual> for f64 {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual { value: self * rhs.value, slope: self * rhs.slope }
    }
}

/// Closed interval `[lower, upper]` on which a saturation function is defined.
///
/// The function must be differentiable on the open interior; the endpoints
/// are admissible for evaluation only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const REALS: Interval = Interval { lower: f64::NEG_INFINITY, upper: f64::INFINITY };

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

/// User-supplied saturation function, evaluated on dual numbers so the
/// derivative comes from forward-mode differentiation.
#[derive(Clone)]
pub struct CustomSaturation {
    pub name: String,
    pub domain: Interval,
    func: Arc<dyn Fn(Dual) -> Dual + Send + Sync>,
}

impl CustomSaturation {
    pub fn new<F>(name: impl Into<String>, domain: Interval, func: F) -> Self
    where
        F: Fn(Dual) -> Dual + Send + Sync + 'static,
    {
        Self { name: name.into(), domain, func: Arc::new(func) }
    }
}

impl fmt::Debug for CustomSaturation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSaturation")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Name of a built-in saturation function, as used in files and configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaturationKind {
    Exp,
    Sqrt,
}

impl SaturationKind {
    pub fn function(self) -> SaturationFunction {
        match self {
            SaturationKind::Exp => SaturationFunction::Exponential,
            SaturationKind::Sqrt => SaturationFunction::SquareRoot,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SaturationKind::Exp => "exp",
            SaturationKind::Sqrt => "sqrt",
        }
    }
}

impl std::str::FromStr for SaturationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(SaturationKind::Exp),
            "sqrt" => Ok(SaturationKind::Sqrt),
            other => Err(Error::Validation(format!("unknown saturation function `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SaturationFunction {
    /// `f(x) = exp(-x)`, defined on all reals.
    Exponential,
    /// `f(x) = sqrt(1 - x)`, defined for `x <= 1`.
    SquareRoot,
    Custom(CustomSaturation),
}

impl SaturationFunction {
    pub fn name(&self) -> &str {
        match self {
            SaturationFunction::Exponential => "exp",
            SaturationFunction::SquareRoot => "sqrt",
            SaturationFunction::Custom(c) => &c.name,
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            SaturationFunction::Exponential => Interval::REALS,
            SaturationFunction::SquareRoot => Interval { lower: f64::NEG_INFINITY, upper: 1.0 },
            SaturationFunction::Custom(c) => c.domain,
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if !self.domain().contains(x) {
            return Err(Error::Domain(format!(
                "saturation function `{}` evaluated at {x}, outside its domain",
                self.name()
            )));
        }
        Ok(match self {
            SaturationFunction::Exponential => (-x).exp(),
            SaturationFunction::SquareRoot => (1.0 - x).max(0.0).sqrt(),
            SaturationFunction::Custom(c) => (c.func)(Dual::constant(x)).value,
        })
    }

    /// Returns `(f(x), f'(x))`. Fails where `f` is not differentiable.
    pub fn value_and_derivative(&self, x: f64) -> Result<(f64, f64)> {
        if !self.domain().contains_interior(x) {
            return Err(Error::DerivativeDomain(format!(
                "saturation function `{}` is not differentiable at {x}",
                self.name()
            )));
        }
        let (v, d) = match self {
            SaturationFunction::Exponential => {
                let e = (-x).exp();
                (e, -e)
            }
            SaturationFunction::SquareRoot => {
                let s = (1.0 - x).sqrt();
                (s, -0.5 / s)
            }
            SaturationFunction::Custom(c) => {
                let d = (c.func)(Dual::variable(x));
                (d.value, d.slope)
            }
        };
        if !(v.is_finite() && d.is_finite()) {
            return Err(Error::DerivativeDomain(format!(
                "saturation function `{}` has a non-finite derivative at {x}",
                self.name()
            )));
        }
        Ok((v, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let f = SaturationFunction::Exponential;
        assert!((f.value(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let (v, d) = f.value_and_derivative(0.5).unwrap();
        assert!((v + d).abs() < 1e-15);

        let g = SaturationFunction::SquareRoot;
        assert_eq!(g.value(1.0).unwrap(), 0.0);
        assert!(g.value(1.0 + 1e-9).is_err());
        assert!(matches!(g.value_and_derivative(1.0), Err(Error::DerivativeDomain(_))));
        let (v, d) = g.value_and_derivative(0.75).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!((d + 1.0).abs() < 1e-15);
    }

    #[test]
    fn custom_function_uses_dual_derivative() {
        let f = SaturationFunction::Custom(CustomSaturation::new("gauss", Interval::REALS, |x| (-(x * x)).exp()));
        let x = 0.3;
        let (v, d) = f.value_and_derivative(x).unwrap();
        assert!((v - (-x * x).exp()).abs() < 1e-15);
        assert!((d + 2.0 * x * (-x * x).exp()).abs() < 1e-15);
    }

    #[test]
    fn custom_domain_is_enforced() {
        let f =
            SaturationFunction::Custom(CustomSaturation::new("one-minus", Interval { lower: 0.0, upper: 1.0 }, |x| {
                1.0 - x
            }));
        assert!(f.value(1.5).is_err());
        assert!(f.value_and_derivative(0.0).is_err());
        assert!(f.value_and_derivative(0.5).is_ok());
    }
}
