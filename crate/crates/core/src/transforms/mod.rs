//! Coordinate chain for three sites at fixed total number.
//!
//! ```text
//! psi_i  ->  (n_i, theta_i)           n_i = |psi_i|^2, theta_i = arg psi_i
//!        ->  (n, alpha, m, beta, N, Theta)
//!                                     n = n_1, m = n_3, N = n_1 + n_2 + n_3,
//!                                     alpha = theta_1 - theta_2, beta = theta_3 - theta_2, Theta = theta_2
//!        ->  (x1, x2, y1, y2; N)      x1 + i x2 = sqrt(n) e^{i alpha}, y1 + i y2 = sqrt(m) e^{i beta}
//! ```
//!
//! `Theta` is cyclic and dropped in the last step; the inverse maps take it as
//! an argument. Angles are reported in `[-pi, pi)` and are `0` at zero amplitude.

mod reduced;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::FieldState;

pub use reduced::{action_angle_flow, hamiltonian_via_fields, reduced_hamiltonian, ReducedParams, Topology};

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can return 2 pi for tiny negative inputs
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn arg(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        wrap_angle(z.arg())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionAngleState {
    pub n: [f64; 3],
    pub theta: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedAngleState {
    pub n: f64,
    pub alpha: f64,
    pub m: f64,
    pub beta: f64,
    /// Total number `N`.
    pub total: f64,
    /// Global angle `Theta = theta_2`.
    pub theta: f64,
}

impl ReducedAngleState {
    /// Occupation of the middle site, `N - n - m`.
    pub fn n2(&self) -> f64 {
        self.total - self.n - self.m
    }
}

/// Reduced cartesian coordinates with the total number carried as a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub total: f64,
}

impl ReducedState {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64, total: f64) -> Self {
        Self { x1, x2, y1, y2, total }
    }

    pub fn from_coords(q: [f64; 4], total: f64) -> Self {
        Self { x1: q[0], x2: q[1], y1: q[2], y2: q[3], total }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    /// `n = x1^2 + x2^2`
    pub fn n(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    /// `m = y1^2 + y2^2`
    pub fn m(&self) -> f64 {
        self.y1 * self.y1 + self.y2 * self.y2
    }

    /// `n_2 = N - n - m`
    pub fn n2(&self) -> f64 {
        self.total - self.n() - self.m()
    }
}

/// Names of the reduced cartesian coordinates, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    X1,
    X2,
    Y1,
    Y2,
}

impl Coordinate {
    pub const ALL: [Coordinate; 4] = [Coordinate::X1, Coordinate::X2, Coordinate::Y1, Coordinate::Y2];

    pub fn index(self) -> usize {
        match self {
            Coordinate::X1 => 0,
            Coordinate::X2 => 1,
            Coordinate::Y1 => 2,
            Coordinate::Y2 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Coordinate::X1 => "x1",
            Coordinate::X2 => "x2",
            Coordinate::Y1 => "y1",
            Coordinate::Y2 => "y2",
        }
    }
}

impl std::str::FromStr for Coordinate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x1" => Ok(Coordinate::X1),
            "x2" => Ok(Coordinate::X2),
            "y1" => Ok(Coordinate::Y1),
            "y2" => Ok(Coordinate::Y2),
            other => Err(Error::Validation(format!("unknown coordinate `{other}`"))),
        }
    }
}

impl std::fmt::Display for Coordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn require_three(state: &FieldState) -> Result<()> {
    if state.dim() != 3 {
        return Err(Error::Validation(format!("coordinate chain needs 3 sites, got {}", state.dim())));
    }
    Ok(())
}

pub fn fields_to_action_angle(state: &FieldState) -> Result<ActionAngleState> {
    require_three(state)?;
    let psi = state.amplitudes();
    Ok(ActionAngleState {
        n: [psi[0].norm_sqr(), psi[1].norm_sqr(), psi[2].norm_sqr()],
        theta: [arg(psi[0]), arg(psi[1]), arg(psi[2])],
    })
}

pub fn action_angle_to_fields(aa: &ActionAngleState) -> Result<FieldState> {
    if aa.n.iter().any(|&n| n < 0.0) {
        return Err(Error::Domain(format!("negative occupation in {:?}", aa.n)));
    }
    FieldState::new((0..3).map(|i| Complex64::from_polar(aa.n[i].sqrt(), aa.theta[i])).collect())
}

pub fn action_angle_to_reduced(aa: &ActionAngleState) -> ReducedAngleState {
    let [t1, t2, t3] = aa.theta;
    ReducedAngleState {
        n: aa.n[0],
        alpha: wrap_angle(t1 - t2),
        m: aa.n[2],
        beta: wrap_angle(t3 - t2),
        total: aa.n[0] + aa.n[1] + aa.n[2],
        theta: t2,
    }
}

pub fn reduced_to_action_angle(r: &ReducedAngleState) -> ActionAngleState {
    ActionAngleState {
        n: [r.n, r.n2(), r.m],
        theta: [wrap_angle(r.alpha + r.theta), wrap_angle(r.theta), wrap_angle(r.beta + r.theta)],
    }
}

pub fn reduced_to_cartesian(r: &ReducedAngleState) -> Result<ReducedState> {
    if r.n < 0.0 || r.m < 0.0 {
        return Err(Error::Domain(format!("negative occupation n = {}, m = {}", r.n, r.m)));
    }
    let (sn, sm) = (r.n.sqrt(), r.m.sqrt());
    Ok(ReducedState {
        x1: sn * r.alpha.cos(),
        x2: sn * r.alpha.sin(),
        y1: sm * r.beta.cos(),
        y2: sm * r.beta.sin(),
        total: r.total,
    })
}

/// Inverse of [`reduced_to_cartesian`] with the dropped global angle supplied.
pub fn cartesian_to_reduced(q: &ReducedState, theta: f64) -> ReducedAngleState {
    ReducedAngleState {
        n: q.n(),
        alpha: arg(Complex64::new(q.x1, q.x2)),
        m: q.m(),
        beta: arg(Complex64::new(q.y1, q.y2)),
        total: q.total,
        theta,
    }
}

pub fn fields_to_reduced(state: &FieldState) -> Result<ReducedState> {
    reduced_to_cartesian(&action_angle_to_reduced(&fields_to_action_angle(state)?))
}

/// Rebuilds the fields directly: `psi_1 = (x1 + i x2) e^{i Theta}`,
/// `psi_2 = sqrt(N - n - m) e^{i Theta}`, `psi_3 = (y1 + i y2) e^{i Theta}`.
pub fn reduced_to_fields(q: &ReducedState, theta: f64) -> Result<FieldState> {
    let n2 = q.n2();
    if n2 < 0.0 {
        return Err(Error::Domain(format!("middle occupation N - n - m = {n2} is negative")));
    }
    let phase = Complex64::from_polar(1.0, theta);
    FieldState::new(vec![Complex64::new(q.x1, q.x2) * phase, phase * n2.sqrt(), Complex64::new(q.y1, q.y2) * phase])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wrap_angle_range() {
        for a in [-PI, PI, 3.0 * PI, -1e-18, 7.0, -7.0, 0.0] {
            let w = wrap_angle(a);
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
            assert!(((a - w) / (2.0 * PI)).fract().abs() < 1e-12 || ((a - w) / (2.0 * PI)).fract().abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn unit_first_site() {
        let aa =
            fields_to_action_angle(&FieldState::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap()).unwrap();
        assert_eq!(aa.n, [1.0, 0.0, 0.0]);
        assert_eq!(aa.theta, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn polar_decomposition() {
        let s = FieldState::from_polar(&[0.5, 0.7, 0.9], &[0.3, -2.0, 4.0]).unwrap();
        let aa = fields_to_action_angle(&s).unwrap();
        assert!((aa.n[1] - 0.49).abs() < 1e-15);
        assert!((aa.theta[2] - (4.0 - 2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn reduced_angles_are_differences() {
        let aa = ActionAngleState { n: [1.0, 1.0, 1.0], theta: [0.0; 3] };
        let r = action_angle_to_reduced(&aa);
        assert_eq!((r.n, r.m, r.total, r.alpha, r.beta, r.theta), (1.0, 1.0, 3.0, 0.0, 0.0, 0.0));
        let aa = ActionAngleState { n: [0.2, 0.3, 0.4], theta: [0.5, 0.25, -0.5] };
        let r = action_angle_to_reduced(&aa);
        assert_eq!((r.alpha, r.beta, r.theta), (0.25, -0.75, 0.25));
        let back = reduced_to_action_angle(&r);
        for i in 0..3 {
            assert!((back.n[i] - aa.n[i]).abs() < 1e-15);
            assert!((back.theta[i] - aa.theta[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn cartesian_axes() {
        let r = ReducedAngleState { n: 1.0, alpha: 0.0, m: 0.0, beta: 0.0, total: 2.0, theta: 0.0 };
        let q = reduced_to_cartesian(&r).unwrap();
        assert_eq!((q.x1, q.x2), (1.0, 0.0));
        let q = reduced_to_cartesian(&ReducedAngleState { alpha: PI / 2.0, ..r }).unwrap();
        assert!(q.x1.abs() < 1e-16 && (q.x2 - 1.0).abs() < 1e-16);
        assert!(reduced_to_cartesian(&ReducedAngleState { n: -0.1, ..r }).is_err());
    }

    #[test]
    fn fields_round_trip() {
        let s = FieldState::new(vec![c(0.3, -0.4), c(-0.2, 0.5), c(0.6, 0.1)]).unwrap();
        let aa = fields_to_action_angle(&s).unwrap();
        let r = action_angle_to_reduced(&aa);
        let q = reduced_to_cartesian(&r).unwrap();
        let back = reduced_to_fields(&q, r.theta).unwrap();
        for (a, b) in s.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(reduced_to_fields(&ReducedState::new(1.0, 1.0, 0.0, 0.0, 1.0), 0.0).is_err());
    }
}
