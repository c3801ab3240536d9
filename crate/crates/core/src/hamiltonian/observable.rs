use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{check_hermitian, HoppingMatrix};
use super::saturation::SaturationFunction;
use super::spectral::SpectralData;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

impl Statistics {
    pub fn name(self) -> &'static str {
        match self {
            Statistics::Bosonic => "bosonic",
            Statistics::Fermionic => "fermionic",
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bosonic" => Ok(Statistics::Bosonic),
            "fermionic" => Ok(Statistics::Fermionic),
            other => Err(Error::Validation(format!("unknown statistics `{other}`"))),
        }
    }
}

/// Point of the classical phase space: one complex amplitude per site.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState(Vec<Complex64>);

impl FieldState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Validation("field state needs at least one amplitude".into()));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Validation("field state has non-finite amplitudes".into()));
        }
        Ok(Self(amplitudes))
    }

    pub fn from_polar(moduli: &[f64], phases: &[f64]) -> Result<Self> {
        if moduli.len() != phases.len() {
            return Err(Error::Validation("moduli and phases differ in length".into()));
        }
        Self::new(moduli.iter().zip(phases).map(|(r, p)| Complex64::from_polar(*r, *p)).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `sum_i |psi_i|^2`
    pub fn total_number(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Wirtinger derivatives `dF/dpsi_i` and `dF/dpsi_i^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct WirtingerGradient {
    pub d_psi: Vec<Complex64>,
    pub d_psi_conj: Vec<Complex64>,
}

impl WirtingerGradient {
    pub fn zeros(dim: usize) -> Self {
        Self { d_psi: vec![ZERO; dim], d_psi_conj: vec![ZERO; dim] }
    }
}

/// Differentiable function on the complex phase space.
pub trait PhaseSpaceFunction {
    fn dim(&self) -> usize;
    fn value(&self, state: &FieldState) -> Result<Complex64>;
    fn gradient(&self, state: &FieldState) -> Result<WirtingerGradient>;
}

/// Classical image of the bilinear `sum_ij C_ij a_i^† a_j`.
///
/// Bosonic: `sum_ij C_ij psi_i^* psi_j`.
/// Fermionic: diagonal terms give `C_ii |psi_i|^2`; each off-diagonal term gives
/// `C_ij psi_i^* psi_j f(|psi_i|^2) f(|psi_j|^2) prod_k (1 - 2|psi_k|^2)` with `k`
/// running over the sites strictly between `i` and `j` in basis order.
#[derive(Debug, Clone)]
pub struct ClassicalObservable {
    coeffs: DMatrix<Complex64>,
    statistics: Statistics,
    saturation: SaturationFunction,
    hermitian: bool,
}

impl ClassicalObservable {
    pub fn new(coeffs: DMatrix<Complex64>, statistics: Statistics, saturation: SaturationFunction) -> Result<Self> {
        if coeffs.nrows() == 0 || coeffs.nrows() != coeffs.ncols() {
            return Err(Error::Validation(format!(
                "coefficient matrix must be square and non-empty, got {}x{}",
                coeffs.nrows(),
                coeffs.ncols()
            )));
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Validation("coefficient matrix has non-finite entries".into()));
        }
        let hermitian = check_hermitian(&coeffs).is_ok();
        Ok(Self { coeffs, statistics, saturation, hermitian })
    }

    /// The classical Hamiltonian built from `h`.
    pub fn hamiltonian(h: &HoppingMatrix, statistics: Statistics, saturation: SaturationFunction) -> Self {
        Self { coeffs: h.entries().clone(), statistics, saturation, hermitian: true }
    }

    /// `N = sum_i |psi_i|^2` (identity coefficients).
    pub fn total_number(dim: usize, statistics: Statistics, saturation: SaturationFunction) -> Self {
        Self { coeffs: DMatrix::identity(dim, dim), statistics, saturation, hermitian: true }
    }

    pub fn coeffs(&self) -> &DMatrix<Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.coeffs[(i, j)]
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn saturation(&self) -> &SaturationFunction {
        &self.saturation
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    /// Sum of two observables with identical statistics and saturation.
    pub fn plus(&self, other: &ClassicalObservable) -> Result<Self> {
        if self.dim() != other.dim() || self.statistics != other.statistics {
            return Err(Error::Validation("observables are not compatible".into()));
        }
        Self::new(&self.coeffs + &other.coeffs, self.statistics, self.saturation.clone())
    }

    /// Whether `state` is inside the domain where `evaluate` is defined.
    pub fn admits(&self, state: &FieldState) -> bool {
        state.dim() == self.dim()
            && (self.statistics == Statistics::Bosonic
                || state.occupations().iter().all(|&n| self.saturation.domain().contains(n)))
    }

    /// Whether `wirtinger_gradient` is defined at `state`.
    pub fn admits_gradient(&self, state: &FieldState) -> bool {
        state.dim() == self.dim()
            && (self.statistics == Statistics::Bosonic
                || state.occupations().iter().all(|&n| self.saturation.domain().contains_interior(n)))
    }

    fn check_dim(&self, state: &FieldState) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::Validation(format!("state has {} sites, observable has {}", state.dim(), self.dim())));
        }
        Ok(())
    }

    pub fn evaluate_complex(&self, state: &FieldState) -> Result<Complex64> {
        self.check_dim(state)?;
        let psi = state.amplitudes();
        let dim = self.dim();
        match self.statistics {
            Statistics::Bosonic => {
                let mut acc = ZERO;
                for i in 0..dim {
                    for j in 0..dim {
                        acc += self.coeffs[(i, j)] * psi[i].conj() * psi[j];
                    }
                }
                Ok(acc)
            }
            Statistics::Fermionic => {
                let n = state.occupations();
                let f = n.iter().map(|&x| self.saturation.value(x)).collect::<Result<Vec<_>>>()?;
                let mut acc = ZERO;
                for i in 0..dim {
                    acc += self.coeffs[(i, i)] * n[i];
                }
                for i in 0..dim {
                    for j in 0..dim {
                        let c = self.coeffs[(i, j)];
                        if i == j || c == ZERO {
                            continue;
                        }
                        let string = string_factor(&n, i, j, None);
                        acc += c * psi[i].conj() * psi[j] * (f[i] * f[j] * string);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Real value of the observable. For hermitian coefficients the discarded
    /// imaginary part is pure rounding noise.
    pub fn evaluate(&self, state: &FieldState) -> Result<f64> {
        Ok(self.evaluate_complex(state)?.re)
    }

    pub fn wirtinger_gradient(&self, state: &FieldState) -> Result<WirtingerGradient> {
        self.check_dim(state)?;
        let psi = state.amplitudes();
        let dim = self.dim();
        let mut g = WirtingerGradient::zeros(dim);
        match self.statistics {
            Statistics::Bosonic => {
                for i in 0..dim {
                    for j in 0..dim {
                        let c = self.coeffs[(i, j)];
                        // d/dpsi_i^* of c psi_i^* psi_j, d/dpsi_j of the same
                        g.d_psi_conj[i] += c * psi[j];
                        g.d_psi[j] += c * psi[i].conj();
                    }
                }
            }
            Statistics::Fermionic => {
                let n = state.occupations();
                let domain = self.saturation.domain();
                if let Some(x) = n.iter().find(|&&x| !domain.contains(x)) {
                    return Err(Error::Domain(format!(
                        "occupation {x} outside the domain of `{}`",
                        self.saturation.name()
                    )));
                }
                let mut fd: Vec<Option<(f64, f64)>> = vec![None; dim];
                for i in 0..dim {
                    g.d_psi_conj[i] += self.coeffs[(i, i)] * psi[i];
                    g.d_psi[i] += self.coeffs[(i, i)] * psi[i].conj();
                }
                for i in 0..dim {
                    for j in 0..dim {
                        let c = self.coeffs[(i, j)];
                        if i == j || c == ZERO {
                            continue;
                        }
                        let (fi, dfi) = saturation_at(&self.saturation, &n, &mut fd, i)?;
                        let (fj, dfj) = saturation_at(&self.saturation, &n, &mut fd, j)?;
                        let s = string_factor(&n, i, j, None);
                        let pi = psi[i];
                        let pj = psi[j];
                        let pic = pi.conj();

                        g.d_psi_conj[i] += c * pj * (fj * s * (fi + n[i] * dfi));
                        g.d_psi[i] += c * pic * pic * pj * (dfi * fj * s);
                        g.d_psi_conj[j] += c * pic * pj * pj * (fi * dfj * s);
                        g.d_psi[j] += c * pic * (fi * s * (fj + n[j] * dfj));

                        let base = c * pic * pj * (fi * fj);
                        for k in i.min(j) + 1..i.max(j) {
                            let rest = string_factor(&n, i, j, Some(k));
                            g.d_psi_conj[k] += base * psi[k] * (-2.0 * rest);
                            g.d_psi[k] += base * psi[k].conj() * (-2.0 * rest);
                        }
                    }
                }
            }
        }
        Ok(g)
    }
}

impl PhaseSpaceFunction for ClassicalObservable {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, state: &FieldState) -> Result<Complex64> {
        self.evaluate_complex(state)
    }

    fn gradient(&self, state: &FieldState) -> Result<WirtingerGradient> {
        self.wirtinger_gradient(state)
    }
}

fn saturation_at(
    sat: &SaturationFunction,
    n: &[f64],
    cache: &mut [Option<(f64, f64)>],
    i: usize,
) -> Result<(f64, f64)> {
    if let Some(v) = cache[i] {
        return Ok(v);
    }
    let v = sat.value_and_derivative(n[i])?;
    cache[i] = Some(v);
    Ok(v)
}

/// `prod_{k = min(i,j)+1}^{max(i,j)-1} (1 - 2 n_k)`, optionally skipping one site.
pub(crate) fn string_factor(n: &[f64], i: usize, j: usize, skip: Option<usize>) -> f64 {
    (i.min(j) + 1..i.max(j)).filter(|&k| Some(k) != skip).map(|k| 1.0 - 2.0 * n[k]).product()
}

/// The `L` candidate constants `N_k` with coefficients `C^(k)_ij = u_ik u_jk^*`.
pub fn candidate_constants(
    spectral: &SpectralData,
    statistics: Statistics,
    saturation: SaturationFunction,
) -> Vec<ClassicalObservable> {
    let dim = spectral.dim();
    (0..dim)
        .map(|k| {
            let coeffs = DMatrix::from_fn(dim, dim, |i, j| spectral.u(i, k) * spectral.u(j, k).conj());
            ClassicalObservable { coeffs, statistics, saturation: saturation.clone(), hermitian: true }
        })
        .collect()
}
