use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Absolute tolerance for `h_ij = conj(h_ji)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Hermitian one-body coefficient matrix `h` of `H = sum_ij h_ij a_i^† a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingMatrix {
    entries: DMatrix<Complex64>,
}

impl HoppingMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_hermitian(&entries)?;
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Validation(format!("row {} has {} entries, expected {dim}", i + 1, r.len())));
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn diagonal(eps: &[f64]) -> Result<Self> {
        let dim = eps.len();
        Self::new(DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(eps[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Two sites: `[[e1, J], [J^*, e2]]`.
    pub fn two_site(e1: f64, e2: f64, coupling: Complex64) -> Result<Self> {
        Self::linear_chain(&[e1, e2], coupling)
    }

    /// Open chain with equal nearest-neighbour hopping `h_{i,i+1} = J`.
    /// For three sites this is `[[e1, J, 0], [J^*, e2, J], [0, J^*, e3]]`.
    pub fn linear_chain(eps: &[f64], coupling: Complex64) -> Result<Self> {
        let dim = eps.len();
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for i in 0..dim {
            m[(i, i)] = Complex64::new(eps[i], 0.0);
            if i + 1 < dim {
                m[(i, i + 1)] = coupling;
                m[(i + 1, i)] = coupling.conj();
            }
        }
        Self::new(m)
    }

    /// Closed ring: the open chain plus `h_{1,L} = J` (upper triangle).
    /// For three sites every upper off-diagonal entry is `J`:
    /// `[[e1, J, J], [J^*, e2, J], [J^*, J^*, e3]]`.
    pub fn cyclic(eps: &[f64], coupling: Complex64) -> Result<Self> {
        if eps.len() < 3 {
            return Err(Error::Validation(format!("a cyclic system needs at least 3 sites, got {}", eps.len())));
        }
        let mut h = Self::linear_chain(eps, coupling)?;
        let last = eps.len() - 1;
        h.entries[(0, last)] = coupling;
        h.entries[(last, 0)] = coupling.conj();
        Ok(h)
    }

    /// Random hermitian matrix with real and imaginary parts uniform in `[-1, 1)`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for i in 0..dim {
            m[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in i + 1..dim {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }
}

pub(crate) fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::Validation(format!(
            "coefficient matrix must be square with dimension >= 1, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Validation("coefficient matrix has non-finite entries".into()));
    }
    let dim = m.nrows();
    for i in 0..dim {
        for j in i..dim {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > HERMITIAN_TOL {
                return Err(Error::NotHermitian { row: i + 1, col: j + 1, deviation: d });
            }
        }
    }
    Ok(())
}
