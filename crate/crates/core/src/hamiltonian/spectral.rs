use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::matrix::HoppingMatrix;

/// Eigen-decomposition `u^† h u = diag(w)` of a hopping matrix.
///
/// Eigenvalues are ascending. Each column of `u` is phase-fixed so that its
/// largest-magnitude entry is real and positive. Inside a degenerate block
/// the basis is whatever the solver returns.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub unitary: DMatrix<Complex64>,
    pub eigenvalues: Vec<f64>,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `u_{ik}`
    pub fn u(&self, i: usize, k: usize) -> Complex64 {
        self.unitary[(i, k)]
    }

    /// Largest entry of `|u^† u - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.unitary.adjoint() * &self.unitary - DMatrix::identity(self.dim(), self.dim());
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|u^† h u - diag(w)|`.
    pub fn diagonalization_residual(&self, h: &HoppingMatrix) -> f64 {
        let mut d = self.unitary.adjoint() * h.entries() * &self.unitary;
        for (k, w) in self.eigenvalues.iter().enumerate() {
            d[(k, k)] -= Complex64::new(*w, 0.0);
        }
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn diagonalize(h: &HoppingMatrix) -> SpectralData {
    let dim = h.dim();
    let eig = SymmetricEigen::new(h.entries().clone());

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut unitary = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut eigenvalues = Vec::with_capacity(dim);
    for (k, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        // first entry within rounding of the maximum, so ties resolve by index
        let pivot = col.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap_or(0);
        let phase = col[pivot].conj() / col[pivot].norm();
        for i in 0..dim {
            unitary[(i, k)] = col[i] * phase;
        }
        unitary[(pivot, k)] = Complex64::new(unitary[(pivot, k)].norm(), 0.0);
    }
    SpectralData { unitary, eigenvalues }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let h = HoppingMatrix::diagonal(&[1.0, 1.0, 1.0]).unwrap();
        let s = diagonalize(&h);
        assert_eq!(s.eigenvalues.len(), 3);
        for w in &s.eigenvalues {
            assert!((w - 1.0).abs() < 1e-14);
        }
        assert!(s.unitarity_residual() < 1e-12);
    }

    #[test]
    fn pauli_x() {
        let h = HoppingMatrix::two_site(0.0, 0.0, c(1.0, 0.0)).unwrap();
        let s = diagonalize(&h);
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(s.diagonalization_residual(&h) < 1e-12);
    }

    #[test]
    fn columns_are_phase_fixed() {
        let h = HoppingMatrix::cyclic(&[0.3, -0.2, 0.9], c(0.4, 0.7)).unwrap();
        let s = diagonalize(&h);
        for k in 0..3 {
            let col: Vec<Complex64> = (0..3).map(|i| s.u(i, k)).collect();
            let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = col.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap();
            assert!(col[pivot].im == 0.0 && col[pivot].re > 0.0);
        }
        assert!(s.unitarity_residual() < 1e-12);
        assert!(s.diagonalization_residual(&h) < 1e-12);
    }
}
