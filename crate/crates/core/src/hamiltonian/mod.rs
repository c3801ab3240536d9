//! One-body Hamiltonians and their classical phase-space images.
//!
//! A [`HoppingMatrix`] `h` defines `H = sum_ij h_ij a_i^† a_j`. Replacing the
//! operator bilinears by field functions (bosonic or fermionic rules) gives a
//! [`ClassicalObservable`]; the same machinery builds the candidate constants
//! `N_k` from the eigenvectors of `h`.

mod matrix;
mod observable;
mod saturation;
mod spectral;

pub use matrix::{HoppingMatrix, HERMITIAN_TOL};
pub use observable::{
    candidate_constants, ClassicalObservable, FieldState, PhaseSpaceFunction, Statistics, WirtingerGradient,
};
pub use saturation::{CustomSaturation, Dual, Interval, SaturationFunction, SaturationKind};
pub use spectral::{diagonalize, SpectralData};

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bosonic_diagonal_value() {
        let h = HoppingMatrix::diagonal(&[0.7, -0.3, 2.0]).unwrap();
        let obs = ClassicalObservable::hamiltonian(&h, Statistics::Bosonic, SaturationFunction::Exponential);
        let state = FieldState::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((obs.evaluate(&state).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn fermionic_two_site_hand_value() {
        let h = HoppingMatrix::two_site(0.0, 0.0, c(1.0, 0.0)).unwrap();
        let obs = ClassicalObservable::hamiltonian(&h, Statistics::Fermionic, SaturationFunction::Exponential);
        let a = 0.5f64.sqrt();
        let state = FieldState::new(vec![c(a, 0.0), c(a, 0.0)]).unwrap();
        let v = obs.evaluate(&state).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15, "{v}");
        assert!((v - 0.367_879).abs() < 1e-6);
    }

    #[test]
    fn square_root_boundary_kills_hopping() {
        let h = HoppingMatrix::cyclic(&[0.5, 1.0, 1.5], c(0.6, 0.3)).unwrap();
        let obs = ClassicalObservable::hamiltonian(&h, Statistics::Fermionic, SaturationFunction::SquareRoot);
        let state = FieldState::from_polar(&[1.0, 1.0, 1.0], &[0.3, -1.2, 2.5]).unwrap();
        assert!((obs.evaluate(&state).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn square_root_domain_error() {
        let h = HoppingMatrix::two_site(0.0, 0.0, c(1.0, 0.0)).unwrap();
        let obs = ClassicalObservable::hamiltonian(&h, Statistics::Fermionic, SaturationFunction::SquareRoot);
        let state = FieldState::new(vec![c(1.1, 0.0), c(0.1, 0.0)]).unwrap();
        assert!(matches!(obs.evaluate(&state), Err(crate::Error::Domain(_))));
        let edge = FieldState::new(vec![c(1.0, 0.0), c(0.1, 0.0)]).unwrap();
        assert!(obs.evaluate(&edge).is_ok());
        assert!(matches!(obs.wirtinger_gradient(&edge), Err(crate::Error::DerivativeDomain(_))));
    }

    #[test]
    fn candidate_constants_of_diagonal_h_are_occupations() {
        let h = HoppingMatrix::diagonal(&[0.1, 0.5, 0.9]).unwrap();
        let spec = diagonalize(&h);
        let ns = candidate_constants(&spec, Statistics::Fermionic, SaturationFunction::Exponential);
        let state = FieldState::new(vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.5, -0.5)]).unwrap();
        let occ = state.occupations();
        for (k, nk) in ns.iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == k && j == k { 1.0 } else { 0.0 };
                    assert!((nk.coeff(i, j) - c(expect, 0.0)).norm() < 1e-15);
                }
            }
            assert!((nk.evaluate(&state).unwrap() - occ[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn candidate_constants_of_pauli_x() {
        let h = HoppingMatrix::two_site(0.0, 0.0, c(1.0, 0.0)).unwrap();
        let ns = candidate_constants(&diagonalize(&h), Statistics::Bosonic, SaturationFunction::Exponential);
        // eigenvectors (1, -1)/sqrt2 and (1, 1)/sqrt2
        let expect = [[0.5, -0.5], [0.5, 0.5]];
        for (k, e) in expect.iter().enumerate() {
            assert!((ns[k].coeff(0, 0).re - e[0]).abs() < 1e-14);
            assert!((ns[k].coeff(0, 1).re - e[1]).abs() < 1e-14);
            assert!((ns[k].coeff(1, 0).re - e[1]).abs() < 1e-14);
            assert!((ns[k].coeff(1, 1).re - e[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn bosonic_gradient_is_matrix_vector_product() {
        let h = HoppingMatrix::cyclic(&[0.2, 0.4, -0.1], c(0.3, -0.8)).unwrap();
        let obs = ClassicalObservable::hamiltonian(&h, Statistics::Bosonic, SaturationFunction::Exponential);
        let psi = vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.5, -0.5)];
        let g = obs.wirtinger_gradient(&FieldState::new(psi.clone()).unwrap()).unwrap();
        for i in 0..3 {
            let expect: Complex64 = (0..3).map(|j| h.get(i, j) * psi[j]).sum();
            assert!((g.d_psi_conj[i] - expect).norm() < 1e-15);
            assert!((g.d_psi[i] - g.d_psi_conj[i].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn fermionic_diagonal_gradient() {
        let h = HoppingMatrix::diagonal(&[0.2, 0.4, -0.1]).unwrap();
        let obs = ClassicalObservable::hamiltonian(&h, Statistics::Fermionic, SaturationFunction::SquareRoot);
        let psi = vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.5, -0.5)];
        let g = obs.wirtinger_gradient(&FieldState::new(psi.clone()).unwrap()).unwrap();
        for i in 0..3 {
            assert!((g.d_psi_conj[i] - h.get(i, i) * psi[i]).norm() < 1e-15);
        }
    }
}
