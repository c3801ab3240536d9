use clfermi::brackets::{poisson_bracket, BracketConvention};
use clfermi::hamiltonian::{
    ClassicalObservable, FieldState, PhaseSpaceFunction, SaturationFunction, Statistics, WirtingerGradient,
};
use clfermi::Result;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Setup {
    observables: Vec<ClassicalObservable>,
    state: FieldState,
}

fn setup(seed: u64, dim: usize, fermionic: bool, sqrt: bool, count: usize) -> Setup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stats = if fermionic { Statistics::Fermionic } else { Statistics::Bosonic };
    let sat = if sqrt { SaturationFunction::SquareRoot } else { SaturationFunction::Exponential };
    let observables = (0..count)
        .map(|_| {
            let coeffs = DMatrix::from_fn(dim, dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            ClassicalObservable::new(coeffs, stats, sat.clone()).unwrap()
        })
        .collect();
    let moduli: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..0.9)).collect();
    let phases: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.1..3.1)).collect();
    Setup { observables, state: FieldState::from_polar(&moduli, &phases).unwrap() }
}

/// `F * G` with the gradient taken by fourth-order central differences.
struct Product<'a>(&'a ClassicalObservable, &'a ClassicalObservable);

impl PhaseSpaceFunction for Product<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, state: &FieldState) -> Result<Complex64> {
        Ok(self.0.evaluate_complex(state)? * self.1.evaluate_complex(state)?)
    }

    fn gradient(&self, state: &FieldState) -> Result<WirtingerGradient> {
        let h = 1e-3;
        let amps = state.amplitudes().to_vec();
        let eval = |i: usize, dz: Complex64| {
            let mut a = amps.clone();
            a[i] += dz;
            self.value(&FieldState::new(a)?)
        };
        let mut g = WirtingerGradient::zeros(amps.len());
        for i in 0..amps.len() {
            let mut partial = [c(0.0, 0.0); 2];
            for (k, dir) in [c(1.0, 0.0), c(0.0, 1.0)].into_iter().enumerate() {
                partial[k] = (-eval(i, dir * 2.0 * h)? + eval(i, dir * h)? * 8.0 - eval(i, -dir * h)? * 8.0
                    + eval(i, -dir * 2.0 * h)?)
                    / (12.0 * h);
            }
            g.d_psi[i] = (partial[0] - c(0.0, 1.0) * partial[1]) / 2.0;
            g.d_psi_conj[i] = (partial[0] + c(0.0, 1.0) * partial[1]) / 2.0;
        }
        Ok(g)
    }
}

fn pb<F: PhaseSpaceFunction + ?Sized, G: PhaseSpaceFunction + ?Sized>(f: &F, g: &G, s: &FieldState) -> Complex64 {
    poisson_bracket(f, g, s, BracketConvention::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn antisymmetric(seed in any::<u64>(), dim in 2usize..=5, fermionic in any::<bool>(), sqrt in any::<bool>()) {
        let s = setup(seed, dim, fermionic, sqrt, 2);
        let (f, g) = (&s.observables[0], &s.observables[1]);
        let fg = pb(f, g, &s.state);
        let gf = pb(g, f, &s.state);
        prop_assert!((fg + gf).norm() <= 1e-12 * (1.0 + fg.norm()), "{fg} vs {gf}");
        prop_assert!(pb(f, f, &s.state).norm() <= 1e-12 * (1.0 + fg.norm()));
    }

    #[test]
    fn bilinear(
        seed in any::<u64>(),
        dim in 2usize..=5,
        fermionic in any::<bool>(),
        sqrt in any::<bool>(),
        a_re in -3.0..3.0f64,
        a_im in -3.0..3.0f64,
    ) {
        let s = setup(seed, dim, fermionic, sqrt, 3);
        let (f, g, k) = (&s.observables[0], &s.observables[1], &s.observables[2]);
        let a = c(a_re, a_im);
        let scaled = ClassicalObservable::new(f.coeffs() * a, f.statistics(), f.saturation().clone()).unwrap();
        let combined = scaled.plus(g).unwrap();
        let lhs = pb(&combined, k, &s.state);
        let rhs = a * pb(f, k, &s.state) + pb(g, k, &s.state);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
        let lhs = pb(k, &combined, &s.state);
        let rhs = a * pb(k, f, &s.state) + pb(k, g, &s.state);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn leibniz_on_products(seed in any::<u64>(), dim in 2usize..=4, fermionic in any::<bool>(), sqrt in any::<bool>()) {
        let s = setup(seed, dim, fermionic, sqrt, 3);
        let (f, g, k) = (&s.observables[0], &s.observables[1], &s.observables[2]);
        let lhs = pb(&Product(f, g), k, &s.state);
        let fv = f.evaluate_complex(&s.state).unwrap();
        let gv = g.evaluate_complex(&s.state).unwrap();
        let rhs = fv * pb(g, k, &s.state) + gv * pb(f, k, &s.state);
        prop_assert!((lhs - rhs).norm() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn convention_only_rescales(
        seed in any::<u64>(),
        dim in 2usize..=5,
        fermionic in any::<bool>(),
        sqrt in any::<bool>(),
        k_re in -2.0..2.0f64,
        k_im in -2.0..2.0f64,
    ) {
        let s = setup(seed, dim, fermionic, sqrt, 2);
        let (f, g) = (&s.observables[0], &s.observables[1]);
        let scale = c(k_re, k_im);
        let base = pb(f, g, &s.state);
        let other = poisson_bracket(f, g, &s.state, BracketConvention::with_scale(scale)).unwrap();
        let expected = base * (scale / c(0.0, -1.0));
        prop_assert!((other - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    }

    /// Every observable is invariant under a global phase, which `N` generates.
    #[test]
    fn total_number_is_central(seed in any::<u64>(), dim in 2usize..=5, fermionic in any::<bool>(), sqrt in any::<bool>()) {
        let s = setup(seed, dim, fermionic, sqrt, 1);
        let f = &s.observables[0];
        let n = ClassicalObservable::total_number(dim, f.statistics(), f.saturation().clone());
        let b = pb(&n, f, &s.state);
        prop_assert!(b.norm() < 1e-12, "{{N, F}} = {b}");
    }
}

#[test]
fn site_number_bracket() {
    // {|psi_i|^2, F} = kappa (psi_i^* dF/dpsi_i^* - psi_i dF/dpsi_i)
    let s = setup(5, 3, true, false, 1);
    let f = &s.observables[0];
    let g = f.wirtinger_gradient(&s.state).unwrap();
    for i in 0..3 {
        let mut coeffs = DMatrix::from_element(3, 3, c(0.0, 0.0));
        coeffs[(i, i)] = c(1.0, 0.0);
        let ni = ClassicalObservable::new(coeffs, Statistics::Fermionic, SaturationFunction::Exponential).unwrap();
        let psi = s.state.amplitudes()[i];
        let expected = c(0.0, -1.0) * (psi.conj() * g.d_psi_conj[i] - psi * g.d_psi[i]);
        let got = pb(&ni, f, &s.state);
        assert!((got - expected).norm() < 1e-12, "site {i}: {got} vs {expected}");
    }
}
