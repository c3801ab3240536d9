use clfermi::brackets::{poisson_bracket, BracketConvention};
use clfermi::dynamics::flow_derivative;
use clfermi::hamiltonian::{
    candidate_constants, diagonalize, ClassicalObservable, FieldState, SaturationFunction, Statistics,
};
use clfermi::transforms::{
    fields_to_reduced, reduced_hamiltonian, reduced_to_fields, ReducedParams, ReducedState, Topology,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_fields(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> FieldState {
    let moduli: Vec<f64> = (0..3).map(|_| rng.random_range(lo..hi)).collect();
    let phases: Vec<f64> = (0..3).map(|_| rng.random_range(-3.1..3.1)).collect();
    FieldState::from_polar(&moduli, &phases).unwrap()
}

/// Velocity of `(x1, x2, y1, y2)` obtained by pushing `dpsi/dt = {psi, H}` through
/// `x1 + i x2 = psi_1 e^{-i theta_2}`, `y1 + i y2 = psi_3 e^{-i theta_2}`.
fn pushed_forward(params: &ReducedParams, psi: &FieldState) -> [f64; 4] {
    let ham = params.hamiltonian_observable().unwrap();
    let g = ham.wirtinger_gradient(psi).unwrap();
    let kappa = BracketConvention::default().scale;
    let dpsi: Vec<Complex64> = g.d_psi_conj.iter().map(|d| kappa * d).collect();
    let a = psi.amplitudes();
    let theta_dot = (dpsi[1] / a[1]).im;
    let rot = Complex64::from_polar(1.0, -a[1].arg());
    let z1 = (dpsi[0] - c(0.0, theta_dot) * a[0]) * rot;
    let z3 = (dpsi[2] - c(0.0, theta_dot) * a[2]) * rot;
    [z1.re, z1.im, z3.re, z3.im]
}

#[test]
fn reduced_flow_is_twice_the_field_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (sat, coupling, topology) in [
        (SaturationFunction::Exponential, c(0.6, 0.0), Topology::Cyclic),
        (SaturationFunction::Exponential, c(0.4, -0.3), Topology::Cyclic),
        (SaturationFunction::SquareRoot, c(0.6, 0.0), Topology::Cyclic),
        (SaturationFunction::Exponential, c(0.5, 0.2), Topology::Linear),
    ] {
        let params = ReducedParams::new([1.2, 0.9, 0.7], coupling, sat, topology);
        for _ in 0..200 {
            let psi = random_fields(&mut rng, 0.1, 0.9);
            let q = fields_to_reduced(&psi).unwrap();
            let v = flow_derivative(&q, &params).unwrap();
            let w = pushed_forward(&params, &psi);
            for i in 0..4 {
                assert!((v[i] - 2.0 * w[i]).abs() < 1e-10 * (1.0 + v[i].abs()), "{v:?} vs 2 * {w:?}");
            }
        }
    }
}

#[test]
fn constants_sum_to_total_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for sat in [SaturationFunction::Exponential, SaturationFunction::SquareRoot] {
        for topology in [Topology::Cyclic, Topology::Linear] {
            let params = ReducedParams::new([1.0, 1.3, 0.8], c(0.6, 0.1), sat.clone(), topology);
            let ns = candidate_constants(
                &diagonalize(&params.hopping_matrix().unwrap()),
                Statistics::Fermionic,
                sat.clone(),
            );
            let total = ClassicalObservable::total_number(3, Statistics::Fermionic, sat.clone());
            for _ in 0..100 {
                let psi = random_fields(&mut rng, 0.05, 0.95);
                let sum: f64 = ns.iter().map(|n| n.evaluate(&psi).unwrap()).sum();
                assert!((sum - psi.total_number()).abs() < 1e-12, "{sum} vs {}", psi.total_number());
                assert!((total.evaluate(&psi).unwrap() - psi.total_number()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn reduced_hamiltonian_ignores_the_global_angle() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let params = ReducedParams::new([1.0; 3], c(0.6, 0.0), SaturationFunction::SquareRoot, Topology::Cyclic);
    let ham = params.hamiltonian_observable().unwrap();
    for _ in 0..200 {
        let x: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.6..0.6));
        let middle = rng.random_range(0.05..0.95);
        let q = ReducedState::new(x[0], x[1], x[2], x[3], x.iter().map(|v| v * v).sum::<f64>() + middle);
        let h = reduced_hamiltonian(&q, &params).unwrap();
        for theta in [-2.0, 0.0, 0.7, 3.0] {
            let psi = reduced_to_fields(&q, theta).unwrap();
            assert!((ham.evaluate(&psi).unwrap() - h).abs() < 1e-12);
            assert!((psi.total_number() - q.total).abs() < 1e-12);
        }
    }
}

#[test]
fn reduced_energy_is_conserved_by_its_own_flow() {
    // dH/ds = grad H . v must vanish identically
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let params = ReducedParams::new([1.0, 1.1, 0.9], c(0.5, 0.3), SaturationFunction::Exponential, Topology::Cyclic);
    for _ in 0..200 {
        let q = fields_to_reduced(&random_fields(&mut rng, 0.1, 0.9)).unwrap();
        let g = params.gradient(&q).unwrap();
        let v = flow_derivative(&q, &params).unwrap();
        let rate: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!(rate.abs() < 1e-12, "{rate}");
    }
}

#[test]
fn field_flow_conserves_total_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let params = ReducedParams::new([1.0; 3], c(0.6, 0.0), SaturationFunction::Exponential, Topology::Cyclic);
    let ham = params.hamiltonian_observable().unwrap();
    let n = ClassicalObservable::total_number(3, Statistics::Fermionic, SaturationFunction::Exponential);
    for _ in 0..100 {
        let psi = random_fields(&mut rng, 0.05, 0.95);
        let b = poisson_bracket(&ham, &n, &psi, BracketConvention::default()).unwrap();
        assert!(b.norm() < 1e-12);
    }
}
