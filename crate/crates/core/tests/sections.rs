// the shell energy 3.14 is a model parameter, not pi
#![allow(clippy::approx_constant)]

use clfermi::dynamics::{flow_derivative, IntegratorConfig};
use clfermi::hamiltonian::SaturationFunction;
use clfermi::poincare::{classify_records, sample_shell, section, shell_slice, Direction, SectionSpec, ShellSliceSpec};
use clfermi::transforms::{reduced_to_fields, Coordinate, ReducedParams, ReducedState, Topology};
use num_complex::Complex64;

fn ring(j: f64) -> ReducedParams {
    ReducedParams::new([1.0; 3], Complex64::new(j, 0.0), SaturationFunction::Exponential, Topology::Cyclic)
}

#[test]
fn crossings_lie_on_the_section_and_the_shell() {
    let params = ring(0.6);
    let ham = params.hamiltonian_observable().unwrap();
    let starts = sample_shell(&params, 3.0, 3.14, 6, 41, Coordinate::X1).unwrap();
    for direction in [Direction::Positive, Direction::Negative] {
        let spec = SectionSpec { direction, ..SectionSpec::default() };
        let out = section(&starts, &spec, 3.14, &params, &IntegratorConfig::default().with_t_end(300.0)).unwrap();
        assert!(out.records.len() > 50);
        for r in &out.records {
            assert!(r.state[1].abs() < 1e-10, "offset {}", r.state[1]);
            assert_eq!((r.p, r.q), (r.state[2], r.state[3]));
            let q = ReducedState::from_coords(r.state, 3.0);
            let psi = reduced_to_fields(&q, 0.0).unwrap();
            assert!((ham.evaluate(&psi).unwrap() - 3.14).abs() < 1e-8);
            let velocity = flow_derivative(&q, &params).unwrap()[1];
            match direction {
                Direction::Positive => assert!(velocity > 0.0),
                _ => assert!(velocity < 0.0),
            }
        }
        for w in out.records.windows(2) {
            assert!((w[0].trajectory_id, w[0].t) < (w[1].trajectory_id, w[1].t));
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let params = ring(0.6);
    let starts = sample_shell(&params, 3.0, 3.14, 5, 42, Coordinate::X1).unwrap();
    let cfg = IntegratorConfig::default().with_t_end(500.0);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let out = section(&starts, &SectionSpec::default(), 3.14, &params, &cfg).unwrap();
            let classes = classify_records(&out.records, starts.len());
            (out, classes)
        })
    };
    let (a, ca) = run(1);
    let (b, cb) = run(3);
    assert_eq!(a, b);
    assert_eq!(ca, cb);
}

#[test]
fn sampling_is_reproducible_and_on_shell() {
    let params = ring(0.6);
    let a = sample_shell(&params, 3.0, 3.14, 20, 43, Coordinate::X1).unwrap();
    let b = sample_shell(&params, 3.0, 3.14, 20, 43, Coordinate::X1).unwrap();
    let c = sample_shell(&params, 3.0, 3.14, 20, 44, Coordinate::X1).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    for q in &a {
        assert!((params.hamiltonian(q).unwrap() - 3.14).abs() < 1e-11);
    }
}

#[test]
fn shell_slice_points_are_inside_the_band() {
    let params = ring(0.6);
    let spec = ShellSliceSpec {
        fixed: Coordinate::Y1,
        value: 0.0,
        ranges: [(-1.7, 1.7); 3],
        resolution: [31; 3],
        energy: 3.14,
        band: 0.05,
        total: 3.0,
    };
    let points = shell_slice(&spec, &params).unwrap();
    assert!(!points.is_empty());
    assert!(points.iter().any(|p| p.sign_change));
    for p in &points {
        assert_eq!(p.coords[2], 0.0);
        let h = params.hamiltonian(&ReducedState::from_coords(p.coords, 3.0)).unwrap();
        assert!((h - p.energy).abs() < 1e-12);
        assert!((h - 3.14).abs() < 0.05);
    }
}

#[test]
fn energy_below_the_spectrum_gives_an_empty_slice() {
    let params = ring(0.6);
    let spec = ShellSliceSpec {
        fixed: Coordinate::Y1,
        value: 0.0,
        ranges: [(-1.7, 1.7); 3],
        resolution: [21; 3],
        energy: -50.0,
        band: 0.05,
        total: 3.0,
    };
    assert!(shell_slice(&spec, &params).unwrap().is_empty());
}
