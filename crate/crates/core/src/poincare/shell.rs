//! Energy-shell projection, on-shell sampling and shell slices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::root::bracketed_root;
use crate::error::{Error, Result};
use crate::transforms::{Coordinate, ReducedParams, ReducedState};

/// Projected states satisfy `|H - E| < SHELL_TOL`.
pub const SHELL_TOL: f64 = 1e-11;

const SCAN_POINTS: usize = 2001;

/// Moves `free` so that the state lies on the shell `H = E`.
///
/// The coordinate is scanned over `[-sqrt(N), sqrt(N)]`; among the sign changes
/// of `H - E` the one nearest to the current value is refined. A state
/// already on the shell is returned unchanged.
pub fn shell_project(
    state: &ReducedState,
    energy: f64,
    params: &ReducedParams,
    free: Coordinate,
) -> Result<ReducedState> {
    if let Ok(h) = params.hamiltonian(state) {
        if (h - energy).abs() < SHELL_TOL {
            return Ok(*state);
        }
    }
    if !(state.total.is_finite() && state.total >= 0.0) {
        return Err(Error::Domain(format!("total number {} is not admissible", state.total)));
    }
    let idx = free.index();
    let with = |v: f64| {
        let mut c = state.coords();
        c[idx] = v;
        ReducedState::from_coords(c, state.total)
    };
    let g = |v: f64| params.hamiltonian(&with(v)).map(|h| h - energy);
    let r = state.total.sqrt();
    let grid: Vec<(f64, Option<f64>)> = (0..SCAN_POINTS)
        .map(|k| {
            let v = -r + 2.0 * r * k as f64 / (SCAN_POINTS - 1) as f64;
            (v, g(v).ok())
        })
        .collect();
    let current = state.coords()[idx];
    let mut best: Option<(f64, usize)> = None;
    for k in 0..SCAN_POINTS - 1 {
        if let ((a, Some(ga)), (b, Some(gb))) = (grid[k], grid[k + 1]) {
            if ga == 0.0 || gb == 0.0 || ga.signum() != gb.signum() {
                let dist = (0.5 * (a + b) - current).abs();
                if best.is_none_or(|(d, _)| dist < d) {
                    best = Some((dist, k));
                }
            }
        }
    }
    let (_, k) =
        best.ok_or_else(|| Error::NoRoot(format!("H - {energy} has no sign change along {free} within the domain")))?;
    let ((a, ga), (b, gb)) = ((grid[k].0, grid[k].1.unwrap()), (grid[k + 1].0, grid[k + 1].1.unwrap()));
    let (v, gv) = bracketed_root(g, a, b, ga, gb, 0.1 * SHELL_TOL)?;
    if gv.abs() >= SHELL_TOL {
        return Err(Error::NoRoot(format!("shell projection residual {gv:e} too large")));
    }
    Ok(with(v))
}

/// Draws `count` interior states on the shell `H = E` at total number `total`.
///
/// Points are drawn uniformly in the cube `[-sqrt(N), sqrt(N)]^4`, kept if
/// strictly inside the domain and projected along `free`.
pub fn sample_shell(
    params: &ReducedParams,
    total: f64,
    energy: f64,
    count: usize,
    seed: u64,
    free: Coordinate,
) -> Result<Vec<ReducedState>> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Validation(format!("total number must be positive, got {total}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = total.sqrt();
    let max_attempts = 1000 * count.max(1);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Sampling(format!(
                "found only {} of {count} on-shell states at E = {energy} after {max_attempts} draws",
                out.len()
            )));
        }
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-r..=r));
        let q = ReducedState::from_coords(c, total);
        if !params.admits_interior(&q) {
            continue;
        }
        if let Ok(p) = shell_project(&q, energy, params, free) {
            if params.admits_interior(&p) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellSliceSpec {
    pub fixed: Coordinate,
    pub value: f64,
    /// Ranges of the three free coordinates, in storage order.
    pub ranges: [(f64, f64); 3],
    pub resolution: [usize; 3],
    pub energy: f64,
    /// Half-width of the energy band.
    pub band: f64,
    pub total: f64,
}

impl ShellSliceSpec {
    pub fn free_coordinates(&self) -> [Coordinate; 3] {
        let mut out = [Coordinate::X1; 3];
        let mut k = 0;
        for c in Coordinate::ALL {
            if c != self.fixed {
                out[k] = c;
                k += 1;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.band.is_finite() && self.band > 0.0) {
            return Err(Error::Validation(format!("band half-width must be positive, got {}", self.band)));
        }
        if self.resolution.iter().any(|&r| r < 2) {
            return Err(Error::Validation("slice resolutions must be at least 2".into()));
        }
        if self.ranges.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(Error::Validation("slice ranges must be finite with lower < upper".into()));
        }
        if !(self.value.is_finite() && self.energy.is_finite() && self.total.is_finite()) {
            return Err(Error::Validation("slice value, energy and total must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellPoint {
    pub coords: [f64; 4],
    pub energy: f64,
    /// `H - E` changes sign between this grid point and a neighbour.
    pub sign_change: bool,
}

/// Grid points of the slice with `|H - E| < band`, in grid order.
pub fn shell_slice(spec: &ShellSliceSpec, params: &ReducedParams) -> Result<Vec<ShellPoint>> {
    spec.validate()?;
    let free = spec.free_coordinates();
    let [n0, n1, n2] = spec.resolution;
    let axis = |a: usize, k: usize| {
        let (lo, hi) = spec.ranges[a];
        lo + (hi - lo) * k as f64 / (spec.resolution[a] - 1) as f64
    };
    let point = |i: usize, j: usize, k: usize| {
        let mut c = [0.0; 4];
        c[spec.fixed.index()] = spec.value;
        c[free[0].index()] = axis(0, i);
        c[free[1].index()] = axis(1, j);
        c[free[2].index()] = axis(2, k);
        c
    };
    // H - E on the grid; None outside the domain
    let values: Vec<Option<f64>> = (0..n0)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..n1).flat_map(move |j| {
                (0..n2).map(move |k| {
                    params
                        .hamiltonian(&ReducedState::from_coords(point(i, j, k), spec.total))
                        .ok()
                        .map(|h| h - spec.energy)
                })
            })
        })
        .collect();
    let at = |i: usize, j: usize, k: usize| values[(i * n1 + j) * n2 + k];
    let mut out = Vec::new();
    for i in 0..n0 {
        for j in 0..n1 {
            for k in 0..n2 {
                let Some(g) = at(i, j, k) else { continue };
                if g.abs() >= spec.band {
                    continue;
                }
                let mut neighbours = Vec::with_capacity(6);
                if i > 0 {
                    neighbours.push(at(i - 1, j, k));
                }
                if i + 1 < n0 {
                    neighbours.push(at(i + 1, j, k));
                }
                if j > 0 {
                    neighbours.push(at(i, j - 1, k));
                }
                if j + 1 < n1 {
                    neighbours.push(at(i, j + 1, k));
                }
                if k > 0 {
                    neighbours.push(at(i, j, k - 1));
                }
                if k + 1 < n2 {
                    neighbours.push(at(i, j, k + 1));
                }
                let sign_change =
                    g == 0.0 || neighbours.into_iter().flatten().any(|h| h == 0.0 || h.signum() != g.signum());
                out.push(ShellPoint { coords: point(i, j, k), energy: g + spec.energy, sign_change });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::hamiltonian::SaturationFunction;
    use crate::transforms::Topology;

    fn figure_params() -> ReducedParams {
        ReducedParams::new([1.0; 3], Complex64::new(0.6, 0.0), SaturationFunction::Exponential, Topology::Cyclic)
    }

    #[test]
    fn on_shell_state_is_unchanged() {
        let p = figure_params();
        let q = ReducedState::new(0.5, -0.2, 0.3, 0.7, 3.0);
        let e = p.hamiltonian(&q).unwrap();
        assert_eq!(shell_project(&q, e, &p, Coordinate::X1).unwrap(), q);
    }

    #[test]
    fn uncoupled_root_matches_closed_form() {
        let p = ReducedParams::new(
            [1.5, 1.0, 0.6],
            Complex64::new(0.0, 0.0),
            SaturationFunction::Exponential,
            Topology::Cyclic,
        );
        let q = ReducedState::new(0.3, 0.2, -0.3, 0.4, 2.0);
        let e = 2.1;
        // H = n (0.5) + m (-0.4) + 2  =>  n = (E - 2 + 0.4 m) / 0.5
        let n = (e - 2.0 + 0.4 * q.m()) / 0.5;
        let x1 = (n - q.x2 * q.x2).sqrt();
        let out = shell_project(&q, e, &p, Coordinate::X1).unwrap();
        assert!((out.x1 - x1).abs() < 1e-11, "{} vs {x1}", out.x1);
        assert!((p.hamiltonian(&out).unwrap() - e).abs() < SHELL_TOL);
    }

    #[test]
    fn sampled_states_are_on_shell() {
        let p = figure_params();
        let states = sample_shell(&p, 3.0, 3.14, 20, 11, Coordinate::X1).unwrap();
        assert_eq!(states.len(), 20);
        for s in &states {
            assert!((p.hamiltonian(s).unwrap() - 3.14).abs() < SHELL_TOL);
            assert!(p.admits_interior(s));
        }
        assert_eq!(states, sample_shell(&p, 3.0, 3.14, 20, 11, Coordinate::X1).unwrap());
    }

    #[test]
    fn unreachable_energy_has_no_root() {
        let p = figure_params();
        let q = ReducedState::new(0.5, -0.2, 0.3, 0.7, 3.0);
        assert!(matches!(shell_project(&q, 100.0, &p, Coordinate::X1), Err(Error::NoRoot(_))));
    }

    fn slice_spec(energy: f64) -> ShellSliceSpec {
        ShellSliceSpec {
            fixed: Coordinate::Y1,
            value: 0.0,
            ranges: [(-1.7, 1.7); 3],
            resolution: [25, 25, 25],
            energy,
            band: 0.05,
            total: 3.0,
        }
    }

    #[test]
    fn slice_points_are_in_band() {
        let p = figure_params();
        let pts = shell_slice(&slice_spec(3.14), &p).unwrap();
        assert!(!pts.is_empty());
        for pt in &pts {
            let h = p.hamiltonian(&ReducedState::from_coords(pt.coords, 3.0)).unwrap();
            assert!((h - 3.14).abs() < 0.05 && h == pt.energy);
            assert_eq!(pt.coords[2], 0.0);
        }
        assert!(pts.iter().any(|p| p.sign_change));
        assert!(shell_slice(&slice_spec(-10.0), &p).unwrap().is_empty());
    }

    #[test]
    fn degenerate_uncoupled_shell_is_everything_or_nothing() {
        let p =
            ReducedParams::new([1.0; 3], Complex64::new(0.0, 0.0), SaturationFunction::Exponential, Topology::Cyclic);
        let spec = ShellSliceSpec { resolution: [6, 6, 6], ..slice_spec(3.0) };
        let all = shell_slice(&spec, &p).unwrap();
        let admissible = (0..216)
            .filter(|&n| {
                let f = |k: usize| -1.7 + 3.4 * k as f64 / 5.0;
                let q = ReducedState::new(f(n / 36), f(n / 6 % 6), 0.0, f(n % 6), 3.0);
                p.admits(&q)
            })
            .count();
        assert_eq!(all.len(), admissible);
        assert!(shell_slice(&ShellSliceSpec { energy: 3.5, ..spec }, &p).unwrap().is_empty());
    }
}
