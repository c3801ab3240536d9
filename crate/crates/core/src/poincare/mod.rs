//! Surfaces of section of the reduced flow and energy-shell utilities.

mod dimension;
mod root;
mod shell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{IntegratorConfig, ReducedFlow, StepOutcome, Stepper};
use crate::error::{Error, Result};
use crate::transforms::{Coordinate, ReducedParams, ReducedState};

pub use dimension::{
    classify_points, classify_records, correlation_dimension, Classification, TrajectoryClass, AREA_THRESHOLD,
    CURVE_THRESHOLD, MIN_POINTS,
};
pub use shell::{sample_shell, shell_project, shell_slice, ShellPoint, ShellSliceSpec, SHELL_TOL};

/// Crossing offsets are refined below this.
pub const CROSSING_TOL: f64 = 1e-10;

/// Largest accepted `|H(initial) - E|` for section initial conditions.
pub const ON_SHELL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Section coordinate increasing through the level.
    Positive,
    Negative,
    Both,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "positive" => Ok(Direction::Positive),
            "-" | "negative" => Ok(Direction::Negative),
            "both" => Ok(Direction::Both),
            other => Err(Error::Validation(format!("unknown crossing direction `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub coordinate: Coordinate,
    pub level: f64,
    pub direction: Direction,
    pub projection: (Coordinate, Coordinate),
}

impl Default for SectionSpec {
    /// `x2 = 0`, crossing upwards, recording `(y1, y2)`.
    fn default() -> Self {
        Self {
            coordinate: Coordinate::X2,
            level: 0.0,
            direction: Direction::Positive,
            projection: (Coordinate::Y1, Coordinate::Y2),
        }
    }
}

impl SectionSpec {
    pub fn validate(&self) -> Result<()> {
        let (p, q) = self.projection;
        if p == q || p == self.coordinate || q == self.coordinate {
            return Err(Error::Validation(format!(
                "projection ({p}, {q}) must be two distinct coordinates other than {}",
                self.coordinate
            )));
        }
        if !self.level.is_finite() {
            return Err(Error::Validation("section level must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionRecord {
    pub trajectory_id: usize,
    /// Crossing time (rescaled time).
    pub t: f64,
    /// First projected coordinate.
    pub p: f64,
    /// Second projected coordinate.
    pub q: f64,
    /// `(x1, x2, y1, y2)` at the crossing.
    pub state: [f64; 4],
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionOutput {
    /// Sorted by `(trajectory_id, t)`.
    pub records: Vec<SectionRecord>,
    /// Trajectories that stopped at the domain edge before `t_end`.
    pub partial: Vec<usize>,
}

/// Computes section crossings of each trajectory started from `initials`.
///
/// Trajectory ids are indices into `initials`. Crossings are detected by a
/// sign change of the section offset across an accepted step and refined on
/// the re-stepped solution until the offset is below [`CROSSING_TOL`].
pub fn section(
    initials: &[ReducedState],
    spec: &SectionSpec,
    energy: f64,
    params: &ReducedParams,
    cfg: &IntegratorConfig,
) -> Result<SectionOutput> {
    spec.validate()?;
    cfg.validate()?;
    for (id, q) in initials.iter().enumerate() {
        let h = params.hamiltonian(q)?;
        if (h - energy).abs() >= ON_SHELL_TOL {
            return Err(Error::Validation(format!(
                "initial condition {id} has H = {h}, not on the shell E = {energy} (|H - E| = {:e})",
                (h - energy).abs()
            )));
        }
    }
    let per_trajectory = initials
        .par_iter()
        .enumerate()
        .map(|(id, q)| trajectory_crossings(id, q, spec, params, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut partial = Vec::new();
    for (id, (recs, hit_boundary)) in per_trajectory.into_iter().enumerate() {
        records.extend(recs);
        if hit_boundary {
            partial.push(id);
        }
    }
    records.sort_by(|a, b| a.trajectory_id.cmp(&b.trajectory_id).then(a.t.total_cmp(&b.t)));
    Ok(SectionOutput { records, partial })
}

fn trajectory_crossings(
    id: usize,
    initial: &ReducedState,
    spec: &SectionSpec,
    params: &ReducedParams,
    cfg: &IntegratorConfig,
) -> Result<(Vec<SectionRecord>, bool)> {
    let total = initial.total;
    let flow = ReducedFlow::new(params, total);
    let mut stepper = Stepper::new(&flow, initial.coords(), *cfg)?;
    let c = spec.coordinate.index();
    let offset = |y: &[f64; 4]| y[c] - spec.level;
    let mut records = Vec::new();
    while stepper.time() < cfg.t_end {
        match stepper.step(cfg.t_end)? {
            StepOutcome::Accepted { t0, y0, h } => {
                let g0 = offset(&y0);
                let y1 = *stepper.state();
                let g1 = offset(&y1);
                let upward = g0 < 0.0 && g1 >= 0.0;
                let downward = g0 > 0.0 && g1 <= 0.0;
                let wanted = match spec.direction {
                    Direction::Positive => upward,
                    Direction::Negative => downward,
                    Direction::Both => upward || downward,
                };
                if !wanted {
                    continue;
                }
                let (theta, y) = if g1.abs() < CROSSING_TOL {
                    (h, y1)
                } else {
                    let (theta, _) = root::bracketed_root(
                        |s| Ok(offset(&stepper.single_step(&y0, s)?)),
                        0.0,
                        h,
                        g0,
                        g1,
                        CROSSING_TOL * 0.01,
                    )?;
                    (theta, stepper.single_step(&y0, theta)?)
                };
                let state = ReducedState::from_coords(y, total);
                records.push(SectionRecord {
                    trajectory_id: id,
                    t: t0 + theta,
                    p: y[spec.projection.0.index()],
                    q: y[spec.projection.1.index()],
                    state: y,
                    energy: params.hamiltonian(&state)?,
                });
            }
            StepOutcome::Boundary { .. } => return Ok((records, true)),
        }
    }
    Ok((records, false))
}
