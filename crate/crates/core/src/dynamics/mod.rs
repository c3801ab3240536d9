//! The reduced three-site flow.
//!
//! In the original time the cartesian equations carry a factor one half,
//! `x1' = dH/dx2 / 2`. Throughout this module time is rescaled so that
//!
//! ```text
//! x1' =  dH/dx2    x2' = -dH/dx1    y1' =  dH/dy2    y2' = -dH/dy1
//! ```
//!
//! and all reported times are rescaled times (half the original time).

mod integrator;
mod lyapunov;

use crate::error::{Error, Result};
use crate::transforms::{reduced_to_fields, ReducedParams, ReducedState};

pub use integrator::{IntegratorConfig, Method, OdeSystem, StepOutcome, Stepper};
pub use lyapunov::{lyapunov_max, LyapunovConfig, LyapunovEstimate};

/// Hamiltonian vector field of the reduced Hamiltonian in rescaled time.
pub fn flow_derivative(q: &ReducedState, params: &ReducedParams) -> Result<[f64; 4]> {
    let g = params.gradient(q)?;
    Ok([g[1], -g[0], g[3], -g[2]])
}

/// The reduced flow at fixed `N` as an [`OdeSystem`]; `sign = -1` runs it backwards.
pub struct ReducedFlow<'a> {
    pub params: &'a ReducedParams,
    pub total: f64,
    pub sign: f64,
}

impl<'a> ReducedFlow<'a> {
    pub fn new(params: &'a ReducedParams, total: f64) -> Self {
        Self { params, total, sign: 1.0 }
    }

    pub fn reversed(params: &'a ReducedParams, total: f64) -> Self {
        Self { params, total, sign: -1.0 }
    }
}

impl OdeSystem<4> for ReducedFlow<'_> {
    fn rhs(&self, y: &[f64; 4]) -> Result<[f64; 4]> {
        let v = flow_derivative(&ReducedState::from_coords(*y, self.total), self.params)?;
        Ok(v.map(|c| self.sign * c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// The flow could not be continued past `t` (domain edge).
    Boundary {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, ReducedState)>,
    /// Largest `|H(t) - H(0)| / max(1, |H(0)|)` over the samples.
    pub energy_drift: f64,
    /// Largest `|sum_i |psi_i|^2 - N| / max(1, N)` over the samples, with the
    /// fields rebuilt from the reduced coordinates.
    pub number_drift: f64,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &ReducedState {
        &self.samples.last().expect("trajectory has at least the initial sample").1
    }
}

/// Integrates the reduced flow from `initial` over `[0, cfg.t_end]`.
pub fn integrate(initial: &ReducedState, cfg: &IntegratorConfig, params: &ReducedParams) -> Result<Trajectory> {
    run(initial, cfg, params, ReducedFlow::new(params, initial.total))
}

/// Integrates the flow backwards; the sample at time `t` is the state at `-t`.
pub fn integrate_backward(
    initial: &ReducedState,
    cfg: &IntegratorConfig,
    params: &ReducedParams,
) -> Result<Trajectory> {
    run(initial, cfg, params, ReducedFlow::reversed(params, initial.total))
}

fn run(
    initial: &ReducedState,
    cfg: &IntegratorConfig,
    params: &ReducedParams,
    flow: ReducedFlow<'_>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !params.admits(initial) {
        return Err(Error::Domain(format!("initial state {:?} is outside the domain", initial.coords())));
    }
    let total = initial.total;
    let h0 = params.hamiltonian(initial)?;
    let mut stepper = Stepper::new(&flow, initial.coords(), *cfg)?;
    let mut samples = vec![(0.0, *initial)];
    let mut termination = Termination::Completed;
    let mut next_sample: usize = 1;
    while stepper.time() < cfg.t_end {
        match stepper.step(cfg.t_end)? {
            StepOutcome::Accepted { t0, y0, h } => {
                let t1 = t0 + h;
                match cfg.sample_interval {
                    None => samples.push((stepper.time(), ReducedState::from_coords(*stepper.state(), total))),
                    Some(dt) => loop {
                        let ts = next_sample as f64 * dt;
                        let at_end = (ts - t1).abs() <= 1e-12 * t1.max(1.0);
                        if ts > t1 && !at_end {
                            break;
                        }
                        let y = if at_end { *stepper.state() } else { stepper.single_step(&y0, ts - t0)? };
                        samples.push((ts, ReducedState::from_coords(y, total)));
                        next_sample += 1;
                    },
                }
            }
            StepOutcome::Boundary { t } => {
                termination = Termination::Boundary { t };
                if samples.last().map(|s| s.0) != Some(t) {
                    samples.push((t, ReducedState::from_coords(*stepper.state(), total)));
                }
                break;
            }
        }
    }
    let mut energy_drift: f64 = 0.0;
    let mut number_drift: f64 = 0.0;
    for (_, q) in &samples {
        let h = params.hamiltonian(q)?;
        energy_drift = energy_drift.max((h - h0).abs() / h0.abs().max(1.0));
        if let Ok(psi) = reduced_to_fields(q, 0.0) {
            number_drift = number_drift.max((psi.total_number() - total).abs() / total.abs().max(1.0));
        }
    }
    Ok(Trajectory {
        samples,
        energy_drift,
        number_drift,
        termination,
        accepted_steps: stepper.accepted_steps,
        rejected_steps: stepper.rejected_steps,
    })
}
