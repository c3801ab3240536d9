//! Largest Lyapunov exponent by the two-trajectory renormalization method.

use serde::{Deserialize, Serialize};

use super::flow_derivative;
use super::integrator::{IntegratorConfig, OdeSystem, StepOutcome, Stepper};
use crate::error::{Error, Result};
use crate::transforms::{ReducedParams, ReducedState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovConfig {
    pub t_total: f64,
    pub renorm_interval: f64,
    /// Initial and renormalized distance between the two trajectories.
    pub perturbation: f64,
    /// Fraction of `t_total` excluded from the estimate.
    pub transient_fraction: f64,
    pub integrator: IntegratorConfig,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            t_total: 2000.0,
            renorm_interval: 1.0,
            perturbation: 1e-8,
            transient_fraction: 0.1,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl LyapunovConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("t_total", self.t_total), ("renorm_interval", self.renorm_interval), ("perturbation", self.perturbation)]
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::Validation(format!(
                "transient_fraction must lie in [0, 1), got {}",
                self.transient_fraction
            )));
        }
        self.integrator.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    /// Running estimate `(t, lambda(t))` after each renormalization past the transient.
    pub series: Vec<(f64, f64)>,
    /// Set when the flow hit the domain edge before `t_total`.
    pub partial: bool,
    pub t_reached: f64,
}

struct PairFlow<'a> {
    params: &'a ReducedParams,
    total: f64,
}

impl OdeSystem<8> for PairFlow<'_> {
    fn rhs(&self, y: &[f64; 8]) -> Result<[f64; 8]> {
        let a = flow_derivative(&ReducedState::new(y[0], y[1], y[2], y[3], self.total), self.params)?;
        let b = flow_derivative(&ReducedState::new(y[4], y[5], y[6], y[7], self.total), self.params)?;
        Ok([a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]])
    }
}

fn separation(y: &[f64; 8]) -> f64 {
    (0..4).map(|i| (y[i + 4] - y[i]).powi(2)).sum::<f64>().sqrt()
}

/// Estimates the largest Lyapunov exponent (per unit rescaled time).
///
/// A companion trajectory starts at distance `perturbation` along
/// `(1, 1, 1, 1) / 2`. Every `renorm_interval` the logarithmic growth of the
/// separation is accumulated and the companion is pulled back to the original
/// distance along the current separation.
pub fn lyapunov_max(initial: &ReducedState, params: &ReducedParams, cfg: &LyapunovConfig) -> Result<LyapunovEstimate> {
    cfg.validate()?;
    let d0 = cfg.perturbation;
    let q = initial.coords();
    let mut y = [0.0; 8];
    for i in 0..4 {
        y[i] = q[i];
        y[i + 4] = q[i] + 0.5 * d0;
    }
    let flow = PairFlow { params, total: initial.total };
    let mut icfg = cfg.integrator;
    icfg.t_end = cfg.t_total;
    icfg.max_step = icfg.max_step.min(cfg.renorm_interval);
    let mut stepper = Stepper::new(&flow, y, icfg)?;

    let transient = cfg.transient_fraction * cfg.t_total;
    let mut log_sum_all = 0.0;
    let mut log_sum = 0.0;
    let mut counted_time = 0.0;
    let mut series = Vec::new();
    let mut partial = false;
    let mut k = 1usize;
    while stepper.time() < cfg.t_total {
        let t_next = (k as f64 * cfg.renorm_interval).min(cfg.t_total);
        let t_start = stepper.time();
        let mut hit_boundary = false;
        while stepper.time() < t_next {
            if let StepOutcome::Boundary { .. } = stepper.step(t_next)? {
                hit_boundary = true;
                break;
            }
        }
        let y = *stepper.state();
        let d = separation(&y);
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Accuracy(format!("trajectory separation became {d} at t = {}", stepper.time())));
        }
        let growth = (d / d0).ln();
        log_sum_all += growth;
        if t_start >= transient {
            log_sum += growth;
            counted_time += stepper.time() - t_start;
            series.push((stepper.time(), log_sum / counted_time));
        }
        let mut renormed = y;
        for i in 0..4 {
            renormed[i + 4] = y[i] + (y[i + 4] - y[i]) * (d0 / d);
        }
        stepper.reset_state(renormed);
        if hit_boundary {
            partial = true;
            break;
        }
        k += 1;
    }
    let t_reached = stepper.time();
    let lambda = if counted_time > 0.0 {
        log_sum / counted_time
    } else if t_reached > 0.0 {
        log_sum_all / t_reached
    } else {
        return Err(Error::Domain("flow stopped before the first renormalization".into()));
    };
    Ok(LyapunovEstimate { lambda, series, partial, t_reached })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::hamiltonian::SaturationFunction;
    use crate::transforms::Topology;

    #[test]
    fn uncoupled_exponent_is_small() {
        let p = ReducedParams::new(
            [1.5, 1.0, 0.6],
            Complex64::new(0.0, 0.0),
            SaturationFunction::Exponential,
            Topology::Cyclic,
        );
        let q = ReducedState::new(0.6, 0.2, -0.3, 0.4, 2.0);
        let cfg = LyapunovConfig { t_total: 500.0, ..Default::default() };
        let est = lyapunov_max(&q, &p, &cfg).unwrap();
        assert!(!est.partial);
        assert!(est.lambda.abs() < 0.02, "{}", est.lambda);
        assert!(!est.series.is_empty());
    }

    #[test]
    fn bad_config_is_rejected() {
        let p =
            ReducedParams::new([1.0; 3], Complex64::new(0.6, 0.0), SaturationFunction::Exponential, Topology::Cyclic);
        let q = ReducedState::new(0.6, 0.2, -0.3, 0.4, 2.0);
        let cfg = LyapunovConfig { transient_fraction: 1.5, ..Default::default() };
        assert!(matches!(lyapunov_max(&q, &p, &cfg), Err(Error::Validation(_))));
    }
}
