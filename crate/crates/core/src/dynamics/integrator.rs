//! Integrators for autonomous systems of fixed dimension.
//!
//! `AdaptiveRk` is the 8(5,3) Dormand-Prince pair with the usual combined
//! error norm and step-size controller. `ImplicitMidpoint` is the symmetric,
//! symplectic one-stage Gauss method at a fixed step, solved by fixed-point
//! iteration.
//!
//! A stage that leaves the domain of the vector field counts as a rejected
//! step and halves the step size. When the step falls below `min_step` the
//! stepper reports a boundary event at the current time: repeated halving
//! brackets the boundary crossing like a bisection.

#![allow(clippy::excessive_precision)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Autonomous vector field `y' = F(y)`.
pub trait OdeSystem<const D: usize>: Sync {
    fn rhs(&self, y: &[f64; D]) -> Result<[f64; D]>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AdaptiveRk,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step; the fixed step of `ImplicitMidpoint`.
    pub max_step: f64,
    pub t_end: f64,
    /// Smallest step tried before a boundary event or underflow is reported.
    pub min_step: f64,
    /// Spacing of recorded samples; `None` records every accepted step.
    pub sample_interval: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveRk,
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_step: 0.5,
            t_end: 100.0,
            min_step: 1e-12,
            sample_interval: None,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("max_step", self.max_step)?;
        positive("t_end", self.t_end)?;
        positive("min_step", self.min_step)?;
        if let Some(dt) = self.sample_interval {
            positive("sample_interval", dt)?;
        }
        if self.min_step > self.max_step {
            return Err(Error::Validation("min_step exceeds max_step".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome<const D: usize> {
    /// One step was taken from `(t0, y0)` with step `h`; the stepper now sits at `t0 + h`.
    Accepted { t0: f64, y0: [f64; D], h: f64 },
    /// The field could not be evaluated on any step longer than `min_step`.
    Boundary { t: f64 },
}

pub struct Stepper<'a, S: OdeSystem<D>, const D: usize> {
    sys: &'a S,
    cfg: IntegratorConfig,
    t: f64,
    y: [f64; D],
    h: f64,
    fac_old: f64,
    rejected: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const ALPHA: f64 = 1.0 / 8.0;

impl<'a, S: OdeSystem<D>, const D: usize> Stepper<'a, S, D> {
    pub fn new(sys: &'a S, y0: [f64; D], cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let f0 = sys.rhs(&y0)?;
        let h = match cfg.method {
            Method::ImplicitMidpoint => cfg.max_step,
            Method::AdaptiveRk => {
                let fnorm = norm(&f0);
                let ynorm = norm(&y0).max(1.0);
                let guess = if fnorm > 0.0 { 1e-2 * ynorm / fnorm } else { cfg.max_step };
                guess.clamp(cfg.min_step * 10.0, cfg.max_step)
            }
        };
        Ok(Self { sys, cfg, t: 0.0, y: y0, h, fac_old: 1e-4, rejected: false, accepted_steps: 0, rejected_steps: 0 })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; D] {
        &self.y
    }

    /// Replaces the current state, keeping time and step size.
    pub fn reset_state(&mut self, y: [f64; D]) {
        self.y = y;
    }

    /// Takes one accepted step that does not go past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<StepOutcome<D>> {
        let remaining = t_limit - self.t;
        if remaining <= 0.0 {
            return Err(Error::Validation(format!("step requested past t_limit {t_limit} at t = {}", self.t)));
        }
        let mut h = match self.cfg.method {
            Method::ImplicitMidpoint => self.cfg.max_step,
            Method::AdaptiveRk => self.h,
        };
        loop {
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            let attempt = match self.cfg.method {
                Method::AdaptiveRk => self.rk_step(&self.y, h_try),
                Method::ImplicitMidpoint => self.midpoint_step(&self.y, h_try).map(|y| (y, 0.0)),
            };
            match attempt {
                Ok((y1, err)) if err <= 1.0 => {
                    let t0 = self.t;
                    let y0 = self.y;
                    if self.cfg.method == Method::AdaptiveRk {
                        let fac11 = err.powf(ALPHA);
                        let fac = (fac11 / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                        let mut h_new = (h_try / fac).min(self.cfg.max_step);
                        if self.rejected {
                            h_new = h_new.min(h_try);
                        }
                        self.fac_old = err.max(1e-4);
                        self.rejected = false;
                        // keep the controller's step when the last step was only clipped to t_limit
                        self.h = if clipped { self.h.max(h_new) } else { h_new };
                    }
                    self.t = if clipped { t_limit } else { t0 + h_try };
                    self.y = y1;
                    self.accepted_steps += 1;
                    return Ok(StepOutcome::Accepted { t0, y0, h: self.t - t0 });
                }
                Ok((_, err)) => {
                    self.rejected_steps += 1;
                    self.rejected = true;
                    let fac11 = err.powf(ALPHA);
                    h = h_try / (1.0 / FAC_MIN).min(fac11 / SAFETY);
                    if !h.is_finite() {
                        h = h_try * FAC_MIN;
                    }
                    if h < self.cfg.min_step {
                        return Err(Error::StepUnderflow { t: self.t });
                    }
                    self.h = h;
                }
                Err(Error::Domain(_)) | Err(Error::DerivativeDomain(_)) => {
                    self.rejected_steps += 1;
                    self.rejected = true;
                    h = h_try * 0.5;
                    if h < self.cfg.min_step {
                        return Ok(StepOutcome::Boundary { t: self.t });
                    }
                    if self.cfg.method == Method::AdaptiveRk {
                        self.h = h;
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// State at `t0 + h` obtained by one step of size `h` from `(t0, y0)`.
    ///
    /// Used as dense output inside an accepted step: the local error of the
    /// shorter step is no larger than that of the accepted one.
    pub fn single_step(&self, y0: &[f64; D], h: f64) -> Result<[f64; D]> {
        if h == 0.0 {
            return Ok(*y0);
        }
        match self.cfg.method {
            Method::AdaptiveRk => Ok(self.rk_step(y0, h)?.0),
            Method::ImplicitMidpoint => self.midpoint_step(y0, h),
        }
    }

    fn rk_step(&self, y0: &[f64; D], h: f64) -> Result<([f64; D], f64)> {
        let mut k = [[0.0; D]; 12];
        k[0] = self.sys.rhs(y0)?;
        for s in 1..12 {
            let mut y = *y0;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s - 1][j];
                if a != 0.0 {
                    for i in 0..D {
                        y[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = self.sys.rhs(&y)?;
        }
        let mut y1 = *y0;
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..D {
            let incr: f64 = (0..12).map(|s| B[s] * k[s][i]).sum();
            y1[i] = y0[i] + h * incr;
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * y0[i].abs().max(y1[i].abs());
            let e5: f64 = (0..12).map(|s| E[s] * k[s][i]).sum();
            let e3 = incr - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
            err += (e5 / sc).powi(2);
            err2 += (e3 / sc).powi(2);
        }
        if y1.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("step produced a non-finite state".into()));
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err * (1.0 / (deno * D as f64)).sqrt();
        Ok((y1, err))
    }

    fn midpoint_step(&self, y0: &[f64; D], h: f64) -> Result<[f64; D]> {
        const MAX_ITER: usize = 200;
        let f0 = self.sys.rhs(y0)?;
        let mut y1 = *y0;
        for i in 0..D {
            y1[i] += h * f0[i];
        }
        let mut last = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let mut mid = [0.0; D];
            for i in 0..D {
                mid[i] = 0.5 * (y0[i] + y1[i]);
            }
            let f = self.sys.rhs(&mid)?;
            let mut change: f64 = 0.0;
            let mut next = *y0;
            for i in 0..D {
                next[i] += h * f[i];
                change = change.max((next[i] - y1[i]).abs() / (1.0 + next[i].abs()));
            }
            y1 = next;
            // below 1e-12 a non-decreasing change means the iteration sits at rounding level
            if change < 1e-15 || (change < 1e-12 && change >= last) {
                return Ok(y1);
            }
            last = change;
        }
        Err(Error::Accuracy(format!("implicit midpoint iteration did not converge at step {h}")))
    }
}

fn norm<const D: usize>(v: &[f64; D]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// Dormand-Prince 8(5,3) coefficients, stages 2..12 (row s-1 holds a_{s,j}).
const A: [[f64; 11]; 11] = [
    [5.26001519587677318785587544488e-2, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [2.95875854768068491816892993775e-2, 0., 8.87627564304205475450678981324e-2, 0., 0., 0., 0., 0., 0., 0., 0.],
    [
        2.41365134159266685502369798665e-1,
        0.,
        -8.84549479328286085344864962717e-1,
        9.24834003261792003115737966543e-1,
        0.,
        0.,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        3.7037037037037037037037037037e-2,
        0.,
        0.,
        1.70828608729473871279604482173e-1,
        1.25467687566822425016691814123e-1,
        0.,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        3.7109375e-2,
        0.,
        0.,
        1.70252211019544039314978060272e-1,
        6.02165389804559606850219397283e-2,
        -1.7578125e-2,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        3.70920001185047927108779319836e-2,
        0.,
        0.,
        1.70383925712239993810214054705e-1,
        1.07262030446373284651809199168e-1,
        -1.53194377486244017527936158236e-2,
        8.27378916381402288758473766002e-3,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        6.24110958716075717114429577812e-1,
        0.,
        0.,
        -3.36089262944694129406857109825e0,
        -8.68219346841726006818189891453e-1,
        2.75920996994467083049415600797e1,
        2.01540675504778934086186788979e1,
        -4.34898841810699588477366255144e1,
        0.,
        0.,
        0.,
    ],
    [
        4.77662536438264365890433908527e-1,
        0.,
        0.,
        -2.48811461997166764192642586468e0,
        -5.90290826836842996371446475743e-1,
        2.12300514481811942347288949897e1,
        1.52792336328824235832596922938e1,
        -3.32882109689848629194453265587e1,
        -2.03312017085086261358222928593e-2,
        0.,
        0.,
    ],
    [
        -9.3714243008598732571704021658e-1,
        0.,
        0.,
        5.18637242884406370830023853209e0,
        1.09143734899672957818500254654e0,
        -8.14978701074692612513997267357e0,
        -1.85200656599969598641566180701e1,
        2.27394870993505042818970056734e1,
        2.49360555267965238987089396762e0,
        -3.0467644718982195003823669022e0,
        0.,
    ],
    [
        2.27331014751653820792359768449e0,
        0.,
        0.,
        -1.05344954667372501984066689879e1,
        -2.00087205822486249909675718444e0,
        -1.79589318631187989172765950534e1,
        2.79488845294199600508499808837e1,
        -2.85899827713502369474065508674e0,
        -8.87285693353062954433549289258e0,
        1.23605671757943030647266201528e1,
        6.43392746015763530355970484046e-1,
    ],
];

const B: [f64; 12] = [
    5.42937341165687622380535766363e-2,
    0.,
    0.,
    0.,
    0.,
    4.45031289275240888144113950566e0,
    1.89151789931450038304281599044e0,
    -5.8012039600105847814672114227e0,
    3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1,
    2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2,
];

/// Third-order comparison weights on stages 1, 9 and 12.
const BHH: [f64; 3] =
    [0.244094488188976377952755905512, 0.733846688281611857341361741547, 0.220588235294117647058823529412e-1];

/// Fifth-order error weights.
const E: [f64; 12] = [
    0.1312004499419488073250102996e-1,
    0.,
    0.,
    0.,
    0.,
    -0.1225156446376204440720569753e1,
    -0.4957589496572501915214079952,
    0.1664377182454986536961530415e1,
    -0.3503288487499736816886487290,
    0.3341791187130174790297318841,
    0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1,
];
