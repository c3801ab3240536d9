//! Phase-derivative probe of `{H, N_k}` for three sites.
//!
//! Writing `psi_j = Psi_j e^{i Phi_j}`, the bracket (taken in the default
//! convention, where it is real) is a trigonometric polynomial in the phases.
//! Only two conjugate pairs of its Fourier components depend on all three
//! phases at once:
//!
//! * `T1 = (h_12 C_13 - h_13 C_12) psi_1^{*2} psi_2 psi_3 f_1^2 f_2 f_3`, phase vector `(-2, 1, 1)`;
//! * `T2 = (h_32 C_31 - h_31 C_32) psi_3^{*2} psi_2 psi_1 f_3^2 f_2 f_1`, phase vector `(1, 1, -2)`;
//!
//! each entering as `2 Re(2i T)`. A mixed phase derivative with multi-index `m`
//! therefore equals `sum_T 2 Re(2i * i^|m| * prod_j v_j^{m_j} * T)`, and four such
//! derivatives give a linear system for the real and imaginary parts of `T1`
//! and `T2`. For the open chain `h_13 = 0`, `h_12 = J` and `T1` reduces to
//! `J u_1k u_3k^* psi_1^{*2} psi_3 psi_2 f^2(Psi_1^2) f(Psi_3^2) f(Psi_2^2)`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::{poisson_bracket, BracketConvention};
use crate::error::{Error, Result};
use crate::hamiltonian::{ClassicalObservable, FieldState};

pub const DEFAULT_PROBE_STEP: f64 = 0.1;

/// Relative disagreement between the last two Richardson levels that is still accepted.
const RICHARDSON_TOL: f64 = 1e-4;

/// Orders `(m1, m2, m3)` of the four phase derivatives, in the order
/// `d^3/dPhi1 dPhi3 dPhi2`, `d^4/dPhi1 dPhi3 dPhi2^2`, `d^4/dPhi1^2 dPhi3 dPhi2`,
/// `d^5/dPhi1^2 dPhi3 dPhi2^2`.
const ORDERS: [[u32; 3]; 4] = [[1, 1, 1], [1, 2, 1], [2, 1, 1], [2, 2, 1]];

const PHASE_T1: [i32; 3] = [-2, 1, 1];
const PHASE_T2: [i32; 3] = [1, 1, -2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeDerivatives {
    pub d1_d3_d2: f64,
    pub d1_d3_d22: f64,
    pub d11_d3_d2: f64,
    pub d11_d3_d22: f64,
}

impl ProbeDerivatives {
    fn as_array(&self) -> [f64; 4] {
        [self.d1_d3_d2, self.d1_d3_d22, self.d11_d3_d2, self.d11_d3_d22]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixProbe {
    pub derivatives: ProbeDerivatives,
    /// Largest difference between the last two Richardson levels.
    pub error_estimate: f64,
    pub t1: Complex64,
    pub t2: Complex64,
}

/// Direct evaluation of `T1` from the coefficient matrices and the state.
pub fn t1_direct(h: &ClassicalObservable, n_k: &ClassicalObservable, state: &FieldState) -> Result<Complex64> {
    check_three_sites(h, n_k, state)?;
    let psi = state.amplitudes();
    let f = state.occupations().iter().map(|&x| n_k.saturation().value(x)).collect::<Result<Vec<_>>>()?;
    let coeff = h.coeff(0, 1) * n_k.coeff(0, 2) - h.coeff(0, 2) * n_k.coeff(0, 1);
    Ok(coeff * psi[0].conj().powi(2) * psi[1] * psi[2] * (f[0] * f[0] * f[1] * f[2]))
}

/// Extracts `T1` and `T2` from finite-difference phase derivatives of `{H, N_k}`.
///
/// Each derivative uses tensor-product central differences at steps
/// `step`, `step/2`, `step/4`, combined by two levels of Richardson
/// extrapolation. A step that is too large or too small shows up as
/// disagreement between the levels and is reported as an accuracy error.
pub fn appendix_probe(
    h: &ClassicalObservable,
    n_k: &ClassicalObservable,
    state: &FieldState,
    step: f64,
    conv: BracketConvention,
) -> Result<AppendixProbe> {
    check_three_sites(h, n_k, state)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Validation(format!("probe step must be positive, got {step}")));
    }
    if state.amplitudes().iter().any(|z| z.norm() == 0.0) {
        return Err(Error::Domain("probe needs every amplitude nonzero".into()));
    }
    if conv.scale.norm() == 0.0 {
        return Err(Error::Validation("bracket convention scale is zero".into()));
    }
    // Rescale to the default convention so the bracket is real.
    let to_default = BracketConvention::default().scale / conv.scale;
    let bracket = |phases: [f64; 3]| -> Result<f64> {
        let shifted = FieldState::new(
            state.amplitudes().iter().zip(phases).map(|(z, p)| z * Complex64::from_polar(1.0, p)).collect(),
        )?;
        Ok((poisson_bracket(h, n_k, &shifted, conv)? * to_default).re)
    };

    let mut values = [0.0; 4];
    let mut error_estimate: f64 = 0.0;
    for (slot, order) in values.iter_mut().zip(ORDERS) {
        let d: Vec<f64> = [step, step / 2.0, step / 4.0]
            .iter()
            .map(|&s| mixed_derivative(&bracket, order, s))
            .collect::<Result<_>>()?;
        let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
        let r2 = (16.0 * r1[1] - r1[0]) / 15.0;
        *slot = r2;
        error_estimate = error_estimate.max((r2 - r1[1]).abs());
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !error_estimate.is_finite() || error_estimate > RICHARDSON_TOL * scale + 1e-10 {
        return Err(Error::Accuracy(format!(
            "phase derivatives did not converge at step {step}: Richardson levels differ by {error_estimate:e} \
             (derivative scale {scale:e})"
        )));
    }

    // Row for derivative m: 2 Re(c_m T1) + 2 Re(c_m' T2) with c = 2i * i^|m| * prod v^m.
    let mut a = Matrix4::zeros();
    for (row, order) in ORDERS.iter().enumerate() {
        for (col, phase) in [PHASE_T1, PHASE_T2].iter().enumerate() {
            let c = component_factor(*order, *phase);
            // 2 Re(c T) = 2 (c.re T.re - c.im T.im)
            a[(row, 2 * col)] = 2.0 * c.re;
            a[(row, 2 * col + 1)] = -2.0 * c.im;
        }
    }
    let b = Vector4::from(values);
    let sol = a.lu().solve(&b).ok_or_else(|| Error::Accuracy("probe linear system is singular".into()))?;
    Ok(AppendixProbe {
        derivatives: ProbeDerivatives {
            d1_d3_d2: values[0],
            d1_d3_d22: values[1],
            d11_d3_d2: values[2],
            d11_d3_d22: values[3],
        },
        error_estimate,
        t1: Complex64::new(sol[0], sol[1]),
        t2: Complex64::new(sol[2], sol[3]),
    })
}

impl AppendixProbe {
    /// True when all four phase derivatives are below `tol`.
    pub fn derivatives_vanish(&self, tol: f64) -> bool {
        self.derivatives.as_array().iter().all(|d| d.abs() < tol)
    }
}

fn component_factor(order: [u32; 3], phase: [i32; 3]) -> Complex64 {
    let total: u32 = order.iter().sum();
    let weight: f64 = order.iter().zip(phase).map(|(&m, v)| f64::from(v).powi(m as i32)).product();
    Complex64::new(0.0, 2.0) * Complex64::i().powu(total) * weight
}

fn check_three_sites(h: &ClassicalObservable, n_k: &ClassicalObservable, state: &FieldState) -> Result<()> {
    if h.dim() != 3 || n_k.dim() != 3 || state.dim() != 3 {
        return Err(Error::Validation("the phase probe is defined for three sites".into()));
    }
    Ok(())
}

/// Central-difference stencil weights for derivative order 1 or 2.
fn stencil(order: u32, step: f64) -> Vec<(f64, f64)> {
    match order {
        1 => vec![(-step, -0.5 / step), (step, 0.5 / step)],
        2 => {
            let w = 1.0 / (step * step);
            vec![(-step, w), (0.0, -2.0 * w), (step, w)]
        }
        _ => unreachable!("probe uses first and second derivatives only"),
    }
}

fn mixed_derivative<B>(bracket: &B, order: [u32; 3], step: f64) -> Result<f64>
where
    B: Fn([f64; 3]) -> Result<f64>,
{
    let s = [stencil(order[0], step), stencil(order[1], step), stencil(order[2], step)];
    let mut acc = 0.0;
    for &(p0, w0) in &s[0] {
        for &(p1, w1) in &s[1] {
            for &(p2, w2) in &s[2] {
                acc += w0 * w1 * w2 * bracket([p0, p1, p2])?;
            }
        }
    }
    Ok(acc)
}
