//! Poisson brackets on the complex phase space.
//!
//! `{F, G} = kappa * sum_k (dF/dpsi_k dG/dpsi_k^* - dF/dpsi_k^* dG/dpsi_k)`.
//! The default `kappa = -i` makes `psi_k' = {psi_k, H} = -i dH/dpsi_k^*` and
//! keeps brackets of real functions real.

mod probe;
mod scan;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{FieldState, PhaseSpaceFunction, WirtingerGradient};

pub use probe::{appendix_probe, t1_direct, AppendixProbe, ProbeDerivatives, DEFAULT_PROBE_STEP};
pub use scan::{bracket_scan, BracketReport, SamplerSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketConvention {
    pub scale: Complex64,
}

impl Default for BracketConvention {
    fn default() -> Self {
        Self { scale: Complex64::new(0.0, -1.0) }
    }
}

impl BracketConvention {
    pub fn with_scale(scale: Complex64) -> Self {
        Self { scale }
    }
}

pub fn bracket_from_gradients(f: &WirtingerGradient, g: &WirtingerGradient, conv: BracketConvention) -> Complex64 {
    let sum: Complex64 = f
        .d_psi
        .iter()
        .zip(&f.d_psi_conj)
        .zip(g.d_psi.iter().zip(&g.d_psi_conj))
        .map(|((fp, fc), (gp, gc))| fp * gc - fc * gp)
        .sum();
    conv.scale * sum
}

pub fn poisson_bracket<F, G>(f: &F, g: &G, state: &FieldState, conv: BracketConvention) -> Result<Complex64>
where
    F: PhaseSpaceFunction + ?Sized,
    G: PhaseSpaceFunction + ?Sized,
{
    if f.dim() != g.dim() || f.dim() != state.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: {} / {} / state {}",
            f.dim(),
            g.dim(),
            state.dim()
        )));
    }
    let gf = f.gradient(state)?;
    let gg = g.gradient(state)?;
    Ok(bracket_from_gradients(&gf, &gg, conv))
}
