//! Classical limits of quadratic bosonic and fermionic lattice Hamiltonians.
//!
//! * [`hamiltonian`]: coefficient matrices, spectral data and the classical
//!   observables obtained from the bosonic and fermionic replacement rules.
//! * [`brackets`]: Poisson brackets, randomized bracket scans and the
//!   phase-derivative probe for three sites.
//! * [`transforms`]: the three-site coordinate chain from complex fields to the
//!   reduced cartesian coordinates `(x1, x2, y1, y2)` at fixed total number `N`.
//! * [`dynamics`]: the reduced flow, integrators and Lyapunov exponents.
//! * [`poincare`]: surfaces of section, energy-shell projection and slices.
//! * [`io`] and [`cli`]: file formats and the command-line front end.

pub mod brackets;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod poincare;
pub mod transforms;

pub use error::{Error, Result};
