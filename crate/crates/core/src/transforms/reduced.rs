//! The three-site fermionic Hamiltonian in reduced cartesian coordinates.
//!
//! With `n = x1^2 + x2^2`, `m = y1^2 + y2^2`, `n2 = N - n - m`:
//!
//! ```text
//! H = n (e1 - e2) + m (e3 - e2) + N e2
//!   + 2 Re(J (x1 - i x2)) sqrt(n2) f(n) f(n2)
//!   + 2 Re(J (y1 + i y2)) sqrt(n2) f(m) f(n2)
//!   + 2 Re(J (x1 - i x2)(y1 + i y2)) (1 - 2 n2) f(n) f(m)      (cyclic only)
//! ```
//!
//! Derivatives at the edge of the domain, where `sqrt` or `f` has an infinite
//! slope, are only defined when the slope is multiplied by an exact zero; the
//! product is then taken as zero. This makes the all-filled point of the
//! square-root model a fixed point, as it should be.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ActionAngleState, ReducedState};
use crate::error::{Error, Result};
use crate::hamiltonian::{ClassicalObservable, FieldState, HoppingMatrix, SaturationFunction, Statistics};

/// Arguments this close outside a domain edge are moved onto it.
const EDGE_SNAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// `h_12 = h_23 = J`, `h_13 = 0`.
    Linear,
    /// `h_12 = h_23 = h_13 = J`.
    Cyclic,
}

/// Parameters of the reduced three-site system.
#[derive(Debug, Clone)]
pub struct ReducedParams {
    pub eps: [f64; 3],
    pub coupling: Complex64,
    pub saturation: SaturationFunction,
    pub topology: Topology,
}

/// Value of a one-argument factor and its slope; `None` marks an infinite or
/// undefined slope at a domain edge.
#[derive(Debug, Clone, Copy)]
struct Factor {
    value: f64,
    slope: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Arg {
    N,
    M,
    N2,
}

struct Term {
    coeff: f64,
    coeff_grad: [f64; 4],
    factors: [(Factor, Arg); 3],
}

impl ReducedParams {
    pub fn new(eps: [f64; 3], coupling: Complex64, saturation: SaturationFunction, topology: Topology) -> Self {
        Self { eps, coupling, saturation, topology }
    }

    /// The `3 x 3` hopping matrix this reduction corresponds to.
    pub fn hopping_matrix(&self) -> Result<HoppingMatrix> {
        match self.topology {
            Topology::Linear => HoppingMatrix::linear_chain(&self.eps, self.coupling),
            Topology::Cyclic => HoppingMatrix::cyclic(&self.eps, self.coupling),
        }
    }

    /// The fermionic Hamiltonian on the full complex phase space.
    pub fn hamiltonian_observable(&self) -> Result<ClassicalObservable> {
        Ok(ClassicalObservable::hamiltonian(&self.hopping_matrix()?, Statistics::Fermionic, self.saturation.clone()))
    }

    /// Whether `reduced_hamiltonian` is defined at `q`.
    pub fn admits(&self, q: &ReducedState) -> bool {
        self.factors(q).is_ok()
    }

    /// Whether `q` is strictly inside the domain, where every slope is finite.
    pub fn admits_interior(&self, q: &ReducedState) -> bool {
        let dom = self.saturation.domain();
        let (n, m, n2) = (q.n(), q.m(), q.n2());
        n2 > 0.0 && [n, m, n2].iter().all(|&x| dom.contains_interior(x))
    }

    fn sat(&self, x: f64) -> Result<Factor> {
        let dom = self.saturation.domain();
        let x = if x < dom.lower && dom.lower - x < EDGE_SNAP {
            dom.lower
        } else if x > dom.upper && x - dom.upper < EDGE_SNAP {
            dom.upper
        } else {
            x
        };
        let value = self.saturation.value(x)?;
        let slope = self.saturation.value_and_derivative(x).ok().map(|(_, d)| d);
        Ok(Factor { value, slope })
    }

    /// `n`, `m`, `n2` (snapped) plus `f` at each, or a domain error.
    fn factors(&self, q: &ReducedState) -> Result<(f64, f64, f64, [Factor; 3])> {
        let (n, m) = (q.n(), q.m());
        let mut n2 = q.n2();
        if n2 < 0.0 && n2 > -EDGE_SNAP {
            n2 = 0.0;
        }
        if n2 < 0.0 {
            return Err(Error::Domain(format!("N - n - m = {n2} is negative")));
        }
        Ok((n, m, n2, [self.sat(n)?, self.sat(m)?, self.sat(n2)?]))
    }

    fn terms(&self, q: &ReducedState) -> Result<(f64, f64, f64, Vec<Term>)> {
        let (n, m, n2, [fn_, fm, fn2]) = self.factors(q)?;
        let (jr, ji) = (self.coupling.re, self.coupling.im);
        let [x1, x2, y1, y2] = q.coords();
        let root = Factor { value: n2.sqrt(), slope: (n2 > 0.0).then(|| 0.5 / n2.sqrt()) };
        let string = Factor { value: 1.0 - 2.0 * n2, slope: Some(-2.0) };
        let mut terms = vec![
            Term {
                coeff: 2.0 * (jr * x1 + ji * x2),
                coeff_grad: [2.0 * jr, 2.0 * ji, 0.0, 0.0],
                factors: [(root, Arg::N2), (fn_, Arg::N), (fn2, Arg::N2)],
            },
            Term {
                coeff: 2.0 * (jr * y1 - ji * y2),
                coeff_grad: [0.0, 0.0, 2.0 * jr, -2.0 * ji],
                factors: [(root, Arg::N2), (fm, Arg::M), (fn2, Arg::N2)],
            },
        ];
        if self.topology == Topology::Cyclic {
            terms.push(Term {
                coeff: 2.0 * (jr * (x1 * y1 + x2 * y2) - ji * (x1 * y2 - x2 * y1)),
                coeff_grad: [
                    2.0 * (jr * y1 - ji * y2),
                    2.0 * (jr * y2 + ji * y1),
                    2.0 * (jr * x1 + ji * x2),
                    2.0 * (jr * x2 - ji * x1),
                ],
                factors: [(string, Arg::N2), (fn_, Arg::N), (fm, Arg::M)],
            });
        }
        Ok((n, m, n2, terms))
    }

    pub fn hamiltonian(&self, q: &ReducedState) -> Result<f64> {
        let (n, m, _, terms) = self.terms(q)?;
        let [e1, e2, e3] = self.eps;
        let mut h = n * (e1 - e2) + m * (e3 - e2) + q.total * e2;
        for t in &terms {
            h += t.coeff * t.factors.iter().map(|(f, _)| f.value).product::<f64>();
        }
        Ok(h)
    }

    /// `(dH/dx1, dH/dx2, dH/dy1, dH/dy2)` at fixed `N`.
    pub fn gradient(&self, q: &ReducedState) -> Result<[f64; 4]> {
        let (_, _, _, terms) = self.terms(q)?;
        let [e1, e2, e3] = self.eps;
        let [x1, x2, y1, y2] = q.coords();
        let dn = [2.0 * x1, 2.0 * x2, 0.0, 0.0];
        let dm = [0.0, 0.0, 2.0 * y1, 2.0 * y2];
        let d_arg = |a: Arg, i: usize| match a {
            Arg::N => dn[i],
            Arg::M => dm[i],
            Arg::N2 => -dn[i] - dm[i],
        };
        let mut g = [0.0; 4];
        for i in 0..4 {
            g[i] = dn[i] * (e1 - e2) + dm[i] * (e3 - e2);
        }
        for t in &terms {
            let values = t.factors.map(|(f, _)| f.value);
            let prod: f64 = values.iter().product();
            for i in 0..4 {
                g[i] += t.coeff_grad[i] * prod;
                for (k, (factor, arg)) in t.factors.iter().enumerate() {
                    let others: f64 = (0..3).filter(|&r| r != k).map(|r| values[r]).product();
                    let weight = t.coeff * d_arg(*arg, i) * others;
                    if weight == 0.0 {
                        continue;
                    }
                    match factor.slope {
                        Some(s) => g[i] += weight * s,
                        None => {
                            return Err(Error::DerivativeDomain(format!(
                                "reduced Hamiltonian has an infinite slope at {:?}",
                                q.coords()
                            )))
                        }
                    }
                }
            }
        }
        Ok(g)
    }
}

/// `dH/dtheta_i` and `-dH/dn_i` at the fields given by `aa`: the action-angle
/// equations of motion `n' = dH/dtheta`, `theta' = -dH/dn` in the original time.
/// Requires every `n_i > 0`.
pub fn action_angle_flow(aa: &ActionAngleState, params: &ReducedParams) -> Result<ActionAngleState> {
    if aa.n.iter().any(|&n| n <= 0.0) {
        return Err(Error::Domain("action-angle flow needs every occupation positive".into()));
    }
    let psi = super::action_angle_to_fields(aa)?;
    let grad = params.hamiltonian_observable()?.wirtinger_gradient(&psi)?;
    let mut out = ActionAngleState { n: [0.0; 3], theta: [0.0; 3] };
    for i in 0..3 {
        let w = psi.amplitudes()[i] * grad.d_psi[i];
        out.n[i] = -2.0 * w.im;
        out.theta[i] = -w.re / aa.n[i];
    }
    Ok(out)
}

pub fn reduced_hamiltonian(q: &ReducedState, params: &ReducedParams) -> Result<f64> {
    params.hamiltonian(q)
}

/// Evaluates the full fermionic Hamiltonian on the fields rebuilt from `q`.
pub fn hamiltonian_via_fields(q: &ReducedState, theta: f64, params: &ReducedParams) -> Result<f64> {
    let psi: FieldState = super::reduced_to_fields(q, theta)?;
    params.hamiltonian_observable()?.evaluate(&psi)
}
