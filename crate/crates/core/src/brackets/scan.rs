use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{poisson_bracket, BracketConvention};
use crate::error::{Error, Result};
use crate::hamiltonian::{ClassicalObservable, FieldState};

/// Consecutive rejections tolerated before the admissible region is declared empty.
const MAX_REJECTIONS: usize = 100_000;

/// Random field states with every `|psi_i|` in `[min_modulus, max_modulus]`,
/// uniform in area on each disc, drawn by rejection from a square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSpec {
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(max_modulus: f64, seed: u64) -> Self {
        Self { min_modulus: 0.0, max_modulus, seed }
    }

    /// Draws `count` states of dimension `dim` accepted by `admissible`.
    pub fn sample<P>(&self, dim: usize, count: usize, admissible: P) -> Result<Vec<FieldState>>
    where
        P: Fn(&FieldState) -> bool,
    {
        if !(self.max_modulus.is_finite() && self.min_modulus >= 0.0 && self.min_modulus <= self.max_modulus) {
            return Err(Error::Sampling(format!("empty modulus range [{}, {}]", self.min_modulus, self.max_modulus)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let r = self.max_modulus;
        let mut out = Vec::with_capacity(count);
        let mut rejected = 0usize;
        while out.len() < count {
            let mut amps = Vec::with_capacity(dim);
            while amps.len() < dim {
                let z = Complex64::new(rng.random_range(-r..=r), rng.random_range(-r..=r));
                let m = z.norm();
                if m <= r && m >= self.min_modulus {
                    amps.push(z);
                }
                rejected += 1;
                if rejected > MAX_REJECTIONS * (dim + 1) && out.is_empty() && amps.is_empty() {
                    return Err(Error::Sampling("modulus annulus has no admissible points".into()));
                }
            }
            let state = FieldState::new(amps)?;
            if admissible(&state) {
                out.push(state);
                rejected = 0;
            } else {
                rejected += 1;
                if rejected > MAX_REJECTIONS {
                    return Err(Error::Sampling(format!(
                        "no admissible state after {MAX_REJECTIONS} consecutive draws"
                    )));
                }
            }
        }
        Ok(out)
    }
}

/// Result of evaluating `{F, G}` over a sample of states.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    pub first: String,
    pub second: String,
    pub samples: usize,
    pub max_abs: f64,
    pub argmax_index: usize,
    pub argmax: FieldState,
    pub values: Vec<Complex64>,
}

impl BracketReport {
    /// Line-oriented text record:
    ///
    /// ```text
    /// bracket-report 1
    /// pair <first> <second>
    /// samples <n>
    /// max_abs <float>
    /// argmax_index <i>
    /// argmax <re_1> <im_1> ... <re_L> <im_L>
    /// value <i> <re> <im>        (one line per sample)
    /// end
    /// ```
    ///
    /// Floats use the shortest representation that parses back to the same bits.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "bracket-report 1");
        let _ = writeln!(s, "pair {} {}", self.first, self.second);
        let _ = writeln!(s, "samples {}", self.samples);
        let _ = writeln!(s, "max_abs {:e}", self.max_abs);
        let _ = writeln!(s, "argmax_index {}", self.argmax_index);
        let _ = write!(s, "argmax");
        for z in self.argmax.amplitudes() {
            let _ = write!(s, " {:e} {:e}", z.re, z.im);
        }
        s.push('\n');
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "value {i} {:e} {:e}", v.re, v.im);
        }
        s.push_str("end\n");
        s
    }

    pub fn parse_record(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |key: &str| -> Result<(usize, Vec<String>)> {
            let (no, line) = lines
                .next()
                .ok_or(Error::Parse { line: 0, msg: format!("unexpected end of record, expected `{key}`") })?;
            let mut parts = line.split_whitespace().map(str::to_owned);
            let head = parts.next().unwrap_or_default();
            if head != key {
                return Err(Error::Parse { line: no + 1, msg: format!("expected `{key}`, found `{head}`") });
            }
            Ok((no + 1, parts.collect()))
        };
        let num = |line: usize, s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("bad number `{s}`: {e}") })
        };
        let int = |line: usize, s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|e| Error::Parse { line, msg: format!("bad integer `{s}`: {e}") })
        };

        let (line, v) = next("bracket-report")?;
        if v != ["1"] {
            return Err(Error::Parse { line, msg: "unsupported record version".into() });
        }
        let (line, pair) = next("pair")?;
        if pair.len() != 2 {
            return Err(Error::Parse { line, msg: "pair needs two identifiers".into() });
        }
        let (line, v) = next("samples")?;
        let samples = int(line, v.first().map(String::as_str).unwrap_or(""))?;
        let (line, v) = next("max_abs")?;
        let max_abs = num(line, v.first().map(String::as_str).unwrap_or(""))?;
        let (line, v) = next("argmax_index")?;
        let argmax_index = int(line, v.first().map(String::as_str).unwrap_or(""))?;
        let (line, v) = next("argmax")?;
        if v.is_empty() || v.len() % 2 != 0 {
            return Err(Error::Parse { line, msg: "argmax needs re/im pairs".into() });
        }
        let amps = v
            .chunks(2)
            .map(|p| Ok(Complex64::new(num(line, &p[0])?, num(line, &p[1])?)))
            .collect::<Result<Vec<_>>>()?;
        let argmax = FieldState::new(amps).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let mut values = Vec::with_capacity(samples);
        for i in 0..samples {
            let (line, v) = next("value")?;
            if v.len() != 3 || int(line, &v[0])? != i {
                return Err(Error::Parse { line, msg: format!("expected `value {i} <re> <im>`") });
            }
            values.push(Complex64::new(num(line, &v[1])?, num(line, &v[2])?));
        }
        next("end")?;
        Ok(Self { first: pair[0].clone(), second: pair[1].clone(), samples, max_abs, argmax_index, argmax, values })
    }
}

/// Evaluates `{first, second}` on `n_points` sampled states.
///
/// States are drawn up front from the seeded sampler, restricted to where both
/// observables are differentiable, so the report does not depend on how the
/// evaluation is spread over threads.
#[allow(clippy::too_many_arguments)]
pub fn bracket_scan(
    first: (&str, &ClassicalObservable),
    second: (&str, &ClassicalObservable),
    sampler: &SamplerSpec,
    n_points: usize,
    conv: BracketConvention,
) -> Result<BracketReport> {
    let (f_id, f) = first;
    let (g_id, g) = second;
    if n_points == 0 {
        return Err(Error::Sampling("bracket scan needs at least one point".into()));
    }
    let states = sampler.sample(f.dim(), n_points, |s| f.admits_gradient(s) && g.admits_gradient(s))?;
    let values = states.par_iter().map(|s| poisson_bracket(f, g, s, conv)).collect::<Result<Vec<_>>>()?;
    let (argmax_index, max_abs) = values
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(BracketReport {
        first: f_id.to_owned(),
        second: g_id.to_owned(),
        samples: values.len(),
        max_abs,
        argmax_index,
        argmax: states[argmax_index].clone(),
        values,
    })
}
