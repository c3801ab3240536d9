//! TOML experiment configuration and its validation.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::diag::{codes, Diagnostic};
use crate::dynamics::{IntegratorConfig, LyapunovConfig};
use crate::error::Error;
use crate::hamiltonian::{HoppingMatrix, SaturationKind, Statistics};
use crate::io::read_matrix_file;
use crate::poincare::{Direction, SectionSpec, ShellSliceSpec};
use crate::transforms::{Coordinate, ReducedParams, Topology};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all available cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    pub system: SystemConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// `J` as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Real(f64),
    Complex([f64; 2]),
}

impl Coupling {
    pub fn value(self) -> Complex64 {
        match self {
            Coupling::Real(re) => Complex64::new(re, 0.0),
            Coupling::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// The one-body system. Give exactly one of `matrix`, `matrix_file`, or the
/// `eps` + `coupling` + `topology` shorthand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub sites: usize,
    pub statistics: Statistics,
    pub saturation: SaturationKind,
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    #[serde(default)]
    pub coupling: Option<Coupling>,
    #[serde(default)]
    pub topology: Option<Topology>,
    /// Rows of `[re, im]` pairs.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    /// Path of a hopping-matrix file, relative to the config file.
    #[serde(default)]
    pub matrix_file: Option<PathBuf>,
    /// Total number `N` of the reduced three-site dynamics.
    #[serde(default)]
    pub total: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub integrator: IntegratorConfig,
    pub initial: InitialConfig,
    pub bracket_check: BracketCheckConfig,
    pub poincare: PoincareConfig,
    pub lyapunov: LyapunovRunConfig,
    pub shell: ShellConfig,
}

/// Initial conditions for `integrate`, `poincare` and `lyapunov`: either
/// explicit `points` `(x1, x2, y1, y2)` or `count` seeded draws on the shell
/// `H = energy`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub points: Vec<[f64; 4]>,
    pub count: usize,
    pub energy: Option<f64>,
    /// Coordinate solved for when drawing or projecting onto the shell.
    pub free: Coordinate,
    /// Move explicit points onto the shell along `free` instead of rejecting
    /// them when off-shell.
    pub project: bool,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { points: Vec::new(), count: 0, energy: None, free: Coordinate::X1, project: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BracketCheckConfig {
    pub points: usize,
    pub max_modulus: f64,
    /// Largest `|{F, G}|` still counted as vanishing.
    pub threshold: f64,
}

impl Default for BracketCheckConfig {
    fn default() -> Self {
        Self { points: 200, max_modulus: 1.0, threshold: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareConfig {
    pub coordinate: Coordinate,
    pub level: f64,
    pub direction: Direction,
    pub projection: [Coordinate; 2],
    pub t_end: f64,
    /// Also estimate the largest Lyapunov exponent of each trajectory.
    pub lyapunov: bool,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        let s = SectionSpec::default();
        Self {
            coordinate: s.coordinate,
            level: s.level,
            direction: s.direction,
            projection: [s.projection.0, s.projection.1],
            t_end: 10_000.0,
            lyapunov: false,
        }
    }
}

impl PoincareConfig {
    pub fn spec(&self) -> SectionSpec {
        SectionSpec {
            coordinate: self.coordinate,
            level: self.level,
            direction: self.direction,
            projection: (self.projection[0], self.projection[1]),
        }
    }
}

/// Lyapunov settings; the integrator comes from `run.integrator`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovRunConfig {
    pub t_total: f64,
    pub renorm_interval: f64,
    pub perturbation: f64,
    pub transient_fraction: f64,
}

impl Default for LyapunovRunConfig {
    fn default() -> Self {
        let d = LyapunovConfig::default();
        Self {
            t_total: d.t_total,
            renorm_interval: d.renorm_interval,
            perturbation: d.perturbation,
            transient_fraction: d.transient_fraction,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellConfig {
    pub fixed: Coordinate,
    pub value: f64,
    pub energy: Option<f64>,
    pub band: f64,
    /// Ranges of the free coordinates; `[-sqrt(N), sqrt(N)]` each when absent.
    pub ranges: Option<[[f64; 2]; 3]>,
    pub resolution: [usize; 3],
}

impl Default for ShellConfig {
    fn default() -> Self {
        Self { fixed: Coordinate::Y1, value: 0.0, energy: None, band: 0.02, ranges: None, resolution: [41, 41, 41] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
    Svg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Csv] }
    }
}

/// A parsed config together with its source text, for line lookups.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    pub path: PathBuf,
}

impl LoadedConfig {
    pub fn parse(source: &str, path: &Path) -> Result<Self, Diagnostic> {
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
            Diagnostic::new(codes::SYNTAX, e.message().to_string()).at_line(line)
        })?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(Diagnostic::new(
                codes::SCHEMA,
                format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", config.schema_version),
            )
            .field("schema_version")
            .at_line(line_of(source, None, "schema_version")));
        }
        Ok(Self { config, source: source.to_owned(), path: path.to_owned() })
    }

    pub fn load(path: &Path) -> Result<Self, Diagnostic> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| Diagnostic::new(codes::SYNTAX, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&source, path)
    }

    /// Diagnostic for `table.key`, located in the source when possible.
    pub fn diag(&self, code: &'static str, table: &str, key: &str, message: impl Into<String>) -> Diagnostic {
        let t = (!table.is_empty()).then_some(table);
        let field = if table.is_empty() { key.to_owned() } else { format!("{table}.{key}") };
        Diagnostic::new(code, message).field(field).at_line(line_of(&self.source, t, key))
    }
}

/// Line (1-based) of `key = ...` inside `[table]`, or of the table header.
fn line_of(source: &str, table: Option<&str>, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header_line = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_owned();
            if table == Some(current.as_str()) {
                header_line = Some(i + 1);
            }
            continue;
        }
        let in_table = match table {
            Some(t) => current == t,
            None => current.is_empty(),
        };
        if in_table {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}

/// What a command needs from the system block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    /// Any hopping matrix (bracket checks).
    Matrix,
    /// The reduced three-site system at fixed `N`.
    Reduced,
}

/// The validated system: the hopping matrix and, for reduced commands, the
/// reduced parameters with `N`.
#[derive(Debug, Clone)]
pub struct System {
    pub statistics: Statistics,
    pub saturation: SaturationKind,
    pub matrix: HoppingMatrix,
    pub reduced: Option<(ReducedParams, f64)>,
}

impl LoadedConfig {
    /// Validates the system block and the tolerances before any computation.
    pub fn system(&self, needs: Needs) -> Result<System, Diagnostic> {
        let s = &self.config.system;
        let sys = "system";
        if s.sites == 0 {
            return Err(self.diag(codes::SYSTEM, sys, "sites", "sites must be at least 1"));
        }
        let shorthand = s.eps.is_some() || s.coupling.is_some() || s.topology.is_some();
        let given = [shorthand, s.matrix.is_some(), s.matrix_file.is_some()].iter().filter(|&&b| b).count();
        if given != 1 {
            return Err(self.diag(
                codes::SYSTEM,
                sys,
                "sites",
                "give exactly one of `matrix`, `matrix_file`, or `eps` + `coupling` + `topology`",
            ));
        }
        let matrix = if shorthand {
            let eps = s.eps.as_ref().ok_or_else(|| self.diag(codes::SYSTEM, sys, "eps", "`eps` is missing"))?;
            let coupling =
                s.coupling.ok_or_else(|| self.diag(codes::SYSTEM, sys, "coupling", "`coupling` is missing"))?.value();
            let topology =
                s.topology.ok_or_else(|| self.diag(codes::SYSTEM, sys, "topology", "`topology` is missing"))?;
            if eps.len() != s.sites {
                return Err(self.diag(
                    codes::SYSTEM,
                    sys,
                    "eps",
                    format!("`eps` has {} entries but sites = {}", eps.len(), s.sites),
                ));
            }
            let built = match topology {
                Topology::Linear => HoppingMatrix::linear_chain(eps, coupling),
                Topology::Cyclic => HoppingMatrix::cyclic(eps, coupling),
            };
            built.map_err(|e| self.diag(codes::SYSTEM, sys, "topology", e.to_string()))?
        } else if let Some(rows) = &s.matrix {
            if rows.len() != s.sites || rows.iter().any(|r| r.len() != s.sites) {
                return Err(self.diag(
                    codes::SYSTEM,
                    sys,
                    "matrix",
                    format!("`matrix` must have {0} rows of {0} [re, im] pairs", s.sites),
                ));
            }
            let rows: Vec<Vec<Complex64>> =
                rows.iter().map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect()).collect();
            HoppingMatrix::from_rows(&rows).map_err(|e| self.matrix_diag(e, "matrix"))?
        } else {
            let rel = s.matrix_file.as_ref().expect("one source is given");
            let path = self.path.parent().unwrap_or(Path::new(".")).join(rel);
            let file = read_matrix_file(&path).map_err(|e| self.matrix_diag(e, "matrix_file"))?;
            if file.matrix.dim() != s.sites || file.statistics != s.statistics || file.saturation != s.saturation {
                return Err(self.diag(
                    codes::MATRIX_FILE,
                    sys,
                    "matrix_file",
                    format!("{} disagrees with sites/statistics/saturation of the config", path.display()),
                ));
            }
            file.matrix
        };
        if let Some(total) = s.total {
            if !(total.is_finite() && total > 0.0) {
                return Err(self.diag(codes::SYSTEM, sys, "total", format!("total must be positive, got {total}")));
            }
            if s.saturation == SaturationKind::Sqrt && total > s.sites as f64 {
                return Err(self.diag(
                    codes::SQRT_TOTAL,
                    sys,
                    "total",
                    format!(
                        "with saturation = \"sqrt\" every |psi_i|^2 is at most 1, so total = {total} cannot exceed sites = {}",
                        s.sites
                    ),
                ));
            }
        }
        self.check_tolerances()?;
        let reduced = match needs {
            Needs::Matrix => None,
            Needs::Reduced => Some(self.reduced()?),
        };
        Ok(System { statistics: s.statistics, saturation: s.saturation, matrix, reduced })
    }

    fn matrix_diag(&self, e: Error, key: &str) -> Diagnostic {
        let code = match e {
            Error::NotHermitian { .. } => codes::NON_HERMITIAN,
            _ if key == "matrix_file" => codes::MATRIX_FILE,
            _ => codes::SYSTEM,
        };
        self.diag(code, "system", key, e.to_string())
    }

    fn reduced(&self) -> Result<(ReducedParams, f64), Diagnostic> {
        let s = &self.config.system;
        let unsupported = |key: &str, msg: &str| self.diag(codes::UNSUPPORTED_SYSTEM, "system", key, msg.to_owned());
        if s.statistics != Statistics::Fermionic || s.sites != 3 {
            return Err(unsupported("sites", "reduced dynamics needs a fermionic system with sites = 3"));
        }
        let (Some(eps), Some(coupling), Some(topology)) = (&s.eps, s.coupling, s.topology) else {
            return Err(unsupported("sites", "reduced dynamics needs the `eps` + `coupling` + `topology` form"));
        };
        let total = s.total.ok_or_else(|| unsupported("total", "reduced dynamics needs `total`"))?;
        let params = ReducedParams::new([eps[0], eps[1], eps[2]], coupling.value(), s.saturation.function(), topology);
        Ok((params, total))
    }

    fn check_tolerances(&self) -> Result<(), Diagnostic> {
        let it = &self.config.run.integrator;
        let table = "run.integrator";
        for (key, v) in [("rel_tol", it.rel_tol), ("abs_tol", it.abs_tol), ("min_step", it.min_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(self.diag(codes::TOLERANCE, table, key, format!("{key} must be positive, got {v}")));
            }
        }
        let bc = &self.config.run.bracket_check;
        if !(bc.threshold.is_finite() && bc.threshold > 0.0) {
            return Err(self.diag(
                codes::TOLERANCE,
                "run.bracket_check",
                "threshold",
                format!("threshold must be positive, got {}", bc.threshold),
            ));
        }
        let sh = &self.config.run.shell;
        if !(sh.band.is_finite() && sh.band > 0.0) {
            return Err(self.diag(
                codes::TOLERANCE,
                "run.shell",
                "band",
                format!("band must be positive, got {}", sh.band),
            ));
        }
        it.validate().map_err(|e| self.diag(codes::PARAMETER, table, "t_end", e.to_string()))
    }

    pub fn lyapunov_config(&self) -> Result<LyapunovConfig, Diagnostic> {
        let l = &self.config.run.lyapunov;
        let cfg = LyapunovConfig {
            t_total: l.t_total,
            renorm_interval: l.renorm_interval,
            perturbation: l.perturbation,
            transient_fraction: l.transient_fraction,
            integrator: self.config.run.integrator,
        };
        cfg.validate().map_err(|e| self.diag(codes::PARAMETER, "run.lyapunov", "t_total", e.to_string()))?;
        Ok(cfg)
    }

    pub fn section_spec(&self) -> Result<(SectionSpec, IntegratorConfig), Diagnostic> {
        let p = &self.config.run.poincare;
        let spec = p.spec();
        spec.validate().map_err(|e| self.diag(codes::PARAMETER, "run.poincare", "projection", e.to_string()))?;
        let cfg = self.config.run.integrator.with_t_end(p.t_end);
        cfg.validate().map_err(|e| self.diag(codes::PARAMETER, "run.poincare", "t_end", e.to_string()))?;
        Ok((spec, cfg))
    }

    pub fn shell_spec(&self, total: f64) -> Result<ShellSliceSpec, Diagnostic> {
        let s = &self.config.run.shell;
        let energy =
            s.energy.ok_or_else(|| self.diag(codes::PARAMETER, "run.shell", "energy", "`energy` is missing"))?;
        let r = total.sqrt();
        let ranges = s.ranges.map_or([(-r, r); 3], |rs| rs.map(|[lo, hi]| (lo, hi)));
        let spec = ShellSliceSpec {
            fixed: s.fixed,
            value: s.value,
            ranges,
            resolution: s.resolution,
            energy,
            band: s.band,
            total,
        };
        spec.validate().map_err(|e| self.diag(codes::PARAMETER, "run.shell", "resolution", e.to_string()))?;
        Ok(spec)
    }
}
