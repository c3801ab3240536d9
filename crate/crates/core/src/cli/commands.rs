//! The subcommands. Each validates its inputs, computes, and hands every file
//! to one [`Writer`] on the calling thread.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Format, LoadedConfig, Needs};
use super::diag::{codes, CliError, Diagnostic, EXIT_OK, EXIT_VIOLATION};
use crate::brackets::{bracket_scan, BracketConvention, BracketReport, SamplerSpec};
use crate::dynamics::{integrate, lyapunov_max};
use crate::error::Result;
use crate::hamiltonian::{candidate_constants, diagonalize, ClassicalObservable};
use crate::io::{
    scatter_svg, trajectory_rows, write_csv, write_jsonl, BracketSummaryRow, DriftRow, LyapunovRow, ScatterPoint,
    SectionRow, ShellRow, BRACKET_SUMMARY_HEADER, CLASS_HEADER, DRIFT_HEADER, LYAPUNOV_HEADER, SECTION_HEADER,
    SHELL_HEADER, TRAJECTORY_HEADER,
};
use crate::poincare::{
    classify_records, sample_shell, section, shell_project, shell_slice, Classification, ON_SHELL_TOL,
};
use crate::transforms::{ReducedParams, ReducedState};

/// Settings after command-line overrides.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

/// Sequential sink for all output files of a run.
pub struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_owned(), written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path)?;
        self.written.push(path);
        Ok(BufWriter::new(f))
    }

    pub fn text(&mut self, name: &str, content: &str) -> Result<()> {
        use std::io::Write;
        let mut w = self.open(name)?;
        w.write_all(content.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn table<T: Serialize>(&mut self, stem: &str, format: Format, rows: &[T], header: &[&str]) -> Result<()> {
        match format {
            Format::Csv => write_csv(self.open(&format!("{stem}.csv"))?, rows, header),
            Format::Jsonl => write_jsonl(self.open(&format!("{stem}.jsonl"))?, rows),
            Format::Svg => unreachable!("tables are not plotted"),
        }
    }
}

fn tabular(formats: &[Format]) -> Vec<Format> {
    formats.iter().copied().filter(|f| *f != Format::Svg).collect()
}

fn reject_svg(ctx: &RunContext, command: &str) -> std::result::Result<(), Diagnostic> {
    if ctx.formats.contains(&Format::Svg) {
        return Err(Diagnostic::new(codes::FORMAT, format!("`{command}` writes tables only; svg is not available"))
            .field("output.formats"));
    }
    Ok(())
}

pub struct Outcome {
    pub exit: i32,
    pub files: Vec<PathBuf>,
}

type Named<'a> = (&'a str, &'a ClassicalObservable);

pub fn bracket_check(
    cfg: &LoadedConfig,
    ctx: &RunContext,
    expect_vanish: bool,
) -> std::result::Result<Outcome, CliError> {
    reject_svg(ctx, "bracket-check")?;
    let sys = cfg.system(Needs::Matrix)?;
    let bc = &cfg.config.run.bracket_check;
    if bc.points == 0 {
        return Err(cfg.diag(codes::PARAMETER, "run.bracket_check", "points", "points must be at least 1").into());
    }
    if !(bc.max_modulus.is_finite() && bc.max_modulus > 0.0) {
        return Err(cfg
            .diag(codes::PARAMETER, "run.bracket_check", "max_modulus", "max_modulus must be positive")
            .into());
    }
    let sat = sys.saturation.function();
    let dim = sys.matrix.dim();
    let h = ClassicalObservable::hamiltonian(&sys.matrix, sys.statistics, sat.clone());
    let consts = candidate_constants(&diagonalize(&sys.matrix), sys.statistics, sat.clone());
    let total = ClassicalObservable::total_number(dim, sys.statistics, sat);
    let names: Vec<String> = (1..=dim).map(|k| format!("N{k}")).collect();

    let mut pairs: Vec<(Named<'_>, Named<'_>)> = Vec::new();
    for (name, n) in names.iter().zip(&consts) {
        pairs.push((("H", &h), (name, n)));
    }
    for k in 0..dim {
        for l in k + 1..dim {
            pairs.push(((&names[k], &consts[k]), (&names[l], &consts[l])));
        }
    }
    pairs.push((("H", &h), ("N", &total)));

    let sampler = SamplerSpec::new(bc.max_modulus, ctx.seed);
    let reports = pairs
        .into_iter()
        .map(|(f, g)| bracket_scan(f, g, &sampler, bc.points, BracketConvention::default()))
        .collect::<Result<Vec<BracketReport>>>()?;

    let summary: Vec<BracketSummaryRow> = reports.iter().map(|r| BracketSummaryRow::new(r, bc.threshold)).collect();
    let worst = reports.iter().max_by(|a, b| a.max_abs.total_cmp(&b.max_abs)).expect("at least one pair");
    let vanish = summary.iter().all(|r| r.vanishes);

    let mut w = Writer::create(&ctx.out_dir)?;
    for r in &reports {
        w.text(&format!("bracket_{}_{}.txt", r.first, r.second), &r.to_record())?;
    }
    for f in tabular(&ctx.formats) {
        w.table("bracket_summary", f, &summary, &BRACKET_SUMMARY_HEADER)?;
    }
    for r in &summary {
        println!("{{{}, {}}}: max |bracket| = {:.3e}", r.first, r.second, r.max_abs);
    }
    if vanish {
        println!("verdict: all-vanish (threshold {:e})", bc.threshold);
    } else {
        let psi: Vec<String> =
            worst.argmax.amplitudes().iter().map(|z| format!("({:.6}, {:.6})", z.re, z.im)).collect();
        println!(
            "verdict: violation-found, largest |{{{}, {}}}| = {:.3e} at sample {}, psi = [{}]",
            worst.first,
            worst.second,
            worst.max_abs,
            worst.argmax_index,
            psi.join(", ")
        );
    }
    let exit = if expect_vanish && !vanish { EXIT_VIOLATION } else { EXIT_OK };
    Ok(Outcome { exit, files: w.written().to_vec() })
}

/// Initial states from `run.initial`, checked against the domain and, when
/// an energy is given, against the shell.
fn initials(
    cfg: &LoadedConfig,
    ctx: &RunContext,
    params: &ReducedParams,
    total: f64,
    need_energy: bool,
) -> std::result::Result<(Vec<ReducedState>, Option<f64>), CliError> {
    let ic = &cfg.config.run.initial;
    let table = "run.initial";
    if need_energy && ic.energy.is_none() {
        return Err(cfg.diag(codes::PARAMETER, table, "energy", "`energy` is required for this command").into());
    }
    match (ic.points.is_empty(), ic.count) {
        (true, 0) => Err(cfg.diag(codes::PARAMETER, table, "points", "give `points` or a positive `count`").into()),
        (false, c) if c > 0 => {
            Err(cfg.diag(codes::PARAMETER, table, "count", "give either `points` or `count`, not both").into())
        }
        (true, count) => {
            let energy =
                ic.energy.ok_or_else(|| cfg.diag(codes::PARAMETER, table, "energy", "`count` draws need `energy`"))?;
            Ok((sample_shell(params, total, energy, count, ctx.seed, ic.free)?, Some(energy)))
        }
        (false, _) => {
            let mut out = Vec::with_capacity(ic.points.len());
            for (i, p) in ic.points.iter().enumerate() {
                let mut q = ReducedState::from_coords(*p, total);
                if !params.admits(&q) {
                    return Err(cfg
                        .diag(codes::OFF_SHELL, table, "points", format!("point {i} {p:?} lies outside the domain"))
                        .into());
                }
                if let Some(e) = ic.energy {
                    let h = params.hamiltonian(&q)?;
                    if (h - e).abs() >= ON_SHELL_TOL {
                        if !ic.project {
                            return Err(cfg
                                .diag(
                                    codes::OFF_SHELL,
                                    table,
                                    "points",
                                    format!("point {i} has H = {h} != energy {e}; set `project = true` to move it onto the shell"),
                                )
                                .into());
                        }
                        q = shell_project(&q, e, params, ic.free).map_err(|err| {
                            cfg.diag(codes::OFF_SHELL, table, "points", format!("point {i} cannot be projected: {err}"))
                        })?;
                    }
                }
                out.push(q);
            }
            Ok((out, ic.energy))
        }
    }
}

pub fn integrate_cmd(cfg: &LoadedConfig, ctx: &RunContext) -> std::result::Result<Outcome, CliError> {
    reject_svg(ctx, "integrate")?;
    let sys = cfg.system(Needs::Reduced)?;
    let (params, total) = sys.reduced.expect("reduced system");
    let (starts, _) = initials(cfg, ctx, &params, total, false)?;
    let icfg = cfg.config.run.integrator;
    let trajs = starts.par_iter().map(|q| integrate(q, &icfg, &params)).collect::<Result<Vec<_>>>()?;

    let drifts: Vec<DriftRow> = trajs.iter().enumerate().map(|(i, t)| DriftRow::new(i, t)).collect();
    let mut w = Writer::create(&ctx.out_dir)?;
    for f in tabular(&ctx.formats) {
        for (i, t) in trajs.iter().enumerate() {
            w.table(&format!("trajectory_{i}"), f, &trajectory_rows(t, &params)?, &TRAJECTORY_HEADER)?;
        }
        w.table("drift", f, &drifts, &DRIFT_HEADER)?;
    }
    for d in &drifts {
        println!(
            "trajectory {}: t = {}, energy drift {:.3e}, number drift {:.3e}, n in [{:.6}, {:.6}], m in [{:.6}, {:.6}]{}",
            d.trajectory_id,
            d.t_end,
            d.energy_drift,
            d.number_drift,
            d.n_min,
            d.n_max,
            d.m_min,
            d.m_max,
            if d.completed { "" } else { " (stopped at domain edge)" }
        );
    }
    Ok(Outcome { exit: EXIT_OK, files: w.written().to_vec() })
}

pub fn poincare_cmd(cfg: &LoadedConfig, ctx: &RunContext) -> std::result::Result<Outcome, CliError> {
    let sys = cfg.system(Needs::Reduced)?;
    let (params, total) = sys.reduced.expect("reduced system");
    let (spec, icfg) = cfg.section_spec()?;
    let lyap_cfg = if cfg.config.run.poincare.lyapunov { Some(cfg.lyapunov_config()?) } else { None };
    let (starts, energy) = initials(cfg, ctx, &params, total, true)?;
    let energy = energy.expect("energy checked");

    let out = section(&starts, &spec, energy, &params, &icfg)?;
    let classes = classify_records(&out.records, starts.len());
    let lambdas = match lyap_cfg {
        Some(lc) => Some(starts.par_iter().map(|q| lyapunov_max(q, &params, &lc)).collect::<Result<Vec<_>>>()?),
        None => None,
    };

    let mut w = Writer::create(&ctx.out_dir)?;
    let mut tables = tabular(&ctx.formats);
    for &f in &ctx.formats {
        match f {
            Format::Csv => {
                let rows: Vec<SectionRow> = out.records.iter().map(SectionRow::from).collect();
                w.table("section", f, &rows, &SECTION_HEADER)?;
            }
            Format::Jsonl => w.table("section", f, &out.records, &[])?,
            Format::Svg => {
                let pts: Vec<ScatterPoint> =
                    out.records.iter().map(|r| ScatterPoint { group: r.trajectory_id, x: r.p, y: r.q }).collect();
                let title = format!("{} = {} section, E = {energy}, N = {total}", spec.coordinate, spec.level);
                w.text("section.svg", &scatter_svg(&pts, spec.projection.0.name(), spec.projection.1.name(), &title))?;
            }
        }
    }
    if tables.is_empty() {
        tables.push(Format::Csv);
    }
    for &f in &tables {
        w.table("classification", f, &classes, &CLASS_HEADER)?;
        if let Some(ls) = &lambdas {
            let rows: Vec<LyapunovRow> =
                ls.iter().enumerate().map(|(i, l)| LyapunovRow::new(i, &starts[i], l)).collect();
            w.table("lyapunov", f, &rows, &LYAPUNOV_HEADER)?;
        }
    }

    let count = |c: Classification| classes.iter().filter(|t| t.class == c).count();
    println!(
        "{} trajectories, {} crossings: {} curve-like, {} area-like, {} ambiguous",
        starts.len(),
        out.records.len(),
        count(Classification::CurveLike),
        count(Classification::AreaLike),
        count(Classification::Ambiguous)
    );
    if !out.partial.is_empty() {
        println!("stopped at the domain edge: {:?}", out.partial);
    }
    Ok(Outcome { exit: EXIT_OK, files: w.written().to_vec() })
}

pub fn lyapunov_cmd(cfg: &LoadedConfig, ctx: &RunContext) -> std::result::Result<Outcome, CliError> {
    reject_svg(ctx, "lyapunov")?;
    let sys = cfg.system(Needs::Reduced)?;
    let (params, total) = sys.reduced.expect("reduced system");
    let lc = cfg.lyapunov_config()?;
    let (starts, _) = initials(cfg, ctx, &params, total, false)?;
    let ests = starts.par_iter().map(|q| lyapunov_max(q, &params, &lc)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<LyapunovRow> = ests.iter().enumerate().map(|(i, e)| LyapunovRow::new(i, &starts[i], e)).collect();

    let mut w = Writer::create(&ctx.out_dir)?;
    for f in tabular(&ctx.formats) {
        w.table("lyapunov", f, &rows, &LYAPUNOV_HEADER)?;
    }
    for r in &rows {
        println!(
            "trajectory {}: lambda_max = {:.5} (t = {}){}",
            r.trajectory_id,
            r.lambda,
            r.t_reached,
            if r.partial { " partial" } else { "" }
        );
    }
    Ok(Outcome { exit: EXIT_OK, files: w.written().to_vec() })
}

pub fn shell_cmd(cfg: &LoadedConfig, ctx: &RunContext) -> std::result::Result<Outcome, CliError> {
    let sys = cfg.system(Needs::Reduced)?;
    let (params, total) = sys.reduced.expect("reduced system");
    let spec = cfg.shell_spec(total)?;
    let points = shell_slice(&spec, &params)?;
    if points.is_empty() {
        eprintln!(
            "warning: no grid point of the {} = {} slice lies within {} of E = {}",
            spec.fixed, spec.value, spec.band, spec.energy
        );
    }
    let rows: Vec<ShellRow> = points.iter().map(ShellRow::from).collect();
    let mut w = Writer::create(&ctx.out_dir)?;
    for &f in &ctx.formats {
        match f {
            Format::Svg => {
                let [a, b, _] = spec.free_coordinates();
                let pts: Vec<ScatterPoint> = points
                    .iter()
                    .map(|p| ScatterPoint {
                        group: usize::from(p.sign_change),
                        x: p.coords[a.index()],
                        y: p.coords[b.index()],
                    })
                    .collect();
                let title = format!("|H - {}| < {}, {} = {}", spec.energy, spec.band, spec.fixed, spec.value);
                w.text("shell.svg", &scatter_svg(&pts, a.name(), b.name(), &title))?;
            }
            _ => w.table("shell", f, &rows, &SHELL_HEADER)?,
        }
    }
    println!("{} grid points within the band", rows.len());
    Ok(Outcome { exit: EXIT_OK, files: w.written().to_vec() })
}
