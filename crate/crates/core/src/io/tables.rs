//! Row types for the CSV and JSON-lines outputs.
//!
//! CSV files have a header row naming the columns in field order. Floats are
//! written in the shortest decimal form that parses back to the same value.
//! JSON-lines files hold one object per line with the same field names.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::brackets::BracketReport;
use crate::dynamics::{LyapunovEstimate, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::poincare::{SectionRecord, ShellPoint};
use crate::transforms::{ReducedParams, ReducedState};

/// One sample of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "N")]
    pub n: f64,
}

pub fn trajectory_rows(traj: &Trajectory, params: &ReducedParams) -> Result<Vec<TrajectoryRow>> {
    traj.samples
        .iter()
        .map(|(t, q)| {
            Ok(TrajectoryRow { t: *t, x1: q.x1, x2: q.x2, y1: q.y1, y2: q.y2, h: params.hamiltonian(q)?, n: q.total })
        })
        .collect()
}

/// Conservation summary of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub trajectory_id: usize,
    pub t_end: f64,
    pub completed: bool,
    pub energy_drift: f64,
    pub number_drift: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub m_min: f64,
    pub m_max: f64,
}

impl DriftRow {
    pub fn new(trajectory_id: usize, traj: &Trajectory) -> Self {
        let fold = |f: fn(&ReducedState) -> f64| {
            traj.samples
                .iter()
                .map(|(_, q)| f(q))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (n_min, n_max) = fold(ReducedState::n);
        let (m_min, m_max) = fold(ReducedState::m);
        Self {
            trajectory_id,
            t_end: traj.samples.last().map_or(0.0, |s| s.0),
            completed: traj.termination == Termination::Completed,
            energy_drift: traj.energy_drift,
            number_drift: traj.number_drift,
            n_min,
            n_max,
            m_min,
            m_max,
        }
    }
}

/// Section record as written to CSV. JSON-lines output carries the full
/// [`SectionRecord`] including the crossing state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionRow {
    pub trajectory_id: usize,
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub energy: f64,
}

impl From<&SectionRecord> for SectionRow {
    fn from(r: &SectionRecord) -> Self {
        Self { trajectory_id: r.trajectory_id, t: r.t, p: r.p, q: r.q, energy: r.energy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovRow {
    pub trajectory_id: usize,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub lambda: f64,
    pub t_reached: f64,
    pub partial: bool,
}

impl LyapunovRow {
    pub fn new(trajectory_id: usize, initial: &ReducedState, est: &LyapunovEstimate) -> Self {
        Self {
            trajectory_id,
            x1: initial.x1,
            x2: initial.x2,
            y1: initial.y1,
            y2: initial.y2,
            lambda: est.lambda,
            t_reached: est.t_reached,
            partial: est.partial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub energy: f64,
    pub sign_change: bool,
}

impl From<&ShellPoint> for ShellRow {
    fn from(p: &ShellPoint) -> Self {
        let [x1, x2, y1, y2] = p.coords;
        Self { x1, x2, y1, y2, energy: p.energy, sign_change: p.sign_change }
    }
}

/// One line of the bracket-check summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketSummaryRow {
    pub first: String,
    pub second: String,
    pub samples: usize,
    pub max_abs: f64,
    pub vanishes: bool,
}

impl BracketSummaryRow {
    pub fn new(report: &BracketReport, threshold: f64) -> Self {
        Self {
            first: report.first.clone(),
            second: report.second.clone(),
            samples: report.samples,
            max_abs: report.max_abs,
            vanishes: report.max_abs < threshold,
        }
    }
}

pub fn write_csv<T: Serialize, W: Write>(out: W, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows, requiring the header to equal `header` exactly.
pub fn read_csv<T: DeserializeOwned, R: std::io::Read>(input: R, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let found = r.headers().map_err(csv_err)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "header `{}` does not match `{}`",
                found.iter().collect::<Vec<_>>().join(","),
                header.join(",")
            ),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn write_jsonl<T: Serialize, W: Write>(mut out: W, rows: &[T]) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(input: R) -> Result<Vec<T>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?);
    }
    Ok(rows)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, msg: format!("{kind:?}") },
    }
}

pub const TRAJECTORY_HEADER: [&str; 7] = ["t", "x1", "x2", "y1", "y2", "H", "N"];
pub const DRIFT_HEADER: [&str; 9] =
    ["trajectory_id", "t_end", "completed", "energy_drift", "number_drift", "n_min", "n_max", "m_min", "m_max"];
pub const SECTION_HEADER: [&str; 5] = ["trajectory_id", "t", "p", "q", "energy"];
pub const CLASS_HEADER: [&str; 4] = ["trajectory_id", "points", "dimension", "class"];
pub const LYAPUNOV_HEADER: [&str; 8] = ["trajectory_id", "x1", "x2", "y1", "y2", "lambda", "t_reached", "partial"];
pub const SHELL_HEADER: [&str; 6] = ["x1", "x2", "y1", "y2", "energy", "sign_change"];
pub const BRACKET_SUMMARY_HEADER: [&str; 5] = ["first", "second", "samples", "max_abs", "vanishes"];

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::poincare::{Classification, TrajectoryClass};

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let rows = vec![
            TrajectoryRow { t: 0.0, x1: 0.1, x2: -1.0 / 3.0, y1: 1e-300, y2: 2.5e17, h: f64::MIN_POSITIVE, n: 3.0 },
            TrajectoryRow { t: 0.5, x1: -0.0, x2: 1.0 + f64::EPSILON, y1: 7.0, y2: -2.0, h: 3.14, n: 3.0 },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows, &TRAJECTORY_HEADER).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2,y1,y2,H,N\n"), "{text}");
        let back: Vec<TrajectoryRow> = read_csv(&buf[..], &TRAJECTORY_HEADER).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.x2.to_bits(), b.x2.to_bits());
            assert_eq!(a.y1.to_bits(), b.y1.to_bits());
            assert_eq!(a.h.to_bits(), b.h.to_bits());
        }
        assert_eq!(back, rows);
    }

    #[test]
    fn optional_dimension_is_an_empty_field() {
        let rows = vec![
            TrajectoryClass { trajectory_id: 0, points: 3, dimension: None, class: Classification::Ambiguous },
            TrajectoryClass { trajectory_id: 1, points: 900, dimension: Some(1.04), class: Classification::CurveLike },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows, &CLASS_HEADER).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "trajectory_id,points,dimension,class\n0,3,,ambiguous\n1,900,1.04,curve-like\n"
        );
        let back: Vec<TrajectoryClass> = read_csv(&buf[..], &CLASS_HEADER).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let text = "t,x1,x2,y1,y2,N,H\n0,0,0,0,0,0,0\n";
        assert!(matches!(
            read_csv::<TrajectoryRow, _>(text.as_bytes(), &TRAJECTORY_HEADER),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn jsonl_round_trip_is_bit_exact() {
        let rows = vec![SectionRecord {
            trajectory_id: 4,
            t: 12.345678901234567,
            p: -0.1,
            q: 1.0 / 7.0,
            state: [0.3, 0.0, -0.1, 1.0 / 7.0],
            energy: 3.14 + 1e-12,
        }];
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &rows).unwrap();
        let back: Vec<SectionRecord> = read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, rows);
        assert!(matches!(read_jsonl::<SectionRecord, _>(&b"\n{\"bad\": 1}\n"[..]), Err(Error::Parse { line: 2, .. })));
    }
}
