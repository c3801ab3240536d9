//! Text format for hopping matrices.
//!
//! ```text
//! hopping-matrix 1
//! sites <L>
//! statistics <bosonic|fermionic>
//! saturation <exp|sqrt>
//! row <re_1> <im_1> ... <re_L> <im_L>     (L lines, row-major)
//! end
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Keywords must appear
//! in this order.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{HoppingMatrix, SaturationKind, Statistics};

const HEADER: &str = "hopping-matrix";
const VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub statistics: Statistics,
    pub saturation: SaturationKind,
    pub matrix: HoppingMatrix,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            self.last = i + 1;
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((i + 1, t.split_whitespace().collect()));
        }
        None
    }

    fn expect(&mut self, key: &str, args: usize) -> Result<(usize, Vec<&'a str>)> {
        let (no, words) = self
            .next_content()
            .ok_or_else(|| parse_err(self.last, format!("unexpected end of file, expected `{key}`")))?;
        if words[0] != key {
            return Err(parse_err(no, format!("expected `{key}`, found `{}`", words[0])));
        }
        if words.len() - 1 != args {
            return Err(parse_err(no, format!("`{key}` takes {args} value(s), found {}", words.len() - 1)));
        }
        Ok((no, words[1..].to_vec()))
    }
}

pub fn parse_matrix_file(text: &str) -> Result<MatrixFile> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (no, v) = lines.expect(HEADER, 1)?;
    if v[0] != VERSION {
        return Err(parse_err(no, format!("unsupported format version `{}`", v[0])));
    }
    let (no, v) = lines.expect("sites", 1)?;
    let sites: usize = v[0].parse().map_err(|_| parse_err(no, format!("bad site count `{}`", v[0])))?;
    if sites == 0 {
        return Err(parse_err(no, "site count must be at least 1"));
    }
    let (no, v) = lines.expect("statistics", 1)?;
    let statistics: Statistics = v[0].parse().map_err(|e: Error| parse_err(no, e.to_string()))?;
    let (no, v) = lines.expect("saturation", 1)?;
    let saturation: SaturationKind = v[0].parse().map_err(|e: Error| parse_err(no, e.to_string()))?;
    let mut rows = Vec::with_capacity(sites);
    for _ in 0..sites {
        let (no, v) = lines.expect("row", 2 * sites)?;
        let nums = v
            .iter()
            .map(|w| w.parse::<f64>().map_err(|_| parse_err(no, format!("bad number `{w}`"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect::<Vec<_>>());
    }
    lines.expect("end", 0)?;
    if let Some((no, _)) = lines.next_content() {
        return Err(parse_err(no, "content after `end`"));
    }
    let matrix = HoppingMatrix::from_rows(&rows)?;
    Ok(MatrixFile { statistics, saturation, matrix })
}

pub fn read_matrix_file(path: &Path) -> Result<MatrixFile> {
    parse_matrix_file(&std::fs::read_to_string(path)?)
}

pub fn format_matrix_file(file: &MatrixFile) -> String {
    let dim = file.matrix.dim();
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER} {VERSION}");
    let _ = writeln!(s, "sites {dim}");
    let _ = writeln!(s, "statistics {}", file.statistics.name());
    let _ = writeln!(s, "saturation {}", file.saturation.name());
    for i in 0..dim {
        s.push_str("row");
        for j in 0..dim {
            let z = file.matrix.get(i, j);
            let _ = write!(s, " {:?} {:?}", z.re, z.im);
        }
        s.push('\n');
    }
    s.push_str("end\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const RING: &str = "\
# three-site ring
hopping-matrix 1
sites 3
statistics fermionic
saturation exp

row 1 0  0.6 0  0.6 0
row 0.6 0  1 0  0.6 0
row 0.6 0  0.6 0  1 0
end
";

    #[test]
    fn parses_ring() {
        let f = parse_matrix_file(RING).unwrap();
        assert_eq!(f.statistics, Statistics::Fermionic);
        assert_eq!(f.saturation, SaturationKind::Exp);
        let ring = HoppingMatrix::cyclic(&[1.0; 3], Complex64::new(0.6, 0.0)).unwrap();
        assert_eq!(f.matrix, ring);
    }

    #[test]
    fn round_trips_bit_exactly() {
        let h = HoppingMatrix::linear_chain(&[0.1, -1.0 / 3.0, 2e-17], Complex64::new(0.6, -0.7)).unwrap();
        let f = MatrixFile { statistics: Statistics::Bosonic, saturation: SaturationKind::Sqrt, matrix: h };
        assert_eq!(parse_matrix_file(&format_matrix_file(&f)).unwrap(), f);
    }

    #[test]
    fn rejects_non_hermitian() {
        let text = RING.replace("row 0.6 0  1 0  0.6 0", "row 0.6 0  1 0  0.5 0");
        assert!(matches!(parse_matrix_file(&text), Err(Error::NotHermitian { row: 2, col: 3, .. })));
    }

    #[test]
    fn reports_line_of_bad_entry() {
        let text = RING.replace("row 0.6 0  0.6 0  1 0", "row 0.6 0  0.6 0  1");
        match parse_matrix_file(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        let text = RING.replace("statistics fermionic", "statistics anyonic");
        assert!(matches!(parse_matrix_file(&text), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_matrix_file(&RING.replace("end\n", "")), Err(Error::Parse { .. })));
    }
}
