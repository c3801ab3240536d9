//! File formats: hopping-matrix input, CSV and JSON-lines tables, SVG
//! scatter plots. Bracket reports use the record format of
//! [`BracketReport`](crate::brackets::BracketReport).

mod matrix;
mod svg;
mod tables;

pub use matrix::{format_matrix_file, parse_matrix_file, read_matrix_file, MatrixFile};
pub use svg::{parse_scatter_svg, scatter_svg, ScatterPoint, PALETTE};
pub use tables::{
    read_csv, read_jsonl, trajectory_rows, write_csv, write_jsonl, BracketSummaryRow, DriftRow, LyapunovRow,
    SectionRow, ShellRow, TrajectoryRow, BRACKET_SUMMARY_HEADER, CLASS_HEADER, DRIFT_HEADER, LYAPUNOV_HEADER,
    SECTION_HEADER, SHELL_HEADER, TRAJECTORY_HEADER,
};
