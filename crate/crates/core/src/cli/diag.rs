//! Diagnostics and exit codes.

use std::fmt;

use crate::error::Error;

/// Diagnostic codes for configuration problems.
pub mod codes {
    /// TOML syntax error, unknown key or wrong value type.
    pub const SYNTAX: &str = "E001";
    pub const SCHEMA: &str = "E002";
    pub const NON_HERMITIAN: &str = "E003";
    /// `saturation = "sqrt"` with `total > sites`.
    pub const SQRT_TOTAL: &str = "E004";
    /// Negative, zero or non-finite tolerance.
    pub const TOLERANCE: &str = "E005";
    /// Inconsistent or incomplete system block.
    pub const SYSTEM: &str = "E006";
    /// Missing or invalid command parameter.
    pub const PARAMETER: &str = "E007";
    /// The command does not apply to this kind of system.
    pub const UNSUPPORTED_SYSTEM: &str = "E008";
    /// Output format not produced by the command.
    pub const FORMAT: &str = "E009";
    pub const MATRIX_FILE: &str = "E010";
    /// Explicit initial condition off the energy shell.
    pub const OFF_SHELL: &str = "E011";
    /// Failure while computing.
    pub const RUNTIME: &str = "E100";
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, field: None, line: None, message: message.into() }
    }

    pub fn field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn at_line(mut self, line: Option<usize>) -> Self {
        self.line = line;
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]", self.code)?;
        if let Some(line) = self.line {
            write!(f, " line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " ({field})")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(Diagnostic),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(d) => d.fmt(f),
            CliError::Runtime(e) => write!(f, "error[{}]: {e}", codes::RUNTIME),
        }
    }
}

impl From<Diagnostic> for CliError {
    fn from(d: Diagnostic) -> Self {
        CliError::Config(d)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}
