use thiserror::Error;

use crate::bicop::{CopulaFamily, Rotation};
use crate::vcg::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{family} parameter {theta} violates {bound}")]
    Domain {
        family: CopulaFamily,
        theta: f64,
        bound: &'static str,
    },

    #[error("{family} at rotation {rotation} cannot attain Kendall's tau {tau}")]
    TauOutOfRange {
        family: CopulaFamily,
        rotation: Rotation,
        tau: f64,
    },

    #[error("{family} h-function inverse did not converge (p = {p}, conditioning value = {v})")]
    NonConvergence { family: CopulaFamily, p: f64, v: f64 },

    #[error("Kendall's tau is undefined: {0} is constant")]
    UndefinedTau(&'static str),

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("family set is empty")]
    EmptyFamilySet,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("value {value} at row {row}, column {col} is outside (0, 1)")]
    OutsideUnitInterval { row: usize, col: usize, value: f64 },

    #[error("{0}")]
    InvalidInput(String),

    #[error("invalid vine structure: {}", join_violations(.0))]
    InvalidStructure(Vec<Violation>),

    #[error("structure selection failed at level {level}: {reason}")]
    Selection { level: usize, reason: String },

    #[error("sampling order is infeasible for this vine: {0}")]
    Infeasible(String),

    #[error("JSON parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("CSV error{}: {message}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Csv { line: Option<u64>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of numerical routines rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
