//! Text front end: grounded PDDL domains, keyword/value problem files, and the
//! canonical JSON form used for plan records and verification reports.

mod pddl;
mod problem;
mod record;

pub use pddl::parse_domain;
pub use problem::{parse_problem, ProblemSpec, VariantParams};
pub use record::{emit_canonical, emit_plan_record, parse_plan_record, PlanRecord};

use thiserror::Error;

use crate::observation::ObservationError;
use crate::strips::StripsError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelIoError {
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{line}:{column}: unsupported feature: {feature}")]
    UnsupportedFeature { line: usize, column: usize, feature: String },
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("line {line}: unknown fluent `{name}`")]
    UnknownFluent { line: usize, name: String },
    #[error("bad parameter `{name}`: {message}")]
    BadParameter { name: String, message: String },
    #[error("malformed record: {0}")]
    Record(String),
    #[error(transparent)]
    Strips(#[from] StripsError),
    #[error(transparent)]
    Observation(#[from] ObservationError),
}
