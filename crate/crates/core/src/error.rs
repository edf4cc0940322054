use thiserror::Error;

use crate::submodular::ElementId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element {0} is already in the subset")]
    DuplicateElement(ElementId),

    #[error("element {id} is out of range for a ground set of {n} elements")]
    OutOfRange { id: ElementId, n: usize },

    #[error("subset is full (limit {limit})")]
    SubsetFull { limit: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("enumeration of {required} items exceeds the cap of {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("no candidate elements remain")]
    EmptyCandidates,

    #[error("bound contract violated for {subset:?}: upper {upper} < lower {lower}")]
    BoundOrder {
        subset: Vec<ElementId>,
        upper: f64,
        lower: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("state {state} out of range for {num_states} states")]
    StateOutOfRange { state: usize, num_states: usize },

    #[error("malformed observation: {0}")]
    Shape(String),

    #[error("observation has zero likelihood under the prior")]
    ImpossibleObservation,

    #[error("invalid sensor model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
