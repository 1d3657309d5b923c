use thiserror::Error;

use crate::model::{ActivityId, Layer, VariantId, VpId};
use crate::validate::Violation;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown variation point `{0}`")]
    UnknownVariationPoint(VpId),
    #[error("the variability model has no variation points")]
    EmptyModel,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported schema version `{0}`")]
    UnsupportedSchema(String),
    #[error("expected a {expected} document, found `{found}`")]
    WrongKind { expected: String, found: String },
    #[error("duplicate {what} id `{id}`")]
    DuplicateId { what: &'static str, id: String },
    #[error("refinement child `{0}` has more than one parent variant")]
    MultipleParents(VpId),
    #[error("invalid model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl IngestError {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        IngestError::Syntax { line: err.line(), column: err.column(), message: err.to_string() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DerivationError {
    #[error("variable activity `{0}` has no group label and refines no activity")]
    Ungroupable(ActivityId),
    #[error("unknown activity `{0}`")]
    UnknownActivity(ActivityId),
    #[error("group `{group}` spans layers {first} and {second}")]
    GroupSpansLayers { group: String, first: Layer, second: Layer },
    #[error("mapping from {lower} to {upper}: upper layer must equal or be directly above the lower layer")]
    LayerSkip { lower: Layer, upper: Layer },
    #[error("variation point `{vp}` would refine both `{existing}` and `{new}`")]
    ConflictingParent { vp: VpId, existing: VariantId, new: VariantId },
    #[error("derived model is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot merge `{target_vp}` into `{source_vp}`: {reason}")]
    Refused { source_vp: VpId, target_vp: VpId, reason: &'static str },
    #[error("trace replay diverged at merge {index}")]
    ReplayMismatch { index: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown variant `{0}`")]
    UnknownVariant(VariantId),
    #[error("{unconstrained} unconstrained configurations exceed the enumeration budget of {budget}")]
    BudgetExceeded { unconstrained: String, budget: u64 },
}
