//! Product-line variability engine.
//!
//! Derives a hierarchical variability model from layered functional
//! artifacts ([`derivation`]), reduces the number of variation points by
//! merging uniquely dependent ones ([`reduction`]) and counts the resulting
//! configuration space ([`configuration`]). Models are exchanged as
//! canonical JSON documents ([`ingest`]).

pub mod configuration;
pub mod derivation;
pub mod error;
pub mod ingest;
pub mod model;
pub mod reduction;
pub mod report;
pub mod tree;
pub mod validate;

pub use configuration::{enumerate_valid, unconstrained_count, validate_config, Configuration, ConfigViolation};
pub use derivation::{create_variation_points, derive_initial_vm, diff, mapping, DifSet, RefinementMode};
pub use error::{ConfigError, DerivationError, IngestError, ModelError, ReductionError};
pub use ingest::{parse_document, parse_layered_model, parse_variability_model, serialize, ModelDocument, ProductSet};
pub use model::*;
pub use reduction::{
    check_completeness, check_uniqueness, identify_main_root, interacting_pairs, merge, reduce, replay, MergeRecord,
    ReductionTrace,
};
pub use report::ReductionReport;
pub use tree::{roots, tree_size};
pub use validate::{validate, Rule, Violation};
