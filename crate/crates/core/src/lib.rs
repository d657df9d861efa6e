//! Entity annotation of relational web tables against a local knowledge graph.
//!
//! The pipeline cleans and types table cells, finds the header row and the
//! core column, looks up candidate entities for each row, and picks one per
//! row from five scoring signals. See `annotate::Annotator` for the entry
//! point and `eval` for scoring against gold standards.

pub mod annotate;
pub mod candidates;
pub mod config;
pub mod disambiguation;
pub mod eval;
pub mod exec;
pub mod kg;
pub mod similarity;
pub mod structure;
pub mod synth;
pub mod table;
pub mod text;

pub use annotate::{Annotator, TableOutcome};
pub use config::PipelineConfig;
pub use exec::Execution;
pub use kg::KnowledgeGraph;
