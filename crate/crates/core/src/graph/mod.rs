//! Base graphs, dotted triple-graphs, trap-colourings, flows and the
//! dependency sets derived from them.

mod base;
mod colouring;
mod dtg;
mod flow;
pub mod keys;
mod past;

pub use base::{dotted_graph, BaseGraph, Edge, Site, VertexId};
pub use colouring::{
    added_colour, break_at_dummies, dummy_positions, sample_trap_colouring, validate_colouring, BrokenGraph, Colour,
    ColouringReport, Condition, TrapColouring, Violation, SLOT_PERMUTATIONS,
};
pub use dtg::{dotted_triple_graph, BaseLocation, DtgGraph, DtgVertex, DtgVertexKind};
pub use flow::{check_flow, compute_flow, dependency_sets, DependencySets, Flow};
pub use past::{extended_past, extended_pasts, past_under, ColouredPast, DottedDependencies, EXTENDED_PAST_RADIUS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("base graph is not connected")]
    Disconnected,
    #[error("graph is not layered: {0}")]
    NotLayered(String),
    #[error("flow condition violated: {0}")]
    FlowViolation(String),
    #[error("invalid trap-colouring: {} violation(s)", .0.violations.len())]
    InvalidColouring(ColouringReport),
    #[error("extended past of {vertex} reaches base vertex {base_vertex} beyond the locality radius")]
    LocalityViolation { vertex: VertexId, base_vertex: VertexId },
}
