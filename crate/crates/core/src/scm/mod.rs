//! Finite structural causal models: expressions, graphs, do-evaluation and
//! the JSON scenario format.

pub mod expr;
mod graph;
mod scenario;

pub use expr::{parse_expr, Expr, Scalar};
pub use graph::{
    build_graph, parse_equation, Assignment, CausalGraph, Domain, InterventionSpec, StructuralEquation, Value,
    Variable, MAX_WORLDS,
};
pub use scenario::Scenario;
