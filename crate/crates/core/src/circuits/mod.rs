//! Threshold-based circuit discovery over network mediators.
//!
//! A node enters a circuit when its mean effect on the target metric
//! passes `T_N`, or through one of the recall-repair routes (local
//! expansion, set search, preemption rounds), each recorded as the node's
//! [`Admission`]. Edges connect direct structural parent/child pairs of
//! circuit nodes whose edge score passes `T_E`.

mod discover;
mod export;

use serde::{Deserialize, Serialize};

use crate::interventions::{AblationKind, Estimator, TargetMetric};
use crate::toynets::NodeRef;

pub use discover::{
    circuit_faithfulness, discover_circuit, discover_with_set_search, edge_attribution, expand_local_dependencies,
    Faithfulness, SetSearchOptions,
};
pub use export::{export_circuit, ExportFormat};

pub const CIRCUIT_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_NODE_THRESHOLD: f64 = 0.4;
pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub node: f64,
    pub edge: f64,
    /// Compare signed effects instead of magnitudes.
    #[serde(default)]
    pub signed: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            node: DEFAULT_NODE_THRESHOLD,
            edge: DEFAULT_EDGE_THRESHOLD,
            signed: false,
        }
    }
}

impl Thresholds {
    pub fn passes_node(&self, effect: f64) -> bool {
        pass(effect, self.node, self.signed)
    }

    pub fn passes_edge(&self, score: f64) -> bool {
        pass(score, self.edge, self.signed)
    }
}

fn pass(x: f64, t: f64, signed: bool) -> bool {
    if signed {
        x > t
    } else {
        x.abs() > t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryOptions {
    pub thresholds: Thresholds,
    pub estimator: Estimator,
    pub ablation: AblationKind,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        DiscoveryOptions {
            thresholds: Thresholds::default(),
            estimator: Estimator::Exact,
            ablation: AblationKind::Zero,
        }
    }
}

/// Marks a node found by re-running discovery against an anchor's activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalExpansionMark {
    pub anchor: NodeRef,
    /// Effect on the anchor's activation metric.
    pub anchor_effect: f64,
}

/// Why a node is in the circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "via", rename_all = "snake_case")]
pub enum Admission {
    Threshold,
    LocalExpansion(LocalExpansionMark),
    SetSearch { set: Vec<NodeRef>, joint_effect: f64 },
    Preempted { round: usize, effect: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitNode {
    pub node: NodeRef,
    pub label: String,
    /// Mean effect on the circuit's target metric.
    pub effect: f64,
    pub admission: Admission,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitEdge {
    pub upstream: NodeRef,
    pub downstream: NodeRef,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub format_version: u32,
    pub target: TargetMetric,
    pub thresholds: Thresholds,
    pub method: Estimator,
    pub ablation: String,
    /// Sorted in network topological order.
    pub nodes: Vec<CircuitNode>,
    pub edges: Vec<CircuitEdge>,
}

impl Circuit {
    pub fn contains(&self, node: NodeRef) -> bool {
        self.nodes.iter().any(|n| n.node == node)
    }

    pub fn node(&self, node: NodeRef) -> Option<&CircuitNode> {
        self.nodes.iter().find(|n| n.node == node)
    }

    pub fn node_refs(&self) -> Vec<NodeRef> {
        self.nodes.iter().map(|n| n.node).collect()
    }

    pub fn has_edge(&self, up: NodeRef, down: NodeRef) -> bool {
        self.edges.iter().any(|e| e.upstream == up && e.downstream == down)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialises")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        let c: Circuit = serde_json::from_str(text)?;
        if c.format_version != CIRCUIT_FORMAT_VERSION {
            return Err(crate::Error::invalid(format!(
                "circuit format_version {}",
                c.format_version
            )));
        }
        Ok(c)
    }
}
