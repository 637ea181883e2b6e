use serde::{Deserialize, Serialize};

use super::{
    Admission, Circuit, CircuitEdge, CircuitNode, DiscoveryOptions, LocalExpansionMark, CIRCUIT_FORMAT_VERSION,
};
use crate::engine::{detect_preemption, find_minimal_ablation_sets, NetworkProbe, SearchMode};
use crate::error::{Error, Result};
use crate::interventions::{node_effects, sweep_nodes, AblationKind, Estimator, Replacement, Sign, TargetMetric};
use crate::par;
use crate::toynets::{Example, NeuralNetwork, NodeRef};

/// Mediators that can influence the metric.
fn candidates(net: &NeuralNetwork, metric: &TargetMetric) -> Vec<NodeRef> {
    let nodes = net.mediators();
    match metric.node() {
        Some(t) => nodes.into_iter().filter(|&n| net.is_upstream(n, t)).collect(),
        None => nodes,
    }
}

fn check_options(
    net: &NeuralNetwork,
    dataset: &[Example],
    metric: &TargetMetric,
    opts: &DiscoveryOptions,
) -> Result<()> {
    let t = &opts.thresholds;
    for (name, v) in [("node threshold", t.node), ("edge threshold", t.edge)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    if dataset.is_empty() {
        return Err(Error::Empty("dataset".into()));
    }
    opts.estimator.validate()?;
    metric.validate(net)
}

struct Scored {
    nodes: Vec<NodeRef>,
    effects: Vec<f64>,
}

impl Scored {
    fn effect(&self, n: NodeRef) -> Option<f64> {
        self.nodes.iter().position(|&m| m == n).map(|i| self.effects[i])
    }
}

fn score(
    net: &NeuralNetwork,
    dataset: &[Example],
    metric: &TargetMetric,
    nodes: Vec<NodeRef>,
    repl: &Replacement,
    estimator: Estimator,
) -> Result<Scored> {
    let (effects, _) = sweep_nodes(net, dataset, &nodes, repl, metric, estimator)?;
    Ok(Scored { nodes, effects })
}

fn empty_circuit(metric: &TargetMetric, opts: &DiscoveryOptions) -> Circuit {
    Circuit {
        format_version: CIRCUIT_FORMAT_VERSION,
        target: *metric,
        thresholds: opts.thresholds,
        method: opts.estimator,
        ablation: opts.ablation.name().to_string(),
        nodes: Vec::new(),
        edges: Vec::new(),
    }
}

/// Keeps every mediator whose mean effect on `metric` passes `T_N`, then
/// scores edges between kept parent/child pairs.
pub fn discover_circuit(
    net: &NeuralNetwork,
    dataset: &[Example],
    metric: &TargetMetric,
    opts: &DiscoveryOptions,
) -> Result<Circuit> {
    check_options(net, dataset, metric, opts)?;
    let repl = opts.ablation.prepare(net)?;
    let scored = score(net, dataset, metric, candidates(net, metric), &repl, opts.estimator)?;
    let mut circuit = empty_circuit(metric, opts);
    for (&node, &effect) in scored.nodes.iter().zip(&scored.effects) {
        if opts.thresholds.passes_node(effect) {
            circuit.nodes.push(CircuitNode {
                node,
                label: net.label(node),
                effect,
                admission: Admission::Threshold,
            });
        }
    }
    finish(net, dataset, &mut circuit, &repl)?;
    Ok(circuit)
}

/// Sorts nodes topologically and recomputes every edge.
fn finish(net: &NeuralNetwork, dataset: &[Example], circuit: &mut Circuit, repl: &Replacement) -> Result<()> {
    circuit.nodes.sort_by_key(|n| net.rank(n.node));
    let kept = circuit.node_refs();
    let mut edges = Vec::new();
    for &down in &kept {
        let parents: Vec<NodeRef> = kept.iter().copied().filter(|&up| net.is_parent(up, down)).collect();
        if parents.is_empty() {
            continue;
        }
        let metric = TargetMetric::NodeActivation {
            node: down,
            sign: Sign::Positive,
        };
        let (scores, _) = sweep_nodes(net, dataset, &parents, repl, &metric, circuit.method)?;
        for (&upstream, &score) in parents.iter().zip(&scores) {
            if circuit.thresholds.passes_edge(score) {
                edges.push(CircuitEdge {
                    upstream,
                    downstream: down,
                    score,
                });
            }
        }
    }
    edges.sort_by_key(|e| (net.rank(e.upstream), net.rank(e.downstream)));
    circuit.edges = edges;
    Ok(())
}

/// Effect of replacing `up` on the (unsigned) activation of `down`.
pub fn edge_attribution(
    net: &NeuralNetwork,
    example: &Example,
    up: NodeRef,
    down: NodeRef,
    estimator: Estimator,
    kind: &AblationKind,
) -> Result<f64> {
    net.check_node(up)?;
    net.check_node(down)?;
    if !net.is_upstream(up, down) {
        return Err(Error::invalid(format!(
            "edge {} → {} violates the network order",
            net.label(up),
            net.label(down)
        )));
    }
    let metric = TargetMetric::NodeActivation {
        node: down,
        sign: Sign::Positive,
    };
    let repl = kind.prepare(net)?;
    Ok(node_effects(net, example, &[up], &repl, &metric, estimator)?[0])
}

/// Re-runs discovery against the anchor's activation and adds upstream
/// nodes that pass `T_N` there. Edges are recomputed for the grown set.
///
/// The anchor metric uses the negative sign, so "removing this node lowers
/// the anchor" shows up as a positive effect.
pub fn expand_local_dependencies(
    net: &NeuralNetwork,
    circuit: &Circuit,
    anchor: NodeRef,
    dataset: &[Example],
    opts: &DiscoveryOptions,
) -> Result<Circuit> {
    if !circuit.contains(anchor) {
        return Err(Error::invalid(format!(
            "anchor {} is not in the circuit",
            net.label(anchor)
        )));
    }
    if opts.estimator != circuit.method {
        return Err(Error::invalid(format!(
            "circuit was built with {}, expansion asked for {}",
            circuit.method, opts.estimator
        )));
    }
    let local = TargetMetric::NodeActivation {
        node: anchor,
        sign: Sign::Negative,
    };
    check_options(net, dataset, &local, opts)?;
    let repl = opts.ablation.prepare(net)?;
    let fresh: Vec<NodeRef> = candidates(net, &local)
        .into_iter()
        .filter(|&n| !circuit.contains(n))
        .collect();
    let at_anchor = score(net, dataset, &local, fresh, &repl, circuit.method)?;
    let admitted: Vec<(NodeRef, f64)> = at_anchor
        .nodes
        .iter()
        .zip(&at_anchor.effects)
        .filter(|(_, &e)| opts.thresholds.passes_node(e))
        .map(|(&n, &e)| (n, e))
        .collect();

    let mut out = circuit.clone();
    if admitted.is_empty() {
        return Ok(out);
    }
    let on_target = score(
        net,
        dataset,
        &circuit.target,
        admitted.iter().map(|&(n, _)| n).collect(),
        &repl,
        circuit.method,
    )?;
    for (&(node, anchor_effect), &effect) in admitted.iter().zip(&on_target.effects) {
        out.nodes.push(CircuitNode {
            node,
            label: net.label(node),
            effect,
            admission: Admission::LocalExpansion(LocalExpansionMark { anchor, anchor_effect }),
        });
    }
    finish(net, dataset, &mut out, &repl)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSearchOptions {
    /// Largest joint ablation tried; 1 disables set search.
    pub k_max: usize,
    /// Run this many preemption rounds and admit later-round discoveries.
    #[serde(default)]
    pub preemption_rounds: Option<usize>,
}

impl Default for SetSearchOptions {
    fn default() -> Self {
        SetSearchOptions {
            k_max: 1,
            preemption_rounds: None,
        }
    }
}

/// Threshold discovery plus nodes that only matter jointly (minimal
/// ablation sets of size ≥ 2) or once earlier causes are removed.
///
/// Joint effects are always exact interventions, whatever the estimator.
pub fn discover_with_set_search(
    net: &NeuralNetwork,
    dataset: &[Example],
    metric: &TargetMetric,
    opts: &DiscoveryOptions,
    search: &SetSearchOptions,
) -> Result<Circuit> {
    if search.k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    check_options(net, dataset, metric, opts)?;
    let repl = opts.ablation.prepare(net)?;
    let scored = score(net, dataset, metric, candidates(net, metric), &repl, opts.estimator)?;
    let mut circuit = empty_circuit(metric, opts);
    for (&node, &effect) in scored.nodes.iter().zip(&scored.effects) {
        if opts.thresholds.passes_node(effect) {
            circuit.nodes.push(CircuitNode {
                node,
                label: net.label(node),
                effect,
                admission: Admission::Threshold,
            });
        }
    }
    if search.k_max >= 2 || search.preemption_rounds.is_some() {
        let probe = NetworkProbe::new(net, dataset, &scored.nodes, &opts.ablation, metric)?;
        let t_n = opts.thresholds.node;
        let add = |circuit: &mut Circuit, node: NodeRef, admission: Admission| {
            if !circuit.contains(node) {
                circuit.nodes.push(CircuitNode {
                    node,
                    label: net.label(node),
                    effect: scored.effect(node).unwrap_or(0.0),
                    admission,
                });
            }
        };
        if search.k_max >= 2 {
            let report = find_minimal_ablation_sets(&probe, t_n, search.k_max, SearchMode::Exhaustive)?;
            for set in report.minimal_sets.iter().filter(|s| s.indices.len() >= 2) {
                if !opts.thresholds.passes_node(set.effect_delta) {
                    continue;
                }
                let members: Vec<NodeRef> = set.indices.iter().map(|&i| scored.nodes[i]).collect();
                for &m in &members {
                    let admission = Admission::SetSearch {
                        set: members.clone(),
                        joint_effect: set.effect_delta,
                    };
                    add(&mut circuit, m, admission);
                }
            }
        }
        if let Some(rounds) = search.preemption_rounds {
            let report = detect_preemption(&probe, t_n, rounds)?;
            for cause in &report.preempted {
                if !opts.thresholds.passes_node(cause.effect_delta) {
                    continue;
                }
                let admission = Admission::Preempted {
                    round: cause.round,
                    effect: cause.effect_delta,
                };
                add(&mut circuit, scored.nodes[cause.index], admission);
            }
        }
    }
    finish(net, dataset, &mut circuit, &repl)?;
    Ok(circuit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Faithfulness {
    /// `circuit_metric / full_metric`, clamped to [0, 1].
    pub retention: f64,
    pub raw_ratio: f64,
    pub full_metric: f64,
    pub circuit_metric: f64,
}

/// Mean metric with every mediator outside the circuit ablated, relative
/// to the unablated mean.
pub fn circuit_faithfulness(
    net: &NeuralNetwork,
    circuit: &Circuit,
    dataset: &[Example],
    metric: &TargetMetric,
    kind: &AblationKind,
) -> Result<Faithfulness> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset".into()));
    }
    metric.validate(net)?;
    let target = metric.node();
    let outside: Vec<NodeRef> = net
        .mediators()
        .into_iter()
        .filter(|&n| !circuit.contains(n) && Some(n) != target)
        .collect();
    let ov = kind.prepare(net)?.overrides(&outside);
    let indexed: Vec<(usize, &Example)> = dataset.iter().enumerate().collect();
    let pairs = par::try_map(&indexed, |&(i, ex)| {
        let run = || -> Result<(f64, f64)> {
            let full = metric.value(net, &net.forward(&ex.input)?, ex.label)?;
            let cut = metric.value(net, &net.forward_with(&ex.input, &ov)?, ex.label)?;
            Ok((full, cut))
        };
        run().map_err(|e| e.at_example(i))
    })?;
    let n = pairs.len() as f64;
    let full_metric = par::pairwise_sum(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()) / n;
    let circuit_metric = par::pairwise_sum(&pairs.iter().map(|p| p.1).collect::<Vec<_>>()) / n;
    if full_metric.abs() < 1e-12 {
        return Err(Error::MetricUndefined("full-network metric is zero".into()));
    }
    let raw_ratio = circuit_metric / full_metric;
    Ok(Faithfulness {
        retention: raw_ratio.clamp(0.0, 1.0),
        raw_ratio,
        full_metric,
        circuit_metric,
    })
}
