//! Ablations, target metrics and indirect-effect estimators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::toynets::{ActivationTrace, Example, NeuralNetwork, NodeRef, Overrides, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    /// Default: causes of a node's activation then carry positive effects.
    #[default]
    Negative,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// Output index for a log-probability metric: fixed, or the example's label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Index(usize),
    Label,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TargetRepr {
    Index(usize),
    Name(String),
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Target::Index(i) => TargetRepr::Index(i),
            Target::Label => TargetRepr::Name("label".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match TargetRepr::deserialize(d)? {
            TargetRepr::Index(i) => Ok(Target::Index(i)),
            TargetRepr::Name(s) if s == "label" => Ok(Target::Label),
            TargetRepr::Name(s) => Err(serde::de::Error::custom(format!("unknown target `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetMetric {
    LogitDifference {
        correct: usize,
        incorrect: usize,
    },
    NegativeLogProbability {
        target: Target,
    },
    NodeActivation {
        node: NodeRef,
        #[serde(default)]
        sign: Sign,
    },
}

impl fmt::Display for TargetMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetMetric::LogitDifference { correct, incorrect } => write!(f, "logit-diff:{correct},{incorrect}"),
            TargetMetric::NegativeLogProbability {
                target: Target::Index(i),
            } => write!(f, "nll:{i}"),
            TargetMetric::NegativeLogProbability { target: Target::Label } => write!(f, "nll:label"),
            TargetMetric::NodeActivation { node, sign } => {
                let s = if *sign == Sign::Positive { "pos" } else { "neg" };
                write!(f, "node:{node}:{s}")
            }
        }
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return f64::NAN;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl TargetMetric {
    /// The un-negated output activation `index`.
    pub fn output(net: &NeuralNetwork, index: usize) -> Self {
        TargetMetric::NodeActivation {
            node: NodeRef::neuron(net.layers().len(), index),
            sign: Sign::Positive,
        }
    }

    /// Parse `output:I`, `logit-diff:A,B`, `nll:I|label` or
    /// `node:REF[:pos|neg]`, where REF is a node label or `L1.0` / `F3`.
    pub fn parse(text: &str, net: &NeuralNetwork) -> Result<Self> {
        let bad = || Error::invalid(format!("cannot parse metric `{text}`"));
        let (kind, arg) = text.split_once(':').ok_or_else(bad)?;
        let index = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        let metric = match kind {
            "output" => Self::output(net, index(arg)?),
            "logit-diff" => {
                let (a, b) = arg.split_once(',').ok_or_else(bad)?;
                TargetMetric::LogitDifference {
                    correct: index(a)?,
                    incorrect: index(b)?,
                }
            }
            "nll" => TargetMetric::NegativeLogProbability {
                target: if arg == "label" {
                    Target::Label
                } else {
                    Target::Index(index(arg)?)
                },
            },
            "node" => {
                let (name, sign) = match arg.rsplit_once(':') {
                    Some((n, "pos")) => (n, Sign::Positive),
                    Some((n, "neg")) => (n, Sign::Negative),
                    _ => (arg, Sign::default()),
                };
                TargetMetric::NodeActivation {
                    node: net.resolve_node(name)?,
                    sign,
                }
            }
            _ => return Err(bad()),
        };
        metric.validate(net)?;
        Ok(metric)
    }

    pub fn validate(&self, net: &NeuralNetwork) -> Result<()> {
        let width = net.output_width();
        let check = |i: usize| {
            if i < width {
                Ok(())
            } else {
                Err(Error::invalid(format!("output index {i} out of range (width {width})")))
            }
        };
        match *self {
            TargetMetric::LogitDifference { correct, incorrect } => {
                check(correct)?;
                check(incorrect)
            }
            TargetMetric::NegativeLogProbability {
                target: Target::Index(i),
            } => check(i),
            TargetMetric::NegativeLogProbability { target: Target::Label } => Ok(()),
            TargetMetric::NodeActivation { node, .. } => net.check_node(node),
        }
    }

    /// The node this metric reads, when it reads a single node.
    pub fn node(&self) -> Option<NodeRef> {
        match *self {
            TargetMetric::NodeActivation { node, .. } => Some(node),
            _ => None,
        }
    }

    fn target_index(&self, net: &NeuralNetwork, target: Target, label: Option<usize>) -> Result<usize> {
        let i = match target {
            Target::Index(i) => i,
            Target::Label => label.ok_or_else(|| Error::invalid(format!("metric {self} needs labelled examples")))?,
        };
        if i >= net.output_width() {
            return Err(Error::invalid(format!("target {i} out of range")));
        }
        Ok(i)
    }

    pub fn value(&self, net: &NeuralNetwork, trace: &ActivationTrace, label: Option<usize>) -> Result<f64> {
        let out = trace.output();
        let v = match *self {
            TargetMetric::LogitDifference { correct, incorrect } => out[correct] - out[incorrect],
            TargetMetric::NegativeLogProbability { target } => {
                let t = self.target_index(net, target, label)?;
                log_sum_exp(out) - out[t]
            }
            TargetMetric::NodeActivation { node, sign } => {
                net.check_node(node)?;
                sign.factor() * trace.value(node)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MetricUndefined(format!("{self} evaluated to {v}")))
        }
    }

    /// d(metric)/d(node) for the nodes the metric reads directly.
    pub(crate) fn seeds(
        &self,
        net: &NeuralNetwork,
        trace: &ActivationTrace,
        label: Option<usize>,
    ) -> Result<Vec<(NodeRef, f64)>> {
        let last = net.layers().len();
        let out = trace.output();
        Ok(match *self {
            TargetMetric::LogitDifference { correct, incorrect } => vec![
                (NodeRef::neuron(last, correct), 1.0),
                (NodeRef::neuron(last, incorrect), -1.0),
            ],
            TargetMetric::NegativeLogProbability { target } => {
                let t = self.target_index(net, target, label)?;
                let lse = log_sum_exp(out);
                if !lse.is_finite() {
                    return Err(Error::MetricUndefined(format!("{self}: non-finite logits")));
                }
                out.iter()
                    .enumerate()
                    .map(|(k, &o)| {
                        let p = (o - lse).exp();
                        (NodeRef::neuron(last, k), if k == t { p - 1.0 } else { p })
                    })
                    .collect()
            }
            TargetMetric::NodeActivation { node, sign } => {
                net.check_node(node)?;
                vec![(node, sign.factor())]
            }
        })
    }
}

/// How an ablated node's activation is replaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AblationKind {
    Zero,
    /// Mean activation over a reference dataset.
    Mean {
        reference: Vec<Example>,
    },
    /// Activation from one seeded draw of the reference dataset.
    Resample {
        reference: Vec<Example>,
        seed: u64,
    },
    /// Activation from a counterfactual input.
    Patch {
        input: Vec<f64>,
    },
    Inject {
        value: f64,
    },
}

impl AblationKind {
    pub fn name(&self) -> &'static str {
        match self {
            AblationKind::Zero => "zero",
            AblationKind::Mean { .. } => "mean",
            AblationKind::Resample { .. } => "resample",
            AblationKind::Patch { .. } => "patch",
            AblationKind::Inject { .. } => "inject",
        }
    }

    /// Resolve the replacement values once; none depend on the input being
    /// ablated.
    pub fn prepare(&self, net: &NeuralNetwork) -> Result<Replacement> {
        let trace_map = |t: &ActivationTrace| -> BTreeMap<NodeRef, f64> {
            net.nodes().into_iter().map(|n| (n, t.value(n))).collect()
        };
        Ok(match self {
            AblationKind::Zero => Replacement::Constant(0.0),
            AblationKind::Inject { value } => {
                if !value.is_finite() {
                    return Err(Error::NonFinite("injected value".into()));
                }
                Replacement::Constant(*value)
            }
            AblationKind::Patch { input } => Replacement::Values(trace_map(&net.forward(input)?)),
            AblationKind::Mean { reference } => {
                if reference.is_empty() {
                    return Err(Error::Empty("mean-ablation reference dataset".into()));
                }
                let traces = reference
                    .iter()
                    .enumerate()
                    .map(|(i, e)| net.forward(&e.input).map_err(|err| err.at_example(i)))
                    .collect::<Result<Vec<_>>>()?;
                let values = net
                    .nodes()
                    .into_iter()
                    .map(|n| {
                        let xs: Vec<f64> = traces.iter().map(|t| t.value(n)).collect();
                        (n, par::pairwise_sum(&xs) / xs.len() as f64)
                    })
                    .collect();
                Replacement::Values(values)
            }
            AblationKind::Resample { reference, seed } => {
                if reference.is_empty() {
                    return Err(Error::Empty("resample reference dataset".into()));
                }
                let pick = SplitMix64::derived(*seed, "resample").below(reference.len());
                Replacement::Values(trace_map(&net.forward(&reference[pick].input)?))
            }
        })
    }
}

/// Prepared replacement values for an [`AblationKind`].
#[derive(Debug, Clone, PartialEq)]
pub enum Replacement {
    Constant(f64),
    Values(BTreeMap<NodeRef, f64>),
}

impl Replacement {
    pub fn value(&self, node: NodeRef) -> f64 {
        match self {
            Replacement::Constant(v) => *v,
            Replacement::Values(m) => m[&node],
        }
    }

    pub fn overrides(&self, nodes: &[NodeRef]) -> Overrides {
        nodes.iter().map(|&n| (n, self.value(n))).collect()
    }
}

/// Forward pass with `node` replaced according to `kind`.
pub fn apply_ablation(
    net: &NeuralNetwork,
    input: &[f64],
    node: NodeRef,
    kind: &AblationKind,
) -> Result<ActivationTrace> {
    net.check_node(node)?;
    let r = kind.prepare(net)?;
    net.forward_with(input, &r.overrides(&[node]))
}

/// metric(ablated) − metric(original) for a joint ablation of `nodes`.
pub fn joint_effect_exact(
    net: &NeuralNetwork,
    example: &Example,
    nodes: &[NodeRef],
    kind: &AblationKind,
    metric: &TargetMetric,
) -> Result<f64> {
    let r = kind.prepare(net)?;
    exact_with(net, example, &r.overrides(nodes), metric)
}

pub fn indirect_effect_exact(
    net: &NeuralNetwork,
    example: &Example,
    node: NodeRef,
    kind: &AblationKind,
    metric: &TargetMetric,
) -> Result<f64> {
    net.check_node(node)?;
    joint_effect_exact(net, example, &[node], kind, metric)
}

pub(crate) fn exact_with(net: &NeuralNetwork, example: &Example, ov: &Overrides, metric: &TargetMetric) -> Result<f64> {
    let base = metric.value(net, &net.forward(&example.input)?, example.label)?;
    let ablated = metric.value(net, &net.forward_with(&example.input, ov)?, example.label)?;
    Ok(ablated - base)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    Exact,
    /// Gradient × activation delta at the original run.
    Linear,
    /// Left-endpoint rule over `steps` equal segments in activation space.
    IntegratedGradients {
        steps: usize,
    },
}

pub const IG_CONVENTION: &str =
    "integrated gradients: left endpoints of equal segments, interpolated in the node's activation with the input held fixed";

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Exact => f.write_str("exact"),
            Estimator::Linear => f.write_str("linear"),
            Estimator::IntegratedGradients { steps } => write!(f, "ig:{steps}"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let est = match s {
            "exact" => Estimator::Exact,
            "linear" | "attribution" => Estimator::Linear,
            "ig" => Estimator::IntegratedGradients { steps: 64 },
            _ => match s.strip_prefix("ig:").map(str::parse::<usize>) {
                Some(Ok(steps)) => Estimator::IntegratedGradients { steps },
                _ => return Err(Error::invalid(format!("unknown estimator `{s}` (exact, linear, ig:N)"))),
            },
        };
        est.validate()?;
        Ok(est)
    }
}

impl Estimator {
    pub fn validate(&self) -> Result<()> {
        match self {
            Estimator::IntegratedGradients { steps: 0 } => Err(Error::invalid("integrated gradients needs steps >= 1")),
            _ => Ok(()),
        }
    }
}

/// Per-node effects of replacing each node in turn, on one example.
pub(crate) fn node_effects(
    net: &NeuralNetwork,
    example: &Example,
    nodes: &[NodeRef],
    repl: &Replacement,
    metric: &TargetMetric,
    estimator: Estimator,
) -> Result<Vec<f64>> {
    estimator.validate()?;
    let trace = net.forward(&example.input)?;
    match estimator {
        Estimator::Exact => {
            let base = metric.value(net, &trace, example.label)?;
            nodes
                .iter()
                .map(|&n| {
                    let t = net.forward_with(&example.input, &repl.overrides(&[n]))?;
                    Ok(metric.value(net, &t, example.label)? - base)
                })
                .collect()
        }
        Estimator::Linear => {
            let g = net.backward_from(&trace, &Overrides::new(), metric, example.label)?;
            Ok(nodes
                .iter()
                .map(|&n| g.get(n) * (repl.value(n) - trace.value(n)))
                .collect())
        }
        Estimator::IntegratedGradients { steps } => nodes
            .iter()
            .map(|&n| {
                let a = trace.value(n);
                let delta = repl.value(n) - a;
                let mut total = 0.0;
                for k in 0..steps {
                    let alpha = k as f64 / steps as f64;
                    let ov: Overrides = [(n, a + alpha * delta)].into_iter().collect();
                    let t = net.forward_with(&example.input, &ov)?;
                    total += net.backward_from(&t, &ov, metric, example.label)?.get(n);
                }
                Ok(total / steps as f64 * delta)
            })
            .collect(),
    }
}

/// Mean and variance of [`node_effects`] over a dataset.
pub(crate) fn sweep_nodes(
    net: &NeuralNetwork,
    dataset: &[Example],
    nodes: &[NodeRef],
    repl: &Replacement,
    metric: &TargetMetric,
    estimator: Estimator,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset".into()));
    }
    let indexed: Vec<(usize, &Example)> = dataset.iter().enumerate().collect();
    let per_example = par::try_map(&indexed, |&(i, ex)| {
        node_effects(net, ex, nodes, repl, metric, estimator).map_err(|e| e.at_example(i))
    })?;
    let mut means = Vec::with_capacity(nodes.len());
    let mut vars = Vec::with_capacity(nodes.len());
    for j in 0..nodes.len() {
        let column: Vec<f64> = per_example.iter().map(|row| row[j]).collect();
        let (m, v) = par::mean_var(&column);
        means.push(m);
        vars.push(v);
    }
    Ok((means, vars))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEntry {
    pub node: NodeRef,
    pub label: String,
    pub estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectTable {
    pub method: Estimator,
    pub ablation: String,
    pub metric: TargetMetric,
    pub context: String,
    pub entries: Vec<EffectEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
}

impl EffectTable {
    pub fn get(&self, node: NodeRef) -> Option<f64> {
        self.entries.iter().find(|e| e.node == node).map(|e| e.estimate)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,label,estimate,variance,method\n");
        for e in &self.entries {
            let var = e.variance.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.node, e.label, e.estimate, var, self.method
            ));
        }
        out
    }
}

fn zero_ablation_warning(kind: &AblationKind, nodes: &[NodeRef]) -> Vec<String> {
    if *kind == AblationKind::Zero && nodes.iter().any(|n| matches!(n, NodeRef::Neuron { .. })) {
        vec!["zero ablation of raw neurons is not generally principled; consider mean or resample ablation".into()]
    } else {
        Vec::new()
    }
}

#[allow(clippy::too_many_arguments)]
fn table(
    net: &NeuralNetwork,
    nodes: &[NodeRef],
    estimates: Vec<f64>,
    variances: Option<Vec<f64>>,
    kind: &AblationKind,
    metric: &TargetMetric,
    method: Estimator,
    context: String,
) -> EffectTable {
    let entries = nodes
        .iter()
        .enumerate()
        .map(|(i, &n)| EffectEntry {
            node: n,
            label: net.label(n),
            estimate: estimates[i],
            variance: variances.as_ref().map(|v| v[i]),
        })
        .collect();
    EffectTable {
        method,
        ablation: kind.name().into(),
        metric: *metric,
        context,
        entries,
        warnings: zero_ablation_warning(kind, nodes),
        convention: matches!(method, Estimator::IntegratedGradients { .. }).then(|| IG_CONVENTION.to_string()),
    }
}

/// One estimator over every mediator for a single example.
pub fn effect_table(
    net: &NeuralNetwork,
    example: &Example,
    kind: &AblationKind,
    metric: &TargetMetric,
    estimator: Estimator,
) -> Result<EffectTable> {
    metric.validate(net)?;
    let nodes = net.mediators();
    let repl = kind.prepare(net)?;
    let est = node_effects(net, example, &nodes, &repl, metric, estimator)?;
    Ok(table(
        net,
        &nodes,
        est,
        None,
        kind,
        metric,
        estimator,
        "single example".into(),
    ))
}

/// Gradient × (replacement − original) for every mediator at once.
pub fn attribution_patching(
    net: &NeuralNetwork,
    example: &Example,
    kind: &AblationKind,
    metric: &TargetMetric,
) -> Result<EffectTable> {
    effect_table(net, example, kind, metric, Estimator::Linear)
}

pub fn integrated_gradients_ie(
    net: &NeuralNetwork,
    example: &Example,
    kind: &AblationKind,
    metric: &TargetMetric,
    steps: usize,
) -> Result<EffectTable> {
    effect_table(net, example, kind, metric, Estimator::IntegratedGradients { steps })
}

/// Per-node mean and variance of an estimator over a dataset.
pub fn effect_sweep(
    net: &NeuralNetwork,
    dataset: &[Example],
    kind: &AblationKind,
    metric: &TargetMetric,
    estimator: Estimator,
) -> Result<EffectTable> {
    metric.validate(net)?;
    let nodes = net.mediators();
    let repl = kind.prepare(net)?;
    let (means, vars) = sweep_nodes(net, dataset, &nodes, &repl, metric, estimator)?;
    let context = format!("mean over {} example(s)", dataset.len());
    Ok(table(net, &nodes, means, Some(vars), kind, metric, estimator, context))
}
