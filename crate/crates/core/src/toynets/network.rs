use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dictionary::FeatureDictionary;
use super::rng::SplitMix64;
use crate::error::{Error, Result};
use crate::interventions::TargetMetric;
use crate::scm::expr::Func;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Logistic,
    Tanh,
}

impl Activation {
    pub(crate) fn func(self) -> Option<Func> {
        match self {
            Activation::Identity => None,
            Activation::Relu => Some(Func::Relu),
            Activation::Logistic => Some(Func::Logistic),
            Activation::Tanh => Some(Func::Tanh),
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        self.func().map_or(x, |f| f.apply(x))
    }

    /// Derivative from the pre-activation and post-activation values.
    /// The relu subgradient at 0 is 0.
    pub fn derivative(self, pre: f64, post: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Logistic => post * (1.0 - post),
            Activation::Tanh => 1.0 - post * post,
        }
    }
}

/// Dense layer; `weights` is out × in, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Layer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, activation: Activation) -> Self {
        Layer {
            weights,
            bias,
            activation,
            labels: None,
        }
    }

    pub fn labelled(mut self, labels: &[&str]) -> Self {
        self.labels = Some(labels.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn width(&self) -> usize {
        self.bias.len()
    }

    pub fn fan_in(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }
}

/// A mediator in a network. Layer 0 holds the input neurons; layer `l`
/// holds the post-activations of the `l`-th dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Neuron { layer: usize, index: usize },
    Feature { index: usize },
}

impl NodeRef {
    pub fn neuron(layer: usize, index: usize) -> Self {
        NodeRef::Neuron { layer, index }
    }

    pub fn feature(index: usize) -> Self {
        NodeRef::Feature { index }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Neuron { layer, index } => write!(f, "L{layer}.{index}"),
            NodeRef::Feature { index } => write!(f, "F{index}"),
        }
    }
}

impl FromStr for NodeRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownNode(s.to_string());
        if let Some(rest) = s.strip_prefix('L') {
            let (l, i) = rest.split_once('.').ok_or_else(bad)?;
            Ok(NodeRef::neuron(
                l.parse().map_err(|_| bad())?,
                i.parse().map_err(|_| bad())?,
            ))
        } else if let Some(rest) = s.strip_prefix('F') {
            Ok(NodeRef::feature(rest.parse().map_err(|_| bad())?))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for NodeRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Replacement activations applied during a forward pass.
pub type Overrides = BTreeMap<NodeRef, f64>;

/// One labelled (or unlabelled) input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub input: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

impl Example {
    pub fn unlabeled(input: Vec<f64>) -> Self {
        Example { input, label: None }
    }

    pub fn labeled(input: Vec<f64>, label: usize) -> Self {
        Example {
            input,
            label: Some(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkFile", into = "NetworkFile")]
pub struct NeuralNetwork {
    input_width: usize,
    input_labels: Option<Vec<String>>,
    layers: Vec<Layer>,
    dictionary: Option<FeatureDictionary>,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    format_version: u32,
    input_width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_labels: Option<Vec<String>>,
    layers: Vec<Layer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dictionary: Option<FeatureDictionary>,
}

impl TryFrom<NetworkFile> for NeuralNetwork {
    type Error = Error;

    fn try_from(f: NetworkFile) -> Result<Self> {
        if f.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "network format_version {} (supported: {FORMAT_VERSION})",
                f.format_version
            )));
        }
        let mut net = NeuralNetwork::new(f.input_width, f.layers)?;
        if let Some(labels) = f.input_labels {
            net = net.with_input_labels(labels)?;
        }
        if let Some(d) = f.dictionary {
            net = net.with_dictionary(d)?;
        }
        Ok(net)
    }
}

impl From<NeuralNetwork> for NetworkFile {
    fn from(n: NeuralNetwork) -> Self {
        NetworkFile {
            format_version: FORMAT_VERSION,
            input_width: n.input_width,
            input_labels: n.input_labels,
            layers: n.layers,
            dictionary: n.dictionary,
        }
    }
}

/// Per-layer values of one forward pass, after any overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    pub input: Vec<f64>,
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
    pub feature_pre: Option<Vec<f64>>,
    pub features: Option<Vec<f64>>,
}

impl ActivationTrace {
    pub fn value(&self, node: NodeRef) -> f64 {
        match node {
            NodeRef::Neuron { layer: 0, index } => self.input[index],
            NodeRef::Neuron { layer, index } => self.post[layer - 1][index],
            NodeRef::Feature { index } => self.features.as_ref().expect("dictionary attached")[index],
        }
    }

    pub fn output(&self) -> &[f64] {
        self.post.last().map_or(&self.input, Vec::as_slice)
    }
}

/// Derivatives of a scalar metric with respect to every node value.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMap {
    pub input: Vec<f64>,
    pub post: Vec<Vec<f64>>,
    pub features: Option<Vec<f64>>,
    pub(crate) pre: Vec<Vec<f64>>,
}

impl GradientMap {
    pub fn get(&self, node: NodeRef) -> f64 {
        match node {
            NodeRef::Neuron { layer: 0, index } => self.input[index],
            NodeRef::Neuron { layer, index } => self.post[layer - 1][index],
            NodeRef::Feature { index } => self.features.as_ref().map_or(0.0, |f| f[index]),
        }
    }
}

/// Left-to-right dot product followed by the bias, the exact operation
/// order that compiled graphs reproduce.
pub(crate) fn affine(row: &[f64], input: &[f64], bias: f64) -> f64 {
    let mut acc = row[0] * input[0];
    for j in 1..row.len() {
        acc += row[j] * input[j];
    }
    acc + bias
}

fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

impl NeuralNetwork {
    pub fn new(input_width: usize, layers: Vec<Layer>) -> Result<Self> {
        if input_width == 0 {
            return Err(Error::invalid("input width must be positive"));
        }
        if layers.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        let mut width = input_width;
        for (l, layer) in layers.iter().enumerate() {
            if layer.width() == 0 || layer.weights.len() != layer.width() {
                return Err(Error::invalid(format!(
                    "layer {}: {} weight rows for {} biases",
                    l + 1,
                    layer.weights.len(),
                    layer.width()
                )));
            }
            for row in &layer.weights {
                if row.len() != width {
                    return Err(Error::WidthMismatch {
                        expected: width,
                        found: row.len(),
                    });
                }
                check_finite(&format!("layer {} weight", l + 1), row)?;
            }
            check_finite(&format!("layer {} bias", l + 1), &layer.bias)?;
            if let Some(labels) = &layer.labels {
                if labels.len() != layer.width() {
                    return Err(Error::invalid(format!("layer {} has {} labels", l + 1, labels.len())));
                }
            }
            width = layer.width();
        }
        Ok(NeuralNetwork {
            input_width,
            input_labels: None,
            layers,
            dictionary: None,
        })
    }

    /// Uniform initialisation in ±1/√fan_in for weights and biases.
    pub fn random(input_width: usize, spec: &[(usize, Activation)], seed: u64) -> Result<Self> {
        let mut rng = SplitMix64::derived(seed, "init");
        let mut fan_in = input_width;
        let mut layers = Vec::with_capacity(spec.len());
        for &(width, activation) in spec {
            let bound = 1.0 / (fan_in as f64).sqrt();
            let weights = (0..width)
                .map(|_| (0..fan_in).map(|_| rng.uniform(-bound, bound)).collect())
                .collect();
            let bias = (0..width).map(|_| rng.uniform(-bound, bound)).collect();
            layers.push(Layer::new(weights, bias, activation));
            fan_in = width;
        }
        Self::new(input_width, layers)
    }

    pub fn with_input_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.input_width {
            return Err(Error::invalid(format!(
                "{} input labels for width {}",
                labels.len(),
                self.input_width
            )));
        }
        self.input_labels = Some(labels);
        Ok(self)
    }

    pub fn with_dictionary(mut self, dictionary: FeatureDictionary) -> Result<Self> {
        if dictionary.attach_point >= self.layers.len() {
            return Err(Error::invalid(format!(
                "dictionary attach point {} has no downstream layer",
                dictionary.attach_point
            )));
        }
        let width = self.layer_width(dictionary.attach_point);
        if dictionary.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: dictionary.width(),
            });
        }
        self.dictionary = Some(dictionary);
        Ok(self)
    }

    pub fn without_dictionary(mut self) -> Self {
        self.dictionary = None;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialises")
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(self.input_width, Layer::width)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn dictionary(&self) -> Option<&FeatureDictionary> {
        self.dictionary.as_ref()
    }

    /// Number of node layers, counting the input layer.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn layer_width(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_width
        } else {
            self.layers[layer - 1].width()
        }
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        match node {
            NodeRef::Neuron { layer, index } => layer < self.depth() && index < self.layer_width(layer),
            NodeRef::Feature { index } => self.dictionary.as_ref().is_some_and(|d| index < d.feature_count()),
        }
    }

    pub fn check_node(&self, node: NodeRef) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node.to_string()))
        }
    }

    /// Position in a topological order of all nodes: features sit between
    /// their attach layer and the next one.
    pub fn rank(&self, node: NodeRef) -> (usize, usize, usize) {
        match node {
            NodeRef::Neuron { layer, index } => (layer, 0, index),
            NodeRef::Feature { index } => {
                let a = self.dictionary.as_ref().map_or(0, |d| d.attach_point);
                (a, 1, index)
            }
        }
    }

    /// All nodes (including outputs) in topological order.
    pub fn nodes(&self) -> Vec<NodeRef> {
        let mut out = Vec::new();
        for layer in 0..self.depth() {
            out.extend((0..self.layer_width(layer)).map(|i| NodeRef::neuron(layer, i)));
            if let Some(d) = &self.dictionary {
                if d.attach_point == layer {
                    out.extend((0..d.feature_count()).map(NodeRef::feature));
                }
            }
        }
        out
    }

    /// Intervenable mediators: every node except the output layer.
    pub fn mediators(&self) -> Vec<NodeRef> {
        let last = self.layers.len();
        self.nodes()
            .into_iter()
            .filter(|n| !matches!(n, NodeRef::Neuron { layer, .. } if *layer == last))
            .collect()
    }

    /// Whether `up` is a structural parent of `down`.
    pub fn is_parent(&self, up: NodeRef, down: NodeRef) -> bool {
        let attach = self.dictionary.as_ref().map(|d| d.attach_point);
        match (up, down) {
            (NodeRef::Neuron { layer: a, .. }, NodeRef::Neuron { layer: b, .. }) => b == a + 1 && attach != Some(a),
            (NodeRef::Neuron { layer, .. }, NodeRef::Feature { .. }) => attach == Some(layer),
            (NodeRef::Feature { .. }, NodeRef::Neuron { layer, .. }) => attach.is_some_and(|a| layer == a + 1),
            (NodeRef::Feature { .. }, NodeRef::Feature { .. }) => false,
        }
    }

    /// Whether `up` can influence `down` at all.
    pub fn is_upstream(&self, up: NodeRef, down: NodeRef) -> bool {
        self.depth_of(up) < self.depth_of(down)
    }

    /// Neurons of layer `l` sit at depth `2l`; features between their
    /// attach layer and the next one.
    fn depth_of(&self, n: NodeRef) -> usize {
        match n {
            NodeRef::Neuron { layer, .. } => 2 * layer,
            NodeRef::Feature { .. } => 2 * self.dictionary.as_ref().map_or(0, |d| d.attach_point) + 1,
        }
    }

    pub fn label(&self, node: NodeRef) -> String {
        let named = match node {
            NodeRef::Neuron { layer: 0, index } => self.input_labels.as_ref().map(|l| l[index].clone()),
            NodeRef::Neuron { layer, index } => self
                .layers
                .get(layer - 1)
                .and_then(|l| l.labels.as_ref())
                .map(|l| l[index].clone()),
            NodeRef::Feature { .. } => None,
        };
        named.unwrap_or_else(|| node.to_string())
    }

    /// Resolve a label or an `L<layer>.<index>` / `F<index>` reference.
    pub fn resolve_node(&self, text: &str) -> Result<NodeRef> {
        if let Ok(node) = text.parse::<NodeRef>() {
            self.check_node(node)?;
            return Ok(node);
        }
        self.nodes()
            .into_iter()
            .find(|&n| self.label(n) == text)
            .ok_or_else(|| Error::UnknownNode(text.to_string()))
    }

    pub fn forward(&self, input: &[f64]) -> Result<ActivationTrace> {
        self.forward_with(input, &Overrides::new())
    }

    /// Forward pass in which each overridden node takes its replacement
    /// value before anything downstream reads it.
    pub fn forward_with(&self, input: &[f64], overrides: &Overrides) -> Result<ActivationTrace> {
        if input.len() != self.input_width {
            return Err(Error::WidthMismatch {
                expected: self.input_width,
                found: input.len(),
            });
        }
        check_finite("input", input)?;
        for (&node, &v) in overrides {
            self.check_node(node)?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("override for {node}")));
            }
        }
        let apply = |layer: usize, values: &mut [f64]| {
            for (&node, &v) in overrides.range(NodeRef::neuron(layer, 0)..=NodeRef::neuron(layer, usize::MAX)) {
                if let NodeRef::Neuron { index, .. } = node {
                    values[index] = v;
                }
            }
        };

        let mut current = input.to_vec();
        apply(0, &mut current);
        let input_vals = current.clone();
        let mut pre_all = Vec::with_capacity(self.layers.len());
        let mut post_all = Vec::with_capacity(self.layers.len());
        let mut feature_pre = None;
        let mut features = None;

        for (l, layer) in self.layers.iter().enumerate() {
            let consumer_input = match &self.dictionary {
                Some(d) if d.attach_point == l => {
                    let fp = d.encode_pre(&current);
                    let mut f: Vec<f64> = fp.iter().map(|&x| Func::Relu.apply(x)).collect();
                    for (&node, &v) in overrides.range(NodeRef::feature(0)..) {
                        if let NodeRef::Feature { index } = node {
                            f[index] = v;
                        }
                    }
                    let recon = d.decode(&f);
                    feature_pre = Some(fp);
                    features = Some(f);
                    recon
                }
                _ => current,
            };
            let pre: Vec<f64> = layer
                .weights
                .iter()
                .zip(&layer.bias)
                .map(|(row, &b)| affine(row, &consumer_input, b))
                .collect();
            let mut post: Vec<f64> = pre.iter().map(|&x| layer.activation.apply(x)).collect();
            apply(l + 1, &mut post);
            pre_all.push(pre);
            current = post.clone();
            post_all.push(post);
        }
        Ok(ActivationTrace {
            input: input_vals,
            pre: pre_all,
            post: post_all,
            feature_pre,
            features,
        })
    }

    /// The vector each layer actually consumed (post-activations of the
    /// previous layer, or the dictionary reconstruction).
    pub(crate) fn consumer_inputs(&self, trace: &ActivationTrace) -> Vec<Vec<f64>> {
        (0..self.layers.len())
            .map(|l| match (&self.dictionary, &trace.features) {
                (Some(d), Some(f)) if d.attach_point == l => d.decode(f),
                _ if l == 0 => trace.input.clone(),
                _ => trace.post[l - 1].clone(),
            })
            .collect()
    }

    /// Reverse-mode derivatives of `metric` at the unmodified trace.
    pub fn backward(&self, example: &Example, metric: &TargetMetric) -> Result<GradientMap> {
        let trace = self.forward(&example.input)?;
        self.backward_from(&trace, &Overrides::new(), metric, example.label)
    }

    /// Reverse-mode derivatives at a trace produced by `forward_with`.
    /// Gradients stop at overridden nodes: their value is not a function
    /// of anything upstream.
    pub fn backward_from(
        &self,
        trace: &ActivationTrace,
        overrides: &Overrides,
        metric: &TargetMetric,
        label: Option<usize>,
    ) -> Result<GradientMap> {
        let seeds = metric.seeds(self, trace, label)?;
        let n_layers = self.layers.len();
        let mut g_input = vec![0.0; self.input_width];
        let mut g_post: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.width()]).collect();
        let mut g_pre: Vec<Vec<f64>> = g_post.clone();
        let mut g_feat = self.dictionary.as_ref().map(|d| vec![0.0; d.feature_count()]);

        for (node, g) in seeds {
            match node {
                NodeRef::Neuron { layer: 0, index } => g_input[index] += g,
                NodeRef::Neuron { layer, index } => g_post[layer - 1][index] += g,
                NodeRef::Feature { index } => g_feat.as_mut().expect("dictionary attached")[index] += g,
            }
        }

        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            for i in 0..layer.width() {
                g_pre[l][i] = if overrides.contains_key(&NodeRef::neuron(l + 1, i)) {
                    0.0
                } else {
                    g_post[l][i] * layer.activation.derivative(trace.pre[l][i], trace.post[l][i])
                };
            }
            let fan_in = layer.fan_in();
            let mut g_in = vec![0.0; fan_in];
            for (row, &gp) in layer.weights.iter().zip(&g_pre[l]) {
                if gp == 0.0 {
                    continue;
                }
                for (gi, &w) in g_in.iter_mut().zip(row) {
                    *gi += w * gp;
                }
            }
            let target: &mut Vec<f64> = if l == 0 { &mut g_input } else { &mut g_post[l - 1] };
            match &self.dictionary {
                Some(d) if d.attach_point == l => {
                    let gf = g_feat.as_mut().expect("dictionary attached");
                    // reconstruction = W_d f + b_d
                    for (i, &gx) in g_in.iter().enumerate() {
                        for (j, g) in gf.iter_mut().enumerate() {
                            *g += d.decoder_weights[i][j] * gx;
                        }
                    }
                    let fpre = trace.feature_pre.as_ref().expect("features traced");
                    for j in 0..d.feature_count() {
                        if overrides.contains_key(&NodeRef::feature(j)) || fpre[j] <= 0.0 {
                            continue;
                        }
                        for (i, t) in target.iter_mut().enumerate() {
                            *t += d.encoder_weights[j][i] * gf[j];
                        }
                    }
                }
                _ => {
                    for (t, g) in target.iter_mut().zip(&g_in) {
                        *t += g;
                    }
                }
            }
        }

        Ok(GradientMap {
            input: g_input,
            post: g_post,
            features: g_feat,
            pre: g_pre,
        })
    }

    /// Argmax of the output layer.
    pub fn predict(&self, input: &[f64]) -> Result<usize> {
        let trace = self.forward(input)?;
        Ok(argmax(trace.output()))
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interventions::Sign;
    use crate::scm::expr::logistic;

    fn out_metric() -> TargetMetric {
        TargetMetric::NodeActivation {
            node: NodeRef::neuron(2, 0),
            sign: Sign::Positive,
        }
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let net = NeuralNetwork::new(
            2,
            vec![Layer::new(
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![0.0, 0.0],
                Activation::Identity,
            )],
        )
        .unwrap();
        let t = net.forward(&[0.3, -2.0]).unwrap();
        assert_eq!(t.output(), &[0.3, -2.0]);
    }

    #[test]
    fn logistic_unit_saturates() {
        let net = NeuralNetwork::new(
            2,
            vec![Layer::new(vec![vec![6.0, 6.0]], vec![-3.0], Activation::Logistic)],
        )
        .unwrap();
        assert_eq!(net.forward(&[1.0, 1.0]).unwrap().output()[0], logistic(9.0));
    }

    #[test]
    fn relu_clamps_negative() {
        let net = NeuralNetwork::new(1, vec![Layer::new(vec![vec![1.0]], vec![-5.0], Activation::Relu)]).unwrap();
        assert_eq!(net.forward(&[2.0]).unwrap().output()[0], 0.0);
    }

    #[test]
    fn width_and_finiteness_errors() {
        let net = NeuralNetwork::new(1, vec![Layer::new(vec![vec![1.0]], vec![0.0], Activation::Relu)]).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(Error::WidthMismatch { expected: 1, found: 2 })
        ));
        assert!(matches!(
            NeuralNetwork::new(1, vec![Layer::new(vec![vec![f64::NAN]], vec![0.0], Activation::Relu)]),
            Err(Error::NonFinite(_))
        ));
        assert!(NeuralNetwork::new(2, vec![Layer::new(vec![vec![1.0]], vec![0.0], Activation::Relu)]).is_err());
    }

    #[test]
    fn linear_chain_gradient_is_downstream_weight() {
        let (w1, w2) = (0.7, -1.3);
        let net = NeuralNetwork::new(
            1,
            vec![
                Layer::new(vec![vec![w1]], vec![0.0], Activation::Identity),
                Layer::new(vec![vec![w2]], vec![0.0], Activation::Identity),
            ],
        )
        .unwrap();
        let g = net.backward(&Example::unlabeled(vec![2.0]), &out_metric()).unwrap();
        assert_eq!(g.get(NodeRef::neuron(1, 0)), w2);
        assert_eq!(g.get(NodeRef::neuron(0, 0)), w1 * w2);
    }

    #[test]
    fn dead_relu_has_zero_gradient() {
        let net = NeuralNetwork::new(
            1,
            vec![
                Layer::new(vec![vec![1.0]], vec![-5.0], Activation::Relu),
                Layer::new(vec![vec![3.0]], vec![0.0], Activation::Identity),
            ],
        )
        .unwrap();
        let g = net.backward(&Example::unlabeled(vec![1.0]), &out_metric()).unwrap();
        assert_eq!(g.get(NodeRef::neuron(0, 0)), 0.0);
        assert_eq!(g.get(NodeRef::neuron(1, 0)), 3.0);
    }

    #[test]
    fn overrides_replace_values_and_stop_gradients() {
        let net = NeuralNetwork::new(
            1,
            vec![
                Layer::new(vec![vec![2.0]], vec![0.0], Activation::Identity),
                Layer::new(vec![vec![3.0]], vec![0.0], Activation::Identity),
            ],
        )
        .unwrap();
        let ov: Overrides = [(NodeRef::neuron(1, 0), 10.0)].into_iter().collect();
        let t = net.forward_with(&[1.0], &ov).unwrap();
        assert_eq!(t.output()[0], 30.0);
        let g = net.backward_from(&t, &ov, &out_metric(), None).unwrap();
        assert_eq!(g.get(NodeRef::neuron(1, 0)), 3.0);
        assert_eq!(g.get(NodeRef::neuron(0, 0)), 0.0);
    }

    #[test]
    fn node_refs_parse_and_print() {
        for s in ["L0.3", "L12.0", "F7"] {
            assert_eq!(s.parse::<NodeRef>().unwrap().to_string(), s);
        }
        assert!("X1".parse::<NodeRef>().is_err());
        assert!("L1".parse::<NodeRef>().is_err());
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let net = NeuralNetwork::random(3, &[(4, Activation::Tanh), (2, Activation::Identity)], 9).unwrap();
        let back = NeuralNetwork::from_json(&net.to_json()).unwrap();
        assert_eq!(net, back);
        let bad = net.to_json().replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(NeuralNetwork::from_json(&bad).is_err());
    }

    #[test]
    fn mediators_exclude_outputs() {
        let net = NeuralNetwork::random(2, &[(3, Activation::Relu), (1, Activation::Identity)], 1).unwrap();
        let m = net.mediators();
        assert_eq!(m.len(), 5);
        assert!(m.iter().all(|n| !matches!(n, NodeRef::Neuron { layer: 2, .. })));
        assert!(net.is_parent(NodeRef::neuron(0, 1), NodeRef::neuron(1, 2)));
        assert!(!net.is_parent(NodeRef::neuron(0, 1), NodeRef::neuron(2, 0)));
        assert!(net.is_upstream(NodeRef::neuron(0, 1), NodeRef::neuron(2, 0)));
    }
}
