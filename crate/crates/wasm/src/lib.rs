//! Browser bindings for the demo page in `www/`. Every export takes plain
//! numbers or strings and returns a JSON string; the `*_json` functions
//! underneath are ordinary Rust so they can be tested natively.

use causalprobe::circuits::{
    circuit_faithfulness, discover_circuit, discover_with_set_search, expand_local_dependencies, export_circuit,
    DiscoveryOptions, ExportFormat, SetSearchOptions, Thresholds,
};
use causalprobe::interventions::{effect_sweep, joint_effect_exact, AblationKind, Estimator, TargetMetric};
use causalprobe::toynets::{network_by_name, Activation, Example, Layer, NeuralNetwork, NodeRef};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `B = logistic(gain·A1 + gain·A2 + bias)`, `y = B`, context A1 = A2 = 1.
fn saturating_net(gain: f64, bias: f64) -> Result<NeuralNetwork, String> {
    NeuralNetwork::new(
        2,
        vec![
            Layer::new(vec![vec![gain, gain]], vec![bias], Activation::Logistic).labelled(&["B"]),
            Layer::new(vec![vec![1.0]], vec![0.0], Activation::Identity).labelled(&["y"]),
        ],
    )
    .and_then(|n| n.with_input_labels(vec!["A1".into(), "A2".into()]))
    .map_err(err)
}

pub fn saturation_json(gain: f64, bias: f64, tn: f64) -> Result<String, String> {
    let net = saturating_net(gain, bias)?;
    let data = vec![Example::unlabeled(vec![1.0, 1.0])];
    let metric = TargetMetric::output(&net, 0);
    let (a1, a2) = (NodeRef::neuron(0, 0), NodeRef::neuron(0, 1));
    let factual = net.forward(&data[0].input).map_err(err)?.output()[0];
    let joint = joint_effect_exact(&net, &data[0], &[a1, a2], &AblationKind::Zero, &metric).map_err(err)?;
    let single = |est| {
        effect_sweep(&net, &data, &AblationKind::Zero, &metric, est)
            .map(|t| t.get(a1).unwrap_or(f64::NAN))
            .map_err(err)
    };
    let opts = DiscoveryOptions {
        thresholds: Thresholds {
            node: tn,
            ..Thresholds::default()
        },
        ..DiscoveryOptions::default()
    };
    let plain = discover_circuit(&net, &data, &metric, &opts).map_err(err)?;
    let search = SetSearchOptions {
        k_max: 2,
        preemption_rounds: None,
    };
    let with_sets = discover_with_set_search(&net, &data, &metric, &opts, &search).map_err(err)?;
    Ok(json!({
        "factual": factual,
        "single": { "exact": single(Estimator::Exact)?, "linear": single(Estimator::Linear)?,
                    "ig8": single(Estimator::IntegratedGradients { steps: 8 })? },
        "joint": joint,
        "threshold_admits_a1": plain.contains(a1),
        "set_search_admits_a1": with_sets.contains(a1),
    })
    .to_string())
}

/// IG error against the exact effect of A1 for steps 1, 2, 4, … ≤ `max_steps`.
pub fn ig_convergence_json(gain: f64, bias: f64, max_steps: usize) -> Result<String, String> {
    let net = saturating_net(gain, bias)?;
    let data = vec![Example::unlabeled(vec![1.0, 1.0])];
    let metric = TargetMetric::output(&net, 0);
    let a1 = NodeRef::neuron(0, 0);
    let est = |e| {
        effect_sweep(&net, &data, &AblationKind::Zero, &metric, e)
            .map(|t| t.get(a1).unwrap_or(f64::NAN))
            .map_err(err)
    };
    let exact = est(Estimator::Exact)?;
    let mut points = Vec::new();
    let mut steps = 1;
    while steps <= max_steps.clamp(1, 4096) {
        let ig = est(Estimator::IntegratedGradients { steps })?;
        points.push(json!({ "steps": steps, "ig": ig, "error": (ig - exact).abs() }));
        steps *= 2;
    }
    Ok(json!({ "exact": exact, "linear": est(Estimator::Linear)?, "points": points }).to_string())
}

/// Threshold discovery on a named toy net, with optional set search and
/// one expansion anchor (empty string for none).
pub fn discover_json(name: &str, tn: f64, te: f64, set_k: usize, expand: &str) -> Result<String, String> {
    let (net, ctx) = network_by_name(name).ok_or_else(|| format!("unknown network `{name}`"))?;
    let data = vec![ctx];
    let metric = TargetMetric::output(&net, 0);
    let opts = DiscoveryOptions {
        thresholds: Thresholds {
            node: tn,
            edge: te,
            signed: false,
        },
        ..DiscoveryOptions::default()
    };
    let mut c = if set_k >= 2 {
        let search = SetSearchOptions {
            k_max: set_k,
            preemption_rounds: None,
        };
        discover_with_set_search(&net, &data, &metric, &opts, &search).map_err(err)?
    } else {
        discover_circuit(&net, &data, &metric, &opts).map_err(err)?
    };
    if !expand.is_empty() {
        let anchor = net.resolve_node(expand).map_err(err)?;
        c = expand_local_dependencies(&net, &c, anchor, &data, &opts).map_err(err)?;
    }
    let faith = circuit_faithfulness(&net, &c, &data, &metric, &AblationKind::Zero).ok();
    let mediators: Vec<String> = net.mediators().into_iter().map(|n| net.label(n)).collect();
    Ok(json!({
        "circuit": c,
        "dot": export_circuit(&c, ExportFormat::Dot),
        "mediators": mediators,
        "retention": faith.map(|f| f.retention),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn saturation(gain: f64, bias: f64, tn: f64) -> Result<String, JsValue> {
    saturation_json(gain, bias, tn).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ig_convergence(gain: f64, bias: f64, max_steps: usize) -> Result<String, JsValue> {
    ig_convergence_json(gain, bias, max_steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn discover(name: &str, tn: f64, te: f64, set_k: usize, expand: &str) -> Result<String, JsValue> {
    discover_json(name, tn, te, set_k, expand).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn default_saturation_hides_a1_from_thresholds() {
        let v = parse(saturation_json(6.0, -3.0, 0.4).unwrap());
        assert!((v["joint"].as_f64().unwrap() + 0.952451).abs() < 1e-6);
        assert_eq!(v["threshold_admits_a1"], false);
        assert_eq!(v["set_search_admits_a1"], true);
    }

    #[test]
    fn ig_error_shrinks() {
        let v = parse(ig_convergence_json(6.0, -3.0, 64).unwrap());
        let errs: Vec<f64> = v["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["error"].as_f64().unwrap())
            .collect();
        assert_eq!(errs.len(), 7);
        assert!(errs.last().unwrap() < &errs[0]);
    }

    #[test]
    fn discover_with_expansion() {
        let v = parse(discover_json("nontransitive", 0.4, 0.04, 1, "B").unwrap());
        let labels: Vec<&str> = v["circuit"]["nodes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|n| n["label"].as_str().unwrap())
            .collect();
        assert_eq!(labels, ["A", "B"]);
        assert!(discover_json("nosuch", 0.4, 0.04, 1, "").is_err());
    }
}
