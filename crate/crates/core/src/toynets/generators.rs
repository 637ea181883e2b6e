//! Toy networks with causal pathologies planted by construction.

use super::network::{Activation, Example, Layer, NeuralNetwork};
use super::rng::SplitMix64;
use crate::error::Result;

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn build(inputs: &[&str], layers: Vec<Layer>) -> NeuralNetwork {
    NeuralNetwork::new(inputs.len(), layers)
        .and_then(|n| n.with_input_labels(labels(inputs)))
        .expect("generator weights are well formed")
}

/// Two causes feeding one saturating unit:
/// `B = logistic(6·A1 + 6·A2 − 3)`, `y = B`. Canonical context `A1 = A2 = 1`.
///
/// With both causes on, removing either one only slides B down the upper
/// plateau (logistic(9) → logistic(3)); removing both drops it to
/// logistic(−3).
pub fn make_overdetermined_net() -> (NeuralNetwork, Example) {
    let net = build(
        &["A1", "A2"],
        vec![
            Layer::new(vec![vec![6.0, 6.0]], vec![-3.0], Activation::Logistic).labelled(&["B"]),
            Layer::new(vec![vec![1.0]], vec![0.0], Activation::Identity).labelled(&["y"]),
        ],
    );
    (net, Example::unlabeled(vec![1.0, 1.0]))
}

/// Primary cause A1 silences a backup path from A2.
///
/// ```text
/// SH  = relu(A1)          P  = relu(A2)
/// SH2 = relu(SH)          BH = relu(P − SH)
/// y   = SH2 + 0.5·BH
/// ```
///
/// Context `A1 = A2 = 1` gives y = 1 with the backup BH inactive. Ablating
/// A1 wakes the backup, which restores half the output (y = 0.5); ablating
/// A2 alone changes nothing; ablating both gives y = 0. The backup only
/// partly compensates so that a singleton search still finds A1 first.
pub fn make_preemption_net() -> (NeuralNetwork, Example) {
    let net = build(
        &["A1", "A2"],
        vec![
            Layer::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], Activation::Relu).labelled(&["SH", "P"]),
            Layer::new(vec![vec![1.0, 0.0], vec![-1.0, 1.0]], vec![0.0, 0.0], Activation::Relu)
                .labelled(&["SH2", "BH"]),
            Layer::new(vec![vec![1.0, 0.5]], vec![0.0], Activation::Identity).labelled(&["y"]),
        ],
    );
    (net, Example::unlabeled(vec![1.0, 1.0]))
}

/// Differentiable hiker: `B = A`, `P = A`, `H = relu(P − B)`, `y = 1 − H`,
/// i.e. y = ¬A ∨ B on {0,1}. Context `A = 1`.
pub fn make_nontransitive_net() -> (NeuralNetwork, Example) {
    let net = build(
        &["A"],
        vec![
            Layer::new(vec![vec![1.0], vec![1.0]], vec![0.0, 0.0], Activation::Relu).labelled(&["B", "P"]),
            Layer::new(vec![vec![-1.0, 1.0]], vec![0.0], Activation::Relu).labelled(&["H"]),
            Layer::new(vec![vec![-1.0]], vec![1.0], Activation::Identity).labelled(&["y"]),
        ],
    );
    (net, Example::unlabeled(vec![1.0]))
}

/// Two rocks as a network: `h = relu(1 − A1 − A2)`, `y = 1 − h`, so y is
/// A1 ∨ A2 on {0,1}. Context `A1 = A2 = 1`.
pub fn make_rocks_net() -> (NeuralNetwork, Example) {
    let net = build(
        &["A1", "A2"],
        vec![
            Layer::new(vec![vec![-1.0, -1.0]], vec![1.0], Activation::Relu).labelled(&["h"]),
            Layer::new(vec![vec![-1.0]], vec![1.0], Activation::Identity).labelled(&["y"]),
        ],
    );
    (net, Example::unlabeled(vec![1.0, 1.0]))
}

pub const SUCCESSION_DIGITS: usize = 10;
pub const SUCCESSION_LENGTH: usize = 3;

/// Strictly increasing digit triples whose successor is still a digit,
/// one-hot encoded position by position; the label is last digit + 1.
/// The seed only fixes the example order.
pub fn make_succession_task(seed: u64) -> Vec<Example> {
    let mut out = Vec::new();
    let top = SUCCESSION_DIGITS - 1;
    for a in 0..top {
        for b in a + 1..top {
            for c in b + 1..top {
                out.push(succession_example(&[a, b, c]));
            }
        }
    }
    SplitMix64::derived(seed, "succession").shuffle(&mut out);
    out
}

pub fn succession_example(digits: &[usize]) -> Example {
    let mut input = vec![0.0; SUCCESSION_DIGITS * digits.len()];
    for (pos, &d) in digits.iter().enumerate() {
        input[pos * SUCCESSION_DIGITS + d] = 1.0;
    }
    Example::labeled(input, digits[digits.len() - 1] + 1)
}

/// Input labels `p{pos}={digit}` for the succession encoding.
pub fn succession_input_labels() -> Vec<String> {
    (0..SUCCESSION_LENGTH)
        .flat_map(|p| (0..SUCCESSION_DIGITS).map(move |d| format!("p{p}={d}")))
        .collect()
}

/// Untrained 30-32-10 network for the succession task.
pub fn make_succession_net(seed: u64) -> Result<NeuralNetwork> {
    NeuralNetwork::random(
        SUCCESSION_DIGITS * SUCCESSION_LENGTH,
        &[(32, Activation::Relu), (SUCCESSION_DIGITS, Activation::Identity)],
        seed,
    )?
    .with_input_labels(succession_input_labels())
}

pub const GENERATORS: &[&str] = &["overdetermined", "preemption", "nontransitive", "rocks", "succession"];

/// Network generators by CLI name (the succession task is a dataset).
pub fn network_by_name(name: &str) -> Option<(NeuralNetwork, Example)> {
    match name {
        "overdetermined" => Some(make_overdetermined_net()),
        "preemption" => Some(make_preemption_net()),
        "nontransitive" => Some(make_nontransitive_net()),
        "rocks" => Some(make_rocks_net()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::expr::logistic;
    use crate::toynets::{NodeRef, Overrides};

    fn y(net: &NeuralNetwork, x: &[f64], ov: &[(NodeRef, f64)]) -> f64 {
        let ov: Overrides = ov.iter().copied().collect();
        net.forward_with(x, &ov).unwrap().output()[0]
    }

    #[test]
    fn overdetermined_values() {
        let (net, ctx) = make_overdetermined_net();
        assert_eq!(y(&net, &ctx.input, &[]), logistic(9.0));
        assert_eq!(y(&net, &[0.0, 1.0], &[]), logistic(3.0));
        assert_eq!(y(&net, &[1.0, 0.0], &[]), logistic(3.0));
        assert_eq!(y(&net, &[0.0, 0.0], &[]), logistic(-3.0));
    }

    #[test]
    fn preemption_values() {
        let (net, ctx) = make_preemption_net();
        let x = &ctx.input;
        assert_eq!(y(&net, x, &[]), 1.0);
        assert_eq!(y(&net, x, &[(NodeRef::neuron(0, 0), 0.0)]), 0.5);
        assert_eq!(y(&net, x, &[(NodeRef::neuron(0, 1), 0.0)]), 1.0);
        assert_eq!(
            y(&net, x, &[(NodeRef::neuron(0, 0), 0.0), (NodeRef::neuron(0, 1), 0.0)]),
            0.0
        );
        assert_eq!(net.resolve_node("BH").unwrap(), NodeRef::neuron(2, 1));
    }

    #[test]
    fn nontransitive_truth_table() {
        let (net, _) = make_nontransitive_net();
        let b = NodeRef::neuron(1, 0);
        for a in [0.0, 1.0] {
            for bv in [0.0, 1.0] {
                let expected = if a == 0.0 || bv == 1.0 { 1.0 } else { 0.0 };
                assert_eq!(y(&net, &[a], &[(b, bv)]), expected);
            }
        }
    }

    #[test]
    fn rocks_is_or() {
        let (net, _) = make_rocks_net();
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            assert_eq!(y(&net, &[a, b], &[]), if a + b > 0.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn succession_examples() {
        assert_eq!(succession_example(&[1, 2, 3]).label, Some(4));
        assert_eq!(succession_example(&[5, 6, 7]).label, Some(8));
        let a = make_succession_task(7);
        assert_eq!(a.len(), 84);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&make_succession_task(7)).unwrap()
        );
        assert_ne!(a, make_succession_task(8));
        assert!(a
            .iter()
            .all(|e| e.label.unwrap() < 10 && e.input.iter().sum::<f64>() == 3.0));
    }
}
