//! Networks as structural causal models.
//!
//! Variable naming: `x{i}` exogenous inputs, `n0_{i} := x{i}` input
//! neurons, `n{l}_{i}` for layer `l`, `f{j}` for dictionary features.
//! Every equation spells out the forward pass with the same operations in
//! the same order, so evaluation matches `forward` bit for bit.

use super::network::{NeuralNetwork, NodeRef};
use crate::error::Result;
use crate::scm::expr::{BinaryOp, Expr, Func};
use crate::scm::{build_graph, Assignment, CausalGraph, StructuralEquation, Value, Variable};

pub fn input_var(i: usize) -> String {
    format!("x{i}")
}

pub fn node_var(node: NodeRef) -> String {
    match node {
        NodeRef::Neuron { layer, index } => format!("n{layer}_{index}"),
        NodeRef::Feature { index } => format!("f{index}"),
    }
}

/// Inverse of [`node_var`].
pub fn var_node(name: &str) -> Option<NodeRef> {
    if let Some(rest) = name.strip_prefix('n') {
        let (l, i) = rest.split_once('_')?;
        Some(NodeRef::neuron(l.parse().ok()?, i.parse().ok()?))
    } else {
        Some(NodeRef::feature(name.strip_prefix('f')?.parse().ok()?))
    }
}

/// Exogenous assignment for one input vector.
pub fn input_assignment(input: &[f64]) -> Assignment {
    input
        .iter()
        .enumerate()
        .map(|(i, &v)| (input_var(i), Value::Real(v)))
        .collect()
}

fn mul(w: f64, e: Expr) -> Expr {
    Expr::binary(BinaryOp::Mul, Expr::Num(w), e)
}

fn add(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinaryOp::Add, a, b)
}

/// `((w0*e0 + w1*e1) + ...) + b`, matching `network::affine`.
fn affine_expr(row: &[f64], inputs: &[Expr], bias: f64) -> Expr {
    let mut acc = mul(row[0], inputs[0].clone());
    for j in 1..row.len() {
        acc = add(acc, mul(row[j], inputs[j].clone()));
    }
    add(acc, Expr::Num(bias))
}

pub fn compile_to_graph(net: &NeuralNetwork) -> Result<CausalGraph> {
    let mut variables = Vec::new();
    let mut equations = Vec::new();
    for i in 0..net.input_width() {
        variables.push(Variable::real(input_var(i)));
    }
    for i in 0..net.input_width() {
        let name = node_var(NodeRef::neuron(0, i));
        variables.push(Variable::real(&name));
        equations.push(StructuralEquation::new(name, Expr::var(input_var(i))));
    }

    let mut current: Vec<Expr> = (0..net.input_width())
        .map(|i| Expr::var(node_var(NodeRef::neuron(0, i))))
        .collect();
    for (l, layer) in net.layers().iter().enumerate() {
        if let Some(d) = net.dictionary().filter(|d| d.attach_point == l) {
            let centred: Vec<Expr> = current
                .iter()
                .zip(&d.decoder_bias)
                .map(|(e, &b)| Expr::binary(BinaryOp::Sub, e.clone(), Expr::Num(b)))
                .collect();
            let mut feats = Vec::with_capacity(d.feature_count());
            for j in 0..d.feature_count() {
                let name = node_var(NodeRef::feature(j));
                let body = Expr::apply(
                    Func::Relu,
                    affine_expr(&d.encoder_weights[j], &centred, d.encoder_bias[j]),
                );
                variables.push(Variable::real(&name));
                equations.push(StructuralEquation::new(&name, body));
                feats.push(Expr::var(name));
            }
            // consumers read the reconstruction directly
            current = d
                .decoder_weights
                .iter()
                .zip(&d.decoder_bias)
                .map(|(row, &b)| affine_expr(row, &feats, b))
                .collect();
        }
        let mut next = Vec::with_capacity(layer.width());
        for (i, (row, &b)) in layer.weights.iter().zip(&layer.bias).enumerate() {
            let name = node_var(NodeRef::neuron(l + 1, i));
            let pre = affine_expr(row, &current, b);
            let body = match layer.activation.func() {
                Some(f) => Expr::apply(f, pre),
                None => pre,
            };
            variables.push(Variable::real(&name));
            equations.push(StructuralEquation::new(&name, body));
            next.push(Expr::var(name));
        }
        current = next;
    }
    build_graph(variables, equations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::InterventionSpec;
    use crate::toynets::{Activation, FeatureDictionary, Layer};

    fn net221() -> NeuralNetwork {
        NeuralNetwork::new(
            2,
            vec![
                Layer::new(
                    vec![vec![0.5, -1.0], vec![2.0, 0.25]],
                    vec![0.1, -0.2],
                    Activation::Tanh,
                ),
                Layer::new(vec![vec![1.5, -0.75]], vec![0.3], Activation::Identity),
            ],
        )
        .unwrap()
    }

    #[test]
    fn counts_variables() {
        let g = compile_to_graph(&net221()).unwrap();
        assert_eq!(g.exogenous().len(), 2);
        assert_eq!(g.len() - 2, 5);
    }

    #[test]
    fn evaluation_matches_forward() {
        let net = net221();
        let g = compile_to_graph(&net).unwrap();
        let x = [0.7, -1.3];
        let world = g.evaluate(&input_assignment(&x), &InterventionSpec::none()).unwrap();
        let t = net.forward(&x).unwrap();
        assert_eq!(world.get("n2_0").unwrap().as_real(), Some(t.output()[0]));
        assert_eq!(world.get("n1_1").unwrap().as_real(), Some(t.post[0][1]));
    }

    #[test]
    fn dictionary_inserts_feature_variables() {
        let net = net221().with_dictionary(FeatureDictionary::signed_split(1, 2)).unwrap();
        let g = compile_to_graph(&net).unwrap();
        assert_eq!(g.len() - 2, 5 + 4);
        let x = [0.2, 0.9];
        let world = g.evaluate(&input_assignment(&x), &InterventionSpec::none()).unwrap();
        let t = net.forward(&x).unwrap();
        assert_eq!(world.get("n2_0").unwrap().as_real(), Some(t.output()[0]));
        assert_eq!(world.get("f3").unwrap().as_real(), Some(t.features.unwrap()[3]));
    }

    #[test]
    fn names_round_trip() {
        for n in [NodeRef::neuron(0, 3), NodeRef::neuron(2, 11), NodeRef::feature(4)] {
            assert_eq!(var_node(&node_var(n)), Some(n));
        }
        assert_eq!(var_node("x0"), None);
    }
}
