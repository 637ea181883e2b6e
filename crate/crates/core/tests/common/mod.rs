#![allow(dead_code)]

pub mod criteria;

use causalprobe::scm::{build_graph, parse_equation, Assignment, CausalGraph, InterventionSpec, Value, Variable};
use causalprobe::toynets::{Activation, Example, NeuralNetwork, SplitMix64};

pub struct RandomScm {
    pub graph: CausalGraph,
    pub context: Assignment,
    pub candidates: Vec<String>,
    pub effect: String,
}

/// Random boolean/count SCM: 2–3 exogenous booleans, then endogenous
/// variables each reading up to three earlier ones. The last variable is
/// the effect; every other endogenous variable is a candidate.
pub fn random_scm(seed: u64, max_candidates: usize) -> RandomScm {
    let mut rng = SplitMix64::new(seed);
    let n_exo = 2 + rng.below(2);
    let n_endo = 2 + rng.below(max_candidates);
    let mut vars = Vec::new();
    let mut eqs = Vec::new();
    let mut names: Vec<(String, bool)> = Vec::new();
    let mut context = Assignment::new();
    for i in 0..n_exo {
        let name = format!("U{i}");
        vars.push(Variable::boolean(&name));
        context.insert(name.clone(), Value::Bool(rng.below(2) == 1));
        names.push((name, true));
    }
    for i in 0..n_endo {
        let name = format!("V{i}");
        let k = 1 + rng.below(3.min(names.len()));
        let mut picks: Vec<&(String, bool)> = Vec::new();
        while picks.len() < k {
            let p = &names[rng.below(names.len())];
            if !picks.iter().any(|q| q.0 == p.0) {
                picks.push(p);
            }
        }
        let bools: Vec<&str> = picks.iter().filter(|p| p.1).map(|p| p.0.as_str()).collect();
        let is_count = rng.below(4) == 0;
        let body = if is_count {
            picks.iter().map(|p| p.0.as_str()).collect::<Vec<_>>().join(" + ")
        } else if bools.is_empty() {
            format!("{} > 0.5", picks[0].0)
        } else {
            let lits: Vec<String> = bools
                .iter()
                .map(|b| {
                    if rng.below(3) == 0 {
                        format!("not {b}")
                    } else {
                        b.to_string()
                    }
                })
                .collect();
            let op = if rng.below(2) == 0 { " and " } else { " or " };
            lits.join(op)
        };
        vars.push(if is_count {
            Variable::real(&name)
        } else {
            Variable::boolean(&name)
        });
        eqs.push(parse_equation(&name, &body).expect("generated equation parses"));
        names.push((name, !is_count));
    }
    let graph = build_graph(vars, eqs).expect("generated graph is acyclic");
    let effect = format!("V{}", n_endo - 1);
    let candidates = (0..n_endo - 1).map(|i| format!("V{i}")).collect();
    RandomScm {
        graph,
        context,
        candidates,
        effect,
    }
}

fn as_num(v: &Value) -> f64 {
    match v {
        Value::Bool(b) => f64::from(u8::from(*b)),
        Value::Real(x) => *x,
        Value::Label(_) => panic!("no labels in random SCMs"),
    }
}

/// Brute force over every subset up to `k_max`: keep those whose joint
/// "had not occurred" intervention moves the effect by more than
/// `epsilon` and that have no qualifying proper subset.
pub fn naive_minimal_sets(scm: &RandomScm, epsilon: f64, k_max: usize) -> Vec<Vec<String>> {
    let g = &scm.graph;
    let world = g.evaluate(&scm.context, &InterventionSpec::none()).unwrap();
    let base = as_num(world.get(&scm.effect).unwrap());
    let n = scm.candidates.len();
    let mut qualifying: Vec<u32> = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > k_max {
            continue;
        }
        let mut spec = InterventionSpec::none();
        for (i, c) in scm.candidates.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let alt = match world.get(c).unwrap() {
                    Value::Bool(b) => Value::Bool(!b),
                    _ => Value::Real(0.0),
                };
                spec = spec.with(c.clone(), alt).unwrap();
            }
        }
        let w = g.evaluate(&scm.context, &spec).unwrap();
        if (as_num(w.get(&scm.effect).unwrap()) - base).abs() > epsilon {
            qualifying.push(mask);
        }
    }
    let mut minimal: Vec<Vec<String>> = qualifying
        .iter()
        .filter(|&&m| !qualifying.iter().any(|&o| o != m && o & m == o))
        .map(|&m| {
            (0..n)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| scm.candidates[i].clone())
                .collect()
        })
        .collect();
    minimal.sort();
    minimal
}

pub const ACTIVATIONS: [Activation; 4] = [
    Activation::Identity,
    Activation::Relu,
    Activation::Logistic,
    Activation::Tanh,
];

/// Random net with widths ≤ 8 and 1–`max_depth` layers.
pub fn random_net(seed: u64, max_depth: usize) -> NeuralNetwork {
    let mut rng = SplitMix64::derived(seed, "shape");
    let input = 1 + rng.below(8);
    let depth = 1 + rng.below(max_depth);
    let spec: Vec<(usize, Activation)> = (0..depth)
        .map(|_| (1 + rng.below(8), ACTIVATIONS[rng.below(4)]))
        .collect();
    NeuralNetwork::random(input, &spec, seed).unwrap()
}

pub fn random_inputs(seed: u64, width: usize, count: usize) -> Vec<Example> {
    let mut rng = SplitMix64::derived(seed, "inputs");
    (0..count)
        .map(|_| Example::unlabeled((0..width).map(|_| rng.uniform(-2.0, 2.0)).collect()))
        .collect()
}

/// Largest relative error between reverse-mode derivatives and central
/// differences, over the inputs and every hidden neuron. `None` when some
/// relu pre-activation sits within 1e-4 of its kink.
pub fn gradient_rel_error(seed: u64) -> Option<f64> {
    use causalprobe::interventions::{Target, TargetMetric};
    use causalprobe::toynets::{NodeRef, Overrides};

    let net = random_net(seed, 4);
    let mut ex = random_inputs(seed, net.input_width(), 1).remove(0);
    ex.label = Some(0);
    let trace = net.forward(&ex.input).unwrap();
    let near_kink = net
        .layers()
        .iter()
        .zip(&trace.pre)
        .any(|(l, pre)| l.activation == Activation::Relu && pre.iter().any(|p| p.abs() < 1e-4));
    if near_kink {
        return None;
    }
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let metrics = [
        TargetMetric::output(&net, 0),
        TargetMetric::NegativeLogProbability {
            target: Target::Index(0),
        },
    ];
    for metric in &metrics {
        let grads = net.backward(&ex, metric).unwrap();
        let value = |ov: &Overrides| {
            let t = net.forward_with(&ex.input, ov).unwrap();
            metric.value(&net, &t, ex.label).unwrap()
        };
        for layer in 0..net.depth() - 1 {
            for i in 0..net.layer_width(layer) {
                let node = NodeRef::neuron(layer, i);
                let a = trace.value(node);
                let up = value(&[(node, a + h)].into_iter().collect());
                let down = value(&[(node, a - h)].into_iter().collect());
                let fd = (up - down) / (2.0 * h);
                let g = grads.get(node);
                worst = worst.max((g - fd).abs() / g.abs().max(fd.abs()).max(1e-4));
            }
        }
    }
    Some(worst)
}
