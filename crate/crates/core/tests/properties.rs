mod common;

use std::collections::BTreeSet;

use causalprobe::circuits::{discover_circuit, DiscoveryOptions, Thresholds};
use causalprobe::interventions::TargetMetric;
use causalprobe::scm::expr::{BinaryOp, Expr, Func, UnaryOp};
use causalprobe::scm::{build_graph, parse_equation, parse_expr, Variable};
use causalprobe::toynets::{compile_to_graph, encode_features, input_assignment, node_var, FeatureDictionary, NodeRef};
use causalprobe::Error;
use proptest::prelude::*;

fn arb_name() -> impl Strategy<Value = Expr> {
    "[a-z][a-z0-9_]{0,4}"
        .prop_filter("keywords", |s| {
            !matches!(
                s.as_str(),
                "and" | "or" | "not" | "true" | "false" | "ite" | "min" | "max" | "relu" | "logistic" | "tanh" | "abs"
            )
        })
        .prop_map(Expr::Var)
}

fn bin(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary(op, Box::new(a), Box::new(b))
}

/// Well-typed expressions: `(real, boolean)` strategies built together.
fn typed(depth: u32) -> (BoxedStrategy<Expr>, BoxedStrategy<Expr>) {
    let real_leaf = prop_oneof![(0.0f64..1e6).prop_map(Expr::Num), arb_name()].boxed();
    let bool_leaf = prop_oneof![any::<bool>().prop_map(Expr::Bool), arb_name()].boxed();
    if depth == 0 {
        return (real_leaf, bool_leaf);
    }
    let (r, b) = typed(depth - 1);
    let arith = prop::sample::select(vec![
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Min,
        BinaryOp::Max,
    ]);
    let cmp = prop::sample::select(vec![
        BinaryOp::Eq,
        BinaryOp::Ne,
        BinaryOp::Lt,
        BinaryOp::Le,
        BinaryOp::Gt,
        BinaryOp::Ge,
    ]);
    let funcs = prop::sample::select(vec![Func::Relu, Func::Logistic, Func::Tanh, Func::Abs]);
    let real = prop_oneof![
        real_leaf,
        r.clone().prop_map(|e| Expr::Unary(UnaryOp::Neg, Box::new(e))),
        (arith, r.clone(), r.clone()).prop_map(|(op, x, y)| bin(op, x, y)),
        (funcs, r.clone()).prop_map(|(f, e)| Expr::Apply(f, Box::new(e))),
        (b.clone(), r.clone(), r.clone()).prop_map(|(c, x, y)| Expr::Ite(Box::new(c), Box::new(x), Box::new(y))),
    ]
    .boxed();
    let logic = prop::sample::select(vec![BinaryOp::And, BinaryOp::Or]);
    let boolean = prop_oneof![
        bool_leaf,
        b.clone().prop_map(|e| Expr::Unary(UnaryOp::Not, Box::new(e))),
        (logic, b.clone(), b).prop_map(|(op, x, y)| bin(op, x, y)),
        (cmp, r.clone(), r).prop_map(|(op, x, y)| bin(op, x, y)),
    ]
    .boxed();
    (real, boolean)
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let (r, b) = typed(3);
    prop_oneof![r, b]
}

fn has_cycle(n: usize, edges: &BTreeSet<(usize, usize)>) -> bool {
    // Kahn: a cycle exists iff some vertex never reaches in-degree zero.
    let mut indeg = vec![0; n];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &(a, b) in edges {
            if a == v {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    seen < n
}

proptest! {
    #[test]
    fn expressions_round_trip(e in arb_expr()) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn cycles_are_rejected_and_acyclic_graphs_ordered(
        n in 2usize..7,
        raw in prop::collection::btree_set((0usize..7, 0usize..7), 0..14),
    ) {
        let edges: BTreeSet<(usize, usize)> = raw.into_iter().filter(|&(a, b)| a < n && b < n && a != b).collect();
        let vars: Vec<Variable> = (0..n).map(|i| Variable::boolean(format!("X{i}"))).collect();
        let eqs: Vec<_> = (0..n)
            .filter_map(|b| {
                let ps: Vec<String> = edges.iter().filter(|e| e.1 == b).map(|e| format!("X{}", e.0)).collect();
                (!ps.is_empty()).then(|| parse_equation(&format!("X{b}"), &ps.join(" or ")).unwrap())
            })
            .collect();
        match build_graph(vars, eqs) {
            Err(Error::Cycle(members)) => {
                prop_assert!(has_cycle(n, &edges));
                prop_assert_eq!(members.first(), members.last());
            }
            Ok(g) => {
                prop_assert!(!has_cycle(n, &edges));
                let order = g.topological_order();
                let pos = |i: usize| order.iter().position(|v| *v == format!("X{i}")).unwrap();
                for &(a, b) in &edges {
                    prop_assert!(pos(a) < pos(b));
                }
            }
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }

    #[test]
    fn features_are_nonnegative(
        width in 1usize..6,
        features in 1usize..10,
        seed in any::<u64>(),
        input in prop::collection::vec(-50.0f64..50.0, 6),
    ) {
        let mut rng = causalprobe::toynets::SplitMix64::new(seed);
        let mut mat = |r: usize, c: usize| -> Vec<Vec<f64>> {
            (0..r).map(|_| (0..c).map(|_| rng.uniform(-3.0, 3.0)).collect()).collect()
        };
        let enc = mat(features, width);
        let dec = mat(width, features);
        let eb = mat(1, features).remove(0);
        let db = mat(1, width).remove(0);
        let d = FeatureDictionary::new(1, enc, eb, db, dec).unwrap();
        let f = encode_features(&d, &input[..width]).unwrap();
        prop_assert!(f.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn compiled_graph_matches_forward(seed in any::<u64>()) {
        let net = common::random_net(seed, 4);
        let g = compile_to_graph(&net).unwrap();
        for ex in common::random_inputs(seed, net.input_width(), 3) {
            let t = net.forward(&ex.input).unwrap();
            let w = g.evaluate(&input_assignment(&ex.input), &Default::default()).unwrap();
            for (j, &y) in t.output().iter().enumerate() {
                let node = NodeRef::neuron(net.depth() - 1, j);
                prop_assert_eq!(w.get(&node_var(node)).unwrap().as_real().unwrap().to_bits(), y.to_bits());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn raising_thresholds_never_grows_the_circuit(
        seed in any::<u64>(),
        t_lo in 0.0f64..0.15,
        dt in 0.0f64..0.3,
        e_lo in 0.0f64..0.05,
        de in 0.0f64..0.1,
    ) {
        let net = common::random_net(seed, 3);
        let data = common::random_inputs(seed, net.input_width(), 4);
        let metric = TargetMetric::output(&net, 0);
        let at = |node: f64, edge: f64| {
            let opts = DiscoveryOptions { thresholds: Thresholds { node, edge, signed: false }, ..Default::default() };
            discover_circuit(&net, &data, &metric, &opts).unwrap()
        };
        let lo = at(t_lo, e_lo);
        let hi_node = at(t_lo + dt, e_lo);
        let hi_edge = at(t_lo, e_lo + de);
        for n in hi_node.node_refs() {
            prop_assert!(lo.contains(n));
        }
        prop_assert_eq!(hi_edge.node_refs(), lo.node_refs());
        for e in &hi_edge.edges {
            prop_assert!(lo.has_edge(e.upstream, e.downstream));
        }
        for c in [&lo, &hi_node, &hi_edge] {
            for e in &c.edges {
                prop_assert!(c.contains(e.upstream) && c.contains(e.downstream));
                prop_assert!(net.rank(e.upstream) < net.rank(e.downstream));
                prop_assert!(e.score.abs() > c.thresholds.edge);
            }
            for n in &c.nodes {
                prop_assert!(n.effect.abs() > c.thresholds.node);
            }
        }
    }
}
