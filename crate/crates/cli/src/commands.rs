use std::fs;
use std::path::Path;

use causalprobe::circuits::{
    circuit_faithfulness, discover_circuit, discover_with_set_search, expand_local_dependencies, export_circuit,
    Admission, Circuit, DiscoveryOptions, ExportFormat, SetSearchOptions, Thresholds,
};
use causalprobe::engine::{
    causal_chain, causal_dependence, default_epsilon, detect_preemption, find_minimal_ablation_sets, AblationProbe,
    Event, GraphProbe, NetworkProbe, SearchMode,
};
use causalprobe::interventions::{effect_sweep, AblationKind, Estimator, TargetMetric};
use causalprobe::scm::{Assignment, CausalGraph, InterventionSpec};
use causalprobe::toynets::{
    make_succession_net, make_succession_task, network_by_name, train, Example, NeuralNetwork, SplitMix64, TrainConfig,
    GENERATORS,
};
use causalprobe::transitivity::{
    check_halpern_conditions, check_sufficient_conditions, find_transitivity_witness, halpern_sweep, ConditionReport,
    TransitivityWitness,
};
use causalprobe::{scenarios, Error};
use log::info;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::load::{self, Model};
use crate::report::{csv, num, table};
use crate::Failure;

/// What a command produced, in every rendering it supports.
pub struct Output {
    pub result: Value,
    pub text: String,
    pub csv: String,
    pub dot: Option<String>,
    pub resolved: Map<String, Value>,
}

impl Output {
    fn new(result: Value, text: String, csv: String) -> Self {
        Output {
            result,
            text,
            csv,
            dot: None,
            resolved: Map::new(),
        }
    }

    fn resolve(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.resolved.insert(key.into(), value.into());
        self
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serialises")
}

pub fn run(cmd: &Command, seed: u64) -> Result<Output, Failure> {
    match cmd {
        Command::Eval(a) => eval(a),
        Command::Depend(a) => depend(a),
        Command::Overdet(a) => overdet(a, seed),
        Command::Preempt(a) => preempt(a, seed),
        Command::Transitivity(a) => transitivity(a),
        Command::Circuit(a) => circuit(a, seed),
        Command::IeCompare(a) => ie_compare(a, seed),
        Command::Gen(a) => gen(a, seed),
        Command::Export(a) => export(a),
    }
}

fn world_rows(graph: &CausalGraph, world: &Assignment, spec: &InterventionSpec) -> Vec<Vec<String>> {
    graph
        .topological_order()
        .into_iter()
        .map(|v| {
            let role = if spec.get(v).is_some() {
                "do"
            } else if graph.is_exogenous(v) {
                "exogenous"
            } else {
                "endogenous"
            };
            vec![
                v.to_string(),
                world.get(v).expect("evaluate is total").to_string(),
                role.to_string(),
            ]
        })
        .collect()
}

fn eval(a: &EvalArgs) -> Result<Output, Failure> {
    let (graph, base) = load::scenario(&a.scenario)?;
    let ctx = load::context(&graph, &base, &a.set)?;
    let spec = load::interventions(&graph, &a.interventions)?;
    let world = graph.evaluate(&ctx, &spec)?;
    let rows = world_rows(&graph, &world, &spec);
    let header = ["variable", "value", "role"];
    Ok(Output::new(
        json!({ "context": ctx, "interventions": spec.pairs(), "world": world }),
        table(&header, &rows),
        csv(&header, &rows),
    ))
}

/// `X=v`, `X>b`, `X<b`, or a bare name meaning its factual value.
fn event(graph: &CausalGraph, factual: &Assignment, text: &str) -> Result<Event, Failure> {
    if text.contains(['=', '>', '<']) {
        return Ok(Event::parse(graph, text)?);
    }
    let name = text.trim();
    graph.variable(name)?;
    Ok(Event::equals(
        name,
        factual.get(name).expect("evaluate is total").clone(),
    ))
}

fn depend(a: &DependArgs) -> Result<Output, Failure> {
    let (graph, base) = load::scenario(&a.scenario)?;
    let ctx = load::context(&graph, &base, &a.set)?;
    let factual = graph.evaluate(&ctx, &InterventionSpec::none())?;
    let cause = event(&graph, &factual, &a.cause)?;
    let effect = event(&graph, &factual, &a.effect)?;
    let alternate = a
        .alternate
        .as_deref()
        .map(|t| load::value(&graph, &cause.variable, t))
        .transpose()?;
    let epsilon = a.epsilon.unwrap_or(0.0);
    let verdict = causal_dependence(&graph, &ctx, &cause, alternate.as_ref(), &effect, epsilon)?;
    let chain = if a.chain {
        Some(causal_chain(&graph, &ctx, &cause, &effect, epsilon)?)
    } else {
        None
    };

    let mut rows = vec![
        vec!["cause".into(), cause.to_string()],
        vec!["effect".into(), effect.to_string()],
        vec!["alternate".into(), verdict.alternate.to_string()],
        vec!["epsilon".into(), num(epsilon)],
        vec!["effect holds factually (i)".into(), verdict.condition_i.to_string()],
        vec![
            "effect fails under do(alternate) (ii)".into(),
            verdict.condition_ii.to_string(),
        ],
        vec!["factual effect".into(), verdict.factual_effect.to_string()],
        vec![
            "counterfactual effect".into(),
            verdict.counterfactual_effect.to_string(),
        ],
        vec!["effect delta".into(), num(verdict.effect_delta)],
        vec!["depends".into(), verdict.holds.to_string()],
    ];
    if let Some(c) = &chain {
        let shown = match c {
            Some(steps) => steps.iter().map(Event::to_string).collect::<Vec<_>>().join(" → "),
            None => "none".into(),
        };
        rows.push(vec!["chain".into(), shown]);
    }
    let mut result = json!({ "cause": cause, "effect": effect, "verdict": verdict });
    if let Some(c) = chain {
        result["chain"] = to_value(&c);
    }
    Ok(Output::new(
        result,
        table(&["field", "value"], &rows),
        csv(&["field", "value"], &rows),
    )
    .resolve("epsilon", epsilon)
    .resolve("alternate", to_value(&verdict.alternate)))
}

fn ablation_kind(arg: AblationArg, dataset: &[Example], seed: u64) -> AblationKind {
    match arg {
        AblationArg::Zero => AblationKind::Zero,
        AblationArg::Mean => AblationKind::Mean {
            reference: dataset.to_vec(),
        },
        AblationArg::Resample => AblationKind::Resample {
            reference: dataset.to_vec(),
            seed: SplitMix64::derived(seed, "resample").next_u64(),
        },
    }
}

/// Build the probe `p` describes and hand it to `f` along with the
/// epsilon to use (defaulted from the factual metric).
fn with_probe<T>(
    p: &ProbeArgs,
    seed: u64,
    resolved: &mut Map<String, Value>,
    f: impl FnOnce(&dyn AblationProbe, f64) -> Result<T, Error>,
) -> Result<T, Failure> {
    let explicit = p.candidates.as_deref().map(load::list);
    match load::model(&p.model)? {
        Model::Scenario(graph, base) => {
            let effect = p
                .effect
                .as_deref()
                .ok_or_else(|| Failure::usage("scenarios need --effect"))?;
            if p.dataset.is_some() {
                return Err(Failure::usage("--dataset applies to networks only"));
            }
            let ctx = load::context(&graph, &base, &p.set)?;
            let candidates = match explicit {
                Some(c) => c,
                None => {
                    let anc = graph.ancestors(effect)?;
                    graph
                        .topological_order()
                        .into_iter()
                        .filter(|v| anc.contains(v))
                        .map(String::from)
                        .collect()
                }
            };
            let probe = GraphProbe::new(&graph, &ctx, &candidates, effect, &[])?;
            let eps = p.epsilon.unwrap_or_else(|| default_epsilon(probe.factual_metric()));
            resolved.insert("candidates".into(), to_value(&candidates));
            resolved.insert("epsilon".into(), eps.into());
            Ok(f(&probe, eps)?)
        }
        Model::Network(net) => {
            if p.effect.is_some() {
                return Err(Failure::usage("networks take --metric, not --effect"));
            }
            let path = p
                .dataset
                .as_deref()
                .ok_or_else(|| Failure::usage("networks need --dataset"))?;
            if !p.set.is_empty() {
                return Err(Failure::usage("--set applies to scenarios only"));
            }
            let data = load::dataset(path)?;
            let metric = TargetMetric::parse(&p.metric, &net)?;
            let nodes = match explicit {
                Some(c) => c.iter().map(|n| net.resolve_node(n)).collect::<Result<Vec<_>, _>>()?,
                None => net.mediators(),
            };
            let kind = ablation_kind(p.ablation, &data, seed);
            let probe = NetworkProbe::new(&net, &data, &nodes, &kind, &metric)?;
            let eps = p.epsilon.unwrap_or_else(|| default_epsilon(probe.factual_metric()));
            resolved.insert("candidates".into(), to_value(&probe.candidates()));
            resolved.insert("metric".into(), metric.to_string().into());
            resolved.insert("epsilon".into(), eps.into());
            Ok(f(&probe, eps)?)
        }
    }
}

fn overdet(a: &OverdetArgs, seed: u64) -> Result<Output, Failure> {
    let mode = if a.greedy {
        SearchMode::Greedy
    } else {
        SearchMode::Exhaustive
    };
    let mut resolved = Map::new();
    let report = with_probe(&a.probe, seed, &mut resolved, |probe, eps| {
        find_minimal_ablation_sets(probe, eps, a.k_max, mode)
    })?;

    let mut text = format!(
        "{} candidate(s), epsilon {}, k_max {}, {} subset(s) evaluated\n\nsingleton effects\n",
        report.candidates.len(),
        num(report.epsilon),
        report.k_max,
        report.subsets_evaluated
    );
    let singles: Vec<Vec<String>> = report
        .singleton_effects
        .iter()
        .map(|e| vec![e.node.clone(), num(e.effect_delta)])
        .collect();
    text.push_str(&table(&["candidate", "effect"], &singles));
    text.push_str("\nminimal sets\n");
    let sets: Vec<Vec<String>> = report
        .minimal_sets
        .iter()
        .map(|s| {
            vec![
                format!("{{{}}}", s.members.join(",")),
                s.members.len().to_string(),
                num(s.effect_delta),
            ]
        })
        .collect();
    if sets.is_empty() {
        text.push_str("(none)\n");
    } else {
        text.push_str(&table(&["set", "size", "effect"], &sets));
    }
    for w in &report.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    let mut out = Output::new(to_value(&report), text, csv(&["set", "size", "effect"], &sets));
    out.resolved = resolved;
    Ok(out)
}

fn preempt(a: &PreemptArgs, seed: u64) -> Result<Output, Failure> {
    let mut resolved = Map::new();
    let report = with_probe(&a.probe, seed, &mut resolved, |probe, eps| {
        detect_preemption(probe, eps, a.rounds)
    })?;

    let mut text = format!("epsilon {}\n\n", num(report.epsilon));
    let rounds: Vec<Vec<String>> = report
        .rounds
        .iter()
        .map(|r| {
            vec![
                r.round.to_string(),
                format!("{{{}}}", r.ablated.join(",")),
                format!("{{{}}}", r.discovered.join(",")),
            ]
        })
        .collect();
    text.push_str(&table(&["round", "ablated", "discovered"], &rounds));
    text.push_str(if report.fixpoint {
        "fixpoint reached\n"
    } else {
        "stopped at the round limit\n"
    });
    let pre: Vec<Vec<String>> = report
        .preempted
        .iter()
        .map(|p| {
            vec![
                p.node.clone(),
                p.round.to_string(),
                num(p.effect_delta),
                num(p.unablated_effect),
            ]
        })
        .collect();
    let header = ["node", "round", "effect", "unablated_effect"];
    text.push_str("\npreempted causes\n");
    if pre.is_empty() {
        text.push_str("(none)\n");
    } else {
        text.push_str(&table(&header, &pre));
    }
    let mut out = Output::new(to_value(&report), text, csv(&header, &pre));
    out.resolved = resolved;
    Ok(out)
}

fn witness_arg(graph: &CausalGraph, a: &TransitivityArgs, text: &str) -> Result<TransitivityWitness, Failure> {
    let parts = load::list(text);
    if parts.len() != 6 {
        return Err(Failure::usage(format!(
            "--witness needs six values a1,a2,b1,b2,c1,c2; got `{text}`"
        )));
    }
    let v = |i: usize, var: &str| load::value(graph, var, &parts[i]);
    Ok(TransitivityWitness {
        a1: v(0, &a.a)?,
        a2: v(1, &a.a)?,
        b1: v(2, &a.b)?,
        b2: v(3, &a.b)?,
        c1: v(4, &a.c)?,
        c2: v(5, &a.c)?,
    })
}

fn witness_text(w: &TransitivityWitness) -> String {
    format!("({},{},{},{},{},{})", w.a1, w.a2, w.b1, w.b2, w.c1, w.c2)
}

fn transitivity(a: &TransitivityArgs) -> Result<Output, Failure> {
    let (graph, _) = load::scenario(&a.scenario)?;
    let (x, y, z) = (a.a.as_str(), a.b.as_str(), a.c.as_str());
    let mut result = Map::new();
    let mut text = String::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut add = |label: &str, r: &ConditionReport, text: &mut String| {
        text.push_str(&format!("{label} conditions\n"));
        text.push_str(&r.table());
        let w = r.witness.as_ref().map(witness_text).unwrap_or_default();
        for c in &r.condition_results {
            rows.push(vec![
                label.to_string(),
                w.clone(),
                c.condition.to_string(),
                c.statement.clone(),
                c.holds.to_string(),
            ]);
        }
    };

    if let Some(wt) = &a.witness {
        let w = witness_arg(&graph, a, wt)?;
        let r = check_halpern_conditions(&graph, x, y, z, &w)?;
        add("halpern", &r, &mut text);
        result.insert("halpern".into(), to_value(&r));
    } else if a.search || !(a.sweep || a.sufficient) {
        match find_transitivity_witness(&graph, x, y, z)? {
            Some(w) => {
                text.push_str(&format!("witness found: {}\n", witness_text(&w)));
                let r = check_halpern_conditions(&graph, x, y, z, &w)?;
                add("halpern", &r, &mut text);
                result.insert("witness".into(), to_value(&w));
                result.insert("halpern".into(), to_value(&r));
            }
            None => {
                text.push_str("no witness satisfies all five conditions\n");
                result.insert("witness".into(), Value::Null);
            }
        }
    }
    if a.sweep {
        let all = halpern_sweep(&graph, x, y, z)?;
        let passing = all
            .iter()
            .filter(|r| r.condition_results.iter().all(|c| c.holds))
            .count();
        text.push_str(&format!(
            "\nsweep: {} candidate witness(es), {passing} passing\n",
            all.len()
        ));
        for r in &all {
            let marks: String = r.holds().iter().map(|&h| if h { '✓' } else { '✗' }).collect();
            text.push_str(&format!(
                "  {}  {marks}\n",
                r.witness.as_ref().map(witness_text).unwrap_or_default()
            ));
        }
        for r in &all {
            add("sweep", r, &mut String::new());
        }
        result.insert("sweep".into(), to_value(&all));
    }
    if a.sufficient {
        let r = check_sufficient_conditions(&graph, x, y, z)?;
        text.push('\n');
        add("sufficient", &r, &mut text);
        result.insert("sufficient".into(), to_value(&r));
    }
    let header = ["check", "witness", "condition", "statement", "holds"];
    Ok(Output::new(Value::Object(result), text, csv(&header, &rows)))
}

fn admission_text(net: &NeuralNetwork, a: &Admission) -> String {
    match a {
        Admission::Threshold => "threshold".into(),
        Admission::LocalExpansion(m) => {
            format!(
                "expansion(anchor {}, effect {})",
                net.label(m.anchor),
                num(m.anchor_effect)
            )
        }
        Admission::SetSearch { set, joint_effect } => {
            let names: Vec<String> = set.iter().map(|&n| net.label(n)).collect();
            format!("set {{{}}} joint {}", names.join(","), num(*joint_effect))
        }
        Admission::Preempted { round, effect } => format!("preempted(round {round}, effect {})", num(*effect)),
    }
}

fn circuit_text(net: &NeuralNetwork, c: &Circuit) -> String {
    let mut text = format!(
        "target {}, method {}, ablation {}, T_N {}, T_E {}{}\n\n",
        c.target,
        c.method,
        c.ablation,
        num(c.thresholds.node),
        num(c.thresholds.edge),
        if c.thresholds.signed { " (signed)" } else { "" }
    );
    let nodes: Vec<Vec<String>> = c
        .nodes
        .iter()
        .map(|n| {
            vec![
                n.node.to_string(),
                n.label.clone(),
                num(n.effect),
                admission_text(net, &n.admission),
            ]
        })
        .collect();
    text.push_str(&format!("{} node(s)\n", nodes.len()));
    if !nodes.is_empty() {
        text.push_str(&table(&["node", "label", "effect", "admission"], &nodes));
    }
    let edges: Vec<Vec<String>> = c
        .edges
        .iter()
        .map(|e| vec![net.label(e.upstream), net.label(e.downstream), num(e.score)])
        .collect();
    text.push_str(&format!("\n{} edge(s)\n", edges.len()));
    if !edges.is_empty() {
        text.push_str(&table(&["upstream", "downstream", "score"], &edges));
    }
    text
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))
}

fn circuit(a: &CircuitArgs, seed: u64) -> Result<Output, Failure> {
    let net = load::network(&a.network)?;
    let data = load::dataset(&a.dataset)?;
    let metric = TargetMetric::parse(&a.metric, &net)?;
    let estimator: Estimator = a.estimator.parse()?;
    let kind = ablation_kind(a.ablation, &data, seed);
    let opts = DiscoveryOptions {
        thresholds: Thresholds {
            node: a.tn,
            edge: a.te,
            signed: a.signed,
        },
        estimator,
        ablation: kind.clone(),
    };
    let mut c = if a.set_search.is_some() || a.preemption_rounds.is_some() {
        let search = SetSearchOptions {
            k_max: a.set_search.unwrap_or(1),
            preemption_rounds: a.preemption_rounds,
        };
        discover_with_set_search(&net, &data, &metric, &opts, &search)?
    } else {
        discover_circuit(&net, &data, &metric, &opts)?
    };
    for anchor in &a.expand {
        let node = net.resolve_node(anchor)?;
        info!("expanding around {anchor}");
        c = expand_local_dependencies(&net, &c, node, &data, &opts)?;
    }
    let faith = match circuit_faithfulness(&net, &c, &data, &metric, &kind) {
        Ok(f) => Some(f),
        Err(Error::MetricUndefined(why)) => {
            info!("faithfulness undefined: {why}");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let mut text = circuit_text(&net, &c);
    text.push_str(&match &faith {
        Some(f) => format!(
            "\nfaithfulness: retention {} (circuit {} / full {})\n",
            num(f.retention),
            num(f.circuit_metric),
            num(f.full_metric)
        ),
        None => "\nfaithfulness: undefined (full metric is zero)\n".into(),
    });
    if let Some(dir) = &a.out_dir {
        ensure_dir(dir)?;
        for (name, fmt) in [
            ("circuit.json", ExportFormat::Json),
            ("circuit.dot", ExportFormat::Dot),
            ("circuit.csv", ExportFormat::Csv),
        ] {
            let path = dir.join(name);
            write_file(&path, &export_circuit(&c, fmt))?;
            text.push_str(&format!("wrote {}\n", path.display()));
        }
    }
    let mut out = Output::new(
        json!({ "circuit": c, "faithfulness": faith }),
        text,
        export_circuit(&c, ExportFormat::Csv),
    )
    .resolve("metric", metric.to_string())
    .resolve("estimator", estimator.to_string())
    .resolve("thresholds", to_value(&opts.thresholds));
    out.dot = Some(export_circuit(&c, ExportFormat::Dot));
    Ok(out)
}

fn ie_compare(a: &IeCompareArgs, seed: u64) -> Result<Output, Failure> {
    let net = load::network(&a.network)?;
    let data = load::dataset(&a.dataset)?;
    let metric = TargetMetric::parse(&a.metric, &net)?;
    let kind = ablation_kind(a.ablation, &data, seed);
    let ig = Estimator::IntegratedGradients { steps: a.ig_steps };
    ig.validate()?;
    let exact = effect_sweep(&net, &data, &kind, &metric, Estimator::Exact)?;
    let linear = effect_sweep(&net, &data, &kind, &metric, Estimator::Linear)?;
    let igt = effect_sweep(&net, &data, &kind, &metric, ig)?;

    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for ((e, l), g) in exact.entries.iter().zip(&linear.entries).zip(&igt.entries) {
        let (dl, dg) = ((l.estimate - e.estimate).abs(), (g.estimate - e.estimate).abs());
        entries.push(json!({
            "node": e.node, "label": e.label, "exact": e.estimate, "linear": l.estimate, "ig": g.estimate,
            "linear_error": dl, "ig_error": dg,
        }));
        rows.push(vec![
            e.node.to_string(),
            e.label.clone(),
            num(e.estimate),
            num(l.estimate),
            num(g.estimate),
            num(dl),
            num(dg),
        ]);
    }
    let header = ["node", "label", "exact", "linear", "ig", "linear_error", "ig_error"];
    let mut text = format!(
        "metric {metric}, ablation {}, {} example(s), ig steps {}\n",
        kind.name(),
        data.len(),
        a.ig_steps
    );
    text.push_str(&table(&header, &rows));
    for w in &exact.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    Ok(Output::new(
        json!({ "metric": metric, "ablation": kind.name(), "ig_convention": igt.convention, "entries": entries }),
        text,
        csv(&header, &rows),
    )
    .resolve("metric", metric.to_string()))
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

const SCENARIOS: [&str; 4] = ["hiker", "rocks", "billiards", "suzy_first"];

fn gen(a: &GenArgs, seed: u64) -> Result<Output, Failure> {
    if a.train && a.name != "succession" {
        return Err(Failure::usage("--train applies to the succession generator only"));
    }
    let mut files: Vec<(String, String)> = Vec::new();
    if let Some((net, ctx)) = network_by_name(&a.name) {
        files.push((format!("{}_net.json", a.name), net.to_json()));
        files.push((format!("{}_ctx.json", a.name), serde_json::to_string_pretty(&[ctx])?));
    } else if a.name == "succession" {
        let data = make_succession_task(seed);
        let mut net = make_succession_net(seed)?;
        if a.train {
            net = train(
                &net,
                &data,
                &TrainConfig {
                    seed,
                    ..TrainConfig::default()
                },
            )?
            .network;
        }
        files.push(("succession_net.json".into(), net.to_json()));
        files.push(("succession_data.json".into(), serde_json::to_string_pretty(&data)?));
    }
    // `rocks` is both a network and a scenario; write both
    if let Some(text) = scenarios::by_name(&a.name) {
        files.push((format!("{}.json", a.name), text.to_string()));
    }
    if files.is_empty() {
        let mut valid: Vec<&str> = GENERATORS.to_vec();
        valid.extend(SCENARIOS.iter().filter(|s| !GENERATORS.contains(s)));
        return Err(Failure::usage(format!(
            "unknown generator `{}`; valid names: {}",
            a.name,
            valid.join(", ")
        )));
    }
    ensure_dir(&a.out_dir)?;
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = a.out_dir.join(name);
        write_file(&path, &with_newline(body))?;
        paths.push(path.display().to_string());
    }
    let text: String = paths.iter().map(|p| format!("wrote {p}\n")).collect();
    let rows: Vec<Vec<String>> = paths.iter().map(|p| vec![p.clone()]).collect();
    Ok(Output::new(json!({ "files": paths }), text, csv(&["file"], &rows)))
}

fn export(a: &ExportArgs) -> Result<Output, Failure> {
    let text = load::read(&a.circuit)?;
    let c = Circuit::from_json(&text).map_err(|e| Failure::from(e).context(a.circuit.display().to_string()))?;
    let dot = export_circuit(&c, ExportFormat::Dot);
    let mut out = Output::new(to_value(&c), dot.clone(), export_circuit(&c, ExportFormat::Csv));
    out.dot = Some(dot);
    Ok(out)
}
