//! Lewis-style counterfactual dependence, causal chains, and the search for
//! overdetermined and preempted causes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interventions::{AblationKind, Replacement, TargetMetric};
use crate::par;
use crate::scm::{Assignment, CausalGraph, Domain, InterventionSpec, Value};
use crate::toynets::{Example, NeuralNetwork, NodeRef, Overrides};
use crate::transitivity::enumerate_paths;

/// Tolerance for comparing real values.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// Upper bound on subsets an exhaustive search may evaluate.
pub const MAX_SUBSETS: u64 = 1 << 20;

/// Default epsilon: a tenth of the factual metric's magnitude.
pub fn default_epsilon(factual: f64) -> f64 {
    0.1 * factual.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Equals(Value),
    Above(f64),
    Below(f64),
}

/// A variable taking a value (or crossing a bound).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub variable: String,
    #[serde(flatten)]
    pub condition: Condition,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.condition {
            Condition::Equals(v) => write!(f, "{}={v}", self.variable),
            Condition::Above(b) => write!(f, "{}>{b}", self.variable),
            Condition::Below(b) => write!(f, "{}<{b}", self.variable),
        }
    }
}

impl Event {
    pub fn equals(variable: impl Into<String>, value: Value) -> Self {
        Event {
            variable: variable.into(),
            condition: Condition::Equals(value),
        }
    }

    /// Parse `X=v`, `X>b` or `X<b` against the graph's domains.
    pub fn parse(graph: &CausalGraph, text: &str) -> Result<Self> {
        let (var, cond) = if let Some((v, rhs)) = text.split_once('=') {
            let dom = &graph.variable(v.trim())?.domain;
            (v, Condition::Equals(dom.parse_value(v.trim(), rhs.trim())?))
        } else if let Some((v, rhs)) = text.split_once('>') {
            (v, Condition::Above(parse_bound(rhs)?))
        } else if let Some((v, rhs)) = text.split_once('<') {
            (v, Condition::Below(parse_bound(rhs)?))
        } else {
            // bare name: the variable's factual value is filled in by callers
            return Err(Error::invalid(format!("event `{text}` needs `=`, `>` or `<`")));
        };
        let e = Event {
            variable: var.trim().to_string(),
            condition: cond,
        };
        e.validate(graph)?;
        Ok(e)
    }

    pub fn validate(&self, graph: &CausalGraph) -> Result<()> {
        let var = graph.variable(&self.variable)?;
        match &self.condition {
            Condition::Equals(v) => var.domain.coerce(&self.variable, v).map(|_| ()),
            Condition::Above(b) | Condition::Below(b) if !b.is_finite() => {
                Err(Error::NonFinite(format!("bound of event {self}")))
            }
            _ => Ok(()),
        }
    }

    pub fn holds(&self, graph: &CausalGraph, world: &Assignment) -> Result<bool> {
        let dom = &graph.variable(&self.variable)?.domain;
        let actual = world
            .get(&self.variable)
            .ok_or_else(|| Error::UndeclaredVariable(self.variable.clone()))?;
        Ok(match &self.condition {
            Condition::Equals(v) => same_value(dom, actual, &dom.coerce(&self.variable, v)?),
            Condition::Above(b) => dom.numeric(actual) > *b,
            Condition::Below(b) => dom.numeric(actual) < *b,
        })
    }
}

fn parse_bound(text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad bound `{text}`")))
}

fn same_value(dom: &Domain, a: &Value, b: &Value) -> bool {
    match dom {
        Domain::Real { .. } => (dom.numeric(a) - dom.numeric(b)).abs() <= REAL_TOLERANCE,
        _ => a == b,
    }
}

/// The "had not occurred" value used when none is supplied: negation for
/// booleans, zero for reals; finite sets need an explicit choice.
pub fn default_alternate(graph: &CausalGraph, variable: &str, actual: &Value) -> Result<Value> {
    match (&graph.variable(variable)?.domain, actual) {
        (Domain::Bool, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (Domain::Real { .. }, _) => Ok(Value::Real(0.0)),
        _ => Err(Error::AlternateRequired(variable.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceVerdict {
    pub holds: bool,
    /// The effect occurs in the factual world.
    pub condition_i: bool,
    /// The effect fails (or moves by more than epsilon) under do(cause = alternate).
    pub condition_ii: bool,
    pub effect_delta: f64,
    pub alternate: Value,
    pub factual_effect: Value,
    pub counterfactual_effect: Value,
}

/// Does `effect` causally depend on `cause` in the world fixed by `exogenous`?
pub fn causal_dependence(
    graph: &CausalGraph,
    exogenous: &Assignment,
    cause: &Event,
    alternate: Option<&Value>,
    effect: &Event,
    epsilon: f64,
) -> Result<DependenceVerdict> {
    let factual = graph.evaluate(exogenous, &InterventionSpec::none())?;
    dependence_in(graph, exogenous, &factual, cause, alternate, effect, epsilon)
}

fn dependence_in(
    graph: &CausalGraph,
    exogenous: &Assignment,
    factual: &Assignment,
    cause: &Event,
    alternate: Option<&Value>,
    effect: &Event,
    epsilon: f64,
) -> Result<DependenceVerdict> {
    cause.validate(graph)?;
    effect.validate(graph)?;
    let cause_dom = &graph.variable(&cause.variable)?.domain;
    let Condition::Equals(stated) = &cause.condition else {
        return Err(Error::invalid(format!("cause {cause} must name a value")));
    };
    let actual = factual.get(&cause.variable).expect("evaluate is total").clone();
    if !cause.holds(graph, factual)? {
        return Err(Error::CauseMismatch {
            variable: cause.variable.clone(),
            stated: stated.to_string(),
            actual: actual.to_string(),
        });
    }
    let alt = match alternate {
        Some(v) => cause_dom.coerce(&cause.variable, v)?,
        None => default_alternate(graph, &cause.variable, &actual)?,
    };
    if same_value(cause_dom, &alt, &actual) {
        return Err(Error::AlternateEqualsActual(cause.variable.clone()));
    }
    let spec = InterventionSpec::none().with(cause.variable.clone(), alt.clone())?;
    let cf = graph.evaluate(exogenous, &spec)?;

    let eff_dom = &graph.variable(&effect.variable)?.domain;
    let f_val = factual.get(&effect.variable).expect("evaluate is total").clone();
    let c_val = cf.get(&effect.variable).expect("evaluate is total").clone();
    let effect_delta = eff_dom.numeric(&c_val) - eff_dom.numeric(&f_val);
    let condition_i = effect.holds(graph, factual)?;
    let condition_ii = match (&effect.condition, eff_dom) {
        (Condition::Equals(_), Domain::Real { .. }) => effect_delta.abs() > epsilon,
        _ => !effect.holds(graph, &cf)?,
    };
    Ok(DependenceVerdict {
        holds: condition_i && condition_ii,
        condition_i,
        condition_ii,
        effect_delta,
        alternate: alt,
        factual_effect: f_val,
        counterfactual_effect: c_val,
    })
}

/// Whether any admissible alternate makes `effect` depend on `cause`.
fn step_depends(
    graph: &CausalGraph,
    exogenous: &Assignment,
    factual: &Assignment,
    cause: &Event,
    effect: &Event,
    epsilon: f64,
) -> Result<bool> {
    let dom = &graph.variable(&cause.variable)?.domain;
    let actual = factual.get(&cause.variable).expect("evaluate is total");
    let alternates: Vec<Option<Value>> = match dom {
        Domain::Set(_) => dom
            .members()
            .unwrap_or_default()
            .into_iter()
            .filter(|m| m != actual)
            .map(Some)
            .collect(),
        _ => vec![None],
    };
    for alt in alternates {
        match dependence_in(graph, exogenous, factual, cause, alt.as_ref(), effect, epsilon) {
            Ok(v) if v.holds => return Ok(true),
            Ok(_) | Err(Error::AlternateEqualsActual(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

/// Shortest chain of stepwise dependences from `from` to `to` along graph
/// edges; ties go to the lexicographically smallest path.
pub fn causal_chain(
    graph: &CausalGraph,
    exogenous: &Assignment,
    from: &Event,
    to: &Event,
    epsilon: f64,
) -> Result<Option<Vec<Event>>> {
    if from.variable == to.variable {
        return Err(Error::invalid("chain endpoints must differ"));
    }
    from.validate(graph)?;
    to.validate(graph)?;
    let factual = graph.evaluate(exogenous, &InterventionSpec::none())?;
    if !from.holds(graph, &factual)? {
        let actual = factual.get(&from.variable).expect("evaluate is total");
        return Err(Error::CauseMismatch {
            variable: from.variable.clone(),
            stated: from.to_string(),
            actual: actual.to_string(),
        });
    }
    let mut paths = enumerate_paths(graph, &from.variable, &to.variable)?;
    paths.sort_by_key(Vec::len); // stable: lexicographic within a length
    for path in paths {
        let events: Vec<Event> = path
            .iter()
            .enumerate()
            .map(|(k, name)| {
                if k == 0 {
                    from.clone()
                } else if k + 1 == path.len() {
                    to.clone()
                } else {
                    Event::equals(name.clone(), factual.get(name).expect("evaluate is total").clone())
                }
            })
            .collect();
        let mut ok = true;
        for pair in events.windows(2) {
            if !step_depends(graph, exogenous, &factual, &pair[0], &pair[1], epsilon)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(events));
        }
    }
    Ok(None)
}

/// Something whose components can be ablated jointly while a scalar
/// effect is measured.
pub trait AblationProbe: Sync {
    fn candidates(&self) -> Vec<String>;
    /// Signed change of the effect metric when the candidates at `set`
    /// (indices into [`AblationProbe::candidates`]) are ablated together.
    fn effect(&self, set: &[usize]) -> Result<f64>;
    /// Effect metric in the unablated context.
    fn factual_metric(&self) -> f64;
}

/// Ablation by do-intervention in a structural causal model.
pub struct GraphProbe<'a> {
    graph: &'a CausalGraph,
    context: Assignment,
    candidates: Vec<String>,
    alternates: Vec<Value>,
    effect: String,
    factual: f64,
}

impl<'a> GraphProbe<'a> {
    /// `alternates` overrides the default "had not occurred" value per
    /// candidate.
    pub fn new(
        graph: &'a CausalGraph,
        context: &Assignment,
        candidates: &[String],
        effect: &str,
        alternates: &[(String, Value)],
    ) -> Result<Self> {
        let world = graph.evaluate(context, &InterventionSpec::none())?;
        let eff_dom = &graph.variable(effect)?.domain;
        let mut alts = Vec::with_capacity(candidates.len());
        for c in candidates {
            let dom = &graph.variable(c)?.domain;
            let alt = match alternates.iter().find(|(n, _)| n == c) {
                Some((_, v)) => dom.coerce(c, v)?,
                None => default_alternate(graph, c, world.get(c).expect("evaluate is total"))?,
            };
            alts.push(alt);
        }
        Ok(GraphProbe {
            graph,
            context: context.clone(),
            candidates: candidates.to_vec(),
            alternates: alts,
            effect: effect.to_string(),
            factual: eff_dom.numeric(world.get(effect).expect("evaluate is total")),
        })
    }
}

impl AblationProbe for GraphProbe<'_> {
    fn candidates(&self) -> Vec<String> {
        self.candidates.clone()
    }

    fn effect(&self, set: &[usize]) -> Result<f64> {
        let spec = InterventionSpec::new(
            set.iter()
                .map(|&i| (self.candidates[i].clone(), self.alternates[i].clone())),
        )?;
        let world = self.graph.evaluate(&self.context, &spec)?;
        let dom = &self.graph.variable(&self.effect)?.domain;
        Ok(dom.numeric(world.get(&self.effect).expect("evaluate is total")) - self.factual)
    }

    fn factual_metric(&self) -> f64 {
        self.factual
    }
}

/// Ablation of network nodes, averaged over a dataset.
pub struct NetworkProbe<'a> {
    net: &'a NeuralNetwork,
    dataset: &'a [Example],
    nodes: Vec<NodeRef>,
    replacement: Replacement,
    metric: TargetMetric,
    base: Vec<f64>,
}

impl<'a> NetworkProbe<'a> {
    pub fn new(
        net: &'a NeuralNetwork,
        dataset: &'a [Example],
        nodes: &[NodeRef],
        kind: &AblationKind,
        metric: &TargetMetric,
    ) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::Empty("dataset".into()));
        }
        metric.validate(net)?;
        for &n in nodes {
            net.check_node(n)?;
        }
        let base = dataset
            .iter()
            .enumerate()
            .map(|(i, ex)| {
                net.forward(&ex.input)
                    .and_then(|t| metric.value(net, &t, ex.label))
                    .map_err(|e| e.at_example(i))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NetworkProbe {
            net,
            dataset,
            nodes: nodes.to_vec(),
            replacement: kind.prepare(net)?,
            metric: *metric,
            base,
        })
    }

    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }
}

impl AblationProbe for NetworkProbe<'_> {
    fn candidates(&self) -> Vec<String> {
        self.nodes.iter().map(|&n| self.net.label(n)).collect()
    }

    fn effect(&self, set: &[usize]) -> Result<f64> {
        let members: Vec<NodeRef> = set.iter().map(|&i| self.nodes[i]).collect();
        let ov: Overrides = self.replacement.overrides(&members);
        let mut deltas = Vec::with_capacity(self.dataset.len());
        for (i, ex) in self.dataset.iter().enumerate() {
            let t = self.net.forward_with(&ex.input, &ov).map_err(|e| e.at_example(i))?;
            let v = self.metric.value(self.net, &t, ex.label).map_err(|e| e.at_example(i))?;
            deltas.push(v - self.base[i]);
        }
        Ok(par::pairwise_sum(&deltas) / deltas.len() as f64)
    }

    fn factual_metric(&self) -> f64 {
        par::pairwise_sum(&self.base) / self.base.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEffect {
    pub node: String,
    pub effect_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSet {
    pub members: Vec<String>,
    /// Positions of the members in the candidate list.
    pub indices: Vec<usize>,
    pub effect_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverdeterminationReport {
    pub candidates: Vec<String>,
    pub search_mode: SearchMode,
    pub k_max: usize,
    pub epsilon: f64,
    pub singleton_effects: Vec<NodeEffect>,
    pub minimal_sets: Vec<AblationSet>,
    pub subsets_evaluated: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn binomial(n: u64, k: u64) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// All size-`k` index combinations of `0..n`, lexicographic.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )))
    }
}

/// Search for inclusion-minimal sets of candidates whose joint ablation
/// moves the effect by more than `epsilon`.
pub fn find_minimal_ablation_sets(
    probe: &dyn AblationProbe,
    epsilon: f64,
    k_max: usize,
    mode: SearchMode,
) -> Result<OverdeterminationReport> {
    check_epsilon(epsilon)?;
    let names = probe.candidates();
    let n = names.len();
    if n == 0 {
        return Err(Error::Empty("candidate list".into()));
    }
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let mut warnings = Vec::new();
    let k = if k_max > n {
        let w = format!("k_max {k_max} exceeds {n} candidates; clamped");
        log::warn!("{w}");
        warnings.push(w);
        n
    } else {
        k_max
    };

    let singles: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let single_effects = par::try_map(&singles, |s| probe.effect(s))?;
    let singleton_effects: Vec<NodeEffect> = names
        .iter()
        .zip(&single_effects)
        .map(|(name, &e)| NodeEffect {
            node: name.clone(),
            effect_delta: e,
        })
        .collect();
    let mut evaluated = n as u64;
    let make_set = |idx: Vec<usize>, e: f64| AblationSet {
        members: idx.iter().map(|&i| names[i].clone()).collect(),
        indices: idx,
        effect_delta: e,
    };

    let mut found: Vec<AblationSet> = Vec::new();
    match mode {
        SearchMode::Exhaustive => {
            let total: u128 = (1..=k as u64).map(|s| binomial(n as u64, s)).sum();
            if total > u128::from(MAX_SUBSETS) {
                return Err(Error::CapExceeded {
                    what: format!("exhaustive search over {total} subsets"),
                    limit: MAX_SUBSETS,
                });
            }
            for (i, &e) in single_effects.iter().enumerate() {
                if e.abs() > epsilon {
                    found.push(make_set(vec![i], e));
                }
            }
            for size in 2..=k {
                let todo: Vec<Vec<usize>> = combinations(n, size)
                    .into_iter()
                    .filter(|c| !found.iter().any(|f| is_subset(&f.indices, c)))
                    .collect();
                evaluated += todo.len() as u64;
                let effects = par::try_map(&todo, |c| probe.effect(c))?;
                for (c, e) in todo.into_iter().zip(effects) {
                    if e.abs() > epsilon {
                        found.push(make_set(c, e));
                    }
                }
            }
        }
        SearchMode::Greedy => {
            let mut current: Vec<usize> = Vec::new();
            let mut last = single_effects.clone();
            loop {
                let mut best: Option<(usize, f64)> = None;
                for (i, &e) in last.iter().enumerate() {
                    if current.contains(&i) {
                        continue;
                    }
                    if best.is_none_or(|(_, b)| e.abs() > b.abs()) {
                        best = Some((i, e));
                    }
                }
                let Some((pick, e)) = best else { break };
                current.push(pick);
                if e.abs() > epsilon {
                    current.sort_unstable();
                    found.push(make_set(current, e));
                    break;
                }
                if current.len() >= k {
                    break;
                }
                let trials: Vec<Vec<usize>> = (0..n)
                    .map(|i| {
                        let mut s = current.clone();
                        if !s.contains(&i) {
                            s.push(i);
                        }
                        s.sort_unstable();
                        s
                    })
                    .collect();
                evaluated += (n - current.len()) as u64;
                last = par::try_map(&trials, |s| probe.effect(s))?;
            }
        }
    }

    Ok(OverdeterminationReport {
        candidates: names.clone(),
        search_mode: mode,
        k_max: k,
        epsilon,
        singleton_effects,
        minimal_sets: found,
        subsets_evaluated: evaluated,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreemptionRound {
    pub round: usize,
    pub ablated: Vec<String>,
    pub discovered: Vec<String>,
    /// Marginal effect of each remaining candidate on top of `ablated`.
    pub effects: Vec<NodeEffect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreemptedCause {
    pub node: String,
    pub index: usize,
    pub round: usize,
    pub effect_delta: f64,
    /// Singleton effect recomputed in the unablated context.
    pub unablated_effect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreemptionReport {
    pub epsilon: f64,
    pub rounds: Vec<PreemptionRound>,
    pub fixpoint: bool,
    pub preempted: Vec<PreemptedCause>,
}

impl PreemptionReport {
    pub fn discovered(&self, round: usize) -> Option<&[String]> {
        self.rounds.get(round - 1).map(|r| r.discovered.as_slice())
    }
}

/// Repeated singleton search, permanently ablating everything found in
/// earlier rounds.
pub fn detect_preemption(probe: &dyn AblationProbe, epsilon: f64, max_rounds: usize) -> Result<PreemptionReport> {
    check_epsilon(epsilon)?;
    if max_rounds == 0 {
        return Err(Error::invalid("max_rounds must be at least 1"));
    }
    let names = probe.candidates();
    let mut ablated: Vec<usize> = Vec::new();
    let mut rounds = Vec::new();
    let mut preempted = Vec::new();
    let mut fixpoint = false;
    for round in 1..=max_rounds {
        let base = if ablated.is_empty() {
            0.0
        } else {
            probe.effect(&ablated)?
        };
        let remaining: Vec<usize> = (0..names.len()).filter(|i| !ablated.contains(i)).collect();
        let sets: Vec<Vec<usize>> = remaining
            .iter()
            .map(|&i| {
                let mut s = ablated.clone();
                s.push(i);
                s.sort_unstable();
                s
            })
            .collect();
        let totals = par::try_map(&sets, |s| probe.effect(s))?;
        let mut effects = Vec::new();
        let mut new = Vec::new();
        for (&i, t) in remaining.iter().zip(totals) {
            let e = t - base;
            effects.push(NodeEffect {
                node: names[i].clone(),
                effect_delta: e,
            });
            if e.abs() > epsilon {
                new.push((i, e));
            }
        }
        rounds.push(PreemptionRound {
            round,
            ablated: ablated.iter().map(|&i| names[i].clone()).collect(),
            discovered: new.iter().map(|&(i, _)| names[i].clone()).collect(),
            effects,
        });
        if new.is_empty() {
            fixpoint = true;
            break;
        }
        if round > 1 {
            for &(i, e) in &new {
                preempted.push(PreemptedCause {
                    node: names[i].clone(),
                    index: i,
                    round,
                    effect_delta: e,
                    unablated_effect: probe.effect(&[i])?,
                });
            }
        }
        ablated.extend(new.iter().map(|&(i, _)| i));
        ablated.sort_unstable();
    }
    Ok(PreemptionReport {
        epsilon,
        rounds,
        fixpoint,
        preempted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidirectionalResult {
    pub node: NodeRef,
    /// Patch-run activation written into the original run.
    pub noising_delta: f64,
    /// Original-run activation written into the patch run.
    pub denoising_delta: f64,
    pub causal: bool,
}

pub fn bidirectional_test(
    net: &NeuralNetwork,
    original: &Example,
    patch: &Example,
    node: NodeRef,
    metric: &TargetMetric,
    epsilon: f64,
) -> Result<BidirectionalResult> {
    check_epsilon(epsilon)?;
    net.check_node(node)?;
    if original.input.len() != patch.input.len() {
        return Err(Error::WidthMismatch {
            expected: original.input.len(),
            found: patch.input.len(),
        });
    }
    let orig = net.forward(&original.input)?;
    let pat = net.forward(&patch.input)?;
    let m_orig = metric.value(net, &orig, original.label)?;
    let m_pat = metric.value(net, &pat, patch.label)?;
    let noised = net.forward_with(&original.input, &[(node, pat.value(node))].into_iter().collect())?;
    let denoised = net.forward_with(&patch.input, &[(node, orig.value(node))].into_iter().collect())?;
    let noising_delta = metric.value(net, &noised, original.label)? - m_orig;
    let denoising_delta = metric.value(net, &denoised, patch.label)? - m_pat;
    Ok(BidirectionalResult {
        node,
        noising_delta,
        denoising_delta,
        causal: noising_delta.abs() > epsilon || denoising_delta.abs() > epsilon,
    })
}

/// Injected values may reach this multiple of the largest activation
/// magnitude observed in the node's layer.
pub const INJECTION_SAFETY_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveNegativeResult {
    pub node: NodeRef,
    pub ablation_delta: f64,
    pub injection_delta: f64,
    pub inject_value: f64,
    pub sanctioned_bound: f64,
    pub candidate: bool,
}

/// Largest |activation| over the node's layer (or over all features) on
/// the given inputs, times the safety factor.
pub fn sanctioned_bound(net: &NeuralNetwork, node: NodeRef, reference: &[Example]) -> Result<f64> {
    net.check_node(node)?;
    let peers: Vec<NodeRef> = net
        .nodes()
        .into_iter()
        .filter(|&m| match (m, node) {
            (NodeRef::Neuron { layer: a, .. }, NodeRef::Neuron { layer: b, .. }) => a == b,
            (NodeRef::Feature { .. }, NodeRef::Feature { .. }) => true,
            _ => false,
        })
        .collect();
    let mut max = 0.0f64;
    for (i, ex) in reference.iter().enumerate() {
        let t = net.forward(&ex.input).map_err(|e| e.at_example(i))?;
        for &p in &peers {
            max = max.max(t.value(p).abs());
        }
    }
    Ok(INJECTION_SAFETY_FACTOR * max)
}

/// Negative (ablate) and positive (inject) counterfactuals on one node.
/// `reference` sets the sanctioned injection range; the example itself is
/// always included.
#[allow(clippy::too_many_arguments)]
pub fn positive_negative_counterfactual(
    net: &NeuralNetwork,
    example: &Example,
    node: NodeRef,
    inject_value: f64,
    metric: &TargetMetric,
    ablation: &AblationKind,
    reference: &[Example],
    epsilon: f64,
) -> Result<PositiveNegativeResult> {
    check_epsilon(epsilon)?;
    let mut refs = reference.to_vec();
    refs.push(example.clone());
    let bound = sanctioned_bound(net, node, &refs)?;
    if !inject_value.is_finite() || inject_value.abs() > bound {
        return Err(Error::invalid(format!(
            "inject value {inject_value} outside the sanctioned range [-{bound}, {bound}] for {node}"
        )));
    }
    let ablation_delta = crate::interventions::indirect_effect_exact(net, example, node, ablation, metric)?;
    let injection_delta = crate::interventions::indirect_effect_exact(
        net,
        example,
        node,
        &AblationKind::Inject { value: inject_value },
        metric,
    )?;
    Ok(PositiveNegativeResult {
        node,
        ablation_delta,
        injection_delta,
        inject_value,
        sanctioned_bound: bound,
        candidate: ablation_delta.abs() > epsilon || injection_delta.abs() > epsilon,
    })
}
