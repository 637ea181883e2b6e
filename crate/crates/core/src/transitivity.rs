//! When does counterfactual dependence chain? Halpern's five conditions,
//! the sufficient pair (surjectivity + bottleneck), and path enumeration.
//!
//! An entailment `do(X = x) ⇒ Y = y` is checked interventionally and must
//! hold in every exogenous context that can influence `Y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::scm::{Assignment, CausalGraph, Domain, InterventionSpec, Value};

pub const MAX_PATHS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityWitness {
    pub a1: Value,
    pub a2: Value,
    pub b1: Value,
    pub b2: Value,
    pub c1: Value,
    pub c2: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Transitive,
    NotEstablished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: usize,
    pub statement: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `halpern` (five conditions) or `sufficient` (two).
    pub condition_set: String,
    pub condition_results: Vec<ConditionResult>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<TransitivityWitness>,
}

impl ConditionReport {
    fn new(set: &str, results: Vec<ConditionResult>, witness: Option<TransitivityWitness>) -> Self {
        let verdict = if results.iter().all(|r| r.holds) {
            Verdict::Transitive
        } else {
            Verdict::NotEstablished
        };
        ConditionReport {
            condition_set: set.into(),
            condition_results: results,
            verdict,
            witness,
        }
    }

    pub fn holds(&self) -> Vec<bool> {
        self.condition_results.iter().map(|r| r.holds).collect()
    }

    /// A plain-text table, one row per condition.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for r in &self.condition_results {
            out.push_str(&format!(
                "({}) {:<40} {}\n",
                r.condition,
                r.statement,
                if r.holds { "holds" } else { "fails" }
            ));
        }
        out.push_str(&format!(
            "verdict: {}\n",
            match self.verdict {
                Verdict::Transitive => "transitive",
                Verdict::NotEstablished => "not established",
            }
        ));
        out
    }
}

fn distinct(a: &str, b: &str, c: &str) -> Result<()> {
    if a == b || b == c || a == c {
        Err(Error::invalid(format!("variables must be distinct: {a}, {b}, {c}")))
    } else {
        Ok(())
    }
}

/// Exogenous contexts that can reach `target` and are not all forced.
fn relevant_contexts(graph: &CausalGraph, spec: &InterventionSpec, target: &str) -> Result<Vec<Assignment>> {
    let ancestors = graph.ancestors(target)?;
    let mut names: Vec<&str> = graph
        .exogenous()
        .into_iter()
        .filter(|e| (*e == target || ancestors.contains(e)) && spec.get(e).is_none())
        .collect();
    names.sort_by_key(|n| graph.index_of(n).unwrap_or(usize::MAX));
    graph.contexts_over(&names)
}

/// `do(spec) ⇒ target = value` in every relevant context.
pub fn entails(graph: &CausalGraph, spec: &InterventionSpec, target: &str, value: &Value) -> Result<bool> {
    let dom = &graph.variable(target)?.domain;
    let value = dom.coerce(target, value)?;
    for ctx in relevant_contexts(graph, spec, target)? {
        // unforced exogenous variables outside the relevant set cannot
        // influence the target; pin them to any member
        let full = fill_context(graph, &ctx, spec)?;
        let world = graph.evaluate(&full, spec)?;
        if world.get(target) != Some(&value) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn fill_context(graph: &CausalGraph, ctx: &Assignment, spec: &InterventionSpec) -> Result<Assignment> {
    let mut full = ctx.clone();
    for e in graph.exogenous() {
        if full.get(e).is_none() && spec.get(e).is_none() {
            let dom = &graph.variable(e)?.domain;
            let v = match dom.members() {
                Some(m) => m[0].clone(),
                None => Value::Real(match dom {
                    Domain::Real { lo, hi } => 0.0f64.clamp(*lo, *hi),
                    _ => 0.0,
                }),
            };
            full.insert(e, v);
        }
    }
    Ok(full)
}

fn finite_members(graph: &CausalGraph, name: &str) -> Result<Vec<Value>> {
    graph
        .variable(name)?
        .domain
        .members()
        .ok_or_else(|| Error::NotEnumerable(name.to_string()))
}

fn one(name: &str, v: &Value) -> Result<InterventionSpec> {
    InterventionSpec::none().with(name, v.clone())
}

/// Evaluate the five conditions for a candidate witness.
pub fn check_halpern_conditions(
    graph: &CausalGraph,
    a: &str,
    b: &str,
    c: &str,
    witness: &TransitivityWitness,
) -> Result<ConditionReport> {
    distinct(a, b, c)?;
    let (da, db, dc) = (
        &graph.variable(a)?.domain,
        &graph.variable(b)?.domain,
        &graph.variable(c)?.domain,
    );
    let w = TransitivityWitness {
        a1: da.coerce(a, &witness.a1)?,
        a2: da.coerce(a, &witness.a2)?,
        b1: db.coerce(b, &witness.b1)?,
        b2: db.coerce(b, &witness.b2)?,
        c1: dc.coerce(c, &witness.c1)?,
        c2: dc.coerce(c, &witness.c2)?,
    };
    let r1 = entails(graph, &one(a, &w.a1)?, b, &w.b1)?;
    let r2 = entails(graph, &one(b, &w.b1)?, c, &w.c1)?;
    let r3 = w.c1 != w.c2;
    let r4 = entails(graph, &one(a, &w.a2)?, b, &w.b2)?;
    let r5 = entails(graph, &one(a, &w.a2)?.with(b, w.b2.clone())?, c, &w.c2)?;
    let results = vec![
        cond(1, format!("do({a}={}) ⇒ {b}={}", w.a1, w.b1), r1),
        cond(2, format!("do({b}={}) ⇒ {c}={}", w.b1, w.c1), r2),
        cond(3, format!("{c}: {} ≠ {}", w.c1, w.c2), r3),
        cond(4, format!("do({a}={}) ⇒ {b}={}", w.a2, w.b2), r4),
        cond(5, format!("do({a}={}, {b}={}) ⇒ {c}={}", w.a2, w.b2, w.c2), r5),
    ];
    Ok(ConditionReport::new("halpern", results, Some(w)))
}

fn cond(condition: usize, statement: String, holds: bool) -> ConditionResult {
    ConditionResult {
        condition,
        statement,
        holds,
    }
}

/// Every (a1, a2, b1, b2, c1, c2) tuple over the finite domains, in
/// lexicographic order with each domain in canonical order.
pub fn witness_candidates(graph: &CausalGraph, a: &str, b: &str, c: &str) -> Result<Vec<TransitivityWitness>> {
    distinct(a, b, c)?;
    let (ma, mb, mc) = (
        finite_members(graph, a)?,
        finite_members(graph, b)?,
        finite_members(graph, c)?,
    );
    let mut out = Vec::new();
    for a1 in &ma {
        for a2 in &ma {
            for b1 in &mb {
                for b2 in &mb {
                    for c1 in &mc {
                        for c2 in &mc {
                            out.push(TransitivityWitness {
                                a1: a1.clone(),
                                a2: a2.clone(),
                                b1: b1.clone(),
                                b2: b2.clone(),
                                c1: c1.clone(),
                                c2: c2.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Condition reports for every candidate witness.
pub fn halpern_sweep(graph: &CausalGraph, a: &str, b: &str, c: &str) -> Result<Vec<ConditionReport>> {
    let cands = witness_candidates(graph, a, b, c)?;
    par::try_map(&cands, |w| check_halpern_conditions(graph, a, b, c, w))
}

/// The lexicographically first witness satisfying all five conditions.
pub fn find_transitivity_witness(
    graph: &CausalGraph,
    a: &str,
    b: &str,
    c: &str,
) -> Result<Option<TransitivityWitness>> {
    let cands = witness_candidates(graph, a, b, c)?;
    let ma = finite_members(graph, a)?;
    // partition by a1; the first partition with a witness wins
    let per_a1 = cands.len() / ma.len();
    let parts: Vec<&[TransitivityWitness]> = cands.chunks(per_a1.max(1)).collect();
    let found = par::try_map(&parts, |part| {
        for w in part.iter() {
            if check_halpern_conditions(graph, a, b, c, w)?.verdict == Verdict::Transitive {
                return Ok(Some(w.clone()));
            }
        }
        Ok(None)
    })?;
    Ok(found.into_iter().flatten().next())
}

/// Surjectivity of `A` onto `B` plus `B` being a causal bottleneck.
pub fn check_sufficient_conditions(graph: &CausalGraph, a: &str, b: &str, c: &str) -> Result<ConditionReport> {
    distinct(a, b, c)?;
    let mb = finite_members(graph, b)?;
    let ma = finite_members(graph, a)?;
    let mut surjective = true;
    for bv in &mb {
        let mut hit = false;
        for av in &ma {
            if entails(graph, &one(a, av)?, b, bv)? {
                hit = true;
                break;
            }
        }
        if !hit {
            surjective = false;
            break;
        }
    }
    let bottleneck = is_causal_bottleneck(graph, b, a, c)?;
    let results = vec![
        cond(1, format!("every value of {b} is reachable by do({a}=·)"), surjective),
        cond(2, format!("{b} lies on every path {a} → {c}"), bottleneck),
    ];
    Ok(ConditionReport::new("sufficient", results, None))
}

/// All simple directed paths from `from` to `to`, lexicographic by node
/// name sequence. Fails once more than [`MAX_PATHS`] paths exist.
pub fn enumerate_paths(graph: &CausalGraph, from: &str, to: &str) -> Result<Vec<Vec<String>>> {
    if from == to {
        return Err(Error::invalid("path endpoints must differ"));
    }
    let s = graph.index_of(from)?;
    let t = graph.index_of(to)?;
    let n = graph.len();
    let names: Vec<&str> = graph.variables().iter().map(|v| v.name.as_str()).collect();
    let children: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut c = graph.child_indices(i).to_vec();
            c.sort_by_key(|&k| names[k]);
            c
        })
        .collect();
    // nodes from which `to` is reachable
    let mut reaches = vec![false; n];
    reaches[t] = true;
    for &i in graph.topological_order().iter().rev() {
        let i = graph.index_of(i)?;
        if children[i].iter().any(|&c| reaches[c]) {
            reaches[i] = true;
        }
    }
    let mut out = Vec::new();
    if !reaches[s] {
        return Ok(out);
    }
    let mut path = vec![s];
    let mut stack: Vec<usize> = vec![0];
    while let Some(&pos) = stack.last() {
        let cur = *path.last().expect("path tracks stack");
        if cur == t {
            out.push(path.iter().map(|&i| names[i].to_string()).collect());
            if out.len() as u64 > MAX_PATHS {
                return Err(Error::CapExceeded {
                    what: format!("path count from {from} to {to}"),
                    limit: MAX_PATHS,
                });
            }
            path.pop();
            stack.pop();
            continue;
        }
        match children[cur][pos..].iter().position(|&c| reaches[c]) {
            Some(off) => {
                let next = children[cur][pos + off];
                *stack.last_mut().expect("non-empty") = pos + off + 1;
                path.push(next);
                stack.push(0);
            }
            None => {
                path.pop();
                stack.pop();
            }
        }
    }
    Ok(out)
}

/// `B` lies on every directed path from `A` to `C`, and one exists.
pub fn is_causal_bottleneck(graph: &CausalGraph, b: &str, a: &str, c: &str) -> Result<bool> {
    distinct(a, b, c)?;
    Ok(graph.reachable(a, c, None)? && !graph.reachable(a, c, Some(b))?)
}
