use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::expr::{parse_expr, Expr, Resolved, Scalar, Type};
use crate::error::{Error, Result};

/// Largest number of exogenous contexts `enumerate_worlds` will produce.
pub const MAX_WORLDS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Bool,
    Set(Vec<String>),
    Real { lo: f64, hi: f64 },
}

impl Domain {
    pub fn unbounded() -> Self {
        Domain::Real {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Domain::Real { .. })
    }

    /// Members of a finite domain in canonical order.
    pub fn members(&self) -> Option<Vec<Value>> {
        match self {
            Domain::Bool => Some(vec![Value::Bool(false), Value::Bool(true)]),
            Domain::Set(labels) => Some(labels.iter().cloned().map(Value::Label).collect()),
            Domain::Real { .. } => None,
        }
    }

    fn expr_type(&self) -> Type {
        match self {
            Domain::Bool => Type::Bool,
            _ => Type::Real,
        }
    }

    /// Check a value against the domain, normalising numeric spellings of
    /// booleans and set indices.
    pub fn coerce(&self, name: &str, value: &Value) -> Result<Value> {
        let bad = || Error::DomainViolation {
            variable: name.to_string(),
            value: value.to_string(),
        };
        match (self, value) {
            (Domain::Bool, Value::Bool(b)) => Ok(Value::Bool(*b)),
            (Domain::Bool, Value::Real(x)) if *x == 0.0 || *x == 1.0 => Ok(Value::Bool(*x == 1.0)),
            (Domain::Set(labels), Value::Label(l)) if labels.contains(l) => Ok(value.clone()),
            (Domain::Set(labels), Value::Real(x)) => {
                let i = *x as usize;
                if x.fract() == 0.0 && *x >= 0.0 && i < labels.len() {
                    Ok(Value::Label(labels[i].clone()))
                } else {
                    Err(bad())
                }
            }
            (Domain::Real { lo, hi }, Value::Real(x)) if x.is_finite() && *x >= *lo && *x <= *hi => Ok(Value::Real(*x)),
            _ => Err(bad()),
        }
    }

    /// Parse a command-line spelling (`1`, `true`, `red`, `0.25`).
    pub fn parse_value(&self, name: &str, text: &str) -> Result<Value> {
        let raw = match self {
            Domain::Bool => match text {
                "1" | "true" => Value::Bool(true),
                "0" | "false" => Value::Bool(false),
                _ => Value::Label(text.to_string()),
            },
            Domain::Set(_) => Value::Label(text.to_string()),
            Domain::Real { .. } => match text.parse::<f64>() {
                Ok(x) => Value::Real(x),
                Err(_) => Value::Label(text.to_string()),
            },
        };
        self.coerce(name, &raw)
    }

    /// Numeric reading of a value: booleans as 0/1, set members by index.
    pub fn numeric(&self, value: &Value) -> f64 {
        self.to_scalar(value).as_real()
    }

    fn to_scalar(&self, value: &Value) -> Scalar {
        match (self, value) {
            (_, Value::Bool(b)) => Scalar::Bool(*b),
            (_, Value::Real(x)) => Scalar::Real(*x),
            (Domain::Set(labels), Value::Label(l)) => {
                Scalar::Real(labels.iter().position(|m| m == l).unwrap_or(0) as f64)
            }
            (_, Value::Label(_)) => Scalar::Real(f64::NAN),
        }
    }

    fn value_of(&self, name: &str, s: Scalar) -> Result<Value> {
        match (self, s) {
            (Domain::Bool, Scalar::Bool(b)) => Ok(Value::Bool(b)),
            (Domain::Bool, Scalar::Real(x)) => self.coerce(name, &Value::Real(x)),
            (_, s) => self.coerce(name, &Value::Real(s.as_real())),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DomainRepr {
    Named(String),
    Set { set: Vec<String> },
    Real { real: [Option<f64>; 2] },
}

impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Domain::Bool => DomainRepr::Named("bool".into()),
            Domain::Set(set) => DomainRepr::Set { set: set.clone() },
            Domain::Real { lo, hi } => DomainRepr::Real {
                real: [Some(*lo).filter(|x| x.is_finite()), Some(*hi).filter(|x| x.is_finite())],
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match DomainRepr::deserialize(d)? {
            DomainRepr::Named(n) if n == "bool" => Ok(Domain::Bool),
            DomainRepr::Named(n) if n == "real" => Ok(Domain::unbounded()),
            DomainRepr::Named(n) => Err(D::Error::custom(format!("unknown domain `{n}`"))),
            DomainRepr::Set { set } => Ok(Domain::Set(set)),
            DomainRepr::Real { real: [lo, hi] } => Ok(Domain::Real {
                lo: lo.unwrap_or(f64::NEG_INFINITY),
                hi: hi.unwrap_or(f64::INFINITY),
            }),
        }
    }
}

/// A value a variable can take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Real(f64),
    Label(String),
}

impl Value {
    /// Numeric reading used for effect sizes: booleans as 0/1.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Bool(b) => Some(f64::from(u8::from(*b))),
            Value::Real(x) => Some(*x),
            Value::Label(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", u8::from(*b)),
            Value::Real(x) => write!(f, "{x}"),
            Value::Label(l) => f.write_str(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        Variable {
            name: name.into(),
            domain,
        }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Self::new(name, Domain::Bool)
    }

    pub fn real(name: impl Into<String>) -> Self {
        Self::new(name, Domain::unbounded())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralEquation {
    pub target: String,
    pub parents: Vec<String>,
    pub body: Expr,
}

impl StructuralEquation {
    pub fn new(target: impl Into<String>, body: Expr) -> Self {
        StructuralEquation {
            target: target.into(),
            parents: body.free_vars(),
            body,
        }
    }
}

/// Parse `text` as the structural equation for `target`.
pub fn parse_equation(target: &str, text: &str) -> Result<StructuralEquation> {
    Ok(StructuralEquation::new(target, parse_expr(text)?))
}

/// Total or partial valuation of graph variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, Value>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.0.insert(name.into(), value);
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.insert(name, value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.0.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A set of do-operations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterventionSpec {
    forced: Vec<(String, Value)>,
}

impl InterventionSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        let mut spec = Self::none();
        for (name, value) in pairs {
            spec = spec.with(name, value)?;
        }
        Ok(spec)
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Result<Self> {
        let name = name.into();
        if self.forced.iter().any(|(n, _)| *n == name) {
            return Err(Error::DuplicateIntervention(name));
        }
        self.forced.push((name, value));
        Ok(self)
    }

    /// Combine two specs; overlapping variables are rejected, not merged.
    pub fn merge(&self, other: &InterventionSpec) -> Result<Self> {
        let mut out = self.clone();
        for (n, v) in &other.forced {
            out = out.with(n.clone(), v.clone())?;
        }
        Ok(out)
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.forced.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn pairs(&self) -> &[(String, Value)] {
        &self.forced
    }

    pub fn is_empty(&self) -> bool {
        self.forced.is_empty()
    }
}

/// Validated acyclic structural causal model.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    equations: Vec<Option<StructuralEquation>>,
    resolved: Vec<Option<Resolved>>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    order: Vec<usize>,
}

/// Validate variables and equations into a graph with a cached topological
/// order. Ties in the order are broken by declaration index.
pub fn build_graph(variables: Vec<Variable>, equations: Vec<StructuralEquation>) -> Result<CausalGraph> {
    let mut index = HashMap::with_capacity(variables.len());
    for (i, v) in variables.iter().enumerate() {
        if index.insert(v.name.clone(), i).is_some() {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
        match &v.domain {
            Domain::Set(labels) if labels.is_empty() => {
                return Err(Error::InvalidDomain {
                    name: v.name.clone(),
                    reason: "empty set".into(),
                })
            }
            Domain::Real { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => {
                return Err(Error::InvalidDomain {
                    name: v.name.clone(),
                    reason: format!("interval [{lo}, {hi}]"),
                })
            }
            _ => {}
        }
    }

    let n = variables.len();
    let mut eqs: Vec<Option<StructuralEquation>> = vec![None; n];
    for eq in equations {
        let &t = index
            .get(&eq.target)
            .ok_or_else(|| Error::UndeclaredVariable(eq.target.clone()))?;
        if eqs[t].is_some() {
            return Err(Error::DuplicateEquation(eq.target.clone()));
        }
        eqs[t] = Some(eq);
    }

    let mut parents = vec![Vec::new(); n];
    let mut children = vec![Vec::new(); n];
    let mut resolved = vec![None; n];
    for (t, eq) in eqs.iter().enumerate() {
        let Some(eq) = eq else { continue };
        for p in &eq.parents {
            let &pi = index.get(p).ok_or_else(|| Error::UndeclaredVariable(p.clone()))?;
            parents[t].push(pi);
            if !children[pi].contains(&t) {
                children[pi].push(t);
            }
        }
        let ty = eq
            .body
            .infer(&|name| {
                index
                    .get(name)
                    .map_or(Type::Unknown, |&i| variables[i].domain.expr_type())
            })
            .map_err(|e| match e {
                Error::TypeMismatch(m) => Error::TypeMismatch(format!("equation for `{}`: {m}", eq.target)),
                other => other,
            })?;
        if variables[t].domain == Domain::Bool && ty != Type::Bool {
            return Err(Error::TypeMismatch(format!(
                "boolean `{}` defined by a real-valued expression",
                eq.target
            )));
        }
        resolved[t] = Some(eq.body.resolve(&|name| index.get(name).copied())?);
    }
    for c in &mut children {
        c.sort_unstable();
    }

    let order = topological_order(&parents, &children)
        .map_err(|cycle| Error::Cycle(cycle.into_iter().map(|i| variables[i].name.clone()).collect()))?;

    Ok(CausalGraph {
        variables,
        index,
        equations: eqs,
        resolved,
        parents,
        children,
        order,
    })
}

fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents
        .iter()
        .map(|ps| ps.iter().collect::<BTreeSet<_>>().len())
        .collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Walk parent links among the unordered nodes until one repeats.
    let placed: BTreeSet<usize> = order.into_iter().collect();
    let start = (0..n).find(|i| !placed.contains(i)).expect("some node unplaced");
    let mut path = vec![start];
    let mut cur = start;
    loop {
        let next = *parents[cur]
            .iter()
            .find(|p| !placed.contains(p))
            .expect("unplaced node keeps an unplaced parent");
        if let Some(pos) = path.iter().position(|&p| p == next) {
            let mut cycle: Vec<usize> = path[pos..].to_vec();
            cycle.reverse();
            // start from the earliest-declared member for a stable report
            let first = (0..cycle.len()).min_by_key(|&k| cycle[k]).unwrap_or(0);
            cycle.rotate_left(first);
            cycle.push(cycle[0]);
            return Err(cycle);
        }
        path.push(next);
        cur = next;
    }
}

impl CausalGraph {
    pub fn empty() -> Self {
        build_graph(Vec::new(), Vec::new()).expect("empty graph is valid")
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.index_of(name).map(|i| &self.variables[i])
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UndeclaredVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn equation(&self, name: &str) -> Option<&StructuralEquation> {
        self.index.get(name).and_then(|&i| self.equations[i].as_ref())
    }

    pub fn equations(&self) -> impl Iterator<Item = &StructuralEquation> {
        self.order.iter().filter_map(|&i| self.equations[i].as_ref())
    }

    pub fn is_exogenous(&self, name: &str) -> bool {
        self.equation(name).is_none() && self.contains(name)
    }

    pub fn exogenous(&self) -> Vec<&str> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(i, _)| self.equations[*i].is_none())
            .map(|(_, v)| v.name.as_str())
            .collect()
    }

    /// Variable names in topological order.
    pub fn topological_order(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.variables[i].name.as_str()).collect()
    }

    /// Direct children, sorted by name.
    pub fn children_of(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index_of(name)?;
        let mut out: Vec<&str> = self.children[i]
            .iter()
            .map(|&c| self.variables[c].name.as_str())
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn parents_of(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index_of(name)?;
        Ok(self.parents[i]
            .iter()
            .map(|&p| self.variables[p].name.as_str())
            .collect())
    }

    pub(crate) fn child_indices(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Every ancestor of `name` (excluding itself), in topological order.
    pub fn ancestors(&self, name: &str) -> Result<Vec<&str>> {
        let target = self.index_of(name)?;
        let mut seen = vec![false; self.len()];
        let mut stack = vec![target];
        while let Some(i) = stack.pop() {
            for &p in &self.parents[i] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        Ok(self
            .order
            .iter()
            .filter(|&&i| seen[i] && i != target)
            .map(|&i| self.variables[i].name.as_str())
            .collect())
    }

    /// Whether a directed path leads from `from` to `to`, optionally
    /// avoiding one node.
    pub fn reachable(&self, from: &str, to: &str, avoiding: Option<&str>) -> Result<bool> {
        let (s, t) = (self.index_of(from)?, self.index_of(to)?);
        let skip = avoiding.map(|a| self.index_of(a)).transpose()?;
        let mut seen = vec![false; self.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(i) = stack.pop() {
            for &c in &self.children[i] {
                if Some(c) == skip || seen[c] {
                    continue;
                }
                if c == t {
                    return Ok(true);
                }
                seen[c] = true;
                stack.push(c);
            }
        }
        Ok(false)
    }

    /// Evaluate every variable under the do-operations in `spec`. Forced
    /// variables never consult their equation; exogenous variables that are
    /// forced need no entry in `exogenous`.
    pub fn evaluate(&self, exogenous: &Assignment, spec: &InterventionSpec) -> Result<Assignment> {
        let values = self.evaluate_values(exogenous, spec)?;
        Ok(self
            .variables
            .iter()
            .zip(values)
            .map(|(v, val)| (v.name.clone(), val))
            .collect())
    }

    pub(crate) fn evaluate_values(&self, exogenous: &Assignment, spec: &InterventionSpec) -> Result<Vec<Value>> {
        let n = self.len();
        let mut forced: Vec<Option<Value>> = vec![None; n];
        for (name, value) in spec.pairs() {
            let i = self.index_of(name)?;
            forced[i] = Some(self.variables[i].domain.coerce(name, value)?);
        }
        let mut values: Vec<Value> = vec![Value::Bool(false); n];
        let mut slots: Vec<Scalar> = vec![Scalar::Real(f64::NAN); n];
        for &i in &self.order {
            let var = &self.variables[i];
            let value = if let Some(v) = forced[i].take() {
                v
            } else if let Some(expr) = &self.resolved[i] {
                var.domain.value_of(&var.name, expr.eval(&slots))?
            } else {
                let v = exogenous
                    .get(&var.name)
                    .ok_or_else(|| Error::MissingExogenous(var.name.clone()))?;
                var.domain.coerce(&var.name, v)?
            };
            slots[i] = var.domain.to_scalar(&value);
            values[i] = value;
        }
        Ok(values)
    }

    /// All assignments to the exogenous variables, lexicographic with the
    /// first-declared variable most significant.
    pub fn exogenous_contexts(&self) -> Result<Vec<Assignment>> {
        self.contexts_over(&self.exogenous())
    }

    pub(crate) fn contexts_over(&self, names: &[&str]) -> Result<Vec<Assignment>> {
        let mut domains = Vec::with_capacity(names.len());
        let mut total: u64 = 1;
        for &name in names {
            let members = self
                .variable(name)?
                .domain
                .members()
                .ok_or_else(|| Error::NotEnumerable(name.to_string()))?;
            total = total.saturating_mul(members.len() as u64);
            domains.push(members);
        }
        if total > MAX_WORLDS {
            return Err(Error::CapExceeded {
                what: format!("{total} exogenous contexts"),
                limit: MAX_WORLDS,
            });
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut digits = vec![0usize; names.len()];
        loop {
            out.push(
                names
                    .iter()
                    .zip(&digits)
                    .zip(&domains)
                    .map(|((n, &d), dom)| (n.to_string(), dom[d].clone()))
                    .collect(),
            );
            let mut k = names.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < domains[k].len() {
                    break;
                }
                digits[k] = 0;
            }
        }
    }

    /// One evaluated world per exogenous context.
    pub fn enumerate_worlds(&self) -> Result<Vec<Assignment>> {
        self.exogenous_contexts()?
            .iter()
            .map(|ctx| self.evaluate(ctx, &InterventionSpec::none()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hiker() -> CausalGraph {
        build_graph(
            vec![Variable::boolean("A"), Variable::boolean("B"), Variable::boolean("C")],
            vec![
                parse_equation("B", "A").unwrap(),
                parse_equation("C", "or(not(A), B)").unwrap(),
            ],
        )
        .unwrap()
    }

    fn t() -> Value {
        Value::Bool(true)
    }

    fn f() -> Value {
        Value::Bool(false)
    }

    #[test]
    fn hiker_order_and_evaluation() {
        let g = hiker();
        assert_eq!(g.topological_order(), vec!["A", "B", "C"]);
        let ctx = Assignment::new().with("A", t());
        let w = g.evaluate(&ctx, &InterventionSpec::none()).unwrap();
        assert_eq!(w.get("B"), Some(&t()));
        assert_eq!(w.get("C"), Some(&t()));
        let spec = InterventionSpec::new([("B", f())]).unwrap();
        let w = g.evaluate(&ctx, &spec).unwrap();
        assert_eq!(w.to_string(), "{A:1, B:0, C:0}");
    }

    #[test]
    fn two_cycle_is_reported() {
        let err = build_graph(
            vec![Variable::boolean("X"), Variable::boolean("Y")],
            vec![parse_equation("X", "Y").unwrap(), parse_equation("Y", "X").unwrap()],
        )
        .unwrap_err();
        match err {
            Error::Cycle(path) => {
                assert_eq!(path.len(), 3);
                assert_eq!(path.first(), path.last());
                assert_eq!(err_string(&path), "X→Y→X");
            }
            other => panic!("{other:?}"),
        }
    }

    fn err_string(p: &[String]) -> String {
        p.join("→")
    }

    #[test]
    fn empty_graph() {
        let g = build_graph(vec![], vec![]).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.enumerate_worlds().unwrap().len(), 1);
    }

    #[test]
    fn duplicate_and_undeclared() {
        let vars = || vec![Variable::boolean("A"), Variable::boolean("B")];
        assert!(matches!(
            build_graph(
                vars(),
                vec![parse_equation("B", "A").unwrap(), parse_equation("B", "not A").unwrap()]
            ),
            Err(Error::DuplicateEquation(_))
        ));
        assert!(matches!(
            build_graph(vars(), vec![parse_equation("B", "Z").unwrap()]),
            Err(Error::UndeclaredVariable(n)) if n == "Z"
        ));
        assert!(matches!(
            build_graph(vars(), vec![parse_equation("Q", "A").unwrap()]),
            Err(Error::UndeclaredVariable(n)) if n == "Q"
        ));
    }

    #[test]
    fn typed_against_domains() {
        let err = build_graph(
            vec![Variable::real("x"), Variable::boolean("B")],
            vec![parse_equation("B", "not x").unwrap()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::TypeMismatch(_)));
        let err = build_graph(
            vec![Variable::real("x"), Variable::boolean("B")],
            vec![parse_equation("B", "x + 1").unwrap()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::TypeMismatch(_)));
        assert!(build_graph(
            vec![Variable::real("x"), Variable::boolean("B")],
            vec![parse_equation("B", "x + 1 > 0").unwrap()],
        )
        .is_ok());
    }

    #[test]
    fn full_override_never_consults_equations() {
        let g = hiker();
        let spec = InterventionSpec::new([("B", t()), ("C", f())]).unwrap();
        let w = g.evaluate(&Assignment::new().with("A", f()), &spec).unwrap();
        assert_eq!(w.get("B"), Some(&t()));
        assert_eq!(w.get("C"), Some(&f()));
    }

    #[test]
    fn missing_exogenous_and_domain_violation() {
        let g = hiker();
        assert!(matches!(
            g.evaluate(&Assignment::new(), &InterventionSpec::none()),
            Err(Error::MissingExogenous(_))
        ));
        assert!(matches!(
            g.evaluate(
                &Assignment::new().with("A", Value::Real(0.5)),
                &InterventionSpec::none()
            ),
            Err(Error::DomainViolation { .. })
        ));
        // forcing the exogenous variable satisfies the precondition
        let spec = InterventionSpec::new([("A", t())]).unwrap();
        assert!(g.evaluate(&Assignment::new(), &spec).is_ok());
    }

    #[test]
    fn intervention_duplicates_rejected() {
        let spec = InterventionSpec::new([("B", t())]).unwrap();
        assert!(spec.clone().with("B", f()).is_err());
        assert!(spec.merge(&spec).is_err());
    }

    #[test]
    fn worlds_enumerate_lexicographically() {
        let g = build_graph(
            vec![Variable::boolean("A1"), Variable::boolean("A2"), Variable::boolean("B")],
            vec![parse_equation("B", "A1 or A2").unwrap()],
        )
        .unwrap();
        let worlds = g.enumerate_worlds().unwrap();
        assert_eq!(worlds.len(), 4);
        let bs: Vec<_> = worlds.iter().map(|w| w.get("B").unwrap().clone()).collect();
        assert_eq!(bs, vec![f(), t(), t(), t()]);
        assert_eq!(worlds[1].get("A2"), Some(&t()));

        let g = build_graph(vec![Variable::real("x")], vec![]).unwrap();
        assert!(matches!(g.enumerate_worlds(), Err(Error::NotEnumerable(_))));
    }

    #[test]
    fn set_domains_use_indices() {
        let g = build_graph(
            vec![
                Variable::new("c", Domain::Set(vec!["red".into(), "green".into(), "blue".into()])),
                Variable::new("d", Domain::Set(vec!["lo".into(), "hi".into()])),
            ],
            vec![parse_equation("d", "ite(c == 2, 1, 0)").unwrap()],
        )
        .unwrap();
        let w = g
            .evaluate(
                &Assignment::new().with("c", Value::Label("blue".into())),
                &InterventionSpec::none(),
            )
            .unwrap();
        assert_eq!(w.get("d"), Some(&Value::Label("hi".into())));
        assert!(Domain::Set(vec![]).members().unwrap().is_empty());
        assert!(matches!(
            build_graph(vec![Variable::new("e", Domain::Set(vec![]))], vec![]),
            Err(Error::InvalidDomain { .. })
        ));
    }
}
