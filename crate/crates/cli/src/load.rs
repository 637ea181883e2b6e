use std::fs;
use std::path::Path;

use causalprobe::scm::{Assignment, CausalGraph, InterventionSpec, Scenario, Value};
use causalprobe::toynets::{Example, NeuralNetwork};

use crate::Failure;

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Prefix an error with the file it came from.
fn in_file<E: Into<causalprobe::Error>>(path: &Path) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::core(e.into()).context(path.display().to_string())
}

pub fn scenario(path: &Path) -> Result<(CausalGraph, Assignment), Failure> {
    Scenario::load(&read(path)?).map_err(in_file(path))
}

pub fn network(path: &Path) -> Result<NeuralNetwork, Failure> {
    NeuralNetwork::from_json(&read(path)?).map_err(in_file(path))
}

/// An array of examples, or a single example object.
pub fn dataset(path: &Path) -> Result<Vec<Example>, Failure> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(in_file(path))?;
    let data = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|ex| vec![ex])
    };
    data.map_err(in_file(path))
}

pub enum Model {
    Scenario(CausalGraph, Assignment),
    Network(NeuralNetwork),
}

/// Networks carry `layers`; scenarios carry `variables`.
pub fn model(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(in_file(path))?;
    if value.get("layers").is_some() {
        Ok(Model::Network(NeuralNetwork::from_json(&text).map_err(in_file(path))?))
    } else if value.get("variables").is_some() {
        let (g, ctx) = Scenario::load(&text).map_err(in_file(path))?;
        Ok(Model::Scenario(g, ctx))
    } else {
        Err(Failure::usage(format!(
            "{}: neither a scenario (`variables`) nor a network (`layers`)",
            path.display()
        )))
    }
}

/// Split `NAME=VALUE`.
pub fn pair(text: &str) -> Result<(&str, &str), Failure> {
    text.split_once('=')
        .map(|(n, v)| (n.trim(), v.trim()))
        .ok_or_else(|| Failure::usage(format!("expected NAME=VALUE, got `{text}`")))
}

pub fn value(graph: &CausalGraph, name: &str, text: &str) -> Result<Value, Failure> {
    let var = graph.variable(name)?;
    Ok(var.domain.parse_value(name, text)?)
}

/// Context values from `--set`, layered over the scenario's default.
pub fn context(graph: &CausalGraph, base: &Assignment, sets: &[String]) -> Result<Assignment, Failure> {
    let mut ctx = base.clone();
    for s in sets {
        let (n, v) = pair(s)?;
        if !graph.is_exogenous(n) {
            graph.variable(n)?;
            return Err(Failure::usage(format!(
                "`{n}` is endogenous; use --do to intervene on it"
            )));
        }
        ctx.insert(n, value(graph, n, v)?);
    }
    Ok(ctx)
}

pub fn interventions(graph: &CausalGraph, dos: &[String]) -> Result<InterventionSpec, Failure> {
    let mut spec = InterventionSpec::none();
    for d in dos {
        let (n, v) = pair(d)?;
        spec = spec.with(n, value(graph, n, v)?)?;
    }
    Ok(spec)
}

pub fn list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
