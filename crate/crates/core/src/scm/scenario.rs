use serde::{Deserialize, Serialize};

use super::graph::{build_graph, parse_equation, Assignment, CausalGraph, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquationDecl {
    pub target: String,
    pub expr: String,
}

/// On-disk scenario: variables, equations as expression strings, and an
/// optional default exogenous context.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub variables: Vec<Variable>,
    pub equations: Vec<EquationDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<Assignment>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn from_graph(graph: &CausalGraph, context: Option<Assignment>) -> Self {
        Scenario {
            variables: graph.variables().to_vec(),
            equations: graph
                .equations()
                .map(|eq| EquationDecl {
                    target: eq.target.clone(),
                    expr: eq.body.to_string(),
                })
                .collect(),
            context,
        }
    }

    pub fn graph(&self) -> Result<CausalGraph> {
        let equations = self
            .equations
            .iter()
            .map(|d| {
                parse_equation(&d.target, &d.expr).map_err(|e| match e {
                    Error::Syntax {
                        offset,
                        expected,
                        found,
                    } => Error::Syntax {
                        offset,
                        expected: format!("{expected} (equation for `{}`)", d.target),
                        found,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        build_graph(self.variables.clone(), equations)
    }

    /// The graph plus the default context (empty when none is given).
    pub fn load(text: &str) -> Result<(CausalGraph, Assignment)> {
        let s = Self::from_json(text)?;
        Ok((s.graph()?, s.context.clone().unwrap_or_default()))
    }
}
