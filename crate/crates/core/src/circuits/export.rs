use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Admission, Circuit, CIRCUIT_FORMAT_VERSION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Dot,
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            _ => Err(Error::invalid(format!("unknown export format `{s}`"))),
        }
    }
}

pub fn export_circuit(circuit: &Circuit, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => circuit.to_json(),
        ExportFormat::Dot => to_dot(circuit),
        ExportFormat::Csv => to_csv(circuit),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn mix(t: f64, to: (u8, u8, u8)) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 1.0 };
    let ch = |c: u8| (255.0 + (f64::from(c) - 255.0) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(to.0), ch(to.1), ch(to.2))
}

/// Blue for positive effects, red for negative, saturating at the largest
/// magnitude in the circuit.
fn fill(effect: f64, scale: f64) -> String {
    let t = if scale > 0.0 { effect.abs() / scale } else { 0.0 };
    if effect >= 0.0 {
        mix(t, (33, 102, 172))
    } else {
        mix(t, (178, 24, 43))
    }
}

fn to_dot(c: &Circuit) -> String {
    let scale = c.nodes.iter().map(|n| n.effect.abs()).fold(0.0, f64::max);
    let mut out = String::new();
    let _ = writeln!(out, "// format_version: {CIRCUIT_FORMAT_VERSION}");
    let _ = writeln!(
        out,
        "// target: {}, method: {}, ablation: {}",
        c.target, c.method, c.ablation
    );
    out.push_str("digraph circuit {\n  rankdir=LR;\n  node [shape=box, style=filled];\n");
    for n in &c.nodes {
        let style = match n.admission {
            Admission::Threshold => "filled",
            Admission::LocalExpansion(_) => "filled,dashed",
            Admission::SetSearch { .. } => "filled",
            Admission::Preempted { .. } => "filled,dotted",
        };
        let extra = if matches!(n.admission, Admission::SetSearch { .. }) {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  {} [label={}, fillcolor=\"{}\", style=\"{}\"{}];",
            quote(&n.node.to_string()),
            quote(&format!("{}\\n{:.4}", n.label, n.effect)),
            fill(n.effect, scale),
            style,
            extra
        );
    }
    for e in &c.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{:.4}\"];",
            quote(&e.upstream.to_string()),
            quote(&e.downstream.to_string()),
            e.score
        );
    }
    out.push_str("}\n");
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn admission_name(a: &Admission) -> &'static str {
    match a {
        Admission::Threshold => "threshold",
        Admission::LocalExpansion(_) => "local_expansion",
        Admission::SetSearch { .. } => "set_search",
        Admission::Preempted { .. } => "preempted",
    }
}

fn to_csv(c: &Circuit) -> String {
    let mut out = String::from("node,label,effect,admission\n");
    for n in &c.nodes {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            n.node,
            csv_field(&n.label),
            n.effect,
            admission_name(&n.admission)
        );
    }
    out.push_str("\nupstream,downstream,score\n");
    for e in &c.edges {
        let _ = writeln!(out, "{},{},{}", e.upstream, e.downstream, e.score);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{discover_circuit, CircuitNode, DiscoveryOptions};
    use crate::interventions::TargetMetric;
    use crate::toynets::{make_nontransitive_net, NodeRef};

    fn sample() -> Circuit {
        let (net, ctx) = make_nontransitive_net();
        let data = vec![ctx];
        discover_circuit(
            &net,
            &data,
            &TargetMetric::output(&net, 0),
            &DiscoveryOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn empty_circuit_is_a_valid_digraph() {
        let mut c = sample();
        c.nodes.clear();
        c.edges.clear();
        let dot = export_circuit(&c, ExportFormat::Dot);
        assert!(dot.starts_with("// format_version: 1\n"));
        assert!(dot.contains("digraph circuit {"));
        assert!(dot.trim_end().ends_with('}'));
    }

    #[test]
    fn negative_effect_is_red() {
        let c = sample();
        assert!(c.nodes[0].effect < 0.0);
        let dot = export_circuit(&c, ExportFormat::Dot);
        assert!(dot.contains("fillcolor=\"#b2182b\""), "{dot}");
    }

    #[test]
    fn json_round_trips_byte_identically() {
        let mut c = sample();
        c.nodes.push(CircuitNode {
            node: NodeRef::neuron(0, 0),
            label: "A".into(),
            effect: 0.1 + 0.2,
            admission: Admission::SetSearch {
                set: vec![NodeRef::neuron(0, 0)],
                joint_effect: -1.0 / 3.0,
            },
        });
        let text = export_circuit(&c, ExportFormat::Json);
        let back = Circuit::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(export_circuit(&back, ExportFormat::Json), text);
    }

    #[test]
    fn csv_has_both_tables() {
        let csv = export_circuit(&sample(), ExportFormat::Csv);
        assert!(
            csv.starts_with("node,label,effect,admission\nL1.0,B,-1,threshold\n"),
            "{csv}"
        );
        assert!(csv.contains("\nupstream,downstream,score\n"));
        assert_eq!(csv_field("a,\"b\""), "\"a,\"\"b\"\"\"");
    }
}
