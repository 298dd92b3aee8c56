//! JSON formats: offspring laws, trees, partial trees and probes.

use std::fmt::Write as _;
use std::path::Path;

use gwmax_core::convergence::Probe;
use gwmax_core::{FiniteTree, GraftEvent, Label, Mark, OffspringLaw, PartialTree};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// An offspring law as written in JSON, e.g. `{"family":"geometric","a":0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawSpec {
    Geometric { a: f64 },
    Explicit { pmf: Vec<f64> },
    Poisson { lambda: f64 },
    #[serde(alias = "power_law", alias = "powerlaw")]
    PowerLaw { c: f64, alpha: f64 },
}

impl LawSpec {
    pub fn build(&self) -> Result<OffspringLaw, CliError> {
        let law = match self {
            LawSpec::Geometric { a } => OffspringLaw::geometric(*a),
            LawSpec::Explicit { pmf } => OffspringLaw::explicit(pmf.clone()),
            LawSpec::Poisson { lambda } => OffspringLaw::poisson(*lambda),
            LawSpec::PowerLaw { c, alpha } => OffspringLaw::power_law(*c, *alpha),
        }?;
        Ok(law)
    }
}

/// Inline JSON if the argument starts with `{` or `[`, otherwise a file path.
pub fn read_json_arg(arg: &str, what: &str) -> Result<String, CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg))
        .map_err(|e| CliError::Input(format!("cannot read {what} from {arg:?}: {e}")))
}

pub fn parse_law(arg: &str) -> Result<OffspringLaw, CliError> {
    let text = read_json_arg(arg, "law")?;
    let spec: LawSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid law: {e}")))?;
    spec.build()
}

/// Finite trees are nested arrays; `[]` is a leaf. The printed form is
/// already valid JSON.
pub fn tree_to_json(t: &FiniteTree) -> String {
    t.to_string()
}

pub fn tree_from_value(v: &Value) -> Result<FiniteTree, CliError> {
    if !v.is_array() {
        return Err(CliError::Input(format!("a tree is a JSON array of child trees, got {v}")));
    }
    Ok(v.to_string().parse::<FiniteTree>()?)
}

pub fn tree_from_json(s: &str) -> Result<FiniteTree, CliError> {
    let v: Value = serde_json::from_str(s).map_err(|e| CliError::Input(format!("invalid tree JSON: {e}")))?;
    tree_from_value(&v)
}

/// Partial trees use plain arrays for fully materialised vertices and
/// objects otherwise:
///
/// * `{"inf":true,"children":[...]}` for the vertex of infinite out-degree,
/// * `{"frontier":true}` for a vertex at the depth limit,
/// * `{"degree":d,"children":[...]}` for a vertex with `d` children of which
///   only the listed ones are shown,
/// * `"special":true` is added to vertices on the special lineage.
pub fn partial_to_json(t: &PartialTree) -> String {
    let mut out = String::new();
    // remaining children to close, per open vertex; `true` if it is an object
    let mut open: Vec<(u32, bool)> = Vec::new();
    for v in 0..t.len() {
        let special = t.is_special(v);
        let kids = t.present_children(v);
        match t.mark(v) {
            Mark::Frontier => {
                if special {
                    out.push_str("{\"frontier\":true,\"special\":true}");
                } else {
                    out.push_str("{\"frontier\":true}");
                }
            }
            Mark::Infinite => {
                out.push_str("{\"inf\":true,");
                if special {
                    out.push_str("\"special\":true,");
                }
                out.push_str("\"children\":[");
            }
            Mark::WidthCut { degree } => {
                let _ = write!(out, "{{\"degree\":{degree},");
                if special {
                    out.push_str("\"special\":true,");
                }
                out.push_str("\"children\":[");
            }
            Mark::Materialized => {
                if special {
                    out.push_str("{\"special\":true,\"children\":[");
                } else {
                    out.push('[');
                }
            }
        }
        let object = special || t.mark(v) != Mark::Materialized;
        // `done`: the vertex on top of the stack (or a frontier leaf just
        // written) has all its children written
        let mut done = if t.mark(v) == Mark::Frontier {
            true
        } else {
            open.push((kids, object));
            kids == 0
        };
        let mut pop = t.mark(v) != Mark::Frontier;
        while done {
            if pop {
                let (_, object) = open.pop().expect("open vertex");
                out.push_str(if object { "]}" } else { "]" });
            }
            pop = true;
            match open.last_mut() {
                Some(parent) => {
                    parent.0 -= 1;
                    if parent.0 > 0 {
                        out.push(',');
                        done = false;
                    }
                }
                None => done = false,
            }
        }
    }
    out
}

pub fn partial_from_json(s: &str) -> Result<PartialTree, CliError> {
    let v: Value = serde_json::from_str(s).map_err(|e| CliError::Input(format!("invalid tree JSON: {e}")))?;
    let mut present = Vec::new();
    let mut marks = Vec::new();
    let mut special = Vec::new();
    walk_partial(&v, &mut present, &mut marks, &mut special)?;
    Ok(PartialTree::from_parts(present, marks, special)?)
}

fn walk_partial(v: &Value, present: &mut Vec<u32>, marks: &mut Vec<Mark>, special: &mut Vec<bool>) -> Result<(), CliError> {
    let bad = || CliError::Input(format!("invalid partial tree node {v}"));
    let (children, mark, is_special) = match v {
        Value::Array(children) => (children.as_slice(), Mark::Materialized, false),
        Value::Object(map) => {
            let flag = |key: &str| map.get(key).and_then(Value::as_bool).unwrap_or(false);
            let children = match map.get("children") {
                Some(Value::Array(c)) => c.as_slice(),
                Some(_) => return Err(bad()),
                None => &[],
            };
            let mark = if flag("frontier") {
                Mark::Frontier
            } else if flag("inf") {
                Mark::Infinite
            } else if let Some(d) = map.get("degree") {
                Mark::WidthCut { degree: d.as_u64().ok_or_else(bad)? }
            } else {
                Mark::Materialized
            };
            (children, mark, flag("special"))
        }
        _ => return Err(bad()),
    };
    present.push(children.len() as u32);
    marks.push(mark);
    special.push(is_special);
    for c in children {
        walk_partial(c, present, marks, special)?;
    }
    Ok(())
}

/// A graft probe: `{"tree":[[]],"site":[1]}` for a leaf graft, or with
/// `"k":2` for a right graft with at least `k` children at the site. An
/// explicit `"kind"` of `"leaf"` or `"right-plus"` may be given, and an
/// optional `"id"` overrides the generated one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default)]
    pub id: Option<String>,
    pub tree: Value,
    #[serde(default)]
    pub site: Vec<u32>,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub k: Option<u64>,
}

impl ProbeSpec {
    pub fn build(&self) -> Result<Probe, CliError> {
        let t = tree_from_value(&self.tree)?;
        let x = Label::new(self.site.clone())?;
        let right = match (self.kind.as_deref(), self.k) {
            (None, k) => k.is_some(),
            (Some("leaf"), None) => false,
            (Some("leaf"), Some(_)) => return Err(CliError::Input("a leaf probe takes no k".into())),
            (Some("right-plus"), Some(_)) => true,
            (Some("right-plus"), None) => return Err(CliError::Input("a right-plus probe needs k".into())),
            (Some(other), _) => return Err(CliError::Input(format!("unknown probe kind {other:?}"))),
        };
        let event = if right {
            GraftEvent::right_plus(t, x, self.k.unwrap_or(0))?
        } else {
            GraftEvent::leaf(t, x)?
        };
        let mut probe = Probe::new(event);
        if let Some(id) = &self.id {
            probe.id = id.clone();
        }
        Ok(probe)
    }
}

pub fn parse_probe(arg: &str) -> Result<Probe, CliError> {
    let text = read_json_arg(arg, "probe")?;
    let spec: ProbeSpec = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid probe: {e}")))?;
    spec.build()
}

/// A JSON array of probes.
pub fn parse_probes(arg: &str) -> Result<Vec<Probe>, CliError> {
    let text = read_json_arg(arg, "probes")?;
    let specs: Vec<ProbeSpec> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid probe list: {e}")))?;
    specs.iter().map(ProbeSpec::build).collect()
}
