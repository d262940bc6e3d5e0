//! Versioned JSON description of a figure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Figure, NodeDef, Subfigure, DEFAULT_BRANCH_CAP, INFINITY, REAL_LINE};
use crate::cycle::{Cycle, Metric};
use crate::error::{Error, Result};
use crate::numerics::{eps_cmp, ArithMode, Scalar};
use crate::relations::Relation;

pub const SCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub metric: Metric,
    #[serde(default = "default_arith")]
    pub arithmetic: ArithMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_cap: Option<usize>,
}

fn default_arith() -> ArithMode {
    ArithMode::Exact
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSubfigure {
    pub script: Box<Script>,
    pub inputs: BTreeMap<String, String>,
    pub result: String,
}

/// One node. Exactly one of the defining fields must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptNode {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Cycle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle2d: Option<[Scalar; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<Relation<String>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subfigure: Option<ScriptSubfigure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptCheck {
    pub a: String,
    pub b: String,
    pub relation: Relation<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub version: u32,
    pub metadata: Metadata,
    pub nodes: Vec<ScriptNode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<ScriptCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub a: String,
    pub b: String,
    pub relation: &'static str,
    pub branches: Vec<BranchReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchReport {
    pub a: usize,
    pub b: usize,
    pub holds: bool,
    pub residual: Scalar,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Scalar>,
}

impl Script {
    pub fn parse(text: &str) -> Result<Script> {
        let s: Script = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if s.version != SCRIPT_VERSION {
            return Err(Error::Script(format!("unsupported version {}", s.version)));
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serialises")
    }

    /// Builds the figure in frozen mode and evaluates it once.
    pub fn build(&self) -> Result<Figure> {
        let meta = &self.metadata;
        let mut f = Figure::new(meta.metric.clone());
        f.mode = meta.arithmetic;
        f.eps = meta.eps.unwrap_or_else(eps_cmp);
        f.branch_cap = meta.branch_cap.unwrap_or(DEFAULT_BRANCH_CAP);
        f.freeze();
        for n in &self.nodes {
            let defs = [
                n.cycle.is_some(),
                n.cycle2d.is_some(),
                n.point.is_some(),
                n.relations.is_some(),
                n.subfigure.is_some(),
            ];
            if defs.iter().filter(|&&b| b).count() != 1 {
                return Err(Error::Script(format!("node `{}` needs exactly one definition", n.label)));
            }
            if !n.exclude.is_empty() && n.relations.is_none() {
                return Err(Error::Script(format!("node `{}`: exclude needs relations", n.label)));
            }
            if let Some(c) = &n.cycle {
                f.add_cycle(c.clone(), &n.label)?;
            } else if let Some([k, l, m2, m]) = &n.cycle2d {
                f.add_cycle(Cycle::new_2d(k.clone(), l.clone(), m2.clone(), m.clone())?, &n.label)?;
            } else if let Some(p) = &n.point {
                f.add_point(p.clone(), &n.label)?;
            } else if let Some(r) = &n.relations {
                f.add_cycle_rel_excluding(r.clone(), n.exclude.clone(), &n.label)?;
            } else if let Some(s) = &n.subfigure {
                let mut inner = s.script.build()?;
                inner.freeze();
                f.add_subfigure(
                    Subfigure {
                        inner,
                        bindings: s.inputs.iter().map(|(a, b)| (a.clone(), b.clone())).collect(),
                        result: s.result.clone(),
                    },
                    &n.label,
                )?;
            }
        }
        f.unfreeze()?;
        Ok(f)
    }

    /// Describes an existing figure. Evaluated instances are not stored.
    pub fn from_figure(fig: &Figure) -> Script {
        let nodes = fig
            .nodes()
            .iter()
            .filter(|n| n.label != REAL_LINE && n.label != INFINITY)
            .map(|n| {
                let mut s = ScriptNode {
                    label: n.label.clone(),
                    ..ScriptNode::default()
                };
                match &n.def {
                    NodeDef::RealLine | NodeDef::Infinity => unreachable!("predefined nodes are skipped"),
                    NodeDef::Explicit(c) => match c.as_2d() {
                        Some(v) => s.cycle2d = Some(v),
                        None => s.cycle = Some(c.clone()),
                    },
                    NodeDef::Point(p) => s.point = Some(p.clone()),
                    NodeDef::Relations { relations, exclude } => {
                        s.relations = Some(relations.clone());
                        s.exclude = exclude.clone();
                    }
                    NodeDef::Subfigure(sub) => {
                        s.subfigure = Some(ScriptSubfigure {
                            script: Box::new(Script::from_figure(&sub.inner)),
                            inputs: sub.bindings.iter().cloned().collect(),
                            result: sub.result.clone(),
                        })
                    }
                }
                s
            })
            .collect();
        Script {
            version: SCRIPT_VERSION,
            metadata: Metadata {
                metric: fig.metric().clone(),
                arithmetic: fig.mode(),
                eps: Some(fig.eps()),
                branch_cap: Some(fig.branch_cap()),
            },
            nodes,
            checks: vec![],
        }
    }

    pub fn run_checks(&self, fig: &Figure) -> Result<Vec<CheckReport>> {
        self.checks
            .iter()
            .map(|c| {
                let rel = c.relation.map_ref(|_| Ok(()))?;
                let branches = fig
                    .check_rel(&c.a, &c.b, &rel)?
                    .into_iter()
                    .map(|r| BranchReport {
                        a: r.a,
                        b: r.b,
                        holds: r.check.holds,
                        residual: r.check.residual,
                        value: r.check.value,
                    })
                    .collect();
                Ok(CheckReport {
                    a: c.a.clone(),
                    b: c.b.clone(),
                    relation: rel.name(),
                    branches,
                })
            })
            .collect()
    }
}
