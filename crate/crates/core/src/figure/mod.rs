//! Ensembles of interrelated cycles organised by generations.
//!
//! Every node keeps all its instances. An instance carries a lineage: the
//! instance index chosen for each ancestor. Children are solved once per
//! tuple of parent instances with consistent lineages, so branches never mix.

pub mod loxodrome;
pub mod ninepoint;
pub mod script;

use std::collections::{BTreeMap, HashMap};

use crate::cycle::{Cycle, Metric, MoebiusMatrix, PointImage};
use crate::error::{Error, Result};
use crate::numerics::{eps_cmp, ArithMode, Scalar};
use crate::relations::{self, check_relation, small, Check, Family, Relation, SolutionSet};

pub const REAL_LINE_GEN: i32 = -2;
pub const INFINITY_GEN: i32 = -1;
pub const GHOST_GEN: i32 = -3;
pub const REAL_LINE: &str = "real_line";
pub const INFINITY: &str = "infinity";
pub const DEFAULT_BRANCH_CAP: usize = 64;

pub type Lineage = BTreeMap<String, usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Pending,
    Solved,
    Parametric,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub cycle: Cycle,
    pub lineage: Lineage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInstance {
    pub family: Family,
    pub lineage: Lineage,
}

/// A figure used as a macro: `bindings` map inner generation-0 labels to
/// outer labels and `result` names the inner node handed back.
#[derive(Debug, Clone, PartialEq)]
pub struct Subfigure {
    pub inner: Figure,
    pub bindings: Vec<(String, String)>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeDef {
    RealLine,
    Infinity,
    Explicit(Cycle),
    Point(Vec<Scalar>),
    Relations {
        relations: Vec<Relation<String>>,
        exclude: Vec<String>,
    },
    Subfigure(Box<Subfigure>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: String,
    pub generation: i32,
    pub def: NodeDef,
    pub parents: Vec<String>,
    pub status: NodeStatus,
    pub instances: Vec<Instance>,
    pub families: Vec<FamilyInstance>,
    pub notes: Vec<String>,
    /// An exact solve of this node fell back to floating point.
    pub demoted: bool,
}

/// Per-branch result of `check_rel`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelCheck {
    pub a: usize,
    pub b: usize,
    pub check: Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    InversiveDistance,
    SteinerPower,
    Product,
    NormalizedProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    metric: Metric,
    mode: ArithMode,
    eps: f64,
    branch_cap: usize,
    frozen: bool,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
}

fn compatible(a: &Lineage, b: &Lineage) -> bool {
    a.iter().all(|(k, v)| b.get(k).map_or(true, |w| w == v))
}

fn merge(a: &Lineage, b: &Lineage) -> Lineage {
    let mut out = a.clone();
    out.extend(b.iter().map(|(k, v)| (k.clone(), *v)));
    out
}

impl Figure {
    pub fn new(metric: Metric) -> Figure {
        let mut f = Figure {
            metric,
            mode: ArithMode::Exact,
            eps: eps_cmp(),
            branch_cap: DEFAULT_BRANCH_CAP,
            frozen: false,
            nodes: vec![],
            index: HashMap::new(),
        };
        f.push(REAL_LINE, REAL_LINE_GEN, NodeDef::RealLine, vec![]);
        f.push(INFINITY, INFINITY_GEN, NodeDef::Infinity, vec![]);
        f.evaluate_all().expect("predefined cycles");
        f
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn mode(&self) -> ArithMode {
        self.mode
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn branch_cap(&self) -> usize {
        self.branch_cap
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn set_eps(&mut self, eps: f64) {
        self.eps = eps;
    }

    pub fn set_branch_cap(&mut self, cap: usize) {
        self.branch_cap = cap;
    }

    /// Switches arithmetic and re-evaluates.
    pub fn set_mode(&mut self, mode: ArithMode) -> Result<()> {
        self.mode = mode;
        self.refresh()
    }

    /// Changes the point metric of a live figure and re-evaluates it.
    pub fn set_metric(&mut self, metric: Metric) -> Result<()> {
        for n in &self.nodes {
            if let NodeDef::Explicit(c) = &n.def {
                if c.dim() != metric.dim() {
                    return Err(Error::DimensionMismatch(format!("node `{}`", n.label)));
                }
            }
        }
        self.metric = metric;
        self.refresh()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Leaves frozen mode and solves everything in generation order.
    pub fn unfreeze(&mut self) -> Result<()> {
        self.frozen = false;
        self.evaluate_all()
    }

    /// Solves all nodes again from scratch.
    pub fn reevaluate(&mut self) -> Result<()> {
        self.evaluate_all()
    }

    fn refresh(&mut self) -> Result<()> {
        if self.frozen {
            for n in self.nodes.iter_mut() {
                n.status = NodeStatus::Pending;
                n.instances.clear();
                n.families.clear();
            }
            Ok(())
        } else {
            self.evaluate_all()
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.label.as_str())
    }

    pub fn node(&self, label: &str) -> Result<&Node> {
        self.index
            .get(label)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Concrete instances of a solved node.
    pub fn instances(&self, label: &str) -> Result<Vec<Cycle>> {
        let n = self.node(label)?;
        match n.status {
            NodeStatus::Pending | NodeStatus::Parametric if n.instances.is_empty() => {
                Err(Error::NotEvaluated(label.to_string()))
            }
            _ => Ok(n.instances.iter().map(|i| i.cycle.clone()).collect()),
        }
    }

    fn push(&mut self, label: &str, generation: i32, def: NodeDef, parents: Vec<String>) -> usize {
        self.nodes.push(Node {
            label: label.to_string(),
            generation,
            def,
            parents,
            status: NodeStatus::Pending,
            instances: vec![],
            families: vec![],
            notes: vec![],
            demoted: false,
        });
        let i = self.nodes.len() - 1;
        self.index.insert(label.to_string(), i);
        i
    }

    fn check_new_label(&self, label: &str) -> Result<()> {
        if label == REAL_LINE || label == INFINITY {
            return Err(Error::ReservedLabel(label.to_string()));
        }
        if label.is_empty() {
            return Err(Error::InvalidRelation("empty label".into()));
        }
        if self.index.contains_key(label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        Ok(())
    }

    /// Adds the node and solves it unless frozen. On error the node is
    /// removed again.
    fn insert(&mut self, label: &str, generation: i32, def: NodeDef, parents: Vec<String>) -> Result<()> {
        let i = self.push(label, generation, def, parents);
        if !self.frozen {
            if let Err(e) = self.evaluate_node(i) {
                self.nodes.pop();
                self.index.remove(label);
                return Err(e);
            }
        }
        Ok(())
    }

    /// Adds an explicitly given cycle at generation 0.
    pub fn add_cycle(&mut self, cycle: Cycle, label: &str) -> Result<()> {
        self.check_new_label(label)?;
        if cycle.dim() != self.metric.dim() {
            return Err(Error::DimensionMismatch(format!("cycle `{label}`")));
        }
        self.insert(label, 0, NodeDef::Explicit(cycle), vec![])
    }

    /// Adds a point (zero-radius cycle) at generation 0.
    pub fn add_point(&mut self, point: Vec<Scalar>, label: &str) -> Result<()> {
        self.check_new_label(label)?;
        if point.len() != self.metric.dim() {
            return Err(Error::DimensionMismatch(format!("point `{label}`")));
        }
        self.insert(label, 0, NodeDef::Point(point), vec![])
    }

    pub fn add_cycle_rel(&mut self, relations: Vec<Relation<String>>, label: &str) -> Result<()> {
        self.add_cycle_rel_excluding(relations, vec![], label)
    }

    /// Like [`Figure::add_cycle_rel`], dropping solutions that coincide
    /// with an instance of any node in `exclude`.
    pub fn add_cycle_rel_excluding(&mut self, relations: Vec<Relation<String>>, exclude: Vec<String>, label: &str) -> Result<()> {
        self.check_new_label(label)?;
        let mut parents: Vec<String> = vec![];
        for r in &relations {
            if let Some(to) = r.reference() {
                if to == label {
                    if !matches!(r, Relation::IsOrthogonal { .. }) {
                        return Err(Error::InvalidRelation(format!(
                            "only orthogonality may refer to the cycle itself, got {}",
                            r.name()
                        )));
                    }
                    continue;
                }
                self.node(to)?;
                if !parents.contains(to) {
                    parents.push(to.clone());
                }
            }
        }
        for x in &exclude {
            self.node(x)?;
        }
        let generation = self.generation_of(&parents);
        self.insert(label, generation, NodeDef::Relations { relations, exclude }, parents)
    }

    /// Adds the result of a subfigure whose inputs are bound to outer nodes.
    pub fn add_subfigure(&mut self, sub: Subfigure, label: &str) -> Result<()> {
        self.check_new_label(label)?;
        sub.inner.node(&sub.result)?;
        let mut parents = vec![];
        for (inner, outer) in &sub.bindings {
            let n = sub.inner.node(inner)?;
            if n.generation != 0 || !matches!(n.def, NodeDef::Explicit(_) | NodeDef::Point(_)) {
                return Err(Error::InvalidRelation(format!(
                    "subfigure input `{inner}` is not an explicit generation-0 cycle"
                )));
            }
            self.node(outer)?;
            if !parents.contains(outer) {
                parents.push(outer.clone());
            }
        }
        let generation = self.generation_of(&parents);
        self.insert(label, generation, NodeDef::Subfigure(Box::new(sub)), parents)
    }

    fn generation_of(&self, parents: &[String]) -> i32 {
        parents
            .iter()
            .map(|p| self.node(p).map(|n| n.generation).unwrap_or(0))
            .max()
            .map_or(0, |g| g + 1)
    }

    /// Replaces an explicit cycle and re-solves its descendants.
    pub fn move_cycle(&mut self, label: &str, cycle: Cycle) -> Result<()> {
        let i = *self.index.get(label).ok_or_else(|| Error::UnknownLabel(label.into()))?;
        match &mut self.nodes[i].def {
            NodeDef::Explicit(c) => *c = cycle,
            _ => return Err(Error::InvalidRelation(format!("`{label}` is not an explicit cycle"))),
        }
        self.refresh()
    }

    /// Moves a point node.
    pub fn move_point(&mut self, label: &str, point: Vec<Scalar>) -> Result<()> {
        let i = *self.index.get(label).ok_or_else(|| Error::UnknownLabel(label.into()))?;
        match &mut self.nodes[i].def {
            NodeDef::Point(p) => *p = point,
            _ => return Err(Error::InvalidRelation(format!("`{label}` is not a point"))),
        }
        self.refresh()
    }

    fn evaluate_all(&mut self) -> Result<()> {
        for i in 0..self.nodes.len() {
            self.evaluate_node(i)?;
        }
        Ok(())
    }

    fn single(&mut self, i: usize, cycle: Cycle) {
        let n = &mut self.nodes[i];
        n.instances = vec![Instance {
            cycle: cycle.to_mode(self.mode),
            lineage: Lineage::from([(n.label.clone(), 0)]),
        }];
        n.families.clear();
        n.status = NodeStatus::Solved;
    }

    /// Compatible tuples of parent instances, or the reason there are none.
    fn parent_tuples(&self, parents: &[String]) -> std::result::Result<Vec<(Lineage, Vec<usize>)>, (NodeStatus, String)> {
        let mut tuples: Vec<(Lineage, Vec<usize>)> = vec![(Lineage::new(), vec![])];
        for p in parents {
            let n = self.node(p).expect("parent exists");
            match n.status {
                NodeStatus::Pending => return Err((NodeStatus::Pending, format!("parent `{p}` is pending"))),
                NodeStatus::Parametric => {
                    return Err((NodeStatus::Pending, format!("parent `{p}` is parametric")))
                }
                NodeStatus::Infeasible => {
                    return Err((NodeStatus::Infeasible, format!("parent `{p}` is infeasible")))
                }
                NodeStatus::Solved => {}
            }
            let mut next = vec![];
            for (lin, idx) in &tuples {
                for (j, inst) in n.instances.iter().enumerate() {
                    if compatible(lin, &inst.lineage) {
                        let mut idx = idx.clone();
                        idx.push(j);
                        next.push((merge(lin, &inst.lineage), idx));
                    }
                }
            }
            tuples = next;
        }
        Ok(tuples)
    }

    fn evaluate_node(&mut self, i: usize) -> Result<()> {
        if self.frozen {
            return Ok(());
        }
        let def = self.nodes[i].def.clone();
        let dim = self.metric.dim();
        self.nodes[i].notes.clear();
        self.nodes[i].demoted = false;
        match def {
            NodeDef::RealLine => self.single(i, Cycle::real_line(dim)),
            NodeDef::Infinity => self.single(i, Cycle::infinity(dim)),
            NodeDef::Explicit(c) => self.single(i, c),
            NodeDef::Point(p) => {
                let p: Vec<Scalar> = p.iter().map(|x| x.in_mode(self.mode)).collect();
                let c = Cycle::zero_radius_at(&p, &self.metric)?;
                self.single(i, c);
            }
            NodeDef::Relations { relations, exclude } => self.evaluate_relations(i, &relations, &exclude)?,
            NodeDef::Subfigure(sub) => self.evaluate_subfigure(i, &sub)?,
        }
        Ok(())
    }

    fn finish(&mut self, i: usize, solved: Vec<(Cycle, Lineage)>, families: Vec<(Family, Lineage)>) -> Result<()> {
        let label = self.nodes[i].label.clone();
        let total = solved.len() + families.len();
        if total > self.branch_cap {
            return Err(Error::BranchOverflow {
                label,
                count: total,
                cap: self.branch_cap,
            });
        }
        let n_inst = solved.len();
        let n = &mut self.nodes[i];
        n.instances = solved
            .into_iter()
            .enumerate()
            .map(|(j, (cycle, mut lineage))| {
                lineage.insert(label.clone(), j);
                Instance { cycle, lineage }
            })
            .collect();
        n.families = families
            .into_iter()
            .enumerate()
            .map(|(j, (family, mut lineage))| {
                lineage.insert(label.clone(), n_inst + j);
                FamilyInstance { family, lineage }
            })
            .collect();
        n.status = if !n.families.is_empty() {
            NodeStatus::Parametric
        } else if n.instances.is_empty() {
            NodeStatus::Infeasible
        } else {
            NodeStatus::Solved
        };
        Ok(())
    }

    fn blocked(&mut self, i: usize, status: NodeStatus, note: String) {
        let n = &mut self.nodes[i];
        n.instances.clear();
        n.families.clear();
        n.status = status;
        n.notes.push(note);
    }

    fn evaluate_relations(&mut self, i: usize, relations: &[Relation<String>], exclude: &[String]) -> Result<()> {
        let label = self.nodes[i].label.clone();
        let parents = self.nodes[i].parents.clone();
        let tuples = match self.parent_tuples(&parents) {
            Ok(t) => t,
            Err((status, note)) => {
                self.blocked(i, status, note);
                return Ok(());
            }
        };
        let excluded: Vec<Cycle> = exclude
            .iter()
            .filter_map(|x| self.node(x).ok())
            .flat_map(|n| n.instances.iter().map(|i| i.cycle.clone()))
            .collect();
        let mut solved = vec![];
        let mut families = vec![];
        let mut notes = vec![];
        let mut demoted = false;
        for (lineage, idx) in tuples {
            let lookup = |name: &String| -> Result<Cycle> {
                let k = parents.iter().position(|p| p == name).expect("parent");
                Ok(self.node(name)?.instances[idx[k]].cycle.clone())
            };
            let mut rels = vec![];
            for r in relations {
                match r {
                    Relation::IsOrthogonal { to } if *to == label => rels.push(Relation::IsPoint),
                    _ => rels.push(r.map_ref(lookup)?),
                }
            }
            let out = relations::solve(&rels, &self.metric, self.mode)?;
            demoted |= out.demoted;
            for note in out.notes {
                if !notes.contains(&note) {
                    notes.push(note);
                }
            }
            match out.solutions {
                SolutionSet::Infeasible(_) => {}
                SolutionSet::Finite(v) => solved.extend(v.into_iter().map(|c| (c, lineage.clone()))),
                SolutionSet::Parametric { families: fs, finite } => {
                    solved.extend(finite.into_iter().map(|c| (c, lineage.clone())));
                    families.extend(fs.into_iter().map(|f| (f, lineage.clone())));
                }
            }
            if solved.len() + families.len() > self.branch_cap {
                break;
            }
        }
        let eps = self.eps.max(1e-12);
        solved.retain(|(c, _)| !excluded.iter().any(|x| x.projectively_equal(c, eps)));
        self.finish(i, solved, families)?;
        self.nodes[i].notes = notes;
        self.nodes[i].demoted = demoted;
        Ok(())
    }

    fn evaluate_subfigure(&mut self, i: usize, sub: &Subfigure) -> Result<()> {
        let parents = self.nodes[i].parents.clone();
        let tuples = match self.parent_tuples(&parents) {
            Ok(t) => t,
            Err((status, note)) => {
                self.blocked(i, status, note);
                return Ok(());
            }
        };
        let mut solved = vec![];
        for (lineage, idx) in tuples {
            let mut inner = sub.inner.clone();
            inner.metric = self.metric.clone();
            inner.mode = self.mode;
            inner.frozen = true;
            for (slot, outer) in &sub.bindings {
                let k = parents.iter().position(|p| p == outer).expect("parent");
                let c = self.node(outer)?.instances[idx[k]].cycle.clone();
                let j = inner.index[slot];
                inner.nodes[j].def = NodeDef::Explicit(c);
            }
            inner.unfreeze()?;
            let res = inner.node(&sub.result)?;
            if res.status == NodeStatus::Parametric {
                self.blocked(i, NodeStatus::Pending, "subfigure result is parametric".into());
                return Ok(());
            }
            solved.extend(res.instances.iter().map(|x| (x.cycle.clone(), lineage.clone())));
        }
        self.finish(i, solved, vec![])
    }

    fn pairs(&self, a: &str, b: &str) -> Result<(&Node, &Node)> {
        let na = self.node(a)?;
        let nb = self.node(b)?;
        for n in [na, nb] {
            if n.status == NodeStatus::Pending {
                return Err(Error::NotEvaluated(n.label.clone()));
            }
        }
        Ok((na, nb))
    }

    /// Checks `rel` between every pair of instances of `a` and `b` with
    /// compatible lineages. Orthogonality is also decided on linear
    /// families, for all parameter values at once.
    pub fn check_rel(&self, a: &str, b: &str, rel: &Relation<()>) -> Result<Vec<RelCheck>> {
        let (na, nb) = self.pairs(a, b)?;
        let mut out = vec![];
        for (ia, x) in na.instances.iter().enumerate() {
            for (ib, y) in nb.instances.iter().enumerate() {
                if compatible(&x.lineage, &y.lineage) {
                    out.push(RelCheck {
                        a: ia,
                        b: ib,
                        check: check_relation(rel, &x.cycle, &y.cycle, &self.metric, self.eps)?,
                    });
                }
            }
        }
        let fam = |n: &Node, other: &Node, swap: bool, out: &mut Vec<RelCheck>| -> Result<()> {
            for (jf, f) in n.families.iter().enumerate() {
                for (jc, c) in other.instances.iter().enumerate() {
                    if !compatible(&f.lineage, &c.lineage) {
                        continue;
                    }
                    let res = match rel {
                        Relation::IsOrthogonal { .. } => f.family.orthogonality_residual(&c.cycle, &self.metric),
                        _ => None,
                    }
                    .ok_or_else(|| Error::NotEvaluated(n.label.clone()))?;
                    let idx = n.instances.len() + jf;
                    let (a, b) = if swap { (jc, idx) } else { (idx, jc) };
                    out.push(RelCheck {
                        a,
                        b,
                        check: Check {
                            holds: small(&res, self.eps),
                            residual: res,
                            value: None,
                        },
                    });
                }
            }
            Ok(())
        };
        fam(na, nb, false, &mut out)?;
        fam(nb, na, true, &mut out)?;
        Ok(out)
    }

    /// Measures a quantity on every compatible pair of instances.
    pub fn measure(&self, a: &str, b: &str, q: Quantity) -> Result<Vec<Scalar>> {
        let (na, nb) = self.pairs(a, b)?;
        for n in [na, nb] {
            if !n.families.is_empty() {
                return Err(Error::NotEvaluated(n.label.clone()));
            }
        }
        let mut out = vec![];
        for x in &na.instances {
            for y in &nb.instances {
                if !compatible(&x.lineage, &y.lineage) {
                    continue;
                }
                let (c1, c2) = (&x.cycle, &y.cycle);
                out.push(match q {
                    Quantity::Product => c1.product(c2, &self.metric)?,
                    Quantity::NormalizedProduct | Quantity::InversiveDistance => {
                        c1.normalized_product(c2, &self.metric)?
                    }
                    Quantity::SteinerPower => relations::steiner_power(c1, c2, &self.metric)?,
                });
            }
        }
        Ok(out)
    }

    /// The figure obtained by moving every generation-0 cycle by `m`.
    pub fn transform(&self, m: &MoebiusMatrix) -> Result<Figure> {
        let mut f = self.clone();
        f.frozen = true;
        for n in f.nodes.iter_mut() {
            match &n.def {
                NodeDef::Explicit(c) => n.def = NodeDef::Explicit(m.apply_cycle(c, &self.metric)?),
                NodeDef::Point(p) => {
                    n.def = match m.apply_point(p)? {
                        PointImage::Finite(q) => NodeDef::Point(q),
                        PointImage::Infinity => NodeDef::Explicit(Cycle::infinity(p.len())),
                    }
                }
                _ => {}
            }
        }
        f.frozen = self.frozen;
        if !f.frozen {
            f.evaluate_all()?;
        }
        Ok(f)
    }
}
