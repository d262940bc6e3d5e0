//! Conformal nine-point cycle of a triangle.
//!
//! "Lines" are cycles through a fixed point N (infinity by default) and
//! midpoints are cut out by the perpendicular bisector built from the
//! diameter cycle.

use super::{Figure, NodeStatus, INFINITY};
use crate::cycle::{Cycle, Metric};
use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::relations::Relation;

#[derive(Debug, Clone, PartialEq)]
pub struct NinePoint {
    pub figure: Figure,
    /// The cycle through the three feet of altitudes.
    pub conic: Cycle,
    /// Incidence of each of the nine points with the conic.
    pub incidences: Vec<(String, bool)>,
}

impl NinePoint {
    pub fn verdict(&self) -> bool {
        self.incidences.iter().all(|(_, ok)| *ok)
    }
}

fn orth(to: &str) -> Relation<String> {
    Relation::IsOrthogonal { to: to.into() }
}

fn sub(x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn dot(x: &[Scalar], y: &[Scalar], metric: &Metric) -> Scalar {
    let mut s = Scalar::zero();
    for ((a, b), q) in x.iter().zip(y).zip(metric.squares()) {
        s -= &(a * b * Scalar::int(q as i64));
    }
    s
}

fn check_triangle(p: &[Vec<Scalar>; 3], metric: &Metric) -> Result<()> {
    let sides = [sub(&p[1], &p[0]), sub(&p[2], &p[1]), sub(&p[0], &p[2])];
    let cross = &sides[0][0] * &sides[1][1] - &sides[0][1] * &sides[1][0];
    if cross.is_zero_tol(0.0) {
        return Err(Error::Degenerate("collinear vertices".into()));
    }
    for (i, s) in sides.iter().enumerate() {
        if dot(s, s, metric).is_zero_tol(0.0) {
            return Err(Error::Degenerate(format!("side {i} is light-like")));
        }
        if dot(s, &sides[(i + 1) % 3], metric).is_zero_tol(0.0) {
            return Err(Error::Degenerate("right angle".into()));
        }
    }
    Ok(())
}

/// Builds the whole construction in `metric` and checks the six
/// incidences not used to define the conic.
pub fn nine_point_figure(vertices: [Vec<Scalar>; 3], n: Option<Vec<Scalar>>, metric: Metric) -> Result<NinePoint> {
    if metric.dim() != 2 || metric.has_nilpotent() {
        return Err(Error::MetricUnsupported("nine-point construction needs a 2D e or h metric".into()));
    }
    for v in &vertices {
        if v.len() != 2 {
            return Err(Error::DimensionMismatch("vertex".into()));
        }
    }
    check_triangle(&vertices, &metric)?;
    let mut f = Figure::new(metric);
    f.freeze();
    let [a, b, c] = vertices;
    f.add_point(a, "A")?;
    f.add_point(b, "B")?;
    f.add_point(c, "C")?;
    let nl = match n {
        Some(p) => {
            f.add_point(p, "N")?;
            "N"
        }
        None => INFINITY,
    };
    let through = |f: &mut Figure, x: &str, y: &str, label: &str| f.add_cycle_rel(vec![orth(x), orth(y), orth(nl)], label);
    let point_on = |f: &mut Figure, x: &str, y: &str, label: &str| {
        f.add_cycle_rel_excluding(vec![orth(label), orth(x), orth(y)], vec![nl.to_string()], label)
    };
    through(&mut f, "A", "B", "AB")?;
    through(&mut f, "B", "C", "BC")?;
    through(&mut f, "C", "A", "CA")?;
    for (v, side, alt) in [("A", "BC", "hA"), ("B", "CA", "hB"), ("C", "AB", "hC")] {
        f.add_cycle_rel(vec![orth(side), orth(v), orth(nl)], alt)?;
    }
    point_on(&mut f, "BC", "hA", "Fa")?;
    point_on(&mut f, "CA", "hB", "Fb")?;
    point_on(&mut f, "AB", "hC", "Fc")?;
    point_on(&mut f, "hA", "hB", "H")?;
    let mids = [
        ("A", "B", "AB", "Mc"),
        ("B", "C", "BC", "Ma"),
        ("C", "A", "CA", "Mb"),
        ("A", "H", "hA", "Ka"),
        ("B", "H", "hB", "Kb"),
        ("C", "H", "hC", "Kc"),
    ];
    for (x, y, line, m) in mids {
        let d = format!("{m}_diam");
        let p = format!("{m}_bis");
        f.add_cycle_rel(vec![orth(x), orth(y), orth(line)], &d)?;
        f.add_cycle_rel(vec![orth(line), orth(&d), orth(nl)], &p)?;
        point_on(&mut f, line, &p, m)?;
    }
    f.add_cycle_rel(vec![orth("Fa"), orth("Fb"), orth("Fc")], "nine")?;
    f.unfreeze()?;
    for node in f.nodes() {
        if node.status != NodeStatus::Solved || node.instances.len() != 1 {
            return Err(Error::Degenerate(format!("node `{}` is not a single cycle", node.label)));
        }
    }
    let conic = f.instances("nine")?.remove(0);
    let mut incidences = vec![];
    for p in ["Fa", "Fb", "Fc", "Ma", "Mb", "Mc", "Ka", "Kb", "Kc"] {
        let r = f.check_rel("nine", p, &Relation::IsOrthogonal { to: () })?;
        incidences.push((p.to_string(), r[0].check.holds));
    }
    Ok(NinePoint {
        figure: f,
        conic,
        incidences,
    })
}
