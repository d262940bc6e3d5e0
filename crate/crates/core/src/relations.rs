//! Invariant relations between cycles and the solver that reduces a set of
//! them to a linear system plus at most one quadratic normalisation.
//!
//! The unknown is the coordinate vector `x = (k, l_1, .., l_n, m)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cycle::{Cycle, Metric};
use crate::error::{Error, Result};
use crate::numerics::{eps_cmp, ArithMode, Scalar, EPS_RANK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TangentSign {
    Plus,
    Minus,
    #[default]
    Both,
}

/// One condition on an unknown cycle. `R` refers to a known cycle: a
/// concrete [`Cycle`] for solving, a label in figure scripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Relation<R> {
    IsFlat,
    IsLobachevskyLine,
    IsPoint,
    IsOrthogonal {
        to: R,
    },
    IsTangent {
        to: R,
        #[serde(default)]
        sign: TangentSign,
    },
    InversiveDistance {
        to: R,
        theta: Scalar,
    },
    SteinerPower {
        to: R,
        d: Scalar,
    },
    /// Real coefficients; also pins free parameters of a family.
    OnlyReals {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        pins: Vec<Scalar>,
    },
    PassesThrough {
        point: Vec<Scalar>,
    },
}

impl<R> Relation<R> {
    pub fn reference(&self) -> Option<&R> {
        match self {
            Relation::IsOrthogonal { to }
            | Relation::IsTangent { to, .. }
            | Relation::InversiveDistance { to, .. }
            | Relation::SteinerPower { to, .. } => Some(to),
            _ => None,
        }
    }

    /// Replaces the reference with `f(reference)`.
    pub fn map_ref<S>(&self, mut f: impl FnMut(&R) -> Result<S>) -> Result<Relation<S>> {
        Ok(match self {
            Relation::IsFlat => Relation::IsFlat,
            Relation::IsLobachevskyLine => Relation::IsLobachevskyLine,
            Relation::IsPoint => Relation::IsPoint,
            Relation::IsOrthogonal { to } => Relation::IsOrthogonal { to: f(to)? },
            Relation::IsTangent { to, sign } => Relation::IsTangent {
                to: f(to)?,
                sign: *sign,
            },
            Relation::InversiveDistance { to, theta } => Relation::InversiveDistance {
                to: f(to)?,
                theta: theta.clone(),
            },
            Relation::SteinerPower { to, d } => Relation::SteinerPower {
                to: f(to)?,
                d: d.clone(),
            },
            Relation::OnlyReals { pins } => Relation::OnlyReals { pins: pins.clone() },
            Relation::PassesThrough { point } => Relation::PassesThrough {
                point: point.clone(),
            },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Relation::IsFlat => "is_flat",
            Relation::IsLobachevskyLine => "is_lobachevsky_line",
            Relation::IsPoint => "is_point",
            Relation::IsOrthogonal { .. } => "is_orthogonal",
            Relation::IsTangent { .. } => "is_tangent",
            Relation::InversiveDistance { .. } => "inversive_distance",
            Relation::SteinerPower { .. } => "steiner_power",
            Relation::OnlyReals { .. } => "only_reals",
            Relation::PassesThrough { .. } => "passes_through",
        }
    }
}

/// `<x, y>` on coordinate vectors `(k, l.., m)`.
pub fn bilinear(x: &[Scalar], y: &[Scalar], metric: &Metric) -> Scalar {
    let n = x.len() - 1;
    let mut s = &x[0] * &y[n] + &x[n] * &y[0];
    for (i, p) in metric.product_signs().iter().enumerate() {
        if *p != 0 {
            s += &(Scalar::int(2 * *p as i64) * &x[i + 1] * &y[i + 1]);
        }
    }
    s
}

/// Row `a` with `a . x = <x, c>`.
fn product_row(c: &Cycle, metric: &Metric) -> Vec<Scalar> {
    let mut a = vec![c.m().clone()];
    for (li, p) in c.l().iter().zip(metric.product_signs()) {
        a.push(li * &Scalar::int(2 * *p as i64));
    }
    a.push(c.k().clone());
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<Scalar>,
    pub rhs: Scalar,
}

/// Linear rows of one relation with the self-product demand `<x,x> = s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearized {
    pub rows: Vec<LinearRow>,
    pub demand: Option<Scalar>,
}

fn unit_row(len: usize, i: usize) -> Vec<Scalar> {
    let mut a = vec![Scalar::zero(); len];
    a[i] = Scalar::one();
    a
}

/// Linearises a single relation against a unknown with `<x,x> = +-1`
/// (`+` sign for `Both`).
pub fn linearize(rel: &Relation<Cycle>, metric: &Metric) -> Result<Linearized> {
    let len = metric.dim() + 2;
    let row = |coeffs, rhs| LinearRow { coeffs, rhs };
    Ok(match rel {
        Relation::IsFlat => Linearized {
            rows: vec![row(unit_row(len, 0), Scalar::zero())],
            demand: None,
        },
        Relation::IsLobachevskyLine => Linearized {
            rows: vec![row(product_row(&Cycle::real_line(metric.dim()), metric), Scalar::zero())],
            demand: None,
        },
        Relation::IsPoint => Linearized {
            rows: vec![],
            demand: Some(Scalar::zero()),
        },
        Relation::IsOrthogonal { to } => Linearized {
            rows: vec![row(product_row(to, metric), Scalar::zero())],
            demand: None,
        },
        Relation::PassesThrough { point } => {
            let z = Cycle::zero_radius_at(point, metric)?;
            Linearized {
                rows: vec![row(product_row(&z, metric), Scalar::zero())],
                demand: None,
            }
        }
        Relation::OnlyReals { .. } => Linearized {
            rows: vec![],
            demand: None,
        },
        Relation::IsTangent { to, sign } => {
            let n = to.self_product(metric)?;
            let eps = if *sign == TangentSign::Minus { -1 } else { 1 };
            Linearized {
                rows: vec![row(product_row(to, metric), n.sqrt_abs() * Scalar::int(eps))],
                demand: Some(Scalar::int(n.sign() as i64)),
            }
        }
        Relation::InversiveDistance { to, theta } => {
            let n = to.self_product(metric)?;
            Linearized {
                rows: vec![row(product_row(to, metric), n.sqrt_abs() * theta)],
                demand: Some(Scalar::int(n.sign() as i64)),
            }
        }
        Relation::SteinerPower { to, d } => {
            let t = to.k_normalized()?;
            let n = t.self_product(metric)?;
            let mut a = product_row(&t, metric);
            a[0] = &a[0] - d;
            Linearized {
                rows: vec![row(a, -n.sqrt_abs())],
                demand: Some(Scalar::int(n.sign() as i64)),
            }
        }
    })
}

/// Outcome of checking a relation on two concrete cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub holds: bool,
    pub residual: Scalar,
    /// Measured quantity (inversive distance or Steiner power) if any.
    pub value: Option<Scalar>,
}

pub(crate) fn small(x: &Scalar, eps: f64) -> bool {
    if x.is_exact() {
        x.is_zero()
    } else {
        x.to_f64().abs() <= eps
    }
}

/// Evaluates the defining identity of `rel` for `c1` against `c2` (the
/// reference, ignored for unary relations).
pub fn check_relation(rel: &Relation<()>, c1: &Cycle, c2: &Cycle, metric: &Metric, eps: f64) -> Result<Check> {
    let a = c1.canonical();
    let b = c2.canonical();
    let plain = |residual: Scalar| Check {
        holds: small(&residual, eps),
        residual,
        value: None,
    };
    Ok(match rel {
        Relation::IsFlat => plain(a.k().clone()),
        Relation::IsLobachevskyLine => plain(a.product(&Cycle::real_line(a.dim()), metric)?),
        Relation::IsPoint => plain(a.self_product(metric)?),
        Relation::IsOrthogonal { .. } => plain(a.product(&b, metric)?),
        Relation::PassesThrough { point } => plain(a.point_residual(point, metric)?),
        Relation::OnlyReals { .. } => plain(Scalar::zero()),
        Relation::IsTangent { .. } => {
            let p = a.product(&b, metric)?;
            plain(&p * &p - a.self_product(metric)? * b.self_product(metric)?)
        }
        Relation::InversiveDistance { theta, .. } => {
            let v = a.normalized_product(&b, metric)?;
            let mut c = plain(v.abs() - theta.abs());
            c.value = Some(v);
            c
        }
        Relation::SteinerPower { d, .. } => {
            let v = steiner_power(c1, c2, metric)?;
            let mut c = plain(&v - d);
            c.value = Some(v);
            c
        }
    })
}

/// `<C, C~> + sqrt|<C,C>| sqrt|<C~,C~>|` for k-normalised cycles.
pub fn steiner_power(c1: &Cycle, c2: &Cycle, metric: &Metric) -> Result<Scalar> {
    let a = c1.k_normalized()?;
    let b = c2.k_normalized()?;
    let root = (a.self_product(metric)? * b.self_product(metric)?).sqrt_abs();
    Ok(a.product(&b, metric)? + root)
}

/// A solution family `particular + span(basis)` (projective span when
/// `particular` is `None`), possibly cut by `<x,x> = quadratic`.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub particular: Option<Vec<Scalar>>,
    pub basis: Vec<Vec<Scalar>>,
    pub quadratic: Option<Scalar>,
}

impl Family {
    /// Number of free parameters.
    pub fn dimension(&self) -> usize {
        let free = match self.particular {
            Some(_) => self.basis.len(),
            None => self.basis.len().saturating_sub(1),
        };
        free.saturating_sub(usize::from(self.quadratic.is_some()))
    }

    /// Sum of `|<x, c>|` over the spanning vectors (canonically scaled).
    /// It vanishes iff every member of the family is orthogonal to `c`.
    /// Families cut by a quadratic are not linear, so `None` is returned.
    pub fn orthogonality_residual(&self, c: &Cycle, metric: &Metric) -> Option<Scalar> {
        if self.quadratic.is_some() {
            return None;
        }
        let row = product_row(&c.canonical(), metric);
        let mut total = Scalar::zero();
        for x in self.particular.iter().chain(&self.basis) {
            let x = normalize_vec(x);
            let mut s = Scalar::zero();
            for (a, b) in row.iter().zip(&x) {
                s += &(a * b);
            }
            total += &s.abs();
        }
        Some(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSet {
    Finite(Vec<Cycle>),
    Parametric { families: Vec<Family>, finite: Vec<Cycle> },
    Infeasible(String),
}

impl SolutionSet {
    pub fn instances(&self) -> &[Cycle] {
        match self {
            SolutionSet::Finite(v) => v,
            SolutionSet::Parametric { finite, .. } => finite,
            SolutionSet::Infeasible(_) => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solutions: SolutionSet,
    /// Exact solve fell back to floating point.
    pub demoted: bool,
    pub notes: Vec<String>,
}

/// Scales a coordinate vector so that its first nonzero entry is 1.
fn normalize_vec(x: &[Scalar]) -> Vec<Scalar> {
    match x.iter().find(|v| !v.is_zero()) {
        Some(lead) => {
            let inv = lead.recip().expect("nonzero");
            x.iter().map(|v| v * &inv).collect()
        }
        None => x.to_vec(),
    }
}

#[derive(Debug)]
enum Fallback {
    NeedFloat,
    Fail(Error),
}

impl From<Error> for Fallback {
    fn from(e: Error) -> Fallback {
        match e {
            Error::QuadRadicand => Fallback::NeedFloat,
            other => Fallback::Fail(other),
        }
    }
}

type Step<T> = std::result::Result<T, Fallback>;

fn exact_sqrt(x: &Scalar, exact: bool) -> Step<Scalar> {
    match x.sqrt_in_field() {
        Some(r) if !exact || r.is_exact() => Ok(r),
        _ if exact => Err(Fallback::NeedFloat),
        _ => Ok(Scalar::Float(x.to_f64().max(0.0).sqrt())),
    }
}

/// Relations prepared for branching: fixed rows plus signed rows whose
/// right-hand side is `eps * magnitude`.
struct Prepared {
    fixed: Vec<LinearRow>,
    signed: Vec<(Vec<Scalar>, Scalar, TangentSign)>,
    quadratic: Option<Scalar>,
    pins: Option<Vec<Scalar>>,
    notes: Vec<String>,
}

fn prepare(rels: &[Relation<Cycle>], metric: &Metric, exact: bool) -> Step<Prepared> {
    let len = metric.dim() + 2;
    let is_point = rels.iter().any(|r| matches!(r, Relation::IsPoint));
    let mut p = Prepared {
        fixed: vec![],
        signed: vec![],
        quadratic: is_point.then(Scalar::zero),
        pins: None,
        notes: vec![],
    };
    // Normalising scale c = |<C~,C~>| of the first reference.
    let mut norm: Option<(i8, Scalar)> = None;
    let mut demand_sign = |n: &Scalar, notes: &mut Vec<String>| -> Step<Scalar> {
        let s = n.sign();
        match &norm {
            None => {
                norm = Some((s, n.abs()));
                Ok(n.abs())
            }
            Some((s0, c)) => {
                if *s0 != s {
                    notes.push("references with opposite self-product signs".into());
                    return Err(Fallback::Fail(Error::Degenerate("sign conflict".into())));
                }
                Ok(c.clone())
            }
        }
    };
    for rel in rels {
        match rel {
            Relation::IsFlat => p.fixed.push(LinearRow {
                coeffs: unit_row(len, 0),
                rhs: Scalar::zero(),
            }),
            Relation::IsLobachevskyLine => p.fixed.push(LinearRow {
                coeffs: product_row(&Cycle::real_line(metric.dim()), metric),
                rhs: Scalar::zero(),
            }),
            Relation::IsPoint => {}
            Relation::OnlyReals { pins } => p.pins = Some(pins.clone()),
            Relation::IsOrthogonal { to } => p.fixed.push(LinearRow {
                coeffs: product_row(to, metric),
                rhs: Scalar::zero(),
            }),
            Relation::PassesThrough { point } => {
                let z = Cycle::zero_radius_at(point, metric)?;
                p.fixed.push(LinearRow {
                    coeffs: product_row(&z, metric),
                    rhs: Scalar::zero(),
                });
            }
            Relation::IsTangent { to, .. } | Relation::InversiveDistance { to, .. } => {
                let n = to.self_product(metric)?;
                if is_point || n.is_zero() {
                    if n.is_zero() {
                        p.notes.push(format!(
                            "{} to a zero-radius cycle treated as orthogonality",
                            rel.name()
                        ));
                    }
                    p.fixed.push(LinearRow {
                        coeffs: product_row(to, metric),
                        rhs: Scalar::zero(),
                    });
                    continue;
                }
                let c = demand_sign(&n, &mut p.notes)?;
                let mag = exact_sqrt(&(&c * &n.abs()), exact)?;
                match rel {
                    Relation::IsTangent { sign, .. } => {
                        p.signed.push((product_row(to, metric), mag, *sign))
                    }
                    Relation::InversiveDistance { theta, .. } => p.fixed.push(LinearRow {
                        coeffs: product_row(to, metric),
                        rhs: mag * theta,
                    }),
                    _ => unreachable!(),
                }
            }
            Relation::SteinerPower { to, d } => {
                let t = to.k_normalized()?;
                let n = t.self_product(metric)?;
                let mut a = product_row(&t, metric);
                a[0] = &a[0] - d;
                if is_point || n.is_zero() {
                    p.fixed.push(LinearRow {
                        coeffs: a,
                        rhs: Scalar::zero(),
                    });
                    continue;
                }
                let c = demand_sign(&n, &mut p.notes)?;
                let mag = exact_sqrt(&(&c * &n.abs()), exact)?;
                p.fixed.push(LinearRow { coeffs: a, rhs: -mag });
            }
        }
    }
    if !is_point {
        if let Some((s, c)) = norm {
            p.quadratic = Some(Scalar::int(s as i64) * c);
        }
    }
    Ok(p)
}

/// Reduced system: particular solution (if consistent) and nullspace basis.
struct Reduced {
    particular: Vec<Scalar>,
    basis: Vec<Vec<Scalar>>,
    homogeneous: bool,
}

fn scale_of(rows: &[LinearRow]) -> f64 {
    rows.iter()
        .flat_map(|r| r.coeffs.iter().chain(std::iter::once(&r.rhs)))
        .map(|x| x.to_f64().abs())
        .fold(1.0, f64::max)
}

/// Gaussian elimination; `None` when the rows are inconsistent.
fn reduce(rows: &[LinearRow], len: usize, exact: bool) -> Option<Reduced> {
    let scale = scale_of(rows);
    let zero = |x: &Scalar| {
        if exact {
            x.is_zero()
        } else {
            x.to_f64().abs() <= eps_cmp() * scale
        }
    };
    let mut m: Vec<Vec<Scalar>> = rows
        .iter()
        .map(|r| {
            let mut v = r.coeffs.clone();
            v.push(r.rhs.clone());
            v
        })
        .collect();
    let homogeneous = rows.iter().all(|r| zero(&r.rhs));
    let mut pivots: Vec<usize> = vec![];
    let mut row = 0;
    for col in 0..len {
        if row >= m.len() {
            break;
        }
        let pick = if exact {
            (row..m.len()).find(|&i| !m[i][col].is_zero())
        } else {
            (row..m.len())
                .max_by(|&i, &j| {
                    m[i][col]
                        .to_f64()
                        .abs()
                        .partial_cmp(&m[j][col].to_f64().abs())
                        .unwrap_or(Ordering::Equal)
                })
                .filter(|&i| {
                    let norm = m[i][..len].iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
                    m[i][col].to_f64().abs() > EPS_RANK * norm.max(1.0)
                })
        };
        let Some(p) = pick else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip().ok()?;
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..=len {
                    let v = &m[i][j] - &(&f * &m[row][j]);
                    m[i][j] = if !exact && zero(&v) { Scalar::Float(0.0) } else { v };
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| !zero(&r[len])) {
        return None;
    }
    let mut particular = vec![Scalar::zero(); len];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = m[i][len].clone();
    }
    let mut basis = vec![];
    for free in (0..len).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Scalar::zero(); len];
        v[free] = Scalar::one();
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = -&m[i][free];
        }
        basis.push(v);
    }
    if !exact {
        particular = particular.into_iter().map(|x| x.to_float()).collect();
    }
    Some(Reduced {
        particular,
        basis,
        homogeneous,
    })
}

/// Basis of the solutions of `rows · x = 0`.
pub(crate) fn nullspace(rows: &[Vec<Scalar>], len: usize) -> Vec<Vec<Scalar>> {
    let exact = rows.iter().flatten().all(Scalar::is_exact);
    let rows: Vec<LinearRow> = rows
        .iter()
        .map(|r| LinearRow {
            coeffs: r.clone(),
            rhs: Scalar::zero(),
        })
        .collect();
    reduce(&rows, len, exact).expect("homogeneous rows are consistent").basis
}

/// Rank of a set of vectors; exact when every entry is exact.
pub(crate) fn rank(vectors: &[Vec<Scalar>]) -> usize {
    let Some(len) = vectors.first().map(Vec::len) else { return 0 };
    let exact = vectors.iter().flatten().all(Scalar::is_exact);
    let rows: Vec<LinearRow> = (0..len)
        .map(|j| LinearRow {
            coeffs: vectors.iter().map(|v| v[j].clone()).collect(),
            rhs: Scalar::zero(),
        })
        .collect();
    let red = reduce(&rows, vectors.len(), exact).expect("homogeneous rows are consistent");
    vectors.len() - red.basis.len()
}

fn axpy(x: &[Scalar], t: &Scalar, y: &[Scalar]) -> Vec<Scalar> {
    x.iter().zip(y).map(|(a, b)| a + &(t * b)).collect()
}

/// Real roots of `a t^2 + 2 b t + c = 0` (`a != 0`).
fn quad_roots(a: &Scalar, b: &Scalar, c: &Scalar, exact: bool) -> Step<Vec<Scalar>> {
    let mut disc = b * b - a * c;
    if !exact {
        let size = (b * b).to_f64().abs() + (a * c).to_f64().abs();
        if disc.to_f64().abs() <= 1e-9 * size {
            disc = Scalar::Float(0.0);
        }
    }
    match disc.sign() {
        -1 => Ok(vec![]),
        0 => Ok(vec![(-b).checked_div(a)?]),
        _ => {
            let r = exact_sqrt(&disc, exact)?;
            Ok(vec![(-b + &r).checked_div(a)?, (-b - r).checked_div(a)?])
        }
    }
}

enum Branch {
    Points(Vec<Vec<Scalar>>),
    Family(Family),
}

fn solve_reduced(red: Reduced, quad: &Option<Scalar>, metric: &Metric, exact: bool) -> Step<Branch> {
    let q = |x: &[Scalar], y: &[Scalar]| bilinear(x, y, metric);
    let r = red.basis.len();
    let family = |quadratic: Option<Scalar>| Branch::Family(Family {
        particular: (!red.homogeneous).then(|| red.particular.clone()),
        basis: red.basis.clone(),
        quadratic,
    });
    let nonzero = |x: &Scalar| if exact { !x.is_zero() } else { x.to_f64().abs() > eps_cmp() };
    Ok(match (red.homogeneous, quad) {
        (true, None) => match r {
            0 => Branch::Points(vec![]),
            1 => Branch::Points(vec![red.basis[0].clone()]),
            _ => family(None),
        },
        (false, None) => match r {
            0 => Branch::Points(vec![red.particular.clone()]),
            _ => family(None),
        },
        (true, Some(s)) if s.is_zero() => {
            let n = &red.basis;
            match r {
                0 => Branch::Points(vec![]),
                1 => Branch::Points(if nonzero(&q(&n[0], &n[0])) { vec![] } else { vec![n[0].clone()] }),
                2 => {
                    let (g11, g12, g22) = (q(&n[0], &n[0]), q(&n[0], &n[1]), q(&n[1], &n[1]));
                    let mut pts = vec![];
                    if nonzero(&g11) {
                        for t in quad_roots(&g11, &g12, &g22, exact)? {
                            pts.push(axpy(&n[1], &t, &n[0]));
                        }
                    } else {
                        pts.push(n[0].clone());
                        if nonzero(&g12) {
                            let t = (-&g22).checked_div(&(Scalar::int(2) * &g12))?;
                            pts.push(axpy(&n[1], &t, &n[0]));
                        } else if !nonzero(&g22) {
                            return Ok(family(Some(s.clone())));
                        }
                    }
                    Branch::Points(pts)
                }
                _ => family(Some(s.clone())),
            }
        }
        (true, Some(s)) => match r {
            0 => Branch::Points(vec![]),
            1 => {
                let g = q(&red.basis[0], &red.basis[0]);
                let ok = g.sign() == s.sign() && nonzero(&g);
                Branch::Points(if ok { vec![red.basis[0].clone()] } else { vec![] })
            }
            _ => family(Some(s.clone())),
        },
        (false, Some(s)) => {
            let x0 = &red.particular;
            match r {
                0 => {
                    let ok = !nonzero(&(q(x0, x0) - s));
                    Branch::Points(if ok { vec![x0.clone()] } else { vec![] })
                }
                1 => {
                    let n = &red.basis[0];
                    let a = q(n, n);
                    let b = q(x0, n);
                    let c = q(x0, x0) - s;
                    if nonzero(&a) {
                        let roots = quad_roots(&a, &b, &c, exact)?;
                        Branch::Points(roots.iter().map(|t| axpy(x0, t, n)).collect())
                    } else if nonzero(&b) {
                        let t = (-c).checked_div(&(Scalar::int(2) * &b))?;
                        Branch::Points(vec![axpy(x0, &t, n)])
                    } else if nonzero(&c) {
                        Branch::Points(vec![])
                    } else {
                        family(Some(s.clone()))
                    }
                }
                _ => family(Some(s.clone())),
            }
        }
    })
}

fn pad(pins: &[Scalar], n: usize) -> Vec<Scalar> {
    (0..n).map(|i| pins.get(i).cloned().unwrap_or_else(Scalar::zero)).collect()
}

fn combine(base: &[Scalar], coefs: &[Scalar], basis: &[Vec<Scalar>]) -> Vec<Scalar> {
    let mut x = base.to_vec();
    for (t, v) in coefs.iter().zip(basis) {
        x = axpy(&x, t, v);
    }
    x
}

/// Picks concrete members of a family using the pins of `OnlyReals`.
fn pin_family(f: &Family, pins: &[Scalar], metric: &Metric, exact: bool) -> Step<Option<Vec<Vec<Scalar>>>> {
    let q = |x: &[Scalar], y: &[Scalar]| bilinear(x, y, metric);
    // Homogeneous families are pinned in the chart x = N_1 + sum t_i N_{i+1}.
    let (x0, basis) = match &f.particular {
        Some(p) => (p.clone(), f.basis.clone()),
        None => match f.basis.split_first() {
            Some((first, rest)) => (first.clone(), rest.to_vec()),
            None => return Ok(None),
        },
    };
    let r = basis.len();
    let Some(s) = &f.quadratic else {
        return Ok(Some(vec![combine(&x0, &pad(pins, r), &basis)]));
    };
    if r == 0 {
        return Ok(None);
    }
    if f.particular.is_none() && !s.is_zero() {
        let y = combine(&x0, &pad(pins, r), &basis);
        let ok = q(&y, &y).sign() == s.sign();
        return Ok(ok.then(|| vec![y]));
    }
    // Base point: fix t_2.. to a candidate and solve for t_1.
    let rest_dir = combine(&vec![Scalar::zero(); x0.len()], &vec![Scalar::one(); r - 1], &basis[1..]);
    let mut base: Option<Vec<Scalar>> = None;
    for cand in [0i64, 1, -1, 2, -2, 3, -3] {
        let y = axpy(&x0, &Scalar::int(cand), &rest_dir);
        let n1 = &basis[0];
        let (a, b, c) = (q(n1, n1), q(&y, n1), q(&y, &y) - s);
        let roots = if !a.is_zero() {
            quad_roots(&a, &b, &c, exact)?
        } else if !b.is_zero() {
            vec![(-c).checked_div(&(Scalar::int(2) * &b))?]
        } else {
            vec![]
        };
        let pick = roots
            .iter()
            .find(|t| t.as_rational().is_some())
            .or(roots.first());
        if let Some(t) = pick {
            let cand_pt = axpy(&y, t, n1);
            let rational = t.as_rational().is_some();
            if rational || base.is_none() {
                base = Some(cand_pt);
            }
            if rational {
                break;
            }
        }
    }
    let Some(xb) = base else { return Ok(None) };
    let mut dir_coefs = vec![Scalar::one()];
    dir_coefs.extend(pad(pins, r - 1));
    let nd = combine(&vec![Scalar::zero(); x0.len()], &dir_coefs, &basis);
    let qd = q(&nd, &nd);
    if qd.is_zero() {
        return Ok(Some(vec![xb]));
    }
    let lambda = (Scalar::int(-2) * q(&xb, &nd)).checked_div(&qd)?;
    let second = axpy(&xb, &lambda, &nd);
    Ok(Some(vec![xb, second]))
}

fn solve_in(rels: &[Relation<Cycle>], metric: &Metric, exact: bool) -> Step<SolveOutcome> {
    let len = metric.dim() + 2;
    let prep = match prepare(rels, metric, exact) {
        Ok(p) => p,
        Err(Fallback::Fail(Error::Degenerate(msg))) => {
            return Ok(SolveOutcome {
                solutions: SolutionSet::Infeasible(msg),
                demoted: false,
                notes: vec![],
            })
        }
        Err(e) => return Err(e),
    };
    let both: Vec<usize> = prep
        .signed
        .iter()
        .enumerate()
        .filter(|(_, s)| s.2 == TangentSign::Both)
        .map(|(i, _)| i)
        .collect();
    let mut points: Vec<Vec<Scalar>> = vec![];
    let mut families: Vec<Family> = vec![];
    let mut consistent = false;
    for mask in 0..(1u64 << both.len()) {
        let mut rows = prep.fixed.clone();
        for (i, (a, mag, sign)) in prep.signed.iter().enumerate() {
            let eps = match sign {
                TangentSign::Plus => 1,
                TangentSign::Minus => -1,
                TangentSign::Both => {
                    let bit = both.iter().position(|&j| j == i).expect("both index");
                    if mask >> bit & 1 == 1 {
                        -1
                    } else {
                        1
                    }
                }
            };
            rows.push(LinearRow {
                coeffs: a.clone(),
                rhs: mag * &Scalar::int(eps),
            });
        }
        let Some(red) = reduce(&rows, len, exact) else { continue };
        consistent = true;
        match solve_reduced(red, &prep.quadratic, metric, exact)? {
            Branch::Points(p) => points.extend(p),
            Branch::Family(f) => match &prep.pins {
                Some(pins) => match pin_family(&f, pins, metric, exact)? {
                    Some(p) => points.extend(p),
                    None => families.push(f),
                },
                None => families.push(f),
            },
        }
    }
    if exact && points.iter().flatten().any(Scalar::is_float) {
        return Err(Fallback::NeedFloat);
    }
    let mut cycles: Vec<Cycle> = vec![];
    for p in points {
        let Ok(c) = Cycle::from_coords(&p) else { continue };
        let c = c.canonical();
        if !cycles.iter().any(|d| d.projectively_equal(&c, eps_cmp().sqrt().min(1e-6))) {
            cycles.push(c);
        }
    }
    cycles.sort_by(|a, b| a.canonical_cmp(b));
    let solutions = if !families.is_empty() {
        SolutionSet::Parametric {
            families,
            finite: cycles,
        }
    } else if cycles.is_empty() {
        SolutionSet::Infeasible(if consistent {
            "no real solution".into()
        } else {
            "rank conflict".into()
        })
    } else {
        SolutionSet::Finite(cycles)
    };
    Ok(SolveOutcome {
        solutions,
        demoted: false,
        notes: prep.notes,
    })
}

fn rel_to_float(r: &Relation<Cycle>) -> Relation<Cycle> {
    let f = |x: &Scalar| x.to_float();
    let mut r = r
        .map_ref(|c| Ok(c.to_mode(ArithMode::Float)))
        .expect("infallible");
    match &mut r {
        Relation::InversiveDistance { theta, .. } => *theta = f(theta),
        Relation::SteinerPower { d, .. } => *d = f(d),
        Relation::OnlyReals { pins } => *pins = pins.iter().map(f).collect(),
        Relation::PassesThrough { point } => *point = point.iter().map(f).collect(),
        _ => {}
    }
    r
}

/// Solves for all cycles satisfying `rels`. Exact mode falls back to
/// floating point (flagged in the outcome) when a second radical appears.
pub fn solve(rels: &[Relation<Cycle>], metric: &Metric, mode: ArithMode) -> Result<SolveOutcome> {
    for r in rels {
        if let Some(c) = r.reference() {
            if c.dim() != metric.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "reference of dimension {} in a {}-dimensional metric",
                    c.dim(),
                    metric.dim()
                )));
            }
        }
    }
    let exact_inputs = rels.iter().all(|r| {
        let c_ok = r.reference().map_or(true, Cycle::is_exact);
        let s_ok = match r {
            Relation::InversiveDistance { theta, .. } => theta.is_exact(),
            Relation::SteinerPower { d, .. } => d.is_exact(),
            Relation::PassesThrough { point } => point.iter().all(Scalar::is_exact),
            _ => true,
        };
        c_ok && s_ok
    });
    let float_rels = || rels.iter().map(rel_to_float).collect::<Vec<_>>();
    let run_float = |demoted: bool| -> Result<SolveOutcome> {
        match solve_in(&float_rels(), metric, false) {
            Ok(mut o) => {
                o.demoted = demoted;
                if demoted {
                    o.notes.push("exact solve demoted to floating point".into());
                }
                Ok(o)
            }
            Err(Fallback::Fail(e)) => Err(e),
            Err(Fallback::NeedFloat) => Err(Error::Degenerate("float solve failed".into())),
        }
    };
    match mode {
        ArithMode::Float => run_float(false),
        ArithMode::Exact if !exact_inputs => run_float(true),
        ArithMode::Exact => match solve_in(rels, metric, true) {
            Ok(o) => Ok(o),
            Err(Fallback::NeedFloat) => run_float(true),
            Err(Fallback::Fail(e)) => Err(e),
        },
    }
}
