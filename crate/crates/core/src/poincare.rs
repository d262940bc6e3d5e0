//! Real SL2 acting on the projective real line, interval cycles, the
//! invariant pairings on R^4 and the extension of the real line to the
//! elliptic, parabolic and hyperbolic upper half-planes.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::relations::nullspace;

/// A point of the projective real line.
#[derive(Debug, Clone, PartialEq)]
pub enum RealPoint {
    Finite(Scalar),
    Infinity,
}

impl RealPoint {
    pub fn int(n: i64) -> RealPoint {
        RealPoint::Finite(Scalar::int(n))
    }

    /// Homogeneous coordinates `[x:1]` or `[1:0]`.
    pub fn homogeneous(&self) -> (Scalar, Scalar) {
        match self {
            RealPoint::Finite(x) => (x.clone(), Scalar::one()),
            RealPoint::Infinity => (Scalar::one(), Scalar::zero()),
        }
    }

    pub fn from_homogeneous(x1: &Scalar, x2: &Scalar) -> Result<RealPoint> {
        if x2.is_zero() {
            if x1.is_zero() {
                return Err(Error::Degenerate("zero homogeneous vector".into()));
            }
            Ok(RealPoint::Infinity)
        } else {
            Ok(RealPoint::Finite(x1.checked_div(x2)?))
        }
    }

    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            RealPoint::Finite(x) => Some(x),
            RealPoint::Infinity => None,
        }
    }

    pub fn same(&self, other: &RealPoint) -> bool {
        match (self, other) {
            (RealPoint::Finite(a), RealPoint::Finite(b)) => (a - b).is_zero(),
            (RealPoint::Infinity, RealPoint::Infinity) => true,
            _ => false,
        }
    }
}

impl fmt::Display for RealPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealPoint::Finite(x) => write!(f, "{x}"),
            RealPoint::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for RealPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<RealPoint> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(RealPoint::Infinity),
            t => Ok(RealPoint::Finite(Scalar::parse_exact(t)?)),
        }
    }
}

fn hdet(a: &RealPoint, b: &RealPoint) -> Scalar {
    let (a1, a2) = a.homogeneous();
    let (b1, b2) = b.homogeneous();
    a1 * b2 - b1 * a2
}

/// +1 for a positively oriented triple, -1 for a negative one and 0 if
/// two points coincide. Infinity counts as larger than every real.
pub fn orientation(x1: &RealPoint, x2: &RealPoint, x3: &RealPoint) -> i8 {
    (hdet(x1, x2) * hdet(x2, x3) * hdet(x3, x1)).sign()
}

/// A real 2x2 matrix with nonzero determinant, acting projectively.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2 {
    e: [Scalar; 4],
}

fn mul2(p: &[Scalar; 4], q: &[Scalar; 4]) -> [Scalar; 4] {
    [
        &p[0] * &q[0] + &p[1] * &q[2],
        &p[0] * &q[1] + &p[1] * &q[3],
        &p[2] * &q[0] + &p[3] * &q[2],
        &p[2] * &q[1] + &p[3] * &q[3],
    ]
}

impl Sl2 {
    pub fn new(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Result<Sl2> {
        let g = Sl2 { e: [a, b, c, d] };
        if g.det().is_zero() {
            return Err(Error::InvalidMatrix("zero determinant".into()));
        }
        Ok(g)
    }

    pub fn int(a: i64, b: i64, c: i64, d: i64) -> Sl2 {
        Sl2::new(Scalar::int(a), Scalar::int(b), Scalar::int(c), Scalar::int(d)).expect("invertible")
    }

    pub fn identity() -> Sl2 {
        Sl2::int(1, 0, 0, 1)
    }

    /// The reflection x -> -x, i.e. the cycle of the interval (0, inf).
    pub fn reflection() -> Sl2 {
        Sl2::int(1, 0, 0, -1)
    }

    pub fn entries(&self) -> &[Scalar; 4] {
        &self.e
    }

    pub fn det(&self) -> Scalar {
        &self.e[0] * &self.e[3] - &self.e[1] * &self.e[2]
    }

    pub fn trace(&self) -> Scalar {
        &self.e[0] + &self.e[3]
    }

    pub fn mul(&self, other: &Sl2) -> Sl2 {
        Sl2 { e: mul2(&self.e, &other.e) }
    }

    pub fn inverse(&self) -> Sl2 {
        let det = self.det();
        let [a, b, c, d] = &self.e;
        Sl2 {
            e: [d / &det, -b / &det, -c / &det, a / &det],
        }
    }

    /// Rescaled to determinant +1 or -1.
    pub fn normalized(&self) -> Sl2 {
        let s = self.det().sqrt_abs();
        Sl2 {
            e: self.e.clone().map(|x| x / &s),
        }
    }

    pub fn apply(&self, x: &RealPoint) -> RealPoint {
        let (x1, x2) = x.homogeneous();
        let [a, b, c, d] = &self.e;
        RealPoint::from_homogeneous(&(a * &x1 + b * &x2), &(c * &x1 + d * &x2)).expect("invertible matrix")
    }

    /// `tr^2 - 4 det`; its sign counts real fixed points (two, one, none).
    pub fn discriminant(&self) -> Scalar {
        let t = self.trace();
        &t * &t - Scalar::int(4) * self.det()
    }

    /// Real fixed points on the projective line.
    pub fn fixed_points(&self) -> Vec<RealPoint> {
        let [a, b, c, d] = &self.e;
        let disc = self.discriminant();
        if disc.sign() < 0 {
            return vec![];
        }
        if c.is_zero() {
            let mut out = vec![RealPoint::Infinity];
            let da = d - a;
            if !da.is_zero() {
                out.push(RealPoint::Finite(b / &da));
            }
            return out;
        }
        let two_c = Scalar::int(2) * c;
        let amd = a - d;
        if disc.is_zero() {
            return vec![RealPoint::Finite(amd / two_c)];
        }
        let r = disc.sqrt_abs();
        let mut v = vec![
            RealPoint::Finite((&amd - &r) / &two_c),
            RealPoint::Finite((&amd + &r) / &two_c),
        ];
        v.sort_by(|p, q| p.finite().unwrap().cmp_value(q.finite().unwrap()));
        v
    }

    pub fn is_identity(&self) -> bool {
        let [a, b, c, d] = &self.e;
        b.is_zero() && c.is_zero() && (a - d).is_zero()
    }

    /// Projective equality.
    pub fn projectively_equal(&self, other: &Sl2, eps: f64) -> bool {
        (0..4).all(|i| {
            (0..4).all(|j| (&self.e[i] * &other.e[j] - &self.e[j] * &other.e[i]).is_zero_tol(eps))
        })
    }

    pub fn to_f64(&self) -> [f64; 4] {
        self.e.clone().map(|x| x.to_f64())
    }
}

impl fmt::Display for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.e;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// A bilinear form `[[l+n, -m], [k, -l+n]]` stored as `(n, l, k, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormR4 {
    pub n: Scalar,
    pub l: Scalar,
    pub k: Scalar,
    pub m: Scalar,
}

impl FormR4 {
    pub fn new(n: Scalar, l: Scalar, k: Scalar, m: Scalar) -> FormR4 {
        FormR4 { n, l, k, m }
    }

    pub fn int(n: i64, l: i64, k: i64, m: i64) -> FormR4 {
        FormR4::new(Scalar::int(n), Scalar::int(l), Scalar::int(k), Scalar::int(m))
    }

    pub fn from_coords(v: &[Scalar]) -> FormR4 {
        FormR4::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone())
    }

    pub fn coords(&self) -> [Scalar; 4] {
        [self.n.clone(), self.l.clone(), self.k.clone(), self.m.clone()]
    }

    pub fn from_matrix(q: &[Scalar; 4]) -> FormR4 {
        let half = Scalar::ratio(1, 2);
        FormR4 {
            n: (&q[0] + &q[3]) * &half,
            l: (&q[0] - &q[3]) * &half,
            k: q[2].clone(),
            m: -&q[1],
        }
    }

    pub fn matrix(&self) -> [Scalar; 4] {
        [&self.l + &self.n, -&self.m, self.k.clone(), &self.n - &self.l]
    }

    /// The real line normalised to unit self-pairing.
    pub fn real_line() -> FormR4 {
        let s = Scalar::ratio(1, 2).try_sqrt().expect("positive");
        FormR4::new(s, Scalar::zero(), Scalar::zero(), Scalar::zero())
    }

    /// The normalised tau-isotropic form of the point (u, v).
    pub fn isotropic_at(u: &Scalar, v: &Scalar, tau: i8) -> FormR4 {
        let t = Scalar::int(tau as i64);
        FormR4::new(v.clone(), u.clone(), Scalar::one(), u * u - t * v * v)
    }

    /// `2 tau n n' - 2 l l' + k m' + m k'`, equal to `-tr(Q_tau Q')`.
    pub fn tau_pairing(&self, other: &FormR4, tau: i8) -> Scalar {
        Scalar::int(2 * tau as i64) * &self.n * &other.n - Scalar::int(2) * &self.l * &other.l
            + &self.k * &other.m
            + &self.m * &other.k
    }

    pub fn is_tau_isotropic(&self, tau: i8) -> bool {
        self.tau_pairing(self, tau).is_zero()
    }

    /// Whether (u, v) lies on `k(u^2 - tau v^2) - 2lu - 2nv + m = 0`,
    /// i.e. e-orthogonality to the tau-isotropic form at (u, v).
    pub fn curve_membership(&self, u: &Scalar, v: &Scalar, tau: i8) -> bool {
        self.tau_pairing(&FormR4::isotropic_at(u, v, tau), -1).is_zero()
    }

    /// The point (u, v) = (l, n)/k of a form with k != 0.
    pub fn point(&self) -> Option<(Scalar, Scalar)> {
        if self.k.is_zero() {
            return None;
        }
        Some((self.l.checked_div(&self.k).ok()?, self.n.checked_div(&self.k).ok()?))
    }

    /// Scaled so that k = 1, or the first nonzero coordinate is 1.
    pub fn normalized(&self) -> FormR4 {
        let c = self.coords();
        let pivot = if !self.k.is_zero() {
            self.k.clone()
        } else {
            c.iter().find(|x| !x.is_zero()).cloned().unwrap_or_else(Scalar::one)
        };
        FormR4::from_coords(&c.map(|x| x / &pivot))
    }

    pub fn projectively_equal(&self, other: &FormR4, eps: f64) -> bool {
        let (a, b) = (self.coords(), other.coords());
        (0..4).all(|i| (0..4).all(|j| (&a[i] * &b[j] - &a[j] * &b[i]).is_zero_tol(eps)))
    }

    /// `g Q g^{-1}` computed by matrix similarity.
    pub fn conjugate(&self, g: &Sl2) -> FormR4 {
        let q = mul2(&mul2(g.entries(), &self.matrix()), g.inverse().entries());
        FormR4::from_matrix(&q)
    }

    /// The same action through the linear map of R^4.
    pub fn act_r4(&self, g: &Sl2) -> FormR4 {
        let t = r4_matrix(g);
        let v = self.coords();
        let w: Vec<Scalar> = t
            .iter()
            .map(|row| row.iter().zip(&v).fold(Scalar::zero(), |s, (a, b)| s + a * b))
            .collect();
        FormR4::from_coords(&w)
    }
}

impl fmt::Display for FormR4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, l={}, k={}, m={})", self.n, self.l, self.k, self.m)
    }
}

/// The 4x4 matrix of `Q -> g Q g^{-1}` on `(n, l, k, m)`, for any
/// invertible representative `g`.
pub fn r4_matrix(g: &Sl2) -> [[Scalar; 4]; 4] {
    let [a, b, c, d] = g.entries();
    let det = g.det();
    let z = Scalar::zero();
    let two = Scalar::int(2);
    let rows = [
        [det.clone(), z.clone(), z.clone(), z.clone()],
        [z.clone(), c * b + a * d, b * d, c * a],
        [z.clone(), &two * c * d, d * d, c * c],
        [z, &two * a * b, b * b, a * a],
    ];
    rows.map(|r| r.map(|x| x / &det))
}

/// The invariant pairing matrix for `sigma` in {-1, 0, 1}.
pub fn invariant_form(sigma: i8) -> [[Scalar; 4]; 4] {
    let z = || Scalar::zero();
    [
        [Scalar::int(2 * sigma as i64), z(), z(), z()],
        [z(), Scalar::int(-2), z(), z()],
        [z(), z(), z(), Scalar::one()],
        [z(), z(), Scalar::one(), z()],
    ]
}

/// The cycle of an interval [x, y] of the projective line.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCycle {
    pub x: RealPoint,
    pub y: RealPoint,
}

impl IntervalCycle {
    pub fn new(x: RealPoint, y: RealPoint) -> IntervalCycle {
        IntervalCycle { x, y }
    }

    /// `1/2 M i(M)` for `M` built from homogeneous columns.
    pub fn matrix(&self) -> [Scalar; 4] {
        let (x1, x2) = self.x.homogeneous();
        let (y1, y2) = self.y.homogeneous();
        let half = Scalar::ratio(1, 2);
        let s = (&x1 * &y2 + &x2 * &y1) * &half;
        [s.clone(), -(&x1 * &y1), &x2 * &y2, -s]
    }

    pub fn form(&self) -> FormR4 {
        FormR4::from_matrix(&self.matrix())
    }

    pub fn det(&self) -> Scalar {
        let q = self.matrix();
        &q[0] * &q[3] - &q[1] * &q[2]
    }

    pub fn apply(&self, g: &Sl2) -> IntervalCycle {
        IntervalCycle::new(g.apply(&self.x), g.apply(&self.y))
    }
}

pub fn cycle_from_interval(x: RealPoint, y: RealPoint) -> IntervalCycle {
    IntervalCycle::new(x, y)
}

pub fn interval_flt(g: &Sl2, c: &IntervalCycle) -> IntervalCycle {
    c.apply(g)
}

/// `-tr(C C')`.
pub fn pairing(c1: &IntervalCycle, c2: &IntervalCycle) -> Scalar {
    let p = mul2(&c1.matrix(), &c2.matrix());
    -(&p[0] + &p[3])
}

fn ordered(v: &[&Scalar]) -> bool {
    v.windows(2).all(|w| w[0].cmp_value(w[1]).is_lt())
}

fn common_formula(x: &Scalar, y: &Scalar, x2: &Scalar, y2: &Scalar, rad: Scalar) -> Result<(Scalar, Scalar)> {
    let den = x + y - x2 - y2;
    if rad.sign() < 0 {
        return Err(Error::NoRealPoint);
    }
    let u = (x * y - x2 * y2).checked_div(&den)?;
    let v = rad.sqrt_abs().checked_div(&den.abs())?;
    Ok((u, v))
}

/// Common point of the semicircles on intersecting intervals
/// `x < x' < y < y'`.
pub fn extension_point_ell(x: &Scalar, y: &Scalar, x2: &Scalar, y2: &Scalar) -> Result<(Scalar, Scalar)> {
    if !ordered(&[x, x2, y, y2]) {
        return Err(Error::InvalidOrdering("need x < x' < y < y'".into()));
    }
    common_formula(x, y, x2, y2, (x - y2) * (x - x2) * (x2 - y) * (y - y2))
}

/// Common point of the right-angle hyperbolas on disjoint intervals
/// `x < y < x' < y'`.
pub fn extension_point_hyp(x: &Scalar, y: &Scalar, x2: &Scalar, y2: &Scalar) -> Result<(Scalar, Scalar)> {
    if !ordered(&[x, y, x2, y2]) {
        return Err(Error::InvalidOrdering("need x < y < x' < y'".into()));
    }
    common_formula(x, y, x2, y2, (x - y2) * (x - x2) * (x2 - y) * (y2 - y))
}

/// Both common points of the focally orthogonal parabolas, for the two
/// signs of the radical.
pub fn extension_point_par(x: &Scalar, y: &Scalar, x2: &Scalar, y2: &Scalar) -> Result<[(Scalar, Scalar); 2]> {
    let pts = [x, y, x2, y2];
    for i in 0..4 {
        for j in i + 1..4 {
            if (pts[i] - pts[j]).is_zero() {
                return Err(Error::InvalidOrdering("endpoints must be distinct".into()));
            }
        }
    }
    let rad = (x - x2) * (y - y2) * (y - x) * (y2 - x2);
    if rad.sign() < 0 {
        return Err(Error::NoRealPoint);
    }
    let den = x - y - x2 + y2;
    if den.is_zero() {
        return Err(Error::Degenerate("intervals of equal length".into()));
    }
    let root = rad.sqrt_abs();
    let den2 = &den * &den;
    let point = |d: Scalar| -> Result<(Scalar, Scalar)> {
        let u = (x * y2 - y * x2 + &d).checked_div(&den)?;
        let v = ((x2 - x) * (y2 - y) * (y - x + y2 - x2) + (x + y - x2 - y2) * d).checked_div(&den2)?;
        Ok((u, v))
    };
    Ok([point(root.clone())?, point(-root)?])
}

/// The map sending a positively oriented triple to (0, 1, inf) by a
/// rotation, a shift and a dilation in turn.
pub fn to_zero_one_infinity(x: &[RealPoint; 3]) -> Result<Sl2> {
    if orientation(&x[0], &x[1], &x[2]) == 0 {
        return Err(Error::Degenerate("points of a triple must be distinct".into()));
    }
    let k = match &x[2] {
        RealPoint::Infinity => Sl2::identity(),
        RealPoint::Finite(c) => Sl2::new(c.clone(), Scalar::one(), Scalar::int(-1), c.clone())?,
    };
    let x1 = k.apply(&x[0]);
    let n = Sl2::new(Scalar::one(), -x1.finite().expect("finite image"), Scalar::zero(), Scalar::one())?;
    let nk = n.mul(&k);
    let x2 = nk.apply(&x[1]);
    let a = Sl2::new(Scalar::one(), Scalar::zero(), Scalar::zero(), x2.finite().expect("finite image").clone())?;
    Ok(a.mul(&nk))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreePairs {
    /// The orientation-preserving factor.
    pub map: Sl2,
    /// True when the full map is `map` composed after x -> -x.
    pub reflected: bool,
}

impl ThreePairs {
    pub fn apply(&self, x: &RealPoint) -> RealPoint {
        let x = if self.reflected { Sl2::reflection().apply(x) } else { x.clone() };
        self.map.apply(&x)
    }
}

/// The unique map with `x_j -> y_j`.
pub fn moebius_from_three_pairs(x: &[RealPoint; 3], y: &[RealPoint; 3]) -> Result<ThreePairs> {
    let ox = orientation(&x[0], &x[1], &x[2]);
    let oy = orientation(&y[0], &y[1], &y[2]);
    if ox == 0 || oy == 0 {
        return Err(Error::Degenerate("points of a triple must be distinct".into()));
    }
    let reflected = ox != oy;
    let xs = if reflected {
        x.clone().map(|p| Sl2::reflection().apply(&p))
    } else {
        x.clone()
    };
    // Negatively oriented triples are handled through their mirror images.
    let map = if oy > 0 {
        to_zero_one_infinity(y)?.inverse().mul(&to_zero_one_infinity(&xs)?)
    } else {
        let r = Sl2::reflection();
        let fx = to_zero_one_infinity(&xs.map(|p| r.apply(&p)))?;
        let fy = to_zero_one_infinity(&y.clone().map(|p| r.apply(&p)))?;
        r.mul(&fy.inverse()).mul(&fx).mul(&r)
    };
    Ok(ThreePairs { map, reflected })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iwasawa {
    pub a: Sl2,
    pub n: Sl2,
    pub k: Sl2,
}

/// `g = gA gN gK` with gA positive diagonal, gN upper unitriangular and
/// gK a rotation.
pub fn iwasawa(g: &Sl2) -> Result<Iwasawa> {
    if !g.det().is_one() {
        return Err(Error::InvalidMatrix("determinant must be 1".into()));
    }
    let [a, b, c, d] = g.entries();
    let r = (c * c + d * d).sqrt_abs();
    let zero = Scalar::zero;
    Ok(Iwasawa {
        a: Sl2::new(r.recip()?, zero(), zero(), r.clone())?,
        n: Sl2::new(Scalar::one(), a * c + b * d, zero(), Scalar::one())?,
        k: Sl2::new(d / &r, -c / &r, c / &r, d / &r)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupType {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl SubgroupType {
    pub fn tau(self) -> i8 {
        match self {
            SubgroupType::Elliptic => -1,
            SubgroupType::Parabolic => 0,
            SubgroupType::Hyperbolic => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kind: SubgroupType,
    pub discriminant: Scalar,
    /// The map sending the start points to the end points.
    pub map: Sl2,
}

fn det3(m: [[Scalar; 3]; 3]) -> Scalar {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// Discriminant of the fixed-point quadratic, from the homogeneous
/// version of the linear system `a x + b - c x y - d y = 0`.
pub fn discriminant(pairs: &[(RealPoint, RealPoint); 3]) -> Scalar {
    let rows: Vec<[Scalar; 4]> = pairs
        .iter()
        .map(|(x, y)| {
            let (x1, x2) = x.homogeneous();
            let (y1, y2) = y.homogeneous();
            [&x1 * &y2, &x2 * &y2, -(&x1 * &y1), -(&x2 * &y1)]
        })
        .collect();
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        det3([0, 1, 2].map(|r| [0, 1, 2].map(|j| rows[r][cols[j]].clone())))
    };
    // Last row (s1 s2, s2^2, -s1^2, -s1 s2); cofactor signs (-1)^(3+col).
    let cof = |col: usize| if (3 + col) % 2 == 0 { minor(col) } else { -minor(col) };
    let qa = -cof(2);
    let qb = cof(0) - cof(3);
    let qc = cof(1);
    &qb * &qb - Scalar::int(4) * qa * qc
}

fn split(pairs: &[(RealPoint, RealPoint); 3]) -> ([RealPoint; 3], [RealPoint; 3]) {
    (pairs.clone().map(|p| p.0), pairs.clone().map(|p| p.1))
}

/// Type of the one-parameter subgroup defined by an aligned triple.
pub fn classify_triple_of_intervals(pairs: &[(RealPoint, RealPoint); 3]) -> Result<Classification> {
    let (x, y) = split(pairs);
    let ox = orientation(&x[0], &x[1], &x[2]);
    let oy = orientation(&y[0], &y[1], &y[2]);
    if ox == 0 || oy == 0 {
        return Err(Error::Degenerate("endpoints of a triple must be distinct".into()));
    }
    if ox != oy {
        return Err(Error::NotAligned);
    }
    let map = moebius_from_three_pairs(&x, &y)?.map;
    if map.is_identity() {
        return Err(Error::Degenerate("intervals are points".into()));
    }
    let disc = discriminant(pairs);
    let kind = match disc.sign() {
        -1 => SubgroupType::Elliptic,
        0 => SubgroupType::Parabolic,
        _ => SubgroupType::Hyperbolic,
    };
    Ok(Classification {
        kind,
        discriminant: disc,
        map,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub kind: SubgroupType,
    /// The tau-isotropic form representing the point.
    pub form: FormR4,
    /// `g` with `g map g^{-1}` in the standard subgroup of this type.
    pub conjugator: Sl2,
}

impl Extension {
    pub fn point(&self) -> Option<(Scalar, Scalar)> {
        self.form.point()
    }
}

fn standard_point(tau: i8) -> FormR4 {
    FormR4::isotropic_at(&Scalar::zero(), &Scalar::one(), tau)
}

/// The point of the extended plane fixed by the subgroup of an aligned
/// triple, as `g^{-1} [[1, tau], [1, 1]] g`.
pub fn extension_from_triple(pairs: &[(RealPoint, RealPoint); 3]) -> Result<Extension> {
    let cl = classify_triple_of_intervals(pairs)?;
    let tau = cl.kind.tau();
    let phi = &cl.map;
    let [a, _, c, d] = phi.entries();
    let build = |g: Sl2| {
        let form = standard_point(tau).conjugate(&g.inverse()).normalized();
        Extension {
            kind: cl.kind,
            form,
            conjugator: g,
        }
    };
    Ok(match cl.kind {
        SubgroupType::Elliptic => {
            // The complex fixed point u0 + i v0 goes to i.
            let two_c = Scalar::int(2) * c;
            let u0 = (a - d).checked_div(&two_c)?;
            let v0 = (-phi.discriminant()).sqrt_abs().checked_div(&two_c.abs())?;
            build(Sl2::new(Scalar::one(), -u0, Scalar::zero(), v0)?)
        }
        SubgroupType::Parabolic => match &phi.fixed_points()[0] {
            RealPoint::Finite(s) => build(Sl2::new(Scalar::one(), -s, Scalar::zero(), Scalar::one())?),
            RealPoint::Infinity => build(Sl2::int(0, -1, 1, 0)),
        },
        SubgroupType::Hyperbolic => {
            let fp = phi.fixed_points();
            let to_pm_one = |s1: &RealPoint, s2: &RealPoint| -> Result<Sl2> {
                let (p1, p2) = s1.homogeneous();
                let (q1, q2) = s2.homogeneous();
                let h = Sl2::new(p2, -p1, q2, -q1)?;
                Ok(Sl2::int(1, -1, 1, 1).mul(&h))
            };
            let first = build(to_pm_one(&fp[0], &fp[1])?);
            match first.point() {
                Some((_, v)) if v.sign() < 0 => build(to_pm_one(&fp[1], &fp[0])?),
                _ => first,
            }
        }
    })
}

/// Cosine of the angle between the curve of `q` and the real line,
/// `-n / sqrt|l^2 + n^2 - k m|`.
pub fn angle_to_real_line(q: &FormR4) -> Result<Scalar> {
    let den = (&q.l * &q.l + &q.n * &q.n - &q.k * &q.m).sqrt_abs();
    if den.is_zero() {
        return Err(Error::Degenerate("isotropic form".into()));
    }
    (-&q.n).checked_div(&den)
}

/// The tau-isotropic forms e-orthogonal to both `c1` and `c2`.
pub fn common_point(c1: &FormR4, c2: &FormR4, tau: i8) -> Result<Vec<FormR4>> {
    // e-pairing row of a form: (-2n, -2l, m, k) against (n', l', k', m').
    let row = |f: &FormR4| vec![Scalar::int(-2) * &f.n, Scalar::int(-2) * &f.l, f.m.clone(), f.k.clone()];
    let basis = nullspace(&[row(c1), row(c2)], 4);
    let q = |f: &FormR4, g: &FormR4| f.tau_pairing(g, tau);
    let mut out: Vec<FormR4> = vec![];
    let mut push = |f: FormR4| {
        let f = f.normalized();
        if !out.iter().any(|g| g.projectively_equal(&f, 1e-12)) {
            out.push(f);
        }
    };
    match basis.len() {
        0 => {}
        1 => {
            let p = FormR4::from_coords(&basis[0]);
            if q(&p, &p).is_zero() {
                push(p);
            }
        }
        2 => {
            let p = FormR4::from_coords(&basis[0]);
            let r = FormR4::from_coords(&basis[1]);
            let (qa, qb, qc) = (q(&p, &p), q(&p, &r), q(&r, &r));
            let comb = |s: &Scalar, t: &Scalar| {
                let (x, y) = (p.coords(), r.coords());
                FormR4::from_coords(&[0, 1, 2, 3].map(|i| s * &x[i] + t * &y[i]))
            };
            // qa s^2 + 2 qb s t + qc t^2 = 0.
            if qa.is_zero() {
                push(p.clone());
                if !qb.is_zero() || !qc.is_zero() {
                    push(comb(&(-qc.clone()), &(Scalar::int(2) * &qb)));
                }
            } else {
                let disc = &qb * &qb - &qa * &qc;
                if disc.sign() >= 0 {
                    let root = disc.sqrt_in_field().unwrap_or_else(|| disc.sqrt_abs());
                    for sgn in [1, -1] {
                        let s = -&qb + Scalar::int(sgn) * &root;
                        push(comb(&s, &qa));
                    }
                }
            }
        }
        _ => return Err(Error::Degenerate("cycles are proportional".into())),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::int(n)
    }

    fn p(n: i64) -> RealPoint {
        RealPoint::int(n)
    }

    #[test]
    fn ell_examples() {
        let (u, v) = extension_point_ell(&s(-1), &s(1), &s(0), &s(2)).unwrap();
        assert_eq!(u, Scalar::ratio(1, 2));
        assert_eq!(&v * &v, Scalar::ratio(3, 4));
        let (u, v) = extension_point_ell(&s(-2), &Scalar::ratio(1, 2), &s(-1), &s(1)).unwrap();
        assert_eq!((u, v), (s(0), s(1)));
        assert!(matches!(extension_point_ell(&s(0), &s(1), &s(2), &s(3)), Err(Error::InvalidOrdering(_))));
    }

    #[test]
    fn par_points() {
        // The parabola v (y - x) = (u - x)(u - y) has roots x, y and its
        // focus on the real line.
        let on = |x: i64, y: i64, (u, v): &(Scalar, Scalar)| {
            (v * s(y - x) - (u - s(x)) * (u - s(y))).is_zero()
        };
        let pts = extension_point_par(&s(0), &s(4), &s(1), &s(7)).unwrap();
        assert_ne!(pts[0], pts[1]);
        for pt in &pts {
            assert!(on(0, 4, pt) && on(1, 7, pt));
        }
        assert!(matches!(extension_point_par(&s(0), &s(10), &s(1), &s(2)), Err(Error::NoRealPoint)));
    }

    #[test]
    fn interval_cycles() {
        let c = cycle_from_interval(p(0), RealPoint::Infinity);
        let j = Sl2::reflection();
        assert!(Sl2::new(c.matrix()[0].clone(), c.matrix()[1].clone(), c.matrix()[2].clone(), c.matrix()[3].clone())
            .unwrap()
            .projectively_equal(&j, 0.0));
        let t = Sl2::int(1, 1, 0, 1);
        assert_eq!(interval_flt(&t, &cycle_from_interval(p(0), p(2))), cycle_from_interval(p(1), p(3)));
        let c = cycle_from_interval(p(0), p(2));
        assert_eq!(c.det(), s(-1));
        // -tr(C C) = 2 det C.
        assert_eq!(pairing(&c, &c), s(-2));
    }

    #[test]
    fn r4_action_matches_conjugation() {
        let g = Sl2::int(2, 3, 1, 2);
        let q = FormR4::int(1, 2, -3, 5);
        assert_eq!(q.act_r4(&g), q.conjugate(&g));
        assert_eq!(q.act_r4(&Sl2::identity()), q);
        let ident = r4_matrix(&g);
        assert_eq!(ident[0][0], s(1));
    }

    #[test]
    fn isotropy() {
        for tau in [-1, 0, 1] {
            let f = FormR4::isotropic_at(&s(2), &s(3), tau);
            assert!(f.is_tau_isotropic(tau));
            assert_eq!(f.point(), Some((s(2), s(3))));
            assert_eq!(FormR4::real_line().tau_pairing(&FormR4::real_line(), tau), s(tau as i64));
        }
        assert_eq!(FormR4::int(1, 0, 1, 0).tau_pairing(&FormR4::int(1, 0, 1, 0), 0), s(0));
        // Unit circle k = 1, m = -1 contains (1, 0).
        assert!(FormR4::int(0, 0, 1, -1).curve_membership(&s(1), &s(0), -1));
    }

    #[test]
    fn three_pairs() {
        let inf = RealPoint::Infinity;
        let g = moebius_from_three_pairs(&[p(0), p(1), inf.clone()], &[p(0), p(1), inf.clone()]).unwrap();
        assert!(g.map.is_identity() && !g.reflected);
        let g = moebius_from_three_pairs(&[p(0), p(1), inf.clone()], &[p(1), p(2), inf.clone()]).unwrap();
        assert!(g.map.projectively_equal(&Sl2::int(1, 1, 0, 1), 0.0));
        let x = [p(1), p(2), p(3)];
        let y = [p(2), p(3), p(4)];
        let g = moebius_from_three_pairs(&x, &y).unwrap();
        for j in 0..3 {
            assert_eq!(g.apply(&x[j]), y[j]);
        }
        let y = [p(4), p(3), p(2)];
        let g = moebius_from_three_pairs(&x, &y).unwrap();
        assert!(g.reflected);
        for j in 0..3 {
            assert_eq!(g.apply(&x[j]), y[j]);
        }
    }

    #[test]
    fn iwasawa_examples() {
        let r = Sl2::new(Scalar::ratio(3, 5), Scalar::ratio(-4, 5), Scalar::ratio(4, 5), Scalar::ratio(3, 5)).unwrap();
        let w = iwasawa(&r).unwrap();
        assert!(w.a.is_identity() && w.n.is_identity());
        assert_eq!(w.k, r);
        let d = Sl2::new(s(2), s(0), s(0), Scalar::ratio(1, 2)).unwrap();
        let w = iwasawa(&d).unwrap();
        assert_eq!(w.a, d);
        let g = Sl2::int(2, 3, 1, 2);
        let w = iwasawa(&g).unwrap();
        let back = w.a.mul(&w.n).mul(&w.k).to_f64();
        for (x, y) in back.iter().zip(g.to_f64()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        let pr = |a: i64, b: i64| (p(a), p(b));
        let c = classify_triple_of_intervals(&[pr(0, 1), pr(1, 2), pr(2, 3)]).unwrap();
        assert_eq!(c.kind, SubgroupType::Parabolic);
        let c = classify_triple_of_intervals(&[pr(1, 2), pr(2, 4), pr(3, 6)]).unwrap();
        assert_eq!(c.kind, SubgroupType::Hyperbolic);
        // x -> -1/x has no real fixed points.
        let c = classify_triple_of_intervals(&[
            (p(1), p(-1)),
            (p(2), RealPoint::Finite(Scalar::ratio(-1, 2))),
            (p(3), RealPoint::Finite(Scalar::ratio(-1, 3))),
        ])
        .unwrap();
        assert_eq!(c.kind, SubgroupType::Elliptic);
        assert!(matches!(
            classify_triple_of_intervals(&[pr(1, 3), pr(2, 2), pr(3, 1)]),
            Err(Error::NotAligned)
        ));
    }

    #[test]
    fn extension_of_standard_subgroups() {
        // N' = [[1,0],[1,1]] fixes 0 and gives the point (0, 1).
        let g = Sl2::int(1, 0, 1, 1);
        let pairs = [1, 2, 3].map(|x| (p(x), g.apply(&p(x))));
        let e = extension_from_triple(&pairs).unwrap();
        assert_eq!(e.kind, SubgroupType::Parabolic);
        assert_eq!(e.form, FormR4::isotropic_at(&s(0), &s(1), 0));
        // The half turn about i.
        let pairs = [1, 2, 3].map(|x| (p(x), Sl2::int(0, -1, 1, 0).apply(&p(x))));
        let e = extension_from_triple(&pairs).unwrap();
        assert_eq!(e.point(), Some((s(0), s(1))));
        // A' fixes -1 and 1.
        let a = Sl2::new(Scalar::ratio(5, 4), Scalar::ratio(3, 4), Scalar::ratio(3, 4), Scalar::ratio(5, 4)).unwrap();
        let pairs = [2, 3, 4].map(|x| (p(x), a.apply(&p(x))));
        let e = extension_from_triple(&pairs).unwrap();
        assert_eq!(e.kind, SubgroupType::Hyperbolic);
        assert_eq!(e.point(), Some((s(0), s(1))));
    }

    #[test]
    fn angles_and_common_points() {
        assert_eq!(angle_to_real_line(&FormR4::int(0, 1, 0, 0)).unwrap(), s(0));
        assert_eq!(angle_to_real_line(&FormR4::int(0, 0, 1, -1)).unwrap(), s(0));
        let pts = common_point(&FormR4::int(0, 0, 1, -1), &FormR4::int(0, 1, 1, 0), -1).unwrap();
        assert_eq!(pts.len(), 2);
        for f in &pts {
            let (u, v) = f.point().unwrap();
            assert_eq!(u, Scalar::ratio(1, 2));
            assert_eq!(&v * &v, Scalar::ratio(3, 4));
        }
        let far = common_point(&FormR4::int(0, 0, 1, -1), &FormR4::int(0, 5, 1, 24), -1).unwrap();
        assert!(far.is_empty());
    }
}
