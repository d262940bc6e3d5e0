//! Continued fractions as products of Möbius matrices, their horocycle
//! chains and the Clifford-valued version in several dimensions.
//!
//! Cycles are 2D `(k, l, n, m)` with `k(u^2+v^2) - 2lu - 2nv + m = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordNumber, Signature};
use crate::cycle::{Cycle, Metric, MoebiusMatrix, PointImage};
use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::poincare::{RealPoint, Sl2};

/// Default threshold for the tail test of [`seidel_stern_check`].
pub const SEIDEL_STERN_THRESHOLD: f64 = 1e-3;

/// `b0 + K(a_n | b_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    /// Integer part, if the fraction was written as `b0; b1, ...`.
    pub b0: Option<Scalar>,
    pub a: Vec<Scalar>,
    pub b: Vec<Scalar>,
}

/// `[[P_{n-1}, P_n], [Q_{n-1}, Q_n]]` after `n` partial quotients.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergentState {
    pub n: usize,
    pub p_prev: Scalar,
    pub p: Scalar,
    pub q_prev: Scalar,
    pub q: Scalar,
}

impl ConvergentState {
    pub fn matrix(&self) -> [Scalar; 4] {
        [self.p_prev.clone(), self.p.clone(), self.q_prev.clone(), self.q.clone()]
    }

    /// `P_n / Q_n`, infinite when `Q_n = 0`.
    pub fn quotient(&self) -> RealPoint {
        RealPoint::from_homogeneous(&self.p, &self.q).expect("consecutive P, Q never both vanish")
    }

    /// `(S_n(0), S_n(inf)) = (P_n/Q_n, P_{n-1}/Q_{n-1})`.
    pub fn endpoints(&self) -> (RealPoint, RealPoint) {
        let prev = RealPoint::from_homogeneous(&self.p_prev, &self.q_prev).expect("nonzero column");
        (self.quotient(), prev)
    }

    pub fn delta(&self) -> Scalar {
        &self.p_prev * &self.q - &self.p * &self.q_prev
    }

    fn step(&self, a: &Scalar, b: &Scalar) -> ConvergentState {
        ConvergentState {
            n: self.n + 1,
            p_prev: self.p.clone(),
            p: b * &self.p + a * &self.p_prev,
            q_prev: self.q.clone(),
            q: b * &self.q + a * &self.q_prev,
        }
    }
}

impl ContinuedFraction {
    pub fn new(b0: Option<Scalar>, a: Vec<Scalar>, b: Vec<Scalar>) -> Result<ContinuedFraction> {
        if a.len() != b.len() {
            return Err(Error::InvalidCF(format!("{} numerators and {} denominators", a.len(), b.len())));
        }
        if let Some(j) = a.iter().position(Scalar::is_zero) {
            return Err(Error::InvalidCF(format!("partial numerator a{} is zero", j + 1)));
        }
        Ok(ContinuedFraction { b0, a, b })
    }

    /// `b0 + K(1 | b_n)`.
    pub fn simple(b0: Option<Scalar>, b: Vec<Scalar>) -> ContinuedFraction {
        let a = vec![Scalar::one(); b.len()];
        ContinuedFraction { b0, a, b }
    }

    pub fn simple_int(b0: Option<i64>, b: &[i64]) -> ContinuedFraction {
        ContinuedFraction::simple(b0.map(Scalar::int), b.iter().map(|&x| Scalar::int(x)).collect())
    }

    pub fn is_simple(&self) -> bool {
        self.a.iter().all(Scalar::is_one)
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// State 0 is `[[1, b0], [0, 1]]`, the identity without an integer part.
    pub fn initial_state(&self) -> ConvergentState {
        ConvergentState {
            n: 0,
            p_prev: Scalar::one(),
            p: self.b0.clone().unwrap_or_else(Scalar::zero),
            q_prev: Scalar::zero(),
            q: Scalar::one(),
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.len() {
            return Err(Error::InvalidCF(format!("{n} terms requested, {} available", self.len())));
        }
        Ok(())
    }

    /// States `0..=n` by the three-term recurrence.
    pub fn convergents(&self, n: usize) -> Result<Vec<ConvergentState>> {
        self.check_len(n)?;
        let mut out = vec![self.initial_state()];
        for j in 0..n {
            let next = out[j].step(&self.a[j], &self.b[j]);
            out.push(next);
        }
        Ok(out)
    }

    pub fn state(&self, n: usize) -> Result<ConvergentState> {
        Ok(self.convergents(n)?.pop().expect("state 0 always present"))
    }

    /// The same state as a matrix product `[[1,b0],[0,1]] prod [[0,a_j],[1,b_j]]`.
    pub fn matrix_product(&self, n: usize) -> Result<[Scalar; 4]> {
        self.check_len(n)?;
        let mut m = self.initial_state().matrix();
        for j in 0..n {
            let f = [Scalar::zero(), self.a[j].clone(), Scalar::one(), self.b[j].clone()];
            m = mul2(&m, &f);
        }
        Ok(m)
    }

    /// The Möbius map `S_n` (with the integer-part translation in front).
    pub fn moebius(&self, n: usize) -> Result<Sl2> {
        let [a, b, c, d] = self.matrix_product(n)?;
        Sl2::new(a, b, c, d)
    }

    /// Value of `S_n(z)`; infinity propagates as a sentinel.
    pub fn eval(&self, n: usize, z: &RealPoint) -> Result<RealPoint> {
        Ok(self.moebius(n)?.apply(z))
    }
}

fn mul2(a: &[Scalar; 4], b: &[Scalar; 4]) -> [Scalar; 4] {
    [
        &a[0] * &b[0] + &a[1] * &b[2],
        &a[0] * &b[1] + &a[1] * &b[3],
        &a[2] * &b[0] + &a[3] * &b[2],
        &a[2] * &b[1] + &a[3] * &b[3],
    ]
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_simple() {
            let b: Vec<String> = self.b.iter().map(|x| x.to_string()).collect();
            let b0 = self.b0.clone().unwrap_or_else(Scalar::zero);
            write!(f, "{b0};{}", b.join(","))
        } else {
            let t: Vec<String> = self.a.iter().zip(&self.b).map(|(a, b)| format!("{a}/{b}")).collect();
            match &self.b0 {
                Some(b0) => write!(f, "{b0}; {}", t.join(" ")),
                None => write!(f, "{}", t.join(" ")),
            }
        }
    }
}

/// `b0;b1,b2,...` (simple), `a1/b1 a2/b2 ...` (general, optionally
/// prefixed by `b0;`) or a bare list `b1,b2,...`. Square brackets are
/// ignored.
impl FromStr for ContinuedFraction {
    type Err = Error;

    fn from_str(text: &str) -> Result<ContinuedFraction> {
        let body = text.trim().trim_start_matches('[').trim_end_matches(']');
        let bad = |e: Error| Error::InvalidCF(format!("`{text}`: {e}"));
        let num = |s: &str| Scalar::parse_exact(s.trim()).map_err(bad);
        let (b0, rest) = match body.split_once(';') {
            Some((h, r)) => (Some(num(h)?), r.trim()),
            None => (None, body),
        };
        if rest.contains('/') {
            let mut a = vec![];
            let mut b = vec![];
            for term in rest.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                let (x, y) = term
                    .split_once('/')
                    .ok_or_else(|| Error::InvalidCF(format!("`{term}` is not a1/b1")))?;
                a.push(num(x)?);
                b.push(num(y)?);
            }
            return ContinuedFraction::new(b0, a, b);
        }
        let b = rest
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?;
        if b.is_empty() && b0.is_none() {
            return Err(Error::InvalidCF("empty continued fraction".into()));
        }
        Ok(ContinuedFraction::simple(b0, b))
    }
}

/// The three choices of horocycle pair and connecting cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrangement {
    /// Tangent horocycles, connecting cycle orthogonal to everything.
    Tangent,
    /// Orthogonal horocycles, connecting cycle orthogonal to both.
    Orthogonal,
    /// Orthogonal horocycles, connecting cycle through their intersection
    /// at 45 degrees to the real line.
    Ortho45,
}

impl Arrangement {
    /// `(m, k, n)`: the horizontal line `(0,0,1,m)`, the horocycle
    /// `(k,0,1,0)` and the line `(0,1,n,0)` mapped by each step.
    pub fn params(self) -> (Scalar, Scalar, Scalar) {
        let sqrt2 = Scalar::int(2).try_sqrt().expect("sqrt 2");
        match self {
            Arrangement::Tangent => (Scalar::int(2), Scalar::int(2), Scalar::zero()),
            Arrangement::Orthogonal => (sqrt2.clone(), sqrt2, Scalar::zero()),
            Arrangement::Ortho45 => (sqrt2.clone(), sqrt2, Scalar::one()),
        }
    }
}

impl FromStr for Arrangement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Arrangement> {
        match s {
            "tangent" | "1" => Ok(Arrangement::Tangent),
            "orthogonal" | "2" => Ok(Arrangement::Orthogonal),
            "ortho45" | "3" => Ok(Arrangement::Ortho45),
            _ => Err(Error::Parse(format!("unknown arrangement `{s}`"))),
        }
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arrangement::Tangent => "tangent",
            Arrangement::Orthogonal => "orthogonal",
            Arrangement::Ortho45 => "ortho45",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HorocycleFamily {
    /// Image of the horizontal line `(0, 0, 1, m)`; depends on `(a, c)` only.
    FirstCol(Scalar),
    /// Image of the horocycle `(k, 0, 1, 0)`; depends on `(b, d)` only.
    SecondCol(Scalar),
    /// Image of the line `(0, 1, n, 0)` through the origin.
    Connecting(Scalar),
}

fn unit_delta(g: &[Scalar; 4]) -> Result<Scalar> {
    let delta = &g[0] * &g[3] - &g[1] * &g[2];
    if !(delta.abs() - Scalar::one()).is_zero() {
        return Err(Error::InvalidMatrix(format!("determinant {delta} is not +-1")));
    }
    Ok(delta)
}

/// Image of a cycle of `family` under the real matrix `g` with
/// `det g = +-1`. When `c` (or `d`) vanishes the image is a line.
pub fn horocycle_image(g: &[Scalar; 4], family: &HorocycleFamily) -> Result<Cycle> {
    let delta = unit_delta(g)?;
    let [a, b, c, d] = g;
    let two = Scalar::int(2);
    match family {
        HorocycleFamily::FirstCol(m) => Cycle::new_2d(c * c * m, a * c * m, delta, a * a * m),
        HorocycleFamily::SecondCol(k) => Cycle::new_2d(d * d * k, b * d * k, delta, b * b * k),
        HorocycleFamily::Connecting(n) => Cycle::new_2d(&two * c * d, a * d + b * c, delta * n, &two * a * b),
    }
}

/// One step of a chain, mirrored into the upper half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub state: ConvergentState,
    /// Touches the real line at `P_{n-1}/Q_{n-1}`.
    pub first: Cycle,
    /// Touches the real line at `P_n/Q_n`.
    pub second: Cycle,
    pub connecting: Cycle,
    /// Tangency residual (arrangement 1) or product (arrangements 2, 3)
    /// of the two horocycles.
    pub pair_residual: Scalar,
    /// Some horocycle is a line because a denominator vanished.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorocycleChain {
    pub arrangement: Arrangement,
    pub steps: Vec<ChainStep>,
}

impl HorocycleChain {
    /// Distinct horocycles in order, touching at `P_0/Q_0, P_1/Q_1, ...`.
    pub fn horocycles(&self) -> Vec<Cycle> {
        let mut out = vec![];
        if let Some(s) = self.steps.first() {
            out.push(s.first.clone());
        }
        out.extend(self.steps.iter().map(|s| s.second.clone()));
        out
    }

    pub fn connecting(&self) -> Vec<Cycle> {
        self.steps.iter().map(|s| s.connecting.clone()).collect()
    }

    /// Every pair residual vanishes (exactly, or within `eps` for floats).
    pub fn holds(&self, eps: f64) -> bool {
        self.steps.iter().all(|s| s.pair_residual.is_zero_tol(eps))
    }
}

/// `<C,C'>^2 - <C,C><C',C'>`, zero iff the cycles touch.
pub fn tangency_residual(c1: &Cycle, c2: &Cycle) -> Result<Scalar> {
    let e = Metric::elliptic();
    let p = c1.product(c2, &e)?;
    Ok(&p * &p - c1.self_product(&e)? * c2.self_product(&e)?)
}

fn upper(c: Cycle, delta: &Scalar) -> Cycle {
    if delta.sign() < 0 {
        c.mirror()
    } else {
        c
    }
}

/// Steps `1..=n` of the horocycle chain of `cf`.
pub fn chain(cf: &ContinuedFraction, n: usize, arrangement: Arrangement) -> Result<HorocycleChain> {
    let (m, k, nn) = arrangement.params();
    let e = Metric::elliptic();
    let states = cf.convergents(n)?;
    let mut steps = vec![];
    for state in states.into_iter().skip(1) {
        let g = state.matrix();
        let delta = unit_delta(&g)?;
        let first = upper(horocycle_image(&g, &HorocycleFamily::FirstCol(m.clone()))?, &delta);
        let second = upper(horocycle_image(&g, &HorocycleFamily::SecondCol(k.clone()))?, &delta);
        let connecting = upper(horocycle_image(&g, &HorocycleFamily::Connecting(nn.clone()))?, &delta);
        let pair_residual = match arrangement {
            Arrangement::Tangent => tangency_residual(&first, &second)?,
            _ => first.product(&second, &e)?,
        };
        let degenerate = first.k().is_zero() || second.k().is_zero();
        steps.push(ChainStep {
            state,
            first,
            second,
            connecting,
            pair_residual,
            degenerate,
        });
    }
    Ok(HorocycleChain { arrangement, steps })
}

/// Outcome of the Seidel–Stern style test on a sequence of cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct SeidelStern {
    /// `nested[j]`: cycle `j+1` lies inside cycle `j` and is smaller.
    pub nested: Vec<bool>,
    pub radii: Vec<f64>,
    /// Last coordinate of each centre.
    pub heights: Vec<Scalar>,
    /// `None` unless the whole chain is nested.
    pub converges: Option<bool>,
}

/// Whether `inner` lies in the closed disc of `outer` and is strictly
/// smaller. Exact for exact input.
pub fn encloses(outer: &Cycle, inner: &Cycle) -> Result<bool> {
    let e = Metric::elliptic();
    if outer.is_flat() || inner.is_flat() {
        return Ok(false);
    }
    let (c1, r1) = outer.center_radius(&e)?;
    let (c2, r2) = inner.center_radius(&e)?;
    if r1.sign() <= 0 || r2.sign() <= 0 || (&r1 - &r2).sign() <= 0 {
        return Ok(false);
    }
    // |c1 - c2| <= R - r  <=>  2Rr <= R^2 + r^2 - d^2 =: s, squared.
    let d2 = c1.iter().zip(&c2).fold(Scalar::zero(), |s, (x, y)| {
        let t = x - y;
        s + &t * &t
    });
    let s = &r1 + &r2 - d2;
    if s.sign() < 0 {
        return Ok(false);
    }
    Ok((&s * &s - Scalar::int(4) * &r1 * &r2).sign() >= 0)
}

fn tail_vanishes(seq: &[f64], threshold: f64) -> bool {
    let Some(last) = seq.last() else { return false };
    let tail = &seq[seq.len() / 2..];
    tail.windows(2).all(|w| w[1].abs() < w[0].abs()) && last.abs() < threshold
}

/// Checks nesting of consecutive cycles and whether radii, or centre
/// heights, decrease to below `threshold` along the second half.
pub fn seidel_stern_check(cycles: &[Cycle], threshold: f64) -> Result<SeidelStern> {
    let e = Metric::elliptic();
    let mut radii = vec![];
    let mut heights = vec![];
    for c in cycles {
        let (centre, r2) = c.center_radius(&e)?;
        radii.push(r2.to_f64().max(0.0).sqrt());
        heights.push(centre.last().cloned().unwrap_or_else(Scalar::zero));
    }
    let nested = cycles
        .windows(2)
        .map(|w| encloses(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let converges = (!cycles.is_empty() && nested.iter().all(|&b| b)).then(|| {
        let h: Vec<f64> = heights.iter().map(Scalar::to_f64).collect();
        tail_vanishes(&radii, threshold) || tail_vanishes(&h, threshold)
    });
    Ok(SeidelStern {
        nested,
        radii,
        heights,
        converges,
    })
}

/// `x -> (x + b)^{-1}` on vectors of `R^n`, with infinity as a sentinel.
pub fn clifford_cf_step(x: &PointImage, b: &[Scalar], sig: Signature) -> Result<PointImage> {
    let PointImage::Finite(x) = x else {
        return Ok(PointImage::Finite(vec![Scalar::zero(); sig.dim()]));
    };
    let s = CliffordNumber::vector(sig, x)?.add(&CliffordNumber::vector(sig, b)?)?;
    match s.inverse() {
        Ok(v) => Ok(PointImage::Finite(v.vector_part())),
        Err(Error::NoInverse) => Ok(PointImage::Infinity),
        Err(e) => Err(e),
    }
}

/// `S_n(0)` computed by nested inversions, innermost first.
pub fn clifford_cf_value(bs: &[Vec<Scalar>], sig: Signature) -> Result<PointImage> {
    let mut x = PointImage::Finite(vec![Scalar::zero(); sig.dim()]);
    for b in bs.iter().rev() {
        x = clifford_cf_step(&x, b, sig)?;
    }
    Ok(x)
}

/// State `n` of a Clifford continued fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordState {
    pub n: usize,
    pub matrix: MoebiusMatrix,
    /// `P_n Q̄_n / |Q_n|^2`.
    pub point: PointImage,
}

/// States `0..=N` of the products of `[[0,1],[1,b_j]]`. Each product is
/// checked against the Ahlfors conditions.
pub fn clifford_convergents(bs: &[Vec<Scalar>], sig: Signature) -> Result<Vec<CliffordState>> {
    let origin = vec![Scalar::zero(); sig.dim()];
    let mut m = MoebiusMatrix::identity(sig);
    let mut out = vec![CliffordState {
        n: 0,
        point: m.apply_point(&origin)?,
        matrix: m.clone(),
    }];
    for (j, b) in bs.iter().enumerate() {
        let f = MoebiusMatrix::new(
            CliffordNumber::zero(sig),
            CliffordNumber::one(sig),
            CliffordNumber::one(sig),
            CliffordNumber::vector(sig, b)?,
        )?;
        m = m.compose(&f)?;
        out.push(CliffordState {
            n: j + 1,
            point: m.apply_point(&origin)?,
            matrix: m.clone(),
        });
    }
    Ok(out)
}

fn as_vector(x: &CliffordNumber, what: &str) -> Result<Vec<Scalar>> {
    if !x.is_vector() {
        return Err(Error::InvalidMatrix(format!("{what} is not a vector")));
    }
    Ok(x.vector_part())
}

fn as_scalar(x: &CliffordNumber, what: &str) -> Result<Scalar> {
    if !x.is_scalar() {
        return Err(Error::InvalidMatrix(format!("{what} is not a scalar")));
    }
    Ok(x.scalar_part())
}

/// Cycle in `R^{n+1}` from `k`, the `R^n` part of `l`, its last
/// coordinate and `m`.
fn lifted(k: Scalar, l: Vec<Scalar>, last: Scalar, m: Scalar) -> Result<Cycle> {
    let mut l = l;
    l.push(last);
    Cycle::new(k, l, m)
}

/// Image of the hyperplane `(0, e_{n+1}, m)`:
/// `(m|c|^2, m a c̄ + delta e_{n+1}, m|a|^2)`, touching `x_{n+1} = 0` at
/// `a c̄ / |c|^2` with radius `1/(m|c|^2)`.
pub fn multidim_first_col(g: &MoebiusMatrix, m: &Scalar) -> Result<Cycle> {
    let [a, _, c, _] = g.entries();
    let ac = as_vector(&a.geo_mul(&c.conjugation())?, "a c̄")?;
    lifted(
        c.modulus_sq()? * m,
        ac.iter().map(|x| x * m).collect(),
        g.pseudodet(),
        a.modulus_sq()? * m,
    )
}

/// Image of the horocycle `(k, e_{n+1}, 0)`:
/// `(k|d|^2, k b d̄ + delta e_{n+1}, k|b|^2)`.
pub fn multidim_second_col(g: &MoebiusMatrix, k: &Scalar) -> Result<Cycle> {
    let [_, b, _, d] = g.entries();
    let bd = as_vector(&b.geo_mul(&d.conjugation())?, "b d̄")?;
    lifted(
        d.modulus_sq()? * k,
        bd.iter().map(|x| x * k).collect(),
        g.pseudodet(),
        b.modulus_sq()? * k,
    )
}

/// Image of the hyperplane `(0, x + r e_{n+1}, 0)` through the origin.
pub fn multidim_connecting(g: &MoebiusMatrix, x: &[Scalar], r: &Scalar) -> Result<Cycle> {
    let sig = g.signature();
    let [a, b, c, d] = g.entries();
    let xv = CliffordNumber::vector(sig, x)?;
    let xb = xv.conjugation();
    let k = c.geo_mul(&xv)?.geo_mul(&d.conjugation())?.add(&d.geo_mul(&xb)?.geo_mul(&c.conjugation())?)?;
    let l = a.geo_mul(&xv)?.geo_mul(&d.conjugation())?.add(&b.geo_mul(&xb)?.geo_mul(&c.conjugation())?)?;
    let m = a.geo_mul(&xv)?.geo_mul(&b.conjugation())?.add(&b.geo_mul(&xb)?.geo_mul(&a.conjugation())?)?;
    lifted(
        as_scalar(&k, "k")?,
        as_vector(&l, "l")?,
        g.pseudodet() * r,
        as_scalar(&m, "m")?,
    )
}

/// Horocycle chain of a Clifford continued fraction in `R^{n+1}`.
///
/// The connecting cycle uses `x = c̄ d`, which keeps its centre in the
/// plane through both contact points orthogonal to `x_{n+1} = 0`.
pub fn multidim_chain(bs: &[Vec<Scalar>], sig: Signature, arrangement: Arrangement) -> Result<Vec<[Cycle; 3]>> {
    let (m, k, nn) = arrangement.params();
    let mut out = vec![];
    for st in clifford_convergents(bs, sig)?.into_iter().skip(1) {
        let g = &st.matrix;
        let [_, _, c, d] = g.entries();
        let x = as_vector(&c.conjugation().geo_mul(d)?, "c̄ d")?;
        let x2 = x.iter().fold(Scalar::zero(), |s, t| s + t * t);
        let r = &nn * x2.sqrt_abs();
        let delta = g.pseudodet();
        let lift = |c: Cycle| upper_last(c, &delta);
        out.push([
            lift(multidim_first_col(g, &m)?),
            lift(multidim_second_col(g, &k)?),
            lift(multidim_connecting(g, &x, &r)?),
        ]);
    }
    Ok(out)
}

/// Reflection `x_{n+1} -> -x_{n+1}` when `delta < 0`.
fn upper_last(c: Cycle, delta: &Scalar) -> Cycle {
    if delta.sign() >= 0 {
        return c;
    }
    let mut l = c.l().to_vec();
    let last = l.len() - 1;
    l[last] = -&l[last];
    Cycle::new(c.k().clone(), l, c.m().clone()).expect("nonzero cycle")
}
