//! Cycles (circles, lines, points and their quadric analogues), the cycle
//! product and the action of Clifford-valued Möbius matrices.
//!
//! A cycle `(k, l, m)` is stored in curve coordinates: its points satisfy
//! `k|x|^2 - 2 sum l_i x_i + m = 0` with `|x|^2 = sum -e_i^2 x_i^2`.
//! In 2D the shorthand `[k, l, n, m]` reads `k(u^2 - tau v^2) - 2lu - 2nv + m`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clifford::{CliffordNumber, Signature};
use crate::error::{Error, Result};
use crate::numerics::{eps_cmp, ArithMode, Scalar};

/// Point-space signature together with the signs used by the cycle product.
///
/// The product is `<C, C'> = m k' + k m' + 2 sum p_i l_i l'_i`. By default
/// `p_i` is the square of `e_i`, and `-1` for nilpotent generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Metric {
    sig: Signature,
    prod: Vec<i8>,
}

impl Metric {
    pub fn from_signature(sig: Signature) -> Metric {
        let prod = sig
            .squares()
            .into_iter()
            .map(|s| if s == 0 { -1 } else { s })
            .collect();
        Metric { sig, prod }
    }

    pub fn elliptic() -> Metric {
        Metric::from_signature(Signature { p: 2, q: 0, r: 0 })
    }

    pub fn parabolic() -> Metric {
        Metric::from_signature(Signature { p: 1, q: 0, r: 1 })
    }

    pub fn hyperbolic() -> Metric {
        Metric::from_signature(Signature { p: 1, q: 1, r: 0 })
    }

    /// Euclidean `R^n` as Cl(n,0,0).
    pub fn euclidean(n: usize) -> Result<Metric> {
        Ok(Metric::from_signature(Signature::euclidean(n)?))
    }

    /// 2D metric for the point selector `tau` in {-1, 0, 1}.
    pub fn from_tau(tau: i8) -> Result<Metric> {
        match tau {
            -1 => Ok(Metric::elliptic()),
            0 => Ok(Metric::parabolic()),
            1 => Ok(Metric::hyperbolic()),
            _ => Err(Error::InvalidSignature(format!("tau = {tau}"))),
        }
    }

    /// Overrides the product sign of slot `i` (the 2D cycle-space selector).
    pub fn with_product_sign(mut self, i: usize, s: i8) -> Result<Metric> {
        if i >= self.prod.len() || !(-1..=1).contains(&s) {
            return Err(Error::InvalidSignature(format!("product sign {s} at slot {i}")));
        }
        self.prod[i] = s;
        Ok(self)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    /// Squares `e_i^2` of the point space.
    pub fn squares(&self) -> Vec<i8> {
        self.sig.squares()
    }

    pub fn product_signs(&self) -> &[i8] {
        &self.prod
    }

    /// `tau = e_2^2` for 2D metrics.
    pub fn tau(&self) -> Option<i8> {
        (self.dim() == 2).then(|| self.sig.square(1))
    }

    pub fn has_nilpotent(&self) -> bool {
        self.sig.r > 0
    }

    /// `|x|^2 = sum -e_i^2 x_i^2`.
    pub fn norm_sq(&self, x: &[Scalar]) -> Scalar {
        let mut s = Scalar::zero();
        for (i, xi) in x.iter().enumerate() {
            match self.sig.square(i) {
                -1 => s += &(xi * xi),
                1 => s -= &(xi * xi),
                _ => {}
            }
        }
        s
    }

    fn is_default_product(&self) -> bool {
        *self == Metric::from_signature(self.sig)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Metric::elliptic() {
            write!(f, "e")
        } else if *self == Metric::parabolic() {
            write!(f, "p")
        } else if *self == Metric::hyperbolic() {
            write!(f, "h")
        } else if self.is_default_product() {
            write!(f, "{}", self.sig)
        } else {
            let p: Vec<String> = self.prod.iter().map(|s| s.to_string()).collect();
            write!(f, "{};{}", self.sig, p.join(","))
        }
    }
}

impl FromStr for Metric {
    type Err = Error;
    /// Accepts `e`, `p`, `h`, `p,q,r`, or `p,q,r;s1,..,sn` with product signs.
    fn from_str(s: &str) -> Result<Metric> {
        match s.trim() {
            "e" => Ok(Metric::elliptic()),
            "p" => Ok(Metric::parabolic()),
            "h" => Ok(Metric::hyperbolic()),
            other => {
                let (sig, prod) = match other.split_once(';') {
                    Some((a, b)) => (a, Some(b)),
                    None => (other, None),
                };
                let mut m = Metric::from_signature(sig.parse()?);
                if let Some(prod) = prod {
                    let signs: Vec<&str> = prod.split(',').collect();
                    if signs.len() != m.dim() {
                        return Err(Error::Parse(format!("metric `{s}`")));
                    }
                    for (i, t) in signs.iter().enumerate() {
                        let v: i8 = t
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("metric `{s}`")))?;
                        m = m.with_product_sign(i, v)?;
                    }
                }
                Ok(m)
            }
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Metric, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A cycle `(k, l, m)`, defined up to a nonzero factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cycle {
    k: Scalar,
    l: Vec<Scalar>,
    m: Scalar,
}

impl Cycle {
    pub fn new(k: Scalar, l: Vec<Scalar>, m: Scalar) -> Result<Cycle> {
        if l.is_empty() {
            return Err(Error::DimensionMismatch("cycle with empty l".into()));
        }
        let c = Cycle { k, l, m };
        if c.coords().iter().all(|x| x.is_exact() && x.is_zero() || *x == Scalar::Float(0.0)) {
            return Err(Error::ZeroCycle);
        }
        Ok(c)
    }

    /// 2D shorthand `[k, l, n, m]`.
    pub fn new_2d(k: Scalar, l: Scalar, n: Scalar, m: Scalar) -> Result<Cycle> {
        Cycle::new(k, vec![l, n], m)
    }

    /// 2D shorthand from integers.
    pub fn int_2d(k: i64, l: i64, n: i64, m: i64) -> Cycle {
        Cycle::new_2d(Scalar::int(k), Scalar::int(l), Scalar::int(n), Scalar::int(m))
            .expect("nonzero cycle")
    }

    /// Builds from the coordinate vector `(k, l_1, .., l_n, m)`.
    pub fn from_coords(x: &[Scalar]) -> Result<Cycle> {
        if x.len() < 3 {
            return Err(Error::DimensionMismatch(format!("{} cycle coordinates", x.len())));
        }
        Cycle::new(
            x[0].clone(),
            x[1..x.len() - 1].to_vec(),
            x[x.len() - 1].clone(),
        )
    }

    pub fn coords(&self) -> Vec<Scalar> {
        let mut v = Vec::with_capacity(self.l.len() + 2);
        v.push(self.k.clone());
        v.extend(self.l.iter().cloned());
        v.push(self.m.clone());
        v
    }

    pub fn k(&self) -> &Scalar {
        &self.k
    }

    pub fn l(&self) -> &[Scalar] {
        &self.l
    }

    pub fn m(&self) -> &Scalar {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.l.len()
    }

    /// `[k, l, n, m]` for 2D cycles.
    pub fn as_2d(&self) -> Option<[Scalar; 4]> {
        (self.dim() == 2).then(|| {
            [
                self.k.clone(),
                self.l[0].clone(),
                self.l[1].clone(),
                self.m.clone(),
            ]
        })
    }

    /// Zero-radius cycle at `w`. With a degenerate point metric this is the
    /// cycle whose orthogonal cycles are exactly those passing through `w`.
    pub fn zero_radius_at(w: &[Scalar], metric: &Metric) -> Result<Cycle> {
        check_dim(w.len(), metric)?;
        let l = w
            .iter()
            .zip(metric.product_signs())
            .map(|(x, p)| match p {
                0 => Err(Error::MetricUnsupported("zero product sign".into())),
                _ => Ok(-x * &Scalar::int(*p as i64)),
            })
            .collect::<Result<Vec<_>>>()?;
        Cycle::new(Scalar::one(), l, metric.norm_sq(w))
    }

    /// The real line `x_n = 0`, i.e. `(0, e_n, 0)`.
    pub fn real_line(dim: usize) -> Cycle {
        let mut l = vec![Scalar::zero(); dim];
        l[dim - 1] = Scalar::one();
        Cycle {
            k: Scalar::zero(),
            l,
            m: Scalar::zero(),
        }
    }

    /// The zero-radius cycle at infinity `(0, 0, 1)`.
    pub fn infinity(dim: usize) -> Cycle {
        Cycle {
            k: Scalar::zero(),
            l: vec![Scalar::zero(); dim],
            m: Scalar::one(),
        }
    }

    pub fn product(&self, other: &Cycle, metric: &Metric) -> Result<Scalar> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cycles of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        check_dim(self.dim(), metric)?;
        let mut s = &self.m * &other.k + &self.k * &other.m;
        for ((a, b), p) in self.l.iter().zip(&other.l).zip(metric.product_signs()) {
            if *p != 0 {
                s += &(Scalar::int(2 * *p as i64) * a * b);
            }
        }
        Ok(s)
    }

    pub fn self_product(&self, metric: &Metric) -> Result<Scalar> {
        self.product(self, metric)
    }

    /// `<C1,C2> / sqrt|<C1,C1><C2,C2>|`.
    pub fn normalized_product(&self, other: &Cycle, metric: &Metric) -> Result<Scalar> {
        let n1 = self.self_product(metric)?;
        let n2 = other.self_product(metric)?;
        if n1.is_zero() || n2.is_zero() {
            return Err(Error::ZeroRadiusOperand);
        }
        let p = self.product(other, metric)?;
        p.checked_div(&(&n1 * &n2).sqrt_abs())
    }

    pub fn is_zero_radius(&self, metric: &Metric) -> Result<bool> {
        Ok(self.self_product(metric)?.is_zero())
    }

    pub fn is_flat(&self) -> bool {
        self.k.is_zero()
    }

    /// Residual of the point equation `k|x|^2 - 2 sum l_i x_i + m` at `x`.
    pub fn point_residual(&self, x: &[Scalar], metric: &Metric) -> Result<Scalar> {
        check_dim(x.len(), metric)?;
        let mut s = &self.k * &metric.norm_sq(x) + &self.m;
        for (li, xi) in self.l.iter().zip(x) {
            s -= &(Scalar::int(2) * li * xi);
        }
        Ok(s)
    }

    /// Center and squared radius `|c|^2 - m/k` in the point metric.
    pub fn center_radius(&self, metric: &Metric) -> Result<(Vec<Scalar>, Scalar)> {
        check_dim(self.dim(), metric)?;
        if self.k.is_zero() {
            return Err(Error::FlatCycle);
        }
        let center: Vec<Scalar> = self
            .l
            .iter()
            .zip(metric.squares())
            .map(|(li, s)| {
                let c = li.checked_div(&self.k).expect("k nonzero");
                if s == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect();
        let r2 = metric.norm_sq(&center) - self.m.checked_div(&self.k)?;
        Ok((center, r2))
    }

    pub fn scale(&self, s: &Scalar) -> Cycle {
        Cycle {
            k: &self.k * s,
            l: self.l.iter().map(|x| x * s).collect(),
            m: &self.m * s,
        }
    }

    pub fn neg(&self) -> Cycle {
        self.scale(&Scalar::int(-1))
    }

    /// Rescales to `k = 1`.
    pub fn k_normalized(&self) -> Result<Cycle> {
        if self.k.is_zero() {
            return Err(Error::FlatOperand);
        }
        Ok(self.scale(&self.k.recip()?))
    }

    /// Canonical representative: first nonzero coordinate equal to 1.
    pub fn canonical(&self) -> Cycle {
        match self.coords().iter().find(|x| !x.is_zero()) {
            Some(lead) => self.scale(&lead.recip().expect("nonzero lead")),
            None => self.clone(),
        }
    }

    /// Projective equality (exact, or within `eps` for floats).
    pub fn projectively_equal(&self, other: &Cycle, eps: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let a = self.canonical().coords();
        let b = other.canonical().coords();
        a.iter().zip(&b).all(|(x, y)| x.approx_eq(y, eps))
    }

    /// Total order on canonical representatives.
    pub fn canonical_cmp(&self, other: &Cycle) -> Ordering {
        let a = self.canonical().coords();
        let b = other.canonical().coords();
        for (x, y) in a.iter().zip(&b) {
            let o = x.cmp_value(y);
            if o != Ordering::Equal {
                return o;
            }
        }
        a.len().cmp(&b.len())
    }

    /// `(k, l, n, m) ~ (k, l, -n, m)`: true if `other` is the mirror image.
    pub fn is_mirror_of(&self, other: &Cycle, eps: f64) -> bool {
        self.mirror().projectively_equal(other, eps)
    }

    /// Reflection in the last coordinate hyperplane.
    pub fn mirror(&self) -> Cycle {
        let mut c = self.clone();
        if let Some(last) = c.l.last_mut() {
            *last = -&*last;
        }
        c
    }

    pub fn to_mode(&self, mode: ArithMode) -> Cycle {
        Cycle {
            k: self.k.in_mode(mode),
            l: self.l.iter().map(|x| x.in_mode(mode)).collect(),
            m: self.m.in_mode(mode),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.coords().iter().all(Scalar::is_exact)
    }

    /// FSCc matrix `[[l, m], [k, l̄]]` with the curve covector turned into
    /// the Clifford vector `-e_i^2 l_i`.
    pub fn fscc_matrix(&self, metric: &Metric) -> Result<[CliffordNumber; 4]> {
        check_dim(self.dim(), metric)?;
        if metric.has_nilpotent() {
            return Err(Error::MetricUnsupported(
                "matrix form needs a non-degenerate point metric".into(),
            ));
        }
        let sig = metric.signature();
        let lc: Vec<Scalar> = self
            .l
            .iter()
            .zip(metric.squares())
            .map(|(x, s)| x * &Scalar::int(-(s as i64)))
            .collect();
        let l = CliffordNumber::vector(sig, &lc)?;
        Ok([
            l.clone(),
            CliffordNumber::scalar(sig, self.m.clone()),
            CliffordNumber::scalar(sig, self.k.clone()),
            l.conjugation(),
        ])
    }

    fn from_fscc(mat: &[CliffordNumber; 4], metric: &Metric) -> Result<Cycle> {
        let [l, m, k, _] = mat;
        // Float images carry rounding noise in the other grades.
        let scale = mat
            .iter()
            .flat_map(|x| x.terms().map(|(_, c)| c.to_f64().abs()))
            .fold(0f64, f64::max);
        let clean = |x: &CliffordNumber, grade: u32| {
            x.terms().all(|(mask, c)| {
                mask.count_ones() == grade || c.is_zero() || (!c.is_exact() && c.to_f64().abs() <= eps_cmp() * scale)
            })
        };
        if !clean(m, 0) || !clean(k, 0) || !clean(l, 1) {
            return Err(Error::InvalidMatrix("image is not a cycle matrix".into()));
        }
        let lv: Vec<Scalar> = l
            .vector_part()
            .iter()
            .zip(metric.squares())
            .map(|(x, s)| x * &Scalar::int(-(s as i64)))
            .collect();
        Cycle::new(k.scalar_part(), lv, m.scalar_part())
    }

    /// Action of a real `[[a,b],[c,d]]` on a 2D cycle by conjugation of
    /// `[[l+n, -m], [k, n-l]]`; valid for every `tau`.
    pub fn real_sl2_action(&self, g: &[Scalar; 4]) -> Result<Cycle> {
        let [k, l, n, m] = self
            .as_2d()
            .ok_or_else(|| Error::DimensionMismatch("real action needs a 2D cycle".into()))?;
        let q = [&l + &n, -&m, k.clone(), &n - &l];
        let adj = [g[3].clone(), -&g[1], -&g[2], g[0].clone()];
        let r = mat2_mul(&mat2_mul(g, &q), &adj);
        let two = Scalar::int(2);
        Cycle::new_2d(
            r[2].clone(),
            (&r[0] - &r[3]).checked_div(&two)?,
            (&r[0] + &r[3]).checked_div(&two)?,
            -&r[1],
        )
    }
}

fn mat2_mul(a: &[Scalar; 4], b: &[Scalar; 4]) -> [Scalar; 4] {
    [
        &a[0] * &b[0] + &a[1] * &b[2],
        &a[0] * &b[1] + &a[1] * &b[3],
        &a[2] * &b[0] + &a[3] * &b[2],
        &a[2] * &b[1] + &a[3] * &b[3],
    ]
}

fn check_dim(n: usize, metric: &Metric) -> Result<()> {
    if n != metric.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {n} in a {}-dimensional metric",
            metric.dim()
        )));
    }
    Ok(())
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CycleRepr {
    Obj { k: Scalar, l: Vec<Scalar>, m: Scalar },
    Arr(Vec<Scalar>),
}

impl<'de> Deserialize<'de> for Cycle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Cycle, D::Error> {
        let r = match CycleRepr::deserialize(d)? {
            CycleRepr::Obj { k, l, m } => Cycle::new(k, l, m),
            CycleRepr::Arr(v) => Cycle::from_coords(&v),
        };
        r.map_err(serde::de::Error::custom)
    }
}

/// Image of a point under a Möbius map.
#[derive(Debug, Clone, PartialEq)]
pub enum PointImage {
    Finite(Vec<Scalar>),
    Infinity,
}

fn clifford_mat_mul(a: &[CliffordNumber; 4], b: &[CliffordNumber; 4]) -> Result<[CliffordNumber; 4]> {
    let e = |i: usize, j: usize, k: usize, l: usize| -> Result<CliffordNumber> {
        a[i].geo_mul(&b[j])?.add(&a[k].geo_mul(&b[l])?)
    };
    Ok([e(0, 0, 1, 2)?, e(0, 1, 1, 3)?, e(2, 0, 3, 2)?, e(2, 1, 3, 3)?])
}

/// A 2x2 matrix `[[a, b], [c, d]]` with Clifford entries acting by
/// `x -> (ax + b)(cx + d)^{-1}` on points and `C -> M C M*` on cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusMatrix {
    sig: Signature,
    entries: [CliffordNumber; 4],
    /// Real representative when built from real matrices only.
    real: Option<[Scalar; 4]>,
}

impl MoebiusMatrix {
    /// Checks that the pseudodeterminant is a nonzero real and that
    /// `ab*, cd*, c*a, d*b` are vectors.
    pub fn new(a: CliffordNumber, b: CliffordNumber, c: CliffordNumber, d: CliffordNumber) -> Result<MoebiusMatrix> {
        let sig = a.signature();
        for x in [&b, &c, &d] {
            if x.signature() != sig {
                return Err(Error::SignatureMismatch("matrix entries".into()));
            }
        }
        let m = MoebiusMatrix {
            sig,
            entries: [a, b, c, d],
            real: None,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let [a, b, c, d] = &self.entries;
        let checks = [
            a.geo_mul(&b.reversion())?,
            c.geo_mul(&d.reversion())?,
            c.reversion().geo_mul(a)?,
            d.reversion().geo_mul(b)?,
        ];
        if checks.iter().any(|x| !x.is_vector()) {
            return Err(Error::InvalidMatrix("entry products are not vectors".into()));
        }
        let delta = self.pseudodet_clifford()?;
        if !delta.is_scalar() {
            return Err(Error::InvalidMatrix("pseudodeterminant is not real".into()));
        }
        if delta.scalar_part().is_zero() {
            return Err(Error::InvalidMatrix("pseudodeterminant is zero".into()));
        }
        Ok(())
    }

    fn pseudodet_clifford(&self) -> Result<CliffordNumber> {
        let [a, b, c, d] = &self.entries;
        a.geo_mul(&d.reversion())?.sub(&b.geo_mul(&c.reversion())?)
    }

    /// `ad* - bc*`.
    pub fn pseudodet(&self) -> Scalar {
        self.pseudodet_clifford()
            .expect("validated matrix")
            .scalar_part()
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn entries(&self) -> &[CliffordNumber; 4] {
        &self.entries
    }

    /// Real representative `[a, b, c, d]` when known.
    pub fn real_entries(&self) -> Option<&[Scalar; 4]> {
        self.real.as_ref()
    }

    pub fn identity(sig: Signature) -> MoebiusMatrix {
        MoebiusMatrix::from_real_sl2(sig, [Scalar::one(), Scalar::zero(), Scalar::zero(), Scalar::one()])
            .expect("identity")
    }

    /// `x -> x + b`.
    pub fn translation(sig: Signature, b: &[Scalar]) -> Result<MoebiusMatrix> {
        MoebiusMatrix::new(
            CliffordNumber::one(sig),
            CliffordNumber::vector(sig, b)?,
            CliffordNumber::zero(sig),
            CliffordNumber::one(sig),
        )
    }

    /// `x -> lambda x`.
    pub fn dilation(sig: Signature, lambda: &Scalar) -> Result<MoebiusMatrix> {
        MoebiusMatrix::new(
            CliffordNumber::scalar(sig, lambda.clone()),
            CliffordNumber::zero(sig),
            CliffordNumber::zero(sig),
            CliffordNumber::one(sig),
        )
    }

    /// `x -> x^{-1}`.
    pub fn inversion(sig: Signature) -> MoebiusMatrix {
        MoebiusMatrix::new(
            CliffordNumber::zero(sig),
            CliffordNumber::one(sig),
            CliffordNumber::one(sig),
            CliffordNumber::zero(sig),
        )
        .expect("inversion")
    }

    /// `x -> a x a^{-1}` up to sign, i.e. `[[a, 0], [0, -a]]`.
    pub fn reflection(sig: Signature, a: &[Scalar]) -> Result<MoebiusMatrix> {
        let v = CliffordNumber::vector(sig, a)?;
        MoebiusMatrix::new(v.clone(), CliffordNumber::zero(sig), CliffordNumber::zero(sig), v.neg())
    }

    /// Embeds a real matrix as `[[a, b e1], [c e1^{-1}, d]]`, the Möbius map
    /// `z -> (az+b)/(cz+d)` in `z = e1^{-1} x`.
    pub fn from_real_sl2(sig: Signature, g: [Scalar; 4]) -> Result<MoebiusMatrix> {
        let e1 = CliffordNumber::basis(sig, 0);
        let e1inv = e1.inverse()?;
        let mut m = MoebiusMatrix::new(
            CliffordNumber::scalar(sig, g[0].clone()),
            e1.scale(&g[1]),
            e1inv.scale(&g[2]),
            CliffordNumber::scalar(sig, g[3].clone()),
        )?;
        m.real = Some(g);
        Ok(m)
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &MoebiusMatrix) -> Result<MoebiusMatrix> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch("composing matrices".into()));
        }
        let entries = clifford_mat_mul(&self.entries, &other.entries)?;
        let real = match (&self.real, &other.real) {
            (Some(a), Some(b)) => Some(mat2_mul(a, b)),
            _ => None,
        };
        let m = MoebiusMatrix {
            sig: self.sig,
            entries,
            real,
        };
        m.validate()?;
        Ok(m)
    }

    /// `M* = [[d̄, b̄], [c̄, ā]]`.
    pub fn star(&self) -> [CliffordNumber; 4] {
        let [a, b, c, d] = &self.entries;
        [d.conjugation(), b.conjugation(), c.conjugation(), a.conjugation()]
    }

    /// `(ax + b)(cx + d)^{-1}`; an isotropic denominator maps to infinity.
    pub fn apply_point(&self, x: &[Scalar]) -> Result<PointImage> {
        let [a, b, c, d] = &self.entries;
        let xv = CliffordNumber::vector(self.sig, x)?;
        let num = a.geo_mul(&xv)?.add(b)?;
        let den = c.geo_mul(&xv)?.add(d)?;
        let inv = match den.inverse() {
            Ok(v) => v,
            Err(Error::NoInverse) => return Ok(PointImage::Infinity),
            Err(e) => return Err(e),
        };
        let y = num.geo_mul(&inv)?;
        if !y.is_vector() {
            return Err(Error::InvalidMatrix("point image is not a vector".into()));
        }
        Ok(PointImage::Finite(y.vector_part()))
    }

    /// Image of the point at infinity, `a c^{-1}`.
    pub fn apply_infinity(&self) -> Result<PointImage> {
        let [a, _, c, _] = &self.entries;
        match c.inverse() {
            Ok(inv) => Ok(PointImage::Finite(a.geo_mul(&inv)?.vector_part())),
            Err(Error::NoInverse) => Ok(PointImage::Infinity),
            Err(e) => Err(e),
        }
    }

    /// `M C M*`. Degenerate 2D metrics use the real representative.
    pub fn apply_cycle(&self, cyc: &Cycle, metric: &Metric) -> Result<Cycle> {
        if metric.signature() != self.sig {
            return Err(Error::SignatureMismatch("matrix and metric".into()));
        }
        if metric.has_nilpotent() {
            return match &self.real {
                Some(g) if cyc.dim() == 2 => cyc.real_sl2_action(g),
                _ => Err(Error::MetricUnsupported(
                    "only real matrices act on degenerate 2D metrics".into(),
                )),
            };
        }
        let c = cyc.fscc_matrix(metric)?;
        let r = clifford_mat_mul(&clifford_mat_mul(&self.entries, &c)?, &self.star())?;
        Cycle::from_fscc(&r, metric)
    }

    pub fn to_mode(&self, mode: ArithMode) -> MoebiusMatrix {
        MoebiusMatrix {
            sig: self.sig,
            entries: self.entries.clone().map(|e| e.to_mode(mode)),
            real: self.real.clone().map(|g| g.map(|x| x.in_mode(mode))),
        }
    }
}
