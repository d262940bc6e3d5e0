//! Scalar backends: exact rationals, a single-radical quadratic extension
//! `a + b*sqrt(d)`, and 64-bit floats, with promotion in that order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default comparison tolerance for floating point scalars.
pub const DEFAULT_EPS_CMP: f64 = 1e-9;
/// Rank tolerance used by floating point elimination.
pub const EPS_RANK: f64 = 1e-10;

static EPS_CMP_BITS: AtomicU64 = AtomicU64::new(DEFAULT_EPS_CMP.to_bits());

/// Current process-wide comparison tolerance for floats.
pub fn eps_cmp() -> f64 {
    f64::from_bits(EPS_CMP_BITS.load(AtomicOrdering::Relaxed))
}

/// Overrides the process-wide float comparison tolerance.
pub fn set_eps_cmp(eps: f64) {
    if eps.is_finite() && eps > 0.0 {
        EPS_CMP_BITS.store(eps.to_bits(), AtomicOrdering::Relaxed);
    }
}

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArithMode {
    #[default]
    Exact,
    Float,
}

/// Element of `Q(sqrt(d))` with `d` a positive integer that is not a square.
///
/// Constructed only through [`Scalar::quad`], which reduces the radicand and
/// demotes values with `b = 0` to rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl QuadExt {
    pub fn a(&self) -> &BigRational {
        &self.a
    }
    pub fn b(&self) -> &BigRational {
        &self.b
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    fn conj(&self) -> QuadExt {
        QuadExt {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// Norm `a^2 - b^2 d`, never zero for a valid value.
    fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.clone())
    }

    fn sign(&self) -> i8 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        if self.norm().is_positive() {
            sa
        } else {
            sb
        }
    }

    fn to_f64(&self) -> f64 {
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        rat_to_f64(&self.a) + rat_to_f64(&self.b) * d.sqrt()
    }
}

/// A scalar in one of the three backends.
#[derive(Debug, Clone)]
pub enum Scalar {
    Rational(BigRational),
    Quad(QuadExt),
    Float(f64),
}

fn rat_sign(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn big_is_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    if &s * &s == *n {
        Some(s)
    } else {
        None
    }
}

/// Exact square root of a nonnegative rational, if it is a square.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    let n = big_is_square(r.numer())?;
    let d = big_is_square(r.denom())?;
    Some(BigRational::new(n, d))
}

/// Writes `sqrt(r) = coef * sqrt(rad)` with `rad` free of small square factors.
fn split_radicand(r: &BigRational) -> (BigRational, BigInt) {
    let q = r.denom().clone();
    let mut s = r.numer() * &q;
    let mut coef = BigInt::one();
    let mut f = BigInt::from(2u32);
    let limit = BigInt::from(1000u32);
    while f < limit && &f * &f <= s {
        let f2 = &f * &f;
        while (&s % &f2).is_zero() {
            s /= &f2;
            coef *= &f;
        }
        f += 1u32;
    }
    if let Some(root) = big_is_square(&s) {
        coef *= root;
        s = BigInt::one();
    }
    (BigRational::new(coef, q), s)
}

/// Factor `c` with `sqrt(d2) = c * sqrt(d1)`, if the radicands are compatible.
fn radicand_ratio(d1: &BigInt, d2: &BigInt) -> Option<BigRational> {
    if d1 == d2 {
        return Some(BigRational::one());
    }
    let s = big_is_square(&(d1 * d2))?;
    Some(BigRational::new(s, d1.clone()))
}

enum Pair {
    Rat(BigRational, BigRational),
    Quad(QuadExt, QuadExt),
    Float(f64, f64),
}

fn pair(x: &Scalar, y: &Scalar) -> Pair {
    use Scalar::*;
    match (x, y) {
        (Rational(a), Rational(b)) => Pair::Rat(a.clone(), b.clone()),
        (Float(_), _) | (_, Float(_)) => Pair::Float(x.to_f64(), y.to_f64()),
        (Quad(p), Rational(r)) => Pair::Quad(
            p.clone(),
            QuadExt {
                a: r.clone(),
                b: BigRational::zero(),
                d: p.d.clone(),
            },
        ),
        (Rational(r), Quad(p)) => Pair::Quad(
            QuadExt {
                a: r.clone(),
                b: BigRational::zero(),
                d: p.d.clone(),
            },
            p.clone(),
        ),
        (Quad(p), Quad(q)) => match radicand_ratio(&p.d, &q.d) {
            Some(c) => Pair::Quad(
                p.clone(),
                QuadExt {
                    a: q.a.clone(),
                    b: &q.b * c,
                    d: p.d.clone(),
                },
            ),
            None => Pair::Float(x.to_f64(), y.to_f64()),
        },
    }
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Scalar {
        Scalar::Rational(BigRational::one())
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// The rational `n/d`. Panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Scalar {
        Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(r: BigRational) -> Scalar {
        Scalar::Rational(r)
    }

    pub fn float(x: f64) -> Scalar {
        Scalar::Float(x)
    }

    /// `a + b*sqrt(d)`, reduced; demotes to a rational when possible.
    pub fn quad(a: BigRational, b: BigRational, d: BigRational) -> Result<Scalar> {
        if d.is_negative() {
            return Err(Error::NegativeRadicand);
        }
        if b.is_zero() || d.is_zero() {
            return Ok(Scalar::Rational(a));
        }
        let (c, rad) = split_radicand(&d);
        if rad.is_one() {
            return Ok(Scalar::Rational(a + b * c));
        }
        Ok(Scalar::Quad(QuadExt { a, b: b * c, d: rad }))
    }

    fn from_quad(q: QuadExt) -> Scalar {
        if q.b.is_zero() {
            Scalar::Rational(q.a)
        } else {
            Scalar::Quad(q)
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Float(_))
    }

    pub fn is_float(&self) -> bool {
        matches!(self, Scalar::Float(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Radicand of a quadratic-extension value.
    pub fn radicand(&self) -> Option<&BigInt> {
        match self {
            Scalar::Quad(q) => Some(&q.d),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => rat_to_f64(r),
            Scalar::Quad(q) => q.to_f64(),
            Scalar::Float(x) => *x,
        }
    }

    /// Promotes to the float backend.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    /// Converts to the requested mode (exact values are left unchanged).
    pub fn in_mode(&self, mode: ArithMode) -> Scalar {
        match mode {
            ArithMode::Exact => self.clone(),
            ArithMode::Float => self.to_float(),
        }
    }

    /// Sign, with floats within `eps_cmp` of zero counted as zero.
    pub fn sign(&self) -> i8 {
        match self {
            Scalar::Rational(r) => rat_sign(r),
            Scalar::Quad(q) => q.sign(),
            Scalar::Float(x) => {
                if x.abs() <= eps_cmp() {
                    0
                } else if *x > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign() == 0
    }

    /// Zero test with an explicit float tolerance.
    pub fn is_zero_tol(&self, eps: f64) -> bool {
        match self {
            Scalar::Float(x) => x.abs() <= eps,
            _ => self.sign() == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        (self - &Scalar::one()).is_zero()
    }

    pub fn abs(&self) -> Scalar {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Total order (exact for exact backends, tolerant for floats).
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self - other).sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// Relative comparison used for float-backed equality.
    pub fn approx_eq(&self, other: &Scalar, eps: f64) -> bool {
        if self.is_exact() && other.is_exact() {
            return (self - other).sign() == 0;
        }
        let a = self.to_f64();
        let b = other.to_f64();
        (a - b).abs() <= eps * 1f64.max(a.abs()).max(b.abs())
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        if other.is_exact() && other.sign() == 0 {
            return Err(Error::DivByZero);
        }
        Ok(match pair(self, other) {
            Pair::Rat(a, b) => Scalar::Rational(a / b),
            Pair::Float(a, b) => {
                if b == 0.0 {
                    return Err(Error::DivByZero);
                }
                Scalar::Float(a / b)
            }
            Pair::Quad(x, y) => {
                let n = y.norm();
                let c = y.conj();
                let num = quad_mul(&x, &c);
                Scalar::from_quad(QuadExt {
                    a: num.a / &n,
                    b: num.b / n,
                    d: num.d,
                })
            }
        })
    }

    pub fn recip(&self) -> Result<Scalar> {
        Scalar::one().checked_div(self)
    }

    /// Square root: exact rational when possible, otherwise a fresh
    /// quadratic-extension value in exact mode, or an f64 root.
    pub fn try_sqrt(&self) -> Result<Scalar> {
        match self {
            Scalar::Rational(r) => {
                if r.is_negative() {
                    return Err(Error::NegativeRadicand);
                }
                if let Some(s) = rational_sqrt(r) {
                    return Ok(Scalar::Rational(s));
                }
                Scalar::quad(BigRational::zero(), BigRational::one(), r.clone())
            }
            Scalar::Quad(_) => Err(Error::QuadRadicand),
            Scalar::Float(x) => {
                if *x < 0.0 {
                    if x.abs() <= eps_cmp() {
                        return Ok(Scalar::Float(0.0));
                    }
                    return Err(Error::NegativeRadicand);
                }
                Ok(Scalar::Float(x.sqrt()))
            }
        }
    }

    /// Square root that stays inside the value's own field, if possible.
    ///
    /// Rationals may produce a new radical; quadratic-extension values are
    /// denested `sqrt(a + b sqrt d) = p + q sqrt d` when `p, q` are rational.
    pub fn sqrt_in_field(&self) -> Option<Scalar> {
        match self {
            Scalar::Quad(x) => {
                if x.sign() < 0 {
                    return None;
                }
                let d = BigRational::from_integer(x.d.clone());
                let disc = &x.a * &x.a - &x.b * &x.b * &d;
                let s = rational_sqrt(&disc)?;
                let two = BigRational::from_integer(BigInt::from(2));
                for cand in [(&x.a + &s) / &two, (&x.a - &s) / &two] {
                    if !cand.is_positive() {
                        continue;
                    }
                    if let Some(p) = rational_sqrt(&cand) {
                        let q = &x.b / (&two * &p);
                        let root = QuadExt {
                            a: p,
                            b: q,
                            d: x.d.clone(),
                        };
                        let root = if root.sign() < 0 {
                            QuadExt {
                                a: -root.a,
                                b: -root.b,
                                d: root.d,
                            }
                        } else {
                            root
                        };
                        return Some(Scalar::from_quad(root));
                    }
                }
                None
            }
            _ => self.try_sqrt().ok(),
        }
    }

    /// `sqrt|x|`, exact when the field allows, otherwise an f64 root.
    pub fn sqrt_abs(&self) -> Scalar {
        let a = self.abs();
        a.sqrt_in_field()
            .unwrap_or_else(|| Scalar::Float(a.to_f64().abs().sqrt()))
    }

    /// Parses a scalar, reading decimal literals as exact rationals.
    pub fn parse_exact(s: &str) -> Result<Scalar> {
        parse_scalar(s, true)
    }
}

fn quad_mul(x: &QuadExt, y: &QuadExt) -> QuadExt {
    let d = BigRational::from_integer(x.d.clone());
    QuadExt {
        a: &x.a * &y.a + &x.b * &y.b * d,
        b: &x.a * &y.b + &x.b * &y.a,
        d: x.d.clone(),
    }
}

fn add_impl(x: &Scalar, y: &Scalar) -> Scalar {
    match pair(x, y) {
        Pair::Rat(a, b) => Scalar::Rational(a + b),
        Pair::Float(a, b) => Scalar::Float(a + b),
        Pair::Quad(p, q) => Scalar::from_quad(QuadExt {
            a: p.a + q.a,
            b: p.b + q.b,
            d: p.d,
        }),
    }
}

fn mul_impl(x: &Scalar, y: &Scalar) -> Scalar {
    match pair(x, y) {
        Pair::Rat(a, b) => Scalar::Rational(a * b),
        Pair::Float(a, b) => Scalar::Float(a * b),
        Pair::Quad(p, q) => Scalar::from_quad(quad_mul(&p, &q)),
    }
}

fn neg_impl(x: &Scalar) -> Scalar {
    match x {
        Scalar::Rational(r) => Scalar::Rational(-r.clone()),
        Scalar::Float(f) => Scalar::Float(-f),
        Scalar::Quad(q) => Scalar::Quad(QuadExt {
            a: -q.a.clone(),
            b: -q.b.clone(),
            d: q.d.clone(),
        }),
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let f: fn(&Scalar, &Scalar) -> Scalar = $body;
                f(self, rhs)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, add_impl);
binop!(Sub, sub, |x, y| add_impl(x, &neg_impl(y)));
binop!(Mul, mul, mul_impl);
// Division panics on an exact zero divisor; library code uses `checked_div`.
binop!(Div, div, |x, y| x.checked_div(y).expect("division by zero"));

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        neg_impl(&self)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        neg_impl(self)
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = add_impl(self, rhs);
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = add_impl(self, &neg_impl(rhs));
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = mul_impl(self, rhs);
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Float(a), Scalar::Float(b)) => a == b,
            (Scalar::Float(_), _) | (_, Scalar::Float(_)) => self.to_f64() == other.to_f64(),
            _ => (self - other).sign() == 0,
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Scalar {
        Scalar::Rational(r)
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Scalar {
        Scalar::Float(x)
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{}", fmt_rat(r)),
            Scalar::Float(x) => write!(f, "{:?}", x),
            Scalar::Quad(q) => {
                if !q.a.is_zero() {
                    write!(f, "{}", fmt_rat(&q.a))?;
                    if q.b.is_positive() {
                        write!(f, "+")?;
                    }
                }
                if q.b.is_one() {
                    write!(f, "sqrt({})", q.d)
                } else if (-&q.b).is_one() {
                    write!(f, "-sqrt({})", q.d)
                } else {
                    write!(f, "{}*sqrt({})", fmt_rat(&q.b), q.d)
                }
            }
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::Parse(format!("bad rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.trim_start_matches('+').parse().map_err(|_| err())?;
        Ok(BigRational::from_integer(n))
    }
}

fn parse_decimal_exact(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("bad decimal `{s}`"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(err());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let mut n: BigInt = digits.parse().map_err(|_| err())?;
    if neg {
        n = -n;
    }
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

fn looks_decimal(s: &str) -> bool {
    s.contains('.') || s.contains(['e', 'E']) || s.contains("inf") || s.contains("NaN")
}

fn parse_scalar(s: &str, exact_decimals: bool) -> Result<Scalar> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar".into()));
    }
    if let Some(idx) = s.find("sqrt(") {
        let close = s[idx..]
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unbalanced sqrt in `{s}`")))?;
        let d = parse_rational(&s[idx + 5..idx + close])?;
        let prefix = s[..idx].trim_end_matches('*');
        // prefix is "", "-", "B", "A+B", "A-B", "A+", "A-"
        let split = prefix
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (a, b) = match split {
            Some(i) => (&prefix[..i], &prefix[i..]),
            None => ("0", prefix),
        };
        let b = match b {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        return Scalar::quad(parse_rational(a)?, b, d);
    }
    if looks_decimal(s) {
        if exact_decimals {
            return Ok(Scalar::Rational(parse_decimal_exact(s)?));
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad float `{s}`")))?;
        return Ok(Scalar::Float(x));
    }
    Ok(Scalar::Rational(parse_rational(s)?))
}

impl FromStr for Scalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scalar> {
        parse_scalar(s, false)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

struct ScalarVisitor;

impl<'de> de::Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number or a scalar string such as \"1/2\" or \"1+2*sqrt(3)\"")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Scalar, E> {
        Ok(Scalar::int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Scalar, E> {
        Ok(Scalar::Rational(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Scalar, E> {
        Ok(Scalar::Float(v))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Scalar, D::Error> {
        deserializer.deserialize_any(ScalarVisitor)
    }
}

/// Greatest common divisor helper exposed for callers working with integers.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}
