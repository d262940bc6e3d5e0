//! The real Clifford algebra Cl(p,q,r) over a [`Scalar`] backend.
//!
//! Generators `e1..ep` square to -1, the next `q` square to +1 and the last
//! `r` are nilpotent. Basis blades are bitmasks of generator indices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{ArithMode, Scalar};

/// Largest supported number of generators.
pub const MAX_GENERATORS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub p: u8,
    pub q: u8,
    pub r: u8,
}

impl Signature {
    pub fn new(p: u8, q: u8, r: u8) -> Result<Signature> {
        let n = p as usize + q as usize + r as usize;
        if n == 0 || n > MAX_GENERATORS {
            return Err(Error::InvalidSignature(format!(
                "{p},{q},{r}: need 1 <= n <= {MAX_GENERATORS}"
            )));
        }
        Ok(Signature { p, q, r })
    }

    /// Cl(n,0,0), the model of Euclidean space.
    pub fn euclidean(n: usize) -> Result<Signature> {
        Signature::new(n as u8, 0, 0)
    }

    pub fn dim(&self) -> usize {
        self.p as usize + self.q as usize + self.r as usize
    }

    /// Square of generator `i` (0-based): -1, +1 or 0.
    pub fn square(&self, i: usize) -> i8 {
        if i < self.p as usize {
            -1
        } else if i < (self.p + self.q) as usize {
            1
        } else {
            0
        }
    }

    pub fn squares(&self) -> Vec<i8> {
        (0..self.dim()).map(|i| self.square(i)).collect()
    }

    /// Signature from a list of generator squares, which must be grouped as
    /// all -1, then +1, then 0.
    pub fn from_squares(sq: &[i8]) -> Result<Signature> {
        let p = sq.iter().take_while(|&&s| s == -1).count();
        let q = sq[p..].iter().take_while(|&&s| s == 1).count();
        let r = sq[p + q..].iter().take_while(|&&s| s == 0).count();
        if p + q + r != sq.len() {
            return Err(Error::InvalidSignature(format!("{sq:?} is not ordered")));
        }
        Signature::new(p as u8, q as u8, r as u8)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.q, self.r)
    }
}

impl FromStr for Signature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Signature> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("signature `{s}` is not p,q,r")));
        }
        let num = |x: &str| {
            x.parse::<u8>()
                .map_err(|_| Error::Parse(format!("signature `{s}`")))
        };
        Signature::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

/// Product of two basis blades: (sign, mask), sign 0 when a nilpotent
/// generator is squared.
pub fn blade_product(sig: &Signature, a: u32, b: u32) -> (i8, u32) {
    let mut swaps = 0u32;
    let mut bits = b;
    while bits != 0 {
        let j = bits.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bits &= bits - 1;
    }
    let mut sign: i8 = if swaps % 2 == 0 { 1 } else { -1 };
    let mut common = a & b;
    while common != 0 {
        let i = common.trailing_zeros() as usize;
        sign *= sig.square(i);
        common &= common - 1;
    }
    (sign, a ^ b)
}

fn grade(mask: u32) -> u32 {
    mask.count_ones()
}

/// Element of Cl(p,q,r).
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordNumber {
    sig: Signature,
    terms: BTreeMap<u32, Scalar>,
}

impl CliffordNumber {
    pub fn zero(sig: Signature) -> CliffordNumber {
        CliffordNumber {
            sig,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(sig: Signature, s: Scalar) -> CliffordNumber {
        CliffordNumber::blade(sig, 0, s)
    }

    pub fn one(sig: Signature) -> CliffordNumber {
        CliffordNumber::scalar(sig, Scalar::one())
    }

    /// `s * e_mask`.
    pub fn blade(sig: Signature, mask: u32, s: Scalar) -> CliffordNumber {
        let mut x = CliffordNumber::zero(sig);
        x.insert(mask, s);
        x
    }

    /// Generator `e_{i+1}` (0-based index `i`).
    pub fn basis(sig: Signature, i: usize) -> CliffordNumber {
        CliffordNumber::blade(sig, 1 << i, Scalar::one())
    }

    /// Embeds a vector `sum x_i e_i`.
    pub fn vector(sig: Signature, x: &[Scalar]) -> Result<CliffordNumber> {
        if x.len() != sig.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in Cl({sig})",
                x.len()
            )));
        }
        let mut v = CliffordNumber::zero(sig);
        for (i, xi) in x.iter().enumerate() {
            v.insert(1 << i, xi.clone());
        }
        Ok(v)
    }

    fn insert(&mut self, mask: u32, s: Scalar) {
        if s.is_exact() && s.is_zero() || s == Scalar::Float(0.0) {
            self.terms.remove(&mask);
        } else {
            self.terms.insert(mask, s);
        }
    }

    fn accumulate(&mut self, mask: u32, s: &Scalar) {
        let v = match self.terms.get(&mask) {
            Some(old) => old + s,
            None => s.clone(),
        };
        self.insert(mask, v);
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Nonzero terms keyed by blade bitmask.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Scalar)> {
        self.terms.iter().map(|(m, s)| (*m, s))
    }

    pub fn coefficient(&self, mask: u32) -> Scalar {
        self.terms.get(&mask).cloned().unwrap_or_else(Scalar::zero)
    }

    fn check_sig(&self, other: &CliffordNumber) -> Result<()> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch(format!(
                "Cl({}) vs Cl({})",
                self.sig, other.sig
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &CliffordNumber) -> Result<CliffordNumber> {
        self.check_sig(other)?;
        let mut out = self.clone();
        for (m, s) in &other.terms {
            out.accumulate(*m, s);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CliffordNumber) -> Result<CliffordNumber> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CliffordNumber {
        self.scale(&Scalar::int(-1))
    }

    pub fn scale(&self, s: &Scalar) -> CliffordNumber {
        let mut out = CliffordNumber::zero(self.sig);
        for (m, c) in &self.terms {
            out.insert(*m, c * s);
        }
        out
    }

    /// Geometric product.
    pub fn geo_mul(&self, other: &CliffordNumber) -> Result<CliffordNumber> {
        self.check_sig(other)?;
        let mut out = CliffordNumber::zero(self.sig);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (sign, mask) = blade_product(&self.sig, *ma, *mb);
                if sign == 0 {
                    continue;
                }
                let mut c = ca * cb;
                if sign < 0 {
                    c = -c;
                }
                out.accumulate(mask, &c);
            }
        }
        Ok(out)
    }

    fn map_grades(&self, f: impl Fn(u32) -> bool) -> CliffordNumber {
        let mut out = CliffordNumber::zero(self.sig);
        for (m, c) in &self.terms {
            out.insert(*m, if f(grade(*m)) { -c } else { c.clone() });
        }
        out
    }

    /// Reversion `a*`: fixes vectors, reverses products.
    pub fn reversion(&self) -> CliffordNumber {
        self.map_grades(|g| (g * g.saturating_sub(1) / 2) % 2 == 1)
    }

    /// Conjugation `ā`: negates vectors, reverses products.
    pub fn conjugation(&self) -> CliffordNumber {
        self.map_grades(|g| (g * (g + 1) / 2) % 2 == 1)
    }

    /// Main automorphism: negates vectors, preserves product order.
    pub fn grade_involution(&self) -> CliffordNumber {
        self.map_grades(|g| g % 2 == 1)
    }

    pub fn scalar_part(&self) -> Scalar {
        self.coefficient(0)
    }

    /// Grade-1 coefficients `x_1..x_n`.
    pub fn vector_part(&self) -> Vec<Scalar> {
        (0..self.sig.dim())
            .map(|i| self.coefficient(1 << i))
            .collect()
    }

    pub fn grade_part(&self, g: u32) -> CliffordNumber {
        let mut out = CliffordNumber::zero(self.sig);
        for (m, c) in &self.terms {
            if grade(*m) == g {
                out.insert(*m, c.clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Scalar::is_zero)
    }

    /// True when all non-scalar coefficients vanish.
    pub fn is_scalar(&self) -> bool {
        self.terms
            .iter()
            .all(|(m, c)| *m == 0 || c.is_zero())
    }

    /// True when only grade-1 coefficients survive (zero counts).
    pub fn is_vector(&self) -> bool {
        self.terms
            .iter()
            .all(|(m, c)| grade(*m) == 1 || c.is_zero())
    }

    /// `|a|^2 = a ā`, defined for products of vectors.
    pub fn modulus_sq(&self) -> Result<Scalar> {
        let p = self.geo_mul(&self.conjugation())?;
        if !p.is_scalar() {
            return Err(Error::NotVectorProduct);
        }
        Ok(p.scalar_part())
    }

    /// Inverse `ā / |a|^2` of a product of vectors.
    pub fn inverse(&self) -> Result<CliffordNumber> {
        let n = self.modulus_sq()?;
        if n.is_zero() {
            return Err(Error::NoInverse);
        }
        Ok(self.conjugation().scale(&n.recip()?))
    }

    pub fn to_mode(&self, mode: ArithMode) -> CliffordNumber {
        let mut out = CliffordNumber::zero(self.sig);
        for (m, c) in &self.terms {
            out.insert(*m, c.in_mode(mode));
        }
        out
    }
}

/// Inverse of a vector `x̄ / |x|^2`.
pub fn vec_inverse(sig: Signature, x: &[Scalar]) -> Result<CliffordNumber> {
    CliffordNumber::vector(sig, x)?.inverse()
}

fn blade_name(mask: u32) -> String {
    let mut s = String::from("e");
    for i in 0..32 {
        if mask & (1 << i) != 0 {
            s.push_str(&(i + 1).to_string());
        }
    }
    s
}

impl fmt::Display for CliffordNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.sign() < 0 && !matches!(c, Scalar::Quad(_));
            let mag = if neg { -c } else { c.clone() };
            let body = match (*m, mag.is_one()) {
                (0, _) => format!("{mag}"),
                (_, true) => blade_name(*m),
                (_, false) => match mag {
                    Scalar::Quad(_) => format!("({mag})*{}", blade_name(*m)),
                    _ => format!("{mag}*{}", blade_name(*m)),
                },
            };
            match (idx, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parses text like `3*e1 + 4*e12 - 1/2` in the given signature.
pub fn parse_clifford(sig: Signature, text: &str) -> Result<CliffordNumber> {
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut prev: Option<char> = None;
    let mut depth = 0i32;
    for ch in text.chars() {
        if ch.is_whitespace() {
            continue;
        }
        // A sign after a mantissa digit and `e` is a float exponent.
        let exponent = prev == Some('e')
            && cur[..cur.len() - 1]
                .chars()
                .last()
                .is_some_and(|c| c.is_ascii_digit() || c == '.');
        if (ch == '+' || ch == '-')
            && depth == 0
            && !exponent
            && !matches!(prev, None | Some('*') | Some('/') | Some('('))
        {
            terms.push(std::mem::take(&mut cur));
        }
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        cur.push(ch);
        prev = Some(ch);
    }
    terms.push(cur);
    let mut out = CliffordNumber::zero(sig);
    for t in terms.iter().filter(|t| !t.is_empty()) {
        let (neg, body) = match t.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let mut coef = Scalar::one();
        let mut blade = CliffordNumber::one(sig);
        for factor in split_top_level(body, '*') {
            let factor = factor
                .strip_prefix('(')
                .and_then(|f| f.strip_suffix(')'))
                .unwrap_or(factor);
            if let Some(idx) = factor.strip_prefix('e') {
                for d in idx.chars() {
                    let i = d
                        .to_digit(10)
                        .ok_or_else(|| Error::Parse(format!("bad blade `{factor}`")))?
                        as usize;
                    if i == 0 || i > sig.dim() {
                        return Err(Error::Parse(format!("blade `{factor}` outside Cl({sig})")));
                    }
                    blade = blade.geo_mul(&CliffordNumber::basis(sig, i - 1))?;
                }
            } else {
                coef = &coef * &factor.parse::<Scalar>()?;
            }
        }
        if neg {
            coef = -coef;
        }
        out = out.add(&blade.scale(&coef))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(p: u8, q: u8, r: u8) -> Signature {
        Signature::new(p, q, r).unwrap()
    }

    #[test]
    fn generator_squares() {
        let s = sig(2, 0, 0);
        let e1 = CliffordNumber::basis(s, 0);
        assert_eq!(e1.geo_mul(&e1).unwrap(), CliffordNumber::scalar(s, Scalar::int(-1)));
        let t = sig(1, 1, 1);
        let e3 = CliffordNumber::basis(t, 2);
        assert!(e3.geo_mul(&e3).unwrap().is_zero());
    }

    #[test]
    fn expand_sum_difference() {
        let s = sig(2, 0, 0);
        let a = parse_clifford(s, "e1 + e2").unwrap();
        let b = parse_clifford(s, "e1 - e2").unwrap();
        assert_eq!(a.geo_mul(&b).unwrap(), parse_clifford(s, "-2*e12").unwrap());
    }

    #[test]
    fn involutions() {
        let s = sig(2, 0, 0);
        let e12 = parse_clifford(s, "e12").unwrap();
        assert_eq!(e12.reversion(), e12.neg());
        let x = parse_clifford(s, "3*e1 + 4*e2").unwrap();
        assert_eq!(x.conjugation(), x.neg());
        let e1 = CliffordNumber::basis(sig(1, 0, 0), 0);
        assert_eq!(e1.geo_mul(&e1).unwrap().scalar_part(), Scalar::int(-1));
    }

    #[test]
    fn moduli() {
        let s = sig(2, 0, 0);
        let x = parse_clifford(s, "3*e1 + 4*e2").unwrap();
        assert_eq!(x.modulus_sq().unwrap(), Scalar::int(25));
        let y = CliffordNumber::basis(sig(0, 1, 0), 0);
        assert_eq!(y.modulus_sq().unwrap(), Scalar::int(-1));
        assert_eq!(CliffordNumber::one(s).modulus_sq().unwrap(), Scalar::one());
        let biv = parse_clifford(s, "1 + e1 + e12").unwrap();
        let _ = biv.modulus_sq();
    }

    #[test]
    fn vector_inverses() {
        let s = sig(2, 0, 0);
        let inv = vec_inverse(s, &[Scalar::one(), Scalar::zero()]).unwrap();
        assert_eq!(inv, parse_clifford(s, "-e1").unwrap());
        // (2 e1)^{-1} = -e1/2, so that the product is one.
        let inv2 = vec_inverse(s, &[Scalar::int(2), Scalar::zero()]).unwrap();
        assert_eq!(inv2, parse_clifford(s, "-1/2*e1").unwrap());
        let x = parse_clifford(s, "2*e1").unwrap();
        assert_eq!(x.geo_mul(&inv2).unwrap(), CliffordNumber::one(s));
        let t = sig(1, 1, 1);
        assert_eq!(
            vec_inverse(t, &[Scalar::zero(), Scalar::zero(), Scalar::one()]),
            Err(Error::NoInverse)
        );
    }

    #[test]
    fn text_forms() {
        let s: Signature = "2,1,0".parse().unwrap();
        assert_eq!(s, sig(2, 1, 0));
        assert_eq!(s.to_string(), "2,1,0");
        let x = parse_clifford(s, "3*e1 + 4*e12 - 1/2").unwrap();
        let y = parse_clifford(s, &x.to_string()).unwrap();
        assert_eq!(x, y);
        let q = CliffordNumber::basis(s, 1).scale(&"1+2*sqrt(2)".parse().unwrap());
        assert_eq!(parse_clifford(s, &q.to_string()).unwrap(), q);
        let f = parse_clifford(s, "1e-3*e1 - 2.5").unwrap();
        assert_eq!(f.coefficient(1), Scalar::float(1e-3));
        assert_eq!(parse_clifford(s, "e21").unwrap(), parse_clifford(s, "-e12").unwrap());
        assert!(Signature::new(0, 0, 0).is_err());
        assert!(Signature::new(9, 0, 0).is_err());
    }

    #[test]
    fn signature_mismatch() {
        let a = CliffordNumber::basis(sig(2, 0, 0), 0);
        let b = CliffordNumber::basis(sig(1, 1, 0), 0);
        assert!(matches!(a.geo_mul(&b), Err(Error::SignatureMismatch(_))));
    }
}
