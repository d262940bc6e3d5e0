//! Equivalence of triples of cycles describing the same loxodrome.
//!
//! A triple (C1, C2, C3) has C1 orthogonal to C2 and C3, and C2, C3
//! spanning a hyperbolic pencil.

use crate::cycle::{Cycle, Metric};
use crate::error::{Error, Result};
use crate::numerics::eps_cmp;
use crate::relations::{rank, small};

pub const LOXODROME_TOL: f64 = 1e-6;

/// Outcome of each condition, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoxodromeReport {
    pub same_pencil: bool,
    pub equal_products: bool,
    pub angle_identity: bool,
    /// Both sides of the angle identity.
    pub lhs: f64,
    pub rhs: f64,
}

impl LoxodromeReport {
    pub fn holds(&self) -> bool {
        self.same_pencil && self.equal_products && self.angle_identity
    }
}

/// Normalised product with the sign chosen so that a cycle paired with
/// itself gives +1 whatever the sign of its self-product.
pub fn signed_normalized_product(a: &Cycle, b: &Cycle, metric: &Metric) -> Result<f64> {
    let na = a.self_product(metric)?.to_f64();
    let nb = b.self_product(metric)?.to_f64();
    let den = (na * nb).abs().sqrt();
    if den == 0.0 {
        return Err(Error::ZeroRadiusOperand);
    }
    let sigma = if na < 0.0 && nb < 0.0 { -1.0 } else { 1.0 };
    Ok(a.product(b, metric)?.to_f64() / (sigma * den))
}

fn validate(t: &[Cycle; 3], metric: &Metric, eps: f64) -> Result<()> {
    for j in [1, 2] {
        if !small(&t[0].canonical().product(&t[j].canonical(), metric)?, eps) {
            return Err(Error::InvalidTriple(format!("first cycle is not orthogonal to cycle {}", j + 1)));
        }
    }
    let p = t[1].product(&t[2], metric)?;
    let gap = &p * &p - t[1].self_product(metric)? * t[2].self_product(metric)?;
    let neg = if gap.is_exact() { gap.sign() < 0 } else { gap.to_f64() < -eps };
    if neg {
        return Err(Error::InvalidTriple("second and third cycles intersect".into()));
    }
    if rank(&[t[1].coords(), t[2].coords()]) < 2 {
        return Err(Error::InvalidTriple("second and third cycles coincide".into()));
    }
    for c in t {
        if c.is_zero_radius(metric)? {
            return Err(Error::InvalidTriple("zero-radius cycle in triple".into()));
        }
    }
    Ok(())
}

fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Evaluates the three conditions for `t` and `u` (with j = 2 in the
/// angle identity).
pub fn loxodrome_report(t: &[Cycle; 3], u: &[Cycle; 3], metric: &Metric) -> Result<LoxodromeReport> {
    let eps = eps_cmp();
    validate(t, metric, eps)?;
    validate(u, metric, eps)?;
    let span = |a: &[Cycle; 3], b: &Cycle| rank(&[a[1].coords(), a[2].coords(), b.coords()]) == 2;
    let same_pencil = span(t, &u[1]) && span(t, &u[2]) && span(u, &t[1]) && span(u, &t[2]);

    let lam = signed_normalized_product(&t[1], &t[2], metric)?.abs();
    let lam_u = signed_normalized_product(&u[1], &u[2], metric)?.abs();
    let equal_products = (lam - lam_u).abs() <= LOXODROME_TOL * lam.max(1.0);

    let num = signed_normalized_product(&t[1], &u[1], metric)?.abs().max(1.0).acosh();
    let den = lam.max(1.0).acosh();
    let cos = signed_normalized_product(&t[0], &u[0], metric)?.clamp(-1.0, 1.0);
    let rhs = cos.acos() / (2.0 * std::f64::consts::PI);
    let (lhs, angle_identity) = if den <= LOXODROME_TOL {
        (num, num <= LOXODROME_TOL && frac_dist(rhs) <= LOXODROME_TOL)
    } else {
        let lhs = num / den;
        (lhs, frac_dist(lhs - rhs) <= LOXODROME_TOL)
    };
    Ok(LoxodromeReport {
        same_pencil,
        equal_products,
        angle_identity,
        lhs,
        rhs,
    })
}

pub fn loxodrome_triples_equivalent(t: &[Cycle; 3], u: &[Cycle; 3], metric: &Metric) -> Result<bool> {
    Ok(loxodrome_report(t, u, metric)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::Signature;
    use crate::cycle::MoebiusMatrix;
    use crate::numerics::Scalar;

    fn circle(r2: i64) -> Cycle {
        Cycle::int_2d(1, 0, 0, -r2)
    }

    fn base() -> [Cycle; 3] {
        [Cycle::int_2d(0, 0, 1, 0), circle(1), circle(256)]
    }

    #[test]
    fn identical_and_rescaled() {
        let m = Metric::elliptic();
        let t = base();
        assert!(loxodrome_triples_equivalent(&t, &t, &m).unwrap());
        let mut u = t.clone();
        u[1] = u[1].scale(&Scalar::int(2));
        assert!(loxodrome_triples_equivalent(&t, &u, &m).unwrap());
    }

    #[test]
    fn quarter_turn_spiral() {
        // Rotating by a quarter turn scales by 16^(1/4) = 2 along the spiral.
        let m = Metric::elliptic();
        let t = base();
        let u = [Cycle::int_2d(0, 1, 0, 0), circle(4), circle(1024)];
        let r = loxodrome_report(&t, &u, &m).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!((r.lhs - 0.25).abs() < 1e-12);
        // The same rotation with the wrong scale fails only the identity.
        let w = [Cycle::int_2d(0, 1, 0, 0), circle(9), circle(2304)];
        let r = loxodrome_report(&t, &w, &m).unwrap();
        assert!(r.same_pencil && r.equal_products && !r.angle_identity);
    }

    #[test]
    fn broken_lambda() {
        let m = Metric::elliptic();
        let t = base();
        let u = [t[0].clone(), circle(1), circle(4)];
        let r = loxodrome_report(&t, &u, &m).unwrap();
        assert!(r.same_pencil && !r.equal_products);
    }

    #[test]
    fn flt_invariance() {
        let m = Metric::elliptic();
        let sig = Signature::new(2, 0, 0).unwrap();
        let g = MoebiusMatrix::translation(sig, &[Scalar::int(3), Scalar::int(-1)])
            .unwrap()
            .compose(&MoebiusMatrix::inversion(sig))
            .unwrap();
        let t = base();
        let u = [Cycle::int_2d(0, 1, 0, 0), circle(4), circle(1024)];
        let map = |x: &[Cycle; 3]| -> [Cycle; 3] {
            [0, 1, 2].map(|i| g.apply_cycle(&x[i], &m).unwrap())
        };
        assert!(loxodrome_triples_equivalent(&map(&t), &map(&u), &m).unwrap());
    }

    #[test]
    fn invalid_triples() {
        let m = Metric::elliptic();
        let bad = [Cycle::int_2d(0, 1, 0, 2), circle(1), circle(256)];
        assert!(matches!(loxodrome_triples_equivalent(&bad, &base(), &m), Err(Error::InvalidTriple(_))));
        let crossing = [Cycle::int_2d(0, 0, 1, 0), circle(1), Cycle::int_2d(1, 1, 0, -1)];
        assert!(matches!(loxodrome_triples_equivalent(&crossing, &base(), &m), Err(Error::InvalidTriple(_))));
    }
}
