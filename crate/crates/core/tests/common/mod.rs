//! Random inputs shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use moebinv::clifford::Signature;
use moebinv::cycle::{Cycle, Metric, MoebiusMatrix};
use moebinv::figure::Figure;
use moebinv::numerics::Scalar;
use moebinv::relations::{Relation, TangentSign};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rat(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::ratio(rng.gen_range(-12..=12), rng.gen_range(1..=4))
}

pub fn nonzero_rat(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let x = rat(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn vec2(rng: &mut ChaCha8Rng) -> Vec<Scalar> {
    vec![rat(rng), rat(rng)]
}

/// A random 2D cycle with nonzero self-product.
pub fn cycle(rng: &mut ChaCha8Rng, metric: &Metric) -> Cycle {
    loop {
        let k = if rng.gen_bool(0.15) { Scalar::zero() } else { nonzero_rat(rng) };
        let c = Cycle::new_2d(k, rat(rng), rat(rng), rat(rng));
        if let Ok(c) = c {
            if !c.self_product(metric).unwrap().is_zero() {
                return c;
            }
        }
    }
}

/// A circle with real radius in the elliptic metric.
pub fn circle(rng: &mut ChaCha8Rng) -> Cycle {
    let c = vec2(rng);
    let r2 = Scalar::ratio(rng.gen_range(1..=40), rng.gen_range(1..=4));
    circle_at(&c, &r2)
}

pub fn circle_at(c: &[Scalar], r2: &Scalar) -> Cycle {
    let m = &c[0] * &c[0] + &c[1] * &c[1] - r2;
    Cycle::new_2d(Scalar::one(), c[0].clone(), c[1].clone(), m).unwrap()
}

fn sl2(rng: &mut ChaCha8Rng) -> [Scalar; 4] {
    // Product of elementary factors, so the determinant is exactly 1.
    let t = rat(rng);
    let s = rat(rng);
    let a = nonzero_rat(rng);
    let ai = a.recip().unwrap();
    let one = Scalar::one;
    let zero = Scalar::zero;
    let upper = [one(), t, zero(), one()];
    let lower = [one(), zero(), s, one()];
    let diag = [a, zero(), zero(), ai];
    mul2(&mul2(&upper, &lower), &diag)
}

fn mul2(x: &[Scalar; 4], y: &[Scalar; 4]) -> [Scalar; 4] {
    [
        &x[0] * &y[0] + &x[1] * &y[2],
        &x[0] * &y[1] + &x[1] * &y[3],
        &x[2] * &y[0] + &x[3] * &y[2],
        &x[2] * &y[1] + &x[3] * &y[3],
    ]
}

/// A random Möbius map of the plane with point metric `metric`, built from
/// translations, dilations, the inversion, reflections and real SL2 maps.
/// Degenerate metrics only get real SL2 maps.
pub fn flt(rng: &mut ChaCha8Rng, metric: &Metric) -> MoebiusMatrix {
    let sig: Signature = metric.signature();
    if metric.has_nilpotent() {
        return MoebiusMatrix::from_real_sl2(sig, sl2(rng)).unwrap();
    }
    let mut m = MoebiusMatrix::identity(sig);
    for _ in 0..3 {
        let f = match rng.gen_range(0..5) {
            0 => MoebiusMatrix::translation(sig, &vec2(rng)),
            1 => MoebiusMatrix::dilation(sig, &nonzero_rat(rng)),
            2 => Ok(MoebiusMatrix::inversion(sig)),
            3 => MoebiusMatrix::reflection(sig, &vec2(rng)),
            _ => MoebiusMatrix::from_real_sl2(sig, sl2(rng)),
        };
        if let Ok(f) = f {
            if let Ok(next) = m.compose(&f) {
                m = next;
            }
        }
    }
    m
}

/// Four generation-0 cycles and five derived nodes, all with finitely
/// many instances generically. No relation refers to the predefined
/// real line or infinity, so the figure is covariant under every map.
pub fn figure(rng: &mut ChaCha8Rng, metric: &Metric) -> Figure {
    let mut f = Figure::new(metric.clone());
    f.freeze();
    f.add_cycle(cycle(rng, metric), "a").unwrap();
    f.add_cycle(cycle(rng, metric), "b").unwrap();
    f.add_cycle(cycle(rng, metric), "c").unwrap();
    f.add_point(vec2(rng), "p").unwrap();
    let orth = |to: &str| Relation::IsOrthogonal { to: to.to_string() };
    let tan = |to: &str| Relation::IsTangent {
        to: to.to_string(),
        sign: TangentSign::Both,
    };
    f.add_cycle_rel(vec![orth("a"), orth("b"), orth("c")], "o").unwrap();
    f.add_cycle_rel(vec![orth("a"), orth("b"), orth("p")], "q").unwrap();
    f.add_cycle_rel(vec![tan("a"), orth("o"), orth("p")], "t").unwrap();
    f.add_cycle_rel(vec![orth("q"), orth("c"), orth("p")], "s").unwrap();
    f.add_cycle_rel(vec![orth("t"), orth("b"), orth("c")], "u").unwrap();
    f.unfreeze().unwrap();
    f
}

/// Instance lists of every node except the predefined ones, canonically
/// scaled and sorted.
pub fn canonical_instances(f: &Figure) -> Vec<(String, Vec<Cycle>)> {
    f.nodes()
        .iter()
        .filter(|n| n.generation >= 0)
        .map(|n| {
            let mut v: Vec<Cycle> = n.instances.iter().map(|i| i.cycle.canonical()).collect();
            v.sort_by(|a, b| a.canonical_cmp(b));
            (n.label.clone(), v)
        })
        .collect()
}

/// `M` applied to every instance of `f` matches the evaluation of the
/// moved figure, branch by branch after canonical ordering.
pub fn figure_covariant(f: &Figure, m: &MoebiusMatrix, eps: f64) -> Result<(), String> {
    let moved = f.transform(m).map_err(|e| e.to_string())?;
    let metric = f.metric();
    let before = canonical_instances(f);
    let after = canonical_instances(&moved);
    for ((label, xs), (_, ys)) in before.iter().zip(&after) {
        if xs.len() != ys.len() {
            return Err(format!("`{label}`: {} instances before, {} after", xs.len(), ys.len()));
        }
        let mut images: Vec<Cycle> = xs
            .iter()
            .map(|c| m.apply_cycle(c, metric).map(|x| x.canonical()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        images.sort_by(|a, b| a.canonical_cmp(b));
        for y in ys {
            if !images.iter().any(|x| x.projectively_equal(y, eps)) {
                return Err(format!("`{label}`: moved instance {y} is not an image of {xs:?}"));
            }
        }
    }
    Ok(())
}
