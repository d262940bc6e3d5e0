use moebinv::numerics::Scalar;
use moebinv::poincare::*;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Scalar> {
    (-12i64..12, 1i64..6).prop_map(|(p, q)| Scalar::ratio(p, q))
}

fn nonzero_rat() -> impl Strategy<Value = Scalar> {
    rat().prop_filter("nonzero", |x| !x.is_zero())
}

/// Random exact element of SL2 as a product of elementary factors.
fn sl2() -> impl Strategy<Value = Sl2> {
    (rat(), rat(), nonzero_rat(), rat()).prop_map(|(p, q, r, t)| {
        let one = Scalar::one;
        let zero = Scalar::zero;
        let n = Sl2::new(one(), p, zero(), one()).unwrap();
        let m = Sl2::new(one(), zero(), q, one()).unwrap();
        let a = Sl2::new(r.clone(), zero(), zero(), r.recip().unwrap()).unwrap();
        let n2 = Sl2::new(one(), t, zero(), one()).unwrap();
        n.mul(&m).mul(&a).mul(&n2)
    })
}

fn sorted4() -> impl Strategy<Value = [Scalar; 4]> {
    proptest::collection::btree_set(-40i64..40, 4).prop_map(|s| {
        let v: Vec<Scalar> = s.into_iter().map(|x| Scalar::ratio(x, 3)).collect();
        [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]
    })
}

fn circle_oracle(x: &Scalar, y: &Scalar, x2: &Scalar, y2: &Scalar, sign: i64) -> (Scalar, Scalar) {
    // (u - c)^2 + sign v^2 = sign r^2 ... solved as the radical axis.
    let half = Scalar::ratio(1, 2);
    let c1 = (x + y) * &half;
    let c2 = (x2 + y2) * &half;
    let r1 = (y - x) * &half;
    let r2 = (y2 - x2) * &half;
    let u = (&r1 * &r1 - &r2 * &r2 - &c1 * &c1 + &c2 * &c2) / (Scalar::int(2) * (&c2 - &c1));
    let du = &u - &c1;
    let v2 = if sign > 0 { &r1 * &r1 - &du * &du } else { &du * &du - &r1 * &r1 };
    (u, v2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ell_point_matches_semicircles(p in sorted4()) {
        let [x, x2, y, y2] = p;
        let (u, v) = extension_point_ell(&x, &y, &x2, &y2).unwrap();
        let (uo, v2) = circle_oracle(&x, &y, &x2, &y2, 1);
        prop_assert_eq!(u, uo);
        prop_assert_eq!(&v * &v, v2);
        prop_assert!(v.sign() > 0);
    }

    #[test]
    fn hyp_point_matches_hyperbolas(p in sorted4()) {
        let [x, y, x2, y2] = p;
        let (u, v) = extension_point_hyp(&x, &y, &x2, &y2).unwrap();
        let (uo, v2) = circle_oracle(&x, &y, &x2, &y2, -1);
        prop_assert_eq!(u, uo);
        prop_assert_eq!(&v * &v, v2);
    }

    #[test]
    fn ell_point_scales(p in sorted4(), a in 1i64..9) {
        let [x, x2, y, y2] = p;
        let a = Scalar::int(a);
        let (u, v) = extension_point_ell(&x, &y, &x2, &y2).unwrap();
        let (us, vs) = extension_point_ell(&(&x * &a), &(&y * &a), &(&x2 * &a), &(&y2 * &a)).unwrap();
        prop_assert_eq!(us, u * &a);
        prop_assert_eq!(&vs * &vs, &v * &v * &a * &a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn r4_action_preserves_pairings(g in sl2()) {
        let t = r4_matrix(&g);
        for sigma in [-1i8, 0, 1] {
            let j = invariant_form(sigma);
            for r in 0..4 {
                for c in 0..4 {
                    let mut s = Scalar::zero();
                    for a in 0..4 {
                        for b in 0..4 {
                            s += &(&t[a][r] * &j[a][b] * &t[b][c]);
                        }
                    }
                    prop_assert_eq!(&s, &j[r][c]);
                }
            }
        }
    }

    #[test]
    fn r4_matrix_is_conjugation(g in sl2(), n in rat(), l in rat(), k in rat(), m in rat()) {
        let q = FormR4::new(n, l, k, m);
        prop_assert_eq!(q.act_r4(&g), q.conjugate(&g));
    }

    #[test]
    fn interval_cycle_covariance(g in sl2(), x in rat(), y in rat()) {
        prop_assume!(x != y);
        let c = cycle_from_interval(RealPoint::Finite(x), RealPoint::Finite(y));
        let moved = interval_flt(&g, &c);
        prop_assert!(c.form().conjugate(&g).projectively_equal(&moved.form(), 0.0));
        let c2 = cycle_from_interval(RealPoint::int(1), RealPoint::int(-3));
        // The pairing scales linearly and the determinant quadratically.
        let moved2 = interval_flt(&g, &c2);
        let p = pairing(&c, &c2);
        let q = pairing(&moved, &moved2);
        prop_assert_eq!(&p * &p * moved.det() * moved2.det(), &q * &q * c.det() * c2.det());
    }

    #[test]
    fn orientation_is_invariant(g in sl2(), p in sorted4()) {
        let x = [0, 1, 2].map(|i| RealPoint::Finite(p[i].clone()));
        let o = orientation(&x[0], &x[1], &x[2]);
        let y = x.clone().map(|q| g.apply(&q));
        prop_assert_eq!(orientation(&y[0], &y[1], &y[2]), o);
        let r = x.map(|q| Sl2::reflection().apply(&q));
        prop_assert_eq!(orientation(&r[0], &r[1], &r[2]), -o);
    }

    #[test]
    fn three_pairs_map_exactly(g in sl2(), p in sorted4(), flip in any::<bool>()) {
        let x = [0, 1, 2].map(|i| RealPoint::Finite(p[i].clone()));
        let mut y = x.clone().map(|q| g.apply(&q));
        if flip {
            y.swap(0, 1);
        }
        let t = moebius_from_three_pairs(&x, &y).unwrap();
        prop_assert_eq!(t.reflected, flip);
        for j in 0..3 {
            prop_assert_eq!(t.apply(&x[j]), y[j].clone());
        }
    }
}

/// Random subgroup generators of each type, conjugated by `h`.
fn generator(kind: u8, h: &Sl2, t: &Scalar) -> Sl2 {
    let base = match kind {
        0 => Sl2::new(Scalar::ratio(3, 5), Scalar::ratio(-4, 5), Scalar::ratio(4, 5), Scalar::ratio(3, 5)).unwrap(),
        1 => Sl2::new(Scalar::one(), t.clone(), Scalar::zero(), Scalar::one()).unwrap(),
        _ => Sl2::new(t.clone(), Scalar::zero(), Scalar::zero(), t.recip().unwrap()).unwrap(),
    };
    h.mul(&base).mul(&h.inverse())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn classification_counts_fixed_points(kind in 0u8..3, h in sl2(), t in nonzero_rat(), p in sorted4()) {
        prop_assume!(kind != 2 || !(t.abs() - Scalar::one()).is_zero());
        let phi = generator(kind, &h, &t);
        let pairs = [0, 1, 2].map(|i| {
            let x = RealPoint::Finite(p[i].clone());
            let y = phi.apply(&x);
            (x, y)
        });
        let c = classify_triple_of_intervals(&pairs).unwrap();
        let direct = phi.discriminant().sign();
        prop_assert_eq!(c.discriminant.sign(), direct);
        let want = [SubgroupType::Elliptic, SubgroupType::Parabolic, SubgroupType::Hyperbolic][kind as usize];
        prop_assert_eq!(c.kind, want);
        prop_assert!(c.map.projectively_equal(&phi, 0.0));
    }

    #[test]
    fn extension_is_covariant(kind in prop::sample::select(vec![0u8, 2]), h in sl2(), g in sl2(), t in nonzero_rat(), p in sorted4()) {
        prop_assume!(kind != 2 || !(t.abs() - Scalar::one()).is_zero());
        let phi = generator(kind, &h, &t);
        let pairs = [0, 1, 2].map(|i| {
            let x = RealPoint::Finite(p[i].clone());
            (x.clone(), phi.apply(&x))
        });
        let moved = pairs.clone().map(|(x, y)| (g.apply(&x), g.apply(&y)));
        let e = extension_from_triple(&pairs).unwrap();
        let f = extension_from_triple(&moved).unwrap();
        prop_assert!(e.form.is_tau_isotropic(e.kind.tau()));
        let moved_form = e.form.conjugate(&g);
        let ok = moved_form.projectively_equal(&f.form, 1e-9);
        if kind == 0 {
            prop_assert!(ok, "{} vs {}", moved_form, f.form);
        } else {
            // Hyperbolic extensions are fixed only up to the mirror v -> -v.
            let mirror = FormR4::new(-f.form.n.clone(), f.form.l.clone(), f.form.k.clone(), f.form.m.clone());
            prop_assert!(ok || moved_form.projectively_equal(&mirror, 1e-9));
        }
    }

    #[test]
    fn extension_depends_on_subgroup_only(kind in 0u8..3, h in sl2(), t in nonzero_rat(), p in sorted4(), q in sorted4()) {
        prop_assume!(kind != 2 || !(t.abs() - Scalar::one()).is_zero());
        let phi = generator(kind, &h, &t);
        let phi2 = phi.mul(&phi);
        let a = [0, 1, 2].map(|i| {
            let x = RealPoint::Finite(p[i].clone());
            (x.clone(), phi.apply(&x))
        });
        let b = [0, 1, 2].map(|i| {
            let x = RealPoint::Finite(q[i].clone());
            (x.clone(), phi2.apply(&x))
        });
        let ea = extension_from_triple(&a).unwrap();
        let eb = extension_from_triple(&b).unwrap();
        prop_assert!(ea.form.projectively_equal(&eb.form, 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn elliptic_extension_matches_semicircles(p in sorted4(), x3 in rat()) {
        let [x, x2, y, y2] = p;
        let (u, v) = extension_point_ell(&x, &y, &x2, &y2).unwrap();
        // The half turn about (u, v): z -> (u z - |p|^2) / (z - u).
        let r2 = &u * &u + &v * &v;
        let half_turn = Sl2::new(u.clone(), -r2, Scalar::one(), -u.clone()).unwrap();
        prop_assume!(!(&x3 - &u).is_zero());
        let third = RealPoint::Finite(x3);
        prop_assume!(![&x, &x2].iter().any(|s| third.same(&RealPoint::Finite((*s).clone()))));
        let pairs = [
            (RealPoint::Finite(x.clone()), RealPoint::Finite(y.clone())),
            (RealPoint::Finite(x2.clone()), RealPoint::Finite(y2.clone())),
            (third.clone(), half_turn.apply(&third)),
        ];
        prop_assume!(orientation(&pairs[0].0, &pairs[1].0, &pairs[2].0) != 0);
        let e = extension_from_triple(&pairs).unwrap();
        prop_assert_eq!(e.kind, SubgroupType::Elliptic);
        let (eu, ev) = e.point().unwrap();
        prop_assert_eq!(eu, u);
        prop_assert_eq!(&ev * &ev, &v * &v);
    }
}

#[test]
fn iwasawa_reconstructs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(0.2..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let d = (1.0 + b * c) / a;
        let g = Sl2::new(Scalar::float(a), Scalar::float(b), Scalar::float(c), Scalar::float(d)).unwrap();
        let w = iwasawa(&g).unwrap();
        let back = w.a.mul(&w.n).mul(&w.k).to_f64();
        for (x, y) in back.iter().zip(g.to_f64()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
