use cubic_core::asymptotics::fit_secondary;
use cubic_core::forms::{apply, canonicalize, discriminant, hessian, ring_table, stabilizer_order};
use cubic_core::maximality::is_maximal_at;
use cubic_core::{enumerate_orbits, BinaryCubicForm, Sign, UnimodularMap};
use proptest::prelude::*;

fn generator(i: u8) -> UnimodularMap {
    match i % 5 {
        0 => UnimodularMap::new(0, 1, -1, 0),
        1 => UnimodularMap::new(1, 0, 1, 1),
        2 => UnimodularMap::new(1, 0, -1, 1),
        3 => UnimodularMap::new(-1, 0, 0, 1),
        _ => UnimodularMap::new(1, 1, 0, 1),
    }
    .unwrap()
}

fn map_strategy() -> impl Strategy<Value = UnimodularMap> {
    prop::collection::vec(any::<u8>(), 0..8).prop_map(|word| {
        word.iter()
            .fold(UnimodularMap::IDENTITY, |acc, &i| generator(i).compose(&acc).unwrap())
    })
}

fn form_strategy(r: i64) -> impl Strategy<Value = BinaryCubicForm> {
    (-r..=r, -r..=r, -r..=r, -r..=r)
        .prop_map(|(a, b, c, d)| BinaryCubicForm::new(a, b, c, d))
        .prop_filter("nondegenerate", |f| discriminant(f).map(|d| d != 0).unwrap_or(false))
}

fn eval_quad(h: (i64, i64, i64), u: i64, v: i64) -> i128 {
    h.0 as i128 * (u * u) as i128 + h.1 as i128 * (u * v) as i128 + h.2 as i128 * (v * v) as i128
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]
    #[test]
    fn action_preserves_discriminant(f in form_strategy(40), g in map_strategy()) {
        let h = apply(&g, &f).unwrap();
        prop_assert_eq!(discriminant(&h).unwrap(), discriminant(&f).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]
    #[test]
    fn canonical_form_is_sound(f in form_strategy(30), g in map_strategy()) {
        let (c, w) = canonicalize(&f).unwrap();
        prop_assert_eq!(apply(&w, &f).unwrap(), c);
        prop_assert_eq!(canonicalize(&c).unwrap().0, c);
        let moved = apply(&g, &f).unwrap();
        prop_assert_eq!(canonicalize(&moved).unwrap().0, c);
        prop_assert_eq!(stabilizer_order(&moved).unwrap(), stabilizer_order(&f).unwrap());
    }

    #[test]
    fn hessian_is_covariant(f in form_strategy(30), g in map_strategy()) {
        let hf = hessian(&f).unwrap();
        let hg = hessian(&apply(&g, &f).unwrap()).unwrap();
        for (u, v) in [(1, 0), (0, 1), (1, 1), (2, -1)] {
            let (x, y) = (g.e11 * u + g.e21 * v, g.e12 * u + g.e22 * v);
            prop_assert_eq!(eval_quad(hg, u, v), eval_quad(hf, x, y));
        }
        prop_assert_eq!(
            hf.1 as i128 * hf.1 as i128 - 4 * hf.0 as i128 * hf.2 as i128,
            -3 * discriminant(&f).unwrap() as i128
        );
    }

    #[test]
    fn rings_are_associative(f in form_strategy(50)) {
        let t = ring_table(&f).unwrap();
        prop_assert!(t.is_associative());
        prop_assert_eq!(t.discriminant(), discriminant(&f).unwrap() as i128);
    }

    #[test]
    fn local_maximality_is_invariant(f in form_strategy(60), g in map_strategy(), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let h = apply(&g, &f).unwrap();
        prop_assert_eq!(is_maximal_at(&h, p).unwrap(), is_maximal_at(&f, p).unwrap());
    }

    #[test]
    fn fit_is_scale_equivariant(
        a in -5.0f64..5.0, b in -5.0f64..5.0, lambda in 0.01f64..100.0,
        noise in prop::collection::vec(-1.0f64..1.0, 4)
    ) {
        let grid: Vec<(f64, f64)> = [1e3, 1e4, 1e5, 1e6]
            .iter()
            .zip(&noise)
            .map(|(&x, e): (&f64, &f64)| (x, a * x + b * x.powf(5.0 / 6.0) + 10.0 * e))
            .collect();
        let scaled: Vec<(f64, f64)> = grid.iter().map(|&(x, c)| (x, lambda * c)).collect();
        let f1 = fit_secondary(&grid).unwrap();
        let f2 = fit_secondary(&scaled).unwrap();
        let tol = 1e-12 * (1.0 + (lambda * f1.a).abs());
        prop_assert!((f2.a - lambda * f1.a).abs() <= tol);
        prop_assert!((f2.b - lambda * f1.b).abs() <= 1e-12 * (1.0 + (lambda * f1.b).abs()) * 1e3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]
    #[test]
    fn stabilizer_matches_brute_force(f in form_strategy(25)) {
        let (c, _) = canonicalize(&f).unwrap();
        let mut count = 0u8;
        for e11 in -5..=5 {
            for e12 in -5..=5 {
                for e21 in -5..=5 {
                    for e22 in -5..=5 {
                        if let Ok(g) = UnimodularMap::new(e11, e12, e21, e22) {
                            if apply(&g, &c).unwrap() == c {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        prop_assert_eq!(count, stabilizer_order(&c).unwrap());
    }
}

#[test]
fn order_three_stabilizers_have_square_discriminants() {
    for sign in Sign::BOTH {
        let stream = enumerate_orbits(sign, 100_000).unwrap();
        let mut seen = 0;
        for r in &stream.records {
            if r.stab_order == 3 {
                let d = r.disc.unsigned_abs();
                let s = (d as f64).sqrt().round() as u64;
                assert!(sign == Sign::Plus && s * s == d, "{r:?}");
                seen += 1;
            }
        }
        if sign == Sign::Plus {
            assert!(seen > 0);
        }
    }
}
