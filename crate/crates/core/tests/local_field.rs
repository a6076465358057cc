use kummer_modules::group_ring::p_operator;
use kummer_modules::local_field::{FieldElem, FieldSpec, Tower};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> Vec<FieldSpec> {
    vec![
        FieldSpec::Quadratic2 { a: -1 },
        FieldSpec::Quadratic2 { a: 2 },
        FieldSpec::Quadratic2 { a: 5 },
        FieldSpec::Quadratic2 { a: -10 },
        FieldSpec::Unramified { p: 2, n: 1 },
        FieldSpec::Unramified { p: 2, n: 2 },
        FieldSpec::Unramified { p: 3, n: 1 },
        FieldSpec::Cyclotomic { p: 3, n: 1 },
        FieldSpec::Cyclotomic { p: 2, n: 1 },
        FieldSpec::Cyclotomic { p: 5, n: 1 },
        FieldSpec::Cyclotomic { p: 3, n: 2 },
    ]
}

fn random_elem(t: &Tower, rng: &mut ChaCha8Rng) -> FieldElem {
    loop {
        let x: Vec<u64> = (0..t.degree())
            .map(|_| rng.gen_range(0..t.ring.zp.q))
            .collect();
        if let Some(mut e) = t.from_integral(&x, t.prec) {
            e.val += rng.gen_range(-2..3);
            return e;
        }
    }
}

/// An element of K_i: the norm from K down to K_i of a random element.
fn random_at_level(t: &Tower, i: u32, rng: &mut ChaCha8Rng) -> FieldElem {
    let x = random_elem(t, rng);
    t.norm(&x, t.n, i).unwrap()
}

#[test]
fn kummer_orders_match_unit_group_structure() {
    for spec in grid() {
        let t = Tower::build(spec, 3, 0).unwrap();
        for m in 1..=3 {
            for i in 0..=t.n {
                let lvl = t.level(i);
                let expect = m * (lvl.degree() + 1) + m.min(t.nu_at_level(i));
                assert_eq!(
                    t.kummer(i, m).unwrap().log_order(),
                    expect,
                    "{spec} level {i} m {m}"
                );
            }
        }
    }
}

#[test]
fn roots_of_unity_levels() {
    let cases = [
        (FieldSpec::Unramified { p: 3, n: 1 }, 0),
        (FieldSpec::Unramified { p: 2, n: 1 }, 1),
        (FieldSpec::Quadratic2 { a: -1 }, 2),
        (FieldSpec::Quadratic2 { a: 2 }, 1),
        (FieldSpec::Cyclotomic { p: 3, n: 1 }, 2),
        (FieldSpec::Cyclotomic { p: 3, n: 2 }, 3),
        (FieldSpec::Cyclotomic { p: 5, n: 1 }, 2),
    ];
    for (spec, nu) in cases {
        let t = Tower::build(spec, 1, 0).unwrap();
        assert_eq!(t.nu(), nu, "{spec}");
        assert!(!t.roots.capped);
        if nu > 0 {
            let z = t.root_of_unity(nu).unwrap();
            let p = t.p as i64;
            assert!(t.is_one(&t.pow(&z, p.pow(nu))));
            assert!(!t.is_one(&t.pow(&z, p.pow(nu - 1))));
        }
    }
}

#[test]
fn sigma_has_order_p_n_and_fixes_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for spec in grid() {
        let t = Tower::build(spec, 2, 0).unwrap();
        let order = t.p.pow(t.n);
        for _ in 0..40 {
            let x = random_elem(&t, &mut rng);
            assert!(t.approx_eq(&t.sigma_pow(&x, order), &x), "{spec}");
            let y = random_at_level(&t, 0, &mut rng);
            assert!(t.approx_eq(&t.sigma(&y), &y), "{spec}");
            assert_eq!(t.sigma(&x).val, x.val);
        }
    }
}

#[test]
fn norm_transitivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for spec in [
        FieldSpec::Cyclotomic { p: 3, n: 2 },
        FieldSpec::Unramified { p: 2, n: 2 },
    ] {
        let t = Tower::build(spec, 2, 0).unwrap();
        for _ in 0..10 {
            let x = random_elem(&t, &mut rng);
            for j in 0..=t.n {
                for jp in j..=t.n {
                    let direct = t.norm(&x, t.n, j).unwrap();
                    let via = t.norm(&t.norm(&x, t.n, jp).unwrap(), jp, j).unwrap();
                    assert!(t.approx_eq(&direct, &via), "{spec} {j} {jp}");
                }
            }
        }
    }
}

#[test]
fn p_operator_matches_norm_in_j_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in [
        FieldSpec::Cyclotomic { p: 3, n: 2 },
        FieldSpec::Quadratic2 { a: -1 },
        FieldSpec::Unramified { p: 2, n: 2 },
    ] {
        let t = Tower::build(spec, 2, 0).unwrap();
        for m in 1..=2 {
            let km = t.kummer(t.n, m).unwrap();
            let module = km.module();
            for i in 0..=t.n {
                for j in 0..=i {
                    let pij = p_operator(module.params, i, j).unwrap();
                    for _ in 0..4 {
                        let g = random_at_level(&t, i, &mut rng);
                        let lhs = module.act(&pij, &km.dlog(&t, &g).unwrap());
                        let rhs = km.dlog(&t, &t.norm(&g, i, j).unwrap()).unwrap();
                        assert_eq!(lhs, rhs, "{spec} m={m} P({i},{j})");
                    }
                }
            }
        }
    }
}

#[test]
fn dlog_is_a_homomorphism_and_generators_are_standard() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in grid() {
        let t = Tower::build(spec, 2, 0).unwrap();
        let km = t.kummer(t.n, 2).unwrap();
        let module = km.module();
        for (l, g) in km.gens.iter().enumerate() {
            let mut nat = vec![0u64; module.rank()];
            nat[l] = 1;
            assert_eq!(km.dlog(&t, g).unwrap(), module.embed(&nat), "{spec}");
        }
        for _ in 0..10 {
            let a = random_elem(&t, &mut rng);
            let b = random_elem(&t, &mut rng);
            let sum = module.add(&km.dlog(&t, &a).unwrap(), &km.dlog(&t, &b).unwrap());
            assert_eq!(km.dlog(&t, &t.mul(&a, &b)).unwrap(), sum, "{spec}");
            let s = km.dlog(&t, &t.sigma(&a)).unwrap();
            assert_eq!(s, module.sigma_apply(&km.dlog(&t, &a).unwrap()), "{spec}");
            // the class determines γ modulo p^m-th powers
            let x = km.dlog(&t, &a).unwrap();
            let back = km.lift(&t, &x);
            assert!(t.is_pth_power(&t.div(&a, &back), 2).unwrap(), "{spec}");
        }
    }
}

#[test]
fn pth_power_tests_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for spec in grid() {
        let t = Tower::build(spec, 3, 0).unwrap();
        for _ in 0..6 {
            let a = random_elem(&t, &mut rng);
            assert!(t.is_pth_power(&t.pow(&a, t.p as i64), 1).unwrap());
            for k in 2..=3 {
                if t.is_pth_power(&a, k).unwrap() {
                    assert!(t.is_pth_power(&a, k - 1).unwrap());
                }
            }
            let ap = t.pow(&a, t.p as i64);
            let r = t.pth_root(&ap).unwrap();
            assert!(t.approx_eq(&t.pow(&r, t.p as i64), &ap), "{spec}");
        }
    }
}

#[test]
fn spec_examples_for_pth_powers() {
    let t = Tower::build(FieldSpec::Quadratic2 { a: -1 }, 1, 0).unwrap();
    let i = t.quadratic_root().unwrap();
    assert!(!t.is_pth_power(&i, 1).unwrap());
    assert!(t.dlog(1, 1, &i).unwrap().iter().any(|&c| c != 0));
    let r = t.pth_root(&t.from_i64(-4).unwrap()).unwrap();
    let two_i = t.mul(&t.from_i64(2).unwrap(), &i);
    assert!(t.approx_eq(&r, &two_i) || t.approx_eq(&r, &t.neg(&two_i)));
    let one = t.one();
    let z = t.pth_root(&one).unwrap();
    assert!(t.is_one(&t.pow(&z, 2)));
    let t = Tower::build(FieldSpec::Unramified { p: 3, n: 1 }, 1, 0).unwrap();
    assert!(!t.is_pth_power(&t.from_i64(3).unwrap(), 1).unwrap());
}

#[test]
fn precision_stability() {
    for spec in grid() {
        let t = Tower::build(spec, 2, 0).unwrap();
        let u = t.refined(2).unwrap();
        assert_eq!(t.nu(), u.nu());
        assert_eq!(
            t.norm_indices().unwrap(),
            u.norm_indices().unwrap(),
            "{spec}"
        );
        for i in 0..=t.n {
            let a = t.kummer(i, 2).unwrap();
            let b = u.kummer(i, 2).unwrap();
            assert_eq!(a.module().orders, b.module().orders);
            assert_eq!(a.module().sigma, b.module().sigma, "{spec} level {i}");
        }
    }
}

#[test]
fn precision_refusal() {
    let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 1 }, 1, 0).unwrap();
    let x = FieldElem {
        val: 0,
        unit: t.ring.one(),
        prec: 1,
    };
    assert!(matches!(
        t.dlog(1, 3, &x),
        Err(kummer_modules::Error::Precision(_))
    ));
    assert!(Tower::build(FieldSpec::Cyclotomic { p: 5, n: 1 }, 20, 0).is_err());
}
