use kummer_modules::local_field::{FieldSpec, Tower};
use kummer_modules::norm_pairs::*;
use kummer_modules::Error;

#[test]
fn cyclotomic_three_minimal_pairs() {
    let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 1 }, 2, 0).unwrap();
    let r1 = search_minimal(&t, 1, None).unwrap();
    assert_eq!(r1.pair.to_string(), "((-inf), 1)");
    let r2 = search_minimal(&t, 2, None).unwrap();
    assert_eq!(r2.pair.to_string(), "((-inf,-inf), 4)");
    assert!(r2.complete);
    assert!(verify(&t, &r2.pair, &r2.witness, 2).unwrap().holds());
    assert_eq!(i_invariant(&t).unwrap(), None);
    assert!(check_exceptional(&t, &r1.witness.alpha).unwrap());
}

#[test]
fn gate_failure() {
    let t = Tower::build(FieldSpec::Unramified { p: 3, n: 1 }, 1, 0).unwrap();
    assert!(matches!(search_minimal(&t, 1, None), Err(Error::Gate(_))));
}

#[test]
fn default_pair_verifies() {
    for spec in [
        FieldSpec::Cyclotomic { p: 3, n: 1 },
        FieldSpec::Cyclotomic { p: 3, n: 2 },
        FieldSpec::Quadratic2 { a: 2 },
        FieldSpec::Unramified { p: 2, n: 2 },
    ] {
        let t = Tower::build(spec, 2, 0).unwrap();
        for m in 1..=2 {
            let (pair, w) = default_pair(&t, m).unwrap();
            assert!(verify(&t, &pair, &w, m).unwrap().holds(), "{spec}");
        }
    }
}

#[test]
fn minimal_pairs_satisfy_inequalities_and_operations() {
    for spec in [
        FieldSpec::Cyclotomic { p: 3, n: 1 },
        FieldSpec::Cyclotomic { p: 3, n: 2 },
        FieldSpec::Cyclotomic { p: 5, n: 1 },
        FieldSpec::Quadratic2 { a: 2 },
        FieldSpec::Quadratic2 { a: -1 },
        FieldSpec::Quadratic2 { a: 5 },
        FieldSpec::Unramified { p: 2, n: 2 },
    ] {
        let t = Tower::build(spec, 3, 0).unwrap();
        if require_gate(&t).is_err() {
            continue;
        }
        for m in 1..=3 {
            let r = search_minimal(&t, m, None).unwrap();
            eprintln!("{spec} m={m}: {} after {}", r.pair, r.candidates_tried);
            assert!(verify(&t, &r.pair, &r.witness, m).unwrap().holds());
            assert!(
                check_inequalities(t.p, &r.pair, m).holds(),
                "{spec} {}",
                r.pair
            );
            let (sp, sw) = twist_shift(&t, &r.pair, &r.witness, m, 1);
            assert!(verify(&t, &sp, &sw, m).unwrap().holds());
            let (ep, ew) = extend(&t, &r.pair, &r.witness, m + 1).unwrap();
            assert!(verify(&t, &ep, &ew, m + 1).unwrap().holds());
            if m > 1 {
                let (tp, tw) = truncate(&t, &r.pair, &r.witness, m - 1).unwrap();
                assert!(verify(&t, &tp, &tw, m - 1).unwrap().holds());
            }
        }
    }
}
