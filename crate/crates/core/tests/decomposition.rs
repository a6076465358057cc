use kummer_modules::decomposition::*;
use kummer_modules::local_field::{FieldSpec, Tower};

fn run(spec: FieldSpec, m: u32) -> DecompositionReport {
    let t = Tower::build(spec, m, 0).unwrap();
    let r = decompose(&t, m, &DecomposeOptions::default()).unwrap();
    eprintln!(
        "{spec} m={m}: {} ranks {:?} e {:?} a {:?} d {:?} oracle {}",
        r.gate,
        r.ranks,
        r.e,
        r.a.as_ref().map(|a| a.to_string()),
        r.d,
        r.oracle
    );
    r
}

#[test]
fn spec_examples() {
    for m in 1..=2 {
        let r = run(FieldSpec::Unramified { p: 3, n: 1 }, m);
        assert_eq!(r.gate, Gate::AllFree);
        assert_eq!(r.ranks, vec![1, 1]);
        assert_eq!(r.log_order, 4 * m);
    }
    for m in 1..=3 {
        let r = run(FieldSpec::Quadratic2 { a: -1 }, m);
        assert_eq!(r.gate, Gate::CyclicZ);
        assert_eq!(r.nu, 2);
        assert_eq!(r.ranks, vec![0, 1]);
    }
    for m in 1..=2 {
        let r = run(FieldSpec::Cyclotomic { p: 3, n: 1 }, m);
        assert_eq!(r.gate, Gate::Exceptional);
        assert_eq!(r.ranks, vec![1, 2]);
    }
}

#[test]
fn more_towers() {
    for spec in [
        FieldSpec::Quadratic2 { a: 2 },
        FieldSpec::Quadratic2 { a: 5 },
        FieldSpec::Quadratic2 { a: -10 },
        FieldSpec::Unramified { p: 2, n: 2 },
        FieldSpec::Cyclotomic { p: 3, n: 2 },
        FieldSpec::Cyclotomic { p: 5, n: 1 },
        FieldSpec::Cyclotomic { p: 2, n: 1 },
    ] {
        for m in 1..=3 {
            run(spec, m);
        }
    }
}

#[test]
fn json_round_trip_and_tampering() {
    let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 1 }, 2, 0).unwrap();
    let r = decompose(&t, 2, &DecomposeOptions::default()).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: DecompositionReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    let t2 = tower_for(&back).unwrap();
    let (flags, failures, _) = verify_report(&t2, &back, 22.0).unwrap();
    assert!(flags.all() && failures.is_empty());

    let mut dropped = r.clone();
    dropped.certificates.t.pop();
    let (flags, failures, _) = verify_report(&t, &dropped, 0.0).unwrap();
    assert!(!flags.generation);
    assert!(failures.iter().any(|f| f.flag == "generation"));

    let mut twisted = r.clone();
    twisted.d = Some(7);
    let (flags, _, _) = verify_report(&t, &twisted, 0.0).unwrap();
    assert!(!flags.exceptional);
    assert!(!flags.witness);
}

#[test]
fn delta_free_examples() {
    use kummer_modules::norm_pairs::{default_pair, NormPairWitness};
    // δ_0 = −1 is not a square in Q_2(√2)
    let t = Tower::build(FieldSpec::Quadratic2 { a: 2 }, 2, 0).unwrap();
    let (pair, w) = default_pair(&t, 1).unwrap();
    assert!(delta_free_check(&t, &pair, &w, 1).unwrap());
    let square = NormPairWitness {
        alpha: w.alpha.clone(),
        deltas: vec![t.pow(&w.deltas[0], 2), w.deltas[1].clone()],
    };
    assert!(!delta_free_check(&t, &pair, &square, 1).unwrap());
    // ξ_3 is a cube in Q_3(ξ_27), so the default pair there is not minimal
    let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 2 }, 2, 0).unwrap();
    let (pair, w) = default_pair(&t, 1).unwrap();
    assert!(!delta_free_check(&t, &pair, &w, 1).unwrap());
}
