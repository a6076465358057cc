//! Prints one PASS or FAIL line per acceptance criterion.

use std::time::Instant;

use kummer_modules::decomposition::{
    decompose, verify_report, DecomposeOptions, DecompositionReport, Gate,
};
use kummer_modules::group_ring::{GroupRingElement, RingParams};
use kummer_modules::lemmas::{indecomp_sweep, run_suite, SuiteConfig};
use kummer_modules::local_field::{FieldSpec, Tower};
use kummer_modules::norm_pairs::{
    check_inequalities, extend, i_invariant, order_leq, search_minimal, truncate, verify,
};
use kummer_modules::rmg_modules::{ideal, DEFAULT_END_GUARD_LOG2};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn report(spec: FieldSpec, m: u32, guard: u32) -> Result<(Tower, DecompositionReport), String> {
    let t = Tower::build(spec, m, guard).map_err(e)?;
    let r = decompose(&t, m, &DecomposeOptions::default()).map_err(e)?;
    let (flags, failures, _) = verify_report(&t, &r, DEFAULT_END_GUARD_LOG2).map_err(e)?;
    ensure(flags.all(), || {
        format!("{spec} m={m}: verify_report failures {failures:?}")
    })?;
    Ok((t, r))
}

fn lemma_suite() -> Outcome {
    let r = run_suite(&SuiteConfig::default()).map_err(e)?;
    let bad: Vec<_> = r
        .results
        .iter()
        .filter(|x| !x.passed())
        .map(|x| format!("{} p={} level={} m={}", x.lemma, x.p, x.level, x.m))
        .collect();
    ensure(bad.is_empty(), || format!("failing: {bad:?}"))?;
    let checked: u64 = r.results.iter().map(|x| x.checked).sum();
    Ok(format!("{} results, {checked} checks", r.results.len()))
}

fn indecomposability() -> Outcome {
    let r = indecomp_sweep(&[2, 3], &[1, 2], &[1, 2], DEFAULT_END_GUARD_LOG2).map_err(e)?;
    ensure(r.passed(), || {
        format!("disagreements: {:?}", r.disagreements)
    })?;
    Ok(format!(
        "{} cases, {} with I–V, {} oracle-checked, {} beyond guard, 0 disagreements",
        r.cases, r.conditions_hold, r.oracle_checked, r.skipped
    ))
}

fn unramified() -> Outcome {
    for m in 1..=2 {
        let (_, r) = report(FieldSpec::Unramified { p: 3, n: 1 }, m, 0)?;
        ensure(r.gate == Gate::AllFree, || {
            format!("m={m}: gate {}", r.gate)
        })?;
        ensure(r.ranks == [1, 1], || format!("m={m}: ranks {:?}", r.ranks))?;
        ensure(r.log_order == 4 * m, || {
            format!("m={m}: |J| = 3^{}", r.log_order)
        })?;
    }
    Ok("all free, ranks (1,1), |J_m| = 3^{4m}".into())
}

fn quadratic_i() -> Outcome {
    for m in 1..=3 {
        let (t, r) = report(FieldSpec::Quadratic2 { a: -1 }, m, 0)?;
        ensure(r.gate == Gate::CyclicZ && t.nu() == 2, || {
            format!("m={m}: {} ν={}", r.gate, t.nu())
        })?;
        let lam = r.certificates.lambda.as_ref().ok_or("no λ certificate")?;
        let xi4 = t.root_of_unity(2).ok_or("no ξ_4")?;
        let rel = t.approx_eq(&t.div(&t.sigma(lam), lam), &t.inv(&xi4));
        ensure(rel, || format!("m={m}: λ^(σ−1) ≠ ξ_4^(−1)"))?;
        let km = t.kummer(t.n, m).map_err(e)?;
        let x = km.dlog(&t, lam).map_err(e)?;
        let ann = km.module().annihilator(&x);
        let params = RingParams::new(2, 1, m, 1).map_err(e)?;
        let want = ideal(
            params,
            &[GroupRingElement::sigma_minus(params, 1, 1).scale(4)],
        );
        ensure(ann.contains_all(&want) && want.contains_all(&ann), || {
            format!("m={m}: ann [λ] ≠ ⟨4(σ−1)⟩")
        })?;
        ensure(r.ranks == [0, 1], || format!("m={m}: ranks {:?}", r.ranks))?;
        ensure(r.log_order == 3 * m + m.min(2), || {
            format!("m={m}: |J| = 2^{}", r.log_order)
        })?;
    }
    Ok("ν = 2, λ relation, ann = ⟨4(σ−1)⟩, ranks (0,1), |J_m| = 2^{3m+min(m,2)}".into())
}

fn cyclotomic() -> Outcome {
    for m in 1..=2 {
        let (t, r) = report(FieldSpec::Cyclotomic { p: 3, n: 1 }, m, 0)?;
        ensure(r.gate == Gate::Exceptional, || {
            format!("m={m}: gate {}", r.gate)
        })?;
        let pair = r.pair().ok_or("no pair")?;
        ensure(pair.a.0.iter().all(Option::is_none), || {
            format!("m={m}: pair {pair}")
        })?;
        ensure((pair.d - 4).rem_euclid(3i64.pow(m)) == 0, || {
            format!("m={m}: d = {}", pair.d)
        })?;
        ensure(r.search_complete == Some(true), || {
            format!("m={m}: search incomplete")
        })?;
        ensure(
            r.ranks == [1, 2] && t.norm_indices().map_err(e)? == [1, 3],
            || format!("m={m}: ranks {:?}", r.ranks),
        )?;
    }
    Ok("a = (−∞,…), d ≡ 4, complete, X ≅ X_{a,d,m}, ranks (1,2), descending m=2→1".into())
}

const LAW_SPECS: [FieldSpec; 6] = [
    FieldSpec::Cyclotomic { p: 3, n: 1 },
    FieldSpec::Cyclotomic { p: 3, n: 2 },
    FieldSpec::Cyclotomic { p: 5, n: 1 },
    FieldSpec::Quadratic2 { a: 2 },
    FieldSpec::Quadratic2 { a: 5 },
    FieldSpec::Unramified { p: 2, n: 2 },
];

fn norm_pair_laws() -> Outcome {
    let mut checked = 0;
    for spec in LAW_SPECS {
        let t = Tower::build(spec, 4, 0).map_err(e)?;
        let i = i_invariant(&t).map_err(e)?;
        if t.p == 2 && t.n == 1 && t.minus_one_is_norm().map_err(e)? {
            ensure(i.is_none(), || {
                format!("{spec}: i(K/F) = {i:?} with −1 a norm")
            })?;
        }
        let mut prev = None;
        for m in 1..=3u32 {
            let s = search_minimal(&t, m, None).map_err(e)?;
            let ineq = check_inequalities(t.p, &s.pair, m);
            ensure(ineq.holds(), || format!("{spec} m={m}: {ineq:?}"))?;
            ensure(s.pair.a.0[0] == i, || {
                format!("{spec} m={m}: a_0 ≠ i(K/F) = {i:?}")
            })?;
            let (ep, ew) = extend(&t, &s.pair, &s.witness, m + 1).map_err(e)?;
            ensure(verify(&t, &ep, &ew, m + 1).map_err(e)?.holds(), || {
                format!("{spec} m={m}: extension {ep} fails")
            })?;
            if let Some(prev) = &prev {
                let (tp, tw) = truncate(&t, &s.pair, &s.witness, m - 1).map_err(e)?;
                ensure(verify(&t, &tp, &tw, m - 1).map_err(e)?.holds(), || {
                    format!("{spec} m={m}: truncation {tp} fails")
                })?;
                let same = order_leq(t.p, &tp, prev, m - 1).map_err(e)?
                    && order_leq(t.p, prev, &tp, m - 1).map_err(e)?;
                ensure(same, || {
                    format!("{spec} m={m}: truncation {tp} is not minimal {prev}")
                })?;
            }
            prev = Some(s.pair);
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} minimal pairs over {} towers, 0 violations",
        LAW_SPECS.len()
    ))
}

fn summary(spec: FieldSpec, m: u32, guard: u32) -> Result<String, String> {
    let (_, r) = report(spec, m, guard)?;
    Ok(format!(
        "{} {:?} {:?} {:?} {} {} {:?}",
        r.gate,
        r.ranks,
        r.pair().map(|p| p.to_string()),
        r.e,
        r.nu,
        r.log_order,
        r.search_complete
    ))
}

fn law_summary(spec: FieldSpec, guard: u32) -> Result<String, String> {
    let t = Tower::build(spec, 4, guard).map_err(e)?;
    let mut out = format!("{:?}", i_invariant(&t).map_err(e)?);
    for m in 1..=3 {
        out += &format!(" {}", search_minimal(&t, m, None).map_err(e)?.pair);
    }
    Ok(out)
}

fn precision() -> Outcome {
    const EXTRA: u32 = 3;
    let cases = [
        (FieldSpec::Unramified { p: 3, n: 1 }, 2),
        (FieldSpec::Quadratic2 { a: -1 }, 3),
        (FieldSpec::Cyclotomic { p: 3, n: 1 }, 2),
    ];
    for (spec, m) in cases {
        let (a, b) = (summary(spec, m, 0)?, summary(spec, m, EXTRA)?);
        ensure(a == b, || format!("{spec} m={m}: {a} vs {b}"))?;
    }
    for spec in LAW_SPECS {
        let (a, b) = (law_summary(spec, 0)?, law_summary(spec, EXTRA)?);
        ensure(a == b, || format!("{spec}: {a} vs {b}"))?;
    }
    Ok(format!("criteria 3–6 unchanged with {EXTRA} extra digits"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("lemma suite", lemma_suite),
        ("indecomposability agreement", indecomposability),
        ("unramified decomposition", unramified),
        ("Q_2(i) decomposition", quadratic_i),
        ("cyclotomic decomposition", cyclotomic),
        ("norm-pair laws", norm_pair_laws),
        ("precision stability", precision),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail}) [{secs:.1}s]", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
