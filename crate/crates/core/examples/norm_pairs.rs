//! Minimal norm pairs (a, d) with their witnesses, the invariant i(K/F)
//! and the inequalities minimal pairs satisfy.

use kummer_modules::local_field::{FieldSpec, Tower};
use kummer_modules::norm_pairs::{
    check_exceptional, check_inequalities, extend, i_invariant, search_minimal, verify,
};

fn main() -> kummer_modules::Result<()> {
    for spec in [
        FieldSpec::Cyclotomic { p: 3, n: 1 },
        FieldSpec::Quadratic2 { a: 2 },
        FieldSpec::Unramified { p: 2, n: 2 },
    ] {
        let t = Tower::build(spec, 3, 0)?;
        let i = i_invariant(&t)?;
        println!(
            "{spec}: i(K/F) = {}",
            i.map_or("-inf".into(), |x| x.to_string())
        );
        for m in 1..=3 {
            let r = search_minimal(&t, m, None)?;
            let ok = verify(&t, &r.pair, &r.witness, m)?.holds();
            let ineq = check_inequalities(t.p, &r.pair, m).holds();
            println!(
                "  m={m}: {} after {} candidates; witness {}, inequalities {}",
                r.pair,
                r.candidates_tried,
                if ok { "verified" } else { "FAILED" },
                if ineq { "hold" } else { "violated" }
            );
            if m == 1 {
                println!(
                    "  α exceptional: {}",
                    check_exceptional(&t, &r.witness.alpha)?
                );
            }
            let (ep, ew) = extend(&t, &r.pair, &r.witness, m + 1)?;
            println!(
                "  extended to {}: {}",
                ep,
                verify(&t, &ep, &ew, m + 1)?.holds()
            );
        }
    }
    Ok(())
}
