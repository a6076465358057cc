//! Full decompositions of J_m in each of the three possible shapes,
//! followed by an independent recheck of the JSON report.

use kummer_modules::decomposition::{decompose, tower_for, verify_report, DecomposeOptions};
use kummer_modules::local_field::{FieldSpec, Tower};

fn main() -> kummer_modules::Result<()> {
    let opts = DecomposeOptions::default();
    for (spec, m) in [
        (FieldSpec::Unramified { p: 3, n: 1 }, 2),
        (FieldSpec::Quadratic2 { a: -1 }, 3),
        (FieldSpec::Cyclotomic { p: 3, n: 1 }, 2),
    ] {
        let t = Tower::build(spec, m, 0)?;
        let report = decompose(&t, m, &opts)?;
        println!(
            "{spec}, m={m}: {} ranks {:?} pair {} |J_m| = {}^{}",
            report.gate,
            report.ranks,
            report.pair().map_or("none".into(), |p| p.to_string()),
            report.p,
            report.log_order
        );
        let text = serde_json::to_string(&report).expect("serializable");
        let back = serde_json::from_str(&text).expect("round trip");
        let (flags, failures, _) = verify_report(&tower_for(&back)?, &back, 0.0)?;
        println!(
            "  recheck from JSON: {} ({} failures)",
            flags.all(),
            failures.len()
        );
    }
    Ok(())
}
