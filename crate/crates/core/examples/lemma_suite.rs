//! A quick run of the lemma suite and the indecomposability sweep on a
//! reduced grid; the `kummod lemmas` command runs the full one.

use kummer_modules::lemmas::{indecomp_sweep, run_suite, SuiteConfig};

fn main() -> kummer_modules::Result<()> {
    let cfg = SuiteConfig {
        depths: vec![1, 2],
        samples: 500,
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg)?;
    let checked: u64 = report.results.iter().map(|r| r.checked).sum();
    println!(
        "{} lemma checks over {} rings, all pass: {}",
        checked,
        report.results.len(),
        report.passed()
    );
    let sweep = indecomp_sweep(&[2, 3], &[1], &[1, 2], 22.0)?;
    println!(
        "sweep: {} cases, {} satisfy I–V, {} confirmed by the oracle, {} disagreements",
        sweep.cases,
        sweep.conditions_hold,
        sweep.oracle_checked,
        sweep.disagreements.len()
    );
    Ok(())
}
