//! The `kummod` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the JSON
//! payload describes the failure), 2 for usage and parse errors, 3 when a
//! precision or size guard refuses the request.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::decomposition::{self, DecomposeOptions, DecompositionReport};
use crate::error::{Error, Result};
use crate::lemmas::{self, SuiteConfig};
use crate::local_field::{min_prec, FieldSpec, Tower};
use crate::norm_pairs;
use crate::rmg_modules::{construct_x, indecomp_conditions, NormVector, DEFAULT_END_GUARD_LOG2};

#[derive(Parser, Debug)]
#[command(
    name = "kummod",
    version,
    about = "Galois module structure of p-th power classes of local fields"
)]
pub struct Cli {
    /// Emit the full JSON report instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the basic group-ring and module lemmas over a grid.
    Lemmas(LemmasArgs),
    /// Conditions I–V and the endomorphism oracle, for one X_{a,d,m} or a sweep.
    Indecomp(IndecompArgs),
    /// Minimal norm pair of length m with witness and invariant checks.
    Normpair(NormpairArgs),
    /// Decompose J_m and certify the result.
    Decompose(DecomposeArgs),
    /// Recheck a saved decomposition report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct LemmasArgs {
    #[arg(long, default_value = "2,3")]
    pub p: String,
    #[arg(long, default_value = "1,2")]
    pub n: String,
    #[arg(long, default_value = "1..3")]
    pub m: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random samples per ring beyond the exhaustive range.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
}

#[derive(Args, Debug)]
pub struct IndecompArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub n: String,
    #[arg(long)]
    pub m: String,
    /// Norm vector such as "0,2" or "-inf,1"; omit (with --d) to sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<i64>,
    /// Also run the endomorphism-ring oracle.
    #[arg(long)]
    pub oracle: bool,
    /// log_2 bound on |End(M)| for the oracle.
    #[arg(long, default_value_t = DEFAULT_END_GUARD_LOG2)]
    pub guard: f64,
}

#[derive(Args, Debug)]
pub struct NormpairArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub m: u32,
    /// Maximum number of candidates decided before falling back.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Extra p-adic digits of working precision.
    #[arg(long, default_value_t = 0)]
    pub guard: u32,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub m: u32,
    /// Working precision in p-adic digits.
    #[arg(long)]
    pub digits: Option<u32>,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_END_GUARD_LOG2)]
    pub guard: f64,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Path to a JSON report written by `decompose`.
    #[arg(long)]
    pub report: std::path::PathBuf,
    /// Field the report must be about.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = DEFAULT_END_GUARD_LOG2)]
    pub guard: f64,
}

/// What a command produced: exit code, stdout text, stderr text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_) | Error::ParamMismatch(_) => 2,
        Error::Precision(_) | Error::Guard(_) => 3,
        Error::Gate(_) | Error::Verification(_) | Error::Search(_) => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Invalid(_) => "invalid",
        Error::ParamMismatch(_) => "param_mismatch",
        Error::Precision(_) => "precision",
        Error::Guard(_) => "guard",
        Error::Gate(_) => "gate",
        Error::Verification(_) => "verification",
        Error::Search(_) => "search",
    }
}

/// Parses "2,3", "1..3" (inclusive) or mixtures such as "1,3..5".
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Invalid(format!("cannot parse `{s}` as a list or range"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    parse_list(s)?
        .into_iter()
        .map(|x| u32::try_from(x).map_err(|_| Error::Invalid(format!("{x} is too large"))))
        .collect()
}

fn single<T: Copy>(v: &[T], what: &str) -> Result<T> {
    match v {
        [x] => Ok(*x),
        _ => Err(Error::Invalid(format!(
            "--{what} must be a single value here"
        ))),
    }
}

struct Rendered {
    passed: bool,
    json: Value,
    summary: String,
}

fn run_lemmas(a: &LemmasArgs) -> Result<Rendered> {
    let cfg = SuiteConfig {
        primes: parse_list(&a.p)?,
        heights: parse_u32_list(&a.n)?,
        depths: parse_u32_list(&a.m)?,
        seed: a.seed,
        samples: a.samples,
    };
    if cfg.primes.iter().any(|&p| !crate::group_ring::is_prime(p)) {
        return Err(Error::Invalid("--p must list primes".into()));
    }
    if cfg.depths.contains(&0) || cfg.heights.contains(&0) {
        return Err(Error::Invalid("--n and --m start at 1".into()));
    }
    let report = lemmas::run_suite(&cfg)?;
    let mut summary = String::new();
    for r in &report.results {
        let _ = writeln!(
            summary,
            "{:<9} p={} level={} m={} checked={:<6} {} {}",
            r.lemma,
            r.p,
            r.level,
            r.m,
            r.checked,
            if r.exhaustive {
                "exhaustive"
            } else {
                "sampled   "
            },
            if r.passed() { "ok" } else { "FAIL" }
        );
    }
    Ok(Rendered {
        passed: report.passed(),
        json: serde_json::to_value(&report).expect("serializable"),
        summary,
    })
}

fn run_indecomp(a: &IndecompArgs) -> Result<Rendered> {
    let ps = parse_list(&a.p)?;
    let ns = parse_u32_list(&a.n)?;
    let ms = parse_u32_list(&a.m)?;
    match (&a.a, a.d) {
        (Some(vec), Some(d)) => {
            let (p, n, m) = (single(&ps, "p")?, single(&ns, "n")?, single(&ms, "m")?);
            let av: NormVector = format!("({vec})").parse()?;
            let cond = indecomp_conditions(p, n, &av, d, m);
            let x = construct_x(p, n, &av, d, m)?;
            let mut json = json!({
                "p": p, "n": n, "m": m, "a": av, "d": d,
                "conditions": cond, "holds": cond.all(),
                "log_order": x.presentation.log_order(),
            });
            let mut passed = true;
            let mut summary = format!(
                "X_{{{av},{d},{m}}} over p={p}, n={n}: |X| = {p}^{}, conditions I–V {}\n",
                x.presentation.log_order(),
                if cond.all() { "hold" } else { "fail" }
            );
            if a.oracle {
                let ind = x.presentation.module().brute_indecomposable(a.guard);
                let status = format!("{ind:?}");
                let decomposable =
                    matches!(ind, crate::rmg_modules::Indecomposability::Decomposable(_));
                if cond.all() && decomposable {
                    passed = false;
                }
                let _ = writeln!(summary, "oracle: {status}");
                json["oracle"] = json!(status);
                json["agreement"] = json!(!(cond.all() && decomposable));
            }
            Ok(Rendered {
                passed,
                json,
                summary,
            })
        }
        (None, None) => {
            let r = lemmas::indecomp_sweep(&ps, &ns, &ms, a.guard)?;
            let summary = format!(
                "{} cases, conditions hold on {}, oracle checked {}, skipped {}, disagreements {}\n",
                r.cases,
                r.conditions_hold,
                r.oracle_checked,
                r.skipped,
                r.disagreements.len()
            );
            Ok(Rendered {
                passed: r.passed(),
                json: serde_json::to_value(&r).expect("serializable"),
                summary,
            })
        }
        _ => Err(Error::Invalid(
            "give both --a and --d, or neither to sweep".into(),
        )),
    }
}

fn run_normpair(a: &NormpairArgs) -> Result<Rendered> {
    let spec: FieldSpec = a.spec.parse()?;
    if a.m == 0 {
        return Err(Error::Invalid("--m starts at 1".into()));
    }
    let tower = Tower::build(spec, a.m, a.guard)?;
    let found = norm_pairs::search_minimal(&tower, a.m, a.budget)?;
    let report = norm_pairs::verify(&tower, &found.pair, &found.witness, a.m)?;
    let ineq = norm_pairs::check_inequalities(tower.p, &found.pair, a.m);
    let i_inv = norm_pairs::i_invariant(&tower)?;
    let a0 = found.pair.a.0[0];
    let a0_matches = !found.complete || a0 == i_inv;
    let lemma_p2 = !(tower.p == 2 && tower.n == 1) || a0.is_none();
    let passed = report.holds() && (!found.complete || ineq.holds()) && a0_matches && lemma_p2;
    let describe = |x: &crate::local_field::FieldElem| tower.describe(x);
    let json = json!({
        "spec": spec,
        "m": a.m,
        "pair": found.pair,
        "complete": found.complete,
        "candidates_tried": found.candidates_tried,
        "witness": {
            "alpha": describe(&found.witness.alpha),
            "deltas": found.witness.deltas.iter().map(describe).collect::<Vec<_>>(),
        },
        "verify": report,
        "inequalities": ineq,
        "i_invariant": i_inv.map_or(json!("-inf"), |i| json!(i)),
        "a0_matches_i": a0_matches,
    });
    let summary = format!(
        "{spec}, m={}: minimal norm pair {} ({} after {} candidates)\n\
         witness verifies: {}; inequalities: {}; i(K/F) = {}\n",
        a.m,
        found.pair,
        if found.complete {
            "complete"
        } else {
            "budget exhausted"
        },
        found.candidates_tried,
        report.holds(),
        if ineq.holds() { "hold" } else { "violated" },
        i_inv.map_or("-inf".to_string(), |i| i.to_string()),
    );
    Ok(Rendered {
        passed,
        json,
        summary,
    })
}

fn summarize(r: &DecompositionReport) -> String {
    let mut s = format!(
        "{}, m={}: {} (ν = {}, e = {:?})\n",
        r.spec, r.m, r.gate, r.nu, r.e
    );
    if let Some(p) = r.pair() {
        let _ = writeln!(s, "exceptional X_{{a,d,m}} with (a, d) = {p}");
    } else if r.certificates.lambda.is_some() {
        let _ = writeln!(
            s,
            "exceptional Z/2^m generated by λ, ann = ⟨2^{}(σ−1)⟩",
            r.nu
        );
    }
    let _ = writeln!(
        s,
        "free ranks e(i,m) = {:?}; |J_m| = {}^{}",
        r.ranks, r.p, r.log_order
    );
    let _ = writeln!(
        s,
        "flags: {}",
        serde_json::to_string(&r.flags).expect("serializable")
    );
    s
}

fn run_decompose(a: &DecomposeArgs) -> Result<Rendered> {
    let spec: FieldSpec = a.spec.parse()?;
    if a.m == 0 {
        return Err(Error::Invalid("--m starts at 1".into()));
    }
    let tower = match a.digits {
        None => Tower::build(spec, a.m, 0)?,
        Some(d) if d < min_prec(&spec, a.m) => {
            return Err(Error::Precision(format!(
                "{d} digits is below the {} needed at m = {}",
                min_prec(&spec, a.m),
                a.m
            )))
        }
        Some(d) => Tower::with_prec(spec, d)?,
    };
    let opts = DecomposeOptions {
        seed: a.seed,
        budget: a.budget,
        oracle_guard_log2: a.guard,
        ..DecomposeOptions::default()
    };
    let report = decomposition::decompose(&tower, a.m, &opts)?;
    let json = serde_json::to_value(&report).expect("serializable");
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&report).expect("serializable");
        std::fs::write(path, text)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(Rendered {
        passed: report.passed(),
        summary: summarize(&report),
        json,
    })
}

fn run_verify(a: &VerifyArgs) -> Result<Rendered> {
    let text = std::fs::read_to_string(&a.report)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", a.report.display())))?;
    let report: DecompositionReport = serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("malformed report: {e}")))?;
    if let Some(s) = &a.spec {
        let spec: FieldSpec = s.parse()?;
        if spec != report.spec {
            return Err(Error::ParamMismatch(format!(
                "report is for {}, not {spec}",
                report.spec
            )));
        }
    }
    let tower = decomposition::tower_for(&report)?;
    let (flags, failures, oracle) = decomposition::verify_report(&tower, &report, a.guard)?;
    let passed = flags.all();
    let json = json!({
        "spec": report.spec,
        "m": report.m,
        "gate": report.gate,
        "flags": flags,
        "failures": failures,
        "oracle": oracle,
        "passed": passed,
    });
    let summary = format!(
        "{}, m={}: {} ({})\n",
        report.spec,
        report.m,
        if passed {
            "all flags pass"
        } else {
            "verification FAILED"
        },
        serde_json::to_string(&flags).expect("serializable")
    );
    Ok(Rendered {
        passed,
        json,
        summary,
    })
}

/// Runs the command line given as arguments (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Lemmas(a) => run_lemmas(a),
        Command::Indecomp(a) => run_indecomp(a),
        Command::Normpair(a) => run_normpair(a),
        Command::Decompose(a) => run_decompose(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(r) => {
            let stdout = if cli.json || !r.passed {
                let mut v = r.json;
                v["passed"] = json!(r.passed);
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&v).expect("serializable")
                )
            } else {
                r.summary
            };
            Outcome {
                code: if r.passed { 0 } else { 1 },
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => {
            let payload =
                json!({"error": error_kind(&e), "message": e.to_string(), "passed": false});
            Outcome {
                code: exit_code(&e),
                stdout: format!(
                    "{}\n",
                    serde_json::to_string_pretty(&payload).expect("serializable")
                ),
                stderr: format!("kummod: {e}\n"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("2,3").unwrap(), vec![2, 3]);
        assert_eq!(parse_list("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_list("1,4..=5").unwrap(), vec![1, 4, 5]);
        assert!(parse_list("3..1").is_err());
        assert!(parse_list("x").is_err());
    }
}
