//! Decomposition of J_m into an exceptional summand and free summands over
//! the quotient rings R_mG_i, with certificates that can be rechecked
//! independently of how they were found.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::group_ring::GroupRingElement;
use crate::linalg::Howell;
use crate::local_field::{FieldElem, FieldSpec, KummerModule, Tower};
use crate::norm_pairs::{self, NormPair, NormPairWitness};
use crate::rmg_modules::{
    construct_x, ideal, indecomp_conditions, iso_to_x, FinModule, Indecomposability,
    ModulePresentation, NormVector, DEFAULT_END_GUARD_LOG2,
};

/// The shape of the decomposition of J_m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    /// ξ_p ∈ F (and −1 a norm when p = 2, n = 1): exceptional X_{a,d,m}.
    Exceptional,
    /// p = 2, n = 1, −1 not a norm: exceptional Z/2^m with Z = Z_2G/⟨2^ν(σ−1)⟩.
    CyclicZ,
    /// ξ_p ∉ F: everything is free.
    AllFree,
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

pub fn select_gate(tower: &Tower) -> Result<Gate> {
    if norm_pairs::xi_p(tower).is_err() {
        return Ok(Gate::AllFree);
    }
    if tower.p == 2 && tower.n == 1 && !tower.minus_one_is_norm()? {
        return Ok(Gate::CyclicZ);
    }
    Ok(Gate::Exceptional)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeCertificate {
    pub level: u32,
    pub element: FieldElem,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificates {
    pub alpha: Option<FieldElem>,
    pub deltas: Vec<FieldElem>,
    pub lambda: Option<FieldElem>,
    #[serde(rename = "T")]
    pub t: Vec<FreeCertificate>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub generation: bool,
    pub independence: bool,
    pub free_parts: bool,
    pub exceptional: bool,
    pub indecomposable: bool,
    pub witness: bool,
    pub delta_free: bool,
    pub ranks: bool,
    pub cardinality: bool,
    pub descending: bool,
}

impl Flags {
    pub fn all(&self) -> bool {
        self.generation
            && self.independence
            && self.free_parts
            && self.exceptional
            && self.indecomposable
            && self.witness
            && self.delta_free
            && self.ranks
            && self.cardinality
            && self.descending
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub flag: String,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub spec: FieldSpec,
    pub precision: u32,
    pub gate: Gate,
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub nu: u32,
    /// (e_0(K/F), …, e_n(K/F)).
    pub e: Vec<u32>,
    pub a: Option<NormVector>,
    pub d: Option<i64>,
    pub search_complete: Option<bool>,
    /// e(i, m), the rank of the free R_mG_i-summand Y_i.
    pub ranks: Vec<u32>,
    /// log_p |J_m|.
    pub log_order: u32,
    pub certificates: Certificates,
    pub oracle: String,
    pub flags: Flags,
    pub failures: Vec<Failure>,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.flags.all()
    }

    pub fn pair(&self) -> Option<NormPair> {
        Some(NormPair::new(self.a.clone()?, self.d?))
    }

    pub fn witness(&self) -> Option<NormPairWitness> {
        Some(NormPairWitness {
            alpha: self.certificates.alpha.clone()?,
            deltas: self.certificates.deltas.clone(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    pub seed: u64,
    /// Candidate budget for the norm-pair search.
    pub budget: Option<usize>,
    pub oracle_guard_log2: f64,
    /// Random candidates tried per free generator before giving up.
    pub attempts: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            seed: 0x5eed,
            budget: None,
            oracle_guard_log2: DEFAULT_END_GUARD_LOG2,
            attempts: 4000,
        }
    }
}

/// The λ of the Z-summand: λ^{σ−1} = ξ_{2^ν}^{−1}.
pub fn lambda(tower: &Tower) -> Result<FieldElem> {
    let nu = tower.nu();
    let z = tower
        .root_of_unity(nu)
        .ok_or_else(|| Error::Gate("no 2-power root of unity in K".into()))?;
    let target = tower.inv(&z);
    let good = |l: &FieldElem| tower.approx_eq(&tower.div(&tower.sigma(l), l), &target);
    let candidate = if nu == 1 {
        tower.quadratic_root()
    } else {
        explicit_lambda(tower, &z)
    };
    match candidate {
        Some(l) if good(&l) => Ok(l),
        _ => norm_pairs::hilbert90(tower, &target),
    }
}

/// f_1 + (1 − f_0)ξ_4 with ξ_{2^ν} = f_0 + f_1ξ_4.
fn explicit_lambda(tower: &Tower, z: &FieldElem) -> Option<FieldElem> {
    let i4 = tower.root_of_unity(2)?;
    let half = tower.inv(&tower.from_i64(2).ok()?);
    let zs = tower.sigma(z);
    let f0 = tower.mul(&tower.add(z, &zs)?, &half);
    let f1 = tower.div(&tower.mul(&tower.sub(z, &zs)?, &half), &i4);
    let one_minus = tower.sub(&tower.one(), &f0);
    match one_minus {
        Some(c) => tower.add(&f1, &tower.mul(&c, &i4)),
        None => Some(f1),
    }
}

fn exceptional_generators(r: &DecompositionReport) -> Result<Vec<FieldElem>> {
    let c = &r.certificates;
    Ok(match r.gate {
        Gate::AllFree => vec![],
        Gate::CyclicZ => vec![c
            .lambda
            .clone()
            .ok_or_else(|| Error::Invalid("report lacks λ".into()))?],
        Gate::Exceptional => {
            let a =
                r.a.as_ref()
                    .ok_or_else(|| Error::Invalid("report lacks a".into()))?;
            let alpha = c
                .alpha
                .clone()
                .ok_or_else(|| Error::Invalid("report lacks α".into()))?;
            if c.deltas.len() != r.m as usize + 1 {
                return Err(Error::Invalid("report has the wrong number of δ's".into()));
            }
            std::iter::once(alpha)
                .chain(
                    (0..r.m as usize)
                        .filter(|&i| a.0[i].is_some())
                        .map(|i| c.deltas[i].clone()),
                )
                .collect()
        }
    })
}

/// e(i, m) from the e_i and the gate data.
pub fn expected_ranks(gate: Gate, e: &[u32], a: Option<&NormVector>) -> Result<Vec<u32>> {
    let n = e.len() - 1;
    let mut ranks: Vec<i64> = e.iter().map(|&x| x as i64).collect();
    match gate {
        Gate::AllFree => {}
        Gate::CyclicZ => ranks.iter_mut().for_each(|r| *r -= 1),
        Gate::Exceptional => {
            ranks[n] -= 1;
            for ai in a.into_iter().flat_map(|a| a.0.iter()).flatten() {
                ranks[*ai as usize] -= 1;
            }
        }
    }
    ranks
        .iter()
        .map(|&r| {
            u32::try_from(r).map_err(|_| {
                Error::Verification(format!("negative free rank in {ranks:?} from e = {e:?}"))
            })
        })
        .collect()
}

/// Greedy choice of free generators, from level n down to 0, each one
/// enlarging the span by a free cyclic R_mG_i-summand.
fn choose_free(
    tower: &Tower,
    km: &KummerModule,
    start: Howell,
    ranks: &[u32],
    m: u32,
    rng: &mut ChaCha8Rng,
    attempts: usize,
) -> Result<Vec<FreeCertificate>> {
    let module = km.module();
    let ring = module.ring();
    let mut span = start;
    let mut out = Vec::new();
    for level in (0..=tower.n).rev() {
        let need = ranks[level as usize];
        if need == 0 {
            continue;
        }
        let step = m * tower.p.pow(level) as u32;
        let lk = tower.kummer(level, m)?;
        let logs: Vec<Vec<u64>> = lk
            .gens
            .iter()
            .map(|g| km.dlog(tower, g))
            .collect::<Result<_>>()?;
        let r = logs.len();
        let mut found = 0;
        let mut tries = 0;
        let mut next_single = 0;
        while found < need {
            let coeffs: Vec<u64> = if next_single < r {
                next_single += 1;
                (0..r).map(|k| (k + 1 == next_single) as u64).collect()
            } else {
                tries += 1;
                if tries > attempts {
                    return Err(Error::Search(format!(
                        "no free generator at level {level} after {attempts} candidates"
                    )));
                }
                (0..r).map(|_| rng.gen_range(0..ring.q)).collect()
            };
            let mut x = module.zero();
            for (c, l) in coeffs.iter().zip(&logs) {
                x = module.add(&x, &module.scale(*c as i64, l));
            }
            let joined = span.join(&module.cyclic(&x));
            if joined.log_order() == span.log_order() + step {
                span = joined;
                found += 1;
                let element = tower.product(
                    lk.gens
                        .iter()
                        .zip(&coeffs)
                        .map(|(g, &c)| (g, ring.signed(c))),
                );
                out.push(FreeCertificate { level, element });
            }
        }
    }
    Ok(out)
}

/// Builds and certifies the decomposition of J_m.
pub fn decompose(tower: &Tower, m: u32, opts: &DecomposeOptions) -> Result<DecompositionReport> {
    let gate = select_gate(tower)?;
    let e = tower.norm_indices()?;
    let km = tower.kummer(tower.n, m)?;
    let mut report = DecompositionReport {
        spec: tower.spec,
        precision: tower.prec,
        gate,
        p: tower.p,
        n: tower.n,
        m,
        nu: tower.nu(),
        e: e.clone(),
        a: None,
        d: None,
        search_complete: None,
        ranks: vec![],
        log_order: km.log_order(),
        certificates: Certificates::default(),
        oracle: String::new(),
        flags: Flags::default(),
        failures: vec![],
    };
    match gate {
        Gate::AllFree => {}
        Gate::CyclicZ => report.certificates.lambda = Some(lambda(tower)?),
        Gate::Exceptional => {
            let found = norm_pairs::search_minimal(tower, m, opts.budget)?;
            report.a = Some(found.pair.a);
            report.d = Some(found.pair.d);
            report.search_complete = Some(found.complete);
            report.certificates.alpha = Some(found.witness.alpha);
            report.certificates.deltas = found.witness.deltas;
        }
    }
    report.ranks = expected_ranks(gate, &e, report.a.as_ref())?;
    let exc: Vec<Vec<u64>> = exceptional_generators(&report)?
        .iter()
        .map(|g| km.dlog(tower, g))
        .collect::<Result<_>>()?;
    let start = km.module().span(&exc);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    report.certificates.t =
        choose_free(tower, &km, start, &report.ranks, m, &mut rng, opts.attempts)?;
    let (flags, failures, oracle) = verify_report(tower, &report, opts.oracle_guard_log2)?;
    report.flags = flags;
    report.failures = failures;
    report.oracle = oracle;
    if !report.passed() {
        return Err(Error::Verification(
            serde_json::to_string(&report.failures).unwrap_or_default(),
        ));
    }
    Ok(report)
}

/// For each i < m with a_i ≠ −∞, ⟨[δ_i]_1⟩ is a free F_pG_{a_i}-module.
pub fn delta_free_check(
    tower: &Tower,
    pair: &NormPair,
    witness: &NormPairWitness,
    m: u32,
) -> Result<bool> {
    let j1 = tower.kummer(tower.n, 1)?;
    for i in 0..m as usize {
        if let Some(ai) = pair.a.0.get(i).copied().flatten() {
            let x = j1.dlog(tower, &witness.deltas[i])?;
            if !j1.module().is_free_cyclic(&x, ai).unwrap_or(false) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The report at depth j < m: the witness is truncated and each δ_i with
/// j ≤ i < m joins the free generators at level a_i.
pub fn truncate_report(
    tower: &Tower,
    report: &DecompositionReport,
    j: u32,
) -> Result<DecompositionReport> {
    if j == 0 || j > report.m {
        return Err(Error::ParamMismatch(format!(
            "cannot truncate depth {} to {j}",
            report.m
        )));
    }
    let mut out = report.clone();
    out.m = j;
    out.flags = Flags::default();
    out.failures.clear();
    out.oracle.clear();
    out.search_complete = None;
    out.log_order = tower.kummer(tower.n, j)?.log_order();
    if report.gate == Gate::Exceptional {
        let pair = report
            .pair()
            .ok_or_else(|| Error::Invalid("report lacks a pair".into()))?;
        let w = report
            .witness()
            .ok_or_else(|| Error::Invalid("report lacks a witness".into()))?;
        let (tp, tw) = norm_pairs::truncate(tower, &pair, &w, j)?;
        for i in j as usize..report.m as usize {
            if let Some(ai) = pair.a.0[i] {
                out.certificates.t.push(FreeCertificate {
                    level: ai,
                    element: w.deltas[i].clone(),
                });
            }
        }
        out.a = Some(tp.a);
        out.certificates.alpha = Some(tw.alpha);
        out.certificates.deltas = tw.deltas;
        out.ranks = expected_ranks(Gate::Exceptional, &report.e, out.a.as_ref())?;
    }
    Ok(out)
}

fn fail(failures: &mut Vec<Failure>, flag: &str, detail: serde_json::Value) {
    failures.push(Failure {
        flag: flag.to_string(),
        detail,
    });
}

/// Z/2^m = R_mG/⟨2^ν(σ−1)⟩ together with the ideal ⟨2^ν(σ−1)⟩.
fn z_module(tower: &Tower, m: u32) -> Result<(ModulePresentation, Howell)> {
    let params = crate::group_ring::RingParams::new(tower.p, tower.n, m, tower.n)?;
    let rel = GroupRingElement::sigma_minus(params, 1, 1).scale(1i64 << tower.nu().min(62));
    let id = ideal(params, std::slice::from_ref(&rel));
    Ok((ModulePresentation::new(params, 1, vec![vec![rel]])?, id))
}

fn oracle_status(ind: &Indecomposability) -> String {
    match ind {
        Indecomposability::Zero => "zero module".into(),
        Indecomposability::Indecomposable { log_p_end } => {
            format!("indecomposable (|End| = p^{log_p_end})")
        }
        Indecomposability::Decomposable(_) => "decomposable".into(),
        Indecomposability::TooLarge { log2_end } => {
            format!("skipped (|End| = 2^{log2_end:.1} beyond guard)")
        }
    }
}

/// Checks (i)–(vi) on a report without recomputing any choice. Returns the
/// flags, the failures with offending certificates, and the oracle status.
pub fn verify_report(
    tower: &Tower,
    report: &DecompositionReport,
    oracle_guard_log2: f64,
) -> Result<(Flags, Vec<Failure>, String)> {
    let (mut flags, mut failures, oracle) = verify_core(tower, report, oracle_guard_log2)?;
    flags.descending = true;
    for j in (1..report.m).rev() {
        let tr = truncate_report(tower, report, j)?;
        let (f, fl, _) = verify_core(tower, &tr, 0.0)?;
        let ok = f.generation
            && f.independence
            && f.free_parts
            && f.exceptional
            && f.witness
            && f.ranks
            && f.cardinality;
        if !ok {
            flags.descending = false;
            fail(
                &mut failures,
                "descending",
                json!({"depth": j, "flags": f, "failures": fl}),
            );
        }
    }
    Ok((flags, failures, oracle))
}

fn verify_core(
    tower: &Tower,
    report: &DecompositionReport,
    oracle_guard_log2: f64,
) -> Result<(Flags, Vec<Failure>, String)> {
    if report.spec != tower.spec || report.p != tower.p || report.n != tower.n {
        return Err(Error::ParamMismatch(format!(
            "report is for {}, tower is {}",
            report.spec, tower.spec
        )));
    }
    let m = report.m;
    let n = tower.n;
    let p = tower.p;
    let km = tower.kummer(n, m)?;
    let module: &FinModule = km.module();
    let mut flags = Flags::default();
    let mut failures = Vec::new();
    let mut oracle = "not applicable".to_string();

    let exc_elems = exceptional_generators(report)?;
    let exc: Vec<Vec<u64>> = exc_elems
        .iter()
        .map(|g| km.dlog(tower, g))
        .collect::<Result<_>>()?;
    let free: Vec<Vec<u64>> = report
        .certificates
        .t
        .iter()
        .map(|t| km.dlog(tower, &t.element))
        .collect::<Result<_>>()?;
    let exc_span = module.span(&exc);
    let mut subs = vec![exc_span.clone()];
    subs.extend(free.iter().map(|x| module.cyclic(x)));
    let mut all = exc.clone();
    all.extend(free.iter().cloned());
    let total = module.span(&all);

    flags.generation = total.log_order() == module.log_order();
    if !flags.generation {
        fail(
            &mut failures,
            "generation",
            json!({"span": total.log_order(), "module": module.log_order()}),
        );
    }
    flags.independence = module.direct_sum_certify(&subs);
    if !flags.independence {
        fail(
            &mut failures,
            "independence",
            json!({"summands": subs.iter().map(|s| s.log_order()).collect::<Vec<_>>(),
                   "sum": total.log_order()}),
        );
    }

    flags.free_parts = true;
    let mut counts = vec![0u32; n as usize + 1];
    for (t, x) in report.certificates.t.iter().zip(&free) {
        let ok = t.level <= n
            && tower.in_level(&t.element, t.level)
            && module.is_free_cyclic(x, t.level).unwrap_or(false);
        if ok {
            counts[t.level as usize] += 1;
        } else {
            flags.free_parts = false;
            fail(&mut failures, "free_parts", json!({"certificate": t}));
        }
    }
    if counts != report.ranks {
        flags.free_parts = false;
        fail(
            &mut failures,
            "free_parts",
            json!({"counts": counts, "ranks": report.ranks}),
        );
    }

    let expected = expected_ranks(report.gate, &report.e, report.a.as_ref());
    flags.ranks =
        tower.norm_indices()? == report.e && expected.as_ref().is_ok_and(|r| *r == report.ranks);
    if !flags.ranks {
        fail(
            &mut failures,
            "ranks",
            json!({"ranks": report.ranks, "e": report.e, "expected": expected.ok()}),
        );
    }

    let free_log: u32 = report
        .ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| r * m * p.pow(i as u32) as u32)
        .sum();
    let formula = m * (tower.degree() as u32 + 1) + m.min(tower.nu());
    flags.cardinality = exc_span.log_order() + free_log == module.log_order()
        && module.log_order() == formula
        && report.log_order == formula;
    if !flags.cardinality {
        fail(
            &mut failures,
            "cardinality",
            json!({"exceptional": exc_span.log_order(), "free": free_log,
                   "module": module.log_order(), "formula": formula}),
        );
    }

    match report.gate {
        Gate::AllFree => {
            flags.exceptional = exc.is_empty();
            flags.indecomposable = true;
            flags.witness = true;
            flags.delta_free = true;
        }
        Gate::CyclicZ => {
            let lam = &exc_elems[0];
            let z = tower.root_of_unity(tower.nu());
            let relation = z.is_some_and(|z| {
                tower.approx_eq(&tower.div(&tower.sigma(lam), lam), &tower.inv(&z))
            });
            let (zm, expect) = z_module(tower, m)?;
            let ann = module.annihilator(&exc[0]);
            let ann_ok = ann.contains_all(&expect) && expect.contains_all(&ann);
            flags.exceptional = relation && ann_ok;
            if !flags.exceptional {
                fail(
                    &mut failures,
                    "exceptional",
                    json!({"lambda": lam, "relation": relation, "annihilator": ann_ok}),
                );
            }
            flags.witness = true;
            flags.delta_free = true;
            flags.indecomposable = true;
            if oracle_guard_log2 > 0.0 {
                let ind = zm.module().brute_indecomposable(oracle_guard_log2);
                oracle = oracle_status(&ind);
                if matches!(ind, Indecomposability::Decomposable(_)) {
                    flags.indecomposable = false;
                    fail(&mut failures, "indecomposable", json!({"oracle": oracle}));
                }
            }
        }
        Gate::Exceptional => {
            let pair = report
                .pair()
                .ok_or_else(|| Error::Invalid("report lacks a pair".into()))?;
            let w = report
                .witness()
                .ok_or_else(|| Error::Invalid("report lacks a witness".into()))?;
            let wr = norm_pairs::verify(tower, &pair, &w, m)?;
            flags.witness = wr.holds();
            if !flags.witness {
                fail(
                    &mut failures,
                    "witness",
                    json!({"pair": pair.to_string(), "report": wr}),
                );
            }
            let iso = iso_to_x(module, &exc[0], &exc[1..], &pair.a, pair.d, m)?;
            flags.exceptional = iso.holds();
            if !flags.exceptional {
                fail(
                    &mut failures,
                    "exceptional",
                    json!({"pair": pair.to_string(), "iso": iso, "alpha": w.alpha}),
                );
            }
            let cond = indecomp_conditions(p, n, &pair.a, pair.d, m);
            flags.indecomposable = cond.all();
            if oracle_guard_log2 > 0.0 {
                let x = construct_x(p, n, &pair.a, pair.d, m)?;
                let ind = x
                    .presentation
                    .module()
                    .brute_indecomposable(oracle_guard_log2);
                oracle = oracle_status(&ind);
                if matches!(ind, Indecomposability::Decomposable(_)) {
                    flags.indecomposable = false;
                }
            }
            if !flags.indecomposable {
                fail(
                    &mut failures,
                    "indecomposable",
                    json!({"conditions": cond, "oracle": oracle}),
                );
            }
            flags.delta_free = delta_free_check(tower, &pair, &w, m)?;
            if !flags.delta_free {
                fail(&mut failures, "delta_free", json!({"deltas": w.deltas}));
            }
        }
    }
    Ok((flags, failures, oracle))
}

/// Rebuilds the tower a report was computed in.
pub fn tower_for(report: &DecompositionReport) -> Result<Tower> {
    Tower::with_prec(report.spec, report.precision)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_formulas() {
        let a: NormVector = "(-inf,-inf)".parse().unwrap();
        assert_eq!(
            expected_ranks(Gate::Exceptional, &[1, 3], Some(&a)).unwrap(),
            vec![1, 2]
        );
        assert_eq!(
            expected_ranks(Gate::CyclicZ, &[1, 2], None).unwrap(),
            vec![0, 1]
        );
        assert_eq!(
            expected_ranks(Gate::AllFree, &[1, 1], None).unwrap(),
            vec![1, 1]
        );
        let a: NormVector = "(0,-inf)".parse().unwrap();
        assert!(expected_ranks(Gate::Exceptional, &[0, 3], Some(&a)).is_err());
    }
}
