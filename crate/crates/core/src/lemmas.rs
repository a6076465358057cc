//! Executable checks of the basic facts about U_i, φ_d and R_mG_i-modules,
//! and the sweep comparing conditions I–V with the endomorphism oracle.
//!
//! Every check enumerates exhaustively when the ring has at most 2^16
//! elements and otherwise draws seeded random samples, so the output is
//! reproducible for a fixed seed regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group_ring::{
    check_upower, classify_twist, in_minus_u, in_u, p_operator, phi_d, GroupRingElement,
    RingParams, TwistLevel,
};
use crate::linalg::{Howell, Zpk};
use crate::rmg_modules::{
    annihilator_element, construct_x, ideal, ideal_floor_check, indecomp_conditions, FinModule,
    Indecomposability, ModulePresentation, NormVector,
};

const EXHAUSTIVE_LIMIT: u64 = 1 << 16;
const MAX_REPORTED: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaResult {
    pub lemma: String,
    pub p: u64,
    /// Level i, or the tower height for arithmetic lemmas.
    pub level: u32,
    pub m: u32,
    pub checked: u64,
    pub exhaustive: bool,
    pub failures: Vec<String>,
}

impl LemmaResult {
    fn new(lemma: &str, p: u64, level: u32, m: u32) -> Self {
        LemmaResult {
            lemma: lemma.to_string(),
            p,
            level,
            m,
            checked: 0,
            exhaustive: true,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failures.len() < MAX_REPORTED {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub samples: u64,
    pub results: Vec<LemmaResult>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub primes: Vec<u64>,
    pub heights: Vec<u32>,
    pub depths: Vec<u32>,
    pub seed: u64,
    /// Random samples per ring when exhaustive enumeration is too large.
    pub samples: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            primes: vec![2, 3],
            heights: vec![1, 2],
            depths: vec![1, 2, 3],
            seed: 1,
            samples: 10_000,
        }
    }
}

fn same(a: &Howell, b: &Howell) -> bool {
    a.contains_all(b) && b.contains_all(a)
}

/// All elements of R_mG_i when there are few, else seeded random ones.
fn elements(
    params: RingParams,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> (Vec<GroupRingElement>, bool) {
    let q = params.ring().q;
    let w = params.width();
    let total = (q as f64).powi(w as i32);
    if total <= EXHAUSTIVE_LIMIT as f64 {
        let count = q.pow(w as u32);
        let all = (0..count)
            .map(|mut idx| {
                let coeffs = (0..w)
                    .map(|_| {
                        let c = idx % q;
                        idx /= q;
                        c
                    })
                    .collect();
                GroupRingElement::new(params, coeffs).expect("reduced")
            })
            .collect();
        (all, true)
    } else {
        let v = (0..samples)
            .map(|_| {
                let coeffs = (0..w).map(|_| rng.gen_range(0..q)).collect();
                GroupRingElement::new(params, coeffs).expect("reduced")
            })
            .collect();
        (v, false)
    }
}

/// d^{p^j} lands where the filtration lemma predicts, for all d ∈ U_1
/// modulo p^6 and j ≤ 4.
pub fn check_upower_lemma(p: u64) -> LemmaResult {
    let mut res = LemmaResult::new("upower", p, 0, 6);
    let base = p.pow(6) as i64;
    for d in (1..base).step_by(p as usize) {
        let class = classify_twist(p, d, 6).expect("d ∈ U_1").level;
        for j in 0..=4u32 {
            let depth = 6 + j;
            let r = Zpk::new(p, depth).expect("small modulus");
            let pw = r.pow(r.from_i64(d), p.pow(j)) as i64;
            let actual = classify_twist(p, pw, depth)
                .expect("power stays in U_1")
                .level;
            let predicted = check_upower(p, class, j);
            let ok = match (predicted, actual) {
                (TwistLevel::UInfinity, TwistLevel::UInfinity) => true,
                (TwistLevel::UInfinity, _) => false,
                (pr, ac) => pr == ac,
            };
            res.record(ok, || {
                format!("d = {d}, j = {j}: predicted {predicted:?}, got {actual:?}")
            });
        }
    }
    res
}

/// φ_d(P(i,j)) ≡ 0 mod p^{i−j} and the three refined cases, for 0 ≤ j ≤ i ≤ n
/// and d ∈ U_1 modulo p^{n+4}; plus multiplicativity of φ_d^{(m)}.
pub fn check_phi_lemma(
    p: u64,
    n: u32,
    m: u32,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<LemmaResult> {
    let mut res = LemmaResult::new("phi", p, n, m);
    let params = RingParams::new(p, n, m.max(n + 4), n)?;
    let top = p.pow(n + 4) as i64;
    let mut ds: Vec<i64> = (1..top).step_by(p as usize).collect();
    if p == 2 {
        ds.push(-1);
    }
    for &d in &ds {
        for i in 0..=n {
            for j in 0..=i {
                let pij = p_operator(params, i, j)?;
                let coarse = phi_d(&pij, d, i - j) == 0;
                res.record(coarse, || format!("φ_{d}(P({i},{j})) ≢ 0 mod p^{}", i - j));
                if j >= i {
                    continue;
                }
                if p > 2 || in_u(p, d, 2) || j > 0 {
                    let v = phi_d(&pij, d, i - j + 1);
                    let want = p.pow(i - j) % p.pow(i - j + 1);
                    res.record(v == want, || {
                        format!("case 1: φ_{d}(P({i},{j})) = {v} mod p^{}", i - j + 1)
                    });
                } else if d == -1 {
                    let v = phi_d(&pij, d, 40);
                    res.record(v == 0, || format!("case 2: φ_-1(P({i},0)) = {v}"));
                } else {
                    let mut v_lvl = 2;
                    while in_minus_u(2, d, v_lvl + 1) {
                        v_lvl += 1;
                    }
                    let v = phi_d(&pij, d, i + v_lvl);
                    let want = 1u64 << (i + v_lvl - 1);
                    res.record(v == want, || {
                        format!(
                            "case 3: d = {d} ∈ −U_{v_lvl}, φ(P({i},0)) = {v} mod 2^{}",
                            i + v_lvl
                        )
                    });
                }
            }
        }
    }
    // φ_d^{(m)} is multiplicative when d^{p^n} ≡ 1 mod p^m
    let ring_params = RingParams::new(p, n, m, n)?;
    let r = ring_params.ring();
    let twists: Vec<i64> = (1..p.pow(m) as i64)
        .step_by(p as usize)
        .filter(|&d| r.pow(r.from_i64(d), p.pow(n)) == 1 % r.q)
        .collect();
    res.exhaustive = false;
    for _ in 0..samples {
        let d = twists[rng.gen_range(0..twists.len())];
        let f = random_element(ring_params, rng);
        let g = random_element(ring_params, rng);
        let fg = f.mul(&g)?;
        let ok = phi_d(&fg, d, m) == r.mul(phi_d(&f, d, m), phi_d(&g, d, m));
        res.record(ok, || {
            format!("φ_{d} not multiplicative on {:?}, {:?}", f.coeffs, g.coeffs)
        });
    }
    Ok(res)
}

fn random_element(params: RingParams, rng: &mut ChaCha8Rng) -> GroupRingElement {
    let q = params.ring().q;
    let coeffs = (0..params.width()).map(|_| rng.gen_range(0..q)).collect();
    GroupRingElement::new(params, coeffs).expect("reduced")
}

/// ann p^k = ⟨p^{m−k}⟩ and ann p^k(σ^{p^j}−1) = ⟨P(i,j), p^{m−k}⟩.
pub fn check_kerbasic_lemma(params: RingParams) -> Result<LemmaResult> {
    let (p, i, m) = (params.p, params.i, params.m);
    let mut res = LemmaResult::new("kerbasic", p, i, m);
    for k in 0..=m {
        let pk = (p as i64).pow(k);
        let pmk = GroupRingElement::scalar(params, (p as i64).pow(m - k));
        let ann = annihilator_element(&GroupRingElement::scalar(params, pk));
        res.record(
            same(&ann, &ideal(params, std::slice::from_ref(&pmk))),
            || format!("ann p^{k} ≠ ⟨p^{}⟩", m - k),
        );
        for j in 0..i {
            let x = GroupRingElement::sigma_minus(params, p.pow(j) as i64, 1).scale(pk);
            let ann = annihilator_element(&x);
            let want = ideal(params, &[p_operator(params, i, j)?, pmk.clone()]);
            res.record(same(&ann, &want), || {
                format!("ann p^{k}(σ^{{p^{j}}}−1) ≠ ⟨P({i},{j}), p^{}⟩", m - k)
            });
        }
    }
    Ok(res)
}

/// (R_mG_i)^* = ⟨p^{m−1}P(i,0)⟩ = ⟨p^{m−1}(σ−1)^{p^i−1}⟩ ≠ 0.
pub fn check_star_lemma(params: RingParams) -> Result<LemmaResult> {
    let (p, i, m) = (params.p, params.i, params.m);
    let mut res = LemmaResult::new("star", p, i, m);
    let star = FinModule::group_ring(params).star();
    let floor = (p as i64).pow(m - 1);
    let via_p = ideal(params, &[p_operator(params, i, 0)?.scale(floor)]);
    let power = GroupRingElement::sigma_minus(params, 1, 1)
        .pow(p.pow(i) - 1)
        .scale(floor);
    let via_sigma = ideal(params, &[power]);
    res.record(same(&star, &via_p), || "M^* ≠ ⟨p^{m−1}P(i,0)⟩".into());
    res.record(same(&star, &via_sigma), || {
        "M^* ≠ ⟨p^{m−1}(σ−1)^{p^i−1}⟩".into()
    });
    res.record(!star.is_zero(), || "M^* = 0".into());
    Ok(res)
}

/// Every nonzero cyclic ideal contains p^{m−1}P(i,0).
pub fn check_ideal_lemma(params: RingParams, samples: u64, rng: &mut ChaCha8Rng) -> LemmaResult {
    let mut res = LemmaResult::new("ideal", params.p, params.i, params.m);
    let (elems, exhaustive) = elements(params, samples, rng);
    res.exhaustive = exhaustive;
    let oks: Vec<bool> = elems.par_iter().map(ideal_floor_check).collect();
    for (f, ok) in elems.iter().zip(oks) {
        res.record(ok, || format!("⟨{:?}⟩ misses p^(m−1)P(i,0)", f.coeffs));
    }
    res
}

/// Random quotients of R_mG_i^2 by one relation row.
fn random_quotient(params: RingParams, rng: &mut ChaCha8Rng) -> Result<ModulePresentation> {
    let row = vec![random_element(params, rng), random_element(params, rng)];
    ModulePresentation::new(params, 2, vec![row])
}

/// M ≠ 0 ⇒ M^* ≠ 0, on the group ring, on every cyclic quotient
/// R_mG_i/⟨f⟩ when enumerable, and on random two-generator modules.
pub fn check_starzero_lemma(
    params: RingParams,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<LemmaResult> {
    let mut res = LemmaResult::new("starzero", params.p, params.i, params.m);
    res.record(FinModule::group_ring(params).star_nonzero_check(), || {
        "R_mG_i".into()
    });
    res.record(FinModule::zero_module(params).star_nonzero_check(), || {
        "zero module".into()
    });
    let (elems, exhaustive) = elements(params, samples, rng);
    res.exhaustive = exhaustive;
    let quotients: Vec<Result<bool>> = elems
        .par_iter()
        .map(|f| {
            let mp = ModulePresentation::new(params, 1, vec![vec![f.clone()]])?;
            Ok(mp.module().star_nonzero_check())
        })
        .collect();
    for (f, ok) in elems.iter().zip(quotients) {
        res.record(ok?, || format!("R/⟨{:?}⟩ has M^* = 0", f.coeffs));
    }
    for _ in 0..samples.min(1000) {
        let mp = random_quotient(params, rng)?;
        res.record(mp.module().star_nonzero_check(), || {
            format!("two-generator module {:?} has M^* = 0", mp.relations)
        });
    }
    Ok(res)
}

/// M_1^* ∩ M_2^* = 0 ⇒ M_1 + M_2 = M_1 ⊕ M_2, for pairs of cyclic
/// submodules of R_mG_i ⊕ R_mG_i.
pub fn check_excl_lemma(params: RingParams, samples: u64, rng: &mut ChaCha8Rng) -> LemmaResult {
    let mut res = LemmaResult::new("excl", params.p, params.i, params.m);
    res.exhaustive = false;
    let w = params.width();
    let free2 = FinModule::new(
        params,
        vec![params.m; 2 * w],
        (0..2 * w)
            .map(|t| {
                let mut v = vec![0; 2 * w];
                v[(t / w) * w + (t % w + 1) % w] = 1;
                v
            })
            .collect(),
    );
    let q = params.ring().q;
    let pairs: Vec<(Vec<u64>, Vec<u64>)> = (0..samples)
        .map(|_| {
            let mut gen = || -> Vec<u64> {
                // sparse vectors make the hypothesis hold often enough to matter
                (0..2 * w)
                    .map(|_| {
                        if rng.gen_bool(0.4) {
                            rng.gen_range(0..q)
                        } else {
                            0
                        }
                    })
                    .collect()
            };
            (gen(), gen())
        })
        .collect();
    let outcomes: Vec<(bool, bool)> = pairs
        .par_iter()
        .map(|(x, y)| {
            let s1 = free2.cyclic(x);
            let s2 = free2.cyclic(y);
            let hyp = free2.stars_meet_trivially(&s1, &s2);
            (hyp, !hyp || free2.direct_sum_certify(&[s1, s2]))
        })
        .collect();
    for ((x, y), (hyp, ok)) in pairs.iter().zip(outcomes) {
        if hyp {
            res.record(ok, || format!("⟨{x:?}⟩ + ⟨{y:?}⟩ not direct"));
        }
    }
    res
}

/// Runs every lemma check over the configured grid. Rings R_mG_i depend
/// only on (p, i, m), so each is checked once.
pub fn run_suite(cfg: &SuiteConfig) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut results = Vec::new();
    for &p in &cfg.primes {
        results.push(check_upower_lemma(p));
        for &n in &cfg.heights {
            for &m in &cfg.depths {
                results.push(check_phi_lemma(p, n, m, cfg.samples.min(2000), &mut rng)?);
            }
        }
        let top = cfg.heights.iter().copied().max().unwrap_or(1);
        for i in 0..=top {
            for &m in &cfg.depths {
                let params = RingParams::new(p, top, m, i)?;
                results.push(check_kerbasic_lemma(params)?);
                results.push(check_star_lemma(params)?);
                results.push(check_ideal_lemma(params, cfg.samples, &mut rng));
                results.push(check_starzero_lemma(params, cfg.samples, &mut rng)?);
                results.push(check_excl_lemma(params, cfg.samples.min(2000), &mut rng));
            }
        }
    }
    Ok(LemmaReport {
        seed: cfg.seed,
        samples: cfg.samples,
        results,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepCase {
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub a: NormVector,
    pub d: i64,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cases: u64,
    pub conditions_hold: u64,
    pub oracle_checked: u64,
    pub skipped: u64,
    pub disagreements: Vec<SweepCase>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// All vectors in {−∞, 0, …, n}^m.
pub fn all_vectors(n: u32, m: u32) -> Vec<NormVector> {
    let mut out: Vec<Vec<Option<u32>>> = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                std::iter::once(None)
                    .chain((0..=n).map(Some))
                    .map(move |c| {
                        let mut w = v.clone();
                        w.push(c);
                        w
                    })
            })
            .collect();
    }
    out.into_iter().map(NormVector).collect()
}

/// Conditions I–V versus the endomorphism oracle on every (a, d mod p^{m+2})
/// for the given p, n, m.
pub fn indecomp_sweep(
    primes: &[u64],
    heights: &[u32],
    depths: &[u32],
    guard_log2: f64,
) -> Result<SweepReport> {
    let mut jobs = Vec::new();
    for &p in primes {
        for &n in heights {
            for &m in depths {
                for a in all_vectors(n, m) {
                    for d in (1..p.pow(m + 2) as i64).step_by(p as usize) {
                        jobs.push((p, n, m, a.clone(), d));
                    }
                }
            }
        }
    }
    let outcomes: Vec<Result<Option<Indecomposability>>> = jobs
        .par_iter()
        .map(|(p, n, m, a, d)| {
            if !indecomp_conditions(*p, *n, a, *d, *m).all() {
                return Ok(None);
            }
            let x = construct_x(*p, *n, a, *d, *m)?;
            Ok(Some(
                x.presentation.module().brute_indecomposable(guard_log2),
            ))
        })
        .collect();
    let mut report = SweepReport {
        cases: jobs.len() as u64,
        conditions_hold: 0,
        oracle_checked: 0,
        skipped: 0,
        disagreements: vec![],
    };
    for ((p, n, m, a, d), out) in jobs.into_iter().zip(outcomes) {
        match out? {
            None => {}
            Some(ind) => {
                report.conditions_hold += 1;
                match ind {
                    Indecomposability::TooLarge { .. } => report.skipped += 1,
                    Indecomposability::Decomposable(w) => {
                        report.oracle_checked += 1;
                        report.disagreements.push(SweepCase {
                            p,
                            n,
                            m,
                            a,
                            d,
                            outcome: format!("decomposable: {w:?}"),
                        });
                    }
                    _ => report.oracle_checked += 1,
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig {
            primes: vec![2, 3],
            heights: vec![1],
            depths: vec![1, 2],
            seed: 3,
            samples: 200,
        };
        let r = run_suite(&cfg).unwrap();
        for x in &r.results {
            assert!(x.passed(), "{x:?}");
            assert!(x.checked > 0, "{x:?}");
        }
    }

    #[test]
    fn vectors_enumerated() {
        assert_eq!(all_vectors(1, 2).len(), 9);
    }
}
