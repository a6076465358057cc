//! Norm pairs (a, d) of length m, their witnesses (α, δ_0, …, δ_m), the
//! order ≼_m, and an exact search for minimal pairs.
//!
//! A witness satisfies, multiplicatively,
//!
//!   σ(α)/α^d = Π_{i=0}^{m} δ_i^{p^i},
//!   ξ_p = N(α)^{(d−1)/p} · N_{K_{n−1}/F}(δ_0) · Π_{i=1}^{m} N(δ_i)^{p^{i−1}},
//!
//! with δ_i ∈ K_{a_i} for i < m (δ_i = 1 when a_i = −∞) and N = N_{K/F}.
//!
//! Deciding whether (a, d) is a norm pair is a finite computation. The
//! right-hand side of the second equation, call it V, is always a p-th root
//! of unity of F once the first equation holds, it is multiplicative in the
//! witness, and it does not change when α or δ_i is multiplied by a
//! p^m-th (resp. p^{m−i}-th) power of its own field. So the classes
//! ([α]_m, [δ_i]_{m−i}) solving the first equation in J_m(K) form a finite
//! group C, and (a, d) is a norm pair exactly when V is nontrivial on some
//! generator of C, or on a root-of-unity adjustment δ_m ↦ δ_m·ζ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_ring::{in_minus_u, in_u};
use crate::linalg::{kernel, Zpk};
use crate::local_field::{FieldElem, Tower};
use crate::rmg_modules::{NormEntry, NormVector};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormPair {
    pub a: NormVector,
    pub d: i64,
}

impl NormPair {
    pub fn new(a: NormVector, d: i64) -> Self {
        NormPair { a, d }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    fn entry(&self, i: usize) -> NormEntry {
        self.a.0.get(i).copied().flatten()
    }
}

impl std::fmt::Display for NormPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a, self.d)
    }
}

/// (α, δ_0, …, δ_m).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormPairWitness {
    pub alpha: FieldElem,
    pub deltas: Vec<FieldElem>,
}

impl NormPairWitness {
    /// Componentwise t-th power, which multiplies V by itself t times.
    pub fn pow(&self, tower: &Tower, t: i64) -> Self {
        NormPairWitness {
            alpha: tower.pow(&self.alpha, t),
            deltas: self.deltas.iter().map(|x| tower.pow(x, t)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub shape_ok: bool,
    pub levels_ok: bool,
    pub first_equation: bool,
    pub second_equation: bool,
}

impl VerifyReport {
    pub fn holds(&self) -> bool {
        self.shape_ok && self.levels_ok && self.first_equation && self.second_equation
    }
}

/// The fixed primitive p-th root of unity ξ_p ∈ F.
pub fn xi_p(tower: &Tower) -> Result<FieldElem> {
    let z = tower
        .root_of_unity(1)
        .ok_or_else(|| Error::Gate("ξ_p is not in K".into()))?;
    if !tower.in_level(&z, 0) {
        return Err(Error::Gate("ξ_p is not in F".into()));
    }
    Ok(z)
}

/// The hypotheses under which norm pairs drive the decomposition: ξ_p ∈ F,
/// and −1 ∈ N_{K/F}(K^×) when p = 2 and n = 1.
pub fn require_gate(tower: &Tower) -> Result<()> {
    xi_p(tower)?;
    if tower.p == 2 && tower.n == 1 && !tower.minus_one_is_norm()? {
        return Err(Error::Gate(
            "p = 2, n = 1 and −1 is not a norm from K".into(),
        ));
    }
    Ok(())
}

/// V = N(α)^{(d−1)/p} · N_{K_{n−1}/F}(δ_0) · Π_{i≥1} N(δ_i)^{p^{i−1}}.
pub fn second_equation_value(
    tower: &Tower,
    pair: &NormPair,
    w: &NormPairWitness,
) -> Result<FieldElem> {
    let p = tower.p as i64;
    let n = tower.n;
    let mut v = tower.pow(&tower.norm_to_base(&w.alpha)?, (pair.d - 1).div_euclid(p));
    v = tower.mul(&v, &tower.norm(&w.deltas[0], n - 1, 0)?);
    for (i, di) in w.deltas.iter().enumerate().skip(1) {
        let ni = tower.norm_to_base(di)?;
        v = tower.mul(&v, &tower.pow(&ni, p.pow(i as u32 - 1)));
    }
    Ok(v)
}

/// σ(α)/α^d · Π δ_i^{−p^i}, which is 1 exactly when the first equation holds.
fn first_equation_defect(tower: &Tower, pair: &NormPair, w: &NormPairWitness) -> FieldElem {
    let p = tower.p as i64;
    let lhs = tower.sigma_minus(&w.alpha, 1, pair.d);
    let rhs = tower.product(
        w.deltas
            .iter()
            .enumerate()
            .map(|(i, x)| (x, p.pow(i as u32))),
    );
    tower.div(&lhs, &rhs)
}

pub fn verify(tower: &Tower, pair: &NormPair, w: &NormPairWitness, m: u32) -> Result<VerifyReport> {
    let m = m as usize;
    let shape_ok = pair.len() == m
        && w.deltas.len() == m + 1
        && in_u(tower.p, pair.d, 1)
        && pair.entry(0).is_none_or(|a0| a0 < tower.n)
        && pair.a.validate(tower.n).is_ok();
    if !shape_ok {
        return Ok(VerifyReport {
            shape_ok,
            levels_ok: false,
            first_equation: false,
            second_equation: false,
        });
    }
    let levels_ok = (0..m).all(|i| match pair.entry(i) {
        None => tower.is_one(&w.deltas[i]),
        Some(ai) => tower.in_level(&w.deltas[i], ai),
    });
    let first_equation = tower.is_one(&first_equation_defect(tower, pair, w));
    let second_equation = match (levels_ok, xi_p(tower)) {
        (true, Ok(xi)) => tower.approx_eq(&second_equation_value(tower, pair, w)?, &xi),
        _ => false,
    };
    Ok(VerifyReport {
        shape_ok,
        levels_ok,
        first_equation,
        second_equation,
    })
}

/// Sort key refining ≤_m on twists: smaller keys are ≤_m-smaller.
pub fn twist_key(p: u64, d: i64, m: u32) -> (u8, u32) {
    let depth = |f: &dyn Fn(u32) -> bool| (1..=m).take_while(|&t| f(t)).last().unwrap_or(0);
    if p == 2 && m >= 2 && !in_u(2, d, 2) {
        (1, m - depth(&|t| in_minus_u(2, d, t)))
    } else {
        (0, m - depth(&|t| in_u(p, d, t)))
    }
}

/// d ≤_m d'.
pub fn twist_leq(p: u64, d: i64, dp: i64, m: u32) -> bool {
    if p == 2 && !in_u(2, d, 2) && !in_u(2, dp, 2) {
        (2..=m).all(|i| !in_minus_u(2, dp, i) || in_minus_u(2, d, i))
    } else {
        (1..=m).all(|i| !in_u(p, dp, i) || in_u(p, d, i))
    }
}

/// (a, d) ≼_m (a', d'): lexicographic on vectors with −∞ least, then ≤_m.
pub fn order_leq(p: u64, x: &NormPair, y: &NormPair, m: u32) -> Result<bool> {
    if x.len() != m as usize || y.len() != m as usize {
        return Err(Error::ParamMismatch(format!(
            "pairs of lengths {} and {} compared at m = {m}",
            x.len(),
            y.len()
        )));
    }
    Ok(match x.a.cmp(&y.a) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => twist_leq(p, x.d, y.d, m),
    })
}

/// The witness for (a, d + p^m x): δ_m ↦ δ_m·α^{−x}.
pub fn twist_shift(
    tower: &Tower,
    pair: &NormPair,
    w: &NormPairWitness,
    m: u32,
    x: i64,
) -> (NormPair, NormPairWitness) {
    let mut w2 = w.clone();
    let last = m as usize;
    w2.deltas[last] = tower.mul(&w.deltas[last], &tower.pow(&w.alpha, -x));
    let shifted = NormPair::new(pair.a.clone(), pair.d + (tower.p as i64).pow(m) * x);
    (shifted, w2)
}

/// Restricts a pair of length s to length m ≤ s:
/// δ_m = Π_{i=m}^{s} δ̌_i^{p^{i−m}}.
pub fn truncate(
    tower: &Tower,
    pair: &NormPair,
    w: &NormPairWitness,
    m: u32,
) -> Result<(NormPair, NormPairWitness)> {
    let s = pair.len();
    let m = m as usize;
    if m == 0 || m > s || w.deltas.len() != s + 1 {
        return Err(Error::ParamMismatch(format!(
            "cannot truncate length {s} to {m}"
        )));
    }
    let p = tower.p as i64;
    let tail = tower.product(
        w.deltas[m..]
            .iter()
            .enumerate()
            .map(|(k, x)| (x, p.pow(k as u32))),
    );
    let mut deltas = w.deltas[..m].to_vec();
    deltas.push(tail);
    Ok((
        NormPair::new(NormVector(pair.a.0[..m].to_vec()), pair.d),
        NormPairWitness {
            alpha: w.alpha.clone(),
            deltas,
        },
    ))
}

/// Extends a pair of length m to length s ≥ m as
/// ((a_0, …, a_{m−1}, n, −∞, …, −∞), d); δ_m moves to level n.
pub fn extend(
    tower: &Tower,
    pair: &NormPair,
    w: &NormPairWitness,
    s: u32,
) -> Result<(NormPair, NormPairWitness)> {
    let m = pair.len();
    let s = s as usize;
    if s < m {
        return Err(Error::ParamMismatch(format!(
            "cannot extend length {m} to {s}"
        )));
    }
    if s == m {
        return Ok((pair.clone(), w.clone()));
    }
    let mut a = pair.a.0.clone();
    a.push(Some(tower.n));
    a.resize(s, None);
    let mut deltas = w.deltas.clone();
    deltas.resize(s + 1, tower.one());
    Ok((
        NormPair::new(NormVector(a), pair.d),
        NormPairWitness {
            alpha: w.alpha.clone(),
            deltas,
        },
    ))
}

/// Vectors of length m in lexicographic order, a_0 ∈ {−∞, 0..n−1},
/// a_i ∈ {−∞, 0..n} otherwise.
pub fn candidate_vectors(n: u32, m: u32) -> Vec<NormVector> {
    let mut out = vec![Vec::new()];
    for i in 0..m {
        let top = if i == 0 { n.saturating_sub(1) } else { n };
        let choices: Vec<NormEntry> = std::iter::once(None)
            .chain((0..=top).filter(|&a| i > 0 || a < n).map(Some))
            .collect();
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<NormEntry>| {
                choices.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    let mut vs: Vec<NormVector> = out.into_iter().map(NormVector).collect();
    vs.sort();
    vs
}

/// Residues d mod p^m with d ≡ 1 mod p, ordered by ≤_m and then by value.
pub fn twist_candidates(p: u64, m: u32) -> Vec<i64> {
    let pm = p.pow(m) as i64;
    let mut ds: Vec<i64> = (0..pm / p as i64).map(|k| 1 + p as i64 * k).collect();
    ds.sort_by_key(|&d| (twist_key(p, d, m), d));
    debug_assert!(ds.iter().all(|&d| d < pm));
    ds
}

/// Exact decision: a witness for (a, d) at length m, or None.
pub fn decide(tower: &Tower, a: &NormVector, d: i64, m: u32) -> Result<Option<NormPairWitness>> {
    let xi = xi_p(tower)?;
    let p = tower.p;
    let n = tower.n;
    if a.len() != m as usize || a.0[0].is_some_and(|a0| a0 >= n) {
        return Err(Error::Invalid(format!(
            "{a} is not a norm vector of length {m}"
        )));
    }
    a.validate(n)?;
    let km = tower.kummer(n, m)?;
    let module = km.module();
    let ring = module.ring();
    let r0 = module.rank();
    let mut rows = Vec::new();
    for l in 0..r0 {
        let mut nat = vec![0u64; r0];
        nat[l] = 1;
        let v = module.embed(&nat);
        rows.push(module.add(&module.sigma_apply(&v), &module.scale(-d, &v)));
    }
    let mut delta_gens: Vec<(usize, FieldElem)> = Vec::new();
    for i in 0..m as usize {
        if let Some(ai) = a.0[i] {
            let ki = tower.kummer(ai, m - i as u32)?;
            for g in &ki.gens {
                let c = -(p as i64).pow(i as u32);
                rows.push(module.scale(c, &km.dlog(tower, g)?));
                delta_gens.push((i, g.clone()));
            }
        }
    }
    let ker = kernel(ring, &rows, r0);
    let pair = NormPair::new(a.clone(), d);
    let order_p = |v: &FieldElem| -> Option<i64> {
        let mut acc = tower.one();
        for k in 0..p as i64 {
            if tower.approx_eq(v, &acc) {
                return Some(k);
            }
            acc = tower.mul(&acc, &xi);
        }
        None
    };
    let finish = |w: NormPairWitness, k: i64| -> Result<Option<NormPairWitness>> {
        let zk = Zpk::new(p, 1)?;
        let t = zk.inv(k as u64) as i64;
        let w = w.pow(tower, t);
        let report = verify(tower, &pair, &w, m)?;
        if !report.holds() {
            return Err(Error::Verification(format!(
                "constructed witness for {pair} failed verification: {report:?}"
            )));
        }
        Ok(Some(w))
    };
    for row in &ker.rows {
        let alpha = tower.product(
            km.gens
                .iter()
                .zip(&row[..r0])
                .map(|(g, &c)| (g, ring.signed(c))),
        );
        let mut deltas = vec![tower.one(); m as usize + 1];
        for ((i, g), &c) in delta_gens.iter().zip(&row[r0..]) {
            deltas[*i] = tower.mul(&deltas[*i], &tower.pow(g, ring.signed(c)));
        }
        let partial = NormPairWitness {
            alpha: alpha.clone(),
            deltas: deltas.clone(),
        };
        let rho = first_equation_defect(tower, &pair, &partial);
        if !tower.is_pth_power(&rho, m)? {
            return Err(Error::Verification(
                "kernel element does not give a p^m-th power".into(),
            ));
        }
        deltas[m as usize] = tower.pth_root_iter(&rho, m)?;
        let w = NormPairWitness { alpha, deltas };
        let v = second_equation_value(tower, &pair, &w)?;
        match order_p(&v) {
            Some(0) => {}
            Some(k) => return finish(w, k),
            None => {
                return Err(Error::Verification(
                    "second-equation value is not a p-th root of unity".into(),
                ))
            }
        }
    }
    if tower.nu() >= 1 {
        let zeta = tower.root_of_unity(m.min(tower.nu())).expect("ν ≥ 1");
        let mut deltas = vec![tower.one(); m as usize + 1];
        deltas[m as usize] = zeta;
        let w = NormPairWitness {
            alpha: tower.one(),
            deltas,
        };
        if let Some(k) = order_p(&second_equation_value(tower, &pair, &w)?) {
            if k != 0 {
                return finish(w, k);
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    pub pair: NormPair,
    pub witness: NormPairWitness,
    /// Every strictly smaller candidate was decided negatively.
    pub complete: bool,
    pub candidates_tried: usize,
}

/// The ≼_m-minimal norm pair of length m. Candidates are decided exactly
/// in ≼_m order; with a candidate budget the search may stop early and
/// fall back to the pair ((n−1, −∞, …), 1), marked incomplete.
pub fn search_minimal(tower: &Tower, m: u32, budget: Option<usize>) -> Result<SearchResult> {
    require_gate(tower)?;
    let mut tried = 0;
    for a in candidate_vectors(tower.n, m) {
        for d in twist_candidates(tower.p, m) {
            if budget.is_some_and(|b| tried >= b) {
                let (pair, witness) = default_pair(tower, m)?;
                return Ok(SearchResult {
                    pair,
                    witness,
                    complete: false,
                    candidates_tried: tried,
                });
            }
            tried += 1;
            if let Some(witness) = decide(tower, &a, d, m)? {
                return Ok(SearchResult {
                    pair: NormPair::new(a, d),
                    witness,
                    complete: true,
                    candidates_tried: tried,
                });
            }
        }
    }
    Err(Error::Search(format!(
        "no norm pair of length {m} among {tried} candidates"
    )))
}

/// An element of K_{n−1} with N_{K_{n−1}/F} equal to ξ_p.
fn albert_element(tower: &Tower) -> Result<FieldElem> {
    let xi = xi_p(tower)?;
    let n = tower.n;
    if n == 1 {
        return Ok(xi);
    }
    let k = n - 1;
    let base = tower.kummer(0, k)?;
    let src = tower.kummer(k, k)?;
    let images: Vec<Vec<u64>> = src
        .gens
        .iter()
        .map(|g| base.dlog(tower, &tower.norm(g, k, 0)?))
        .collect::<Result<_>>()?;
    let target = base.dlog(tower, &xi)?;
    let coeffs =
        crate::linalg::solve_row(base.module().ring(), &images, base.module().rank(), &target)
            .ok_or_else(|| Error::Verification("ξ_p is not a norm from K_{n−1}".into()))?;
    let ring = base.module().ring();
    let gamma0 = tower.product(
        src.gens
            .iter()
            .zip(&coeffs)
            .map(|(g, &c)| (g, ring.signed(c))),
    );
    // ξ_p / N(γ_0) ∈ F^{×p^{n−1}}; take a p^{n−1}-th root inside F.
    let mut eps = tower.div(&xi, &tower.norm(&gamma0, k, 0)?);
    for step in (0..k).rev() {
        let r = tower.pth_root(&eps)?;
        let mut found = None;
        let mut cand = r;
        for _ in 0..tower.p {
            if tower.in_level(&cand, 0)
                && (step == 0 || tower.dlog(0, step, &cand)?.iter().all(|&c| c == 0))
            {
                found = Some(cand.clone());
                break;
            }
            cand = tower.mul(&cand, &xi);
        }
        eps = found.ok_or_else(|| Error::Verification("no root inside F".into()))?;
    }
    Ok(tower.mul(&gamma0, &eps))
}

/// Some α with σ(α)/α = δ, for N_{K/F}(δ) = 1.
pub fn hilbert90(tower: &Tower, delta: &FieldElem) -> Result<FieldElem> {
    let order = tower.p.pow(tower.n);
    let dinv = tower.inv(delta);
    let x = tower.generator();
    let mut best = None;
    for shift in 0..8 {
        let theta = tower
            .add(&tower.pow(&x, shift), &tower.one())
            .unwrap_or_else(|| tower.one());
        let mut coeff = tower.one();
        let mut conj = theta.clone();
        let mut acc: Option<FieldElem> = None;
        for k in 0..order {
            if k > 0 {
                coeff = tower.mul(&coeff, &tower.sigma_pow(&dinv, k - 1));
                conj = tower.sigma(&conj);
            }
            let term = tower.mul(&coeff, &conj);
            acc = match acc {
                None => Some(term),
                Some(a) => tower.add(&a, &term),
            };
        }
        if let Some(b) = acc {
            if tower.approx_eq(&tower.div(&tower.sigma(&b), &b), delta)
                && best.as_ref().is_none_or(|c: &FieldElem| c.prec < b.prec)
            {
                best = Some(b);
            }
        }
    }
    if let Some(b) = best {
        return Ok(b);
    }
    Err(Error::Verification(
        "Hilbert 90 construction degenerated".into(),
    ))
}

/// ((n−1, −∞, …, −∞), 1) with its Albert/Hilbert-90 witness.
pub fn default_pair(tower: &Tower, m: u32) -> Result<(NormPair, NormPairWitness)> {
    let delta0 = albert_element(tower)?;
    let alpha = hilbert90(tower, &delta0)?;
    let mut a = vec![None; m as usize];
    a[0] = Some(tower.n - 1);
    let mut deltas = vec![tower.one(); m as usize + 1];
    deltas[0] = delta0;
    let pair = NormPair::new(NormVector(a), 1);
    let w = NormPairWitness { alpha, deltas };
    let report = verify(tower, &pair, &w, m)?;
    if !report.holds() {
        return Err(Error::Verification(format!(
            "default witness failed: {report:?}"
        )));
    }
    Ok((pair, w))
}

/// i(K/F): the least i ∈ {−∞, 0, …, n−1} with
/// ξ_p ∈ N_{K_{n−1}/F}(K_i^×)·N_{K/F}(K^×); `None` is −∞.
pub fn i_invariant(tower: &Tower) -> Result<Option<u32>> {
    let xi = xi_p(tower)?;
    let n = tower.n;
    let base = tower.kummer(0, n)?;
    let target = base.dlog(tower, &xi)?;
    let top = tower.norm_span(n, n)?;
    if top.contains(&target) {
        return Ok(None);
    }
    for i in 0..n {
        let src = tower.kummer(i, n)?;
        let extra: Vec<Vec<u64>> = src
            .gens
            .iter()
            .map(|g| {
                let ng = tower.pow(&tower.norm(g, i, 0)?, (tower.p as i64).pow(n - 1 - i));
                base.dlog(tower, &ng)
            })
            .collect::<Result<_>>()?;
        let span = top.join(&crate::linalg::Howell::new(top.ring, top.ncols, extra));
        if span.contains(&target) {
            return Ok(Some(i));
        }
    }
    Err(Error::Verification("ξ_p is not a norm from K_{n−1}".into()))
}

/// α ∉ K_{n−1}, N(α) ∈ K^{×p}, and σ(β)/β = ξ_p for β^p = N(α).
pub fn check_exceptional(tower: &Tower, alpha: &FieldElem) -> Result<bool> {
    let xi = xi_p(tower)?;
    if tower.in_level(alpha, tower.n - 1) {
        return Ok(false);
    }
    let na = tower.norm_to_base(alpha)?;
    if !tower.is_pth_power(&na, 1)? {
        return Ok(false);
    }
    let beta = tower.pth_root(&na)?;
    Ok(tower.approx_eq(&tower.div(&tower.sigma(&beta), &beta), &xi))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub holds: bool,
    pub violations: Vec<String>,
}

/// The inequalities satisfied by every minimal norm pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub clauses: Vec<Clause>,
}

impl InequalityReport {
    pub fn holds(&self) -> bool {
        self.clauses.iter().all(|c| c.holds)
    }
}

fn clause(name: &str, violations: Vec<String>) -> Clause {
    Clause {
        name: name.to_string(),
        holds: violations.is_empty(),
        violations,
    }
}

fn exact_level(p: u64, x: i128) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    let mut y = x;
    while y % p as i128 == 0 {
        y /= p as i128;
        v += 1;
    }
    v
}

pub fn check_inequalities(p: u64, pair: &NormPair, m: u32) -> InequalityReport {
    let m = m as usize;
    let d = pair.d;
    let a = |i: usize| pair.entry(i);
    let not_u2 = p == 2 && !in_u(2, d, 2);
    let mut clauses = Vec::new();

    let mut v = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if let (Some(ai), Some(aj)) = (a(i), a(j)) {
                if ai >= aj {
                    v.push(format!("a_{i} = {ai} ≥ a_{j} = {aj}"));
                }
            }
        }
    }
    clauses.push(clause("increasing", v));

    let mut v = Vec::new();
    if p == 2 && m >= 2 && not_u2 {
        for i in 1..m {
            if a(i) == Some(0) {
                v.push(format!("a_{i} = 0 with d ∉ U_2"));
            }
        }
    }
    clauses.push(clause("no-zero-entries", v));

    let mut v = Vec::new();
    for i in 0..m {
        if p == 2 && m >= 2 && not_u2 && i == 0 && a(0) == Some(0) {
            continue;
        }
        for j in 1..m - i {
            if let (Some(ai), Some(aij)) = (a(i), a(i + j)) {
                if ai as usize + j >= aij as usize {
                    v.push(format!(
                        "a_{i} + {j} = {} ≥ a_{} = {aij}",
                        ai as usize + j,
                        i + j
                    ));
                }
            }
        }
    }
    clauses.push(clause("gap", v));

    let mut v = Vec::new();
    let t_plus = exact_level(p, d as i128 - 1);
    let t_minus = exact_level(2, d as i128 + 1);
    let t = if (p > 2 || in_u(2, d, 2)) && (t_plus as usize) < m {
        Some(t_plus as usize)
    } else if p == 2 && t_minus >= 2 && t_minus != u32::MAX && !in_u(2, d, 2) {
        Some(t_minus as usize)
    } else {
        None
    };
    if let Some(t) = t {
        for k in 0..m.saturating_sub(t) {
            if let Some(x) = a(t + k) {
                if x as usize <= k {
                    v.push(format!("a_{} = {x} ≤ {k} (twist level {t})", t + k));
                }
            }
        }
    }
    clauses.push(clause("twist-level", v));

    let mut v = Vec::new();
    if p == 2 && a(0) == Some(0) && t_minus >= 2 && t_minus != u32::MAX {
        let t = t_minus as usize;
        for k in 0..=m.saturating_sub(t) {
            if t + k == 0 || t + k > m {
                continue;
            }
            if let Some(x) = a(t + k - 1) {
                if x as usize <= k {
                    v.push(format!("a_{} = {x} ≤ {k} (−U level {t})", t + k - 1));
                }
            }
        }
    }
    clauses.push(clause("minus-twist-level", v));

    InequalityReport { clauses }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(s: &str, d: i64) -> NormPair {
        NormPair::new(s.parse().unwrap(), d)
    }

    #[test]
    fn twist_order_examples() {
        assert!(twist_leq(3, 10, 4, 2));
        assert!(!twist_leq(3, 4, 10, 2));
        assert!(twist_leq(2, 7, 3, 3));
        assert!(!twist_leq(2, 3, 7, 3));
        assert!(twist_leq(2, 5, 3, 3));
        let ds = twist_candidates(3, 2);
        assert_eq!(ds, vec![1, 4, 7]);
        let ds = twist_candidates(2, 3);
        assert_eq!(ds, vec![1, 5, 7, 3]);
    }

    #[test]
    fn order_on_pairs() {
        assert!(order_leq(3, &pair("(-inf)", 4), &pair("(0)", 1), 1).unwrap());
        assert!(!order_leq(3, &pair("(0)", 1), &pair("(-inf)", 4), 1).unwrap());
        assert!(order_leq(3, &pair("(0)", 1), &pair("(0,0)", 1), 1).is_err());
    }

    #[test]
    fn candidate_vector_order() {
        let vs = candidate_vectors(1, 2);
        let shown: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        assert_eq!(
            shown,
            [
                "(-inf,-inf)",
                "(-inf,0)",
                "(-inf,1)",
                "(0,-inf)",
                "(0,0)",
                "(0,1)"
            ]
        );
    }

    #[test]
    fn inequality_examples() {
        assert!(check_inequalities(3, &pair("(-inf,-inf,-inf)", 1), 3).holds());
        let r = check_inequalities(3, &pair("(0,0)", 1), 2);
        assert!(!r.clauses[0].holds);
        let r = check_inequalities(3, &pair("(0,1)", 4), 2);
        assert!(r.clauses[0].holds);
        assert!(!r.clauses[2].holds);
    }
}
