//! Finite modules over R_mG: presentations, spans, annihilators, the star
//! submodule M^* = ann_M⟨σ−1, p⟩, the modules X_{a,d,m}, direct-sum and
//! isomorphism certificates, and an endomorphism-ring indecomposability
//! oracle.
//!
//! A finite module is stored as ⊕ Z/p^{k_l} (Smith coordinates) embedded in
//! (Z/p^m)^r through x_l ↦ p^{m−k_l} x_l, so that every submodule is a plain
//! Z/p^m-lattice and every question becomes a Howell-form computation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_ring::{in_minus_u, in_u, p_operator, GroupRingElement, RingParams};
use crate::linalg::{axpy, kernel, mat_mul, smith, vec_mat, Howell, Zpk};

/// An entry of a norm vector: `None` is −∞.
pub type NormEntry = Option<u32>;

/// a = (a_0, …, a_{m−1}) with entries in {−∞, 0, …, n}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct NormVector(pub Vec<NormEntry>);

impl NormVector {
    pub fn minus_infinity(m: usize) -> Self {
        NormVector(vec![None; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        if let Some(&Some(a)) = self.0.iter().find(|e| matches!(e, Some(a) if *a > n)) {
            return Err(Error::Invalid(format!("entry {a} exceeds n = {n}")));
        }
        Ok(())
    }
}

pub fn entry_string(e: NormEntry) -> String {
    match e {
        None => "-inf".to_string(),
        Some(a) => a.to_string(),
    }
}

pub fn parse_entry(s: &str) -> Result<NormEntry> {
    let s = s.trim();
    if s == "-inf" || s == "−∞" {
        return Ok(None);
    }
    s.parse::<u32>()
        .map(Some)
        .map_err(|_| Error::Invalid(format!("bad norm-vector entry {s:?}")))
}

impl fmt::Display for NormVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|&e| entry_string(e)).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for NormVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.is_empty() {
            return Ok(NormVector(Vec::new()));
        }
        s.split(',')
            .map(parse_entry)
            .collect::<Result<_>>()
            .map(NormVector)
    }
}

impl From<NormVector> for Vec<String> {
    fn from(v: NormVector) -> Self {
        v.0.into_iter().map(entry_string).collect()
    }
}

impl TryFrom<Vec<String>> for NormVector {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        v.iter()
            .map(|s| parse_entry(s))
            .collect::<Result<_>>()
            .map(NormVector)
    }
}

/// A finite R_mG_i-module ⊕ Z/p^{k_l} in embedded coordinates.
#[derive(Clone, Debug)]
pub struct FinModule {
    pub params: RingParams,
    pub orders: Vec<u32>,
    /// σ on embedded coordinates, row convention (x ↦ x·sigma).
    pub sigma: Vec<Vec<u64>>,
    basis: Howell,
}

/// Result of building a module from raw relations: the module plus the map
/// from raw coordinates into it.
#[derive(Clone, Debug)]
pub struct RawModule {
    pub module: FinModule,
    /// Columns of Q kept after Smith reduction.
    q_kept: Vec<Vec<u64>>,
    /// Raw-coordinate lifts of the module's natural generators.
    pub lifts: Vec<Vec<u64>>,
}

impl RawModule {
    /// Raw coordinate vector ↦ embedded module element.
    pub fn to_module(&self, raw: &[u64]) -> Vec<u64> {
        let ring = self.module.ring();
        self.module
            .orders
            .iter()
            .enumerate()
            .map(|(l, &k)| {
                let mut s = 0;
                for (x, qrow) in raw.iter().zip(&self.q_kept) {
                    if *x != 0 {
                        s = ring.add(s, ring.mul(*x % ring.q, qrow[l]));
                    }
                }
                ring.mul(s, ring.p.pow(ring.k - k))
            })
            .collect()
    }
}

impl FinModule {
    pub fn ring(&self) -> Zpk {
        self.params.ring()
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// |G_i| for the acting group.
    pub fn width(&self) -> usize {
        self.params.width()
    }

    /// Builds from raw generators over Z/p^m, raw relation rows, and the raw
    /// action of σ (which must preserve the relation span).
    pub fn from_raw(
        params: RingParams,
        r: usize,
        relations: &[Vec<u64>],
        sigma_raw: &[Vec<u64>],
    ) -> RawModule {
        let ring = params.ring();
        let sm = smith(ring, relations, r);
        let kept: Vec<usize> = (0..r).filter(|&t| sm.orders[t] > 0).collect();
        let orders: Vec<u32> = kept.iter().map(|&t| sm.orders[t]).collect();
        let q_kept: Vec<Vec<u64>> =
            sm.q.iter()
                .map(|row| kept.iter().map(|&t| row[t]).collect())
                .collect();
        let lifts: Vec<Vec<u64>> = kept.iter().map(|&t| sm.qinv[t].clone()).collect();
        let k = orders.len();
        let mut sigma = vec![vec![0u64; k]; k];
        for i in 0..k {
            let img = vec_mat(&ring, &lifts[i], sigma_raw, r);
            for l in 0..k {
                let mut s = 0;
                for (x, qrow) in img.iter().zip(&q_kept) {
                    if *x != 0 {
                        s = ring.add(s, ring.mul(*x, qrow[l]));
                    }
                }
                let (ki, kl) = (orders[i], orders[l]);
                let nat = s % params.p.pow(kl);
                sigma[i][l] = if ki >= kl {
                    ring.mul(nat, params.p.pow(ki - kl))
                } else {
                    debug_assert_eq!(nat % params.p.pow(kl - ki), 0);
                    nat / params.p.pow(kl - ki)
                };
            }
        }
        let module = FinModule::new(params, orders, sigma);
        RawModule {
            module,
            q_kept,
            lifts,
        }
    }

    pub fn new(params: RingParams, orders: Vec<u32>, sigma: Vec<Vec<u64>>) -> Self {
        let ring = params.ring();
        let r = orders.len();
        let basis = Howell::new(
            ring,
            r,
            orders.iter().enumerate().map(|(l, &k)| {
                let mut v = vec![0; r];
                v[l] = ring.p.pow(ring.k - k) % ring.q;
                v
            }),
        );
        FinModule {
            params,
            orders,
            sigma,
            basis,
        }
    }

    /// The free module R_mG_i of rank one, coordinates = coefficients.
    pub fn group_ring(params: RingParams) -> Self {
        let w = params.width();
        let sigma = (0..w)
            .map(|t| {
                let mut v = vec![0; w];
                v[(t + 1) % w] = 1;
                v
            })
            .collect();
        FinModule::new(params, vec![params.m; w], sigma)
    }

    pub fn zero_module(params: RingParams) -> Self {
        FinModule::new(params, Vec::new(), Vec::new())
    }

    pub fn log_order(&self) -> u32 {
        self.orders.iter().sum()
    }

    pub fn whole(&self) -> &Howell {
        &self.basis
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    pub fn is_element(&self, x: &[u64]) -> bool {
        self.basis.contains(x)
    }

    /// Natural (Smith) coordinates of an embedded element.
    pub fn natural(&self, x: &[u64]) -> Vec<u64> {
        let ring = self.ring();
        x.iter()
            .zip(&self.orders)
            .map(|(&v, &k)| (v / ring.p.pow(ring.k - k)) % ring.p.pow(k))
            .collect()
    }

    pub fn embed(&self, nat: &[u64]) -> Vec<u64> {
        let ring = self.ring();
        nat.iter()
            .zip(&self.orders)
            .map(|(&v, &k)| ring.mul(v, ring.p.pow(ring.k - k)))
            .collect()
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let ring = self.ring();
        x.iter().zip(y).map(|(&a, &b)| ring.add(a, b)).collect()
    }

    pub fn scale(&self, c: i64, x: &[u64]) -> Vec<u64> {
        let ring = self.ring();
        let c = ring.from_i64(c);
        x.iter().map(|&a| ring.mul(a, c)).collect()
    }

    pub fn sigma_apply(&self, x: &[u64]) -> Vec<u64> {
        vec_mat(&self.ring(), x, &self.sigma, self.rank())
    }

    pub fn sigma_pow(&self, x: &[u64], t: usize) -> Vec<u64> {
        let mut y = x.to_vec();
        for _ in 0..t {
            y = self.sigma_apply(&y);
        }
        y
    }

    /// The orbit x, σx, …, σ^{w−1}x for the group of width w.
    pub fn orbit(&self, x: &[u64], w: usize) -> Vec<Vec<u64>> {
        let mut out = Vec::with_capacity(w);
        let mut y = x.to_vec();
        for _ in 0..w {
            let next = self.sigma_apply(&y);
            out.push(y);
            y = next;
        }
        out
    }

    /// f·x for f ∈ R_mG_j (exponents taken literally).
    pub fn act(&self, f: &GroupRingElement, x: &[u64]) -> Vec<u64> {
        let ring = self.ring();
        let mut acc = self.zero();
        let mut y = x.to_vec();
        for &c in &f.coeffs {
            let c = c % ring.q;
            if c != 0 {
                axpy(&ring, &mut acc, c, &y);
            }
            y = self.sigma_apply(&y);
        }
        acc
    }

    /// Submodule generated by the given elements.
    pub fn span(&self, gens: &[Vec<u64>]) -> Howell {
        let w = self.width();
        Howell::new(
            self.ring(),
            self.rank(),
            gens.iter().flat_map(|g| self.orbit(g, w)),
        )
    }

    pub fn cyclic(&self, x: &[u64]) -> Howell {
        self.span(std::slice::from_ref(&x.to_vec()))
    }

    /// ann(x) ⊆ R_mG_i as a lattice of coefficient vectors.
    pub fn annihilator(&self, x: &[u64]) -> Howell {
        kernel(self.ring(), &self.orbit(x, self.width()), self.rank())
    }

    /// ann(S) for a submodule S, the intersection over its generators.
    pub fn annihilator_of(&self, s: &Howell) -> Howell {
        let w = self.width();
        let mut acc = Howell::new(self.ring(), w, crate::linalg::identity(w));
        for g in &s.rows {
            acc = acc.intersect(&self.annihilator(g));
        }
        acc
    }

    /// S^* = {x ∈ S : (σ−1)x = 0, px = 0}.
    pub fn star_of(&self, s: &Howell) -> Howell {
        let ring = self.ring();
        let r = self.rank();
        let rows: Vec<Vec<u64>> = s
            .rows
            .iter()
            .map(|b| {
                let sb = self.sigma_apply(b);
                let mut v: Vec<u64> = sb.iter().zip(b).map(|(&a, &c)| ring.sub(a, c)).collect();
                v.extend(b.iter().map(|&c| ring.mul(c, ring.p % ring.q)));
                v
            })
            .collect();
        let ker = kernel(ring, &rows, 2 * r);
        Howell::new(
            ring,
            r,
            ker.rows.iter().map(|c| vec_mat(&ring, c, &s.rows, r)),
        )
    }

    pub fn star(&self) -> Howell {
        self.star_of(&self.basis.clone())
    }

    /// ⟨x⟩ ≅ R_mG_i, for x killed by σ^{p^i} − 1.
    pub fn is_free_cyclic(&self, x: &[u64], level: u32) -> Result<bool> {
        let w = self.params.p.pow(level) as usize;
        let ring = self.ring();
        let sx = self.sigma_pow(x, w);
        if sx != x {
            return Err(Error::Invalid(format!(
                "element is not fixed by σ^{{p^{level}}}"
            )));
        }
        let pl = p_operator(self.params.at_level(level), level, 0)?;
        let y = self.act(&pl, x);
        let y = self.scale(ring.p.pow(ring.k - 1) as i64, &y);
        Ok(y.iter().any(|&c| c != 0))
    }

    /// True iff the sum of the submodules is direct.
    pub fn direct_sum_certify(&self, subs: &[Howell]) -> bool {
        let total: u32 = subs.iter().map(|s| s.log_order()).sum();
        let joined = Howell::new(
            self.ring(),
            self.rank(),
            subs.iter().flat_map(|s| s.rows.iter().cloned()),
        );
        joined.log_order() == total
    }

    /// Sufficient test M_1^* ∩ M_2^* = 0 for M_1 + M_2 to be direct.
    pub fn stars_meet_trivially(&self, s1: &Howell, s2: &Howell) -> bool {
        self.star_of(s1).intersect(&self.star_of(s2)).is_zero()
    }

    /// M ≠ 0 ⇒ M^* ≠ 0.
    pub fn star_nonzero_check(&self) -> bool {
        self.log_order() == 0 || !self.star().is_zero()
    }

    /// Lattice of endomorphism parameters: entry (i,l) of the embedded
    /// matrix is c_{il}·p^{max(0, k_i−k_l)}.
    fn endomorphism_matrix(&self, c: &[u64]) -> Vec<Vec<u64>> {
        let ring = self.ring();
        let r = self.rank();
        let mut e = vec![vec![0u64; r]; r];
        for i in 0..r {
            for l in 0..r {
                let sh = self.orders[i].saturating_sub(self.orders[l]);
                e[i][l] = ring.mul(c[i * r + l], ring.p.pow(sh));
            }
        }
        e
    }

    /// End_{R_mG}(M): the parameter lattice and log_p |End(M)|.
    pub fn endomorphisms(&self) -> (Howell, u32) {
        let ring = self.ring();
        let r = self.rank();
        let basis_rows: Vec<Vec<u64>> = self.basis.rows.clone();
        let mut rows = Vec::with_capacity(r * r);
        for i in 0..r {
            for l in 0..r {
                let mut c = vec![0u64; r * r];
                c[i * r + l] = 1;
                let e = self.endomorphism_matrix(&c);
                let te = mat_mul(&ring, &self.sigma, &e, r);
                let et = mat_mul(&ring, &e, &self.sigma, r);
                let diff: Vec<Vec<u64>> = te
                    .iter()
                    .zip(&et)
                    .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| ring.sub(x, y)).collect())
                    .collect();
                let constrained = mat_mul(&ring, &basis_rows, &diff, r);
                rows.push(constrained.concat());
            }
        }
        let ker = kernel(ring, &rows, r * r);
        let trivial: u32 = (0..r)
            .flat_map(|i| (0..r).map(move |l| (i, l)))
            .map(|(i, l)| ring.k - self.orders[i].min(self.orders[l]))
            .sum();
        let log = ker.log_order() - trivial;
        (ker, log)
    }

    fn endo_on_basis(&self, e: &[Vec<u64>]) -> Vec<Vec<u64>> {
        mat_mul(&self.ring(), &self.basis.rows, e, self.rank())
    }

    /// Endomorphism-ring oracle: M is indecomposable iff End(M) is local,
    /// i.e. every endomorphism acts on M/pM invertibly or nilpotently.
    pub fn brute_indecomposable(&self, guard_log2: f64) -> Indecomposability {
        let ring = self.ring();
        let r = self.rank();
        if r == 0 {
            return Indecomposability::Zero;
        }
        let (ker, log) = self.endomorphisms();
        let log2 = log as f64 * (ring.p as f64).log2();
        if log2 > guard_log2 {
            return Indecomposability::TooLarge { log2_end: log2 };
        }
        let p = ring.p;
        let trivial = Howell::new(
            ring,
            r * r,
            (0..r * r).map(|idx| {
                let (i, l) = (idx / r, idx % r);
                let mut v = vec![0; r * r];
                v[idx] = ring.ppow(self.orders[i].min(self.orders[l]));
                v
            }),
        );
        let mut modp = trivial.join(&Howell::new(
            ring,
            r * r,
            ker.rows
                .iter()
                .map(|g| g.iter().map(|&x| ring.mul(x, p % ring.q)).collect()),
        ));
        let mut gens = Vec::new();
        for g in &ker.rows {
            if !modp.contains(g) {
                modp = modp.join(&Howell::new(ring, r * r, vec![g.clone()]));
                gens.push(g.clone());
            }
        }
        let s = gens.len();
        let total = p.pow(s as u32);
        let reduce_modp = |c: &[u64]| -> Vec<Vec<u64>> {
            let mut a = vec![vec![0u64; r]; r];
            for i in 0..r {
                for l in 0..r {
                    let sh = self.orders[l].saturating_sub(self.orders[i]);
                    a[i][l] = if sh == 0 { c[i * r + l] % p } else { 0 };
                }
            }
            a
        };
        for idx in 1..total {
            let mut c = vec![0u64; r * r];
            let mut t = idx;
            for g in &gens {
                let digit = t % p;
                t /= p;
                if digit != 0 {
                    axpy(&ring, &mut c, digit, g);
                }
            }
            let a = reduce_modp(&c);
            let rk = rank_mod_p(&a, p);
            if rk == r || is_nilpotent_mod_p(&a, p) {
                continue;
            }
            let phi = self.endomorphism_matrix(&c);
            let e = self.idempotent_power(&phi);
            return Indecomposability::Decomposable(self.split_witness(e));
        }
        Indecomposability::Indecomposable { log_p_end: log }
    }

    /// Some power of φ that is idempotent (Fitting).
    fn idempotent_power(&self, phi: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let ring = self.ring();
        let r = self.rank();
        let mut seen: HashMap<Vec<Vec<u64>>, usize> = HashMap::new();
        let mut cur = phi.to_vec();
        let mut powers = vec![cur.clone()];
        let mut k = 1usize;
        loop {
            let key = self.endo_on_basis(&cur);
            if let Some(&a) = seen.get(&key) {
                let period = k - a;
                let target = period * a.div_ceil(period).max(1);
                return powers[target - 1].clone();
            }
            seen.insert(key, k);
            cur = mat_mul(&ring, &cur, phi, r);
            powers.push(cur.clone());
            k += 1;
        }
    }

    fn split_witness(&self, e: Vec<Vec<u64>>) -> SplitWitness {
        let ring = self.ring();
        let r = self.rank();
        let image = Howell::new(ring, r, self.endo_on_basis(&e));
        let id_minus: Vec<Vec<u64>> = (0..r)
            .map(|i| (0..r).map(|l| ring.sub((i == l) as u64, e[i][l])).collect())
            .collect();
        let coimage = Howell::new(ring, r, self.endo_on_basis(&id_minus));
        SplitWitness {
            idempotent: e,
            log_order_image: image.log_order(),
            log_order_complement: coimage.log_order(),
        }
    }

    /// Checks that e is a nontrivial σ-equivariant idempotent splitting M.
    pub fn verify_split(&self, w: &SplitWitness) -> bool {
        let ring = self.ring();
        let r = self.rank();
        let e = &w.idempotent;
        let ee = mat_mul(&ring, e, e, r);
        let on = |m: &Vec<Vec<u64>>| self.endo_on_basis(m);
        let commutes =
            on(&mat_mul(&ring, &self.sigma, e, r)) == on(&mat_mul(&ring, e, &self.sigma, r));
        let image = Howell::new(ring, r, on(e));
        let id_minus: Vec<Vec<u64>> = (0..r)
            .map(|i| (0..r).map(|l| ring.sub((i == l) as u64, e[i][l])).collect())
            .collect();
        let coimage = Howell::new(ring, r, on(&id_minus));
        on(&ee) == on(e)
            && commutes
            && !image.is_zero()
            && !coimage.is_zero()
            && self.direct_sum_certify(&[image, coimage])
    }
}

pub fn rank_mod_p(a: &[Vec<u64>], p: u64) -> usize {
    let f = Zpk::new(p, 1).unwrap();
    let h = Howell::new(f, a.first().map_or(0, |r| r.len()), a.to_vec());
    h.rows.len()
}

pub fn is_nilpotent_mod_p(a: &[Vec<u64>], p: u64) -> bool {
    let f = Zpk::new(p, 1).unwrap();
    let r = a.len();
    let mut m = a.to_vec();
    let mut k = 1;
    while k < r {
        m = mat_mul(&f, &m, &m, r);
        k *= 2;
    }
    m.iter().flatten().all(|&x| x == 0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitWitness {
    pub idempotent: Vec<Vec<u64>>,
    pub log_order_image: u32,
    pub log_order_complement: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Indecomposability {
    Zero,
    Indecomposable { log_p_end: u32 },
    Decomposable(SplitWitness),
    TooLarge { log2_end: f64 },
}

/// Default guard: |End(M)| ≤ 2^22.
pub const DEFAULT_END_GUARD_LOG2: f64 = 22.0;

/// A finitely presented R_mG_i-module: g generators, relation rows of
/// group-ring elements.
#[derive(Clone, Debug)]
pub struct ModulePresentation {
    pub params: RingParams,
    pub g: usize,
    pub relations: Vec<Vec<GroupRingElement>>,
    /// Howell basis of the unfolded relation span.
    pub relation_span: Howell,
    raw: RawModule,
}

impl ModulePresentation {
    pub fn new(
        params: RingParams,
        g: usize,
        relations: Vec<Vec<GroupRingElement>>,
    ) -> Result<Self> {
        let w = params.width();
        for row in &relations {
            if row.len() != g {
                return Err(Error::ParamMismatch("relation row length".into()));
            }
            if row.iter().any(|f| f.params != params) {
                return Err(Error::ParamMismatch("relation ring".into()));
            }
        }
        let ring = params.ring();
        let mut unfolded = Vec::new();
        for row in &relations {
            for s in 0..w {
                let v: Vec<u64> = row
                    .iter()
                    .flat_map(|f| f.apply_sigma_power(s as i64).coeffs)
                    .collect();
                unfolded.push(v);
            }
        }
        let n = g * w;
        let sigma_raw: Vec<Vec<u64>> = (0..n)
            .map(|idx| {
                let (b, t) = (idx / w, idx % w);
                let mut v = vec![0; n];
                v[b * w + (t + 1) % w] = 1;
                v
            })
            .collect();
        let relation_span = Howell::new(ring, n, unfolded.clone());
        let raw = FinModule::from_raw(params, n, &unfolded, &sigma_raw);
        Ok(ModulePresentation {
            params,
            g,
            relations,
            relation_span,
            raw,
        })
    }

    pub fn module(&self) -> &FinModule {
        &self.raw.module
    }

    /// log_p |M| = m·g·p^i − log_p |relation span|.
    pub fn log_order(&self) -> u32 {
        self.params.m * (self.g * self.params.width()) as u32 - self.relation_span.log_order()
    }

    /// The module element with the given group-ring coordinates.
    pub fn element(&self, coords: &[GroupRingElement]) -> Vec<u64> {
        let raw: Vec<u64> = coords
            .iter()
            .flat_map(|f| f.coeffs.iter().copied())
            .collect();
        self.raw.to_module(&raw)
    }

    pub fn generator(&self, k: usize) -> Vec<u64> {
        let mut coords = vec![GroupRingElement::zero(self.params); self.g];
        coords[k] = GroupRingElement::one(self.params);
        self.element(&coords)
    }

    /// Canonical reduced coordinates of a raw vector modulo the relations.
    pub fn reduce(&self, coords: &[GroupRingElement]) -> Vec<GroupRingElement> {
        let mut raw: Vec<u64> = coords
            .iter()
            .flat_map(|f| f.coeffs.iter().copied())
            .collect();
        self.relation_span.reduce(&mut raw);
        raw.chunks(self.params.width())
            .map(|c| GroupRingElement {
                params: self.params,
                coeffs: c.to_vec(),
            })
            .collect()
    }

    /// Counts |M| by closing {0} under adding generators, with elements
    /// identified through their reduced raw coordinates. Independent of the
    /// Smith bookkeeping; meant for small modules.
    pub fn brute_force_order(&self, cap: usize) -> Option<usize> {
        let ring = self.params.ring();
        let n = self.g * self.params.width();
        let mut seen = std::collections::HashSet::new();
        let zero = vec![0u64; n];
        seen.insert(zero.clone());
        let mut frontier = vec![zero];
        while let Some(x) = frontier.pop() {
            for idx in 0..n {
                let mut y = x.clone();
                y[idx] = ring.add(y[idx], 1);
                self.relation_span.reduce(&mut y);
                if seen.insert(y.clone()) {
                    if seen.len() > cap {
                        return None;
                    }
                    frontier.push(y);
                }
            }
        }
        Some(seen.len())
    }
}

/// ann_{R_mG_i}(x) for an element of R_mG_i, as a coefficient lattice.
pub fn annihilator_element(x: &GroupRingElement) -> Howell {
    let m = FinModule::group_ring(x.params);
    m.annihilator(&x.coeffs)
}

/// Lattice of the ideal generated by the given elements of R_mG_i.
pub fn ideal(params: RingParams, gens: &[GroupRingElement]) -> Howell {
    let m = FinModule::group_ring(params);
    let v: Vec<Vec<u64>> = gens.iter().map(|g| g.coeffs.clone()).collect();
    m.span(&v)
}

/// Every nonzero ideal contains p^{m−1}P(i,0): checked for the ideal ⟨f⟩.
pub fn ideal_floor_check(f: &GroupRingElement) -> bool {
    let params = f.params;
    let id = ideal(params, std::slice::from_ref(f));
    if id.is_zero() {
        return true;
    }
    let floor = p_operator(params, params.i, 0)
        .unwrap()
        .scale(params.p.pow(params.m - 1) as i64);
    id.contains(&floor.coeffs)
}

/// Generators of X_{a,d,m}: y first, then each x_i with a_i ≠ −∞.
#[derive(Clone, Debug)]
pub struct XModule {
    pub a: NormVector,
    pub d: i64,
    pub presentation: ModulePresentation,
    /// Indices i with a_i ≠ −∞, in generator order after y.
    pub x_indices: Vec<usize>,
}

impl XModule {
    pub fn y(&self) -> Vec<u64> {
        self.presentation.generator(0)
    }

    pub fn x(&self, i: usize) -> Option<Vec<u64>> {
        self.x_indices
            .iter()
            .position(|&j| j == i)
            .map(|k| self.presentation.generator(k + 1))
    }
}

pub fn construct_x(p: u64, n: u32, a: &NormVector, d: i64, m: u32) -> Result<XModule> {
    let params = RingParams::new(p, n, m, n)?;
    if !in_u(p, d, 1) {
        return Err(Error::Invalid(format!("twist {d} is not in U_1")));
    }
    if a.len() != m as usize {
        return Err(Error::ParamMismatch(format!(
            "vector length {} ≠ m = {m}",
            a.len()
        )));
    }
    a.validate(n)?;
    let x_indices: Vec<usize> = (0..a.len()).filter(|&i| a.0[i].is_some()).collect();
    let g = 1 + x_indices.len();
    let mut first = vec![GroupRingElement::sigma_minus(params, 1, d)];
    for &i in &x_indices {
        let c = -((p as i64).pow(i as u32));
        first.push(GroupRingElement::scalar(params, c));
    }
    let mut relations = vec![first];
    for (k, &i) in x_indices.iter().enumerate() {
        let mut row = vec![GroupRingElement::zero(params); g];
        let ai = a.0[i].unwrap();
        row[k + 1] = GroupRingElement::sigma_minus(params, p.pow(ai) as i64, 1);
        relations.push(row);
    }
    Ok(XModule {
        a: a.clone(),
        d,
        presentation: ModulePresentation::new(params, g, relations)?,
        x_indices,
    })
}

/// Per-condition evaluation of conditions I–V for X_{a,d,m}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndecompConditions {
    pub i: bool,
    pub ii: bool,
    pub iii: bool,
    pub iv: bool,
    pub v: bool,
}

impl IndecompConditions {
    pub fn all(&self) -> bool {
        self.i && self.ii && self.iii && self.iv && self.v
    }
}

pub fn indecomp_conditions(p: u64, n: u32, a: &NormVector, d: i64, m: u32) -> IndecompConditions {
    let m = m as usize;
    let ent = |i: usize| a.0.get(i).copied().flatten();
    let c1 = in_u(p, d, 1);
    let c2 = (0..m).all(|i| match ent(i) {
        None => true,
        Some(ai) => {
            let r = Zpk::new(p, i as u32 + 1).unwrap();
            r.pow(r.from_i64(d), p.pow(ai)) == 1 % r.q
        }
    });
    let c3 = !(p == 2 && n == 1) || ent(0).is_none();
    let exception = p == 2 && !in_u(p, d, 2) && ent(0) == Some(0);
    let mut c4 = true;
    for i in 0..m {
        for j in 1..m - i {
            if exception && i == 0 {
                continue;
            }
            if let Some(aij) = ent(i + j) {
                if let Some(ai) = ent(i) {
                    if ai as usize + j >= aij as usize {
                        c4 = false;
                    }
                }
            }
        }
    }
    if exception && (1..m).any(|j| ent(j) == Some(0)) {
        c4 = false;
    }
    let mut c5 = true;
    if p == 2 && m >= 2 && ent(0) == Some(0) && in_minus_u(2, d, 2) {
        let mut v = 2;
        while v < 64 && in_minus_u(2, d, v + 1) {
            v += 1;
        }
        for i in v as usize..m {
            if let Some(ai) = ent(i) {
                if (ai as i64) <= i as i64 - (v as i64 - 1) {
                    c5 = false;
                }
            }
        }
    }
    IndecompConditions {
        i: c1,
        ii: c2,
        iii: c3,
        iv: c4,
        v: c5,
    }
}

/// Certifies M ≅ X_{a,d,m} through y ↦ y', x_i ↦ x'_i: the relations of X
/// hold in M, the images generate S = ⟨images⟩, and |S| = |X_{a,d,m}|.
/// `x_images` is indexed like `XModule::x_indices`.
pub fn iso_to_x(
    module: &FinModule,
    y: &[u64],
    x_images: &[Vec<u64>],
    a: &NormVector,
    d: i64,
    m: u32,
) -> Result<IsoCertificate> {
    let p = module.params.p;
    let n = module.params.n;
    let x = construct_x(p, n, a, d, m)?;
    if x_images.len() != x.x_indices.len() {
        return Err(Error::ParamMismatch("number of x-images".into()));
    }
    let params = module.params;
    let mut lhs = module.act(&GroupRingElement::sigma_minus(params, 1, d), y);
    for (img, &i) in x_images.iter().zip(&x.x_indices) {
        let t = module.scale(-(p as i64).pow(i as u32), img);
        lhs = module.add(&lhs, &t);
    }
    let main_relation = lhs.iter().all(|&c| c == 0);
    let fixed = x_images.iter().zip(&x.x_indices).all(|(img, &i)| {
        let ai = a.0[i].unwrap();
        module.sigma_pow(img, p.pow(ai) as usize) == *img
    });
    let mut gens = vec![y.to_vec()];
    gens.extend(x_images.iter().cloned());
    let span = module.span(&gens);
    let log_x = x.presentation.log_order();
    Ok(IsoCertificate {
        relations_hold: main_relation && fixed,
        log_order_image: span.log_order(),
        log_order_x: log_x,
        generates_module: span.log_order() == module.log_order(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoCertificate {
    pub relations_hold: bool,
    pub log_order_image: u32,
    pub log_order_x: u32,
    pub generates_module: bool,
}

impl IsoCertificate {
    /// The images span a submodule isomorphic to X_{a,d,m}.
    pub fn holds(&self) -> bool {
        self.relations_hold && self.log_order_image == self.log_order_x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64, n: u32, m: u32, i: u32) -> RingParams {
        RingParams::new(p, n, m, i).unwrap()
    }

    #[test]
    fn spec_annihilator_examples() {
        let r = pr(2, 1, 2, 1);
        let x = GroupRingElement::from_i64(r, &[-2, 2]);
        let ann = annihilator_element(&x);
        assert_eq!(ann.log_order(), 3);
        let expected = ideal(
            r,
            &[p_operator(r, 1, 0).unwrap(), GroupRingElement::scalar(r, 2)],
        );
        assert_eq!(ann, expected);
        let ann0 = annihilator_element(&GroupRingElement::zero(r));
        assert_eq!(ann0.log_order(), 4);
    }

    #[test]
    fn spec_star_examples() {
        let r = pr(2, 1, 2, 1);
        let m = FinModule::group_ring(r);
        let s = m.star();
        assert_eq!(s.log_order(), 1);
        assert!(s.contains(&[2, 2]));
        assert!(FinModule::zero_module(r).star().is_zero());
        let z = GroupRingElement::from_i64(r, &[-2, 2]);
        let a = ideal(r, &[GroupRingElement::scalar(r, 2)]);
        let b = ideal(r, &[GroupRingElement::sigma_minus(r, 1, 1)]);
        assert!(!m.direct_sum_certify(&[a.clone(), b.clone()]));
        assert!(!m.stars_meet_trivially(&a, &b));
        assert!(!m.direct_sum_certify(&[a.clone(), a]));
        let _ = z;
    }

    #[test]
    fn spec_free_cyclic_examples() {
        let r = pr(3, 1, 2, 1);
        let m = FinModule::group_ring(r);
        assert!(m.is_free_cyclic(&[1, 0, 0], 1).unwrap());
        let s = GroupRingElement::sigma_minus(r, 1, 1);
        assert!(!m.is_free_cyclic(&s.coeffs, 1).unwrap());
        assert!(!m.is_free_cyclic(&[3, 0, 0], 1).unwrap());
        assert!(m.is_free_cyclic(&[1, 0, 0], 0).is_err());
    }

    #[test]
    fn spec_construct_x_examples() {
        let x = construct_x(2, 1, &NormVector(vec![None]), 1, 1).unwrap();
        assert_eq!(x.presentation.log_order(), 1);
        assert_eq!(x.presentation.brute_force_order(1 << 16), Some(2));
        for (p, n) in [(2u64, 1u32), (3, 1), (2, 2), (3, 2)] {
            let x = construct_x(p, n, &NormVector(vec![Some(n - 1)]), 1, 1).unwrap();
            assert_eq!(x.presentation.log_order(), p.pow(n - 1) as u32 + 1);
        }
        assert!(construct_x(3, 1, &NormVector(vec![None]), 2, 1).is_err());
    }

    #[test]
    fn spec_conditions_examples() {
        let v: NormVector = "0,1".parse().unwrap();
        assert!(!indecomp_conditions(3, 2, &v, 1, 2).iv);
        let v: NormVector = "0,2".parse().unwrap();
        assert!(indecomp_conditions(3, 2, &v, 1, 2).all());
        let v = NormVector::minus_infinity(3);
        assert!(indecomp_conditions(2, 2, &v, 5, 3).all());
    }

    #[test]
    fn spec_oracle_examples() {
        let r = pr(3, 1, 1, 1);
        let fp = FinModule::new(r, vec![1], vec![vec![1]]);
        assert!(matches!(
            fp.brute_indecomposable(DEFAULT_END_GUARD_LOG2),
            Indecomposability::Indecomposable { .. }
        ));
        let fp2 = FinModule::new(r, vec![1, 1], vec![vec![1, 0], vec![0, 1]]);
        match fp2.brute_indecomposable(DEFAULT_END_GUARD_LOG2) {
            Indecomposability::Decomposable(w) => assert!(fp2.verify_split(&w)),
            other => panic!("{other:?}"),
        }
        let x = construct_x(3, 1, &NormVector(vec![None]), 4, 1).unwrap();
        assert!(matches!(
            x.presentation.module().brute_indecomposable(22.0),
            Indecomposability::Indecomposable { .. }
        ));
    }

    #[test]
    fn spec_iso_examples() {
        let a = NormVector(vec![None, None]);
        let x = construct_x(3, 1, &a, 4, 2).unwrap();
        let m = x.presentation.module();
        let cert = iso_to_x(m, &x.y(), &[], &a, 4, 2).unwrap();
        assert!(cert.holds() && cert.generates_module);
        let y2 = m.scale(2, &x.y());
        assert!(iso_to_x(m, &y2, &[], &a, 4, 2).unwrap().holds());
        let r = pr(3, 1, 2, 1);
        let free = FinModule::group_ring(r);
        let cert = iso_to_x(&free, &[1, 0, 0], &[], &a, 1, 2).unwrap();
        assert!(!cert.holds());
    }
}
