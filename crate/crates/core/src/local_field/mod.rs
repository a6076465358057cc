//! Cyclic towers F = K_0 ⊂ K_1 ⊂ … ⊂ K_n = K of p-adic fields with
//! [K_i : F] = p^i, computed in a truncated model O_K = Z_p[X]/(g) mod p^R.
//!
//! Elements of K^× are stored as π^v·u with u a unit of O_K known modulo
//! p^prec. Every subfield K_i comes with an adapted Z_p-basis
//! {ω_j π_i^k} of O_{K_i}, which is what the unit filtration of K_i is
//! peeled against when computing discrete logarithms in J_m(K_i).

mod kummer;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_ring::is_prime;
use crate::linalg::{axpy, Zpk};

pub use kummer::KummerModule;

/// Coefficients in the power basis 1, X, …, X^{D−1} of O_K.
pub type Elem = Vec<u64>;

/// The supported field families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FieldSpec {
    /// F = Q_p and K the unramified extension of degree p^n.
    Unramified { p: u64, n: u32 },
    /// F = Q_p(ξ_p) and K = Q_p(ξ_{p^{n+1}}).
    Cyclotomic { p: u64, n: u32 },
    /// F = Q_2 and K = Q_2(√a).
    Quadratic2 { a: i64 },
}

impl FieldSpec {
    pub fn p(&self) -> u64 {
        match *self {
            FieldSpec::Unramified { p, .. } | FieldSpec::Cyclotomic { p, .. } => p,
            FieldSpec::Quadratic2 { .. } => 2,
        }
    }

    pub fn n(&self) -> u32 {
        match *self {
            FieldSpec::Unramified { n, .. } | FieldSpec::Cyclotomic { n, .. } => n,
            FieldSpec::Quadratic2 { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        match *self {
            FieldSpec::Unramified { n, .. } => {
                if n == 0 {
                    return Err(Error::Invalid("n must be at least 1".into()));
                }
                let f = p.checked_pow(n).filter(|&f| f <= 32);
                if f.is_none() {
                    return Err(Error::Invalid(format!(
                        "unramified degree {p}^{n} is beyond the supported range (≤ 32)"
                    )));
                }
            }
            FieldSpec::Cyclotomic { n, .. } => {
                if n == 0 {
                    return Err(Error::Invalid("n must be at least 1".into()));
                }
                if p == 2 && n > 1 {
                    return Err(Error::Invalid(
                        "Q_2(ξ_{2^{n+1}})/Q_2 is not cyclic for n ≥ 2".into(),
                    ));
                }
                let d = p.checked_pow(n).map(|q| q * (p - 1)).filter(|&d| d <= 60);
                if d.is_none() {
                    return Err(Error::Invalid(format!(
                        "cyclotomic degree (p−1)p^n = {}·{p}^{n} is beyond the supported range (≤ 60)",
                        p - 1
                    )));
                }
            }
            FieldSpec::Quadratic2 { a } => {
                square_class(a)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Unramified { p, n } => write!(f, "unramified p={p} n={n}"),
            FieldSpec::Cyclotomic { p, n } => write!(f, "cyclotomic p={p} n={n}"),
            FieldSpec::Quadratic2 { a } => write!(f, "quadratic2 a={a}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let family = words
            .next()
            .ok_or_else(|| Error::Invalid("empty field spec".into()))?
            .to_ascii_lowercase();
        let mut kv = HashMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("expected key=value, got `{w}`")))?;
            let v: i64 = v
                .parse()
                .map_err(|_| Error::Invalid(format!("`{v}` is not an integer")))?;
            if kv.insert(k.to_ascii_lowercase(), v).is_some() {
                return Err(Error::Invalid(format!("repeated key `{k}`")));
            }
        }
        let mut take = |key: &str| {
            kv.remove(key)
                .ok_or_else(|| Error::Invalid(format!("missing `{key}=` in field spec")))
        };
        let nonneg = |v: i64, key: &str| {
            u32::try_from(v).map_err(|_| Error::Invalid(format!("{key} must be non-negative")))
        };
        let spec = match family.as_str() {
            "unramified" => FieldSpec::Unramified {
                p: nonneg(take("p")?, "p")? as u64,
                n: nonneg(take("n")?, "n")?,
            },
            "cyclotomic" => FieldSpec::Cyclotomic {
                p: nonneg(take("p")?, "p")? as u64,
                n: nonneg(take("n")?, "n")?,
            },
            "quadratic2" => FieldSpec::Quadratic2 { a: take("a")? },
            other => return Err(Error::Invalid(format!("unknown field family `{other}`"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::Invalid(format!("unexpected key `{k}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Representative of the class of a in Q_2^×/Q_2^{×2}, from
/// {−1, ±2, ±5, ±10}. Squares are rejected.
pub fn square_class(a: i64) -> Result<i64> {
    if a == 0 {
        return Err(Error::Invalid("a must be nonzero".into()));
    }
    let v = a.trailing_zeros();
    let u = (a >> v).rem_euclid(8);
    let rep = match (v % 2, u) {
        (0, 1) => {
            return Err(Error::Invalid(format!("{a} is a square in Q_2")));
        }
        (0, 3) => -5,
        (0, 5) => 5,
        (0, 7) => -1,
        (1, 1) => 2,
        (1, 3) => -10,
        (1, 5) => 10,
        _ => -2,
    };
    Ok(rep)
}

/// Arithmetic in Z/p^R[X]/(g) for monic g of degree D.
#[derive(Clone, Debug)]
pub struct OkRing {
    pub zp: Zpk,
    pub d: usize,
    /// X^{D+k} reduced, for 0 ≤ k ≤ D−2 (and X^D when D = 1).
    red: Vec<Elem>,
}

impl OkRing {
    /// `g` lists g_0..g_{D−1}; the leading coefficient is 1.
    pub fn new(zp: Zpk, g: &[u64]) -> Self {
        let d = g.len();
        let mut red = Vec::new();
        let mut cur: Elem = g.iter().map(|&c| zp.neg(c % zp.q)).collect();
        for _ in 0..d.saturating_sub(1).max(1) {
            red.push(cur.clone());
            let top = cur[d - 1];
            let mut next = vec![0; d];
            next[1..d].copy_from_slice(&cur[..d - 1]);
            for (x, r) in next.iter_mut().zip(&red[0]) {
                *x = zp.add(*x, zp.mul(top, *r));
            }
            cur = next;
        }
        OkRing { zp, d, red }
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.d]
    }

    pub fn scalar(&self, c: u64) -> Elem {
        let mut v = self.zero();
        v[0] = c % self.zp.q;
        v
    }

    pub fn from_i64(&self, c: i64) -> Elem {
        self.scalar(self.zp.from_i64(c))
    }

    pub fn one(&self) -> Elem {
        self.scalar(1)
    }

    /// The class of X.
    pub fn x(&self) -> Elem {
        if self.d == 1 {
            return self.red[0].clone();
        }
        let mut v = self.zero();
        v[1] = 1;
        v
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(&x, &y)| self.zp.add(x, y)).collect()
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(&x, &y)| self.zp.sub(x, y)).collect()
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        a.iter().map(|&x| self.zp.neg(x)).collect()
    }

    pub fn smul(&self, c: u64, a: &Elem) -> Elem {
        a.iter().map(|&x| self.zp.mul(c, x)).collect()
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let d = self.d;
        let zp = &self.zp;
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    prod[i + j] = zp.add(prod[i + j], zp.mul(x, y));
                }
            }
        }
        let mut out = prod[..d].to_vec();
        for (k, &c) in prod[d..].iter().enumerate() {
            if c != 0 {
                for (o, &r) in out.iter_mut().zip(&self.red[k]) {
                    *o = zp.add(*o, zp.mul(c, r));
                }
            }
        }
        out
    }

    pub fn pow(&self, a: &Elem, mut e: u128) -> Elem {
        let mut r = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    /// Whether a ≡ 0 mod p^prec.
    pub fn is_zero_mod(&self, a: &Elem, prec: u32) -> bool {
        let m = if prec >= self.zp.k {
            self.zp.q
        } else {
            self.zp.p.pow(prec)
        };
        a.iter().all(|&c| c % m == 0)
    }

    pub fn eq_mod(&self, a: &Elem, b: &Elem, prec: u32) -> bool {
        self.is_zero_mod(&self.sub(a, b), prec)
    }

    /// Evaluates the polynomial Σ c_k Y^k at y.
    pub fn eval_poly(&self, coeffs: &[u64], y: &Elem) -> Elem {
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, y);
            acc[0] = self.zp.add(acc[0], c % self.zp.q);
        }
        acc
    }
}

/// An element π^val·unit of K^×; `unit` is meaningful modulo p^prec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldElem {
    pub val: i64,
    pub unit: Elem,
    pub prec: u32,
}

/// One subfield K_i of the tower together with an adapted basis of its
/// ring of integers.
#[derive(Clone, Debug)]
pub struct Level {
    pub i: u32,
    pub e: u32,
    pub f: u32,
    /// Size p^f of the residue field.
    pub q: u64,
    /// e_K / e_{K_i}.
    pub ram: u32,
    /// Uniformizer π_i as an element of O_K.
    pub pi: Elem,
    /// π_i / π_K^{ram}, a unit of O_K, and its inverse.
    pub rho: Elem,
    pub rho_inv: Elem,
    /// ω_j for j < f, lifting an F_p-basis of the residue field.
    pub omegas: Vec<Elem>,
    /// π_i^k for k ≤ e.
    pub pi_pows: Vec<Elem>,
    /// ω_j π_i^k at index j·e + k.
    pub basis: Vec<Elem>,
    solver: UnitSolver,
}

impl Level {
    pub fn degree(&self) -> u32 {
        self.e * self.f
    }

    /// Coordinates of x ∈ O_{K_i} in the adapted basis.
    pub fn coords(&self, x: &Elem) -> Vec<u64> {
        self.solver.coords(x)
    }
}

/// A primitive p^ν-th root of unity, with ν maximal.
#[derive(Clone, Debug)]
pub struct RootsOfUnity {
    pub nu: u32,
    /// Whether ν reached the search cap.
    pub capped: bool,
    pub xi_p: Option<FieldElem>,
    pub xi_top: Option<FieldElem>,
}

/// F = K_0 ⊂ … ⊂ K_n = K with a generator σ of Gal(K/F).
#[derive(Debug)]
pub struct Tower {
    pub spec: FieldSpec,
    pub p: u64,
    pub n: u32,
    pub e: u32,
    pub f: u32,
    /// Working precision R: the model is O_K mod p^R.
    pub prec: u32,
    pub ring: OkRing,
    /// Coefficients g_0..g_{D−1} of the monic defining polynomial.
    pub defining_poly: Vec<u64>,
    sigma_rows: Vec<Elem>,
    pi: Elem,
    /// ε^{−1} where π^e = p·ε (ramified case); 1 otherwise.
    eps_inv: Elem,
    sigma_ratio: Elem,
    sigma_ratio_inv: Elem,
    pub levels: Vec<Level>,
    pub roots: RootsOfUnity,
    roots_ready: bool,
    cache: Mutex<HashMap<KummerKey, Arc<KummerModule>>>,
}

type KummerKey = (u32, u32, u32, bool);

/// Largest usable exponent R with p^R < 2^62.
pub fn max_prec(p: u64) -> u32 {
    let mut r = 0;
    let mut q: u64 = 1;
    while let Some(nq) = q.checked_mul(p).filter(|&x| x < 1 << 62) {
        q = nq;
        r += 1;
    }
    r
}

/// Smallest working precision, in p-adic digits, for the computations at
/// depth m: Kummer quotients of every level, p^m-th roots, and roots of
/// unity up to the search cap.
pub fn min_prec(spec: &FieldSpec, m: u32) -> u32 {
    m + spec.n() + 8
}

/// Default working precision for depth m with `guard` extra digits.
pub fn default_prec(spec: &FieldSpec, m: u32, guard: u32) -> u32 {
    min_prec(spec, m) + m + guard
}

impl Tower {
    /// Builds the tower at depth m with `guard` extra p-adic digits.
    pub fn build(spec: FieldSpec, m: u32, guard: u32) -> Result<Tower> {
        spec.validate()?;
        let want = default_prec(&spec, m, guard);
        let cap = max_prec(spec.p());
        if min_prec(&spec, m) > cap {
            return Err(Error::Precision(format!(
                "depth m={m} needs {} digits of {}-adic precision; at most {cap} fit in 62 bits",
                min_prec(&spec, m),
                spec.p()
            )));
        }
        Tower::with_prec(spec, want.min(cap))
    }

    /// Builds the tower with an explicit number R of p-adic digits.
    pub fn with_prec(spec: FieldSpec, prec: u32) -> Result<Tower> {
        spec.validate()?;
        let p = spec.p();
        if prec < 6 {
            return Err(Error::Precision(format!(
                "precision {prec} is below the minimum of 6 digits"
            )));
        }
        if prec > max_prec(p) {
            return Err(Error::Precision(format!(
                "{p}^{prec} does not fit in 62 bits"
            )));
        }
        let zp = Zpk::new(p, prec)?;
        let model = match spec {
            FieldSpec::Unramified { p, n } => unramified_model(zp, p, n)?,
            FieldSpec::Cyclotomic { p, n } => cyclotomic_model(zp, p, n),
            FieldSpec::Quadratic2 { a } => quadratic_model(zp, square_class(a)?),
        };
        let Model {
            g,
            e,
            f,
            sigma_x,
            ring,
        } = model;
        let d = ring.d;
        let sigma_rows: Vec<Elem> = (0..d).map(|k| ring.pow(&sigma_x, k as u128)).collect();
        let (pi, eps_inv) = if e > 1 {
            let eps: Elem = g.iter().map(|&c| ring.zp.neg(c) / p).collect();
            let eps_inv = inv_unit_raw(&ring, &eps, f);
            (ring.x(), eps_inv)
        } else {
            (ring.scalar(p), ring.one())
        };
        let mut tower = Tower {
            spec,
            p,
            n: spec.n(),
            e,
            f,
            prec,
            ring,
            defining_poly: g,
            sigma_rows,
            pi,
            eps_inv,
            sigma_ratio: Vec::new(),
            sigma_ratio_inv: Vec::new(),
            levels: Vec::new(),
            roots: RootsOfUnity {
                nu: 0,
                capped: false,
                xi_p: None,
                xi_top: None,
            },
            roots_ready: false,
            cache: Mutex::new(HashMap::new()),
        };
        if e > 1 {
            let spi = tower.sigma_int(&tower.pi);
            let fe = tower
                .from_integral(&spi, prec)
                .ok_or_else(|| Error::Verification("σ(π) vanished".into()))?;
            if fe.val != 1 {
                return Err(Error::Verification("v(σπ) ≠ v(π)".into()));
            }
            tower.sigma_ratio_inv = tower.inv_unit(&fe.unit);
            tower.sigma_ratio = fe.unit;
        } else {
            tower.sigma_ratio = tower.ring.one();
            tower.sigma_ratio_inv = tower.ring.one();
        }
        tower.levels = (0..=tower.n)
            .map(|i| tower.make_level(i))
            .collect::<Result<_>>()?;
        tower.check_sigma_order()?;
        tower.roots = tower.compute_roots(tower.n + 8)?;
        tower.roots_ready = true;
        tower.kummer(tower.n, 1)?;
        Ok(tower)
    }

    /// The same field at precision R + extra.
    pub fn refined(&self, extra: u32) -> Result<Tower> {
        Tower::with_prec(self.spec, self.prec + extra)
    }

    pub fn degree(&self) -> usize {
        self.ring.d
    }

    pub fn nu(&self) -> u32 {
        self.roots.nu
    }

    pub fn level(&self, i: u32) -> &Level {
        &self.levels[i as usize]
    }

    fn check_sigma_order(&self) -> Result<()> {
        let x = self.ring.x();
        let y = self.sigma_int_pow(&x, self.p.pow(self.n));
        if !self.ring.eq_mod(&x, &y, self.prec) {
            return Err(Error::Verification("σ^{p^n} ≠ id on X".into()));
        }
        if self.n >= 1 {
            let z = self.sigma_int_pow(&x, self.p.pow(self.n - 1));
            if self.ring.eq_mod(&x, &z, self.prec) {
                return Err(Error::Verification("σ has order < p^n".into()));
            }
        }
        Ok(())
    }

    fn make_level(&self, i: u32) -> Result<Level> {
        let p = self.p;
        let ring = &self.ring;
        let n = self.n;
        let (e, f, pi, omegas): (u32, u32, Elem, Vec<Elem>) = if i == n {
            let omegas = (0..self.f as usize)
                .map(|j| ring.pow(&ring.x(), j as u128))
                .collect();
            (self.e, self.f, self.pi.clone(), omegas)
        } else {
            match self.spec {
                FieldSpec::Unramified { .. } => {
                    let q = p.pow(self.f);
                    let fi = p.pow(i) as u32;
                    let qi = p.pow(fi);
                    let zeta = self.teichmuller(&ring.x());
                    let zi = ring.pow(&zeta, ((q - 1) / (qi - 1)) as u128);
                    let omegas = (0..fi as usize).map(|j| ring.pow(&zi, j as u128)).collect();
                    (1, fi, ring.scalar(p), omegas)
                }
                FieldSpec::Cyclotomic { .. } => {
                    let xi = ring.add(&ring.x(), &ring.one());
                    let pi = ring.sub(&ring.pow(&xi, p.pow(n - i) as u128), &ring.one());
                    (((p - 1) * p.pow(i)) as u32, 1, pi, vec![ring.one()])
                }
                FieldSpec::Quadratic2 { .. } => (1, 1, ring.scalar(2), vec![ring.one()]),
            }
        };
        let ram = self.e / e;
        let mut pi_pows = vec![ring.one()];
        for _ in 0..e {
            let last = pi_pows.last().unwrap();
            pi_pows.push(ring.mul(last, &pi));
        }
        let mut basis = Vec::new();
        for w in &omegas {
            for pk in &pi_pows[..e as usize] {
                basis.push(ring.mul(w, pk));
            }
        }
        let solver = UnitSolver::new(ring.zp, &basis).ok_or_else(|| {
            Error::Verification(format!(
                "level {i} basis is not a basis of a direct summand"
            ))
        })?;
        let fe = self
            .from_integral(&pi, self.prec)
            .ok_or_else(|| Error::Verification("uniformizer vanished".into()))?;
        if fe.val != ram as i64 {
            return Err(Error::Verification(format!(
                "level {i}: v_K(π_i) = {} ≠ {ram}",
                fe.val
            )));
        }
        let rho_inv = self.inv_unit(&fe.unit);
        Ok(Level {
            i,
            e,
            f,
            q: p.pow(f),
            ram,
            pi,
            rho: fe.unit,
            rho_inv,
            omegas,
            pi_pows,
            basis,
            solver,
        })
    }

    /// Teichmüller representative of x: lim x^{q^k}.
    pub fn teichmuller(&self, x: &Elem) -> Elem {
        let q = self.p.pow(self.f) as u128;
        let mut y = x.clone();
        for _ in 0..self.prec {
            y = self.ring.pow(&y, q);
        }
        y
    }

    // ---- integral arithmetic -------------------------------------------

    pub fn sigma_int(&self, x: &Elem) -> Elem {
        let zp = &self.ring.zp;
        let mut out = self.ring.zero();
        for (c, row) in x.iter().zip(&self.sigma_rows) {
            if *c != 0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o = zp.add(*o, zp.mul(*c, *r));
                }
            }
        }
        out
    }

    pub fn sigma_int_pow(&self, x: &Elem, t: u64) -> Elem {
        let mut y = x.clone();
        for _ in 0..t % self.p.pow(self.n) {
            y = self.sigma_int(&y);
        }
        y
    }

    /// π_K-adic valuation of x given modulo p^prec, or None if x ≡ 0.
    pub fn val_int(&self, x: &Elem, prec: u32) -> Option<u32> {
        let zp = &self.ring.zp;
        let modp = if prec >= zp.k { zp.q } else { zp.p.pow(prec) };
        let e = self.e;
        x.iter()
            .enumerate()
            .filter(|(_, &c)| c % modp != 0)
            .map(|(idx, &c)| e * zp.val(c % modp) + (idx as u32 % e))
            .min()
    }

    fn div_p_pow(&self, x: &Elem, s: u32) -> Elem {
        let ps = self.p.pow(s);
        x.iter().map(|&c| c / ps).collect()
    }

    /// Writes x = π^v·u with u a unit, x known modulo p^prec.
    pub fn from_integral(&self, x: &Elem, prec: u32) -> Option<FieldElem> {
        let prec = prec.min(self.prec);
        let v = self.val_int(x, prec)?;
        let (s, k) = (v / self.e, v % self.e);
        let ring = &self.ring;
        let y = self.div_p_pow(x, s);
        let (unit, lost) = if k == 0 {
            let unit = if s == 0 || self.e == 1 {
                y
            } else {
                ring.mul(&y, &ring.pow(&self.eps_inv, s as u128))
            };
            (unit, s)
        } else {
            let t = ring.mul(&y, &ring.pow(&ring.x(), (self.e - k) as u128));
            let t = self.div_p_pow(&t, 1);
            (
                ring.mul(&t, &ring.pow(&self.eps_inv, (s + 1) as u128)),
                s + 1,
            )
        };
        Some(FieldElem {
            val: v as i64,
            unit,
            prec: prec - lost.min(prec),
        })
    }

    /// The integral element π^val·u, for val ≥ 0, with its precision.
    pub fn to_integral(&self, a: &FieldElem) -> Option<(Elem, u32)> {
        if a.val < 0 {
            return None;
        }
        let v = a.val as u32;
        let ring = &self.ring;
        let x = if self.e > 1 {
            ring.mul(&a.unit, &ring.pow(&ring.x(), v as u128))
        } else {
            ring.smul(self.ring.zp.ppow(v), &a.unit)
        };
        Some((x, (a.prec + v / self.e).min(self.prec)))
    }

    /// Inverse of a unit of O_K, at full working precision.
    pub fn inv_unit(&self, u: &Elem) -> Elem {
        inv_unit_raw(&self.ring, u, self.f)
    }

    // ---- field elements ------------------------------------------------

    pub fn one(&self) -> FieldElem {
        FieldElem {
            val: 0,
            unit: self.ring.one(),
            prec: self.prec,
        }
    }

    pub fn from_i64(&self, a: i64) -> Result<FieldElem> {
        self.from_integral(&self.ring.from_i64(a), self.prec)
            .ok_or_else(|| Error::Invalid(format!("{a} vanishes at working precision")))
    }

    /// The element X of the defining model.
    pub fn generator(&self) -> FieldElem {
        self.from_integral(&self.ring.x(), self.prec)
            .expect("X is nonzero")
    }

    /// π_K.
    pub fn uniformizer(&self) -> FieldElem {
        FieldElem {
            val: 1,
            unit: self.ring.one(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem {
            val: a.val + b.val,
            unit: self.ring.mul(&a.unit, &b.unit),
            prec: a.prec.min(b.prec),
        }
    }

    pub fn inv(&self, a: &FieldElem) -> FieldElem {
        FieldElem {
            val: -a.val,
            unit: self.inv_unit(&a.unit),
            prec: a.prec,
        }
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.mul(a, &self.inv(b))
    }

    pub fn pow(&self, a: &FieldElem, k: i64) -> FieldElem {
        let base = if k < 0 { self.inv(a) } else { a.clone() };
        FieldElem {
            val: a.val * k,
            unit: self.ring.pow(&base.unit, k.unsigned_abs() as u128),
            prec: a.prec,
        }
    }

    /// Product of a^{k} over the given pairs.
    pub fn product<'a, I>(&self, items: I) -> FieldElem
    where
        I: IntoIterator<Item = (&'a FieldElem, i64)>,
    {
        items
            .into_iter()
            .filter(|(_, k)| *k != 0)
            .fold(self.one(), |acc, (x, k)| self.mul(&acc, &self.pow(x, k)))
    }

    /// Equality up to the smaller precision.
    pub fn approx_eq(&self, a: &FieldElem, b: &FieldElem) -> bool {
        a.val == b.val && self.ring.eq_mod(&a.unit, &b.unit, a.prec.min(b.prec))
    }

    pub fn is_one(&self, a: &FieldElem) -> bool {
        self.approx_eq(a, &self.one())
    }

    /// a + b, or None when the sum vanishes at the available precision.
    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
        let v0 = a.val.min(b.val);
        let shift = |x: &FieldElem| {
            self.to_integral(&FieldElem {
                val: x.val - v0,
                ..x.clone()
            })
            .expect("non-negative shift")
        };
        let (xa, pa) = shift(a);
        let (xb, pb) = shift(b);
        let mut s = self.from_integral(&self.ring.add(&xa, &xb), pa.min(pb))?;
        s.val += v0;
        Some(s)
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem {
            val: a.val,
            unit: self.ring.neg(&a.unit),
            prec: a.prec,
        }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
        self.add(a, &self.neg(b))
    }

    pub fn sigma(&self, a: &FieldElem) -> FieldElem {
        let ring = &self.ring;
        let r = if a.val >= 0 {
            &self.sigma_ratio
        } else {
            &self.sigma_ratio_inv
        };
        let rv = ring.pow(r, a.val.unsigned_abs() as u128);
        FieldElem {
            val: a.val,
            unit: ring.mul(&self.sigma_int(&a.unit), &rv),
            prec: a.prec.min(self.prec - 1),
        }
    }

    pub fn sigma_pow(&self, a: &FieldElem, t: u64) -> FieldElem {
        let mut y = a.clone();
        for _ in 0..t % self.p.pow(self.n) {
            y = self.sigma(&y);
        }
        y
    }

    /// σ^t(a) / a^d, the multiplicative reading of (σ^t − d)a.
    pub fn sigma_minus(&self, a: &FieldElem, t: u64, d: i64) -> FieldElem {
        self.div(&self.sigma_pow(a, t), &self.pow(a, d))
    }

    /// Whether a lies in K_i, tested by σ^{p^i}-fixedness.
    pub fn in_level(&self, a: &FieldElem, i: u32) -> bool {
        i >= self.n || self.approx_eq(&self.sigma_pow(a, self.p.pow(i)), a)
    }

    /// N_{K_i/K_j}(a) for a ∈ K_i.
    pub fn norm(&self, a: &FieldElem, i: u32, j: u32) -> Result<FieldElem> {
        if j > i || i > self.n {
            return Err(Error::Invalid(format!("norm from level {i} to {j}")));
        }
        if !self.in_level(a, i) {
            return Err(Error::Invalid(format!("element is not in K_{i}")));
        }
        let step = self.p.pow(j);
        let mut acc = self.one();
        let mut conj = a.clone();
        for k in 0..self.p.pow(i - j) {
            if k > 0 {
                conj = self.sigma_pow(&conj, step);
            }
            acc = self.mul(&acc, &conj);
        }
        Ok(acc)
    }

    /// N_{K/F}.
    pub fn norm_to_base(&self, a: &FieldElem) -> Result<FieldElem> {
        self.norm(a, self.n, 0)
    }

    /// √a for the square-class representative a of a Quadratic2 spec.
    pub fn quadratic_root(&self) -> Option<FieldElem> {
        let FieldSpec::Quadratic2 { a } = self.spec else {
            return None;
        };
        let ring = &self.ring;
        let x = ring.x();
        let root = match square_class(a).ok()? {
            -1 | -5 => ring.sub(&x, &ring.one()),
            5 => ring.sub(&ring.smul(2, &x), &ring.one()),
            _ => x,
        };
        self.from_integral(&root, self.prec)
    }

    /// Serialisable form of an element.
    pub fn describe(&self, a: &FieldElem) -> serde_json::Value {
        serde_json::json!({
            "valuation": a.val,
            "unit": a.unit,
            "precision": a.prec,
        })
    }
}

/// Coordinates with respect to a basis of a direct summand of (Z/p^R)^D,
/// found by eliminating on unit entries only.
#[derive(Clone, Debug)]
struct UnitSolver {
    zp: Zpk,
    /// Pivot column of each reduced row.
    cols: Vec<usize>,
    /// Reduced rows are T·basis.
    t: Vec<Vec<u64>>,
}

impl UnitSolver {
    fn new(zp: Zpk, basis: &[Elem]) -> Option<Self> {
        let r = basis.len();
        let mut rows: Vec<Vec<u64>> = basis.to_vec();
        let mut t: Vec<Vec<u64>> = crate::linalg::identity(r);
        let mut cols = Vec::with_capacity(r);
        for i in 0..r {
            let c = (0..rows[i].len()).find(|&c| zp.is_unit(rows[i][c]))?;
            let u = zp.inv(rows[i][c]);
            rows[i] = rows[i].iter().map(|&x| zp.mul(x, u)).collect();
            t[i] = t[i].iter().map(|&x| zp.mul(x, u)).collect();
            for k in 0..r {
                if k != i && rows[k][c] != 0 {
                    let f = zp.neg(rows[k][c]);
                    let (ri, ti) = (rows[i].clone(), t[i].clone());
                    axpy(&zp, &mut rows[k], f, &ri);
                    axpy(&zp, &mut t[k], f, &ti);
                }
            }
            cols.push(c);
        }
        Some(UnitSolver { zp, cols, t })
    }

    fn coords(&self, x: &Elem) -> Vec<u64> {
        let mut out = vec![0u64; self.t.len()];
        for (&c, row) in self.cols.iter().zip(&self.t) {
            axpy(&self.zp, &mut out, x[c], row);
        }
        out
    }
}

struct Model {
    g: Vec<u64>,
    e: u32,
    f: u32,
    sigma_x: Elem,
    ring: OkRing,
}

fn inv_unit_raw(ring: &OkRing, u: &Elem, f: u32) -> Elem {
    let zp = &ring.zp;
    let mut y = if f == 1 {
        let c = u[0] % zp.p;
        let small = Zpk::new(zp.p, 1).expect("p is valid");
        ring.scalar(small.inv(c))
    } else {
        ring.pow(u, (zp.p.pow(f) - 2) as u128)
    };
    for _ in 0..64 {
        let r = ring.sub(&ring.one(), &ring.mul(u, &y));
        if r.iter().all(|&c| c == 0) {
            break;
        }
        y = ring.add(&y, &ring.mul(&y, &r));
    }
    y
}

fn prime_factors(mut x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= x {
        if x.is_multiple_of(d) {
            out.push(d);
            while x.is_multiple_of(d) {
                x /= d;
            }
        }
        d += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

/// Monic g of degree f over F_p for which X is a primitive root of F_{p^f}.
fn primitive_poly(p: u64, f: u32) -> Vec<u64> {
    let small = Zpk::new(p, 1).expect("p is valid");
    let q = p.pow(f);
    let factors = prime_factors(q - 1);
    for code in 0..q {
        let g: Vec<u64> = (0..f).map(|k| (code / p.pow(k)) % p).collect();
        if g[0] == 0 {
            continue;
        }
        let r = OkRing::new(small, &g);
        let x = r.x();
        if r.pow(&x, (q - 1) as u128) != r.one() {
            continue;
        }
        if factors
            .iter()
            .all(|&l| r.pow(&x, ((q - 1) / l) as u128) != r.one())
        {
            return g;
        }
    }
    unreachable!("F_{{p^f}} has a primitive element")
}

fn unramified_model(zp: Zpk, p: u64, n: u32) -> Result<Model> {
    let f = p.pow(n) as u32;
    let g = primitive_poly(p, f);
    let ring = OkRing::new(zp, &g);
    let mut full = g.clone();
    full.push(1);
    let deriv: Vec<u64> = (1..full.len()).map(|k| zp.mul(k as u64, full[k])).collect();
    let mut y = ring.pow(&ring.x(), p as u128);
    for _ in 0..64 {
        let gy = ring.eval_poly(&full, &y);
        if gy.iter().all(|&c| c == 0) {
            break;
        }
        let dy = ring.eval_poly(&deriv, &y);
        let step = ring.mul(&gy, &inv_unit_raw(&ring, &dy, f));
        y = ring.sub(&y, &step);
    }
    if !ring.eval_poly(&full, &y).iter().all(|&c| c == 0) {
        return Err(Error::Verification(
            "Frobenius lift did not converge".into(),
        ));
    }
    Ok(Model {
        g,
        e: 1,
        f,
        sigma_x: y,
        ring,
    })
}

/// Polynomial product over Z/p^R without reduction.
fn poly_mul(zp: &Zpk, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = zp.add(out[i + j], zp.mul(x, y));
        }
    }
    out
}

fn cyclotomic_model(zp: Zpk, p: u64, n: u32) -> Model {
    let pn = p.pow(n) as usize;
    let d = (p as usize - 1) * pn;
    // (X+1)^{p^n} by repeated p-th powers.
    let mut base = vec![1u64, 1];
    for _ in 0..n {
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = poly_mul(&zp, &acc, &base);
        }
        base = acc;
    }
    let mut g = vec![0u64; d + 1];
    let mut term = vec![1u64];
    for _ in 0..p {
        for (k, &c) in term.iter().enumerate() {
            g[k] = zp.add(g[k], c);
        }
        term = poly_mul(&zp, &term, &base);
    }
    debug_assert_eq!(g[d], 1);
    g.truncate(d);
    let ring = OkRing::new(zp, &g);
    let xi = ring.add(&ring.x(), &ring.one());
    let sigma_x = ring.sub(&ring.pow(&xi, (1 + p) as u128), &ring.one());
    Model {
        g,
        e: d as u32,
        f: 1,
        sigma_x,
        ring,
    }
}

fn quadratic_model(zp: Zpk, a: i64) -> Model {
    let c = |x: i64| zp.from_i64(x);
    let (g, sigma_x, e, f): (Vec<u64>, [i64; 2], u32, u32) = match a {
        -1 | -5 => (vec![c(1 - a), c(-2)], [2, -1], 2, 1),
        5 => (vec![c(-1), c(-1)], [1, -1], 1, 2),
        _ => (vec![c(-a), 0], [0, -1], 2, 1),
    };
    let ring = OkRing::new(zp, &g);
    let sigma_x = vec![c(sigma_x[0]), c(sigma_x[1])];
    Model {
        g,
        e,
        f,
        sigma_x,
        ring,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let s: FieldSpec = "cyclotomic p=3 n=1".parse().unwrap();
        assert_eq!(s, FieldSpec::Cyclotomic { p: 3, n: 1 });
        assert_eq!(s.to_string(), "cyclotomic p=3 n=1");
        assert!("quadratic2 a=4".parse::<FieldSpec>().is_err());
        assert!("quadratic2 a=9".parse::<FieldSpec>().is_err());
        assert!("cyclotomic p=2 n=2".parse::<FieldSpec>().is_err());
        assert!("unramified p=4 n=1".parse::<FieldSpec>().is_err());
        assert!("unramified p=3".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn square_classes() {
        assert_eq!(square_class(-1).unwrap(), -1);
        assert_eq!(square_class(7).unwrap(), -1);
        assert_eq!(square_class(3).unwrap(), -5);
        assert_eq!(square_class(-4).unwrap(), -1);
        assert_eq!(square_class(6).unwrap(), -10);
        assert_eq!(square_class(8).unwrap(), 2);
        assert!(square_class(17).is_err());
    }

    #[test]
    fn ramification_data() {
        let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 1 }, 2, 0).unwrap();
        assert_eq!((t.e, t.f, t.degree()), (6, 1, 6));
        let xi = t
            .from_integral(&t.ring.add(&t.ring.x(), &t.ring.one()), t.prec)
            .unwrap();
        assert!(t.approx_eq(&t.sigma(&xi), &t.pow(&xi, 4)));
        let t = Tower::build(FieldSpec::Unramified { p: 3, n: 1 }, 2, 0).unwrap();
        assert_eq!((t.e, t.f), (1, 3));
        let t = Tower::build(FieldSpec::Quadratic2 { a: -1 }, 2, 0).unwrap();
        assert_eq!((t.e, t.f), (2, 1));
    }

    #[test]
    fn norms_of_spec_examples() {
        let t = Tower::build(FieldSpec::Quadratic2 { a: -1 }, 2, 0).unwrap();
        let i = t.quadratic_root().unwrap();
        let one_plus_i = t.add(&t.one(), &i).unwrap();
        assert!(t.approx_eq(
            &t.norm_to_base(&one_plus_i).unwrap(),
            &t.from_i64(2).unwrap()
        ));

        let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 1 }, 2, 0).unwrap();
        let xi9 = t
            .from_integral(&t.ring.add(&t.ring.x(), &t.ring.one()), t.prec)
            .unwrap();
        let xi3 = t.pow(&xi9, 3);
        assert!(t.approx_eq(&t.norm_to_base(&xi9).unwrap(), &xi3));
        assert!(t.in_level(&xi3, 0));
        assert!(!t.in_level(&xi9, 0));
    }

    #[test]
    fn arithmetic_roundtrips() {
        let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 1 }, 1, 0).unwrap();
        let x = t.generator();
        assert_eq!(x.val, 1);
        let y = t.add(&x, &t.from_i64(5).unwrap()).unwrap();
        let z = t.div(&t.mul(&x, &y), &y);
        assert!(t.approx_eq(&z, &x));
        let three = t.from_i64(3).unwrap();
        assert_eq!(three.val, 6);
        let back = t.to_integral(&three).unwrap().0;
        assert!(t.ring.eq_mod(&back, &t.ring.scalar(3), three.prec));
    }
}
