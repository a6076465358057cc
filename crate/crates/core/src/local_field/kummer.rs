//! J_m(K_i) = K_i^×/K_i^{×p^m} as a finite R_mG_i-module with a discrete
//! logarithm, together with p-th power tests, p-th roots and the maximal
//! p-power root of unity.
//!
//! A unit u of K_i is reduced to the principal unit u^{q−1} and then peeled
//! against the filtration U^{(t)} = 1 + π_i^t O: at step t the digits of
//! (u − 1)/π_i^t in the residue basis {ω_j} are read off and removed by the
//! generators 1 + ω_j p^s π_i^k (t = e·s + k). Stopping at
//! N = e·m + ⌊e/(p−1)⌋ + 1 is enough because U^{(N)} ⊆ K_i^{×p^m}.

use std::sync::Arc;

use super::{Elem, FieldElem, Level, Tower};
use crate::error::{Error, Result};
use crate::group_ring::RingParams;
use crate::linalg::{identity, Howell, Zpk};
use crate::rmg_modules::{FinModule, RawModule};

/// A Kummer quotient of one level, or (without the π generator and with a
/// large exponent) a truncated principal unit group U^{(1)}/U^{(N)}.
#[derive(Debug)]
pub struct KummerModule {
    pub level: u32,
    /// Exponent of the coefficient ring Z/p^m.
    pub m: u32,
    /// Filtration cut N.
    pub depth: u32,
    pub with_pi: bool,
    pub raw: RawModule,
    /// π_i (when present) followed by the filtration generators.
    pub raw_gens: Vec<FieldElem>,
    ginv: Vec<Elem>,
    /// Field lifts of the natural generators of the module.
    pub gens: Vec<FieldElem>,
}

impl KummerModule {
    pub fn module(&self) -> &FinModule {
        &self.raw.module
    }

    pub fn log_order(&self) -> u32 {
        self.raw.module.log_order()
    }

    /// The class of γ ∈ K_i^× as an embedded module element.
    pub fn dlog(&self, tower: &Tower, g: &FieldElem) -> Result<Vec<u64>> {
        Ok(self.raw.to_module(&self.raw_dlog(tower, g)?))
    }

    /// A field element whose class has the given natural coordinates.
    pub fn element(&self, tower: &Tower, natural: &[u64]) -> FieldElem {
        tower.product(self.gens.iter().zip(natural).map(|(g, &c)| (g, c as i64)))
    }

    /// A field element representing the embedded module element x.
    pub fn lift(&self, tower: &Tower, x: &[u64]) -> FieldElem {
        self.element(tower, &self.module().natural(x))
    }

    fn raw_dlog(&self, tower: &Tower, g: &FieldElem) -> Result<Vec<u64>> {
        let lvl = tower.level(self.level);
        let ring = Zpk::new(tower.p, self.m)?;
        if g.val % lvl.ram as i64 != 0 {
            return Err(Error::Invalid(format!(
                "element of valuation {} is not in K_{}",
                g.val, self.level
            )));
        }
        let vl = g.val / lvl.ram as i64;
        let r = if vl >= 0 { &lvl.rho_inv } else { &lvl.rho };
        let unit = tower
            .ring
            .mul(&g.unit, &tower.ring.pow(r, vl.unsigned_abs() as u128));
        let prec = g.prec.min(tower.prec - 1);
        let w = tower.ring.pow(&unit, (lvl.q - 1) as u128);
        let digits = tower.peel(lvl, &self.ginv, &w, prec, self.depth)?;
        let c = ring.inv(ring.from_i64(lvl.q as i64 - 1));
        let mut out = Vec::with_capacity(self.raw_gens.len());
        if self.with_pi {
            out.push(ring.from_i64(vl));
        } else if vl != 0 {
            return Err(Error::Invalid(
                "principal unit group given a non-unit".into(),
            ));
        }
        out.extend(digits.iter().map(|&d| ring.mul(d, c)));
        Ok(out)
    }
}

/// Number of p-th power steps after which U^{(1)} lands in U^{(depth)}.
fn exponent_bound(p: u64, e: u32, depth: u32) -> u32 {
    let mut j = 1u64;
    let mut steps = 0;
    while j < depth as u64 {
        j = (j * p).min(j + e as u64);
        steps += 1;
    }
    steps
}

fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, a as i128 % m as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(m as i128) as u64
}

impl Tower {
    /// Filtration digits of a principal unit w of K_i known mod p^prec.
    fn peel(
        &self,
        lvl: &Level,
        ginv: &[Elem],
        w: &Elem,
        prec: u32,
        depth: u32,
    ) -> Result<Vec<u64>> {
        let e = lvl.e;
        let f = lvl.f as usize;
        let need = depth.div_ceil(e);
        if prec < need {
            return Err(Error::Precision(format!(
                "level {} needs {need} digits, element carries {prec}",
                lvl.i
            )));
        }
        let ring = &self.ring;
        let p = self.p;
        let mut w = w.clone();
        let mut out = vec![0u64; f * (depth as usize - 1)];
        for t in 1..depth {
            let (s, k) = (t / e, t % e);
            let c = lvl.coords(&ring.sub(&w, &ring.one()));
            let ps = p.pow(s);
            for j in 0..f {
                let idx = (t as usize - 1) * f + j;
                let d = (c[j * e as usize + k as usize] / ps) % p;
                out[idx] = d;
                for _ in 0..d {
                    w = ring.mul(&w, &ginv[idx]);
                }
            }
        }
        Ok(out)
    }

    fn build_kummer(&self, level: u32, m: u32, depth: u32, with_pi: bool) -> Result<KummerModule> {
        let lvl = self.level(level);
        let ring = &self.ring;
        let e = lvl.e;
        let mut raw_gens = Vec::new();
        if with_pi {
            raw_gens.push(FieldElem {
                val: lvl.ram as i64,
                unit: lvl.rho.clone(),
                prec: self.prec - 1,
            });
        }
        let mut ginv = Vec::new();
        let mut units = Vec::new();
        for t in 1..depth {
            let (s, k) = (t / e, t % e);
            for w in &lvl.omegas {
                let term = ring.smul(ring.zp.ppow(s), &ring.mul(w, &lvl.pi_pows[k as usize]));
                let g = ring.add(&ring.one(), &term);
                ginv.push(self.inv_unit(&g));
                units.push(g.clone());
                raw_gens.push(FieldElem {
                    val: 0,
                    unit: g,
                    prec: self.prec,
                });
            }
        }
        let r = raw_gens.len();
        let off = usize::from(with_pi);
        let zm = Zpk::new(self.p, m)?;
        let mut relations = Vec::with_capacity(units.len());
        for (idx, g) in units.iter().enumerate() {
            let gp = ring.pow(g, self.p as u128);
            let digits = self.peel(lvl, &ginv, &gp, self.prec, depth)?;
            let mut row = vec![0u64; r];
            row[off + idx] = zm.from_i64(self.p as i64);
            for (x, &d) in row[off..].iter_mut().zip(&digits) {
                *x = zm.sub(*x, d % zm.q);
            }
            relations.push(row);
        }
        let params = RingParams::new(self.p, self.n, m, level)?;
        let partial = KummerModule {
            level,
            m,
            depth,
            with_pi,
            raw: FinModule::from_raw(params, r, &[], &identity(r)),
            raw_gens,
            ginv,
            gens: Vec::new(),
        };
        let sigma_raw = if with_pi {
            partial
                .raw_gens
                .iter()
                .map(|g| partial.raw_dlog(self, &self.sigma(g)))
                .collect::<Result<Vec<_>>>()?
        } else {
            identity(r)
        };
        let raw = FinModule::from_raw(params, r, &relations, &sigma_raw);
        let gens = raw
            .lifts
            .iter()
            .map(|lift| {
                self.product(
                    partial
                        .raw_gens
                        .iter()
                        .zip(lift)
                        .map(|(g, &c)| (g, zm.signed(c))),
                )
            })
            .collect();
        Ok(KummerModule {
            raw,
            gens,
            ..partial
        })
    }

    /// N = e_i·m + ⌊e_i/(p−1)⌋ + 1 for level i.
    pub fn kummer_depth(&self, level: u32, m: u32) -> u32 {
        let e = self.level(level).e;
        e * m + e / (self.p as u32 - 1) + 1
    }

    /// J_m(K_i) with its R_mG_i-module structure.
    pub fn kummer(&self, level: u32, m: u32) -> Result<Arc<KummerModule>> {
        if level > self.n {
            return Err(Error::Invalid(format!(
                "level {level} exceeds n = {}",
                self.n
            )));
        }
        if m == 0 {
            return Err(Error::Invalid("depth m must be at least 1".into()));
        }
        let depth = self.kummer_depth(level, m);
        let km = self.cached(level, m, depth, true)?;
        if self.roots_ready {
            let lvl = self.level(level);
            let expect = m * (lvl.degree() + 1) + m.min(self.nu_at_level(level));
            if km.log_order() != expect {
                return Err(Error::Verification(format!(
                    "|J_{m}(K_{level})| = p^{} but the unit-group structure predicts p^{expect}",
                    km.log_order()
                )));
            }
        }
        Ok(km)
    }

    fn cached(&self, level: u32, m: u32, depth: u32, with_pi: bool) -> Result<Arc<KummerModule>> {
        let key = (level, m, depth, with_pi);
        if let Some(k) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(k.clone());
        }
        let km = Arc::new(self.build_kummer(level, m, depth, with_pi)?);
        self.cache
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| km.clone());
        Ok(km)
    }

    /// U^{(1)}/U^{(N)} of K for N = 3e + 2, where Newton's method for
    /// x^p = u converges from any approximate solution.
    fn principal_units(&self) -> Result<Arc<KummerModule>> {
        let depth = 3 * self.e + 2;
        let m = exponent_bound(self.p, self.e, depth);
        let km = self.cached(self.n, m, depth, false)?;
        if km.log_order() != self.f * (depth - 1) {
            return Err(Error::Verification(
                "truncated principal unit group has the wrong order".into(),
            ));
        }
        Ok(km)
    }

    /// [γ]_m ∈ J_m(K_i).
    pub fn dlog(&self, level: u32, m: u32, g: &FieldElem) -> Result<Vec<u64>> {
        self.kummer(level, m)?.dlog(self, g)
    }

    /// Whether γ ∈ K^{×p^k}.
    pub fn is_pth_power(&self, g: &FieldElem, k: u32) -> Result<bool> {
        if k == 0 {
            return Ok(true);
        }
        Ok(self.dlog(self.n, k, g)?.iter().all(|&c| c == 0))
    }

    /// Some r ∈ K with r^p = γ; the result carries one digit less.
    pub fn pth_root(&self, g: &FieldElem) -> Result<FieldElem> {
        let p = self.p;
        if g.val.rem_euclid(p as i64) != 0 {
            return Err(Error::Invalid(
                "element is not a p-th power (valuation)".into(),
            ));
        }
        let g_units = self.principal_units()?;
        let need = g_units.depth.div_ceil(self.e) + 1;
        if g.prec < need {
            return Err(Error::Precision(format!(
                "p-th root needs {need} digits, element carries {}",
                g.prec
            )));
        }
        let ring = &self.ring;
        let q = p.pow(self.f);
        let omega = self.teichmuller(&g.unit);
        let u1 = ring.mul(&g.unit, &self.inv_unit(&omega));
        let omega_root = ring.pow(&omega, inv_mod(p % (q - 1).max(1), (q - 1).max(1)) as u128);
        let u1e = FieldElem {
            val: 0,
            unit: u1.clone(),
            prec: g.prec,
        };
        let nat = g_units.module().natural(&g_units.dlog(self, &u1e)?);
        if nat.iter().any(|&c| c % p != 0) {
            return Err(Error::Invalid("element is not a p-th power".into()));
        }
        let half: Vec<u64> = nat.iter().map(|&c| c / p).collect();
        let x0 = g_units.element(self, &half);
        let w = ring.mul(&omega_root, &x0.unit);
        let w = self.newton_root(&w, &g.unit, g.prec)?;
        Ok(FieldElem {
            val: g.val / p as i64,
            unit: w,
            prec: g.prec - 1,
        })
    }

    /// Refines w with w^p ≈ u (to better than p^2) until w^p ≡ u mod p^prec.
    fn newton_root(&self, w: &Elem, u: &Elem, prec: u32) -> Result<Elem> {
        let ring = &self.ring;
        let p = self.p;
        let mut w = w.clone();
        for _ in 0..64 {
            let wp1 = ring.pow(&w, (p - 1) as u128);
            let fx = ring.sub(&ring.mul(&wp1, &w), u);
            if ring.is_zero_mod(&fx, prec) {
                return Ok(w);
            }
            if !ring.is_zero_mod(&fx, 1) {
                return Err(Error::Verification(
                    "Newton start is not close enough".into(),
                ));
            }
            let fp: Elem = fx.iter().map(|&c| c / p).collect();
            w = ring.sub(&w, &ring.mul(&fp, &self.inv_unit(&wp1)));
        }
        Err(Error::Verification(
            "Newton iteration did not converge".into(),
        ))
    }

    /// Iterated p-th root: some r with r^{p^k} = γ.
    pub fn pth_root_iter(&self, g: &FieldElem, k: u32) -> Result<FieldElem> {
        let mut r = g.clone();
        for _ in 0..k {
            r = self.pth_root(&r)?;
        }
        Ok(r)
    }

    pub(super) fn compute_roots(&self, cap: u32) -> Result<super::RootsOfUnity> {
        let xi_p = if self.p == 2 {
            Some(self.from_i64(-1)?)
        } else {
            self.find_xi_p()?
        };
        let mut roots = super::RootsOfUnity {
            nu: 0,
            capped: false,
            xi_p: xi_p.clone(),
            xi_top: xi_p.clone(),
        };
        let Some(mut z) = xi_p else {
            return Ok(roots);
        };
        roots.nu = 1;
        while roots.nu < cap {
            if !self.is_pth_power(&z, 1)? {
                break;
            }
            z = self.pth_root(&z)?;
            roots.nu += 1;
        }
        roots.capped = roots.nu == cap;
        roots.xi_top = Some(z);
        Ok(roots)
    }

    fn find_xi_p(&self) -> Result<Option<FieldElem>> {
        let g = self.principal_units()?;
        let p = self.p;
        let module = g.module();
        for (l, &k) in module.orders.iter().enumerate() {
            let mut nat = vec![0u64; module.orders.len()];
            nat[l] = p.pow(k - 1);
            let x0 = g.element(self, &nat);
            let one = self.ring.one();
            let Ok(w) = self.newton_root(&x0.unit, &one, self.prec) else {
                continue;
            };
            let cand = FieldElem {
                val: 0,
                unit: w,
                prec: self.prec - 1,
            };
            if !self.is_one(&cand) {
                return Ok(Some(cand));
            }
        }
        Ok(None)
    }

    /// Largest k with ξ_{p^k} ∈ K_i.
    pub fn nu_at_level(&self, i: u32) -> u32 {
        let Some(top) = &self.roots.xi_top else {
            return 0;
        };
        let nu = self.roots.nu;
        (1..=nu)
            .rev()
            .find(|&k| self.in_level(&self.pow(top, self.p.pow(nu - k) as i64), i))
            .unwrap_or(0)
    }

    /// A primitive p^k-th root of unity, for 1 ≤ k ≤ ν.
    pub fn root_of_unity(&self, k: u32) -> Option<FieldElem> {
        let top = self.roots.xi_top.as_ref()?;
        (k >= 1 && k <= self.roots.nu).then(|| self.pow(top, self.p.pow(self.roots.nu - k) as i64))
    }

    /// Span of [N_{K_i/F}(K_i^×)]_m inside J_m(F).
    pub fn norm_span(&self, i: u32, m: u32) -> Result<Howell> {
        let base = self.kummer(0, m)?;
        let src = self.kummer(i, m)?;
        let images = src
            .gens
            .iter()
            .map(|g| base.dlog(self, &self.norm(g, i, 0)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Howell::new(
            base.module().ring(),
            base.module().rank(),
            images,
        ))
    }

    /// (e_0(K/F), …, e_n(K/F)).
    pub fn norm_indices(&self) -> Result<Vec<u32>> {
        let dims = (0..=self.n)
            .map(|i| Ok(self.norm_span(i, 1)?.log_order()))
            .collect::<Result<Vec<u32>>>()?;
        Ok((0..=self.n as usize)
            .map(|i| dims[i] - dims.get(i + 1).copied().unwrap_or(0))
            .collect())
    }

    /// Whether −1 ∈ N_{K/F}(K^×), for p = 2 and n = 1.
    pub fn minus_one_is_norm(&self) -> Result<bool> {
        if self.p != 2 || self.n != 1 {
            return Err(Error::Gate(format!(
                "−1 norm test needs p = 2 and n = 1 (got p = {}, n = {})",
                self.p, self.n
            )));
        }
        let span = self.norm_span(1, 1)?;
        let m1 = self.dlog(0, 1, &self.from_i64(-1)?)?;
        Ok(span.contains(&m1))
    }
}

#[cfg(test)]
mod tests {
    use super::super::FieldSpec;
    use super::*;

    fn tower(spec: FieldSpec) -> Tower {
        Tower::build(spec, 2, 0).unwrap()
    }

    #[test]
    fn kummer_dimensions() {
        for (spec, dim, nu) in [
            (FieldSpec::Quadratic2 { a: -1 }, 4, 2),
            (FieldSpec::Unramified { p: 3, n: 1 }, 4, 0),
            (FieldSpec::Cyclotomic { p: 3, n: 1 }, 8, 2),
        ] {
            let t = tower(spec);
            assert_eq!(t.nu(), nu, "{spec}");
            assert_eq!(t.kummer(t.n, 1).unwrap().log_order(), dim, "{spec}");
        }
    }

    #[test]
    fn norm_indices_examples() {
        assert_eq!(
            tower(FieldSpec::Quadratic2 { a: -1 })
                .norm_indices()
                .unwrap(),
            vec![1, 2]
        );
        assert_eq!(
            tower(FieldSpec::Unramified { p: 3, n: 1 })
                .norm_indices()
                .unwrap(),
            vec![1, 1]
        );
        assert_eq!(
            tower(FieldSpec::Cyclotomic { p: 3, n: 1 })
                .norm_indices()
                .unwrap(),
            vec![1, 3]
        );
    }

    #[test]
    fn minus_one_norms() {
        assert!(!tower(FieldSpec::Quadratic2 { a: -1 })
            .minus_one_is_norm()
            .unwrap());
        assert!(tower(FieldSpec::Quadratic2 { a: 2 })
            .minus_one_is_norm()
            .unwrap());
        assert!(tower(FieldSpec::Quadratic2 { a: 5 })
            .minus_one_is_norm()
            .unwrap());
    }

    #[test]
    fn pth_powers_and_roots() {
        let t = tower(FieldSpec::Quadratic2 { a: -1 });
        let i = t.quadratic_root().unwrap();
        assert!(!t.is_pth_power(&i, 1).unwrap());
        let m4 = t.from_i64(-4).unwrap();
        let r = t.pth_root(&m4).unwrap();
        assert!(t.approx_eq(&t.pow(&r, 2), &m4));
        let t = tower(FieldSpec::Unramified { p: 3, n: 1 });
        assert!(!t.is_pth_power(&t.from_i64(3).unwrap(), 1).unwrap());
        let x = t.generator();
        let x3 = t.pow(&t.add(&x, &t.from_i64(3).unwrap()).unwrap(), 9);
        assert!(t.is_pth_power(&x3, 2).unwrap());
        let r = t.pth_root_iter(&x3, 2).unwrap();
        assert!(t.approx_eq(&t.pow(&r, 9), &x3));
    }
}
