//! The rings R_m = Z/p^m and R_mG_i = (Z/p^m)[Z/p^i], canonical
//! (p, σ−1)-adic forms, the operators P(i,j), evaluation maps φ_d, and the
//! unit filtrations U_t, −U_v used to classify twists.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Zpk;

/// p, the tower height n, the depth m and the quotient level i ≤ n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingParams {
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub i: u32,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

impl RingParams {
    pub fn new(p: u64, n: u32, m: u32, i: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::Invalid("m must be at least 1".into()));
        }
        if i > n {
            return Err(Error::Invalid(format!("level i={i} exceeds n={n}")));
        }
        Zpk::new(p, m)?;
        p.checked_pow(n)
            .filter(|&g| g <= 1 << 16)
            .ok_or_else(|| Error::Invalid(format!("group order {p}^{n} too large")))?;
        Ok(RingParams { p, n, m, i })
    }

    /// Same ring data at another level.
    pub fn at_level(&self, i: u32) -> Self {
        assert!(i <= self.n);
        RingParams { i, ..*self }
    }

    pub fn with_m(&self, m: u32) -> Self {
        RingParams { m, ..*self }
    }

    pub fn ring(&self) -> Zpk {
        Zpk::new(self.p, self.m).expect("validated at construction")
    }

    /// |G_i| = p^i.
    pub fn width(&self) -> usize {
        self.p.pow(self.i) as usize
    }
}

/// An element Σ coeffs[k] σ^k of R_mG_i.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    pub params: RingParams,
    pub coeffs: Vec<u64>,
}

impl GroupRingElement {
    pub fn new(params: RingParams, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() != params.width() {
            return Err(Error::ParamMismatch(format!(
                "expected {} coefficients, got {}",
                params.width(),
                coeffs.len()
            )));
        }
        let q = params.ring().q;
        if coeffs.iter().any(|&c| c >= q) {
            return Err(Error::Invalid("coefficient out of range".into()));
        }
        Ok(GroupRingElement { params, coeffs })
    }

    /// Builds from arbitrary integers, reducing mod p^m.
    pub fn from_i64(params: RingParams, coeffs: &[i64]) -> Self {
        let r = params.ring();
        let mut c = vec![0; params.width()];
        for (k, &x) in coeffs.iter().enumerate() {
            let slot = k % c.len();
            c[slot] = r.add(c[slot], r.from_i64(x));
        }
        GroupRingElement { params, coeffs: c }
    }

    pub fn zero(params: RingParams) -> Self {
        GroupRingElement {
            params,
            coeffs: vec![0; params.width()],
        }
    }

    pub fn scalar(params: RingParams, c: i64) -> Self {
        let mut z = Self::zero(params);
        z.coeffs[0] = params.ring().from_i64(c);
        z
    }

    pub fn one(params: RingParams) -> Self {
        Self::scalar(params, 1)
    }

    /// σ^t.
    pub fn sigma_power(params: RingParams, t: i64) -> Self {
        let mut z = Self::zero(params);
        let w = params.width() as i64;
        z.coeffs[t.rem_euclid(w) as usize] = 1 % params.ring().q;
        z
    }

    /// σ^t − c.
    pub fn sigma_minus(params: RingParams, t: i64, c: i64) -> Self {
        Self::sigma_power(params, t)
            .sub(&Self::scalar(params, c))
            .unwrap()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.params != other.params {
            return Err(Error::ParamMismatch(format!(
                "{:?} vs {:?}",
                self.params, other.params
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let r = self.params.ring();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| r.add(a, b))
            .collect();
        Ok(GroupRingElement {
            params: self.params,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let r = self.params.ring();
        GroupRingElement {
            params: self.params,
            coeffs: self.coeffs.iter().map(|&a| r.neg(a)).collect(),
        }
    }

    pub fn scale(&self, c: i64) -> Self {
        let r = self.params.ring();
        let c = r.from_i64(c);
        GroupRingElement {
            params: self.params,
            coeffs: self.coeffs.iter().map(|&a| r.mul(a, c)).collect(),
        }
    }

    /// Cyclic convolution modulo (σ^{p^i} − 1, p^m).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let r = self.params.ring();
        let w = self.coeffs.len();
        let mut out = vec![0u64; w];
        for (s, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (t, &b) in other.coeffs.iter().enumerate() {
                if b != 0 {
                    let k = (s + t) % w;
                    out[k] = r.add(out[k], r.mul(a, b));
                }
            }
        }
        Ok(GroupRingElement {
            params: self.params,
            coeffs: out,
        })
    }

    /// σ^t · f.
    pub fn apply_sigma_power(&self, t: i64) -> Self {
        let w = self.coeffs.len();
        let s = t.rem_euclid(w as i64) as usize;
        let mut out = vec![0; w];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[(k + s) % w] = c;
        }
        GroupRingElement {
            params: self.params,
            coeffs: out,
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one(self.params);
        for _ in 0..e {
            acc = acc.mul(self).unwrap();
        }
        acc
    }

    /// Image under the inflation R_mG → R_mG_i (σ ↦ σ), i.e. reduction of
    /// exponents mod p^i.
    pub fn project(&self, i: u32) -> Self {
        let params = self.params.at_level(i);
        let r = params.ring();
        let w = params.width();
        let mut c = vec![0; w];
        for (k, &x) in self.coeffs.iter().enumerate() {
            c[k % w] = r.add(c[k % w], x);
        }
        GroupRingElement { params, coeffs: c }
    }

    /// Reinterprets f ∈ R_mG_i as an element of R_mG_j for j ≥ i using the
    /// same exponents.
    pub fn lift_exponents(&self, j: u32) -> Self {
        let params = self.params.at_level(j);
        let mut c = vec![0; params.width()];
        c[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        GroupRingElement { params, coeffs: c }
    }

    /// Reduction to a smaller depth m' ≤ m.
    pub fn reduce_depth(&self, m: u32) -> Self {
        let params = self.params.with_m(m);
        let q = params.ring().q;
        GroupRingElement {
            params,
            coeffs: self.coeffs.iter().map(|&c| c % q).collect(),
        }
    }

    /// Augmentation φ_1 mod p: f is a unit of R_mG_i iff this is nonzero.
    pub fn is_unit(&self) -> bool {
        let p = self.params.p;
        self.coeffs.iter().fold(0u64, |s, &c| (s + c % p) % p) != 0
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        canonical_form(self)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.params.ring();
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = r.signed(c);
            terms.push(match k {
                0 => format!("{c}"),
                1 => format!("{c}σ"),
                _ => format!("{c}σ^{k}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Digits a_{l,j} ∈ {0..p−1} with f = Σ a_{l,j} p^l (σ−1)^j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub params: RingParams,
    pub digits: Vec<Vec<u64>>,
}

fn binomials_mod(p: u64, w: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; w]; w];
    for t in 0..w {
        c[t][0] = 1 % p;
        for j in 1..=t {
            c[t][j] = (c[t - 1][j - 1] + if j < t { c[t - 1][j] } else { 0 }) % p;
        }
    }
    c
}

/// (σ−1)^j in R_mG_i.
pub fn sigma_minus_one_power(params: RingParams, j: u64) -> GroupRingElement {
    GroupRingElement::sigma_minus(params, 1, 1).pow(j)
}

pub fn canonical_form(f: &GroupRingElement) -> CanonicalForm {
    let params = f.params;
    let p = params.p;
    let w = params.width();
    let binom = binomials_mod(p, w);
    let basis: Vec<GroupRingElement> = (0..w as u64)
        .map(|j| sigma_minus_one_power(params, j))
        .collect();
    let mut cur = f.coeffs.clone();
    let r = params.ring();
    let mut digits = Vec::with_capacity(params.m as usize);
    for _layer in 0..params.m {
        let mut row = vec![0u64; w];
        for (j, slot) in row.iter_mut().enumerate() {
            let mut s = 0;
            for (t, &c) in cur.iter().enumerate() {
                s = (s + (c % p) * binom[t][j]) % p;
            }
            *slot = s;
        }
        for (j, &b) in row.iter().enumerate() {
            if b != 0 {
                for (slot, &c) in cur.iter_mut().zip(&basis[j].coeffs) {
                    *slot = r.sub(*slot, r.mul(b, c));
                }
            }
        }
        debug_assert!(cur.iter().all(|&c| c % p == 0));
        for c in cur.iter_mut() {
            *c /= p;
        }
        digits.push(row);
    }
    CanonicalForm { params, digits }
}

pub fn from_canonical(form: &CanonicalForm) -> GroupRingElement {
    let params = form.params;
    let mut acc = GroupRingElement::zero(params);
    let mut pl = 1i64;
    for row in &form.digits {
        for (j, &a) in row.iter().enumerate() {
            if a != 0 {
                let term = sigma_minus_one_power(params, j as u64).scale(pl * a as i64);
                acc = acc.add(&term).unwrap();
            }
        }
        pl = pl.saturating_mul(params.p as i64);
    }
    acc
}

/// P(i,j) = Σ_{k<p^{i−j}} σ^{k p^j}, as an element of R_mG_{params.i}.
pub fn p_operator(params: RingParams, i: u32, j: u32) -> Result<GroupRingElement> {
    if j > i || i > params.i {
        return Err(Error::Invalid(format!(
            "P({i},{j}) needs j ≤ i ≤ level {}",
            params.i
        )));
    }
    let mut z = GroupRingElement::zero(params);
    let step = params.p.pow(j) as usize;
    for k in 0..params.p.pow(i - j) as usize {
        z.coeffs[k * step] = 1 % params.ring().q;
    }
    Ok(z)
}

/// φ_d(f) = Σ f_t d^t mod p^{m'}.
pub fn phi_d(f: &GroupRingElement, d: i64, m_prime: u32) -> u64 {
    let r = Zpk::new(f.params.p, m_prime).expect("modulus fits");
    let dd = r.from_i64(d);
    let mut acc = 0;
    let mut pw = 1 % r.q;
    for &c in &f.coeffs {
        acc = r.add(acc, r.mul(c % r.q, pw));
        pw = r.mul(pw, dd);
    }
    acc
}

/// Filtration level of a twist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwistLevel {
    /// d ∈ U_t \ U_{t+1}.
    PlusU(u32),
    /// p = 2 and d ∈ −U_v \ −U_{v+1}.
    MinusU(u32),
    ExactlyMinusOne,
    /// d ≡ 1 at every tracked depth.
    UInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistClass {
    pub d: i64,
    pub level: TwistLevel,
}

fn val_i128(p: u64, mut x: i128, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    while v < cap && x % p as i128 == 0 {
        x /= p as i128;
        v += 1;
    }
    v
}

/// Classifies d ∈ U_1 by its filtration level; levels at or beyond `depth`
/// collapse to `UInfinity` (or `ExactlyMinusOne` on the −U side).
pub fn classify_twist(p: u64, d: i64, depth: u32) -> Result<TwistClass> {
    let dd = d as i128;
    if (dd - 1).rem_euclid(p as i128) != 0 {
        return Err(Error::Invalid(format!("twist {d} is not 1 mod {p}")));
    }
    let level = if p == 2 && (dd + 1).rem_euclid(4) == 0 {
        let v = val_i128(2, dd + 1, depth);
        if v >= depth {
            TwistLevel::ExactlyMinusOne
        } else {
            TwistLevel::MinusU(v)
        }
    } else {
        let t = val_i128(p, dd - 1, depth);
        if t >= depth {
            TwistLevel::UInfinity
        } else {
            TwistLevel::PlusU(t)
        }
    };
    Ok(TwistClass { d, level })
}

/// Prediction for the class of d^{p^j} given the class of d.
pub fn check_upower(p: u64, class: TwistLevel, j: u32) -> TwistLevel {
    match class {
        TwistLevel::PlusU(i) => {
            debug_assert!(p > 2 || i > 1);
            TwistLevel::PlusU(i + j)
        }
        TwistLevel::MinusU(v) if j == 0 => TwistLevel::MinusU(v),
        TwistLevel::MinusU(v) => TwistLevel::PlusU(v + j),
        TwistLevel::ExactlyMinusOne if j == 0 => TwistLevel::ExactlyMinusOne,
        TwistLevel::ExactlyMinusOne | TwistLevel::UInfinity => TwistLevel::UInfinity,
    }
}

/// Whether d ∈ U_t (t ≥ 1), with U_∞ = {1}.
pub fn in_u(p: u64, d: i64, t: u32) -> bool {
    let q = (p as i128).pow(t);
    (d as i128 - 1).rem_euclid(q) == 0
}

/// Whether d ∈ −U_t.
pub fn in_minus_u(p: u64, d: i64, t: u32) -> bool {
    let q = (p as i128).pow(t);
    (d as i128 + 1).rem_euclid(q) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64, n: u32, m: u32, i: u32) -> RingParams {
        RingParams::new(p, n, m, i).unwrap()
    }

    #[test]
    fn spec_arith_examples() {
        let r = pr(2, 1, 2, 1);
        let f = GroupRingElement::from_i64(r, &[1, 1]);
        assert_eq!(f.mul(&f).unwrap(), GroupRingElement::from_i64(r, &[2, 2]));
        assert_eq!(f.mul(&GroupRingElement::one(r)).unwrap(), f);
        let r = pr(3, 1, 1, 1);
        assert!(sigma_minus_one_power(r, 3).is_zero());
    }

    #[test]
    fn spec_canonical_examples() {
        let r = pr(2, 1, 2, 1);
        let cf = canonical_form(&GroupRingElement::from_i64(r, &[2, 2]));
        assert_eq!(cf.digits, vec![vec![0, 0], vec![0, 1]]);
        let r = pr(2, 1, 1, 1);
        let cf = canonical_form(&GroupRingElement::from_i64(r, &[1, 1]));
        assert_eq!(cf.digits, vec![vec![0, 1]]);
        assert!(canonical_form(&GroupRingElement::zero(r))
            .digits
            .iter()
            .flatten()
            .all(|&a| a == 0));
    }

    #[test]
    fn spec_p_operator_examples() {
        let r = pr(3, 1, 2, 1);
        assert_eq!(p_operator(r, 1, 0).unwrap().coeffs, vec![1, 1, 1]);
        assert_eq!(p_operator(r, 1, 1).unwrap(), GroupRingElement::one(r));
        let r = pr(2, 2, 1, 2);
        assert_eq!(p_operator(r, 2, 1).unwrap().coeffs, vec![1, 0, 1, 0]);
        assert!(p_operator(r, 1, 2).is_err());
    }

    #[test]
    fn spec_phi_examples() {
        let r = pr(3, 1, 2, 1);
        assert_eq!(phi_d(&p_operator(r, 1, 0).unwrap(), 4, 2), 3);
        let r = pr(2, 1, 3, 1);
        assert_eq!(phi_d(&p_operator(r, 1, 0).unwrap(), -1, 3), 0);
        assert_eq!(phi_d(&p_operator(r, 1, 0).unwrap(), 3, 3) % 8, 4);
    }

    #[test]
    fn spec_twist_examples() {
        assert_eq!(
            classify_twist(3, 7, 10).unwrap().level,
            TwistLevel::PlusU(1)
        );
        assert_eq!(
            classify_twist(3, 10, 10).unwrap().level,
            TwistLevel::PlusU(2)
        );
        assert_eq!(
            classify_twist(2, 7, 10).unwrap().level,
            TwistLevel::MinusU(3)
        );
        assert_eq!(
            classify_twist(2, -1, 10).unwrap().level,
            TwistLevel::ExactlyMinusOne
        );
        assert!(classify_twist(3, 2, 10).is_err());
        assert_eq!(
            check_upower(3, TwistLevel::PlusU(1), 1),
            TwistLevel::PlusU(2)
        );
        assert_eq!(
            classify_twist(3, 64, 10).unwrap().level,
            TwistLevel::PlusU(2)
        );
        assert_eq!(
            check_upower(2, TwistLevel::ExactlyMinusOne, 1),
            TwistLevel::UInfinity
        );
        assert_eq!(
            check_upower(2, TwistLevel::MinusU(2), 1),
            TwistLevel::PlusU(3)
        );
        assert_eq!(
            classify_twist(2, 9, 10).unwrap().level,
            TwistLevel::PlusU(3)
        );
    }
}
