//! Capped-relative-precision arithmetic in Q_p.
//!
//! A nonzero scalar is `p^v * u` with `u` a unit known modulo `p^r`, where `r`
//! never exceeds the session cap `M`. A scalar with `r == 0` is zero to
//! absolute precision `v`; the exact zero uses a huge sentinel for `v`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute precision carried by the exact zero.
pub const EXACT: i64 = i64::MAX / 8;

pub(crate) fn ppow(p: u32, k: u32) -> u64 {
    (p as u64).pow(k)
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Session context: the prime and the coefficient cap `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicCtx {
    pub p: u32,
    pub prec: u32,
}

impl PadicCtx {
    pub fn new(p: u32, prec: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        let max = Self::max_prec(p);
        if prec == 0 || prec > max {
            return Err(Error::Domain(format!(
                "precision {prec} outside 1..={max} for p={p}"
            )));
        }
        Ok(PadicCtx { p, prec })
    }

    /// Largest cap whose modulus fits the 62-bit unit storage.
    pub fn max_prec(p: u32) -> u32 {
        let mut k = 0;
        let mut acc: u128 = 1;
        while acc * p as u128 <= 1u128 << 62 {
            acc *= p as u128;
            k += 1;
        }
        k
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        PadicCtx {
            p: self.p,
            prec: prec.min(Self::max_prec(self.p)),
        }
    }

    pub fn zero(&self) -> PadicScalar {
        PadicScalar::exact_zero(self.p, self.prec)
    }

    pub fn one(&self) -> PadicScalar {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> PadicScalar {
        PadicScalar::from_i128(self.p, self.prec, n as i128)
    }

    pub fn rational(&self, num: i64, den: i64) -> Result<PadicScalar> {
        Ok(self.int(num) * self.int(den).inv()?)
    }

    /// `p^k` for any integer `k`.
    pub fn p_pow(&self, k: i64) -> PadicScalar {
        PadicScalar {
            p: self.p,
            cap: self.prec,
            r: self.prec,
            v: k,
            u: 1,
        }
    }
}

/// An element of Q_p at capped relative precision.
///
/// Equality means agreement to the precision both sides know.
#[derive(Clone, Copy, Debug)]
pub struct PadicScalar {
    p: u32,
    cap: u32,
    r: u32,
    v: i64,
    u: u64,
}

impl PadicScalar {
    pub fn exact_zero(p: u32, cap: u32) -> Self {
        PadicScalar {
            p,
            cap,
            r: 0,
            v: EXACT,
            u: 0,
        }
    }

    /// Zero known only modulo `p^abs`.
    pub fn zero_at(p: u32, cap: u32, abs: i64) -> Self {
        PadicScalar {
            p,
            cap,
            r: 0,
            v: abs.min(EXACT),
            u: 0,
        }
    }

    pub fn from_i128(p: u32, cap: u32, n: i128) -> Self {
        if n == 0 {
            return Self::exact_zero(p, cap);
        }
        let mut a = n.unsigned_abs();
        let mut v = 0;
        while a % p as u128 == 0 {
            a /= p as u128;
            v += 1;
        }
        let m = ppow(p, cap);
        let mut u = (a % m as u128) as u64;
        if n < 0 {
            u = m - u;
        }
        PadicScalar { p, cap, r: cap, v, u }
    }

    /// Builds `p^v * u` with `u` read modulo `p^r`; `u` must be a unit.
    pub fn from_parts(p: u32, cap: u32, v: i64, u: u64, r: u32) -> Result<Self> {
        if r == 0 {
            return Ok(Self::zero_at(p, cap, v));
        }
        let r = r.min(cap);
        if u % p as u64 == 0 {
            return Err(Error::Domain("unit part divisible by p".into()));
        }
        Ok(PadicScalar {
            p,
            cap,
            r,
            v,
            u: u % ppow(p, r),
        })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }
    pub fn cap(&self) -> u32 {
        self.cap
    }
    pub fn ctx(&self) -> PadicCtx {
        PadicCtx {
            p: self.p,
            prec: self.cap,
        }
    }
    /// Relative precision (number of known unit digits).
    pub fn rel_prec(&self) -> u32 {
        self.r
    }
    /// Digits lost relative to the cap; zero-at-precision counts as total loss.
    pub fn loss(&self) -> u32 {
        self.cap - self.r
    }
    pub fn unit(&self) -> u64 {
        self.u
    }
    pub fn is_zero(&self) -> bool {
        self.r == 0
    }
    pub fn is_exact_zero(&self) -> bool {
        self.r == 0 && self.v >= EXACT
    }
    /// Valuation, or `None` when zero at the known precision.
    pub fn valuation(&self) -> Option<i64> {
        (self.r > 0).then_some(self.v)
    }
    /// The value is known modulo `p^abs_prec`.
    pub fn abs_prec(&self) -> i64 {
        if self.is_exact_zero() {
            EXACT
        } else {
            self.v + self.r as i64
        }
    }

    /// Forgets digits so that the absolute precision is at most `abs`.
    pub fn cap_abs(&self, abs: i64) -> Self {
        if self.abs_prec() <= abs {
            return *self;
        }
        if self.r == 0 || self.v >= abs {
            return Self::zero_at(self.p, self.cap, abs.min(self.abs_prec()));
        }
        let r = (abs - self.v) as u32;
        PadicScalar {
            r,
            u: self.u % ppow(self.p, r),
            ..*self
        }
    }

    /// Forgets digits so that the relative precision is at most `r`.
    pub fn cap_rel(&self, r: u32) -> Self {
        if self.r <= r {
            return *self;
        }
        if r == 0 {
            return Self::zero_at(self.p, self.cap, self.v);
        }
        PadicScalar {
            r,
            u: self.u % ppow(self.p, r),
            ..*self
        }
    }

    pub fn with_cap(&self, cap: u32) -> Self {
        let mut s = self.cap_rel(cap);
        s.cap = cap;
        s
    }

    fn normalize(p: u32, cap: u32, w: i64, s: u64, k: u32) -> Self {
        if s == 0 {
            return Self::zero_at(p, cap, w + k as i64);
        }
        let mut s = s;
        let mut e = 0u32;
        while s % p as u64 == 0 {
            s /= p as u64;
            e += 1;
        }
        let r = (k - e).min(cap);
        PadicScalar {
            p,
            cap,
            r,
            v: w + e as i64,
            u: s % ppow(p, r),
        }
    }

    fn add_impl(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        let cap = self.cap.min(o.cap);
        if self.is_exact_zero() {
            return o.with_cap(cap);
        }
        if o.is_exact_zero() {
            return self.with_cap(cap);
        }
        let p = self.p;
        let abs = self.abs_prec().min(o.abs_prec());
        let w = match (self.r > 0, o.r > 0) {
            (true, true) => self.v.min(o.v),
            (true, false) => self.v,
            (false, true) => o.v,
            (false, false) => return Self::zero_at(p, cap, abs),
        };
        if abs <= w {
            return Self::zero_at(p, cap, abs);
        }
        let k = (abs - w) as u32;
        let m = ppow(p, k);
        let term = |x: &Self| -> u64 {
            if x.r == 0 {
                return 0;
            }
            let s = (x.v - w) as u32;
            if s >= k {
                0
            } else {
                (x.u % ppow(p, k - s)) * ppow(p, s)
            }
        };
        let s = (term(self) + term(o)) % m;
        Self::normalize(p, cap, w, s, k)
    }

    fn mul_impl(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        let cap = self.cap.min(o.cap);
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::exact_zero(self.p, cap);
        }
        if self.r == 0 || o.r == 0 {
            return Self::zero_at(self.p, cap, self.v + o.v);
        }
        let r = self.r.min(o.r).min(cap);
        let m = ppow(self.p, r);
        PadicScalar {
            p: self.p,
            cap,
            r,
            v: self.v + o.v,
            u: mulmod(self.u % m, o.u % m, m),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.r == 0 {
            return Err(Error::InsufficientPrecision(
                "inverting a value that is zero at the known precision".into(),
            ));
        }
        let m = ppow(self.p, self.r);
        let u = inv_mod(self.u, m).expect("unit part is invertible");
        Ok(PadicScalar {
            v: -self.v,
            u,
            ..*self
        })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(*self * o.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { *self };
        let mut e = e.unsigned_abs();
        let mut acc = PadicScalar::from_i128(self.p, self.cap, 1);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b;
            }
            b = b * b;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_exact_zero() {
            return *self;
        }
        PadicScalar {
            v: self.v + k,
            ..*self
        }
    }

    /// Absolute valuation of `self - other`, bounded by the known precision.
    pub fn agreement(&self, other: &Self) -> i64 {
        let d = *self - *other;
        match d.valuation() {
            Some(v) => v,
            None => d.abs_prec(),
        }
    }

    /// Residue of a p-adic integer modulo `p`.
    pub fn residue_mod_p(&self) -> Result<u64> {
        match self.valuation() {
            None if self.abs_prec() >= 1 => Ok(0),
            None => Err(Error::InsufficientPrecision("residue unknown".into())),
            Some(v) if v > 0 => Ok(0),
            Some(0) => Ok(self.u % self.p as u64),
            Some(_) => Err(Error::Domain("not a p-adic integer".into())),
        }
    }

    /// Integer representative in `[0, p^k)` of a p-adic integer known mod `p^k`.
    pub fn residue_mod_pk(&self, k: u32) -> Result<u64> {
        if self.abs_prec() < k as i64 {
            return Err(Error::InsufficientPrecision(format!(
                "value known only mod p^{}",
                self.abs_prec()
            )));
        }
        match self.valuation() {
            None => Ok(0),
            Some(v) if v < 0 => Err(Error::Domain("not a p-adic integer".into())),
            Some(v) if v >= k as i64 => Ok(0),
            Some(v) => {
                let v = v as u32;
                Ok((self.u % ppow(self.p, k - v)) * ppow(self.p, v))
            }
        }
    }

    /// Signed representative `n` with `|n| < p^r/2` times `p^v`, when it fits.
    pub fn to_rational_guess(&self) -> Option<(i128, i64)> {
        let v = self.valuation()?;
        let m = ppow(self.p, self.r) as i128;
        let mut n = self.u as i128;
        if n > m / 2 {
            n -= m;
        }
        Some((n, v))
    }
}

impl PartialEq for PadicScalar {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && (*self - *o).is_zero()
    }
}

impl Add for PadicScalar {
    type Output = PadicScalar;
    fn add(self, o: Self) -> Self {
        self.add_impl(&o)
    }
}

impl Sub for PadicScalar {
    type Output = PadicScalar;
    fn sub(self, o: Self) -> Self {
        self.add_impl(&(-o))
    }
}

impl Mul for PadicScalar {
    type Output = PadicScalar;
    fn mul(self, o: Self) -> Self {
        self.mul_impl(&o)
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> Self {
        if self.r == 0 {
            return self;
        }
        let m = ppow(self.p, self.r);
        PadicScalar {
            u: m - self.u,
            ..self
        }
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return write!(f, "0");
        }
        match self.to_rational_guess() {
            None => write!(f, "O({}^{})", self.p, self.v),
            Some((n, v)) => {
                let abs = self.abs_prec();
                match v.cmp(&0) {
                    Ordering::Equal => write!(f, "{n} + O({}^{abs})", self.p),
                    _ => write!(f, "{n}*{}^{v} + O({}^{abs})", self.p, self.p),
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarRepr {
    p: u32,
    v: i64,
    u: String,
    #[serde(rename = "M")]
    m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<u32>,
}

impl Serialize for PadicScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = if self.is_exact_zero() { 0 } else { self.v };
        ScalarRepr {
            p: self.p,
            v,
            u: self.u.to_string(),
            m: self.cap,
            r: (self.r != self.cap).then_some(self.r),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rep = ScalarRepr::deserialize(d)?;
        let u: u64 = rep.u.parse().map_err(D::Error::custom)?;
        if !is_prime(rep.p) || rep.m == 0 || rep.m > PadicCtx::max_prec(rep.p) {
            return Err(D::Error::custom("bad prime or precision"));
        }
        let r = rep.r.unwrap_or(rep.m);
        if u == 0 {
            if r == rep.m {
                return Ok(PadicScalar::exact_zero(rep.p, rep.m));
            }
            return Ok(PadicScalar::zero_at(rep.p, rep.m, rep.v));
        }
        PadicScalar::from_parts(rep.p, rep.m, rep.v, u, r).map_err(D::Error::custom)
    }
}

/// Teichmüller lift of `a mod p`: the (p-1)-st root of unity congruent to `a`.
pub fn teichmuller(ctx: &PadicCtx, a: i64) -> Result<PadicScalar> {
    let p = ctx.p as i64;
    let a = a.rem_euclid(p);
    if a == 0 {
        return Err(Error::Domain("Teichmüller lift of a non-unit".into()));
    }
    let mut x = ctx.int(a);
    for _ in 0..=ctx.prec + 1 {
        let y = x.pow(p)?;
        if y == x {
            return Ok(x);
        }
        x = y;
    }
    Ok(x)
}

/// `floor(log_p(k))` for `k >= 1`.
pub(crate) fn ilog_p(p: u32, k: u64) -> i64 {
    let mut e = 0;
    let mut q = k;
    while q >= p as u64 {
        q /= p as u64;
        e += 1;
    }
    e
}

/// p-adic logarithm of a unit, after removing its Teichmüller factor.
pub fn padic_log(x: &PadicScalar) -> Result<PadicScalar> {
    let ctx = x.ctx();
    match x.valuation() {
        Some(0) => {}
        Some(_) => return Err(Error::Domain("logarithm of a non-unit".into())),
        None => {
            return Err(Error::InsufficientPrecision(
                "logarithm of a value zero at precision".into(),
            ))
        }
    }
    let p = ctx.p;
    let w = if p == 2 {
        if x.residue_mod_pk(2.min(x.rel_prec()))? % 4 == 3 {
            -*x
        } else {
            *x
        }
    } else {
        let a = x.residue_mod_p()? as i64;
        *x * teichmuller(&ctx, a)?.inv()?
    };
    let y = w - ctx.one();
    let vy = match y.valuation() {
        None => return Ok(PadicScalar::zero_at(p, ctx.prec, y.abs_prec())),
        Some(v) => v,
    };
    if vy < 1 || (p == 2 && vy < 2) {
        return Err(Error::Domain("argument is not a principal unit".into()));
    }
    let target = y.abs_prec();
    let mut sum = ctx.zero();
    let mut power = ctx.one();
    let mut k: i64 = 1;
    loop {
        power = power * y;
        let term = power.div(&ctx.int(k))?;
        sum = if k % 2 == 1 { sum + term } else { sum - term };
        k += 1;
        if k * vy - ilog_p(p, k as u64) >= target
            && (k + 1) * vy - ilog_p(p, (k + 1) as u64) >= target
        {
            let mut tail_ok = true;
            for j in k..k + 2 * p as i64 {
                if j * vy - ilog_p(p, j as u64) < target {
                    tail_ok = false;
                }
            }
            if tail_ok {
                break;
            }
        }
    }
    Ok(sum.cap_abs(target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: u32, m: u32) -> PadicCtx {
        PadicCtx::new(p, m).unwrap()
    }

    #[test]
    fn inverse_pairs() {
        let k = c(3, 10);
        let three = k.int(3);
        let prod = three * three.inv().unwrap();
        assert_eq!(prod, k.one());
        let a = k.int(7);
        assert_eq!(a * k.one(), a);
    }

    #[test]
    fn inverse_of_two_mod_25() {
        let k = c(5, 2);
        let h = k.int(2).inv().unwrap();
        assert_eq!(h.residue_mod_pk(2).unwrap(), 13);
    }

    #[test]
    fn teichmuller_frozen() {
        let k = c(5, 4);
        let t = teichmuller(&k, 2).unwrap();
        assert_eq!(t.residue_mod_pk(4).unwrap(), 182);
        assert_eq!(t.pow(4).unwrap(), k.one());
    }

    #[test]
    fn zero_at_precision_cannot_invert() {
        let k = c(3, 5);
        let z = k.int(1) - k.int(1);
        assert!(z.is_zero());
        assert!(matches!(z.inv(), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn cancellation_tracks_absolute_precision() {
        let k = c(3, 6);
        let a = k.int(1 + 27);
        let b = k.int(1);
        let d = a - b;
        assert_eq!(d.valuation(), Some(3));
        assert_eq!(d.abs_prec(), 6);
        assert_eq!(d.loss(), 3);
    }

    #[test]
    fn log_homomorphism() {
        let k = c(3, 12);
        let a = k.int(4);
        let la = padic_log(&a).unwrap();
        let l3 = padic_log(&a.pow(3).unwrap()).unwrap();
        assert!(l3.agreement(&(la * k.int(3))) >= 12);
        assert!(padic_log(&k.one()).unwrap().is_zero());
    }

    #[test]
    fn log_kills_torsion() {
        let k = c(5, 10);
        let t = teichmuller(&k, 3).unwrap();
        assert!(padic_log(&t).unwrap().is_zero());
        let k2 = c(2, 20);
        assert!(padic_log(&k2.int(-1)).unwrap().is_zero());
        let l5 = padic_log(&k2.int(5)).unwrap();
        assert_eq!(l5.valuation(), Some(2));
    }

    #[test]
    fn json_round_trip() {
        let k = c(5, 8);
        let x = k.rational(-7, 25).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let y: PadicScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }
}
