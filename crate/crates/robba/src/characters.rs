//! Rank-one characters of Q_p^×, conductors, Gauss-sum ε-constants and the
//! scalars entering the explicit reciprocity formulas.
//!
//! A character is `δ = δ̃ · x^k` with δ̃ of finite order on Z_p^× and
//! `δ(p)` stored as a scalar that already includes the factor `p^k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cyclo::CycloElement;
use crate::error::{Error, Result};
use crate::padic::{ppow, teichmuller, PadicCtx, PadicScalar};

/// Finite-order part on (Z/p^m Z)^×.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FinitePart {
    /// p odd: δ̃(g^l) = T(g)^{el} ζ_{p^{m-1}}^{el} for the fixed generator g.
    Odd { e: u64 },
    /// p = 2: δ̃(-1) = (-1)^s and δ̃(5) = ζ_{2^{m-2}}^b.
    Two { s: u32, b: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PadicCharacter {
    ctx: PadicCtx,
    dp: PadicScalar,
    fin: FinitePart,
    m: u32,
    k: i64,
}

/// Smallest primitive root modulo p² (hence modulo every p^m), p odd.
pub fn generator(p: u32) -> u64 {
    let p2 = ppow(p, 2);
    let q = p2 - p as u64;
    let factors: Vec<u64> = (2..=q).filter(|d| q % d == 0 && is_small_prime(*d)).collect();
    (2..p2)
        .find(|g| g % p as u64 != 0 && factors.iter().all(|f| pow_mod(*g, q / f, p2) != 1))
        .expect("cyclic group has a generator")
}

fn is_small_prime(n: u64) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn pow_mod(b: u64, e: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut b = b as u128 % m as u128;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    acc as u64
}

/// Discrete logarithm of a unit modulo `modulus` to base `g`, by stepping.
fn dlog(a: u64, g: u64, modulus: u64, order: u64) -> u64 {
    let mut x = 1u64;
    for l in 0..order {
        if x == a % modulus {
            return l;
        }
        x = (x as u128 * g as u128 % modulus as u128) as u64;
    }
    panic!("{a} is not a power of {g} mod {modulus}")
}

fn v_p(p: u64, mut x: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Γ*(r): (r-1)! for r ≥ 1 and (-1)^r/(-r)! for r ≤ 0.
pub fn gamma_star(ctx: &PadicCtx, r: i64) -> Result<PadicScalar> {
    let fact = |n: i64| (1..=n).fold(ctx.one(), |a, j| a * ctx.int(j));
    if r >= 1 {
        Ok(fact(r - 1))
    } else {
        let s = if r % 2 == 0 { ctx.one() } else { ctx.int(-1) };
        Ok(s * fact(-r).inv()?)
    }
}

impl PadicCharacter {
    pub fn new(ctx: &PadicCtx, dp: PadicScalar, fin: FinitePart, m: u32, k: i64) -> Result<Self> {
        let q = Self::group_order(ctx.p, m);
        let fin = match (ctx.p, fin) {
            (2, FinitePart::Two { s, b }) => {
                let ob = if m >= 2 { ppow(2, m - 2) } else { 1 };
                if m < 2 && s % 2 == 1 {
                    return Err(Error::Domain("δ̃(-1) = -1 needs level ≥ 2 at p = 2".into()));
                }
                FinitePart::Two {
                    s: s % 2,
                    b: b % ob,
                }
            }
            (2, _) => return Err(Error::Domain("p = 2 needs the (s, b) finite part".into())),
            (_, FinitePart::Odd { e }) => FinitePart::Odd { e: e % q },
            (_, _) => return Err(Error::Domain("odd p needs an exponent finite part".into())),
        };
        if dp.is_zero() {
            return Err(Error::Domain("δ(p) must be nonzero".into()));
        }
        Ok(PadicCharacter {
            ctx: *ctx,
            dp,
            fin,
            m,
            k,
        })
    }

    /// Unramified twist of x^k with the given δ(p).
    pub fn unramified(ctx: &PadicCtx, dp: PadicScalar, k: i64) -> Result<Self> {
        let fin = if ctx.p == 2 {
            FinitePart::Two { s: 0, b: 0 }
        } else {
            FinitePart::Odd { e: 0 }
        };
        Self::new(ctx, dp, fin, 0, k)
    }

    pub fn group_order(p: u32, m: u32) -> u64 {
        if m == 0 {
            1
        } else if p == 2 {
            ppow(2, m - 1)
        } else {
            (p as u64 - 1) * ppow(p, m - 1)
        }
    }

    pub fn ctx(&self) -> PadicCtx {
        self.ctx
    }
    pub fn weight(&self) -> i64 {
        self.k
    }
    pub fn level(&self) -> u32 {
        self.m
    }
    pub fn finite_part(&self) -> FinitePart {
        self.fin
    }
    /// δ(p), including the p^k of the weight.
    pub fn value_at_p(&self) -> PadicScalar {
        self.dp
    }
    /// δ(p)·p^{-k}, the value at p of the locally constant part.
    pub fn dlc_p(&self) -> PadicScalar {
        self.dp * self.ctx.p_pow(-self.k)
    }

    /// Cyclotomic level in which the finite-part values live.
    pub fn value_level(&self) -> u32 {
        let sub = if self.ctx.p == 2 { 2 } else { 1 };
        self.m.saturating_sub(sub)
    }

    /// δ̃(a) for an integer a prime to p.
    pub fn fin_value(&self, a: i64) -> Result<CycloElement> {
        let ctx = self.ctx;
        let p = ctx.p as i64;
        if a.rem_euclid(p) == 0 {
            return Err(Error::Domain(format!("{a} is not a unit")));
        }
        let lvl = self.value_level();
        if self.m == 0 {
            return Ok(CycloElement::one(&ctx, 0));
        }
        let modulus = ppow(ctx.p, self.m);
        let ar = a.rem_euclid(modulus as i64) as u64;
        match self.fin {
            FinitePart::Odd { e } => {
                let g = generator(ctx.p);
                let q = Self::group_order(ctx.p, self.m);
                let l = dlog(ar, g, modulus, q);
                let t = teichmuller(&ctx, a)?.pow(e as i64)?;
                let z = CycloElement::zeta_pow(&ctx, lvl, ((e as u128 * l as u128) % ppow(ctx.p, lvl) as u128) as i64);
                Ok(z.scale(t))
            }
            FinitePart::Two { s, b } => {
                let (neg, u) = if ar % 4 == 1 { (false, ar) } else { (s == 1, modulus - ar) };
                let l = if self.m >= 2 {
                    dlog(u % modulus, 5, modulus, ppow(2, self.m - 2))
                } else {
                    0
                };
                let order = ppow(2, lvl) as u128;
                let z = CycloElement::zeta_pow(&ctx, lvl, ((b as u128 * l as u128) % order) as i64);
                Ok(if neg { -&z } else { z })
            }
        }
    }

    /// δ̃(-1) as ±1.
    pub fn fin_sign(&self) -> Result<PadicScalar> {
        self.fin_value(-1)?
            .to_scalar()
            .ok_or_else(|| Error::Domain("δ̃(-1) is not ±1".into()))
    }

    /// δ(-1) = δ̃(-1)·(-1)^k.
    pub fn value_at_minus_one(&self) -> Result<PadicScalar> {
        let s = self.fin_sign()?;
        Ok(if self.k.rem_euclid(2) == 1 { -s } else { s })
    }

    /// δ(a) for a unit integer a: δ̃(a)·a^k.
    pub fn value_on_unit(&self, a: i64) -> Result<CycloElement> {
        Ok(self.fin_value(a)?.scale(self.ctx.int(a).pow(self.k)?))
    }

    pub fn conductor(&self) -> u32 {
        let p = self.ctx.p as u64;
        if self.m == 0 {
            return 0;
        }
        match self.fin {
            FinitePart::Odd { e } => {
                let mm = self.m - 1;
                let c = mm - v_p(p, e).min(mm);
                if c >= 1 {
                    c + 1
                } else if e % (p - 1) != 0 {
                    1
                } else {
                    0
                }
            }
            FinitePart::Two { s, b } => {
                let mm = self.m.saturating_sub(2);
                let c = mm - v_p(2, b).min(mm);
                if c >= 1 {
                    c + 2
                } else if s == 1 {
                    2
                } else {
                    0
                }
            }
        }
    }

    pub fn is_crystalline(&self) -> bool {
        self.conductor() == 0
    }

    /// False exactly for x^{-j} and x^{j+1}|x| with j ≥ 0.
    pub fn is_generic(&self) -> bool {
        if self.conductor() != 0 {
            return true;
        }
        let d = self.dlc_p();
        if self.k <= 0 {
            !(d - self.ctx.one()).is_zero()
        } else {
            !(d * self.ctx.int(self.ctx.p as i64) - self.ctx.one()).is_zero()
        }
    }

    fn inverted_fin(&self) -> FinitePart {
        match self.fin {
            FinitePart::Odd { e } => {
                let q = Self::group_order(self.ctx.p, self.m);
                FinitePart::Odd { e: (q - e % q) % q }
            }
            FinitePart::Two { s, b } => {
                let ob = if self.m >= 2 { ppow(2, self.m - 2) } else { 1 };
                FinitePart::Two {
                    s,
                    b: (ob - b % ob) % ob,
                }
            }
        }
    }

    /// δ^{-1}|x|.
    pub fn dual(&self) -> Result<Self> {
        let dp = self.dp.inv()? * self.ctx.p_pow(-1);
        Self::new(&self.ctx, dp, self.inverted_fin(), self.m, -self.k)
    }

    /// δ* = δ^{-1}·x|x|.
    pub fn star(&self) -> Result<Self> {
        Self::new(&self.ctx, self.dp.inv()?, self.inverted_fin(), self.m, 1 - self.k)
    }

    /// δ·x.
    pub fn times_x(&self) -> Self {
        PadicCharacter {
            dp: self.dp * self.ctx.int(self.ctx.p as i64),
            k: self.k + 1,
            ..self.clone()
        }
    }

    /// Product of characters on the same level.
    pub fn product(&self, o: &Self) -> Result<Self> {
        if self.m != o.m {
            return Err(Error::Mismatch("characters of different levels".into()));
        }
        let fin = match (self.fin, o.fin) {
            (FinitePart::Odd { e: a }, FinitePart::Odd { e: b }) => FinitePart::Odd { e: a + b },
            (FinitePart::Two { s: s1, b: b1 }, FinitePart::Two { s: s2, b: b2 }) => {
                FinitePart::Two { s: s1 + s2, b: b1 + b2 }
            }
            _ => return Err(Error::Mismatch("finite parts of different shapes".into())),
        };
        Self::new(&self.ctx, self.dp * o.dp, fin, self.m, self.k + o.k)
    }

    /// ε(δ, ζ^a), in the cyclotomic level n(δ).
    pub fn epsilon(&self, a: i64) -> Result<CycloElement> {
        let ctx = self.ctx;
        let p = ctx.p as i64;
        if a.rem_euclid(p) == 0 {
            return Err(Error::Domain(format!("ζ^{a} is not a basis")));
        }
        let n = self.conductor();
        if n == 0 {
            return Ok(CycloElement::one(&ctx, 0));
        }
        let w = n.max(self.value_level());
        let order = ppow(ctx.p, n) as i64;
        let step = ppow(ctx.p, w - n) as i64;
        let mut sum = CycloElement::zero(&ctx, w);
        for i in 1..order {
            if i % p == 0 {
                continue;
            }
            let v = self.fin_value(i)?.inv()?.embed(w)?;
            let z = CycloElement::zeta_pow(&ctx, w, (a * i).rem_euclid(order) * step);
            sum = &sum + &(&v * &z);
        }
        let pre = self.dlc_p().pow(n as i64)?;
        sum.scale(pre).descend(n)
    }

    /// 1 - δ(p)p^{-k}, the Frobenius determinant on D_cris.
    pub fn cris_det(&self) -> Result<PadicScalar> {
        if !self.is_crystalline() {
            return Err(Error::Domain("character is ramified".into()));
        }
        let d = self.ctx.one() - self.dlc_p();
        if d.is_zero() {
            return Err(Error::Exceptional("δ(p)p^{-k} = 1".into()));
        }
        Ok(d)
    }

    /// det(1-φ | D_cris(δ*)) / det(1-φ | D_cris(δ)).
    pub fn cris_ratio(&self) -> Result<PadicScalar> {
        let num = self.star()?.cris_det()?;
        let den = self.cris_det()?;
        num.div(&den)
    }

    /// Γ*(k)·δ(-1)/ε(δ,ζ^a) for n(δ) ≥ 1, Γ*(k)·δ(-1)·ratio for n(δ) = 0.
    pub fn de_rham_scalar(&self, a: i64) -> Result<CycloElement> {
        if !self.is_generic() {
            return Err(Error::Exceptional(format!("{self} is not generic")));
        }
        let g = gamma_star(&self.ctx, self.k)? * self.value_at_minus_one()?;
        if self.is_crystalline() {
            let r = self.cris_ratio()?;
            return Ok(CycloElement::scalar(&self.ctx, 0, g * r));
        }
        Ok(self.epsilon(a)?.inv()?.scale(g))
    }

    /// Pretty form of the Gauss sum defining ε(δ,ζ^a).
    pub fn gauss_sum_form(&self, a: i64) -> String {
        let n = self.conductor();
        if n == 0 {
            return "1".into();
        }
        format!(
            "({})^{n} * sum_{{i in (Z/{}^{n})^x}} d(i)^-1 * zeta_{}^{n}^({a}*i)",
            self.dlc_p(),
            self.ctx.p,
            self.ctx.p
        )
    }

    /// Parses "p=<p>;dp=<a/b | unit u>;fin=<e | s,b | triv>;m=<m>;k=<k>".
    pub fn parse(spec: &str, prec: u32) -> Result<Self> {
        let mut p = None;
        let mut dp = None;
        let mut fin = None;
        let mut m = None;
        let mut k = 0i64;
        for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            let val = val.trim();
            let bad = |what: &str| Error::Parse(format!("bad {what}: {val:?}"));
            match key.trim() {
                "p" => p = Some(val.parse::<u32>().map_err(|_| bad("prime"))?),
                "dp" => dp = Some(val.to_string()),
                "fin" => fin = Some(val.to_string()),
                "m" => m = Some(val.parse::<u32>().map_err(|_| bad("level"))?),
                "k" => k = val.parse::<i64>().map_err(|_| bad("weight"))?,
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing p".into()))?;
        let ctx = PadicCtx::new(p, prec)?;
        let dp_s = dp.ok_or_else(|| Error::Parse("missing dp".into()))?;
        let dp = parse_rational(&ctx, dp_s.strip_prefix("unit").map_or(&dp_s, str::trim))?;
        let fin_s = fin.unwrap_or_else(|| "triv".into());
        let fin = if fin_s == "triv" {
            if p == 2 {
                FinitePart::Two { s: 0, b: 0 }
            } else {
                FinitePart::Odd { e: 0 }
            }
        } else if p == 2 {
            let (s, b) = fin_s
                .split_once(',')
                .ok_or_else(|| Error::Parse("p = 2 finite part is \"s,b\"".into()))?;
            FinitePart::Two {
                s: s.trim().parse().map_err(|_| Error::Parse(format!("bad sign {s:?}")))?,
                b: b.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {b:?}")))?,
            }
        } else {
            FinitePart::Odd {
                e: fin_s
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent {fin_s:?}")))?,
            }
        };
        let m = m.unwrap_or(if fin_s == "triv" { 0 } else { 1 });
        Self::new(&ctx, dp, fin, m, k)
    }
}

/// Parses "a", "-a" or "a/b" into Q_p.
pub fn parse_rational(ctx: &PadicCtx, s: &str) -> Result<PadicScalar> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            ctx.rational(a, b)
        }
        None => Ok(ctx.int(s.trim().parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for PadicCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fin = match self.fin {
            FinitePart::Odd { e } => e.to_string(),
            FinitePart::Two { s, b } => format!("{s},{b}"),
        };
        let dp = match self.dp.to_rational_guess() {
            Some((n, v)) if (0..20).contains(&v) => format!("{}", n * (self.ctx.p as i128).pow(v as u32)),
            Some((n, v)) if (-20..0).contains(&v) => format!("{n}/{}", (self.ctx.p as i128).pow((-v) as u32)),
            _ => self.dp.to_string(),
        };
        write!(f, "p={};dp={dp};fin={fin};m={};k={}", self.ctx.p, self.m, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u32) -> PadicCtx {
        PadicCtx::new(p, 12).unwrap()
    }

    #[test]
    fn generators() {
        assert_eq!(generator(3), 2);
        assert_eq!(generator(5), 2);
        assert_eq!(generator(7), 3);
    }

    #[test]
    fn conductors() {
        let c = k(3);
        let triv = PadicCharacter::unramified(&c, c.int(2), 0).unwrap();
        assert_eq!(triv.conductor(), 0);
        let omega = PadicCharacter::new(&c, c.one(), FinitePart::Odd { e: 1 }, 1, 0).unwrap();
        assert_eq!(omega.conductor(), 1);
        // Order 3 on (Z/9)^×: exponent 2 of the order-6 group.
        let ch = PadicCharacter::new(&c, c.one(), FinitePart::Odd { e: 2 }, 2, 0).unwrap();
        assert_eq!(ch.conductor(), 2);
        let v = ch.fin_value(4).unwrap();
        assert!(!(&v - &CycloElement::one(&c, 1)).is_zero());
        assert_eq!(ch.fin_value(10).unwrap(), CycloElement::one(&c, 1));
    }

    #[test]
    fn conductors_at_two() {
        let c = k(2);
        let chi4 = PadicCharacter::new(&c, c.one(), FinitePart::Two { s: 1, b: 0 }, 2, 0).unwrap();
        assert_eq!(chi4.conductor(), 2);
        let chi8 = PadicCharacter::new(&c, c.one(), FinitePart::Two { s: 0, b: 1 }, 3, 0).unwrap();
        assert_eq!(chi8.conductor(), 3);
        assert_eq!(chi8.fin_value(5).unwrap().to_scalar(), Some(c.int(-1)));
        assert_eq!(chi8.fin_value(-1).unwrap().to_scalar(), Some(c.one()));
    }

    #[test]
    fn multiplicative_on_units() {
        let c = k(5);
        let ch = PadicCharacter::new(&c, c.one(), FinitePart::Odd { e: 7 }, 2, 0).unwrap();
        for a in [2i64, 3, 7, 11] {
            for b in [3i64, 4, 13] {
                let lhs = ch.fin_value(a * b).unwrap();
                let rhs = &ch.fin_value(a).unwrap() * &ch.fin_value(b).unwrap();
                assert!(lhs.agreement(&rhs) >= 11);
            }
        }
    }

    #[test]
    fn quadratic_gauss_sum_at_three() {
        let c = k(3);
        let dp = c.int(7);
        let ch = PadicCharacter::new(&c, dp, FinitePart::Odd { e: 1 }, 1, 0).unwrap();
        let eps = ch.epsilon(1).unwrap();
        let g = eps.scale(dp.inv().unwrap());
        let want = &CycloElement::zeta_pow(&c, 1, 1) - &CycloElement::zeta_pow(&c, 1, 2);
        assert_eq!(g, want);
        assert_eq!(&g * &g, CycloElement::scalar(&c, 1, c.int(-3)));
    }

    #[test]
    fn unramified_epsilon_is_one() {
        let c = k(5);
        let ch = PadicCharacter::unramified(&c, c.int(3), 2).unwrap();
        assert_eq!(ch.epsilon(1).unwrap(), CycloElement::one(&c, 0));
        assert_eq!(ch.epsilon(2).unwrap(), CycloElement::one(&c, 0));
    }

    #[test]
    fn gamma_star_values() {
        let c = k(5);
        assert_eq!(gamma_star(&c, 1).unwrap(), c.one());
        assert_eq!(gamma_star(&c, 0).unwrap(), c.one());
        assert_eq!(gamma_star(&c, 4).unwrap(), c.int(6));
        assert_eq!(gamma_star(&c, -2).unwrap(), c.rational(1, 2).unwrap());
        for r in [-3i64, -2, -1, 1, 2, 3] {
            let lhs = c.int(r) * gamma_star(&c, r).unwrap();
            assert_eq!(lhs, gamma_star(&c, r + 1).unwrap());
        }
    }

    #[test]
    fn crystalline_ratio_at_weight_zero() {
        let c = k(5);
        let dp = c.int(7);
        let ch = PadicCharacter::unramified(&c, dp, 0).unwrap();
        let want = (c.one() - (c.int(5) * dp).inv().unwrap()).div(&(c.one() - dp)).unwrap();
        assert_eq!(ch.cris_ratio().unwrap(), want);
        let ex = PadicCharacter::unramified(&c, c.int(5), 1).unwrap();
        assert!(matches!(ex.cris_det(), Err(Error::Exceptional(_))));
        assert!(!PadicCharacter::unramified(&c, c.int(5), 2).unwrap().is_generic());
        assert!(!PadicCharacter::unramified(&c, c.one(), 0).unwrap().is_generic());
        assert!(PadicCharacter::unramified(&c, c.int(7), 0).unwrap().is_generic());
    }

    #[test]
    fn parse_round_trip() {
        let ch = PadicCharacter::parse("p=5;dp=3/5;fin=6;m=2;k=-1", 12).unwrap();
        assert_eq!(ch.weight(), -1);
        assert_eq!(ch.conductor(), 2);
        let again = PadicCharacter::parse(&ch.to_string(), 12).unwrap();
        assert_eq!(again.finite_part(), ch.finite_part());
        assert!(PadicCharacter::parse("p=4;dp=1", 12).is_err());
        assert!(PadicCharacter::parse("p=5;dp=x", 12).is_err());
    }
}
