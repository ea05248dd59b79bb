//! Arithmetic in Q_p(ζ_{p^n}) on the power basis 1, ζ, …, ζ^{d-1}.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::padic::{ppow, PadicCtx, PadicScalar};

/// Degree of the p^n-th cyclotomic field over Q_p.
pub fn cyclo_dim(p: u32, n: u32) -> usize {
    if n == 0 {
        1
    } else {
        (ppow(p, n - 1) * (p as u64 - 1)) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycloElement {
    ctx: PadicCtx,
    n: u32,
    coeffs: Vec<PadicScalar>,
}

impl CycloElement {
    pub fn zero(ctx: &PadicCtx, n: u32) -> Self {
        CycloElement {
            ctx: *ctx,
            n,
            coeffs: vec![ctx.zero(); cyclo_dim(ctx.p, n)],
        }
    }

    pub fn scalar(ctx: &PadicCtx, n: u32, s: PadicScalar) -> Self {
        let mut z = Self::zero(ctx, n);
        z.coeffs[0] = s;
        z
    }

    pub fn one(ctx: &PadicCtx, n: u32) -> Self {
        Self::scalar(ctx, n, ctx.one())
    }

    /// ζ_{p^n}^i for any integer exponent.
    pub fn zeta_pow(ctx: &PadicCtx, n: u32, i: i64) -> Self {
        Self::from_exponents(ctx, n, [(i, ctx.one())])
    }

    /// Σ c·ζ^e over arbitrary integer exponents.
    pub fn from_exponents<I>(ctx: &PadicCtx, n: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, PadicScalar)>,
    {
        let order = ppow(ctx.p, n) as i64;
        let mut raw = vec![ctx.zero(); order as usize];
        for (e, c) in terms {
            let k = e.rem_euclid(order) as usize;
            raw[k] = raw[k] + c;
        }
        Self::reduce(ctx, n, raw)
    }

    /// Coefficients on the power basis; length must equal the field degree.
    pub fn from_coeffs(ctx: &PadicCtx, n: u32, coeffs: Vec<PadicScalar>) -> Result<Self> {
        if coeffs.len() != cyclo_dim(ctx.p, n) {
            return Err(Error::Mismatch(format!(
                "level {n} needs {} coefficients, got {}",
                cyclo_dim(ctx.p, n),
                coeffs.len()
            )));
        }
        Ok(CycloElement {
            ctx: *ctx,
            n,
            coeffs,
        })
    }

    /// Reduces a vector indexed by exponents in `0..p^n` modulo Φ_{p^n}.
    fn reduce(ctx: &PadicCtx, n: u32, mut raw: Vec<PadicScalar>) -> Self {
        let d = cyclo_dim(ctx.p, n);
        if n == 0 {
            let s = raw.iter().fold(ctx.zero(), |a, b| a + *b);
            return Self::scalar(ctx, 0, s);
        }
        let s = ppow(ctx.p, n - 1) as usize;
        for e in d..raw.len() {
            let c = raw[e];
            if c.is_exact_zero() {
                continue;
            }
            let r = e - d;
            for j in 0..(ctx.p as usize - 1) {
                raw[j * s + r] = raw[j * s + r] - c;
            }
        }
        raw.truncate(d);
        CycloElement {
            ctx: *ctx,
            n,
            coeffs: raw,
        }
    }

    pub fn ctx(&self) -> PadicCtx {
        self.ctx
    }
    pub fn level(&self) -> u32 {
        self.n
    }
    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.ctx.p, o.ctx.p, "mixed primes");
        assert_eq!(self.n, o.n, "mixed cyclotomic levels");
    }

    pub fn scale(&self, s: PadicScalar) -> Self {
        CycloElement {
            coeffs: self.coeffs.iter().map(|c| *c * s).collect(),
            ..self.clone()
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one(&self.ctx, self.n);
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The element as a scalar if it lies in Q_p to the known precision.
    pub fn to_scalar(&self) -> Option<PadicScalar> {
        self.coeffs[1..]
            .iter()
            .all(|c| c.is_zero())
            .then_some(self.coeffs[0])
    }

    /// Absolute p-adic agreement, taken coefficientwise on the power basis.
    pub fn agreement(&self, o: &Self) -> i64 {
        self.check(o);
        self.coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a.agreement(b))
            .min()
            .unwrap_or(crate::padic::EXACT)
    }

    /// Smallest relative precision among the nonzero coefficients.
    pub fn min_rel_prec(&self) -> u32 {
        self.coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.rel_prec())
            .min()
            .unwrap_or(self.ctx.prec)
    }

    /// σ_a: ζ ↦ ζ^a.
    pub fn sigma(&self, a: i64) -> Result<Self> {
        if a.rem_euclid(self.ctx.p as i64) == 0 {
            return Err(Error::Domain(format!("{a} is not a unit mod {}", self.ctx.p)));
        }
        Ok(Self::from_exponents(
            &self.ctx,
            self.n,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (a * i as i64, *c)),
        ))
    }

    /// Trace down to Q_p, using Tr(ζ^i) in closed form.
    pub fn trace_to_base(&self) -> PadicScalar {
        let ctx = self.ctx;
        if self.n == 0 {
            return self.coeffs[0];
        }
        let d = self.dim() as i64;
        let s = ppow(ctx.p, self.n - 1) as usize;
        let mut acc = self.coeffs[0] * ctx.int(d);
        let minus_s = ctx.int(-(s as i64));
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            if i % s == 0 {
                acc = acc + *c * minus_s;
            }
        }
        acc
    }

    /// Sum of all Galois conjugates, computed by brute force.
    pub fn trace_brute(&self) -> PadicScalar {
        let order = ppow(self.ctx.p, self.n) as i64;
        let mut acc = Self::zero(&self.ctx, self.n);
        for a in 1..=order.max(1) {
            if a % self.ctx.p as i64 != 0 || self.n == 0 {
                acc = &acc + &self.sigma(a).expect("unit");
            }
            if self.n == 0 {
                break;
            }
        }
        acc.to_scalar().expect("trace lies in Q_p")
    }

    /// Image in level `m ≥ n` via ζ_{p^n} = ζ_{p^m}^{p^{m-n}}.
    pub fn embed(&self, m: u32) -> Result<Self> {
        if m < self.n {
            return Err(Error::Domain(format!("cannot embed level {} into {m}", self.n)));
        }
        if m == self.n {
            return Ok(self.clone());
        }
        let step = ppow(self.ctx.p, m - self.n) as i64;
        if self.n == 0 {
            return Ok(Self::scalar(&self.ctx, m, self.coeffs[0]));
        }
        Ok(Self::from_exponents(
            &self.ctx,
            m,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (i as i64 * step, *c)),
        ))
    }

    /// Relative trace from level n to level n-1.
    pub fn trace_down(&self) -> Result<Self> {
        let ctx = self.ctx;
        let p = ctx.p as usize;
        match self.n {
            0 => Err(Error::Domain("level 0 has no lower level".into())),
            1 => {
                let mut s = self.coeffs[0] * ctx.int(p as i64 - 1);
                for c in &self.coeffs[1..] {
                    s = s - *c;
                }
                Ok(Self::scalar(&ctx, 0, s))
            }
            n => {
                let pp = ctx.int(p as i64);
                Ok(Self::from_exponents(
                    &ctx,
                    n - 1,
                    self.coeffs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i % p == 0)
                        .map(|(i, c)| ((i / p) as i64, *c * pp)),
                ))
            }
        }
    }

    /// Projection to level `m ≤ n`: normalized trace, the identity on elements
    /// already lying in the smaller field.
    pub fn descend(&self, m: u32) -> Result<Self> {
        if m > self.n {
            return Err(Error::Domain(format!("cannot descend level {} to {m}", self.n)));
        }
        let mut x = self.clone();
        while x.n > m {
            let deg = if x.n == 1 { x.ctx.p as i64 - 1 } else { x.ctx.p as i64 };
            x = x.trace_down()?.scale(x.ctx.int(deg).inv()?);
        }
        Ok(x)
    }

    fn mul_matrix(&self) -> linalg::Matrix {
        let d = self.dim();
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let b = Self::zeta_pow(&self.ctx, self.n, j as i64);
            cols.push((self * &b).coeffs);
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
    }

    /// Multiplicative inverse through a linear solve of the multiplication map.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InsufficientPrecision(
                "inverting a cyclotomic element that is zero at precision".into(),
            ));
        }
        if self.n == 0 {
            return Ok(Self::scalar(&self.ctx, 0, self.coeffs[0].inv()?));
        }
        let m = self.mul_matrix();
        let mut rhs = vec![self.ctx.zero(); self.dim()];
        rhs[0] = self.ctx.one();
        let x = linalg::solve(&m, &rhs)?;
        Self::from_coeffs(&self.ctx, self.n, x)
    }

    /// 1/(ζ_{p^n} - 1) in closed form.
    pub fn inv_zeta_minus_one(ctx: &PadicCtx, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ζ_1 - 1 = 0".into()));
        }
        let p = ctx.p as i64;
        let inv_p = ctx.int(p).inv()?;
        let step = ppow(ctx.p, n - 1) as i64;
        let base = Self::from_exponents(
            ctx,
            n,
            (1..p).map(|j| (j * step, ctx.int(j) * inv_p)),
        );
        let geo = Self::from_exponents(ctx, n, (0..step).map(|i| (i, ctx.one())));
        Ok(&base * &geo)
    }

    /// Valuation normalized so that v(p) = 1, as the fraction `num / den`
    /// with `den` the ramification index; `None` if zero at precision.
    pub fn valuation(&self) -> Option<(i64, i64)> {
        let d = self.dim() as i64;
        if self.n == 0 {
            return self.coeffs[0].valuation().map(|v| (v, 1));
        }
        let ctx = self.ctx;
        let mut shifted = vec![ctx.zero(); self.dim()];
        // Taylor shift X = 1 + Y.
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            let mut b: i128 = 1;
            for j in 0..=i {
                shifted[j] = shifted[j] + *c * PadicScalar::from_i128(ctx.p, ctx.prec, b);
                b = b * (i - j) as i128 / (j + 1) as i128;
            }
        }
        shifted
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.valuation().map(|v| v * d + j as i64))
            .min()
            .map(|num| (num, d))
    }
}

impl<'a> Add<&'a CycloElement> for &'a CycloElement {
    type Output = CycloElement;
    fn add(self, o: &CycloElement) -> CycloElement {
        self.check(o);
        CycloElement {
            ctx: self.ctx,
            n: self.n,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<'a> Sub<&'a CycloElement> for &'a CycloElement {
    type Output = CycloElement;
    fn sub(self, o: &CycloElement) -> CycloElement {
        self.check(o);
        CycloElement {
            ctx: self.ctx,
            n: self.n,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<'a> Mul<&'a CycloElement> for &'a CycloElement {
    type Output = CycloElement;
    fn mul(self, o: &CycloElement) -> CycloElement {
        self.check(o);
        let ctx = self.ctx;
        let d = self.dim();
        let mut raw = vec![ctx.zero(); (ppow(ctx.p, self.n) as usize).max(2 * d - 1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                raw[i + j] = raw[i + j] + *a * *b;
            }
        }
        let order = ppow(ctx.p, self.n) as usize;
        if raw.len() > order {
            for e in order..raw.len() {
                let c = raw[e];
                raw[e - order] = raw[e - order] + c;
            }
            raw.truncate(order);
        }
        CycloElement::reduce(&ctx, self.n, raw)
    }
}

impl Neg for &CycloElement {
    type Output = CycloElement;
    fn neg(self) -> CycloElement {
        CycloElement {
            coeffs: self.coeffs.iter().map(|c| -*c).collect(),
            ..self.clone()
        }
    }
}

impl fmt::Display for CycloElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*z")?,
                _ => write!(f, "({c})*z^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CycloRepr {
    p: u32,
    n: u32,
    coeffs: Vec<PadicScalar>,
}

impl Serialize for CycloElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycloRepr {
            p: self.ctx.p,
            n: self.n,
            coeffs: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rep = CycloRepr::deserialize(d)?;
        let first = rep
            .coeffs
            .first()
            .ok_or_else(|| D::Error::custom("empty coefficient list"))?;
        if first.prime() != rep.p {
            return Err(D::Error::custom("prime mismatch"));
        }
        CycloElement::from_coeffs(&first.ctx(), rep.n, rep.coeffs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u32) -> PadicCtx {
        PadicCtx::new(p, 12).unwrap()
    }

    #[test]
    fn sigma_two_on_zeta3() {
        let c = k(3);
        let z = CycloElement::zeta_pow(&c, 1, 1);
        let expect =
            CycloElement::from_coeffs(&c, 1, vec![c.int(-1), c.int(-1)]).unwrap();
        assert_eq!(z.sigma(2).unwrap(), expect);
    }

    #[test]
    fn traces() {
        let c = k(3);
        assert_eq!(CycloElement::one(&c, 2).trace_to_base(), c.int(6));
        assert_eq!(CycloElement::zeta_pow(&c, 1, 1).trace_to_base(), c.int(-1));
        assert!(CycloElement::zeta_pow(&c, 2, 1).trace_to_base().is_zero());
        for i in 0..9 {
            let z = CycloElement::zeta_pow(&c, 2, i);
            assert_eq!(z.trace_to_base(), z.trace_brute());
        }
    }

    #[test]
    fn gauss_square_at_three() {
        let c = k(3);
        let g = &CycloElement::zeta_pow(&c, 1, 1) - &CycloElement::zeta_pow(&c, 1, 2);
        assert_eq!(&g * &g, CycloElement::scalar(&c, 1, c.int(-3)));
    }

    #[test]
    fn closed_form_inverse_of_zeta_minus_one() {
        for p in [2, 3, 5] {
            let c = k(p);
            for n in 1..=3 {
                let w = &CycloElement::zeta_pow(&c, n, 1) - &CycloElement::one(&c, n);
                let prod = &w * &CycloElement::inv_zeta_minus_one(&c, n).unwrap();
                assert!(prod.agreement(&CycloElement::one(&c, n)) >= 10, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn embed_then_descend_is_identity() {
        let c = k(5);
        let x = CycloElement::from_exponents(&c, 1, [(1, c.int(3)), (3, c.int(-2))]);
        let y = x.embed(2).unwrap().descend(1).unwrap();
        assert!(y.agreement(&x) >= 11);
    }

    #[test]
    fn valuation_of_uniformizer() {
        let c = k(3);
        let w = &CycloElement::zeta_pow(&c, 2, 1) - &CycloElement::one(&c, 2);
        assert_eq!(w.valuation(), Some((1, 6)));
        let inv = w.inv().unwrap();
        assert!((&inv * &w).agreement(&CycloElement::one(&c, 2)) >= 10);
    }
}
