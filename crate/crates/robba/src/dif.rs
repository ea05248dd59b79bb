//! Truncated Laurent series in t over Q_p(ζ_{p^n}) and the localization maps ι_n.

use crate::cyclo::{cyclo_dim, CycloElement};
use crate::error::{Error, Result};
use crate::padic::{PadicCtx, PadicScalar};
use crate::series::{tail_error, SeriesElement};

/// `t^h · Σ_{j<D} c_j t^j` modulo `t^{h+D}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifElement {
    ctx: PadicCtx,
    n: u32,
    h: i64,
    coeffs: Vec<CycloElement>,
}

impl DifElement {
    pub fn zero(ctx: &PadicCtx, n: u32, h: i64, d: usize) -> Self {
        DifElement {
            ctx: *ctx,
            n,
            h,
            coeffs: vec![CycloElement::zero(ctx, n); d],
        }
    }

    pub fn from_coeffs(ctx: &PadicCtx, n: u32, h: i64, coeffs: Vec<CycloElement>) -> Self {
        DifElement {
            ctx: *ctx,
            n,
            h,
            coeffs,
        }
    }

    pub fn constant(c: CycloElement, d: usize) -> Self {
        let ctx = c.ctx();
        let n = c.level();
        let mut z = Self::zero(&ctx, n, 0, d);
        if d > 0 {
            z.coeffs[0] = c;
        }
        z
    }

    pub fn level(&self) -> u32 {
        self.n
    }
    pub fn leading_exponent(&self) -> i64 {
        self.h
    }
    /// Exclusive end of the known t-exponents.
    pub fn end(&self) -> i64 {
        self.h + self.coeffs.len() as i64
    }
    pub fn coeffs(&self) -> &[CycloElement] {
        &self.coeffs
    }

    /// Coefficient of t^j.
    pub fn coeff(&self, j: i64) -> Result<CycloElement> {
        if j >= self.end() {
            return Err(Error::Window {
                what: format!("coefficient of t^{j}"),
                achievable: self.end(),
            });
        }
        if j < self.h {
            return Ok(CycloElement::zero(&self.ctx, self.n));
        }
        Ok(self.coeffs[(j - self.h) as usize].clone())
    }

    /// Value at t = 0; requires no pole.
    pub fn at_t0(&self) -> Result<CycloElement> {
        for j in self.h..0 {
            if !self.coeff(j)?.is_zero() {
                return Err(Error::Domain("element has a pole at t = 0".into()));
            }
        }
        self.coeff(0)
    }

    /// The part with negative t-exponents, as a list indexed from t^h.
    pub fn polar_part(&self) -> Vec<(i64, CycloElement)> {
        (self.h..0.min(self.end()))
            .map(|j| (j, self.coeff(j).expect("known")))
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        let h = self.h.min(o.h);
        let end = self.end().min(o.end());
        let coeffs = (h..end)
            .map(|j| &self.coeff(j).expect("known") + &o.coeff(j).expect("known"))
            .collect();
        Self::from_coeffs(&self.ctx, self.n, h, coeffs)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(self.ctx.int(-1)))
    }

    pub fn scale(&self, s: PadicScalar) -> Self {
        DifElement {
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
            ..self.clone()
        }
    }

    pub fn scale_cyclo(&self, s: &CycloElement) -> Self {
        DifElement {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = self.coeffs.len().min(o.coeffs.len());
        let mut out = vec![CycloElement::zero(&self.ctx, self.n); d];
        for (i, a) in self.coeffs.iter().enumerate().take(d) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(d - i) {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::from_coeffs(&self.ctx, self.n, self.h + o.h, out)
    }

    /// Division by t.
    pub fn div_t(&self) -> Self {
        DifElement {
            h: self.h - 1,
            ..self.clone()
        }
    }

    pub fn agreement(&self, o: &Self) -> i64 {
        let h = self.h.min(o.h);
        let end = self.end().min(o.end());
        (h..end)
            .map(|j| {
                self.coeff(j)
                    .expect("known")
                    .agreement(&o.coeff(j).expect("known"))
            })
            .min()
            .unwrap_or(crate::padic::EXACT)
    }
}

/// ζ_{p^n}·exp(t/p^n) as an element of L_n[[t]]/t^D, split as (ζ, ζ(e^{t/p^n}-1)).
fn exp_parts(ctx: &PadicCtx, n: u32, d: usize) -> Result<(CycloElement, DifElement)> {
    let z = CycloElement::zeta_pow(ctx, n, 1);
    let mut e = DifElement::zero(ctx, n, 0, d);
    let mut coef = ctx.one();
    let step = ctx.p_pow(-(n as i64));
    for j in 1..d {
        coef = coef * step * ctx.int(j as i64).inv()?;
        e.coeffs[j] = z.scale(coef);
    }
    Ok((z, e))
}

/// ι_n(f) in L_n((t)) modulo t^D.
pub fn iota(f: &SeriesElement, n: u32, d: usize) -> Result<DifElement> {
    let ctx = f.ctx();
    if n == 0 || d == 0 {
        return Err(Error::Domain("ι_n needs n ≥ 1 and D ≥ 1".into()));
    }
    let (z, ze) = exp_parts(&ctx, n, d)?;
    let w = CycloElement::inv_zeta_minus_one(&ctx, n)?;
    let zm1 = &z - &CycloElement::one(&ctx, n);
    let u = DifElement::constant(zm1, d).add(&ze);
    let mut out = DifElement::zero(&ctx, n, 0, d);

    if f.lo() < 0 {
        // U^{-1} = w Σ_k (-w ζ(e^{t/p^n}-1))^k, a finite sum modulo t^D.
        let v = ze.scale_cyclo(&w).scale(ctx.int(-1));
        let mut uinv = DifElement::constant(CycloElement::one(&ctx, n), d);
        let mut pw = uinv.clone();
        for _ in 1..d {
            pw = pw.mul(&v);
            uinv = uinv.add(&pw);
        }
        let uinv = uinv.scale_cyclo(&w);
        let mut acc = DifElement::zero(&ctx, n, 0, d);
        for k in f.lo()..0 {
            let c = f.coeff(k)?;
            acc = acc
                .add(&DifElement::constant(CycloElement::scalar(&ctx, n, c), d))
                .mul(&uinv);
        }
        out = out.add(&acc);
    }

    let end = f.stored_end().max(0);
    if f.is_exact() {
        let pos = SeriesElement::from_coeffs(
            &ctx,
            0,
            (0..end).map(|k| f.coeff(k).expect("exact")).collect(),
        );
        let a = pos.to_x_basis()?;
        let mut scale = ctx.one();
        let step = ctx.p_pow(-(n as i64));
        for j in 0..d {
            if j > 0 {
                scale = scale * step * ctx.int(j as i64).inv()?;
            }
            let c = CycloElement::from_exponents(
                &ctx,
                n,
                a.iter().enumerate().map(|(m, am)| {
                    let mj = ctx.int(m as i64).pow(j as i64).expect("nonnegative power");
                    (m as i64, *am * mj)
                }),
            );
            out.coeffs[j] = &out.coeffs[j] + &c.scale(scale);
        }
        return Ok(out);
    }

    let hi = f.valid_end();
    let tb = f.tail().ok_or_else(|| Error::Window {
        what: "ι_n of a truncated series needs a tail bound".into(),
        achievable: hi,
    })?;
    let mut acc = DifElement::zero(&ctx, n, 0, d);
    for k in (0..hi).rev() {
        let c = f.coeff(k)?;
        acc = acc
            .mul(&u)
            .add(&DifElement::constant(CycloElement::scalar(&ctx, n, c), d));
    }
    let dim = cyclo_dim(ctx.p, n) as i64;
    for j in 0..d {
        let loss = n as i64 * j as i64 + (j as i64 + ctx.p as i64 - 2) / (ctx.p as i64 - 1);
        let err = tail_error(ctx.p, tb, hi, dim, j as i64) - loss;
        let capped: Vec<PadicScalar> = acc.coeffs[j].coeffs().iter().map(|c| c.cap_abs(err)).collect();
        acc.coeffs[j] = CycloElement::from_coeffs(&ctx, n, capped)?;
    }
    Ok(out.add(&acc))
}
