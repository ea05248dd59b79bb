//! Laurent series in π over Q_p: the working model of the Robba ring.
//!
//! A series is either an exact Laurent polynomial or a truncated series whose
//! coefficients at exponents `>= hi` are unknown. Operations report the window
//! they can certify and never pad unknown coefficients with zeros.

use serde::{Deserialize, Serialize};

use crate::cyclo::CycloElement;
use crate::error::{Error, Result};
use crate::padic::{ilog_p, ppow, PadicCtx, PadicScalar, EXACT};

/// Bound `v(c_k) >= min_val - log_slope * floor(log_p k)` on unknown coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBound {
    pub min_val: i64,
    pub log_slope: i64,
}

#[derive(Clone, Debug)]
pub struct SeriesElement {
    ctx: PadicCtx,
    lo: i64,
    coeffs: Vec<PadicScalar>,
    hi: Option<i64>,
    tail: Option<TailBound>,
}

/// In-place `a(y) -> a(y + s)` on a dense coefficient vector.
fn taylor_shift(a: &mut [PadicScalar], s: i64) {
    let n = a.len();
    if n < 2 {
        return;
    }
    let ctx = a[0].ctx();
    let sc = ctx.int(s);
    for i in 0..n - 1 {
        for j in (i..n - 1).rev() {
            let t = a[j + 1];
            if t.is_exact_zero() {
                continue;
            }
            a[j] = match s {
                1 => a[j] + t,
                -1 => a[j] - t,
                _ => a[j] + sc * t,
            };
        }
    }
}

fn dense_mul(a: &[PadicScalar], b: &[PadicScalar], keep: usize) -> Vec<PadicScalar> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let ctx = a[0].ctx();
    let len = (a.len() + b.len() - 1).min(keep);
    let mut out = vec![ctx.zero(); len];
    for (i, x) in a.iter().enumerate() {
        if i >= len {
            break;
        }
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            if y.is_exact_zero() {
                continue;
            }
            out[i + j] = out[i + j] + *x * *y;
        }
    }
    out
}

/// Inverse of a power series with nonzero constant term, modulo π^len.
fn dense_inv(u: &[PadicScalar], len: usize) -> Result<Vec<PadicScalar>> {
    let ctx = u[0].ctx();
    let u0inv = u[0].inv()?;
    let mut b = vec![ctx.zero(); len];
    if len == 0 {
        return Ok(b);
    }
    b[0] = u0inv;
    for k in 1..len {
        let mut s = ctx.zero();
        for i in 1..=k.min(u.len() - 1) {
            s = s + u[i] * b[k - i];
        }
        b[k] = -(s * u0inv);
    }
    Ok(b)
}

fn dense_pow(u: &[PadicScalar], e: u64, keep: usize) -> Vec<PadicScalar> {
    let ctx = u[0].ctx();
    let mut acc = vec![ctx.one()];
    let mut base = u[..u.len().min(keep)].to_vec();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = dense_mul(&acc, &base, keep);
        }
        e >>= 1;
        if e > 0 {
            base = dense_mul(&base, &base, keep);
        }
    }
    acc
}

/// Lower bound on the valuation of the unknown tail Σ_{k≥from} c_k π^k at a
/// point of valuation 1/d, less `shift/d`.
pub(crate) fn tail_error(p: u32, tb: TailBound, from: i64, d: i64, shift: i64) -> i64 {
    let at = |k: i64| tb.min_val - tb.log_slope * ilog_p(p, k as u64) + (k - shift).div_euclid(d);
    let from = from.max(1);
    let mut best = at(from);
    // Between consecutive powers of p the bound increases, so only their
    // starting points matter.
    let mut q = 1i64;
    for _ in 0..40 {
        q = q.saturating_mul(p as i64);
        if q > from {
            best = best.min(at(q));
        }
    }
    best
}

impl SeriesElement {
    pub fn zero(ctx: &PadicCtx) -> Self {
        Self::from_coeffs(ctx, 0, Vec::new())
    }

    pub fn constant(ctx: &PadicCtx, c: PadicScalar) -> Self {
        Self::from_coeffs(ctx, 0, vec![c])
    }

    pub fn one(ctx: &PadicCtx) -> Self {
        Self::constant(ctx, ctx.one())
    }

    /// π^k.
    pub fn pi_pow(ctx: &PadicCtx, k: i64) -> Self {
        Self::from_coeffs(ctx, k, vec![ctx.one()])
    }

    /// Exact Laurent polynomial Σ coeffs[i] π^{lo+i}.
    pub fn from_coeffs(ctx: &PadicCtx, lo: i64, coeffs: Vec<PadicScalar>) -> Self {
        let mut s = SeriesElement {
            ctx: *ctx,
            lo,
            coeffs,
            hi: None,
            tail: None,
        };
        s.trim();
        s
    }

    /// Series known only below exponent `hi`.
    pub fn truncated(
        ctx: &PadicCtx,
        lo: i64,
        mut coeffs: Vec<PadicScalar>,
        hi: i64,
        tail: Option<TailBound>,
    ) -> Self {
        let len = (hi - lo).max(0) as usize;
        coeffs.resize(len, ctx.zero());
        SeriesElement {
            ctx: *ctx,
            lo: lo.min(hi),
            coeffs,
            hi: Some(hi),
            tail,
        }
    }

    /// (1+π)^a; exact for a ≥ 0, truncated below `window` otherwise.
    pub fn one_plus_pi_pow(ctx: &PadicCtx, a: i64, window: i64) -> Result<Self> {
        if a >= 0 {
            let mut c = vec![ctx.zero(); a as usize + 1];
            c[a as usize] = ctx.one();
            let mut x = c;
            taylor_shift(&mut x, 1);
            return Ok(Self::from_coeffs(ctx, 0, x));
        }
        let len = window.max(0) as usize;
        let mut c = Vec::with_capacity(len);
        let mut b = ctx.one();
        for k in 0..len as i64 {
            c.push(b);
            b = b * ctx.int(a - k) * ctx.int(k + 1).inv()?;
        }
        Ok(Self::truncated(ctx, 0, c, window.max(0), None))
    }

    /// The element t = log(1+π) below `window`.
    pub fn t(ctx: &PadicCtx, window: i64) -> Result<Self> {
        let mut c = vec![ctx.zero()];
        for k in 1..window.max(1) {
            let v = ctx.int(k).inv()?;
            c.push(if k % 2 == 1 { v } else { -v });
        }
        Ok(Self::truncated(
            ctx,
            0,
            c,
            window.max(1),
            Some(TailBound {
                min_val: 0,
                log_slope: 1,
            }),
        ))
    }

    fn trim(&mut self) {
        if self.hi.is_some() {
            return;
        }
        while self.coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_exact_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.lo = 0;
            return;
        }
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i64;
        }
    }

    pub fn ctx(&self) -> PadicCtx {
        self.ctx
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> Option<i64> {
        self.hi
    }
    pub fn tail(&self) -> Option<TailBound> {
        self.tail
    }
    pub fn is_exact(&self) -> bool {
        self.hi.is_none()
    }
    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }
    pub fn with_tail(mut self, tail: Option<TailBound>) -> Self {
        if self.hi.is_some() {
            self.tail = tail;
        }
        self
    }

    /// First exponent whose coefficient is not known.
    pub fn valid_end(&self) -> i64 {
        self.hi.unwrap_or(EXACT)
    }

    /// Largest exponent stored (exclusive end of storage).
    pub fn stored_end(&self) -> i64 {
        self.lo + self.coeffs.len() as i64
    }

    pub fn is_plus(&self) -> bool {
        self.lo >= 0 || self.coeffs.iter().take((-self.lo) as usize).all(|c| c.is_zero())
    }

    pub fn degree(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then(|| self.stored_end() - 1)
    }

    /// Coefficient of π^k, or a window error if unknown.
    pub fn coeff(&self, k: i64) -> Result<PadicScalar> {
        if k >= self.valid_end() {
            return Err(Error::Window {
                what: format!("coefficient of π^{k}"),
                achievable: self.valid_end(),
            });
        }
        if k < self.lo || k >= self.stored_end() {
            return Ok(self.ctx.zero());
        }
        Ok(self.coeffs[(k - self.lo) as usize])
    }

    /// Coefficients of π^k for k in `0..len` of a series with no pole.
    pub fn dense_from_zero(&self, len: usize) -> Result<Vec<PadicScalar>> {
        if !self.is_plus() {
            return Err(Error::Domain("series has a pole at π = 0".into()));
        }
        (0..len as i64).map(|k| self.coeff(k)).collect()
    }

    /// Forgets everything at exponents `>= w`.
    pub fn truncate(&self, w: i64) -> Self {
        if w >= self.valid_end() {
            return self.clone();
        }
        let lo = self.lo.min(w);
        let coeffs = (lo..w).map(|k| self.coeff(k).expect("known")).collect();
        let tail = self.tail.or_else(|| self.is_exact().then(|| self.exact_tail_bound()));
        Self::truncated(&self.ctx, lo, coeffs, w, tail)
    }

    fn exact_tail_bound(&self) -> TailBound {
        let m = self
            .coeffs
            .iter()
            .map(|c| c.valuation().unwrap_or(c.abs_prec()))
            .min()
            .unwrap_or(EXACT)
            .min(EXACT / 2);
        TailBound {
            min_val: m,
            log_slope: 0,
        }
    }

    pub fn scale(&self, c: PadicScalar) -> Self {
        let mut s = self.clone();
        for x in s.coeffs.iter_mut() {
            *x = *x * c;
        }
        if let (Some(tb), Some(v)) = (s.tail, c.valuation()) {
            s.tail = Some(TailBound {
                min_val: tb.min_val + v,
                ..tb
            });
        }
        s.trim();
        s
    }

    /// Multiplication by π^k.
    pub fn shift(&self, k: i64) -> Self {
        let mut s = self.clone();
        s.lo += k;
        s.hi = s.hi.map(|h| h + k);
        s
    }

    fn combine(&self, o: &Self, neg: bool) -> Self {
        assert_eq!(self.ctx.p, o.ctx.p, "mixed primes");
        let hi = match (self.hi, o.hi) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let lo = self.lo.min(o.lo);
        let end = match hi {
            Some(h) => h,
            None => self.stored_end().max(o.stored_end()),
        };
        let mut coeffs = Vec::with_capacity((end - lo).max(0) as usize);
        for k in lo..end {
            let a = self.coeff(k).expect("inside window");
            let b = o.coeff(k).expect("inside window");
            coeffs.push(if neg { a - b } else { a + b });
        }
        let tail = match (self.hi, o.hi) {
            (None, None) => None,
            _ => {
                let ta = if self.is_exact() { Some(self.exact_tail_bound()) } else { self.tail };
                let tb = if o.is_exact() { Some(o.exact_tail_bound()) } else { o.tail };
                match (ta, tb) {
                    (Some(x), Some(y)) => Some(TailBound {
                        min_val: x.min_val.min(y.min_val),
                        log_slope: x.log_slope.max(y.log_slope),
                    }),
                    _ => None,
                }
            }
        };
        let mut s = SeriesElement {
            ctx: self.ctx,
            lo: lo.min(end),
            coeffs,
            hi,
            tail,
        };
        s.trim();
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, true)
    }

    pub fn neg(&self) -> Self {
        self.scale(self.ctx.int(-1))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.ctx.p, o.ctx.p, "mixed primes");
        if self.coeffs.is_empty() && self.is_exact() {
            return Self::zero(&self.ctx);
        }
        if o.coeffs.is_empty() && o.is_exact() {
            return Self::zero(&self.ctx);
        }
        let lo = self.lo + o.lo;
        let hi = match (self.hi, o.hi) {
            (None, None) => None,
            (Some(a), None) => Some(a + o.lo),
            (None, Some(b)) => Some(b + self.lo),
            (Some(a), Some(b)) => Some((a + o.lo).min(b + self.lo)),
        };
        let keep = match hi {
            Some(h) => (h - lo).max(0) as usize,
            None => usize::MAX,
        };
        let coeffs = dense_mul(&self.coeffs, &o.coeffs, keep);
        let tail = match (self.is_exact(), o.is_exact()) {
            (true, false) if self.lo >= 0 => o.tail.map(|t| TailBound {
                min_val: t.min_val + self.exact_tail_bound().min_val,
                ..t
            }),
            (false, true) if o.lo >= 0 => self.tail.map(|t| TailBound {
                min_val: t.min_val + o.exact_tail_bound().min_val,
                ..t
            }),
            _ => None,
        };
        match hi {
            None => Self::from_coeffs(&self.ctx, lo, coeffs),
            Some(h) => Self::truncated(&self.ctx, lo, coeffs, h, tail),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Lowest exponent whose coefficient is nonzero at precision.
    pub fn order(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.lo + i as i64)
    }

    /// Multiplicative inverse, known below `window`.
    pub fn inverse(&self, window: i64) -> Result<Self> {
        let v = self.order().ok_or_else(|| {
            Error::InsufficientPrecision("inverting a series that is zero at precision".into())
        })?;
        let u: Vec<PadicScalar> = self.coeffs[(v - self.lo) as usize..].to_vec();
        let mut len = (window + v).max(0) as usize;
        if let Some(h) = self.hi {
            len = len.min((h - v).max(0) as usize);
        }
        let b = dense_inv(&u, len)?;
        Ok(Self::truncated(&self.ctx, -v, b, -v + len as i64, None))
    }

    /// Coefficients on the basis X^m with X = 1+π; exact polynomials only.
    pub fn to_x_basis(&self) -> Result<Vec<PadicScalar>> {
        if !self.is_exact() {
            return Err(Error::Window {
                what: "change of basis needs an exact polynomial".into(),
                achievable: self.valid_end(),
            });
        }
        let mut a = self.dense_from_zero(self.stored_end().max(0) as usize)?;
        taylor_shift(&mut a, -1);
        Ok(a)
    }

    /// Σ a_m (1+π)^m.
    pub fn from_x_basis(ctx: &PadicCtx, a: &[PadicScalar]) -> Self {
        let mut c = a.to_vec();
        taylor_shift(&mut c, 1);
        Self::from_coeffs(ctx, 0, c)
    }

    fn horner_exact(&self, g: &Self) -> Self {
        let mut acc = Self::zero(&self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g).add(&Self::constant(&self.ctx, *c));
        }
        acc
    }

    /// f((1+π)^a - 1) for a nonzero integer a, certified below `window`.
    pub fn compose_unit_power(&self, a: i64, window: i64) -> Result<Self> {
        if a == 0 {
            return Err(Error::Domain("exponent 0 does not define an endomorphism".into()));
        }
        if a > 0 && self.is_exact() && self.lo >= 0 {
            let g = Self::one_plus_pi_pow(&self.ctx, a, 0)?.sub(&Self::one(&self.ctx));
            let inner = Self::from_coeffs(&self.ctx, 0, self.coeffs.clone());
            return Ok(inner.horner_exact(&g).mul(&g.pow(self.lo as u32)));
        }
        let ctx = self.ctx;
        // ((1+π)^a - 1)/π by truncated powering, which stays integral
        let len = self.compose_len(window);
        let one_pi = [ctx.one(), ctx.one()];
        let pw = dense_pow(&one_pi, a.unsigned_abs(), len + 1);
        let full = if a > 0 { pw } else { dense_inv(&pw, len + 1)? };
        let mut u: Vec<PadicScalar> = full.into_iter().skip(1).collect();
        u.resize(len, ctx.zero());
        self.compose_with(u, window)
    }

    /// f((1+π)^a - 1) for a ∈ Z_p nonzero, certified below `window`.
    pub fn compose_padic(&self, a: PadicScalar, window: i64) -> Result<Self> {
        let ctx = self.ctx;
        if a.is_zero() {
            return Err(Error::Domain("exponent 0 does not define an endomorphism".into()));
        }
        let len = self.compose_len(window);
        let mut u = Vec::with_capacity(len);
        let mut b = a;
        for k in 1..=len as i64 {
            u.push(b);
            b = b * (a - ctx.int(k)) * ctx.int(k + 1).inv()?;
        }
        self.compose_with(u, window)
    }

    fn compose_len(&self, window: i64) -> usize {
        let w = self.hi.map_or(window, |h| window.min(h));
        (w - self.lo).max(0) as usize
    }

    /// f(π·u(π)) below the window, for a unit series u given to `len` terms.
    fn compose_with(&self, u: Vec<PadicScalar>, window: i64) -> Result<Self> {
        let ctx = self.ctx;
        let w = self.hi.map_or(window, |h| window.min(h));
        let lo = self.lo;
        let len = self.compose_len(window);
        if len == 0 {
            return Ok(Self::truncated(&ctx, w, Vec::new(), w, None));
        }
        let mut g = vec![ctx.zero()];
        g.extend_from_slice(&u[..len - 1]);
        let mut acc: Vec<PadicScalar> = Vec::new();
        for i in (0..len).rev() {
            let c = self.coeff(lo + i as i64)?;
            acc = dense_mul(&acc, &g, len);
            if acc.is_empty() {
                acc.push(ctx.zero());
            }
            acc[0] = acc[0] + c;
        }
        let upow = if lo >= 0 {
            dense_pow(&u, lo as u64, len)
        } else {
            dense_pow(&dense_inv(&u, len)?, (-lo) as u64, len)
        };
        let out = dense_mul(&acc, &upow, len);
        Ok(Self::truncated(&ctx, lo, out, lo + len as i64, None))
    }

    /// φ(f) = f((1+π)^p - 1).
    pub fn phi(&self, window: i64) -> Result<Self> {
        self.compose_unit_power(self.ctx.p as i64, window)
    }

    /// γ_a(f) = f((1+π)^a - 1).
    pub fn gamma(&self, a: i64, window: i64) -> Result<Self> {
        if a.rem_euclid(self.ctx.p as i64) == 0 {
            return Err(Error::Domain(format!("{a} is not a p-adic unit")));
        }
        self.compose_unit_power(a, window)
    }

    fn psi_poly(&self) -> Result<Self> {
        let a = self.to_x_basis()?;
        let p = self.ctx.p as usize;
        let picked: Vec<PadicScalar> = a.iter().step_by(p).copied().collect();
        Ok(Self::from_x_basis(&self.ctx, &picked))
    }

    /// ψ. Exact on Laurent polynomials; on a truncated series the polar part
    /// is exact and the plus part is certified only through the tail bound,
    /// using v(coefficient j of ψ(π^k)) ≥ ⌊k/p⌋ - j.
    pub fn psi(&self) -> Result<Self> {
        if !self.is_exact() {
            return self.psi_truncated();
        }
        let ctx = self.ctx;
        if self.lo >= 0 {
            return self.psi_poly();
        }
        let j = -self.lo;
        let pos: Vec<PadicScalar> = (0..self.stored_end().max(0))
            .map(|k| self.coeff(k).expect("exact"))
            .collect();
        let neg: Vec<PadicScalar> = (self.lo..0).map(|k| self.coeff(k).expect("exact")).collect();
        let h = Self::from_coeffs(&ctx, 0, neg);
        let q = Self::one_plus_pi_pow(&ctx, ctx.p as i64, 0)?
            .sub(&Self::one(&ctx))
            .shift(-1);
        let polar = q.pow(j as u32).mul(&h).psi_poly()?.shift(-j);
        Ok(Self::from_coeffs(&ctx, 0, pos).psi_poly()?.add(&polar))
    }

    fn psi_truncated(&self) -> Result<Self> {
        let ctx = self.ctx;
        let p = ctx.p as i64;
        let h = self.valid_end();
        if h < 0 {
            return Err(Error::Window {
                what: "ψ needs the whole polar part".into(),
                achievable: h,
            });
        }
        let known = Self::from_coeffs(&ctx, self.lo, (self.lo..h).map(|k| self.coeff(k).expect("known")).collect());
        let full = known.psi()?;
        let Some(tb) = self.tail else {
            return Ok(full.truncate(0).with_tail(None));
        };
        let hi = (h + p - 1) / p;
        let mut coeffs = Vec::new();
        let lo = full.lo().min(0);
        for j in lo..hi {
            let c = full.coeff(j)?;
            coeffs.push(if j < 0 { c } else { c.cap_abs(tail_error(ctx.p, tb, h, p, p * j)) });
        }
        let mut extra = 0i64;
        let mut pe = 1i64;
        for e in 1..40i64 {
            extra = extra.max(tb.log_slope * e - (pe - 1));
            pe = pe.saturating_mul(p);
        }
        let tail = TailBound {
            min_val: tb.min_val - tb.log_slope - extra,
            log_slope: tb.log_slope,
        };
        Ok(Self::truncated(&ctx, lo, coeffs, hi, Some(tail)))
    }

    /// ∂f = (1+π) df/dπ.
    pub fn partial(&self) -> Self {
        let ctx = self.ctx;
        let end = self.stored_end();
        let mut d = Vec::new();
        let dlo = self.lo - 1;
        for k in dlo..end {
            let c = self.coeff(k + 1).unwrap_or(ctx.zero());
            d.push(c * ctx.int(k + 1));
        }
        let deriv = match self.hi {
            None => Self::from_coeffs(&ctx, dlo, d),
            Some(h) => Self::truncated(&ctx, dlo, d, h - 1, None),
        };
        let one_plus = Self::from_coeffs(&ctx, 0, vec![ctx.one(), ctx.one()]);
        deriv.mul(&one_plus)
    }

    /// Res_0(f dπ/(1+π)) = Σ_{j≥0} (-1)^j f_{-1-j}.
    pub fn residue_form(&self) -> Result<PadicScalar> {
        if self.valid_end() < 0 {
            return Err(Error::Window {
                what: "residue needs every negative-exponent coefficient".into(),
                achievable: self.valid_end(),
            });
        }
        let mut s = self.ctx.zero();
        for k in self.lo..0 {
            let c = self.coeff(k)?;
            let j = -1 - k;
            s = if j % 2 == 0 { s + c } else { s - c };
        }
        Ok(s)
    }

    /// Minimal absolute agreement of coefficients on the common known window.
    pub fn agreement(&self, o: &Self) -> i64 {
        let end = self.valid_end().min(o.valid_end());
        let end = end.min(self.stored_end().max(o.stored_end()));
        let lo = self.lo.min(o.lo);
        (lo..end)
            .map(|k| {
                self.coeff(k)
                    .expect("known")
                    .agreement(&o.coeff(k).expect("known"))
            })
            .min()
            .unwrap_or(EXACT)
    }

    /// f(ζ_{p^n} - 1).
    pub fn eval_at_zeta(&self, n: u32) -> Result<CycloElement> {
        let ctx = self.ctx;
        if n == 0 {
            return Err(Error::Domain("evaluation at ζ_1 - 1 = 0".into()));
        }
        let exact = if self.is_exact() {
            self.clone()
        } else {
            Self::from_coeffs(&ctx, self.lo, self.coeffs.clone())
        };
        let mut val = CycloElement::zero(&ctx, n);
        if exact.lo < 0 {
            let w = CycloElement::inv_zeta_minus_one(&ctx, n)?;
            for k in exact.lo..0 {
                let c = exact.coeff(k)?;
                val = &(&val + &CycloElement::scalar(&ctx, n, c)) * &w;
            }
        }
        let pos = Self::from_coeffs(
            &ctx,
            0,
            (0..exact.stored_end().max(0))
                .map(|k| exact.coeff(k).expect("exact"))
                .collect(),
        );
        let a = pos.to_x_basis()?;
        let poly = CycloElement::from_exponents(
            &ctx,
            n,
            a.into_iter().enumerate().map(|(m, c)| (m as i64, c)),
        );
        val = &val + &poly;
        if let Some(h) = self.hi {
            let tb = self.tail.ok_or_else(|| Error::Window {
                what: "evaluating a truncated series needs a tail bound".into(),
                achievable: h,
            })?;
            let d = crate::cyclo::cyclo_dim(ctx.p, n) as i64;
            let err = tail_error(ctx.p, tb, h, d, 0);
            let coeffs = val.coeffs().iter().map(|c| c.cap_abs(err)).collect();
            val = CycloElement::from_coeffs(&ctx, n, coeffs)?;
        }
        Ok(val)
    }
}

impl PartialEq for SeriesElement {
    fn eq(&self, o: &Self) -> bool {
        self.hi == o.hi && {
            let end = self.valid_end().min(self.stored_end().max(o.stored_end()));
            (self.lo.min(o.lo)..end).all(|k| self.coeff(k).ok() == o.coeff(k).ok())
        }
    }
}

/// Q_m(π) = Φ_{p^m}(1+π), monic of degree p^{m-1}(p-1) with constant term p.
pub fn cyclotomic_q(ctx: &PadicCtx, m: u32) -> SeriesElement {
    let s = ppow(ctx.p, m - 1) as usize;
    let mut a = vec![ctx.zero(); s * (ctx.p as usize - 1) + 1];
    for j in 0..ctx.p as usize {
        a[j * s] = ctx.one();
    }
    SeriesElement::from_x_basis(ctx, &a)
}

/// Long division of a polynomial by a monic polynomial.
fn divrem_monic(f: &[PadicScalar], g: &[PadicScalar]) -> (Vec<PadicScalar>, Vec<PadicScalar>) {
    let ctx = g[0].ctx();
    let dg = g.len() - 1;
    if f.len() <= dg {
        return (Vec::new(), f.to_vec());
    }
    let mut r = f.to_vec();
    let mut q = vec![ctx.zero(); f.len() - dg];
    for i in (0..q.len()).rev() {
        let c = r[i + dg];
        q[i] = c;
        if c.is_exact_zero() {
            continue;
        }
        for (j, gj) in g.iter().enumerate() {
            r[i + j] = r[i + j] - c * *gj;
        }
    }
    r.truncate(dg);
    (q, r)
}

/// f/t below `window`, for an exact polynomial f vanishing at ζ_{p^m} - 1, m ≤ N.
///
/// A nonzero value at π = 0 is allowed and produces a simple pole.
pub fn divide_by_t(f: &SeriesElement, n_levels: u32, window: i64) -> Result<SeriesElement> {
    let ctx = f.ctx();
    if !f.is_exact() || f.lo() < 0 {
        return Err(Error::Window {
            what: "t-division needs an exact polynomial".into(),
            achievable: f.valid_end(),
        });
    }
    let mut cur = f.dense_from_zero(f.stored_end().max(0) as usize)?;
    let pp = ctx.int(ctx.p as i64);
    for m in 1..=n_levels {
        let q = cyclotomic_q(&ctx, m).dense_from_zero(crate::cyclo::cyclo_dim(ctx.p, m) + 1)?;
        let (quo, rem) = divrem_monic(&cur, &q);
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::Divisibility { level: m });
        }
        cur = quo.into_iter().map(|c| c * pp).collect();
    }
    let h = SeriesElement::from_coeffs(&ctx, -1, cur);
    let tn_over_pi = (1..=n_levels).fold(SeriesElement::one(&ctx), |acc, m| {
        acc.mul(&cyclotomic_q(&ctx, m).scale(pp.inv().expect("p invertible")))
    });
    let t_over_pi = SeriesElement::t(&ctx, window + 2)?.shift(-1);
    let ratio = tn_over_pi.truncate(window + 1).mul(&t_over_pi.inverse(window + 1)?);
    Ok(h.mul(&ratio).truncate(window))
}

/// The polynomial f of degree < p^N with f(0) = v_0 and f(ζ_{p^m} - 1) = v_m.
pub fn lazard_interpolate(ctx: &PadicCtx, values: &[PadicScalar]) -> Result<SeriesElement> {
    let v0 = *values
        .first()
        .ok_or_else(|| Error::Domain("no interpolation data".into()))?;
    let mut f = SeriesElement::constant(ctx, v0);
    let inv1 = CycloElement::inv_zeta_minus_one(ctx, 1)?;
    for (m, v) in values.iter().enumerate().skip(1) {
        let m = m as u32;
        let cur = f.eval_at_zeta(m)?;
        let r = &CycloElement::scalar(ctx, m, *v) - &cur;
        let c = &r * &inv1.embed(m)?;
        let cpoly = SeriesElement::from_x_basis(ctx, c.coeffs());
        let step = SeriesElement::one_plus_pi_pow(ctx, ppow(ctx.p, m - 1) as i64, 0)?
            .sub(&SeriesElement::one(ctx));
        f = f.add(&step.mul(&cpoly));
    }
    Ok(f)
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    p: u32,
    lo: i64,
    hi: i64,
    #[serde(default)]
    exact: bool,
    coeffs: Vec<PadicScalar>,
}

impl Serialize for SeriesElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            p: self.ctx.p,
            lo: self.lo,
            hi: self.hi.unwrap_or(self.stored_end()) - 1,
            exact: self.is_exact(),
            coeffs: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SeriesElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rep = SeriesRepr::deserialize(d)?;
        let ctx = match rep.coeffs.first() {
            Some(c) => c.ctx(),
            None => PadicCtx::new(rep.p, 1).map_err(D::Error::custom)?,
        };
        if rep.coeffs.iter().any(|c| c.prime() != rep.p) {
            return Err(D::Error::custom("prime mismatch"));
        }
        if rep.hi + 1 - rep.lo != rep.coeffs.len() as i64 {
            return Err(D::Error::custom("window does not match coefficient count"));
        }
        Ok(if rep.exact {
            SeriesElement::from_coeffs(&ctx, rep.lo, rep.coeffs)
        } else {
            SeriesElement::truncated(&ctx, rep.lo, rep.coeffs, rep.hi + 1, None)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u32) -> PadicCtx {
        PadicCtx::new(p, 12).unwrap()
    }

    fn poly(c: &PadicCtx, lo: i64, v: &[i64]) -> SeriesElement {
        SeriesElement::from_coeffs(c, lo, v.iter().map(|&x| c.int(x)).collect())
    }

    #[test]
    fn phi_of_pi() {
        let c = k(3);
        let f = SeriesElement::pi_pow(&c, 1).phi(10).unwrap();
        assert_eq!(f, poly(&c, 1, &[3, 3, 1]));
    }

    #[test]
    fn phi_of_inverse_pi_leads_with_one_over_p() {
        let c = k(5);
        let f = SeriesElement::pi_pow(&c, -1).phi(6).unwrap();
        assert_eq!(f.lo(), -1);
        assert_eq!(f.coeff(-1).unwrap(), c.rational(1, 5).unwrap());
        // (1+π)^5 - 1 = 5π(1 + 2π + 2π² + π³ + π⁴/5); next coefficient is -2/5.
        assert_eq!(f.coeff(0).unwrap(), c.rational(-2, 5).unwrap());
    }

    #[test]
    fn psi_examples() {
        let c = k(3);
        assert_eq!(SeriesElement::one(&c).psi().unwrap(), SeriesElement::one(&c));
        let x9 = SeriesElement::one_plus_pi_pow(&c, 9, 0).unwrap();
        assert_eq!(x9.psi().unwrap(), SeriesElement::one_plus_pi_pow(&c, 3, 0).unwrap());
        let x4 = SeriesElement::one_plus_pi_pow(&c, 4, 0).unwrap();
        assert!(x4.psi().unwrap().coeffs().iter().all(|x| x.is_zero()));
        let f = poly(&c, -1, &[1, 1]);
        assert_eq!(f.psi().unwrap(), f);
    }

    #[test]
    fn psi_of_truncated_log() {
        let c = k(3);
        let t = SeriesElement::t(&c, 60).unwrap();
        let pt = t.psi().unwrap();
        assert_eq!(pt.valid_end(), 20);
        let want = t.scale(c.p_pow(-1)).truncate(20);
        for j in 0..20 {
            let got = pt.coeff(j).unwrap();
            let w = want.coeff(j).unwrap();
            assert!(got.agreement(&w) >= got.abs_prec().min(w.abs_prec()), "j={j}");
        }
        assert!(pt.coeff(2).unwrap().abs_prec() >= 9);
        let polar = SeriesElement::from_coeffs(&c, -1, vec![c.one()]).add(&t.truncate(5).with_tail(None));
        let q = polar.psi().unwrap();
        assert_eq!(q.valid_end(), 0);
        assert_eq!(q.coeff(-1).unwrap(), c.one());
    }

    #[test]
    fn partial_examples() {
        let c = k(5);
        assert!(SeriesElement::constant(&c, c.int(7)).partial().coeffs().is_empty());
        let t = SeriesElement::t(&c, 20).unwrap();
        let dt = t.partial();
        assert_eq!(dt.coeff(0).unwrap(), c.one());
        for j in 1..15 {
            assert!(dt.coeff(j).unwrap().is_zero());
        }
        let x = SeriesElement::one_plus_pi_pow(&c, 7, 0).unwrap();
        assert_eq!(x.partial(), x.scale(c.int(7)));
    }

    #[test]
    fn residue_examples() {
        let c = k(3);
        assert_eq!(poly(&c, -1, &[1, 1]).residue_form().unwrap(), c.one());
        assert!(poly(&c, 0, &[1, 2, 3]).residue_form().unwrap().is_zero());
    }

    #[test]
    fn gamma_scales_t() {
        let c = k(5);
        let t = SeriesElement::t(&c, 25).unwrap();
        let g = t.compose_unit_power(6, 25).unwrap();
        assert!(g.agreement(&t.scale(c.int(6))) >= 10);
        let ph = t.phi(25).unwrap();
        assert!(ph.agreement(&t.scale(c.int(5))) >= 10);
    }

    #[test]
    fn t_vanishes_at_roots_of_unity() {
        let c = k(3);
        let t = SeriesElement::t(&c, 120).unwrap();
        for n in 1..=2 {
            let v = t.eval_at_zeta(n).unwrap();
            assert!(v.is_zero(), "level {n}: {v}");
        }
    }

    #[test]
    fn eval_one_plus_pi_over_pi() {
        let c = k(3);
        let f = poly(&c, -1, &[1, 1]);
        let z = CycloElement::zeta_pow(&c, 1, 1);
        let expect = &z * &CycloElement::inv_zeta_minus_one(&c, 1).unwrap();
        assert!(f.eval_at_zeta(1).unwrap().agreement(&expect) >= 11);
    }

    #[test]
    fn lazard_hits_prescribed_values() {
        for p in [3, 5] {
            let c = k(p);
            let vals: Vec<PadicScalar> = (0..=3).map(|m| c.p_pow(-m)).collect();
            let f = lazard_interpolate(&c, &vals).unwrap();
            assert_eq!(f.degree(), Some(ppow(p, 3) as i64 - 1));
            assert_eq!(f.coeff(0).unwrap(), c.one());
            for m in 1..=3u32 {
                let v = f.eval_at_zeta(m).unwrap();
                let want = CycloElement::scalar(&c, m, c.p_pow(-(m as i64)));
                assert!(v.agreement(&want) >= 6, "p={p} m={m}");
            }
        }
    }

    #[test]
    fn divide_t_by_t_and_t_squared() {
        let c = k(3);
        let w = 40;
        let tn = (1..=2).fold(SeriesElement::pi_pow(&c, 1), |acc, m| {
            acc.mul(&cyclotomic_q(&c, m).scale(c.int(3).inv().unwrap()))
        });
        let g = divide_by_t(&tn, 2, w).unwrap();
        let t = SeriesElement::t(&c, w).unwrap();
        let back = g.mul(&t);
        // t_N/t only converges on a smaller disc, so precision decays with the exponent.
        let a = back.truncate(12).agreement(&tn.truncate(12));
        assert!(a >= 5, "agreement {a}");
    }

    #[test]
    fn divisibility_error_names_level() {
        let c = k(3);
        let f = poly(&c, 0, &[0, 1, 1]);
        assert!(matches!(
            divide_by_t(&f, 2, 10),
            Err(Error::Divisibility { level: 1 })
        ));
    }

    #[test]
    fn json_round_trip() {
        let c = k(5);
        let f = poly(&c, -2, &[1, 0, 3, -4]);
        let s = serde_json::to_string(&f).unwrap();
        let g: SeriesElement = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
