//! Distributions on Z_p carried by their Amice series Σ μ(binom(y,n)) π^n.
//!
//! An exact polynomial Amice series of degree < N is the finite combination
//! Σ a_m δ_m of Dirac masses, with a_m its coefficients on (1+π)^m.

use crate::characters::PadicCharacter;
use crate::cyclo::CycloElement;
use crate::error::{Error, Result};
use crate::linalg;
use crate::padic::{ppow, PadicCtx, PadicScalar};
use crate::series::SeriesElement;

#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    amice: SeriesElement,
    order: u32,
}

/// Stirling numbers of the second kind S(n, j) for n, j ≤ max, modulo p^cap.
pub fn stirling2(ctx: &PadicCtx, max: usize) -> Vec<Vec<PadicScalar>> {
    let mut s = vec![vec![ctx.zero(); max + 1]; max + 1];
    s[0][0] = ctx.one();
    for n in 1..=max {
        for j in 1..=n {
            s[n][j] = ctx.int(j as i64) * s[n - 1][j] + s[n - 1][j - 1];
        }
    }
    s
}

/// Signed Stirling numbers of the first kind s(n, j), modulo p^cap.
pub fn stirling1(ctx: &PadicCtx, max: usize) -> Vec<Vec<PadicScalar>> {
    let mut s = vec![vec![ctx.zero(); max + 1]; max + 1];
    s[0][0] = ctx.one();
    for n in 1..=max {
        for j in 1..=n {
            s[n][j] = s[n - 1][j - 1] - ctx.int(n as i64 - 1) * s[n - 1][j];
        }
    }
    s
}

/// Binomial coefficients binom(n, k) modulo p^cap for n, k < size.
fn pascal(ctx: &PadicCtx, size: usize) -> Vec<Vec<PadicScalar>> {
    let mut rows: Vec<Vec<PadicScalar>> = Vec::with_capacity(size);
    for n in 0..size {
        let mut row = vec![ctx.zero(); size];
        row[0] = ctx.one();
        for k in 1..=n {
            row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
}

impl Distribution {
    pub fn from_amice(amice: SeriesElement, order: u32) -> Result<Self> {
        if !amice.is_plus() {
            return Err(Error::Domain("Amice transform must have no pole".into()));
        }
        Ok(Distribution { amice, order })
    }

    /// The Dirac mass at an integer a; exact for a ≥ 0.
    pub fn dirac(ctx: &PadicCtx, a: i64, window: i64) -> Result<Self> {
        Self::from_amice(SeriesElement::one_plus_pi_pow(ctx, a, window)?, 0)
    }

    /// Σ c·δ_a over nonnegative integer points.
    pub fn dirac_combination(ctx: &PadicCtx, terms: &[(u64, PadicScalar)]) -> Result<Self> {
        let len = terms.iter().map(|(a, _)| *a as usize + 1).max().unwrap_or(0);
        let mut x = vec![ctx.zero(); len];
        for (a, c) in terms {
            x[*a as usize] = x[*a as usize] + *c;
        }
        Self::from_amice(SeriesElement::from_x_basis(ctx, &x), 0)
    }

    pub fn amice(&self) -> &SeriesElement {
        &self.amice
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn ctx(&self) -> PadicCtx {
        self.amice.ctx()
    }

    pub fn mass(&self) -> Result<PadicScalar> {
        self.amice.coeff(0)
    }

    /// The distribution yμ, whose Amice series is ∂f.
    pub fn partial(&self) -> Self {
        Distribution {
            amice: self.amice.partial(),
            order: self.order,
        }
    }

    pub fn convolve(&self, o: &Self) -> Self {
        Distribution {
            amice: self.amice.mul(&o.amice),
            order: self.order.max(o.order),
        }
    }

    /// ∫ y^k μ as (∂^k f)(0).
    pub fn moment(&self, k: u32) -> Result<PadicScalar> {
        if self.amice.valid_end() <= k as i64 {
            return Err(Error::Window {
                what: format!("moment {k}"),
                achievable: self.amice.valid_end() - 1,
            });
        }
        let mut f = if self.amice.is_exact() {
            self.amice.clone()
        } else {
            self.amice.truncate(k as i64 + 1)
        };
        for _ in 0..k {
            f = f.partial();
        }
        f.coeff(0)
    }

    /// ∫ y^k μ through Stirling numbers: Σ_j S(k,j) j! μ(binom(y,j)).
    pub fn moment_stirling(&self, k: u32) -> Result<PadicScalar> {
        let ctx = self.ctx();
        let s = stirling2(&ctx, k as usize);
        let mut acc = ctx.zero();
        let mut fact = ctx.one();
        for j in 0..=k as usize {
            if j > 0 {
                fact = fact * ctx.int(j as i64);
            }
            let c = self.amice.coeff(j as i64)?;
            acc = acc + s[k as usize][j] * fact * c;
        }
        Ok(acc)
    }

    /// Coefficients a_m of μ = Σ a_m δ_m; exact Amice polynomials only.
    pub fn dirac_weights(&self) -> Result<Vec<PadicScalar>> {
        self.amice.to_x_basis()
    }

    /// μ restricted to the disc i + p^n Z_p.
    pub fn restrict(&self, i: i64, n: u32) -> Result<Self> {
        let ctx = self.ctx();
        let q = ppow(ctx.p, n) as i64;
        let i = i.rem_euclid(q);
        let a = self.dirac_weights()?;
        let kept: Vec<PadicScalar> = a
            .iter()
            .enumerate()
            .map(|(m, c)| if (m as i64) % q == i { *c } else { ctx.zero() })
            .collect();
        Self::from_amice(SeriesElement::from_x_basis(&ctx, &kept), self.order)
    }

    /// ψ^n((1+π)^{-i} f), the Amice series of the pushforward of μ on
    /// i + p^n Z_p under y ↦ (y - i)/p^n.
    pub fn disc_pushforward(&self, i: i64, n: u32) -> Result<SeriesElement> {
        let ctx = self.ctx();
        let q = ppow(ctx.p, n) as i64;
        let i = i.rem_euclid(q);
        let mut g = SeriesElement::one_plus_pi_pow(&ctx, q - i, 0)?.mul(&self.amice);
        for _ in 0..n {
            g = g.psi()?;
        }
        // ψ^n((1+π)^{q-i} f) = (1+π) ψ^n((1+π)^{-i} f)
        let ginv = g.to_x_basis()?;
        if ginv.first().is_some_and(|c| !c.is_zero()) {
            return Err(Error::Domain("pushforward left a mass at -1".into()));
        }
        let shifted: Vec<PadicScalar> = ginv.into_iter().skip(1).collect();
        Ok(SeriesElement::from_x_basis(&ctx, &shifted))
    }

    /// Mass of the disc i + p^n Z_p through the cyclotomic sum
    /// p^{-n} Σ_{ζ^{p^n}=1} ζ^{-i} f(ζ-1).
    pub fn disc_mass_cyclotomic(&self, i: i64, n: u32) -> Result<PadicScalar> {
        let ctx = self.ctx();
        let mut total = self.mass()?;
        for level in 1..=n {
            // sum over the primitive p^level-th roots as a trace
            let val = self.amice.eval_at_zeta(level)?;
            let z = CycloElement::zeta_pow(&ctx, level, -i);
            total = total + (&z * &val).trace_to_base();
        }
        Ok(total * ctx.p_pow(-(n as i64)))
    }

    /// ∫_{Z_p^×} δ^{-1}(y) μ(y) through the centred expansion on discs of
    /// level n with Taylor order J. Returns the value and a lower bound on
    /// the valuation of the truncation error.
    pub fn integrate_character(
        &self,
        chi: &PadicCharacter,
        n: u32,
        order_j: u32,
    ) -> Result<(CycloElement, i64)> {
        let ctx = self.ctx();
        if n < chi.conductor().max(1) {
            return Err(Error::Domain(format!(
                "disc level {n} below the conductor {}",
                chi.conductor()
            )));
        }
        let k = chi.weight();
        let q = ppow(ctx.p, n) as i64;
        let lvl = chi.value_level().max(n);
        let mut total = CycloElement::zero(&ctx, lvl);
        let mut vfact = 0i64;
        let mut pk = ctx.p as i64;
        while pk <= order_j as i64 {
            vfact += order_j as i64 / pk;
            pk *= ctx.p as i64;
        }
        let growth = self.order as i64 * vfact;
        let err = (order_j as i64 + 1) * n as i64 - growth;
        for i in 1..q {
            if i % ctx.p as i64 == 0 {
                continue;
            }
            let nu = self.disc_pushforward(i, n)?;
            let nu = Distribution::from_amice(nu, self.order)?;
            let ii = ctx.int(i);
            let iinv = ii.inv()?;
            let mut sum = ctx.zero();
            // binom(-k, j) i^{-j} p^{nj} ∫ z^j ν_i
            let mut binom = ctx.one();
            let mut ipow = ctx.one();
            let mut ppw = ctx.one();
            for j in 0..=order_j as i64 {
                if j > 0 {
                    binom = binom * ctx.int(-k - j + 1) * ctx.int(j).inv()?;
                    ipow = ipow * iinv;
                    ppw = ppw * ctx.int(q);
                }
                if binom.is_exact_zero() {
                    break;
                }
                sum = sum + binom * ipow * ppw * nu.moment(j as u32)?;
            }
            let w = iinv.pow(k)? * sum;
            let d = chi.fin_value(i)?.inv()?.embed(lvl)?;
            total = &total + &d.scale(w);
        }
        Ok((total, err))
    }

    /// Σ_m a_m δ^{-1}(m) over units m, for exact Amice polynomials.
    pub fn integrate_character_direct(&self, chi: &PadicCharacter) -> Result<CycloElement> {
        let ctx = self.ctx();
        let lvl = chi.value_level();
        let a = self.dirac_weights()?;
        let mut total = CycloElement::zero(&ctx, lvl);
        for (m, c) in a.iter().enumerate() {
            if m as u64 % ctx.p as u64 == 0 || c.is_exact_zero() {
                continue;
            }
            let v = chi.value_on_unit(m as i64)?.inv()?;
            total = &total + &v.scale(*c);
        }
        Ok(total)
    }

    /// f_{δ₀}(μ) = ∫_{Z_p^×} δ₀^{-1} μ for μ supported on the units.
    pub fn f_delta0(&self, chi: &PadicCharacter) -> Result<CycloElement> {
        let r = self.restrict(0, 1)?.mass()?;
        if !r.is_zero() {
            return Err(Error::Domain("distribution charges pZ_p".into()));
        }
        self.integrate_character_direct(chi)
    }
}

/// Res_0((1+π)^y f dπ/(1+π)).
pub fn colmez_eval(f: &SeriesElement, y: i64) -> Result<PadicScalar> {
    let w = f.valid_end().min(1);
    let xy = SeriesElement::one_plus_pi_pow(&f.ctx(), y, (w - f.lo()).max(1))?;
    xy.mul(f).residue_form()
}

/// Moments ∫ y^k μ for k < count, from Amice coefficients via Stirling numbers.
pub fn amice_to_moments(f: &SeriesElement, count: usize) -> Result<Vec<PadicScalar>> {
    let mu = Distribution::from_amice(f.clone(), 0)?;
    (0..count as u32).map(|k| mu.moment_stirling(k)).collect()
}

/// Amice coefficients c_j = (1/j!) Σ_k s(j,k) m_k from moments m_0..m_{N-1}.
pub fn moments_to_amice(ctx: &PadicCtx, moments: &[PadicScalar]) -> Result<SeriesElement> {
    let n = moments.len();
    let s = stirling1(ctx, n.max(1));
    let mut out = Vec::with_capacity(n);
    let mut fact = ctx.one();
    for j in 0..n {
        if j > 0 {
            fact = fact * ctx.int(j as i64);
        }
        let mut acc = ctx.zero();
        for (k, m) in moments.iter().enumerate().take(j + 1) {
            acc = acc + s[j][k] * *m;
        }
        out.push(acc.div(&fact)?);
    }
    Ok(SeriesElement::truncated(ctx, 0, out, n as i64, None))
}

/// Coefficient j of ψ(π^k) for j < rows, k < cols.
pub fn psi_matrix(ctx: &PadicCtx, rows: usize, cols: usize) -> linalg::Matrix {
    let p = ctx.p as usize;
    let b = pascal(ctx, cols.max(rows) + 1);
    let mut m = vec![vec![ctx.zero(); cols]; rows];
    for k in 0..cols {
        for l in 0..=k / p {
            let mut c = b[k][p * l];
            if (k - p * l) % 2 == 1 {
                c = -c;
            }
            for (j, row) in m.iter_mut().enumerate().take(l.min(rows - 1) + 1) {
                row[k] = row[k] + c * b[l][j];
            }
        }
    }
    m
}

/// A basis of polynomial solutions of degree < N to ψ(f) ≡ λf mod π^{⌊N/p⌋}.
///
/// For λ ≠ 1 the system is triangular with diagonal (1-λ, -λ, -λ, …) and the
/// free coefficients are those of π^k, k ≥ ⌊N/p⌋.
pub fn psi_eigenvector(lambda: PadicScalar, n: usize) -> Result<Vec<SeriesElement>> {
    let ctx = lambda.ctx();
    let p = ctx.p as usize;
    let rows = n / p;
    if rows == 0 {
        return Err(Error::Window {
            what: "window too small for any eigen-equation".into(),
            achievable: p as i64,
        });
    }
    let m = psi_matrix(&ctx, rows, n);
    let mut a = m.clone();
    for (j, row) in a.iter_mut().enumerate() {
        row[j] = row[j] - lambda;
    }
    if (lambda - ctx.one()).is_zero() {
        let ker = linalg::kernel(&a)?;
        return Ok(ker
            .into_iter()
            .map(|v| SeriesElement::from_coeffs(&ctx, 0, v))
            .collect());
    }
    let mut basis = Vec::new();
    for free in rows..n {
        let mut x = vec![ctx.zero(); n];
        x[free] = ctx.one();
        for j in (0..rows).rev() {
            let mut s = ctx.zero();
            for k in j + 1..n {
                s = s + a[j][k] * x[k];
            }
            x[j] = -(s.div(&a[j][j])?);
        }
        basis.push(SeriesElement::from_coeffs(&ctx, 0, x));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u32) -> PadicCtx {
        PadicCtx::new(p, 12).unwrap()
    }

    #[test]
    fn dirac_basics() {
        let c = k(5);
        let d0 = Distribution::dirac(&c, 0, 0).unwrap();
        assert_eq!(d0.amice(), &SeriesElement::one(&c));
        let d2 = Distribution::dirac(&c, 2, 0).unwrap();
        assert_eq!(d2.mass().unwrap(), c.one());
        assert_eq!(d2.moment(3).unwrap(), c.int(8));
        assert_eq!(d2.moment_stirling(3).unwrap(), c.int(8));
    }

    #[test]
    fn stirling_oracle() {
        let c = PadicCtx::new(101, 3).unwrap();
        let s2 = stirling2(&c, 10);
        assert_eq!(s2[5][2], c.int(15));
        assert_eq!(s2[10][3], c.int(9330));
        let s1 = stirling1(&c, 6);
        assert_eq!(s1[4][2], c.int(11));
        assert_eq!(s1[5][1], c.int(24));
        assert_eq!(s1[5][2], c.int(-50));
    }

    #[test]
    fn convolution_adds_points() {
        let c = k(3);
        let a = Distribution::dirac(&c, 4, 0).unwrap();
        let b = Distribution::dirac(&c, 7, 0).unwrap();
        assert_eq!(a.convolve(&b), Distribution::dirac(&c, 11, 0).unwrap());
    }

    #[test]
    fn restriction_of_dirac() {
        let c = k(3);
        let d = Distribution::dirac(&c, 7, 0).unwrap();
        assert_eq!(d.restrict(7, 2).unwrap(), d);
        assert_eq!(d.restrict(1, 2).unwrap().mass().unwrap(), c.zero());
        assert_eq!(d.restrict(1, 1).unwrap().mass().unwrap(), c.one());
    }

    #[test]
    fn disc_mass_routes_agree() {
        let c = k(3);
        let mu = Distribution::dirac_combination(
            &c,
            &[(1, c.int(2)), (4, c.int(-1)), (5, c.int(3)), (9, c.int(7))],
        )
        .unwrap();
        for i in 0..9 {
            let direct = mu.restrict(i, 2).unwrap().mass().unwrap();
            let cyc = mu.disc_mass_cyclotomic(i, 2).unwrap();
            let push = mu.disc_pushforward(i, 2).unwrap().coeff(0).unwrap();
            assert!(direct.agreement(&cyc) >= 10, "i={i}");
            assert_eq!(direct, push);
        }
    }

    #[test]
    fn colmez_samples() {
        let c = k(3);
        let f = SeriesElement::from_coeffs(&c, -1, vec![c.one(), c.one()]);
        for y in 0..10 {
            assert_eq!(colmez_eval(&f, y).unwrap(), c.one());
        }
        let g = SeriesElement::pi_pow(&c, -2);
        for y in 0..10 {
            assert_eq!(colmez_eval(&g, y).unwrap(), c.int(y - 1));
        }
        let h = SeriesElement::from_coeffs(&c, 0, vec![c.one(), c.int(3)]);
        assert!(colmez_eval(&h, 4).unwrap().is_zero());
    }

    #[test]
    fn moments_round_trip() {
        let c = k(5);
        let mu = Distribution::dirac_combination(&c, &[(2, c.int(3)), (6, c.int(-2))]).unwrap();
        let m = amice_to_moments(mu.amice(), 8).unwrap();
        let back = moments_to_amice(&c, &m).unwrap();
        assert!(back.agreement(&mu.amice().truncate(8)) >= 10);
    }

    #[test]
    fn eigenvectors_satisfy_relation() {
        let c = k(3);
        let lambda = c.int(4);
        let n = 18;
        let basis = psi_eigenvector(lambda, n).unwrap();
        assert_eq!(basis.len(), n - n / 3);
        for f in &basis {
            let r = f.psi().unwrap().sub(&f.scale(lambda));
            for j in 0..(n / 3) as i64 {
                assert!(r.coeff(j).unwrap().is_zero(), "coefficient {j}");
            }
        }
        let ones = psi_eigenvector(c.one(), n).unwrap();
        let a = psi_matrix(&c, n / 3, n);
        let mut shifted = a.clone();
        for (j, row) in shifted.iter_mut().enumerate() {
            row[j] = row[j] - c.one();
        }
        assert_eq!(ones.len(), n - linalg::rank(&shifted).unwrap());
    }

    #[test]
    fn integral_of_dirac_is_point_value() {
        let c = k(5);
        let chi = PadicCharacter::new(
            &c,
            c.one(),
            crate::characters::FinitePart::Odd { e: 3 },
            2,
            -2,
        )
        .unwrap();
        let mu = Distribution::dirac(&c, 7, 0).unwrap();
        let (v, err) = mu.integrate_character(&chi, 2, 6).unwrap();
        assert!(err >= 12);
        let want = chi.value_on_unit(7).unwrap().inv().unwrap();
        assert!(v.agreement(&want.embed(v.level()).unwrap()) >= 10);
    }
}
