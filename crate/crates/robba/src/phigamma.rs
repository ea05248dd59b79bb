//! Rank-one (φ,Γ)-modules R(δ): explicit cocycles, cup products, the trace
//! map on H², explicit exponentials, ∂-transport and both sides of the
//! explicit reciprocity law.
//!
//! Cohomology classes are never formed as quotients. Everything acts on
//! representatives and is read off through residues or cyclotomic values.

use crate::characters::{gamma_star, PadicCharacter};
use crate::cyclo::CycloElement;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::padic::{padic_log, ppow, PadicCtx, PadicScalar};
use crate::series::{divide_by_t, lazard_interpolate, SeriesElement};

/// χ(γ) for the fixed generator γ: 1 + p, or 5 when p = 2.
pub fn gamma_generator(p: u32) -> i64 {
    if p == 2 {
        5
    } else {
        1 + p as i64
    }
}

pub fn log_chi(ctx: &PadicCtx) -> Result<PadicScalar> {
    padic_log(&ctx.int(gamma_generator(ctx.p)))
}

/// The trivial character.
pub fn trivial(ctx: &PadicCtx) -> PadicCharacter {
    PadicCharacter::unramified(ctx, ctx.one(), 0).expect("valid character")
}

/// x|x|, the twist of R(1).
pub fn cyclotomic(ctx: &PadicCtx) -> PadicCharacter {
    PadicCharacter::unramified(ctx, ctx.one(), 1).expect("valid character")
}

/// Equality of characters as functions on Q_p^×.
pub fn same_twist(a: &PadicCharacter, b: &PadicCharacter) -> bool {
    let ctx = a.ctx();
    if a.weight() != b.weight() || a.value_at_p() != b.value_at_p() {
        return false;
    }
    let m = a.level().max(b.level()).max(1);
    let q = ppow(ctx.p, m) as i64;
    (1..q).filter(|i| i % ctx.p as i64 != 0).all(|i| {
        match (a.fin_value(i), b.fin_value(i)) {
            (Ok(x), Ok(y)) => {
                let l = x.level().max(y.level());
                match (x.embed(l), y.embed(l)) {
                    (Ok(x), Ok(y)) => x == y,
                    _ => false,
                }
            }
            _ => false,
        }
    })
}

/// The (ψ,γ)-side trace constant p/((p-1)·log χ(γ)).
pub fn trace_constant(ctx: &PadicCtx) -> Result<PadicScalar> {
    let p = ctx.int(ctx.p as i64);
    p.div(&(ctx.int(ctx.p as i64 - 1) * log_chi(ctx)?))
}

/// f·e_δ.
#[derive(Clone, Debug)]
pub struct ModuleElement {
    f: SeriesElement,
    delta: PadicCharacter,
}

impl ModuleElement {
    pub fn new(f: SeriesElement, delta: PadicCharacter) -> Self {
        ModuleElement { f, delta }
    }
    pub fn zero(delta: &PadicCharacter) -> Self {
        Self::new(SeriesElement::zero(&delta.ctx()), delta.clone())
    }
    pub fn series(&self) -> &SeriesElement {
        &self.f
    }
    pub fn delta(&self) -> &PadicCharacter {
        &self.delta
    }

    fn check(&self, o: &Self) -> Result<()> {
        if same_twist(&self.delta, &o.delta) {
            Ok(())
        } else {
            Err(Error::Mismatch(format!("twists {} and {}", self.delta, o.delta)))
        }
    }

    /// δ(a) for a unit integer a, when it lies in Q_p.
    fn unit_value(&self, a: i64) -> Result<PadicScalar> {
        self.delta
            .value_on_unit(a)?
            .to_scalar()
            .ok_or_else(|| Error::Domain(format!("δ({a}) is not in Q_p for {}", self.delta)))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self::new(self.f.add(&o.f), self.delta.clone()))
    }
    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self::new(self.f.sub(&o.f), self.delta.clone()))
    }
    pub fn scale(&self, c: PadicScalar) -> Self {
        Self::new(self.f.scale(c), self.delta.clone())
    }

    /// φ(f e_δ) = δ(p) φ(f) e_δ.
    pub fn phi(&self, window: i64) -> Result<Self> {
        Ok(Self::new(
            self.f.phi(window)?.scale(self.delta.value_at_p()),
            self.delta.clone(),
        ))
    }

    /// γ_a(f e_δ) = δ(a) γ_a(f) e_δ.
    pub fn gamma(&self, a: i64, window: i64) -> Result<Self> {
        let d = self.unit_value(a)?;
        Ok(Self::new(self.f.gamma(a, window)?.scale(d), self.delta.clone()))
    }

    /// ψ(f e_δ) = δ(p)^{-1} ψ(f) e_δ.
    pub fn psi(&self) -> Result<Self> {
        Ok(Self::new(
            self.f.psi()?.scale(self.delta.value_at_p().inv()?),
            self.delta.clone(),
        ))
    }

    /// ∂(f e_δ) = ∂f e_{δx}.
    pub fn partial(&self) -> Self {
        Self::new(self.f.partial(), self.delta.times_x())
    }

    /// Product landing in R(δδ').
    pub fn product(&self, o: &Self) -> Result<Self> {
        Ok(Self::new(self.f.mul(&o.f), self.delta.product(&o.delta)?))
    }

    /// The projector onto Δ-invariants: the average of δ(ω)γ_ω over the
    /// Teichmüller units ω (p odd) or over ±1 (p = 2).
    pub fn p_delta(&self, window: i64) -> Result<Self> {
        let ctx = self.delta.ctx();
        let p = ctx.p as i64;
        if p == 2 {
            let s = self.unit_value(-1)?;
            let g = self.f.compose_padic(ctx.int(-1), window)?.scale(s);
            return Ok(Self::new(
                self.f.add(&g).scale(ctx.rational(1, 2)?),
                self.delta.clone(),
            ));
        }
        let m = self.delta.level().max(1);
        let pm = ppow(ctx.p, m) as i64;
        let mut acc: Option<SeriesElement> = None;
        for a in 1..p {
            let w = crate::padic::teichmuller(&ctx, a)?;
            // an integer congruent to the Teichmüller lift modulo p^m
            let mut r = a as i128;
            for _ in 1..m {
                r = num_pow_mod(r, p as u32, pm as i128);
            }
            let fin = self
                .delta
                .fin_value(r as i64)?
                .to_scalar()
                .ok_or_else(|| Error::Domain("Δ-values outside Q_p".into()))?;
            let d = fin * w.pow(self.delta.weight())?;
            let term = self.f.compose_padic(w, window)?.scale(d);
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        let inv = ctx.int(p - 1).inv()?;
        Ok(Self::new(acc.expect("p > 2").scale(inv), self.delta.clone()))
    }

    pub fn agreement(&self, o: &Self) -> i64 {
        self.f.agreement(&o.f)
    }
}

fn num_pow_mod(b: i128, e: u32, m: i128) -> i128 {
    let mut acc = 1i128;
    for _ in 0..e {
        acc = acc * b % m;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// [x, y] with (φ-1)x = (γ-1)y.
    PhiGamma,
    /// [x, y] with (ψ-1)x = (γ-1)y.
    PsiGamma,
}

#[derive(Clone, Debug)]
pub struct Cocycle1 {
    pub x: ModuleElement,
    pub y: ModuleElement,
    pub flavor: Flavor,
}

#[derive(Clone, Debug)]
pub struct Cocycle2 {
    pub z: ModuleElement,
    pub flavor: Flavor,
}

impl Cocycle1 {
    pub fn new(x: ModuleElement, y: ModuleElement, flavor: Flavor) -> Result<Self> {
        x.check(&y)?;
        Ok(Cocycle1 { x, y, flavor })
    }

    pub fn zero(delta: &PadicCharacter, flavor: Flavor) -> Self {
        Cocycle1 {
            x: ModuleElement::zero(delta),
            y: ModuleElement::zero(delta),
            flavor,
        }
    }

    pub fn delta(&self) -> &PadicCharacter {
        self.x.delta()
    }

    /// d(m) = [(γ-1)m, (φ-1)m] or [(γ-1)m, (ψ-1)m].
    pub fn coboundary(m: &ModuleElement, flavor: Flavor, window: i64) -> Result<Self> {
        let a = gamma_generator(m.delta.ctx().p);
        let x = m.gamma(a, window)?.sub(m)?;
        let y = match flavor {
            Flavor::PhiGamma => m.phi(window)?.sub(m)?,
            Flavor::PsiGamma => m.psi()?.sub(m)?,
        };
        Self::new(x, y, flavor)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.flavor != o.flavor {
            return Err(Error::Mismatch("cocycles of different complexes".into()));
        }
        Self::new(self.x.add(&o.x)?, self.y.add(&o.y)?, self.flavor)
    }

    pub fn scale(&self, c: PadicScalar) -> Self {
        Cocycle1 {
            x: self.x.scale(c),
            y: self.y.scale(c),
            flavor: self.flavor,
        }
    }

    /// Agreement of the two sides of the cocycle identity.
    pub fn cocycle_defect(&self, window: i64) -> Result<i64> {
        let a = gamma_generator(self.x.delta.ctx().p);
        let lhs = match self.flavor {
            Flavor::PhiGamma => self.x.phi(window)?.sub(&self.x)?,
            Flavor::PsiGamma => self.x.psi()?.sub(&self.x)?,
        };
        let rhs = self.y.gamma(a, window)?.sub(&self.y)?;
        Ok(lhs.agreement(&rhs))
    }

    /// The comparison map to the (ψ,γ) complex: [x, y] ↦ [x, -ψ(y)].
    pub fn to_psi(&self) -> Result<Self> {
        match self.flavor {
            Flavor::PsiGamma => Ok(self.clone()),
            Flavor::PhiGamma => Self::new(
                self.x.clone(),
                self.y.psi()?.scale(self.x.delta.ctx().int(-1)),
                Flavor::PsiGamma,
            ),
        }
    }

    /// Component-wise ∂, from R(δ) to R(δx).
    pub fn partial(&self) -> Self {
        Cocycle1 {
            x: self.x.partial(),
            y: self.y.partial(),
            flavor: self.flavor,
        }
    }
}

impl Cocycle2 {
    pub fn new(z: ModuleElement, flavor: Flavor) -> Self {
        Cocycle2 { z, flavor }
    }
    pub fn partial(&self) -> Self {
        Cocycle2 {
            z: self.z.partial(),
            flavor: self.flavor,
        }
    }
    pub fn scale(&self, c: PadicScalar) -> Self {
        Cocycle2 {
            z: self.z.scale(c),
            flavor: self.flavor,
        }
    }
}

/// [x1, y1] ∪ [x2, y2] = [x1 γ(y2) - y1 φ(x2)] for c in R(δ*) and d in R(δ).
///
/// A (ψ,γ) first argument gives the image of that class in the (ψ,γ)
/// complex, -ψ(x1 γ(y2)) - y1' x2 with y1' = -ψ(y1).
pub fn cup_11(c: &Cocycle1, d: &Cocycle1, window: i64) -> Result<Cocycle2> {
    if !same_twist(c.delta(), &d.delta().star()?) {
        return Err(Error::Mismatch(format!(
            "cup needs dual twists, got {} and {}",
            c.delta(),
            d.delta()
        )));
    }
    if d.flavor != Flavor::PhiGamma {
        return Err(Error::Mismatch("second factor must be a (φ,γ) cocycle".into()));
    }
    let a = gamma_generator(c.delta().ctx().p);
    let gy2 = d.y.gamma(a, window)?;
    let first = c.x.product(&gy2)?;
    let neg = c.delta().ctx().int(-1);
    let z = match c.flavor {
        Flavor::PhiGamma => first.sub(&c.y.product(&d.x.phi(window)?)?)?,
        Flavor::PsiGamma => first.psi()?.scale(neg).sub(&c.y.product(&d.x)?)?,
    };
    Ok(Cocycle2::new(z, c.flavor))
}

/// h0 ∪ [z] = [h0 z] for h0 fixed by φ and γ.
pub fn cup_02(h0: &ModuleElement, c2: &Cocycle2, window: i64) -> Result<Cocycle2> {
    let a = gamma_generator(h0.delta.ctx().p);
    let dphi = h0.phi(window)?.agreement(h0);
    let dgam = h0.gamma(a, window)?.agreement(h0);
    let need = h0.delta.ctx().prec as i64 / 2;
    if dphi < need || dgam < need {
        return Err(Error::Domain("degree-0 class is not φ- and γ-invariant".into()));
    }
    Ok(Cocycle2::new(h0.product(&c2.z)?, c2.flavor))
}

/// ι_γ: H²(R(1)) → Q_p, c·Res_0(f dπ/(1+π)) with c = p/((p-1)log χ(γ)).
pub fn trace_iota_gamma(c: &Cocycle2) -> Result<PadicScalar> {
    let ctx = c.z.delta.ctx();
    if !same_twist(&c.z.delta, &cyclotomic(&ctx)) {
        return Err(Error::Mismatch(format!("trace map needs x|x|, got {}", c.z.delta)));
    }
    let r = c.z.f.residue_form()?;
    let k = trace_constant(&ctx)?;
    Ok(match c.flavor {
        Flavor::PhiGamma => k * r,
        Flavor::PsiGamma => -(k * r),
    })
}

/// The trace map for the generator γ^s, applied to Σ_{j<s} γ^j(z).
pub fn trace_iota_gamma_power(c: &Cocycle2, s: u32, window: i64) -> Result<PadicScalar> {
    if c.flavor != Flavor::PhiGamma || s == 0 {
        return Err(Error::Domain("γ-power comparison needs a (φ,γ) class and s ≥ 1".into()));
    }
    let ctx = c.z.delta.ctx();
    let a = gamma_generator(ctx.p);
    let mut term = c.z.clone();
    let mut sum = c.z.clone();
    for _ in 1..s {
        term = term.gamma(a, window)?;
        sum = sum.add(&term)?;
    }
    let r = sum.f.residue_form()?;
    let k = trace_constant(&ctx)?;
    Ok(k * r * ctx.int(s as i64).inv()?)
}

pub fn tate_pairing(c: &Cocycle1, d: &Cocycle1, window: i64) -> Result<PadicScalar> {
    trace_iota_gamma(&cup_11(c, d, window)?)
}

/// Coordinates of a class in H¹(R(1)) with respect to (f_{1,1}, f_{1,2}).
pub fn coordinates(c: &Cocycle1) -> Result<(PadicScalar, PadicScalar)> {
    let ctx = c.x.delta.ctx();
    if !same_twist(c.delta(), &cyclotomic(&ctx)) {
        return Err(Error::Mismatch("coordinates are defined on H¹(R(1))".into()));
    }
    let k = trace_constant(&ctx)?;
    let q = ctx.int(ctx.p as i64).div(&ctx.int(ctx.p as i64 - 1))?;
    let rx = c.x.f.residue_form()?;
    let ry = c.y.f.residue_form()?;
    Ok(match c.flavor {
        Flavor::PhiGamma => (k * rx, -(q * ry)),
        Flavor::PsiGamma => (k * rx, q * ry),
    })
}

/// exp(c/t · e_δ) for δ = x·unr of weight one: [(γ-1)x̃, (φ-1)x̃] with
/// x̃ = c·f/t·e_δ and f interpolating (δ(p)/p)^m at ζ_{p^m} - 1, m ≤ levels.
pub fn exp_explicit(
    delta: &PadicCharacter,
    c: PadicScalar,
    levels: u32,
    window: i64,
) -> Result<Cocycle1> {
    let ctx = delta.ctx();
    if delta.weight() != 1 || !delta.is_crystalline() {
        return Err(Error::Domain(
            "explicit exp is implemented for crystalline weight-one twists".into(),
        ));
    }
    let lam = delta.dlc_p();
    let mut vals = vec![ctx.one()];
    for _ in 0..levels {
        let last = *vals.last().expect("nonempty");
        vals.push(last * lam);
    }
    let f = lazard_interpolate(&ctx, &vals)?;
    let a = gamma_generator(ctx.p);
    let gx = divide_by_t(&f.gamma(a, 0)?.sub(&f), levels, window)?;
    let gy = divide_by_t(&f.phi(0)?.scale(lam).sub(&f), levels, window)?;
    Cocycle1::new(
        ModuleElement::new(gx.scale(c), delta.clone()),
        ModuleElement::new(gy.scale(c), delta.clone()),
        Flavor::PhiGamma,
    )
}

/// exp_f(c·e_δ) for an unramified weight-zero twist: [0, c e_δ].
pub fn expf_explicit(delta: &PadicCharacter, c: PadicScalar) -> Result<Cocycle1> {
    if delta.weight() != 0 || !delta.is_crystalline() {
        return Err(Error::Domain("exp_f is implemented for unramified weight zero".into()));
    }
    let ctx = delta.ctx();
    Cocycle1::new(
        ModuleElement::zero(delta),
        ModuleElement::new(SeriesElement::constant(&ctx, c), delta.clone()),
        Flavor::PhiGamma,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AppendixName {
    E0,
    E11,
    E12,
    F11,
    F12,
    F2,
}

impl std::str::FromStr for AppendixName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "e0" => AppendixName::E0,
            "e11" => AppendixName::E11,
            "e12" => AppendixName::E12,
            "f11" => AppendixName::F11,
            "f12" => AppendixName::F12,
            "f2" => AppendixName::F2,
            _ => return Err(Error::Parse(format!("unknown basis element {s}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub enum AppendixElement {
    Degree0(ModuleElement),
    Degree1(Cocycle1),
    Degree2(Cocycle2),
}

/// ((p-1)/p)·log χ(γ)·(1+π)/π.
fn f2_series(ctx: &PadicCtx) -> Result<SeriesElement> {
    let c0 = ctx.int(ctx.p as i64 - 1).div(&ctx.int(ctx.p as i64))? * log_chi(ctx)?;
    Ok(SeriesElement::from_coeffs(ctx, -1, vec![c0, c0]))
}

/// The bases of H^i(R) and H^{2-i}(R(1)) in which the Tate pairing is the
/// identity matrix.
pub fn appendix_basis(
    ctx: &PadicCtx,
    which: AppendixName,
    levels: u32,
    window: i64,
) -> Result<AppendixElement> {
    let triv = trivial(ctx);
    let cyc = cyclotomic(ctx);
    let constant = |c: PadicScalar, d: &PadicCharacter| {
        ModuleElement::new(SeriesElement::constant(ctx, c), d.clone())
    };
    Ok(match which {
        AppendixName::E0 => AppendixElement::Degree0(constant(ctx.one(), &triv)),
        AppendixName::E11 => AppendixElement::Degree1(Cocycle1::new(
            constant(log_chi(ctx)?, &triv),
            ModuleElement::zero(&triv),
            Flavor::PhiGamma,
        )?),
        AppendixName::E12 => AppendixElement::Degree1(expf_explicit(&triv, ctx.one())?),
        AppendixName::F11 => AppendixElement::Degree1(Cocycle1::new(
            ModuleElement::new(f2_series(ctx)?, cyc.clone()),
            ModuleElement::zero(&cyc),
            Flavor::PsiGamma,
        )?),
        AppendixName::F12 => {
            AppendixElement::Degree1(exp_explicit(&cyc, ctx.one(), levels, window)?)
        }
        AppendixName::F2 => AppendixElement::Degree2(Cocycle2::new(
            ModuleElement::new(f2_series(ctx)?, cyc),
            Flavor::PhiGamma,
        )),
    })
}

/// The residues of (γ(f)-f)/t and (φ(f)/p - f)/t for f interpolating
/// p^{-m} at ζ_{p^m} - 1, m ≤ levels.
pub fn interpolation_residues(ctx: &PadicCtx, levels: u32, window: i64) -> Result<(PadicScalar, PadicScalar)> {
    let f12 = exp_explicit(&cyclotomic(ctx), ctx.one(), levels, window)?;
    Ok((f12.x.f.residue_form()?, f12.y.f.residue_form()?))
}

/// Norm from Q_p(ζ_{p^n}) to Q_p as the product of all conjugates.
pub fn norm_to_base(x: &CycloElement) -> Result<PadicScalar> {
    let ctx = x.ctx();
    let n = x.level();
    if n == 0 {
        return x.to_scalar().ok_or_else(|| Error::Domain("level-0 element".into()));
    }
    let q = ppow(ctx.p, n) as i64;
    let mut acc = CycloElement::one(&ctx, n);
    for a in 1..q {
        if a % ctx.p as i64 != 0 {
            acc = &acc * &x.sigma(a)?;
        }
    }
    acc.to_scalar()
        .ok_or_else(|| Error::Domain("norm did not land in Q_p".into()))
}

/// ∫_{Z_p^×} μ_γ for the distribution with Amice transform log(γ(π)/π):
/// the total mass log χ(γ) minus the mass (1/p)Σ_{ζ^p=1} log(γ(π)/π)(ζ-1)
/// of pZ_p, the primitive terms summed as the log of a norm.
pub fn gamma_log_unit_mass(ctx: &PadicCtx) -> Result<PadicScalar> {
    let a = gamma_generator(ctx.p);
    let total = log_chi(ctx)?;
    let one = CycloElement::one(ctx, 1);
    let num = &CycloElement::zeta_pow(ctx, 1, a) - &one;
    let u = &num * &CycloElement::inv_zeta_minus_one(ctx, 1)?;
    let prim = padic_log(&norm_to_base(&u)?)?;
    let on_p = (total + prim) * ctx.p_pow(-1);
    Ok(total - on_p)
}

/// The value ι_{x|x|}(α_0(1 e_1)): the ∂-step turns it into
/// -ι_{|x|}(log(γ(π)/π) e_{|x|}) / (((p-1)/p) log χ(γ)).
pub fn alpha0_trace(ctx: &PadicCtx) -> Result<PadicScalar> {
    let m = gamma_log_unit_mass(ctx)?;
    let norm = ctx.int(ctx.p as i64 - 1).div(&ctx.int(ctx.p as i64))? * log_chi(ctx)?;
    Ok(-(m.div(&norm)?))
}

/// Both sides of (γ-1)((1+π)/π e_1) = ∂log(γ(π)/π) e_1 below `window`.
pub fn gamma_log_identity(ctx: &PadicCtx, window: i64) -> Result<(SeriesElement, SeriesElement)> {
    let a = gamma_generator(ctx.p);
    let h = ModuleElement::new(
        SeriesElement::from_coeffs(ctx, -1, vec![ctx.one(), ctx.one()]),
        cyclotomic(ctx),
    );
    let lhs = h.gamma(a, window)?.sub(&h)?.f.truncate(window);
    let g = SeriesElement::one_plus_pi_pow(ctx, a, 0)?
        .sub(&SeriesElement::one(ctx))
        .shift(-1);
    let rhs = g.partial().mul(&g.inverse(window)?).truncate(window);
    Ok((lhs, rhs))
}

/// n_0 = max(n(δ), 1), or max(n(δ), 2) when p = 2.
pub fn n0(delta: &PadicCharacter) -> u32 {
    let floor = if delta.ctx().p == 2 { 2 } else { 1 };
    delta.conductor().max(floor)
}

/// Digits to which ψ(f) = δ(p)f holds on the window ⌊deg/p⌋ it determines,
/// measured against the size of δ(p)f there.
pub fn eigen_defect(delta: &PadicCharacter, f: &SeriesElement) -> Result<i64> {
    let p = delta.ctx().p as i64;
    let w = (f.stored_end() / p).max(1);
    let lf = f.scale(delta.value_at_p());
    let r = f.psi()?.sub(&lf);
    let size = (0..w)
        .filter_map(|j| lf.coeff(j).ok().and_then(|c| c.valuation()))
        .min()
        .unwrap_or(0);
    Ok((0..w)
        .map(|j| {
            r.coeff(j)
                .map(|c| c.valuation().unwrap_or(c.abs_prec()))
                .unwrap_or(i64::MIN)
        })
        .min()
        .map_or(crate::padic::EXACT, |d| d.saturating_sub(size)))
}

/// Taylor order making the centred expansion exact to the working precision.
fn taylor_order(ctx: &PadicCtx, n: u32) -> u32 {
    (ctx.prec + 4).div_ceil(n.max(1))
}

/// ∫_{Z_p^×} δ^{-1} μ_f, through the centred expansion on discs of level n_0.
pub fn unit_integral(delta: &PadicCharacter, f: &SeriesElement) -> Result<CycloElement> {
    let n = n0(delta);
    let mu = Distribution::from_amice(f.clone(), 0)?;
    Ok(mu.integrate_character(delta, n, taylor_order(&delta.ctx(), n))?.0)
}

/// ι_δ([f e_δ]) = δ(-1)·∫_{Z_p^×} δ^{-1} μ_f for f with ψ(f) = δ(p) f.
pub fn iota_delta(delta: &PadicCharacter, f: &SeriesElement) -> Result<CycloElement> {
    if !delta.is_generic() {
        return Err(Error::Exceptional(format!("{delta} is not generic")));
    }
    let need = delta.ctx().prec as i64 / 2;
    let d = eigen_defect(delta, f)?;
    if d < need {
        return Err(Error::Domain(format!(
            "ψ-eigen relation holds only to {d} digits"
        )));
    }
    Ok(unit_integral(delta, f)?.scale(delta.value_at_minus_one()?))
}

fn embed_both(a: &CycloElement, b: &CycloElement) -> Result<(CycloElement, CycloElement)> {
    let l = a.level().max(b.level());
    Ok((a.embed(l)?, b.embed(l)?))
}

/// Agreement of two cyclotomic numbers of possibly different levels.
pub fn cyclo_agreement(a: &CycloElement, b: &CycloElement) -> Result<i64> {
    let (x, y) = embed_both(a, b)?;
    Ok(x.agreement(&y))
}

pub fn cyclo_mul(a: &CycloElement, b: &CycloElement) -> Result<CycloElement> {
    let (x, y) = embed_both(a, b)?;
    Ok(&x * &y)
}

/// (pδ(p))^{-n_0} Σ_{i ∈ (Z/p^{n_0})^×} δ̃(i) σ_i(g(ζ_{p^{n_0}} - 1)) for weight zero.
fn galois_average(delta: &PadicCharacter, g: &SeriesElement) -> Result<CycloElement> {
    let ctx = delta.ctx();
    debug_assert_eq!(delta.weight(), 0);
    let n = n0(delta);
    let val = g.eval_at_zeta(n)?;
    let w = n.max(delta.value_level());
    let q = ppow(ctx.p, n) as i64;
    let mut sum = CycloElement::zero(&ctx, w);
    for i in 1..q {
        if i % ctx.p as i64 == 0 {
            continue;
        }
        let s = val.sigma(i)?.embed(w)?;
        let d = delta.fin_value(i)?.embed(w)?;
        sum = &sum + &(&d * &s);
    }
    let pre = (ctx.int(ctx.p as i64) * delta.value_at_p()).pow(-(n as i64))?;
    Ok(sum.scale(pre))
}

/// f_0 with ∂^j f_0 ≡ f modulo t-multiples and constants, computed on the
/// Dirac weights: a_m ↦ a_m / m^j for m ≥ 1.
fn partial_antiderivative(f: &SeriesElement, j: u32) -> Result<(SeriesElement, PadicScalar, PadicScalar)> {
    let ctx = f.ctx();
    let a = f.to_x_basis()?;
    let mut out = vec![ctx.zero(); a.len()];
    let mut s_all = ctx.zero();
    let mut s_p = ctx.zero();
    for (m, c) in a.iter().enumerate().skip(1) {
        let v = c.div(&ctx.int(m as i64).pow(j as i64)?)?;
        out[m] = v;
        s_all = s_all + v;
        if m % ctx.p as usize == 0 {
            s_p = s_p + v;
        }
    }
    Ok((SeriesElement::from_x_basis(&ctx, &out), s_all, s_p))
}

/// The left side of the explicit reciprocity law: the Galois-averaged
/// cyclotomic value of the class of f e_δ, as the coefficient of t^{-k}.
///
/// Weight k ≤ 0 is moved to weight zero by ∂^{-k}; weight k ≥ 1 is reached
/// from weight zero by ∂-antiderivatives and the t-division square, whose
/// graded part carries the sign of e_δ ↦ -e_{δx}.
pub fn reciprocity_lhs(delta: &PadicCharacter, f: &SeriesElement) -> Result<CycloElement> {
    let ctx = delta.ctx();
    if !delta.is_generic() {
        return Err(Error::Exceptional(format!("{delta} is not generic")));
    }
    let k = delta.weight();
    let mut d0 = delta.clone();
    if k <= 0 {
        let mut g = f.clone();
        for _ in 0..(-k) {
            g = g.partial();
            d0 = d0.times_x();
        }
        let alpha = galois_average(&d0, &g)?;
        let fact = gamma_star(&ctx, k)?;
        // Γ*(k) = (-1)^k/(-k)!, and the weight-zero value carries (-1)^k
        let sign = if k % 2 == 0 { ctx.one() } else { ctx.int(-1) };
        return Ok(alpha.scale(fact * sign));
    }
    d0 = PadicCharacter::new(
        &ctx,
        delta.value_at_p() * ctx.p_pow(-k),
        delta.finite_part(),
        delta.level(),
        0,
    )?;
    let (g, s_all, s_p) = partial_antiderivative(f, k as u32)?;
    let g = if d0.is_crystalline() {
        if k != 1 {
            return Err(Error::Domain(
                "unramified twists of weight ≥ 2 are not implemented".into(),
            ));
        }
        let lam = d0.value_at_p();
        let c = (lam * s_all - s_p).div(&(ctx.one() - lam))?;
        g.add(&SeriesElement::constant(&ctx, c))
    } else {
        g
    };
    let alpha = galois_average(&d0, &g)?;
    // value_k = (-1)^k (k-1)! α
    let fact = gamma_star(&ctx, k)?;
    let sign = if k % 2 == 0 { ctx.one() } else { ctx.int(-1) };
    Ok(alpha.scale(fact * sign))
}

/// The right side: Γ*(k)·δ(-1)/ε(δ,ζ) (or the crystalline ratio) times
/// ∫_{Z_p^×} δ^{-1} μ_f.
pub fn reciprocity_rhs(delta: &PadicCharacter, f: &SeriesElement) -> Result<CycloElement> {
    let s = delta.de_rham_scalar(1)?;
    let i = unit_integral(delta, f)?;
    cyclo_mul(&s, &i)
}
