//! Verification suites. Each record recomputes both sides of one identity and
//! reports their p-adic agreement.

use std::fmt;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::{gamma_star, FinitePart};
use crate::cyclo::CycloElement;
use crate::dif::iota;
use crate::distributions::{amice_to_moments, colmez_eval, moments_to_amice, psi_eigenvector, Distribution};
use crate::error::{Error, Result};
use crate::padic::{is_prime, PadicCtx, PadicScalar, EXACT};
use crate::phigamma::{
    alpha0_trace, appendix_basis, coordinates, cup_02, cyclo_agreement, cyclo_mul, gamma_log_identity,
    gamma_log_unit_mass, interpolation_residues, iota_delta, log_chi, reciprocity_lhs, reciprocity_rhs,
    tate_pairing, trace_iota_gamma, AppendixElement, AppendixName,
};
use crate::series::{lazard_interpolate, SeriesElement};
use crate::PadicCharacter;

pub const SCHEMA_VERSION: u32 = 1;

/// Session parameters; one session works over a single prime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub p: u32,
    /// Coefficient digits M.
    pub prec: u32,
    /// π-window N; 2p³ when unset.
    pub pi_window: Option<i64>,
    /// t-window D.
    pub t_window: usize,
    pub seed: u64,
    /// Extra digits carried by suites that compare at full precision.
    pub guard: u32,
    /// Random inputs per operator law.
    pub samples: usize,
    /// Random characters per family.
    pub characters: usize,
    /// Interpolation levels for the appendix constructions.
    pub levels: u32,
    pub residue_digits: i64,
    pub reciprocity_digits: i64,
    /// Record wall time per identity. Off by default so reports stay reproducible.
    pub timings: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            p: 3,
            prec: 12,
            pi_window: None,
            t_window: 16,
            seed: 1,
            guard: 8,
            samples: 200,
            characters: 20,
            levels: 3,
            residue_digits: 8,
            reciprocity_digits: 6,
            timings: false,
        }
    }
}

impl Config {
    /// Reads flat `key = value` lines on top of the defaults; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        c.apply(text)?;
        Ok(c)
    }

    pub fn apply(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key = value, got {line:?}")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, val: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, val: &str) -> Result<T> {
            val.parse()
                .map_err(|_| Error::Parse(format!("bad value {val:?} for {key}")))
        }
        match key.replace('-', "_").as_str() {
            "p" => self.p = num(key, val)?,
            "prec" | "m" => self.prec = num(key, val)?,
            "pi_window" | "n" => self.pi_window = Some(num(key, val)?),
            "t_window" | "d" => self.t_window = num(key, val)?,
            "seed" => self.seed = num(key, val)?,
            "guard" => self.guard = num(key, val)?,
            "samples" => self.samples = num(key, val)?,
            "characters" => self.characters = num(key, val)?,
            "levels" => self.levels = num(key, val)?,
            "residue_digits" => self.residue_digits = num(key, val)?,
            "reciprocity_digits" => self.reciprocity_digits = num(key, val)?,
            "timings" => self.timings = num(key, val)?,
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::Domain(format!("{} is not prime", self.p)));
        }
        PadicCtx::new(self.p, self.prec)?;
        if self.pi_window() < 2 || self.t_window == 0 || self.levels == 0 {
            return Err(Error::Domain("windows and levels must be positive".into()));
        }
        Ok(())
    }

    pub fn pi_window(&self) -> i64 {
        self.pi_window.unwrap_or(2 * (self.p as i64).pow(3))
    }

    pub fn ctx(&self) -> Result<PadicCtx> {
        PadicCtx::new(self.p, self.prec)
    }

    /// Context carrying the guard digits, capped at what the scalar type holds.
    pub fn working_ctx(&self) -> Result<PadicCtx> {
        let w = (self.prec + self.guard).min(PadicCtx::max_prec(self.p)).max(self.prec);
        PadicCtx::new(self.p, w)
    }

    /// The threshold a record must reach: the requested digits, but never
    /// allowing a loss of more than half the coefficient digits.
    pub fn required(&self, wanted: i64) -> i64 {
        let m = self.prec as i64;
        wanted.max(m - m / 2).min(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Operators,
    Epsilon,
    Appendix,
    Reciprocity,
    Partial,
    Transforms,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Operators,
        Suite::Epsilon,
        Suite::Appendix,
        Suite::Reciprocity,
        Suite::Partial,
        Suite::Transforms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Operators => "operators",
            Suite::Epsilon => "epsilon",
            Suite::Appendix => "appendix",
            Suite::Reciprocity => "reciprocity",
            Suite::Partial => "partial",
            Suite::Transforms => "transforms",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub identity_id: String,
    pub params: String,
    pub lhs: String,
    pub rhs: String,
    /// p-adic digits of agreement, capped at the coefficient digits.
    pub agreement_valuation: i64,
    pub required: i64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub suite: String,
    pub p: u32,
    pub prec: u32,
    pub pi_window: i64,
    pub t_window: usize,
    pub seed: u64,
    pub records: Vec<Record>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("suite\tidentity_id\tparams\tagreement\trequired\tpass\tlhs\trhs\terror\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                self.suite,
                r.identity_id,
                r.params,
                r.agreement_valuation,
                r.required,
                if r.pass { "PASS" } else { "FAIL" },
                r.lhs,
                r.rhs,
                r.error.as_deref().unwrap_or("")
            );
        }
        s
    }
}

/// How the records of a suite are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    /// Across the rayon pool; sequential when built without `parallel`.
    Parallel,
    Sequential,
}

struct Outcome {
    lhs: String,
    rhs: String,
    agreement: i64,
}

type Job = Box<dyn Fn() -> Result<Outcome> + Send + Sync>;

struct Task {
    id: String,
    params: String,
    required: i64,
    job: Job,
}

fn task<F>(id: &str, params: String, required: i64, f: F) -> Task
where
    F: Fn() -> Result<Outcome> + Send + Sync + 'static,
{
    Task {
        id: id.to_string(),
        params,
        required,
        job: Box::new(f),
    }
}

fn scalars(l: PadicScalar, r: PadicScalar) -> Outcome {
    Outcome {
        lhs: l.to_string(),
        rhs: r.to_string(),
        agreement: l.agreement(&r),
    }
}

/// Agreement relative to the size of `r`: cyclotomic values here carry
/// arbitrary normalizations, so digits are counted from the leading one.
fn cyclos(l: &CycloElement, r: &CycloElement) -> Result<Outcome> {
    let abs = cyclo_agreement(l, r)?;
    let v = r.coeffs().iter().filter_map(|c| c.valuation()).min();
    Ok(Outcome {
        lhs: l.to_string(),
        rhs: r.to_string(),
        agreement: match v {
            Some(v) if abs < EXACT => abs - v,
            _ => abs,
        },
    })
}

fn series(l: &SeriesElement, r: &SeriesElement) -> Outcome {
    let show = |s: &SeriesElement| serde_json::to_string(s).unwrap_or_default();
    Outcome {
        lhs: show(l),
        rhs: show(r),
        agreement: l.agreement(r),
    }
}

fn evaluate(t: Task, cap: i64, timings: bool) -> Record {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(|| (t.job)()));
    let (lhs, rhs, agreement, error) = match res {
        Ok(Ok(o)) => (o.lhs, o.rhs, o.agreement.min(cap), None),
        Ok(Err(e)) => (String::new(), String::new(), 0, Some(e.to_string())),
        Err(_) => (String::new(), String::new(), 0, Some("computation panicked".to_string())),
    };
    Record {
        identity_id: t.id,
        params: t.params,
        lhs,
        rhs,
        agreement_valuation: agreement,
        required: t.required,
        pass: error.is_none() && agreement >= t.required,
        error,
        wall_time_ms: timings.then(|| start.elapsed().as_secs_f64() * 1e3),
    }
}

fn execute(tasks: Vec<Task>, cap: i64, timings: bool, exec: Exec) -> Vec<Record> {
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            tasks.into_par_iter().map(|t| evaluate(t, cap, timings)).collect()
        }
        _ => tasks.into_iter().map(|t| evaluate(t, cap, timings)).collect(),
    }
}

pub fn run_suite(suite: Suite, cfg: &Config) -> Result<VerificationReport> {
    run_suite_with(suite, cfg, Exec::Parallel)
}

pub fn run_all(cfg: &Config) -> Result<Vec<VerificationReport>> {
    Suite::ALL.into_iter().map(|s| run_suite(s, cfg)).collect()
}

pub fn run_suite_with(suite: Suite, cfg: &Config, exec: Exec) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(suite as u64);
    let tasks = match suite {
        Suite::Operators => operator_tasks(cfg, &mut rng)?,
        Suite::Epsilon => epsilon_tasks(cfg, &mut rng)?,
        Suite::Appendix => appendix_tasks(cfg)?,
        Suite::Reciprocity => reciprocity_tasks(cfg, &mut rng)?,
        Suite::Partial => partial_tasks(cfg, &mut rng)?,
        Suite::Transforms => transform_tasks(cfg, &mut rng)?,
    };
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        suite: suite.name().to_string(),
        p: cfg.p,
        prec: cfg.prec,
        pi_window: cfg.pi_window(),
        t_window: cfg.t_window,
        seed: cfg.seed,
        records: execute(tasks, cfg.prec as i64, cfg.timings, exec),
    })
}

fn random_int(rng: &mut ChaCha8Rng, ctx: &PadicCtx) -> PadicScalar {
    ctx.int(rng.gen_range(-1_000_000i64..=1_000_000))
}

fn random_poly(rng: &mut ChaCha8Rng, ctx: &PadicCtx, lo: i64, len: usize) -> SeriesElement {
    SeriesElement::from_coeffs(ctx, lo, (0..len).map(|_| random_int(rng, ctx)).collect())
}

fn random_unit(rng: &mut ChaCha8Rng, p: u32, bound: i64) -> i64 {
    loop {
        let a = rng.gen_range(-bound..=bound);
        if a.rem_euclid(p as i64) != 0 {
            return a;
        }
    }
}

/// A rational with numerator and denominator prime to p, times p^j.
fn random_dp(rng: &mut ChaCha8Rng, ctx: &PadicCtx, j: i64) -> PadicScalar {
    let num = random_unit(rng, ctx.p, 40);
    let den = random_unit(rng, ctx.p, 40).abs();
    ctx.rational(num, den).expect("unit denominator") * ctx.p_pow(j)
}

fn random_fin(rng: &mut ChaCha8Rng, p: u32, m: u32) -> FinitePart {
    if p == 2 {
        let b = if m >= 2 { rng.gen_range(0..1u64 << (m - 2)) } else { 0 };
        FinitePart::Two {
            s: if m >= 2 { rng.gen_range(0..2) } else { 0 },
            b,
        }
    } else {
        FinitePart::Odd {
            e: rng.gen_range(0..PadicCharacter::group_order(p, m)),
        }
    }
}

/// A character of conductor in `1..=2` and weight k; δ(p) = u·p^k for a
/// random rational unit u.
fn random_ramified(rng: &mut ChaCha8Rng, ctx: &PadicCtx, k: i64) -> Result<PadicCharacter> {
    loop {
        let m = if ctx.p == 2 { 2 } else { rng.gen_range(1..=2) };
        let fin = random_fin(rng, ctx.p, m);
        let dp = random_dp(rng, ctx, k);
        let d = PadicCharacter::new(ctx, dp, fin, m, k)?;
        if (1..=2).contains(&d.conductor()) {
            return Ok(d);
        }
    }
}

/// A random truncated ψ-eigenvector for the eigenvalue δ(p), scaled by a unit.
fn random_eigenvector(rng: &mut ChaCha8Rng, delta: &PadicCharacter, n: usize) -> Result<SeriesElement> {
    let ctx = delta.ctx();
    let basis = psi_eigenvector(delta.value_at_p(), n)?;
    if basis.is_empty() {
        return Err(Error::Domain("no ψ-eigenvectors in the window".into()));
    }
    let i = rng.gen_range(0..basis.len());
    Ok(basis[i].scale(ctx.int(random_unit(rng, ctx.p, 50))))
}

fn operator_tasks(cfg: &Config, rng: &mut ChaCha8Rng) -> Result<Vec<Task>> {
    let ctx = cfg.ctx()?;
    let p = ctx.p as i64;
    let n = cfg.pi_window();
    let short = (n / p).max(2);
    let exact = cfg.prec as i64;
    let mut out = Vec::new();
    for s in 0..cfg.samples {
        let len = rng.gen_range(1..=short as usize);
        let g = random_poly(rng, &ctx, 0, len);
        let params = format!("sample={s};deg={}", len - 1);
        let g1 = g.clone();
        out.push(task("psi_phi_identity", params.clone(), exact, move || {
            Ok(series(&g1.phi(n)?.psi()?, &g1))
        }));

        let i = rng.gen_range(0..p);
        let g2 = g.clone();
        out.push(task("psi_branch", format!("{params};i={i}"), exact, move || {
            let ctx = g2.ctx();
            let lhs = SeriesElement::one_plus_pi_pow(&ctx, i, 0)?.mul(&g2.phi(n)?).psi()?;
            let rhs = if i == 0 { g2.clone() } else { SeriesElement::zero(&ctx) };
            Ok(series(&lhs, &rhs))
        }));

        let a = random_unit(rng, ctx.p, p.pow(4));
        let b = random_unit(rng, ctx.p, p.pow(4));
        let f = g.truncate(short);
        out.push(task("gamma_composition", format!("{params};a={a};b={b}"), exact, move || {
            let lhs = f.gamma(a, short)?.gamma(b, short)?;
            Ok(series(&lhs, &f.gamma(a * b, short)?))
        }));

        let pole = rng.gen_range(1..=6i64);
        let hlen = rng.gen_range(1..=n as usize);
        let h = random_poly(rng, &ctx, -pole, hlen);
        let h1 = h.clone();
        let lparams = format!("sample={s};lo={};hi={}", -pole, h.stored_end());
        out.push(task("residue_psi", lparams.clone(), exact, move || {
            Ok(scalars(h1.psi()?.residue_form()?, h1.residue_form()?))
        }));
        out.push(task("residue_partial", lparams, exact, move || {
            Ok(scalars(h.partial().residue_form()?, h.ctx().zero()))
        }));
    }
    Ok(out)
}

fn epsilon_tasks(cfg: &Config, rng: &mut ChaCha8Rng) -> Result<Vec<Task>> {
    let ctx = cfg.working_ctx()?;
    let p = ctx.p;
    let exact = cfg.prec as i64;
    let mut out = Vec::new();
    for _ in 0..cfg.characters {
        let m = if p == 2 { 2 } else { rng.gen_range(1..=2) };
        let k = rng.gen_range(-3..=3i64);
        let delta = PadicCharacter::new(&ctx, random_dp(rng, &ctx, k), random_fin(rng, p, m), m, k)?;
        let params = delta.to_string();
        let d = delta.clone();
        out.push(task("epsilon_duality", params.clone(), exact, move || {
            let prod = cyclo_mul(&d.epsilon(1)?, &d.dual()?.epsilon(-1)?)?;
            cyclos(&prod, &CycloElement::one(&d.ctx(), 0))
        }));
        let a = random_unit(rng, p, (p as i64).pow(3));
        let d = delta.clone();
        out.push(task("epsilon_twist", format!("{params};a={a}"), exact, move || {
            let rhs = cyclo_mul(&d.fin_value(a)?, &d.epsilon(1)?)?;
            cyclos(&d.epsilon(a)?, &rhs)
        }));
        let d = delta;
        out.push(task("epsilon_star_product", params, exact, move || {
            let prod = cyclo_mul(&d.epsilon(1)?, &d.star()?.epsilon(1)?)?;
            cyclos(&prod, &CycloElement::scalar(&d.ctx(), 0, d.fin_sign()?))
        }));
    }
    for _ in 0..cfg.characters.div_ceil(4) {
        let k = rng.gen_range(-3..=3i64);
        let delta = PadicCharacter::unramified(&ctx, random_dp(rng, &ctx, k), k)?;
        let a = random_unit(rng, p, (p as i64).pow(3));
        out.push(task("epsilon_unramified", format!("{delta};a={a}"), exact, move || {
            cyclos(&delta.epsilon(a)?, &CycloElement::one(&delta.ctx(), 0))
        }));
    }
    let (fin, m) = if p == 2 {
        (FinitePart::Two { s: 1, b: 0 }, 2)
    } else {
        (FinitePart::Odd { e: (p as u64 - 1) / 2 }, 1)
    };
    let quad = PadicCharacter::new(&ctx, random_dp(rng, &ctx, 0), fin, m, 0)?;
    out.push(task("gauss_sum_square", quad.to_string(), exact, move || {
        let ctx = quad.ctx();
        let n = quad.conductor() as i64;
        let g = quad.epsilon(1)?.scale(quad.dlc_p().pow(-n)?);
        let want = quad.fin_sign()? * ctx.p_pow(n);
        cyclos(&(&g * &g), &CycloElement::scalar(&ctx, g.level(), want))
    }));
    Ok(out)
}

fn degree1(e: AppendixElement) -> Result<crate::phigamma::Cocycle1> {
    match e {
        AppendixElement::Degree1(c) => Ok(c),
        _ => Err(Error::Mismatch("expected a degree-one class".into())),
    }
}

fn appendix_tasks(cfg: &Config) -> Result<Vec<Task>> {
    let ctx = cfg.ctx()?;
    let wctx = cfg.working_ctx()?;
    let p = ctx.p as i64;
    let n = cfg.pi_window();
    let levels = cfg.levels;
    let d = cfg.t_window;
    let res = cfg.required(cfg.residue_digits);
    let exact = cfg.prec as i64;
    let params = format!("levels={levels};window={n}");
    let mut out = Vec::new();

    out.push(task("residue_phi_side", params.clone(), res, move || {
        let (_, r) = interpolation_residues(&ctx, levels, n)?;
        Ok(scalars(r, ctx.rational(1 - p, p)?))
    }));
    out.push(task("residue_gamma_side", params.clone(), res, move || {
        let (g, _) = interpolation_residues(&ctx, levels, n)?;
        Ok(scalars(g, ctx.zero()))
    }));

    let pairs = [
        (AppendixName::F11, AppendixName::E11, 0),
        (AppendixName::F11, AppendixName::E12, 1),
        (AppendixName::F12, AppendixName::E11, 1),
        (AppendixName::F12, AppendixName::E12, 0),
    ];
    for (f, e, want) in pairs {
        let id = format!("pairing_{}_{}", name_of(f), name_of(e));
        out.push(task(&id, params.clone(), exact, move || {
            let c = degree1(appendix_basis(&wctx, f, levels, n)?)?;
            let d = degree1(appendix_basis(&wctx, e, levels, n)?)?;
            Ok(scalars(tate_pairing(&c, &d, n)?, wctx.int(want)))
        }));
    }
    out.push(task("pairing_f2_e0", params.clone(), exact, move || {
        let (AppendixElement::Degree0(e0), AppendixElement::Degree2(f2)) = (
            appendix_basis(&wctx, AppendixName::E0, levels, n)?,
            appendix_basis(&wctx, AppendixName::F2, levels, n)?,
        ) else {
            return Err(Error::Mismatch("unexpected degrees".into()));
        };
        Ok(scalars(trace_iota_gamma(&cup_02(&e0, &f2, n)?)?, wctx.one()))
    }));
    for (which, want) in [(AppendixName::F11, (1, 0)), (AppendixName::F12, (0, 1))] {
        let id = format!("coordinates_{}", name_of(which));
        out.push(task(&id, params.clone(), res, move || {
            let c = degree1(appendix_basis(&ctx, which, levels, n)?)?;
            let (a, b) = coordinates(&c)?;
            let oa = scalars(a, ctx.int(want.0));
            let ob = scalars(b, ctx.int(want.1));
            Ok(Outcome {
                lhs: format!("({}, {})", oa.lhs, ob.lhs),
                rhs: format!("({}, {})", oa.rhs, ob.rhs),
                agreement: oa.agreement.min(ob.agreement),
            })
        }));
    }

    out.push(task("unit_mass", String::new(), res, move || {
        let want = ctx.rational(p - 1, p)? * log_chi(&ctx)?;
        Ok(scalars(gamma_log_unit_mass(&ctx)?, want))
    }));
    out.push(task("alpha0_trace", String::new(), res, move || {
        Ok(scalars(alpha0_trace(&ctx)?, ctx.int(-1)))
    }));
    let w = n.min(5 * p);
    out.push(task("gamma_log_identity", format!("window={w}"), res, move || {
        let (l, r) = gamma_log_identity(&ctx, w)?;
        Ok(series(&l, &r))
    }));
    for lvl in 1..=levels.min(2) {
        out.push(task("iota_polar_term", format!("n={lvl};D={d}"), res, move || {
            let vals: Vec<PadicScalar> = (0..=levels as i64).map(|m| ctx.p_pow(-m)).collect();
            let f = lazard_interpolate(&ctx, &vals)?;
            let x = iota(&f, lvl, d)?.scale(ctx.p_pow(lvl as i64)).div_t();
            cyclos(&x.coeff(-1)?, &CycloElement::one(&ctx, lvl))
        }));
    }
    Ok(out)
}

fn name_of(n: AppendixName) -> &'static str {
    match n {
        AppendixName::E0 => "e0",
        AppendixName::E11 => "e11",
        AppendixName::E12 => "e12",
        AppendixName::F11 => "f11",
        AppendixName::F12 => "f12",
        AppendixName::F2 => "f2",
    }
}

fn reciprocity_task(id: &str, required: i64, delta: PadicCharacter, f: SeriesElement) -> Task {
    task(id, delta.to_string(), required, move || {
        cyclos(&reciprocity_lhs(&delta, &f)?, &reciprocity_rhs(&delta, &f)?)
    })
}

fn reciprocity_tasks(cfg: &Config, rng: &mut ChaCha8Rng) -> Result<Vec<Task>> {
    let ctx = cfg.working_ctx()?;
    let n = cfg.pi_window() as usize;
    let req = cfg.required(cfg.reciprocity_digits);
    let count = cfg.characters.div_ceil(4).max(5);
    let mut out = Vec::new();
    for _ in 0..count {
        let d = random_ramified(rng, &ctx, 0)?;
        let f = random_eigenvector(rng, &d, n)?;
        out.push(reciprocity_task("reciprocity_ramified", req, d, f));
    }
    for _ in 0..count {
        let d = loop {
            let d = PadicCharacter::unramified(&ctx, random_dp(rng, &ctx, 0), 0)?;
            if d.is_generic() {
                break d;
            }
        };
        let f = random_eigenvector(rng, &d, n)?;
        out.push(reciprocity_task("reciprocity_crystalline", req, d, f));
    }
    for _ in 0..count {
        let d = random_ramified(rng, &ctx, 1)?;
        let f = random_eigenvector(rng, &d, n)?;
        out.push(reciprocity_task("reciprocity_weight_one", req, d, f));
    }
    Ok(out)
}

fn partial_tasks(cfg: &Config, rng: &mut ChaCha8Rng) -> Result<Vec<Task>> {
    let ctx = cfg.working_ctx()?;
    let n = cfg.pi_window() as usize;
    let req = cfg.required(cfg.reciprocity_digits);
    let exact = cfg.prec as i64;
    let mut out = Vec::new();
    for k in [-2i64, -1, 1, 2] {
        out.push(task("gamma_star_recursion", format!("k={k}"), exact, move || {
            Ok(scalars(ctx.int(k) * gamma_star(&ctx, k)?, gamma_star(&ctx, k + 1)?))
        }));
        for _ in 0..2 {
            let d = random_ramified(rng, &ctx, k)?;
            let f = random_eigenvector(rng, &d, n)?;
            let params = d.to_string();
            let (d1, f1) = (d.clone(), f.clone());
            out.push(task("partial_iota_sign", params.clone(), req, move || {
                let lhs = iota_delta(&d1.times_x(), &f1.partial())?;
                let rhs = -&iota_delta(&d1, &f1)?;
                cyclos(&lhs, &rhs)
            }));
            let d2 = d.clone();
            out.push(task("de_rham_recursion", params.clone(), exact, move || {
                let lhs = d2.times_x().de_rham_scalar(1)?;
                let rhs = d2.de_rham_scalar(1)?.scale(ctx.int(-k));
                cyclos(&lhs, &rhs)
            }));
            let (d3, f3) = (d, f.clone());
            out.push(task("partial_reciprocity_chain", params.clone(), req, move || {
                let lhs = reciprocity_lhs(&d3.times_x(), &f3.partial())?;
                let rhs = reciprocity_lhs(&d3, &f3)?.scale(ctx.int(-k));
                cyclos(&lhs, &rhs)
            }));
            let j = rng.gen_range(0..4u32);
            out.push(task("partial_moment_shift", format!("{params};j={j}"), req, move || {
                let mu = Distribution::from_amice(f.clone(), 0)?;
                Ok(scalars(mu.partial().moment(j)?, mu.moment(j + 1)?))
            }));
        }
    }
    Ok(out)
}

fn transform_tasks(cfg: &Config, rng: &mut ChaCha8Rng) -> Result<Vec<Task>> {
    let ctx = cfg.ctx()?;
    let p = ctx.p as i64;
    let exact = cfg.prec as i64;
    let trip = cfg.required(cfg.prec as i64 - 2);
    let mut out = Vec::new();
    // The inverse transform divides by j!, so the moments carry the guard
    // digits and the length keeps v_p((len-1)!) within guard + 2.
    let wctx = cfg.working_ctx()?;
    let budget = (wctx.prec - ctx.prec + 2) as i64;
    let mut max_len = 1usize;
    while max_len < cfg.pi_window() as usize && legendre(ctx.p, max_len as u64) <= budget {
        max_len += 1;
    }
    for s in 0..cfg.samples.div_ceil(10) {
        let len = rng.gen_range(1..=max_len);
        let f = random_poly(rng, &wctx, 0, len);
        out.push(task("moments_round_trip", format!("sample={s};len={len}"), trip, move || {
            let m = amice_to_moments(&f, len)?;
            Ok(series(&moments_to_amice(&f.ctx(), &m)?, &f))
        }));
    }
    for y in 0..=p.pow(3) {
        out.push(task("colmez_unit", format!("y={y}"), exact, move || {
            let f = SeriesElement::from_coeffs(&ctx, -1, vec![ctx.one(), ctx.one()]);
            Ok(scalars(colmez_eval(&f, y)?, ctx.one()))
        }));
    }
    for j in 0..8u32 {
        out.push(task("dirac_moments", format!("a=3;j={j}"), exact, move || {
            let mu = Distribution::dirac(&ctx, 3, 0)?;
            Ok(scalars(mu.moment(j)?, ctx.int(3i64.pow(j))))
        }));
    }
    Ok(out)
}

/// v_p(n!).
fn legendre(p: u32, n: u64) -> i64 {
    let mut v = 0;
    let mut q = p as u64;
    while q <= n {
        v += (n / q) as i64;
        q *= p as u64;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = Config::parse("p = 5\n# comment\nprec=10\npi-window = 60 # inline\nseed=9").unwrap();
        assert_eq!((c.p, c.prec, c.pi_window(), c.seed), (5, 10, 60, 9));
        assert_eq!(Config::default().pi_window(), 54);
        assert!(Config::parse("q=1").is_err());
        assert!(Config::parse("p").is_err());
    }

    #[test]
    fn required_threshold_respects_loss_budget() {
        let c = Config::default();
        assert_eq!(c.required(2), 6);
        assert_eq!(c.required(8), 8);
        assert_eq!(c.required(40), 12);
    }

    #[test]
    fn failures_become_records() {
        let t = task("boom", String::new(), 1, || Err(Error::Domain("no".into())));
        let r = evaluate(t, 12, false);
        assert!(!r.pass);
        assert!(r.error.unwrap().contains("no"));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }
}
