use proptest::prelude::*;
use robba::distributions::{amice_to_moments, colmez_eval};
use robba::{CycloElement, PadicCtx, PadicScalar, SeriesElement};

const M: u32 = 12;

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn scalar(ctx: &PadicCtx, n: i64) -> PadicScalar {
    ctx.int(n)
}

/// A Laurent polynomial with small integer coefficients starting at `lo`.
fn laurent(ctx: &PadicCtx, lo: i64, coeffs: &[i64]) -> SeriesElement {
    SeriesElement::from_coeffs(ctx, lo, coeffs.iter().map(|&c| scalar(ctx, c)).collect())
}

fn unit(p: u32, a: i64) -> i64 {
    if a.rem_euclid(p as i64) == 0 {
        a + 1
    } else {
        a
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_left_inverts_phi(p in prime(), lo in 0i64..3, c in prop::collection::vec(-50i64..50, 1..8)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let f = laurent(&ctx, lo, &c);
        let back = f.phi(64).unwrap().psi().unwrap();
        prop_assert!(back.agreement(&f) >= M as i64, "{:?} vs {:?}", back, f);
    }

    #[test]
    fn psi_kills_shifted_phi(p in prime(), i in 1i64..6, c in prop::collection::vec(-50i64..50, 1..6)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let g = laurent(&ctx, 0, &c);
        let i = if i % p as i64 == 0 { i + 1 } else { i };
        let x = SeriesElement::one_plus_pi_pow(&ctx, i, 0).unwrap();
        let h = x.mul(&g.phi(64).unwrap()).psi().unwrap();
        prop_assert!(h.agreement(&SeriesElement::zero(&ctx)) >= M as i64, "{:?}", h);
    }

    #[test]
    fn gamma_is_multiplicative(p in prime(), a in -40i64..40, b in -40i64..40, c in prop::collection::vec(-50i64..50, 1..6)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let (a, b) = (unit(p, a), unit(p, b));
        let f = laurent(&ctx, 0, &c);
        let w = 24;
        let lhs = f.gamma(b, w).unwrap().gamma(a, w).unwrap();
        let rhs = f.gamma(a * b, w).unwrap();
        prop_assert!(lhs.truncate(w / 2).agreement(&rhs.truncate(w / 2)) >= M as i64);
    }

    #[test]
    fn gamma_commutes_with_phi_and_psi(p in prime(), a in -20i64..20, c in prop::collection::vec(-50i64..50, 1..6)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let a = unit(p, a);
        let f = laurent(&ctx, 0, &c);
        let w = 40;
        let gp = f.phi(w).unwrap().gamma(a, w).unwrap();
        let pg = f.gamma(a, w).unwrap().phi(w).unwrap();
        prop_assert!(gp.truncate(w / 2).agreement(&pg.truncate(w / 2)) >= M as i64);
        // γ_a of a polynomial in (1+π) is again one, so ψ stays exact here
        let x = SeriesElement::one_plus_pi_pow(&ctx, a, 0).unwrap();
        let g = f.phi(w).unwrap().mul(&x).add(&f);
        // truncated ψ certifies coefficient j to ⌊w/p⌋ - j digits
        let w = p as i64 * (M as i64 + 8);
        let lhs = g.psi().unwrap().gamma(a, w).unwrap();
        let rhs = g.gamma(a, w).unwrap().psi().unwrap();
        prop_assert!(lhs.truncate(6).agreement(&rhs.truncate(6)) >= M as i64);
    }

    #[test]
    fn residue_ignores_derivatives(p in prime(), lo in -6i64..0, c in prop::collection::vec(-50i64..50, 1..8)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let f = laurent(&ctx, lo, &c);
        let r = f.partial().residue_form().unwrap();
        prop_assert!(r.agreement(&ctx.zero()) >= M as i64, "{}", r);
    }

    #[test]
    fn residue_is_psi_invariant(p in prime(), lo in -6i64..0, c in prop::collection::vec(-50i64..50, 1..8)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let f = laurent(&ctx, lo, &c);
        let a = f.residue_form().unwrap();
        let b = f.psi().unwrap().residue_form().unwrap();
        prop_assert!(a.agreement(&b) >= M as i64 - 1, "{} vs {}", a, b);
    }

    /// p·ψ(f)(ζ_p - 1) = Σ_{η^p = 1} f(ηζ_{p²} - 1), the sum taken as a Galois
    /// orbit sum at level 2.
    #[test]
    fn psi_matches_trace_formula(p in prime(), c in prop::collection::vec(-50i64..50, 1..10)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let f = laurent(&ctx, 0, &c);
        let at2 = f.eval_at_zeta(2).unwrap();
        let mut sum = CycloElement::zero(&ctx, 2);
        for j in 0..p as i64 {
            sum = &sum + &at2.sigma(1 + j * p as i64).unwrap();
        }
        let lhs = f.psi().unwrap().eval_at_zeta(1).unwrap().embed(2).unwrap().scale(ctx.int(p as i64));
        prop_assert!(lhs.agreement(&sum) >= M as i64, "{} vs {}", lhs, sum);
    }

    #[test]
    fn sigma_is_a_ring_map(p in prime(), n in 1u32..3, a in -30i64..30,
                           x in prop::collection::vec(-40i64..40, 1..12),
                           y in prop::collection::vec(-40i64..40, 1..12)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let a = unit(p, a);
        let mk = |v: &[i64]| CycloElement::from_exponents(&ctx, n, v.iter().enumerate().map(|(i, &c)| (i as i64, ctx.int(c))));
        let (x, y) = (mk(&x), mk(&y));
        let prod = (&x * &y).sigma(a).unwrap();
        let split = &x.sigma(a).unwrap() * &y.sigma(a).unwrap();
        prop_assert!(prod.agreement(&split) >= M as i64);
        let sum = (&x + &y).sigma(a).unwrap();
        prop_assert!(sum.agreement(&(&x.sigma(a).unwrap() + &y.sigma(a).unwrap())) >= M as i64);
    }

    #[test]
    fn sigma_composes(p in prime(), a in -30i64..30, b in -30i64..30, x in prop::collection::vec(-40i64..40, 1..12)) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let (a, b) = (unit(p, a), unit(p, b));
        let x = CycloElement::from_exponents(&ctx, 2, x.iter().enumerate().map(|(i, &c)| (i as i64, ctx.int(c))));
        let lhs = x.sigma(b).unwrap().sigma(a).unwrap();
        prop_assert!(lhs.agreement(&x.sigma(a * b).unwrap()) >= M as i64);
    }

    #[test]
    fn dirac_moments_are_powers(p in prime(), a in -30i64..30) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let f = SeriesElement::one_plus_pi_pow(&ctx, a, 12).unwrap();
        let m = amice_to_moments(&f, 8).unwrap();
        for (k, mk) in m.iter().enumerate() {
            let want = ctx.int(a).pow(k as i64).unwrap();
            prop_assert!(mk.agreement(&want) >= M as i64, "k={} {} vs {}", k, mk, want);
        }
    }

    #[test]
    fn colmez_reads_off_a_residue(p in prime(), a in -30i64..30, y in -30i64..30) {
        // Res((1+π)^(a+y-1) π^-2 dπ) is the linear coefficient a + y - 1
        let ctx = PadicCtx::new(p, M).unwrap();
        let f = SeriesElement::one_plus_pi_pow(&ctx, a, 8).unwrap().mul(&SeriesElement::pi_pow(&ctx, -2));
        let c = colmez_eval(&f, y).unwrap();
        prop_assert!(c.agreement(&ctx.int(a + y - 1)) >= M as i64, "{}", c);
    }
}
