//! Scalar arithmetic and the Stirling tables against exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use robba::distributions::{stirling1, stirling2};
use robba::{PadicCtx, PadicScalar};

const M: u32 = 12;

/// Image of an exact rational in Q_p at full relative precision.
fn to_padic(ctx: &PadicCtx, q: &BigRational) -> PadicScalar {
    if q.is_zero() {
        return ctx.zero();
    }
    let p = BigInt::from(ctx.p);
    let strip = |mut n: BigInt| {
        let mut v = 0i64;
        while (&n % &p).is_zero() {
            n /= &p;
            v += 1;
        }
        (n, v)
    };
    let (n, vn) = strip(q.numer().clone());
    let (d, vd) = strip(q.denom().clone());
    let modulus = p.pow(ctx.prec);
    let u = (n * d.modinv(&modulus).unwrap()).mod_floor_positive(&modulus);
    PadicScalar::from_parts(ctx.p, ctx.prec, vn - vd, u.to_u64().unwrap(), ctx.prec).unwrap()
}

trait ModFloor {
    fn mod_floor_positive(&self, m: &BigInt) -> BigInt;
}

impl ModFloor for BigInt {
    fn mod_floor_positive(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7, 11])
}

fn rational() -> impl Strategy<Value = (i64, i64)> {
    (-5000i64..5000, 1i64..500).prop_filter("nonzero", |(n, _)| *n != 0)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_operations_match_q(p in prime(), (a, b) in rational(), (c, d) in rational()) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let (x, y) = (q(a, b), q(c, d));
        let (px, py) = (to_padic(&ctx, &x), to_padic(&ctx, &y));
        prop_assert_eq!(px * py, to_padic(&ctx, &(&x * &y)));
        prop_assert_eq!(px.div(&py).unwrap(), to_padic(&ctx, &(&x / &y)));
        // sums can cancel digits, so compare to the precision actually kept
        let s = px + py;
        let want = to_padic(&ctx, &(&x + &y));
        prop_assert!(s.agreement(&want) >= s.abs_prec().min(want.abs_prec()), "{} vs {}", s, want);
    }

    #[test]
    fn rational_constructor_matches_q(p in prime(), (a, b) in rational()) {
        let ctx = PadicCtx::new(p, M).unwrap();
        prop_assert_eq!(ctx.rational(a, b).unwrap(), to_padic(&ctx, &q(a, b)));
    }

    #[test]
    fn powers_match_q(p in prime(), (a, b) in rational(), e in -6i64..7) {
        let ctx = PadicCtx::new(p, M).unwrap();
        let x = q(a, b);
        let want = if e >= 0 { x.pow(e as i32) } else { x.recip().pow(-e as i32) };
        prop_assert_eq!(to_padic(&ctx, &x).pow(e).unwrap(), to_padic(&ctx, &want));
    }
}

fn exact_stirling(max: usize) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let mut s1 = vec![vec![BigInt::zero(); max + 1]; max + 1];
    let mut s2 = s1.clone();
    s1[0][0] = BigInt::one();
    s2[0][0] = BigInt::one();
    for n in 1..=max {
        for j in 1..=n {
            s2[n][j] = BigInt::from(j) * &s2[n - 1][j] + &s2[n - 1][j - 1];
            s1[n][j] = &s1[n - 1][j - 1] - BigInt::from(n - 1) * &s1[n - 1][j];
        }
    }
    (s1, s2)
}

#[test]
fn stirling_tables_match_exact_integers() {
    // large enough that the exact values overflow 128-bit integers
    let max = 60;
    let (e1, e2) = exact_stirling(max);
    assert!(e1[max][1].bits() > 128);
    for p in [2, 3, 5, 7] {
        let ctx = PadicCtx::new(p, M).unwrap();
        let (t1, t2) = (stirling1(&ctx, max), stirling2(&ctx, max));
        for n in 0..=max {
            for j in 0..=n {
                assert_eq!(t1[n][j], to_padic(&ctx, &BigRational::from(e1[n][j].clone())), "s({n},{j}) at p={p}");
                assert_eq!(t2[n][j], to_padic(&ctx, &BigRational::from(e2[n][j].clone())), "S({n},{j}) at p={p}");
            }
        }
    }
}
