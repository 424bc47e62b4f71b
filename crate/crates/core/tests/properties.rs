//! Randomized property tests for the arithmetic primitives: valuations,
//! Kronecker symbols, quadratic-form reduction, rational recognition, and
//! the elliptic-curve group law.

use proptest::prelude::*;
use rug::{Float, Integer, Rational};

use ecbsd::curve::{Curve, Point};
use ecbsd::foundation::{fbits, kronecker, recognize_rational, valp};
use ecbsd::heegner::{reduce_form, Form};

const SMALL_PRIMES: [u64; 5] = [2, 3, 5, 7, 11];

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..10_000)
        .prop_filter("nonzero numerator", |(n, _)| *n != 0)
        .prop_map(|(n, d)| Rational::from((n, d)))
}

proptest! {
    #[test]
    fn valp_is_additive_on_products(
        a in nonzero_rational(),
        b in nonzero_rational(),
        pi in 0usize..SMALL_PRIMES.len(),
    ) {
        let p = SMALL_PRIMES[pi];
        let va = valp(&a, p).unwrap().unwrap();
        let vb = valp(&b, p).unwrap().unwrap();
        let vab = valp(&Rational::from(&a * &b), p).unwrap().unwrap();
        prop_assert_eq!(vab, va + vb);
    }

    #[test]
    fn valp_of_zero_is_infinite(pi in 0usize..SMALL_PRIMES.len()) {
        let p = SMALL_PRIMES[pi];
        prop_assert_eq!(valp(&Rational::new(), p).unwrap(), None);
    }

    #[test]
    fn kronecker_is_multiplicative_in_the_numerator(
        a in -500i64..500,
        b in -500i64..500,
        n in 1i64..500,
    ) {
        prop_assert_eq!(
            kronecker(a * b, n),
            kronecker(a, n) * kronecker(b, n)
        );
    }

    #[test]
    fn kronecker_is_multiplicative_in_the_denominator(
        a in -500i64..500,
        m in 1i64..500,
        n in 1i64..500,
    ) {
        prop_assert_eq!(
            kronecker(a, m * n),
            kronecker(a, m) * kronecker(a, n)
        );
    }

    #[test]
    fn kronecker_matches_euler_criterion_for_odd_primes(
        a in -500i64..500,
        pi in 1usize..SMALL_PRIMES.len(),
    ) {
        let p = SMALL_PRIMES[pi] as i64;
        let r = Integer::from(a)
            .pow_mod(&Integer::from((p - 1) / 2), &Integer::from(p))
            .unwrap();
        let euler = if r == 0 {
            0
        } else if r == 1 {
            1
        } else {
            -1
        };
        prop_assert_eq!(kronecker(a, p), euler);
    }

    #[test]
    fn form_reduction_preserves_discriminant_and_is_reduced(
        a in 1i64..200,
        b in -400i64..400,
        c_extra in 0i64..200,
    ) {
        // force a negative discriminant: c > b^2 / (4a)
        let c = b * b / (4 * a) + 1 + c_extra;
        let f = Form { a, b, c };
        let d = b * b - 4 * a * c;
        prop_assume!(d < 0);
        let g = reduce_form(f);
        prop_assert_eq!(g.b * g.b - 4 * g.a * g.c, d);
        // reduced: |b| <= a <= c, with b >= 0 on the boundary
        prop_assert!(g.b.abs() <= g.a && g.a <= g.c);
        if g.b.abs() == g.a || g.a == g.c {
            prop_assert!(g.b >= 0);
        }
    }

    #[test]
    fn form_reduction_is_idempotent(
        a in 1i64..200,
        b in -400i64..400,
        c_extra in 0i64..200,
    ) {
        let c = b * b / (4 * a) + 1 + c_extra;
        prop_assume!(b * b - 4 * a * c < 0);
        let g = reduce_form(Form { a, b, c });
        prop_assert_eq!(reduce_form(g), g);
    }

    #[test]
    fn recognize_rational_round_trips(
        n in -100_000i64..100_000,
        d in 1i64..10_000,
    ) {
        let q = Rational::from((n, d));
        let x = Float::with_val(fbits(64), &q);
        let got = recognize_rational(&x, &Integer::from(10_000));
        prop_assert_eq!(got, Some(q));
    }

    #[test]
    fn scalar_multiplication_is_additive(m in -12i64..12, n in -12i64..12) {
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let g = Point::affine(0, 0);
        let lhs = e.scalar_mul(m + n, &g);
        let rhs = e.add(&e.scalar_mul(m, &g), &e.scalar_mul(n, &g));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn group_law_is_commutative_and_inverts(m in -12i64..12, n in -12i64..12) {
        let e = Curve::from_ainvs([0, 1, 1, 0, 0]).unwrap();
        let g = Point::affine(0, 0);
        let p = e.scalar_mul(m, &g);
        let q = e.scalar_mul(n, &g);
        prop_assert_eq!(e.add(&p, &q), e.add(&q, &p));
        prop_assert_eq!(e.add(&p, &e.negate(&p)), Point::Infinity);
    }
}
