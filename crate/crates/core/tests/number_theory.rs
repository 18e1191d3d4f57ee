use proptest::prelude::*;
use shorsim::number_theory::{
    best_convergent_bounded, best_convergent_bounded_denominator, carmichael_lambda,
    continued_fraction, convergents_of, factorize, gcd, lcm, mod_pow, multiplicative_order,
    multiplicative_order_fast, order_dividing, order_ratio_estimate, ExpansionRoute, Fraction,
    Natural,
};

/// `x^r = 1` and `x^(r/q) != 1` for every prime `q | r` certifies that `r`
/// is the exact order.
/// `primes` must include every prime factor of `r`.
fn is_exact_order(x: Natural, n: Natural, r: Natural, primes: &[Natural]) -> bool {
    mod_pow(x, r, n).unwrap() == 1
        && primes
            .iter()
            .filter(|&&q| r % q == 0)
            .all(|&q| mod_pow(x, r / q, n).unwrap() != 1)
}

fn coprime_bases(n: Natural) -> impl Iterator<Item = Natural> {
    (1..n).filter(move |&x| gcd(x, n).unwrap() == 1)
}

#[test]
fn brute_force_order_is_minimal_by_scan() {
    for n in 2..=300 {
        for x in coprime_bases(n) {
            let r = multiplicative_order(x, n).unwrap();
            assert_eq!(mod_pow(x, r, n).unwrap(), 1);
            assert!(
                (1..r).all(|s| mod_pow(x, s, n).unwrap() != 1),
                "n={n} x={x}"
            );
        }
    }
}

#[test]
fn fast_order_agrees_with_brute_force() {
    for n in 2..=1_200 {
        for x in coprime_bases(n) {
            assert_eq!(
                multiplicative_order_fast(x, n).unwrap(),
                multiplicative_order(x, n).unwrap(),
                "n={n} x={x}"
            );
        }
    }
}

#[test]
fn order_certificates_hold_up_to_ten_thousand() {
    for n in 2..=10_000 {
        let lambda = carmichael_lambda(n).unwrap();
        let primes: Vec<Natural> = factorize(lambda).iter().map(|&(q, _)| q).collect();
        // every base while n < 2000, then about a thousand evenly strided bases
        let stride = (n / 1_000).max(1) as usize;
        for x in coprime_bases(n).step_by(stride) {
            let r = order_dividing(x, n, lambda).unwrap();
            assert!(is_exact_order(x, n, r, &primes), "n={n} x={x} r={r}");
        }
    }
}

fn distance_cmp(f: Fraction, a: (Natural, Natural), b: Fraction) -> std::cmp::Ordering {
    // |f - a| vs |f - b| with f = F/G, a = p/q, b = s/t, compared exactly
    let (fnum, fden) = (f.numerator() as i128, f.denominator() as i128);
    let (p, q) = (a.0 as i128, a.1 as i128);
    let (s, t) = (b.numerator() as i128, b.denominator() as i128);
    let lhs = (fnum * q - p * fden).abs() * t;
    let rhs = (fnum * t - s * fden).abs() * q;
    lhs.cmp(&rhs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn gcd_times_lcm_is_product(a in 1u64..1_000_000, b in 1u64..1_000_000) {
        let (a, b) = (a as Natural, b as Natural);
        prop_assert_eq!(gcd(a, b).unwrap() * lcm(a, b).unwrap(), a * b);
    }

    #[test]
    fn convergents_reconstruct_and_alternate(num in 0u64..1_000_000, den in 1u64..1_000_000) {
        let f = Fraction::new(num as Natural, den as Natural).unwrap();
        let cf = continued_fraction(f);
        prop_assert_eq!(cf.value(), f);
        prop_assert_eq!(convergents_of(&cf.partial_quotients), cf.convergents.clone());
        for w in cf.convergents.windows(2).skip(1) {
            prop_assert!(w[0].denominator() < w[1].denominator());
        }
        let last = cf.convergents.len() - 1;
        for (i, c) in cf.convergents.iter().enumerate().take(last) {
            // even-indexed convergents sit below f, odd-indexed above
            if i % 2 == 0 {
                prop_assert!(*c < f);
            } else {
                prop_assert!(*c > f);
            }
        }
    }

    #[test]
    fn bounded_convergent_is_best_approximation(
        qa in 4u32..14,
        c_seed in any::<u64>(),
        bound in 3u64..200,
    ) {
        let big_n: Natural = 1 << qa;
        let c = 1 + (c_seed as Natural) % (big_n - 1);
        let f = Fraction::new(big_n, c).unwrap();
        let Some(best) = best_convergent_bounded(f, bound as Natural).unwrap() else {
            return Ok(());
        };
        let convergents = continued_fraction(f).convergents;
        for q in 1..=best.denominator() {
            let around = big_n * q / c;
            for p in around.saturating_sub(2)..=around + 2 {
                let candidate = Fraction::new(p, q).unwrap();
                if convergents.contains(&candidate) {
                    continue;
                }
                prop_assert_ne!(
                    distance_cmp(f, (p, q), best),
                    std::cmp::Ordering::Less,
                    "{}/{} beats {} for {}", p, q, best, f
                );
            }
        }
    }

    #[test]
    fn both_expansion_routes_agree(qa in 2u32..40, c_seed in any::<u64>(), bound in 2u64..1_000_000) {
        let big_n: Natural = 1 << qa;
        let c = (c_seed as Natural) % big_n;
        let bound = bound as Natural;
        let a = order_ratio_estimate(c, big_n, bound, ExpansionRoute::InverseByNumerator).unwrap();
        let b = order_ratio_estimate(c, big_n, bound, ExpansionRoute::ForwardByDenominator).unwrap();
        prop_assert_eq!(a, b);
        if c > 0 {
            let direct = best_convergent_bounded_denominator(Fraction::new(c, big_n).unwrap(), bound)
                .unwrap()
                .and_then(|f| f.recip());
            prop_assert_eq!(a, direct);
        }
    }
}
