//! Exact integer arithmetic: modular exponentiation, gcd/lcm, multiplicative
//! order and continued fractions.
//!
//! Nothing in this module touches floating point.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Non-negative integer used for every exact quantity in the crate.
///
/// 128 bits hold `N^2 = 2^(2 q_A)` as long as `q_A <= MAX_REGISTER_QUBITS`.
pub type Natural = u128;

/// Largest register-A size whose `N^2` still fits in a [`Natural`].
pub const MAX_REGISTER_QUBITS: u32 = 63;

#[inline]
fn mul_mod(a: Natural, b: Natural, modulus: Natural) -> Natural {
    if modulus <= u32::MAX as Natural {
        let m = modulus as u64;
        return ((a % modulus) as u64 * (b % modulus) as u64 % m) as Natural;
    }
    if modulus <= u64::MAX as Natural {
        // both operands are < 2^64 after reduction
        return (a % modulus) * (b % modulus) % modulus;
    }
    let (mut a, mut b) = (a % modulus, b % modulus);
    let mut acc: Natural = 0;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, modulus);
        }
        a = add_mod(a, a, modulus);
        b >>= 1;
    }
    acc
}

#[inline]
fn add_mod(a: Natural, b: Natural, modulus: Natural) -> Natural {
    let (sum, overflow) = a.overflowing_add(b);
    if overflow || sum >= modulus {
        sum.wrapping_sub(modulus)
    } else {
        sum
    }
}

/// `base^exponent mod modulus` by square-and-multiply.
pub fn mod_pow(base: Natural, exponent: Natural, modulus: Natural) -> Result<Natural> {
    if modulus < 2 {
        return Err(Error::domain(format!(
            "modulus must be >= 2, got {modulus}"
        )));
    }
    if modulus <= u32::MAX as Natural && exponent <= u64::MAX as Natural {
        return Ok(
            mod_pow_u64((base % modulus) as u64, exponent as u64, modulus as u64) as Natural,
        );
    }
    let mut result: Natural = 1;
    let mut base = base % modulus;
    let mut exponent = exponent;
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = mul_mod(result, base, modulus);
        }
        base = mul_mod(base, base, modulus);
        exponent >>= 1;
    }
    Ok(result)
}

/// [`mod_pow`] on machine words, for hot loops over small moduli.
pub fn mod_pow_u64(base: u64, exponent: u64, modulus: u64) -> u64 {
    debug_assert!(modulus >= 2);
    if modulus <= u32::MAX as u64 {
        let mut result = 1u64;
        let mut base = base % modulus;
        let mut exponent = exponent;
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = result * base % modulus;
            }
            base = base * base % modulus;
            exponent >>= 1;
        }
        return result;
    }
    mod_pow(base as Natural, exponent as Natural, modulus as Natural).expect("modulus >= 2") as u64
}

/// Greatest common divisor by Euclid's algorithm.
pub fn gcd(a: Natural, b: Natural) -> Result<Natural> {
    if a == 0 && b == 0 {
        return Err(Error::domain("gcd(0, 0) is undefined"));
    }
    Ok(gcd_unchecked(a, b))
}

pub(crate) fn gcd_unchecked(mut a: Natural, mut b: Natural) -> Natural {
    if a <= u64::MAX as Natural && b <= u64::MAX as Natural {
        let (mut a, mut b) = (a as u64, b as u64);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        return a as Natural;
    }
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: Natural, b: Natural) -> Result<Natural> {
    if a == 0 || b == 0 {
        return Err(Error::domain("lcm is only defined for positive arguments"));
    }
    let g = gcd_unchecked(a, b);
    (a / g)
        .checked_mul(b)
        .ok_or_else(|| Error::resource(format!("lcm({a}, {b}) overflows 128 bits")))
}

fn check_order_args(x: Natural, n: Natural) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("modulus must be >= 2, got {n}")));
    }
    if x >= n {
        return Err(Error::domain(format!("base {x} must be reduced below {n}")));
    }
    let g = gcd_unchecked(x, n);
    if g != 1 {
        return Err(Error::NoOrder { x, n, gcd: g });
    }
    Ok(())
}

/// Least `r >= 1` with `x^r = 1 (mod n)`, found by walking successive powers.
///
/// This is the reference implementation every faster route is checked
/// against.
pub fn multiplicative_order(x: Natural, n: Natural) -> Result<Natural> {
    check_order_args(x, n)?;
    let mut power = x;
    let mut r: Natural = 1;
    while power != 1 {
        power = mul_mod(power, x, n);
        r += 1;
    }
    Ok(r)
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing prime order.
pub fn factorize(n: Natural) -> Vec<(Natural, u32)> {
    if n <= u64::MAX as Natural {
        return factorize_word(n as u64)
            .into_iter()
            .map(|(p, e)| (p as Natural, e))
            .collect();
    }
    let mut n = n;
    let mut factors = Vec::new();
    let mut p: Natural = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push((n, 1));
    }
    factors
}

fn factorize_word(mut n: u64) -> Vec<(u64, u32)> {
    let mut factors = Vec::new();
    let mut p: u64 = 2;
    while (p as u128) * (p as u128) <= n as u128 {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push((n, 1));
    }
    factors
}

/// Carmichael's function: the exponent of the unit group modulo `n`.
pub fn carmichael_lambda(n: Natural) -> Result<Natural> {
    if n < 1 {
        return Err(Error::domain("carmichael_lambda(0) is undefined"));
    }
    let mut lambda: Natural = 1;
    for (p, e) in factorize(n) {
        let prime_power_lambda = if p == 2 {
            match e {
                1 => 1,
                2 => 2,
                _ => 1 << (e - 2),
            }
        } else {
            (p - 1) * p.pow(e - 1)
        };
        lambda = lcm(lambda, prime_power_lambda)?;
    }
    Ok(lambda)
}

/// Multiplicative order via the factorization of `lambda(n)`.
///
/// Must agree with [`multiplicative_order`]; the test suite checks this
/// exhaustively at small `n`.
pub fn multiplicative_order_fast(x: Natural, n: Natural) -> Result<Natural> {
    check_order_args(x, n)?;
    let lambda = carmichael_lambda(n)?;
    order_dividing(x, n, lambda)
}

/// Smallest divisor `r` of `multiple` with `x^r = 1 (mod n)`, given that
/// `x^multiple = 1 (mod n)`.
pub fn order_dividing(x: Natural, n: Natural, multiple: Natural) -> Result<Natural> {
    let mut r = multiple;
    for (q, _) in factorize(multiple) {
        while r % q == 0 && mod_pow(x, r / q, n)? == 1 {
            r /= q;
        }
    }
    Ok(r)
}

/// Orders of every residue modulo a prime `p`; entry `i` holds the order of
/// `i` (entry 0 is 0, which has no order).
///
/// Built by stepping through the powers of a primitive root, so the whole
/// table costs `O(p)` multiplications plus the root search.
pub fn prime_residue_orders(p: u64) -> Result<Vec<u64>> {
    if p < 2 || factorize(p as Natural) != [(p as Natural, 1)] {
        return Err(Error::domain(format!("{p} is not a prime")));
    }
    let group = p - 1;
    let mut orders = vec![0u64; p as usize];
    if p == 2 {
        orders[1] = 1;
        return Ok(orders);
    }
    let root = (2..p)
        .find(|&g| {
            factorize(group as Natural)
                .iter()
                .all(|&(q, _)| mod_pow(g as Natural, (group as Natural) / q, p as Natural) != Ok(1))
        })
        .expect("every prime has a primitive root");
    // root^i has order group / gcd(i, group)
    let mut power: u64 = 1;
    for i in 0..group {
        orders[power as usize] = group / (gcd_unchecked(i as Natural, group as Natural) as u64);
        power = power * root % p;
    }
    Ok(orders)
}

/// A non-negative rational number kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Fraction {
    numerator: Natural,
    denominator: Natural,
}

impl Fraction {
    pub fn new(numerator: Natural, denominator: Natural) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::domain("fraction with zero denominator"));
        }
        let g = gcd_unchecked(numerator, denominator);
        Ok(Self {
            numerator: numerator / g,
            denominator: denominator / g,
        })
    }

    pub fn integer(value: Natural) -> Self {
        Self {
            numerator: value,
            denominator: 1,
        }
    }

    pub fn numerator(&self) -> Natural {
        self.numerator
    }

    pub fn denominator(&self) -> Natural {
        self.denominator
    }

    /// `1 / self`, or `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        (self.numerator != 0).then(|| Self {
            numerator: self.denominator,
            denominator: self.numerator,
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.numerator * other.denominator).cmp(&(other.numerator * self.denominator))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Partial quotients `[a0; a1, a2, ...]` of a rational number together with
/// all of its convergents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFractionExpansion {
    pub partial_quotients: Vec<Natural>,
    pub convergents: Vec<Fraction>,
}

impl ContinuedFractionExpansion {
    /// The value the expansion represents (its last convergent).
    pub fn value(&self) -> Fraction {
        *self.convergents.last().expect("expansion is never empty")
    }
}

/// Euclidean expansion of `f` with the convergents from the usual
/// `h_i = a_i h_{i-1} + h_{i-2}` recurrence.
pub fn continued_fraction(f: Fraction) -> ContinuedFractionExpansion {
    let (mut num, mut den) = (f.numerator, f.denominator);
    let mut partial_quotients = Vec::new();
    while den != 0 {
        partial_quotients.push(num / den);
        (num, den) = (den, num % den);
    }

    let convergents = convergents_of(&partial_quotients);
    ContinuedFractionExpansion {
        partial_quotients,
        convergents,
    }
}

/// Convergents of a list of partial quotients.
pub fn convergents_of(partial_quotients: &[Natural]) -> Vec<Fraction> {
    let (mut h_prev, mut h) = (0, 1);
    let (mut k_prev, mut k) = (1, 0);
    partial_quotients
        .iter()
        .map(|&a| {
            (h_prev, h) = (h, a * h + h_prev);
            (k_prev, k) = (k, a * k + k_prev);
            // consecutive convergents are coprime, no reduction needed
            Fraction {
                numerator: h,
                denominator: k,
            }
        })
        .collect()
}

/// The last convergent of `f` whose numerator is strictly below `bound`.
pub fn best_convergent_bounded(f: Fraction, bound: Natural) -> Result<Option<Fraction>> {
    if bound < 2 {
        return Err(Error::domain(format!("bound must be >= 2, got {bound}")));
    }
    Ok(continued_fraction(f)
        .convergents
        .into_iter()
        .take_while(|c| c.numerator < bound)
        .last())
}

/// The last convergent of `f` whose denominator is strictly below `bound`.
pub fn best_convergent_bounded_denominator(
    f: Fraction,
    bound: Natural,
) -> Result<Option<Fraction>> {
    if bound < 2 {
        return Err(Error::domain(format!("bound must be >= 2, got {bound}")));
    }
    Ok(continued_fraction(f)
        .convergents
        .into_iter()
        .take_while(|c| c.denominator < bound)
        .last())
}

/// Which expansion is used to turn a measured state into an order estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpansionRoute {
    /// Expand `N/c`, keep the last convergent with numerator `< bound`.
    #[default]
    InverseByNumerator,
    /// Expand `c/N`, keep the last convergent with denominator `< bound`,
    /// then invert.
    ForwardByDenominator,
}

/// Estimate of `r/nu` from a measurement `c` of an `N`-state register, with
/// `r < bound`. `None` when `c = 0` or when no usable convergent exists.
pub fn order_ratio_estimate(
    c: Natural,
    big_n: Natural,
    bound: Natural,
    route: ExpansionRoute,
) -> Result<Option<Fraction>> {
    if c >= big_n {
        return Err(Error::domain(format!("state {c} outside 0..{big_n}")));
    }
    if c == 0 {
        return Ok(None);
    }
    match route {
        ExpansionRoute::InverseByNumerator => {
            best_convergent_bounded(Fraction::new(big_n, c)?, bound)
        }
        ExpansionRoute::ForwardByDenominator => Ok(best_convergent_bounded_denominator(
            Fraction::new(c, big_n)?,
            bound,
        )?
        .and_then(|f| f.recip())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(p: Natural, q: Natural) -> Fraction {
        Fraction::new(p, q).unwrap()
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(10, 6, 21), Ok(1));
        assert_eq!(mod_pow(5, 3, 21), Ok(20));
        for n in 2..40 {
            for x in 0..n {
                assert_eq!(mod_pow(x, 0, n), Ok(1));
            }
        }
        assert!(matches!(mod_pow(3, 4, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn mod_pow_wide_modulus() {
        // (2^64 + 13)^2 mod (2^100 + 7), checked against a hand reduction
        // through mul_mod's slow path and the identity x^2 = x * x
        let m: Natural = (1 << 100) + 7;
        let x: Natural = (1 << 64) + 13;
        let sq = mod_pow(x, 2, m).unwrap();
        // x^2 = 2^128 + 26 * 2^64 + 169, and 2^128 = 2^28 * 2^100 = -7 * 2^28
        let expected = (m - 7 * (1 << 28)) + 26 * (1 << 64) + 169;
        assert_eq!(sq, expected % m);
    }

    #[test]
    fn word_sized_pow_agrees() {
        for m in [2u64, 3, 21, 9973, 65_537, u32::MAX as u64 + 15] {
            for b in [0u64, 1, 2, 10, 12_345, m - 1] {
                for e in [0u64, 1, 2, 7, 1000, 65_535] {
                    assert_eq!(
                        mod_pow_u64(b, e, m) as Natural,
                        mod_pow(b as Natural, e as Natural, m as Natural).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(12, 21), Ok(3));
        assert_eq!(gcd(14, 21), Ok(7));
        assert_eq!(gcd(17, 0), Ok(17));
        assert_eq!(gcd(0, 9), Ok(9));
        assert!(gcd(0, 0).is_err());
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm(6, 4), Ok(12));
        assert_eq!(lcm(6, 6), Ok(6));
        assert_eq!(lcm(3, 6), Ok(6));
        assert!(lcm(0, 6).is_err());
    }

    #[test]
    fn order_examples() {
        assert_eq!(multiplicative_order(10, 21), Ok(6));
        assert_eq!(multiplicative_order(4, 21), Ok(3));
        assert_eq!(multiplicative_order(1, 21), Ok(1));
        assert_eq!(
            multiplicative_order(7, 21),
            Err(Error::NoOrder {
                x: 7,
                n: 21,
                gcd: 7
            })
        );
        assert!(matches!(
            multiplicative_order(22, 21),
            Err(Error::Domain(_))
        ));
        assert!(matches!(multiplicative_order(0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn lambda_small_values() {
        // lambda(n) for n = 1..=24, OEIS A002322
        let expected = [
            1, 1, 2, 2, 4, 2, 6, 2, 6, 4, 10, 2, 12, 6, 4, 4, 16, 6, 18, 4, 6, 10, 22, 2,
        ];
        for (i, &want) in expected.iter().enumerate() {
            assert_eq!(
                carmichael_lambda(i as Natural + 1),
                Ok(want),
                "n = {}",
                i + 1
            );
        }
    }

    #[test]
    fn prime_orders_match_brute_force() {
        for p in [2u64, 3, 5, 7, 11, 13, 31, 97, 101, 257] {
            let table = prime_residue_orders(p).unwrap();
            for x in 1..p {
                assert_eq!(
                    table[x as usize] as Natural,
                    multiplicative_order(x as Natural, p as Natural).unwrap()
                );
            }
        }
        assert!(prime_residue_orders(21).is_err());
        assert!(prime_residue_orders(49).is_err());
    }

    #[test]
    fn expansion_of_256_over_43() {
        let cf = continued_fraction(frac(256, 43));
        assert_eq!(cf.partial_quotients, vec![5, 1, 20, 2]);
        assert_eq!(
            cf.convergents,
            vec![frac(5, 1), frac(6, 1), frac(125, 21), frac(256, 43)]
        );
    }

    #[test]
    fn expansion_of_integer() {
        let cf = continued_fraction(Fraction::integer(7));
        assert_eq!(cf.partial_quotients, vec![7]);
        assert_eq!(cf.convergents, vec![frac(7, 1)]);
        assert_eq!(continued_fraction(frac(256, 85)).value(), frac(256, 85));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(Fraction::new(3, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn bounded_convergent_examples() {
        assert_eq!(
            best_convergent_bounded(frac(256, 43), 21),
            Ok(Some(frac(6, 1)))
        );
        assert_eq!(
            best_convergent_bounded(frac(256, 128), 21),
            Ok(Some(frac(2, 1)))
        );
        assert_eq!(best_convergent_bounded(frac(256, 3), 21), Ok(None));
        assert!(best_convergent_bounded(frac(256, 3), 1).is_err());
    }

    #[test]
    fn routes_agree_on_fig1_register() {
        for c in 0..256 {
            let a = order_ratio_estimate(c, 256, 21, ExpansionRoute::InverseByNumerator).unwrap();
            let b = order_ratio_estimate(c, 256, 21, ExpansionRoute::ForwardByDenominator).unwrap();
            assert_eq!(a, b, "c = {c}");
        }
        assert!(order_ratio_estimate(256, 256, 21, ExpansionRoute::default()).is_err());
    }
}
