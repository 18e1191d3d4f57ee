//! Experiments on the simulated statistics: the n = 21, x = 10 figure
//! instance, within-peak capture rates, the failure census over real
//! semiprimes, the 2-adic valuation model and the neighboring-state check.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{
    peaks, two_term_distribution, OrderInfo, OutputDistribution, PeakModel, ProblemInstance,
    Sampler,
};
use crate::error::{Error, Result};
use crate::number_theory::{gcd_unchecked, mod_pow_u64, prime_residue_orders, Fraction, Natural};
use crate::pipeline::{odd_semiprime_factors, recover_order, SCHEMA_VERSION};
use crate::rng::seeded_rng;

/// `Pr[r odd or x^(r/2) = -1] <= 1/2` for `n = p1 p2`.
pub const EKERT_JOZSA_BOUND: f64 = 0.5;

/// Failure probability of the independence model, `1/4 + 1/12`.
pub const MODEL_FAILURE_PROBABILITY: f64 = 1.0 / 3.0;

/// Half-width of the band around [`MODEL_FAILURE_PROBABILITY`] accepted for
/// the pooled census over real semiprimes.
pub const CENSUS_BAND: f64 = 0.1;

/// Default upper limit (exclusive) of the semiprime sweep.
pub const DEFAULT_CENSUS_LIMIT: Natural = 10_000;

/// The figure instance: `n = 21`, `x = 10`, `q_A = 8`.
pub const FIGURE1: (Natural, Natural, u32) = (21, 10, 8);

/// The exact distribution of one instance together with its peak table.
#[derive(Debug, Clone, Serialize)]
pub struct FigureData {
    pub instance: ProblemInstance,
    pub order: OrderInfo,
    pub distribution: OutputDistribution,
    pub peaks: Vec<PeakModel>,
}

pub fn figure_data(n: Natural, x: Natural, register_qubits: u32) -> Result<FigureData> {
    let instance = ProblemInstance::with_register(n, x, register_qubits)?;
    let order = OrderInfo::for_instance(&instance)?;
    let distribution = two_term_distribution(&instance, &order)?;
    let peaks = peaks(&instance, &order);
    Ok(FigureData {
        instance,
        order,
        distribution,
        peaks,
    })
}

pub fn figure1_data() -> Result<FigureData> {
    let (n, x, qa) = FIGURE1;
    figure_data(n, x, qa)
}

/// Per-`n` outcome of trying every base coprime to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FailureCensus {
    pub n: Natural,
    pub p1: Natural,
    pub p2: Natural,
    /// Bases `1 < x < n` with `gcd(x, n) = 1`.
    pub num_x: u64,
    pub good: u64,
    pub odd_r: u64,
    pub trivial_sqrt: u64,
    /// Bases `1 < x < n` sharing a factor with `n`; not part of `num_x`.
    pub common_factor: u64,
    pub fraction_odd: f64,
    pub fraction_trivial_sqrt: f64,
    pub fraction_bad: f64,
    pub fraction_common_factor: f64,
}

/// How the order of a base behaves under the gcd step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseClass {
    Good,
    OddOrder,
    TrivialSquareRoot,
}

/// Exact classification of every coprime base of `n`.
///
/// Orders come from `r = lcm(ord_p1(x), ord_p2(x))` with the per-prime
/// orders tabulated from a primitive root.
pub fn classify_bases(n: Natural) -> Result<Vec<(Natural, Natural, BaseClass)>> {
    let (p1, p2) = odd_semiprime_factors(n)
        .ok_or_else(|| Error::domain(format!("{n} is not a product of two distinct odd primes")))?;
    if n > u32::MAX as Natural {
        return Err(Error::resource(format!(
            "census limited to n < 2^32, got {n}"
        )));
    }
    let (n64, p1, p2) = (n as u64, p1 as u64, p2 as u64);
    let orders1 = prime_residue_orders(p1)?;
    let orders2 = prime_residue_orders(p2)?;
    Ok((2..n64)
        .filter(|x| x % p1 != 0 && x % p2 != 0)
        .map(|x| {
            let r1 = orders1[(x % p1) as usize];
            let r2 = orders2[(x % p2) as usize];
            let r = r1 / gcd_unchecked(r1 as Natural, r2 as Natural) as u64 * r2;
            let class = if r % 2 == 1 {
                BaseClass::OddOrder
            } else if mod_pow_u64(x, r / 2, n64) == n64 - 1 {
                BaseClass::TrivialSquareRoot
            } else {
                BaseClass::Good
            };
            (x as Natural, r as Natural, class)
        })
        .collect())
}

pub fn failure_census(n: Natural) -> Result<FailureCensus> {
    let (p1, p2) = odd_semiprime_factors(n)
        .ok_or_else(|| Error::domain(format!("{n} is not a product of two distinct odd primes")))?;
    let bases = classify_bases(n)?;
    let count = |class| bases.iter().filter(|b| b.2 == class).count() as u64;
    let (good, odd_r, trivial_sqrt) = (
        count(BaseClass::Good),
        count(BaseClass::OddOrder),
        count(BaseClass::TrivialSquareRoot),
    );
    let num_x = bases.len() as u64;
    let common_factor = (n as u64 - 2) - num_x;
    let frac = |k: u64, of: u64| k as f64 / of as f64;
    Ok(FailureCensus {
        n,
        p1,
        p2,
        num_x,
        good,
        odd_r,
        trivial_sqrt,
        common_factor,
        fraction_odd: frac(odd_r, num_x),
        fraction_trivial_sqrt: frac(trivial_sqrt, num_x),
        fraction_bad: frac(odd_r + trivial_sqrt, num_x),
        fraction_common_factor: frac(common_factor, n as u64 - 2),
    })
}

/// All products `p1 p2 < limit` of two distinct odd primes, ascending.
pub fn odd_semiprimes_below(limit: Natural) -> Vec<Natural> {
    (15..limit)
        .step_by(2)
        .filter(|&n| odd_semiprime_factors(n).is_some())
        .collect()
}

/// Census of every `n` in `ns`, in input order.
pub fn census_sweep(ns: &[Natural]) -> Result<Vec<FailureCensus>> {
    ns.par_iter().map(|&n| failure_census(n)).collect()
}

/// Aggregate view of a census sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusSummary {
    pub schema_version: u32,
    pub semiprimes: usize,
    pub total_x: u64,
    pub total_bad: u64,
    /// Bad bases over all bases, pooled across `n`.
    pub aggregate_fraction_bad: f64,
    /// Unweighted mean of the per-`n` fractions.
    pub mean_fraction_bad: f64,
    pub max_fraction_bad: f64,
    pub max_fraction_bad_n: Natural,
    pub bound: f64,
    pub bound_ok: bool,
    pub band: [f64; 2],
    pub band_ok: bool,
}

pub fn summarize_census(rows: &[FailureCensus]) -> Result<CensusSummary> {
    let worst = rows
        .iter()
        .max_by(|a, b| a.fraction_bad.total_cmp(&b.fraction_bad))
        .ok_or_else(|| Error::domain("empty census"))?;
    let total_x: u64 = rows.iter().map(|r| r.num_x).sum();
    let total_bad: u64 = rows.iter().map(|r| r.odd_r + r.trivial_sqrt).sum();
    let aggregate = total_bad as f64 / total_x as f64;
    let band = [
        MODEL_FAILURE_PROBABILITY - CENSUS_BAND,
        MODEL_FAILURE_PROBABILITY + CENSUS_BAND,
    ];
    Ok(CensusSummary {
        schema_version: SCHEMA_VERSION,
        semiprimes: rows.len(),
        total_x,
        total_bad,
        aggregate_fraction_bad: aggregate,
        mean_fraction_bad: rows.iter().map(|r| r.fraction_bad).sum::<f64>() / rows.len() as f64,
        max_fraction_bad: worst.fraction_bad,
        max_fraction_bad_n: worst.n,
        bound: EKERT_JOZSA_BOUND,
        bound_ok: rows.iter().all(|r| r.fraction_bad <= EKERT_JOZSA_BOUND),
        band,
        band_ok: (band[0]..=band[1]).contains(&aggregate),
    })
}

/// Monte Carlo estimate of the independence model for the 2-adic valuations
/// `k1, k2` of the two per-prime orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValuationModelResult {
    pub schema_version: u32,
    pub trials: u64,
    /// Trials with `k1 = k2 >= 1` (the `x^(r/2) = -1` event).
    pub matched_valuations: u64,
    /// Trials with `k1 = k2 = 0` (both orders odd).
    pub both_odd: u64,
    /// `matched_valuations / trials`.
    pub estimate: f64,
    pub both_odd_estimate: f64,
    pub bad_estimate: f64,
}

pub const MIN_VALUATION_TRIALS: u64 = 10_000;

/// Draws `k1, k2` independently with `P(k = j) = 2^-(j+1)`.
///
/// The trailing-zero count of a uniform 64-bit word has exactly that law
/// (truncated at 64).
pub fn valuation_model_mc(trials: u64, seed: u64) -> Result<ValuationModelResult> {
    if trials < MIN_VALUATION_TRIALS {
        return Err(Error::domain(format!(
            "need at least {MIN_VALUATION_TRIALS} trials, got {trials}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let (mut matched, mut both_odd) = (0u64, 0u64);
    for _ in 0..trials {
        let k1 = rng.next_u64().trailing_zeros();
        let k2 = rng.next_u64().trailing_zeros();
        if k1 == k2 {
            if k1 == 0 {
                both_odd += 1;
            } else {
                matched += 1;
            }
        }
    }
    let t = trials as f64;
    Ok(ValuationModelResult {
        schema_version: SCHEMA_VERSION,
        trials,
        matched_valuations: matched,
        both_odd,
        estimate: matched as f64 / t,
        both_odd_estimate: both_odd as f64 / t,
        bad_estimate: (matched + both_odd) as f64 / t,
    })
}

/// Probability that a measurement lands on `c_nu` or `c_nu + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaptureRate {
    pub schema_version: u32,
    pub n: Natural,
    pub x: Natural,
    #[serde(rename = "N")]
    pub states: Natural,
    pub r: Natural,
    /// `sum_nu P(c_nu) + P(c_nu + 1)`, sampling-free.
    pub exact: f64,
    pub samples: u64,
    pub hits: u64,
    pub sampled: f64,
}

pub fn exact_capture(dist: &OutputDistribution, peaks: &[PeakModel]) -> f64 {
    crate::distribution::compensated_sum(
        peaks
            .iter()
            .flat_map(|p| [dist.prob(p.c_nu), dist.prob(p.c_nu + 1)]),
    )
}

/// Offset `d = c - c_nu` from the peak at or below `c`.
pub fn deviation_from_peak(c: Natural, ord: &OrderInfo, big_n: Natural) -> (Natural, Natural) {
    // largest nu with floor(nu N / r) <= c, i.e. nu N < (c + 1) r
    let nu = ((c + 1) * ord.r - 1) / big_n;
    let c_nu = nu * big_n / ord.r;
    (nu, c - c_nu)
}

pub fn capture_rate_empirical(
    n: Natural,
    x: Natural,
    register_qubits: u32,
    samples: u64,
    seed: u64,
) -> Result<CaptureRate> {
    let inst = ProblemInstance::with_register(n, x, register_qubits)?;
    if !inst.meets_square_bound() {
        return Err(Error::domain(format!(
            "N = {} is below n^2 = {}",
            inst.states(),
            n * n
        )));
    }
    let ord = OrderInfo::for_instance(&inst)?;
    let dist = two_term_distribution(&inst, &ord)?;
    let exact = exact_capture(&dist, &peaks(&inst, &ord));
    let sampler = Sampler::new(&dist)?;
    let mut rng = seeded_rng(seed);
    let hits = (0..samples)
        .filter(|_| deviation_from_peak(sampler.draw(&mut rng), &ord, inst.states()).1 <= 1)
        .count() as u64;
    Ok(CaptureRate {
        schema_version: SCHEMA_VERSION,
        n,
        x,
        states: inst.states(),
        r: ord.r,
        exact,
        samples,
        hits,
        sampled: if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        },
    })
}

/// One probed state next to a peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeighborProbe {
    pub nu: Natural,
    pub c: Natural,
    pub d: i64,
    pub recovered: Option<Fraction>,
    /// `|d - delta_nu| / N < delta_min`.
    pub within_margin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborReport {
    pub schema_version: u32,
    pub n: Natural,
    pub x: Natural,
    #[serde(rename = "N")]
    pub states: Natural,
    pub r: Natural,
    pub peaks_checked: usize,
    /// Peaks whose own state `c_nu` recovers `r / nu` exactly.
    pub peaks_recovered: usize,
    /// Probes whose recovered fraction differs from the one at `c_nu`.
    pub differing: Vec<NeighborProbe>,
    /// Differing probes that sit inside the correctness margin.
    pub unexpected: usize,
}

pub const NEIGHBOR_OFFSETS: [i64; 3] = [-1, 1, 2];

/// For every peak with `gcd(nu, r) = 1`, compares the continued-fraction
/// result at `c_nu` with the results at `c_nu - 1`, `c_nu + 1`, `c_nu + 2`.
pub fn neighbor_state_check(
    n: Natural,
    x: Natural,
    register_qubits: u32,
) -> Result<NeighborReport> {
    let inst = ProblemInstance::with_register(n, x, register_qubits)?;
    if !inst.meets_square_bound() {
        return Err(Error::domain(format!(
            "N = {} is below n^2 = {}",
            inst.states(),
            n * n
        )));
    }
    let ord = OrderInfo::for_instance(&inst)?;
    let big_n = inst.states();
    let mut report = NeighborReport {
        schema_version: SCHEMA_VERSION,
        n,
        x,
        states: big_n,
        r: ord.r,
        peaks_checked: 0,
        peaks_recovered: 0,
        differing: Vec::new(),
        unexpected: 0,
    };
    for peak in peaks(&inst, &ord)
        .into_iter()
        .filter(|p| p.nu != 0 && gcd_unchecked(p.nu, ord.r) == 1)
    {
        report.peaks_checked += 1;
        let center = recover_order(peak.c_nu, &inst)?.recovered;
        if center == Some(Fraction::new(ord.r, peak.nu)?) {
            report.peaks_recovered += 1;
        }
        for d in NEIGHBOR_OFFSETS {
            let c = (peak.c_nu as i128 + d as i128).rem_euclid(big_n as i128) as Natural;
            let recovered = recover_order(c, &inst)?.recovered;
            let within_margin = (d as f64 - peak.delta_nu).abs() / (big_n as f64) < ord.delta_min;
            if recovered != center {
                report.unexpected += within_margin as usize;
                report.differing.push(NeighborProbe {
                    nu: peak.nu,
                    c,
                    d,
                    recovered,
                    within_margin,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::multiplicative_order;
    use crate::pipeline::{extract_factors, Extraction};

    #[test]
    fn census_of_21() {
        let bases = classify_bases(21).unwrap();
        let find = |x| bases.iter().find(|b| b.0 == x).unwrap().2;
        assert_eq!(find(4), BaseClass::OddOrder);
        assert_eq!(find(5), BaseClass::TrivialSquareRoot);
        assert_eq!(find(10), BaseClass::Good);

        let c = failure_census(21).unwrap();
        assert_eq!(c.num_x, 11);
        assert_eq!(c.common_factor, 8);
        assert_eq!(c.good + c.odd_r + c.trivial_sqrt, c.num_x);
        assert!(c.fraction_bad <= EKERT_JOZSA_BOUND);
    }

    #[test]
    fn census_orders_match_brute_force() {
        for n in odd_semiprimes_below(400) {
            for (x, r, class) in classify_bases(n).unwrap() {
                assert_eq!(r, multiplicative_order(x, n).unwrap(), "n={n} x={x}");
                let expected = match extract_factors(n, x, r).unwrap() {
                    Extraction::Factors(p, q) => {
                        assert_eq!(p * q, n);
                        BaseClass::Good
                    }
                    Extraction::OddOrder => BaseClass::OddOrder,
                    Extraction::TrivialSquareRoot => BaseClass::TrivialSquareRoot,
                };
                assert_eq!(class, expected, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn census_rejects_non_semiprimes() {
        for n in [9, 25, 30, 105, 97] {
            assert!(matches!(failure_census(n), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn semiprimes_below_100() {
        assert_eq!(
            odd_semiprimes_below(100),
            vec![15, 21, 33, 35, 39, 51, 55, 57, 65, 69, 77, 85, 87, 91, 93, 95]
        );
    }

    #[test]
    fn valuation_mc_deterministic_and_guarded() {
        assert_eq!(valuation_model_mc(20_000, 5), valuation_model_mc(20_000, 5));
        assert!(matches!(
            valuation_model_mc(9_999, 5),
            Err(Error::Domain(_))
        ));
        let r = valuation_model_mc(20_000, 5).unwrap();
        assert!((r.estimate - r.matched_valuations as f64 / 20_000.0).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&r.estimate));
    }

    #[test]
    fn figure1_shape() {
        let fig = figure1_data().unwrap();
        assert_eq!(fig.distribution.len(), 256);
        assert_eq!(fig.peaks.len(), 6);
        assert!((fig.distribution.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn capture_requires_square_bound() {
        assert!(matches!(
            capture_rate_empirical(21, 10, 8, 10, 0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            neighbor_state_check(21, 10, 8),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn divisible_order_capture_is_peak_mass() {
        // r = 4 divides N: all mass sits exactly on the peaks
        let rate = capture_rate_empirical(15, 2, 8, 1_000, 3).unwrap();
        assert_eq!(rate.r, 4);
        assert!((rate.exact - 1.0).abs() < 1e-12);
        assert_eq!(rate.hits, 1_000);
    }

    #[test]
    fn neighbors_for_21() {
        let report = neighbor_state_check(21, 10, 9).unwrap();
        assert_eq!(report.peaks_checked, 2);
        assert_eq!(report.peaks_recovered, 2);
        assert_eq!(report.unexpected, 0);
        // d = 1 is always inside the margin for this instance
        assert!(report.differing.iter().all(|p| p.d != 1));
    }
}
