//! Output statistics of register A after the Fourier transform.
//!
//! The distribution `P(c)` over the `N = 2^q_A` measurable states is built
//! three independent ways:
//!
//! * [`oracle_distribution`] sums the unit phases `exp(2 pi i a c / N)` over
//!   every `a = e r + k` directly,
//! * [`per_k_distribution`] sums the closed geometric-series form for each
//!   residue `k = 0..r`,
//! * [`two_term_distribution`] groups the residues into the `k0` that see
//!   `M0 + 1` full periods and the `r - k0` that see `M0`.
//!
//! Trigonometric arguments are reduced in exact integer arithmetic before
//! conversion to `f64`, and the singular states `r c = 0 (mod N)` are
//! detected exactly.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::number_theory::{
    gcd_unchecked, multiplicative_order, Fraction, Natural, MAX_REGISTER_QUBITS,
};
use crate::rng::seeded_rng;

/// Hard cap on `q_A` for anything that materializes all `N` probabilities.
pub const MAX_DISTRIBUTION_QUBITS: u32 = 24;

/// Allowed deviation of `sum P(c)` from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Smallest `q` with `2^q >= value`, i.e. `ceil(log2(value))` for `value >= 1`.
pub fn ceil_log2(value: Natural) -> u32 {
    if value <= 1 {
        0
    } else {
        Natural::BITS - (value - 1).leading_zeros()
    }
}

/// Default size of register A: `ceil(2 log2 n)`, the least `q` with `2^q >= n^2`.
pub fn default_register_qubits(n: Natural) -> u32 {
    ceil_log2(n * n)
}

/// One simulated machine: the number to factor, the base and the register
/// sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProblemInstance {
    n: Natural,
    x: Natural,
    #[serde(rename = "qA")]
    register_qubits: u32,
    #[serde(rename = "qB")]
    work_qubits: u32,
    #[serde(rename = "N")]
    states: Natural,
}

impl ProblemInstance {
    /// Instance with the default register sizes.
    pub fn new(n: Natural, x: Natural) -> Result<Self> {
        Self::build(n, x, None)
    }

    /// Instance with an explicit register-A size.
    pub fn with_register(n: Natural, x: Natural, register_qubits: u32) -> Result<Self> {
        Self::build(n, x, Some(register_qubits))
    }

    pub fn build(n: Natural, x: Natural, register_qubits: Option<u32>) -> Result<Self> {
        if n < 3 || n > u64::MAX as Natural {
            return Err(Error::domain(format!("n = {n} outside 3..2^64")));
        }
        if x <= 1 || x >= n {
            return Err(Error::domain(format!("x = {x} must satisfy 1 < x < {n}")));
        }
        let g = gcd_unchecked(x, n);
        if g != 1 {
            return Err(Error::NoOrder { x, n, gcd: g });
        }
        let register_qubits = register_qubits.unwrap_or_else(|| default_register_qubits(n));
        if register_qubits == 0 || register_qubits > MAX_REGISTER_QUBITS {
            return Err(Error::domain(format!(
                "q_A = {register_qubits} outside 1..={MAX_REGISTER_QUBITS}"
            )));
        }
        Ok(Self {
            n,
            x,
            register_qubits,
            work_qubits: ceil_log2(n),
            states: 1 << register_qubits,
        })
    }

    pub fn n(&self) -> Natural {
        self.n
    }

    pub fn x(&self) -> Natural {
        self.x
    }

    pub fn register_qubits(&self) -> u32 {
        self.register_qubits
    }

    pub fn work_qubits(&self) -> u32 {
        self.work_qubits
    }

    /// `N = 2^q_A`.
    pub fn states(&self) -> Natural {
        self.states
    }

    /// Whether `N >= n^2`.
    pub fn meets_square_bound(&self) -> bool {
        self.states >= self.n * self.n
    }

    fn check_distribution_guard(&self) -> Result<()> {
        if self.register_qubits > MAX_DISTRIBUTION_QUBITS {
            return Err(Error::resource(format!(
                "q_A = {} exceeds the distribution cap of {MAX_DISTRIBUTION_QUBITS}",
                self.register_qubits
            )));
        }
        Ok(())
    }
}

/// Order of `x` mod `n` together with the period counts of the instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderInfo {
    pub r: Natural,
    /// `floor((N - r) / r)`.
    pub m0: Natural,
    /// Number of residues `k` that fit `m0 + 1` full periods.
    pub k0: Natural,
    /// `1 / ((n - 1) n)`.
    pub delta_min: f64,
}

impl OrderInfo {
    /// Computes `r` by brute force.
    pub fn for_instance(inst: &ProblemInstance) -> Result<Self> {
        let r = multiplicative_order(inst.x, inst.n)?;
        Self::with_order(inst, r)
    }

    /// Builds the derived quantities from a known order.
    pub fn with_order(inst: &ProblemInstance, r: Natural) -> Result<Self> {
        let big_n = inst.states;
        if r == 0 || r > big_n {
            return Err(Error::domain(format!(
                "order {r} does not fit a register of {big_n} states"
            )));
        }
        let m0 = (big_n - r) / r;
        let k0 = (0..=r)
            .find(|&k| k == r || (big_n - k - 1) / r == m0)
            .expect("range includes r");
        let n = inst.n as f64;
        Ok(Self {
            r,
            m0,
            k0,
            delta_min: 1.0 / ((n - 1.0) * n),
        })
    }

    /// `M + 1 = floor((N - k - 1) / r) + 1`, the number of `a < N` with
    /// `a = k (mod r)`.
    pub fn period_count(&self, big_n: Natural, k: Natural) -> Natural {
        (big_n - k - 1) / self.r + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    OracleSum,
    PerKClosedForm,
    TwoTermForm,
}

/// `P(c)` for `c = 0..N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputDistribution {
    probabilities: Vec<f64>,
    method: Method,
}

impl OutputDistribution {
    /// Wraps a probability vector, checking that it is non-negative and
    /// normalized.
    pub fn from_probabilities(probabilities: Vec<f64>, method: Method) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::domain("empty distribution"));
        }
        if let Some((c, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::domain(format!("P({c}) = {p} is not a probability")));
        }
        let total = compensated_sum(probabilities.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::domain(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        Ok(Self {
            probabilities,
            method,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// `P(c)`, with `c` taken modulo `N`.
    pub fn prob(&self, c: Natural) -> f64 {
        self.probabilities[(c % self.probabilities.len() as Natural) as usize]
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probabilities.iter().copied())
    }

    /// States ordered by decreasing probability, ties broken by index.
    pub fn states_by_mass(&self) -> Vec<Natural> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.probabilities[b]
                .total_cmp(&self.probabilities[a])
                .then(a.cmp(&b))
        });
        idx.into_iter().map(|c| c as Natural).collect()
    }
}

/// Running Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    values.into_iter().for_each(|v| acc.add(v));
    acc.value()
}

/// `sin^2(pi t / N)` for an integer `t` already reduced modulo `N`.
#[inline]
fn sin_sq_turns(t: Natural, big_n: Natural) -> f64 {
    // sin^2 is symmetric about N/2
    let t = t.min(big_n - t);
    let s = (PI * t as f64 / big_n as f64).sin();
    s * s
}

/// `(1/N^2) sin^2(pi m r c / N) / sin^2(pi r c / N)`, with the `0/0` limit
/// `m^2 / N^2` when `r c = 0 (mod N)`.
fn geometric_term(periods: Natural, r: Natural, c: Natural, big_n: Natural) -> f64 {
    let n_sq = (big_n as f64) * (big_n as f64);
    let rc = (r % big_n) * c % big_n;
    if rc == 0 {
        let m = periods as f64;
        return m * m / n_sq;
    }
    // sin^2 has period pi, so the numerator argument only matters mod N
    let numerator_turns = (periods % big_n) * rc % big_n;
    sin_sq_turns(numerator_turns, big_n) / sin_sq_turns(rc, big_n) / n_sq
}

/// `P(c)` by direct summation of unit phases over every `a = e r + k < N`.
///
/// Cost is `O(N^2)`; intended as the reference for the closed forms.
pub fn oracle_distribution(inst: &ProblemInstance) -> Result<OutputDistribution> {
    inst.check_distribution_guard()?;
    let ord = OrderInfo::for_instance(inst)?;
    let big_n = inst.states;
    let len = big_n as usize;
    let twiddles: Vec<(f64, f64)> = (0..len)
        .map(|j| {
            let angle = 2.0 * PI * j as f64 / big_n as f64;
            (angle.cos(), angle.sin())
        })
        .collect();
    let r = ord.r;

    let probabilities: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|c| {
            // N is a power of two, so reduction mod N is a mask
            let mask = len - 1;
            let step = (r as usize).wrapping_mul(c) & mask;
            let terms = (0..r).map(|k| {
                let mut phase = (k as usize).wrapping_mul(c) & mask;
                let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
                for _ in 0..ord.period_count(big_n, k) {
                    let (cr, ci) = twiddles[phase];
                    re.add(cr);
                    im.add(ci);
                    phase = (phase + step) & mask;
                }
                let (re, im) = (re.value(), im.value());
                (re * re + im * im) / (big_n as f64 * big_n as f64)
            });
            compensated_sum(terms)
        })
        .collect();
    OutputDistribution::from_probabilities(probabilities, Method::OracleSum)
}

/// `P(c)` as the sum over `k = 0..r` of the per-residue closed form.
pub fn per_k_distribution(inst: &ProblemInstance, ord: &OrderInfo) -> Result<OutputDistribution> {
    inst.check_distribution_guard()?;
    let big_n = inst.states;
    let probabilities: Vec<f64> =
        (0..big_n as usize)
            .into_par_iter()
            .map(|c| {
                compensated_sum((0..ord.r).map(|k| {
                    geometric_term(ord.period_count(big_n, k), ord.r, c as Natural, big_n)
                }))
            })
            .collect();
    OutputDistribution::from_probabilities(probabilities, Method::PerKClosedForm)
}

fn two_term_value(ord: &OrderInfo, c: Natural, big_n: Natural) -> f64 {
    // residues k < k0 have M = m0 + 1, so they span m0 + 2 periods
    let long = ord.k0 as f64 * geometric_term(ord.m0 + 2, ord.r, c, big_n);
    let short = (ord.r - ord.k0) as f64 * geometric_term(ord.m0 + 1, ord.r, c, big_n);
    long + short
}

/// `P(c)` from the `k0`-weighted two-term form: `k0` residues with
/// `M = m0 + 1` and `r - k0` residues with `M = m0`, each contributing
/// `sin^2(pi (M + 1) r c / N) / (N^2 sin^2(pi r c / N))`.
pub fn two_term_distribution(
    inst: &ProblemInstance,
    ord: &OrderInfo,
) -> Result<OutputDistribution> {
    inst.check_distribution_guard()?;
    let big_n = inst.states;
    let probabilities: Vec<f64> = (0..big_n as usize)
        .into_par_iter()
        .map(|c| two_term_value(ord, c as Natural, big_n))
        .collect();
    OutputDistribution::from_probabilities(probabilities, Method::TwoTermForm)
}

/// The two-term form at a real-valued state `sigma`. Periodic with period
/// `N / r`; its maxima sit at `nu N / r`.
pub fn envelope(inst: &ProblemInstance, ord: &OrderInfo, sigma: f64) -> Result<f64> {
    let big_n = inst.states as f64;
    if !(0.0..big_n).contains(&sigma) {
        return Err(Error::domain(format!(
            "sigma = {sigma} outside [0, {big_n})"
        )));
    }
    let r = ord.r as f64;
    let k0 = ord.k0 as f64;
    let (long, short) = (ord.m0 as f64 + 2.0, ord.m0 as f64 + 1.0);
    let turns = r * sigma / big_n;
    // integer shifts of `turns` leave every sin^2 below unchanged
    let mut frac = turns - turns.floor();
    if frac == 0.0 {
        return Ok((k0 * long * long + (r - k0) * short * short) / (big_n * big_n));
    }
    if frac > 0.5 {
        frac -= 1.0;
    }
    let sin_sq = |x: f64| (PI * x).sin().powi(2);
    let denom = sin_sq(frac) * big_n * big_n;
    Ok((k0 * sin_sq(long * frac) + (r - k0) * sin_sq(short * frac)) / denom)
}

/// Location of one peak of `P(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakModel {
    pub nu: Natural,
    /// `nu N / r`.
    pub sigma_nu: f64,
    /// `floor(sigma_nu)`.
    pub c_nu: Natural,
    /// `sigma_nu - c_nu`, in `[0, 1)`.
    pub delta_nu: f64,
    #[serde(skip)]
    delta_exact: Fraction,
}

impl PeakModel {
    /// `delta_nu` as an exact fraction with denominator dividing `r`.
    pub fn delta_exact(&self) -> Fraction {
        self.delta_exact
    }

    /// Integer offset `d = c - c_nu` of a state relative to this peak.
    pub fn deviation(&self, c: Natural) -> i128 {
        c as i128 - self.c_nu as i128
    }
}

/// The `r` peaks `sigma_nu = nu N / r`, split exactly into integer part and
/// displacement.
pub fn peaks(inst: &ProblemInstance, ord: &OrderInfo) -> Vec<PeakModel> {
    let big_n = inst.states;
    (0..ord.r)
        .map(|nu| {
            let scaled = nu * big_n;
            let c_nu = scaled / ord.r;
            let remainder = scaled % ord.r;
            let delta_exact = Fraction::new(remainder, ord.r).expect("r >= 1");
            let delta_nu = delta_exact.to_f64();
            PeakModel {
                nu,
                sigma_nu: c_nu as f64 + delta_nu,
                c_nu,
                delta_nu,
                delta_exact,
            }
        })
        .collect()
}

/// Within-peak approximation `sin^2(pi delta) / (pi^2 (d - delta)^2)`.
///
/// At `delta = 0` this is the limit: 1 for `d = 0`, 0 otherwise.
pub fn peak_deviation_prob(d: i64, delta_nu: f64) -> f64 {
    if delta_nu == 0.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let s = (PI * delta_nu).sin();
    let gap = d as f64 - delta_nu;
    s * s / (PI * PI * gap * gap)
}

/// `peak_deviation_prob` on the closed interval, using `P(d, 1) = P(d - 1, 0)`.
fn deviation_integrand(d: i64, delta: f64) -> f64 {
    if delta >= 1.0 {
        peak_deviation_prob(d - 1, 0.0)
    } else {
        peak_deviation_prob(d, delta)
    }
}

/// Composite Simpson rule with `intervals` (even) sub-intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let intervals = intervals + intervals % 2;
    let h = (b - a) / intervals as f64;
    let inner = (1..intervals).map(|i| {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        w * f(a + i as f64 * h)
    });
    h / 3.0 * compensated_sum(std::iter::once(f(a) + f(b)).chain(inner))
}

const CAPTURE_INTERVALS: usize = 4096;

/// Mean over a uniform `delta` in `[0, 1)` of `peak_deviation_prob(d, delta)`.
pub fn deviation_mass(d: i64) -> f64 {
    simpson(
        |delta| deviation_integrand(d, delta),
        0.0,
        1.0,
        CAPTURE_INTERVALS,
    )
}

/// Probability, averaged over a uniform peak displacement, that the measured
/// state lands at `d = 0` or `d = 1`.
pub fn capture_probability_d01() -> f64 {
    simpson(
        |delta| deviation_integrand(0, delta) + deviation_integrand(1, delta),
        0.0,
        1.0,
        CAPTURE_INTERVALS,
    )
}

/// Inverse-CDF sampler over the states of an [`OutputDistribution`].
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Sampler {
    pub fn new(dist: &OutputDistribution) -> Result<Self> {
        let probabilities = dist.probabilities();
        let total = dist.total();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::domain(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        let mut acc = CompensatedSum::default();
        let cumulative: Vec<f64> = probabilities
            .iter()
            .map(|&p| {
                acc.add(p);
                acc.value()
            })
            .collect();
        let last_positive = probabilities
            .iter()
            .rposition(|&p| p > 0.0)
            .ok_or_else(|| Error::domain("distribution has no positive mass"))?;
        Ok(Self {
            cumulative,
            last_positive,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Natural {
        let total = self.cumulative[self.last_positive];
        let u = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|&cum| cum <= u);
        idx.min(self.last_positive) as Natural
    }
}

/// `count` i.i.d. draws of `c` from `dist`; identical for identical seeds.
pub fn sample(dist: &OutputDistribution, seed: u64, count: usize) -> Result<Vec<Natural>> {
    let sampler = Sampler::new(dist)?;
    let mut rng = seeded_rng(seed);
    Ok((0..count).map(|_| sampler.draw(&mut rng)).collect())
}
