//! One simulated factoring attempt, end to end.
//!
//! precheck `gcd(x, n)` → build the instance → draw `c` from the exact
//! output distribution → continued-fraction estimate of `r` → verify
//! `x^r = 1` → split `n` with `gcd(x^(r/2) ± 1, n)`.
//!
//! A run never picks a new `x` on its own. Failing bases (odd order, or
//! `x^(r/2) = -1`) are reported, and choosing another base is left to the
//! caller.

use serde::Serialize;

use crate::distribution::{
    default_register_qubits, peaks, two_term_distribution, OrderInfo, ProblemInstance, Sampler,
};
use crate::error::{Error, Result};
use crate::number_theory::{
    gcd_unchecked, mod_pow, order_ratio_estimate, ExpansionRoute, Fraction, Natural,
    MAX_REGISTER_QUBITS,
};
use crate::rng::seeded_rng;

/// Version tag written into every machine-readable output.
pub const SCHEMA_VERSION: u32 = 1;

/// `Some((p, q))` with `p < q` when `n` is a product of two distinct odd
/// primes.
pub fn odd_semiprime_factors(n: Natural) -> Option<(Natural, Natural)> {
    if n % 2 == 0 {
        return None;
    }
    match crate::number_theory::factorize(n).as_slice() {
        [(p, 1), (q, 1)] => Some((*p, *q)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precheck {
    Proceed,
    /// `gcd(x, n)` is already a nontrivial factor.
    CommonFactorShortcut(Natural),
}

pub fn precheck(n: Natural, x: Natural) -> Result<Precheck> {
    if n < 3 {
        return Err(Error::domain(format!("n = {n} is too small to factor")));
    }
    if x <= 1 || x >= n {
        return Err(Error::domain(format!("x = {x} must satisfy 1 < x < {n}")));
    }
    Ok(match gcd_unchecked(x, n) {
        1 => Precheck::Proceed,
        g => Precheck::CommonFactorShortcut(g),
    })
}

/// What the classical post-processing made of one measured state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RecoveryResult {
    pub c: Natural,
    /// Candidate `r / nu`.
    pub recovered: Option<Fraction>,
    pub r_candidate: Option<Natural>,
    /// `x^r_candidate = 1 (mod n)`.
    pub verified: bool,
}

pub fn recover_order(c: Natural, inst: &ProblemInstance) -> Result<RecoveryResult> {
    recover_order_via(c, inst, ExpansionRoute::default())
}

pub fn recover_order_via(
    c: Natural,
    inst: &ProblemInstance,
    route: ExpansionRoute,
) -> Result<RecoveryResult> {
    let recovered = order_ratio_estimate(c, inst.states(), inst.n(), route)?;
    let r_candidate = recovered.map(|f| f.numerator());
    let verified = match r_candidate {
        Some(r) if r > 0 => mod_pow(inst.x(), r, inst.n())? == 1,
        _ => false,
    };
    Ok(RecoveryResult {
        c,
        recovered,
        r_candidate,
        verified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Success,
    OddOrder,
    TrivialSquareRoot,
    ZeroPeak,
    UnverifiedOrder,
    CommonFactorShortcut,
    /// The retry budget ran out without a verified order.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extraction {
    /// `(p, q)` with `p <= q` and `p q = n`.
    Factors(Natural, Natural),
    OddOrder,
    /// `x^(r/2) = -1 (mod n)`: both gcds are trivial.
    TrivialSquareRoot,
}

/// Splits `n` from an exponent `r` with `x^r = 1 (mod n)`.
///
/// If `r` is a proper multiple of the order it is halved while
/// `x^(r/2) = 1` still holds, so the gcd step always sees an `r` for which
/// `x^(r/2) != 1`.
pub fn extract_factors(n: Natural, x: Natural, r: Natural) -> Result<Extraction> {
    if r == 0 || mod_pow(x, r, n)? != 1 {
        return Err(Error::contract(format!("{x}^{r} is not 1 mod {n}")));
    }
    let mut r = r;
    while r % 2 == 0 && mod_pow(x, r / 2, n)? == 1 {
        r /= 2;
    }
    if r % 2 == 1 {
        return Ok(Extraction::OddOrder);
    }
    let y = mod_pow(x, r / 2, n)?;
    if y == n - 1 {
        return Ok(Extraction::TrivialSquareRoot);
    }
    // y^2 = 1 with y != ±1, so n divides (y - 1)(y + 1) but neither factor
    [gcd_unchecked(y - 1, n), gcd_unchecked(y + 1, n)]
        .into_iter()
        .find(|&g| g != 1 && g != n)
        .map(|p| {
            let q = n / p;
            Extraction::Factors(p.min(q), p.max(q))
        })
        .ok_or_else(|| {
            Error::contract(format!(
                "{y} is a nontrivial square root of 1 but {n} did not split"
            ))
        })
}

/// Retry budget for [`run_with_retries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RetryPolicy {
    /// Largest multiplier tried on an unverified order candidate.
    pub max_mu: Natural,
    /// Number of fresh measurements allowed after the first.
    pub max_resamples: usize,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_mu: 64,
            max_resamples: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RetryEvent {
    MultiplierFound {
        attempt: usize,
        r_candidate: Natural,
        mu: Natural,
        order: Natural,
    },
    MultipliersExhausted {
        attempt: usize,
        r_candidate: Natural,
        max_mu: Natural,
    },
    /// A factor fell out of treating the unverified candidate as the order.
    OpportunisticFactor {
        attempt: usize,
        r_candidate: Natural,
        factor: Natural,
    },
    Resample {
        attempt: usize,
        c: Natural,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub n: Natural,
    pub x: Natural,
    pub register_qubits: u32,
    pub states: Natural,
    /// Brute-force order of `x`, absent on the common-factor shortcut.
    pub r_true: Option<Natural>,
    pub c: Option<Natural>,
    pub recovery: Option<RecoveryResult>,
    pub classification: Classification,
    pub factors: Option<(Natural, Natural)>,
    pub retries: Vec<RetryEvent>,
}

/// Wire form of a [`RunOutcome`].
#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub schema_version: u32,
    pub n: Natural,
    pub x: Natural,
    #[serde(rename = "qA")]
    pub qa: u32,
    #[serde(rename = "N")]
    pub big_n: Natural,
    pub r_true: Option<Natural>,
    pub c: Option<Natural>,
    pub recovered_num: Option<Natural>,
    pub recovered_den: Option<Natural>,
    pub classification: Classification,
    pub factors: Option<[Natural; 2]>,
    pub retries: &'a [RetryEvent],
}

impl RunOutcome {
    pub fn record(&self) -> RunRecord<'_> {
        let recovered = self.recovery.and_then(|r| r.recovered);
        RunRecord {
            schema_version: SCHEMA_VERSION,
            n: self.n,
            x: self.x,
            qa: self.register_qubits,
            big_n: self.states,
            r_true: self.r_true,
            c: self.c,
            recovered_num: recovered.map(|f| f.numerator()),
            recovered_den: recovered.map(|f| f.denominator()),
            classification: self.classification,
            factors: self.factors.map(|(p, q)| [p, q]),
            retries: &self.retries,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.record()).expect("run record is always serializable")
    }

    fn shortcut(
        n: Natural,
        x: Natural,
        register_qubits: Option<u32>,
        factor: Natural,
    ) -> Result<Self> {
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
            states: 1 << register_qubits,
            r_true: None,
            c: None,
            recovery: None,
            classification: Classification::CommonFactorShortcut,
            factors: Some((factor, n / factor)),
            retries: Vec::new(),
        })
    }
}

fn classify_extraction(extraction: Extraction) -> (Classification, Option<(Natural, Natural)>) {
    match extraction {
        Extraction::Factors(p, q) => (Classification::Success, Some((p, q))),
        Extraction::OddOrder => (Classification::OddOrder, None),
        Extraction::TrivialSquareRoot => (Classification::TrivialSquareRoot, None),
    }
}

/// Post-processing of a single measured state, without any retries.
pub fn classify_measurement(
    c: Natural,
    inst: &ProblemInstance,
) -> Result<(RecoveryResult, Classification, Option<(Natural, Natural)>)> {
    let recovery = recover_order(c, inst)?;
    if c == 0 {
        return Ok((recovery, Classification::ZeroPeak, None));
    }
    match recovery.r_candidate {
        Some(r) if recovery.verified => {
            let (class, factors) = classify_extraction(extract_factors(inst.n(), inst.x(), r)?);
            Ok((recovery, class, factors))
        }
        _ => Ok((recovery, Classification::UnverifiedOrder, None)),
    }
}

/// State shared by every measurement of one simulated machine.
struct Machine {
    inst: ProblemInstance,
    ord: OrderInfo,
    sampler: Sampler,
}

enum Prepared {
    Shortcut(RunOutcome),
    Ready(Machine),
}

fn prepare(n: Natural, x: Natural, register_qubits: Option<u32>) -> Result<Prepared> {
    if odd_semiprime_factors(n).is_none() {
        return Err(Error::domain(format!(
            "{n} is not a product of two distinct odd primes"
        )));
    }
    if let Precheck::CommonFactorShortcut(g) = precheck(n, x)? {
        return RunOutcome::shortcut(n, x, register_qubits, g).map(Prepared::Shortcut);
    }
    let inst = ProblemInstance::build(n, x, register_qubits)?;
    let ord = OrderInfo::for_instance(&inst)?;
    let dist = two_term_distribution(&inst, &ord)?;
    let sampler = Sampler::new(&dist)?;
    Ok(Prepared::Ready(Machine { inst, ord, sampler }))
}

impl Machine {
    fn outcome(
        &self,
        c: Natural,
        recovery: RecoveryResult,
        classification: Classification,
        factors: Option<(Natural, Natural)>,
        retries: Vec<RetryEvent>,
    ) -> RunOutcome {
        RunOutcome {
            n: self.inst.n(),
            x: self.inst.x(),
            register_qubits: self.inst.register_qubits(),
            states: self.inst.states(),
            r_true: Some(self.ord.r),
            c: Some(c),
            recovery: Some(recovery),
            classification,
            factors,
            retries,
        }
    }
}

/// A single measurement and its post-processing. `register_qubits = None`
/// uses the default register size.
pub fn run_once(
    n: Natural,
    x: Natural,
    register_qubits: Option<u32>,
    seed: u64,
) -> Result<RunOutcome> {
    let machine = match prepare(n, x, register_qubits)? {
        Prepared::Shortcut(outcome) => return Ok(outcome),
        Prepared::Ready(m) => m,
    };
    let mut rng = seeded_rng(seed);
    let c = machine.sampler.draw(&mut rng);
    let (recovery, class, factors) = classify_measurement(c, &machine.inst)?;
    Ok(machine.outcome(c, recovery, class, factors, Vec::new()))
}

/// Like [`run_once`], but an unverified candidate first gets multiplier
/// trials `mu = 2..=max_mu`, then a gcd attempt on the candidate itself,
/// and only then a fresh measurement with the same `x`.
///
/// The first measurement uses the same random stream as [`run_once`], so
/// both agree whenever no retry is needed.
pub fn run_with_retries(
    n: Natural,
    x: Natural,
    register_qubits: Option<u32>,
    policy: RetryPolicy,
    seed: u64,
) -> Result<RunOutcome> {
    let machine = match prepare(n, x, register_qubits)? {
        Prepared::Shortcut(outcome) => return Ok(outcome),
        Prepared::Ready(m) => m,
    };
    let inst = &machine.inst;
    let mut rng = seeded_rng(seed);
    let mut log = Vec::new();
    let mut c = machine.sampler.draw(&mut rng);

    for attempt in 0..=policy.max_resamples {
        if attempt > 0 {
            c = machine.sampler.draw(&mut rng);
            log.push(RetryEvent::Resample { attempt, c });
        }
        let (recovery, class, factors) = classify_measurement(c, inst)?;
        match class {
            Classification::UnverifiedOrder => {
                if let Some(rc) = recovery.r_candidate.filter(|&r| r > 0) {
                    if let Some(found) =
                        try_multipliers(inst, rc, policy.max_mu, attempt, &mut log)?
                    {
                        let (class, factors) = classify_extraction(extract_factors(n, x, found)?);
                        return Ok(machine.outcome(c, recovery, class, factors, log));
                    }
                    if let Some(p) = opportunistic_factor(n, x, rc)? {
                        log.push(RetryEvent::OpportunisticFactor {
                            attempt,
                            r_candidate: rc,
                            factor: p,
                        });
                        let q = n / p;
                        let factors = Some((p.min(q), p.max(q)));
                        return Ok(machine.outcome(
                            c,
                            recovery,
                            Classification::Success,
                            factors,
                            log,
                        ));
                    }
                }
            }
            Classification::ZeroPeak => {}
            _ => return Ok(machine.outcome(c, recovery, class, factors, log)),
        }
        if attempt == policy.max_resamples {
            return Ok(machine.outcome(c, recovery, Classification::Exhausted, None, log));
        }
    }
    unreachable!("the final attempt always returns")
}

fn try_multipliers(
    inst: &ProblemInstance,
    r_candidate: Natural,
    max_mu: Natural,
    attempt: usize,
    log: &mut Vec<RetryEvent>,
) -> Result<Option<Natural>> {
    for mu in 2..=max_mu {
        let order = mu * r_candidate;
        if mod_pow(inst.x(), order, inst.n())? == 1 {
            log.push(RetryEvent::MultiplierFound {
                attempt,
                r_candidate,
                mu,
                order,
            });
            return Ok(Some(order));
        }
    }
    log.push(RetryEvent::MultipliersExhausted {
        attempt,
        r_candidate,
        max_mu,
    });
    Ok(None)
}

/// `gcd(x^(r/2) ± 1, n)` for an even `r` that is not known to be the order.
fn opportunistic_factor(n: Natural, x: Natural, r: Natural) -> Result<Option<Natural>> {
    if r % 2 == 1 {
        return Ok(None);
    }
    let y = mod_pow(x, r / 2, n)?;
    Ok([(y + n - 1) % n, (y + 1) % n]
        .into_iter()
        .filter(|&v| v != 0)
        .map(|v| gcd_unchecked(v, n))
        .find(|&g| g != 1 && g != n))
}

/// `(nu + 1)/(r + 1) - nu/r = (r - nu) / (r (r + 1))`, the distance from
/// `nu/r` to the closest wrong fraction.
pub fn nearest_wrong_gap(nu: Natural, r: Natural) -> Result<Fraction> {
    if r == 0 || nu >= r {
        return Err(Error::domain(format!(
            "need 0 <= nu < r, got nu = {nu}, r = {r}"
        )));
    }
    Fraction::new(r - nu, r * (r + 1))
}

/// How the instance's register size relates to the continued-fraction
/// correctness margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub schema_version: u32,
    pub n: Natural,
    #[serde(rename = "N")]
    pub states: Natural,
    pub r: Natural,
    /// `1 / ((n - 1) n)`.
    pub delta_min: f64,
    /// `1 / (r (r + 1))`, the margin for this particular order.
    pub order_gap: f64,
    /// `max |d - delta_nu| / N` over all peaks and `d` in `{0, 1}`.
    pub max_offset: f64,
    pub offsets_below_delta_min: bool,
    /// `N >= n^2`, the condition under which `d = 0, 1` always recover `r`.
    pub square_bound_met: bool,
}

pub fn order_recovery_guarantee(inst: &ProblemInstance) -> Result<GuaranteeReport> {
    let ord = OrderInfo::for_instance(inst)?;
    let big_n = inst.states() as f64;
    let max_offset = peaks(inst, &ord)
        .iter()
        .flat_map(|p| [p.delta_nu, 1.0 - p.delta_nu])
        .fold(0.0f64, f64::max)
        / big_n;
    let r = ord.r as f64;
    Ok(GuaranteeReport {
        schema_version: SCHEMA_VERSION,
        n: inst.n(),
        states: inst.states(),
        r: ord.r,
        delta_min: ord.delta_min,
        order_gap: 1.0 / (r * (r + 1.0)),
        max_offset,
        offsets_below_delta_min: max_offset < ord.delta_min,
        square_bound_met: inst.meets_square_bound(),
    })
}
