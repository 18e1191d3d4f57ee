use shorsim::distribution::{peaks, two_term_distribution, OrderInfo, ProblemInstance};
use shorsim::experiments::{
    capture_rate_empirical, classify_bases, deviation_from_peak, exact_capture, failure_census,
    figure1_data, neighbor_state_check, odd_semiprimes_below, valuation_model_mc, BaseClass,
};
use shorsim::number_theory::{gcd, multiplicative_order};
use shorsim::pipeline::{extract_factors, odd_semiprime_factors, Extraction};
use shorsim::Natural;

#[test]
fn census_agrees_with_extraction_on_the_true_order() {
    for n in odd_semiprimes_below(1_000) {
        for (x, r, class) in classify_bases(n).unwrap() {
            assert_eq!(r, multiplicative_order(x, n).unwrap(), "n={n} x={x}");
            let expected = match extract_factors(n, x, r).unwrap() {
                Extraction::Factors(..) => BaseClass::Good,
                Extraction::OddOrder => BaseClass::OddOrder,
                Extraction::TrivialSquareRoot => BaseClass::TrivialSquareRoot,
            };
            assert_eq!(class, expected, "n={n} x={x}");
        }
    }
}

#[test]
fn census_counts_add_up() {
    for n in odd_semiprimes_below(2_000) {
        let row = failure_census(n).unwrap();
        let (p, q) = odd_semiprime_factors(n).unwrap();
        assert_eq!((row.p1, row.p2), (p, q));
        assert_eq!(row.num_x as Natural, (p - 1) * (q - 1) - 1);
        assert_eq!(row.good + row.odd_r + row.trivial_sqrt, row.num_x);
        assert!(row.fraction_bad <= 0.5, "n={n}");
        assert!((row.fraction_bad - row.fraction_odd - row.fraction_trivial_sqrt).abs() < 1e-15);
    }
}

#[test]
fn semiprime_list_matches_brute_enumeration() {
    let brute: Vec<Natural> = (3..1_000)
        .filter(|&n| {
            let divisors: Vec<Natural> = (2..n).filter(|d| n % d == 0).collect();
            n % 2 == 1
                && divisors.len() == 2
                && divisors[0] * divisors[1] == n
                && divisors[1] % divisors[0] != 0
        })
        .collect();
    assert_eq!(odd_semiprimes_below(1_000), brute);
}

#[test]
fn census_rejects_non_semiprimes() {
    for n in [9, 25, 105, 22, 13] {
        assert!(failure_census(n).is_err(), "n={n}");
    }
}

#[test]
fn valuation_estimates_agree_across_seeds() {
    let trials = 200_000;
    let a = valuation_model_mc(trials, 1).unwrap();
    let b = valuation_model_mc(trials, 2).unwrap();
    assert_eq!(a, valuation_model_mc(trials, 1).unwrap());
    for (pa, pb, p) in [
        (a.estimate, b.estimate, 1.0 / 12.0),
        (a.both_odd_estimate, b.both_odd_estimate, 0.25),
    ] {
        // standard deviation of the difference of two independent estimates
        let sigma = (2.0 * p * (1.0 - p) / trials as f64).sqrt();
        assert!((pa - pb).abs() <= 5.0 * sigma, "{pa} vs {pb}");
    }
    assert!(valuation_model_mc(9_999, 0).is_err());
}

/// Instances whose displacements take many distinct values, so the mean of
/// the exact capture approaches the uniform-average figure.
#[test]
fn batch_capture_approaches_the_uniform_average() {
    let mut rates = Vec::new();
    for n in odd_semiprimes_below(200) {
        for x in (2..n).filter(|&x| gcd(x, n).unwrap() == 1) {
            let inst = ProblemInstance::new(n, x).unwrap();
            let ord = OrderInfo::for_instance(&inst).unwrap();
            // odd part of r at least 5 spreads delta over at least five values
            let odd_part = ord.r >> ord.r.trailing_zeros();
            if odd_part < 5 {
                continue;
            }
            let dist = two_term_distribution(&inst, &ord).unwrap();
            rates.push(exact_capture(&dist, &peaks(&inst, &ord)));
        }
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    assert!(rates.len() > 100);
    assert!((mean - 0.902).abs() <= 0.02, "mean capture {mean}");
}

#[test]
fn capture_with_exact_peaks_sits_on_the_peaks() {
    // r = 4 divides N, so every delta is zero
    let rate = capture_rate_empirical(15, 2, 8, 10_000, 3).unwrap();
    assert_eq!(rate.r, 4);
    assert!((rate.exact - 1.0).abs() < 1e-12);
    assert_eq!(rate.hits, rate.samples);
}

#[test]
fn sampled_capture_is_within_four_sigma_of_exact() {
    for (n, x, qa, seed) in [(21, 10, 9, 0), (35, 3, 11, 1), (55, 2, 12, 2)] {
        let rate = capture_rate_empirical(n, x, qa, 50_000, seed).unwrap();
        let sigma = (rate.exact * (1.0 - rate.exact) / rate.samples as f64).sqrt();
        assert!(
            (rate.sampled - rate.exact).abs() <= 4.0 * sigma,
            "n={n}: {rate:?}"
        );
        // the exact value is sampling-free
        assert_eq!(
            rate.exact,
            capture_rate_empirical(n, x, qa, 10, seed + 7)
                .unwrap()
                .exact
        );
    }
}

#[test]
fn every_state_is_assigned_its_own_peak_or_the_one_below() {
    let inst = ProblemInstance::with_register(21, 10, 9).unwrap();
    let ord = OrderInfo::for_instance(&inst).unwrap();
    let list = peaks(&inst, &ord);
    for c in 0..inst.states() {
        let (nu, d) = deviation_from_peak(c, &ord, inst.states());
        let below = list.iter().rev().find(|p| p.c_nu <= c).unwrap();
        assert_eq!((nu, d), (below.nu, c - below.c_nu), "c={c}");
    }
}

#[test]
fn capture_requires_the_square_bound() {
    assert!(capture_rate_empirical(21, 10, 8, 10, 0).is_err());
}

#[test]
fn neighbors_inside_the_margin_never_change_the_answer() {
    for n in [15, 21, 33, 35, 39, 51, 55, 57] {
        for x in (2..n).filter(|&x| gcd(x, n).unwrap() == 1) {
            let inst = ProblemInstance::new(n, x).unwrap();
            let report = neighbor_state_check(n, x, inst.register_qubits()).unwrap();
            assert_eq!(report.unexpected, 0, "n={n} x={x}");
            assert!(report.differing.iter().all(|p| !p.within_margin));
        }
    }
}

#[test]
fn fig_one_neighbor_example() {
    let report = neighbor_state_check(21, 10, 9).unwrap();
    assert_eq!(report.r, 6);
    // nu = 1 and nu = 5 are the coprime peaks
    assert_eq!(report.peaks_checked, 2);
    assert_eq!(report.peaks_recovered, 2);
}

#[test]
fn figure_one_has_six_peaks_at_the_expected_cells() {
    let fig = figure1_data().unwrap();
    assert_eq!(fig.distribution.len(), 256);
    assert_eq!(fig.peaks.len(), 6);
    let top: Vec<Natural> = {
        let mut v = fig.distribution.states_by_mass()[..6].to_vec();
        v.sort();
        v
    };
    for (peak, &state) in fig.peaks.iter().zip(&top) {
        assert!(
            state == peak.c_nu || state == peak.c_nu + 1,
            "nu={}",
            peak.nu
        );
    }
}
