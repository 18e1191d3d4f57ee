// Fraction of bases that cannot split n, for odd semiprimes below a limit.
//
// Run with `cargo run --release --example failure_census -- 10000`.

use shorsim::experiments::{census_sweep, odd_semiprimes_below, summarize_census};
use shorsim::Natural;

pub fn run_example() -> shorsim::Result<()> {
    census_below(1_000)
}

fn census_below(limit: Natural) -> shorsim::Result<()> {
    let rows = census_sweep(&odd_semiprimes_below(limit))?;
    for row in rows.iter().take(8) {
        println!(
            "n = {:4} = {} * {}: odd r {:3}, x^(r/2) = -1 {:3}, bad {:.4}",
            row.n, row.p1, row.p2, row.odd_r, row.trivial_sqrt, row.fraction_bad
        );
    }
    let summary = summarize_census(&rows)?;
    println!(
        "{} semiprimes below {limit}: aggregate bad {:.4}, worst {:.4} at n = {}",
        summary.semiprimes,
        summary.aggregate_fraction_bad,
        summary.max_fraction_bad,
        summary.max_fraction_bad_n
    );
    println!("every n at most 1/2: {}", summary.bound_ok);
    Ok(())
}

fn main() -> shorsim::Result<()> {
    let limit = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1_000);
    census_below(limit)
}
