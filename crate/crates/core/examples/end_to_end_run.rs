// Simulated factoring runs: a single measurement, then the retry policy.
//
// Run with `cargo run --example end_to_end_run`.

use shorsim::pipeline::{run_once, run_with_retries, Classification, RetryPolicy};

pub fn run_example() -> shorsim::Result<()> {
    let once = run_once(21, 10, None, 7)?;
    println!("single draw: c = {:?}, {:?}", once.c, once.classification);

    let outcome = run_with_retries(21, 10, None, RetryPolicy::default(), 7)?;
    println!(
        "with retries: {:?} {:?}",
        outcome.classification, outcome.factors
    );
    for event in &outcome.retries {
        println!("  {event:?}");
    }

    // a base sharing a factor with n needs no quantum step at all
    let shortcut = run_once(21, 7, None, 0)?;
    println!(
        "x = 7: {:?} {:?}",
        shortcut.classification, shortcut.factors
    );

    let successes = (0..200)
        .filter_map(|seed| run_with_retries(35, 3, None, RetryPolicy::default(), seed).ok())
        .filter(|o| o.classification == Classification::Success)
        .count();
    println!("n = 35, x = 3: {successes} of 200 seeds succeed");
    println!("{}", outcome.to_json());
    Ok(())
}

fn main() -> shorsim::Result<()> {
    run_example()
}
