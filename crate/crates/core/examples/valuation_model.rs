// Monte Carlo of the model where the 2-adic valuations of the two per-prime
// orders are independent and geometric.
//
// Run with `cargo run --release --example valuation_model`.

use shorsim::experiments::valuation_model_mc;

pub fn run_example() -> shorsim::Result<()> {
    let m = valuation_model_mc(200_000, 42)?;
    println!(
        "both orders odd:      {:.4}  (model 0.25)",
        m.both_odd_estimate
    );
    println!(
        "equal valuations > 0: {:.4}  (model {:.4})",
        m.estimate,
        1.0 / 12.0
    );
    println!(
        "either failure:       {:.4}  (model {:.4})",
        m.bad_estimate,
        1.0 / 3.0
    );
    Ok(())
}

fn main() -> shorsim::Result<()> {
    run_example()
}
