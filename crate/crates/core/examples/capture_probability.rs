// How often the measurement lands on `c_nu` or `c_nu + 1`: averaged over a
// uniform displacement, and for concrete instances.
//
// Run with `cargo run --example capture_probability`.

use shorsim::distribution::{capture_probability_d01, deviation_mass};
use shorsim::experiments::capture_rate_empirical;

pub fn run_example() -> shorsim::Result<()> {
    println!("uniform average: {:.6}", capture_probability_d01());
    for d in -2..=3 {
        println!("  mass at d = {d:2}: {:.6}", deviation_mass(d));
    }
    for (n, x) in [(21, 10), (35, 3), (55, 2)] {
        let qa = shorsim::distribution::default_register_qubits(n);
        let rate = capture_rate_empirical(n, x, qa, 20_000, 1)?;
        println!(
            "n = {n}, x = {x}, r = {}: exact {:.4}, sampled {:.4}",
            rate.r, rate.exact, rate.sampled
        );
    }
    Ok(())
}

fn main() -> shorsim::Result<()> {
    run_example()
}
