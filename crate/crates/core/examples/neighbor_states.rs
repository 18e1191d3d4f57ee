// Whether measuring a state next to a peak would change the recovered
// fraction.
//
// Run with `cargo run --example neighbor_states`.

use shorsim::experiments::neighbor_state_check;

pub fn run_example() -> shorsim::Result<()> {
    for (n, x, qa) in [(21, 10, 9), (35, 3, 11), (57, 5, 12)] {
        let report = neighbor_state_check(n, x, qa)?;
        println!(
            "n = {n}, x = {x}, r = {}: {} coprime peaks, {} recovered at c_nu, {} neighbors differ, {} inside the margin",
            report.r,
            report.peaks_checked,
            report.peaks_recovered,
            report.differing.len(),
            report.unexpected
        );
        for probe in report.differing.iter().take(3) {
            println!(
                "  nu = {} d = {:2} c = {} -> {:?}",
                probe.nu,
                probe.d,
                probe.c,
                probe.recovered.map(|f| f.to_string())
            );
        }
    }
    Ok(())
}

fn main() -> shorsim::Result<()> {
    run_example()
}
