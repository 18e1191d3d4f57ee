// The n = 21, x = 10 distribution on a 256-state register with its peak
// table.
//
// Run with `cargo run --example figure_one`.

use shorsim::distribution::envelope;
use shorsim::experiments::figure1_data;

pub fn run_example() -> shorsim::Result<()> {
    let fig = figure1_data()?;
    println!(
        "r = {}, M0 = {}, k0 = {}",
        fig.order.r, fig.order.m0, fig.order.k0
    );
    println!(
        "{:>3} {:>12} {:>5} {:>8} {:>10} {:>10}",
        "nu", "sigma", "c", "delta", "P(c)", "P(c+1)"
    );
    for p in &fig.peaks {
        println!(
            "{:>3} {:>12.4} {:>5} {:>8.4} {:>10.6} {:>10.6}",
            p.nu,
            p.sigma_nu,
            p.c_nu,
            p.delta_nu,
            fig.distribution.prob(p.c_nu),
            fig.distribution.prob(p.c_nu + 1)
        );
    }
    let top = &fig.distribution.states_by_mass()[..6];
    println!("six largest states: {top:?}");
    let peak_height = envelope(&fig.instance, &fig.order, 0.0)?;
    println!("envelope maximum: {peak_height:.6}");
    Ok(())
}

fn main() -> shorsim::Result<()> {
    run_example()
}
