// Exact distribution of the measured state for one instance, built three
// ways and compared.
//
// Run with `cargo run --example output_distribution`.

use shorsim::distribution::{
    oracle_distribution, per_k_distribution, two_term_distribution, OrderInfo, ProblemInstance,
};

pub fn run_example() -> shorsim::Result<()> {
    let inst = ProblemInstance::with_register(15, 2, 8)?;
    let ord = OrderInfo::for_instance(&inst)?;
    println!(
        "n = {}, x = {}, N = {}, r = {}",
        inst.n(),
        inst.x(),
        inst.states(),
        ord.r
    );

    let oracle = oracle_distribution(&inst)?;
    let per_k = per_k_distribution(&inst, &ord)?;
    let two_term = two_term_distribution(&inst, &ord)?;

    let gap = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    };
    println!(
        "per-k vs oracle:    {:.2e}",
        gap(per_k.probabilities(), oracle.probabilities())
    );
    println!(
        "two-term vs per-k:  {:.2e}",
        gap(two_term.probabilities(), per_k.probabilities())
    );
    println!("total mass:         {:.12}", two_term.total());

    // r = 4 divides N = 256, so all mass sits on the four peaks
    for c in two_term.states_by_mass().into_iter().take(4) {
        println!("P({c:3}) = {:.6}", two_term.prob(c));
    }
    Ok(())
}

fn main() -> shorsim::Result<()> {
    run_example()
}
