// Continued-fraction recovery of the order from states near each peak.
//
// Run with `cargo run --example order_recovery`.

use shorsim::distribution::{peaks, OrderInfo, ProblemInstance};
use shorsim::number_theory::continued_fraction;
use shorsim::pipeline::{order_recovery_guarantee, recover_order};
use shorsim::Fraction;

pub fn run_example() -> shorsim::Result<()> {
    let inst = ProblemInstance::new(21, 10)?;
    let ord = OrderInfo::for_instance(&inst)?;
    println!("n = 21, x = 10, N = {}, true r = {}", inst.states(), ord.r);

    for peak in peaks(&inst, &ord).into_iter().skip(1) {
        for c in [peak.c_nu, peak.c_nu + 1] {
            let rec = recover_order(c, &inst)?;
            let expansion = continued_fraction(Fraction::new(inst.states(), c)?);
            println!(
                "nu = {} c = {:3}  N/c = {:?}  -> {:?} verified = {}",
                peak.nu,
                c,
                expansion.partial_quotients,
                rec.recovered.map(|f| f.to_string()),
                rec.verified
            );
        }
    }

    let report = order_recovery_guarantee(&inst)?;
    println!(
        "largest offset {:.3e} vs margin {:.3e}: guaranteed = {}",
        report.max_offset, report.delta_min, report.offsets_below_delta_min
    );
    Ok(())
}

fn main() -> shorsim::Result<()> {
    run_example()
}
