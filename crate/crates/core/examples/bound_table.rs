//! Every applicable bound, term by term, for a linear and a nonlinear process.

use hawkes_clt::bounds::{applicable_bounds, compare_conditions, DEFAULT_VACUITY_THRESHOLD};
use hawkes_clt::model::normalized_indicator;
use hawkes_clt::{HawkesParams, Kernel, LinkFunction};

fn main() -> hawkes_clt::Result<()> {
    let u = normalized_indicator(1.0, 0.1, 100.0)?;
    for (title, link) in [
        ("linear link", LinkFunction::linear(1.0)?),
        ("saturating link", LinkFunction::saturating_exp(1.0, 3.0)?),
    ] {
        let p = HawkesParams::new(Kernel::exponential(1.0, 0.1)?, link)?;
        println!("== {title}");
        let (reports, skipped) = applicable_bounds(&p, &u)?;
        for r in &reports {
            print!("{}", r.table());
            if r.is_vacuous(DEFAULT_VACUITY_THRESHOLD) {
                println!("  (exceeds {DEFAULT_VACUITY_THRESHOLD}: guaranteed but uninformative)");
            }
        }
        for s in skipped {
            println!("{} skipped: {}", s.name, s.reason);
        }
    }
    let c = compare_conditions(1.0, &Kernel::exponential(1.0, 0.1)?, &u)?;
    println!(
        "comparison conditions: first {}, second {}",
        c.cond_i, c.cond_ii
    );
    Ok(())
}
