//! Gaussian confidence intervals from a bound: feasible for a long Poisson
//! window, infeasible for a short one.

use hawkes_clt::experiments::{preset, run_confidence_interval};
use hawkes_clt::stats::{confidence_interval, CiOutcome};

fn main() -> hawkes_clt::Result<()> {
    for bound in [0.0025, 0.01, 0.5] {
        match confidence_interval(bound, 0.2)? {
            CiOutcome::Feasible {
                lower,
                upper,
                coverage_floor,
            } => {
                println!("bound {bound}: ({lower:.4}, {upper:.4}] covers with probability >= {coverage_floor}")
            }
            CiOutcome::Infeasible { min_beta } => {
                println!("bound {bound}: infeasible, needs beta >= {min_beta:.4}")
            }
        }
    }
    let s = preset("poisson_ci")?;
    let r = run_confidence_interval(&s, 0.2, 500, 1)?;
    if let Some((p, se)) = r.coverage {
        println!(
            "{}: bound {:.4}, empirical coverage {p:.3} (SE {se:.3}) over {} runs",
            r.scenario, r.bound, r.reps
        );
    }
    Ok(())
}
