//! Empirical W1 distance of the normalised innovation to N(0, 1) next to
//! the smallest applicable bound, for each preset.
//! Usage: `bound_vs_empirical [PRESET] [REPS]`.

use hawkes_clt::experiments::{preset, run_bound_vs_empirical, PRESET_NAMES};

fn main() -> hawkes_clt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let names: Vec<&str> = match args.first() {
        Some(n) => vec![n.as_str()],
        None => PRESET_NAMES
            .iter()
            .copied()
            .filter(|n| *n != "poisson_ci")
            .collect(),
    };
    let reps = args.get(1).and_then(|r| r.parse().ok()).unwrap_or(2000);
    for name in names {
        let c = run_bound_vs_empirical(&preset(name)?, reps, 1)?;
        println!(
            "{name:<15} W1 {:.4} (SE {:.4})  bound {:.4}   approx W1 {:.4}  bound {:.4}  {}",
            c.delta.w1,
            c.delta.w1_se,
            c.min_bound_delta,
            c.delta_a.w1,
            c.min_bound_delta_a,
            if c.pass { "ok" } else { "EXCEEDED" }
        );
        if let Some(r) = &c.resolvent_bound {
            println!(
                "{:<15} resolvent bound {:.4} (Monte Carlo SE {:.4})",
                "",
                r.total,
                r.mc_se.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
