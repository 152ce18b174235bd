//! Bounds along the two epsilon families and their log-log slopes.
//! Pass `--simulate` to add empirical W1 distances (1000 runs per point).

use hawkes_clt::experiments::{loglog_slope, run_rate_sweep, sweep_bounds, Family};

fn main() -> hawkes_clt::Result<()> {
    let simulate = std::env::args().any(|a| a == "--simulate");
    let coarse = [0.2, 0.1, 0.05, 0.025];
    let fine: Vec<f64> = (0..8).map(|i| 1e-2 / 2f64.powi(i)).collect();
    for family in [
        Family::Nonlinear {
            nu: 1.0,
            alpha: 1.0,
        },
        Family::Linear { nu: 1.0 },
    ] {
        println!("== {}", family.name());
        for grid in [&coarse[..], &fine[..]] {
            let rows = sweep_bounds(family, grid)?;
            let first = &rows[0].1;
            for (j, b) in first.iter().enumerate() {
                let y: Vec<f64> = rows.iter().map(|r| r.1[j].total).collect();
                println!(
                    "  {:<24} eps {:.2e}..{:.2e}: {:.4} -> {:.4}, slope {:.3}",
                    b.name,
                    grid[0],
                    grid[grid.len() - 1],
                    y[0],
                    y[y.len() - 1],
                    loglog_slope(grid, &y)
                );
            }
        }
        if simulate {
            let sweep = run_rate_sweep(family, &coarse, 1000, 1)?;
            for r in &sweep.rows {
                println!(
                    "  eps {:<6} W1 {:.4} (SE {:.4})",
                    r.eps, r.delta.w1, r.delta.w1_se
                );
            }
        }
    }
    Ok(())
}
