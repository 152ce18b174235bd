//! With no self-excitation the process is Poisson: counts on (0, T] have
//! mean and variance `nu T`.

use hawkes_clt::simulator::{simulate, SimConfig};
use hawkes_clt::{HawkesParams, Kernel, LinkFunction};

fn main() -> hawkes_clt::Result<()> {
    let (nu, horizon, reps) = (1.0, 1000.0, 2000u64);
    let params = HawkesParams::new(Kernel::exponential(1.0, 0.0)?, LinkFunction::linear(nu)?)?;
    let cfg = SimConfig::new(params, horizon, 0.0, 1)?;
    let mut counts = Vec::with_capacity(reps as usize);
    for rep in 0..reps {
        counts.push(simulate(&cfg.with_replication(rep))?.0.len() as f64);
    }
    let n = reps as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    println!(
        "{reps} runs on (0, {horizon}]: mean count {mean:.2}, variance {var:.2}, ratio {:.3}",
        var / mean
    );
    println!("expected mean = variance = {}", nu * horizon);
    Ok(())
}
