//! The Poisson-embedding recursion settles on a path distributed like the
//! thinning output; compare event counts with a two-sample KS test.

use hawkes_clt::simulator::{embedding_simulate, simulate, SimConfig};
use hawkes_clt::stats::ks_two_sample;
use hawkes_clt::{HawkesParams, Kernel, LinkFunction};

fn main() -> hawkes_clt::Result<()> {
    let params = HawkesParams::new(
        Kernel::exponential(1.0, 0.5)?,
        LinkFunction::saturating_exp(1.0, 3.0)?,
    )?;
    let thin = SimConfig::new(params.clone(), 20.0, 0.0, 1)?;
    let emb = SimConfig::new(params, 20.0, 0.0, 2)?;

    let iterates = embedding_simulate(&emb, 12, 3.0)?;
    let sizes: Vec<usize> = iterates.iter().map(|s| s.len()).collect();
    println!("one field, iterate sizes: {sizes:?}");

    let reps = 1000;
    let mut a = Vec::with_capacity(reps);
    let mut b = Vec::with_capacity(reps);
    for rep in 0..reps as u64 {
        a.push(simulate(&thin.with_replication(rep))?.0.len() as f64);
        let it = embedding_simulate(&emb.with_replication(rep), 80, 3.0)?;
        b.push(it[it.len() - 1].len() as f64);
    }
    let (d, p) = ks_two_sample(&a, &b)?;
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    println!(
        "mean count: thinning {:.3}, embedding {:.3}; KS D = {d:.4}, p = {p:.3}",
        mean(&a),
        mean(&b)
    );
    Ok(())
}
