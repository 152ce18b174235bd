//! Long-run event rate against the stationary intensity `nu / (1 - mu)`
//! (linear link) and the bracket `[phi(0), phi(0) / (1 - alpha mu)]` (nonlinear).

use hawkes_clt::bounds::intensity_bracket;
use hawkes_clt::simulator::estimate_rate;
use hawkes_clt::{HawkesParams, Kernel, LinkFunction};

fn main() -> hawkes_clt::Result<()> {
    let linear = HawkesParams::new(Kernel::exponential(2.0, 0.5)?, LinkFunction::linear(1.0)?)?;
    let rate = estimate_rate(&linear, 1e4, 1)?;
    println!(
        "linear, nu = 1, mu = 0.5:  rate {rate:.4}, stationary intensity {:.4}",
        1.0 / (1.0 - 0.5)
    );

    for (name, link) in [
        ("saturating exp", LinkFunction::saturating_exp(1.0, 4.0)?),
        ("tanh", LinkFunction::tanh(1.0, 0.8)?),
    ] {
        let p = HawkesParams::new(Kernel::boxcar(1.5, 0.5)?, link)?;
        let (lo, hi) = intensity_bracket(&p);
        let rate = estimate_rate(&p, 1e4, 2)?;
        println!("{name:<15} rate {rate:.4} in [{lo:.4}, {hi:.4}]");
    }
    Ok(())
}
