//! Resolvent of an exponential kernel against its closed form
//! `Psi(t) = alpha mu beta exp(-beta (1 - alpha mu) t)`, and of a box kernel.

use hawkes_clt::kernels::{default_resolvent_horizon, resolvent, DEFAULT_RESOLVENT_STEP};
use hawkes_clt::Kernel;

fn main() -> hawkes_clt::Result<()> {
    let (beta, mu, alpha) = (1.0, 0.5, 1.0);
    let k = Kernel::exponential(beta, mu)?;
    let psi = resolvent(
        &k,
        alpha,
        DEFAULT_RESOLVENT_STEP,
        default_resolvent_horizon(&k, alpha),
    )?;
    println!(
        "exponential kernel, horizon {:.2}, {} nodes",
        psi.horizon(),
        psi.values().len()
    );
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let exact = alpha * mu * beta * (-beta * (1.0 - alpha * mu) * t).exp();
        println!(
            "  Psi({t:>4}) = {:.8}   closed form {exact:.8}",
            psi.eval(t)
        );
    }
    println!(
        "  mass {:.6} (exact {})",
        psi.total_mass(),
        alpha * mu / (1.0 - alpha * mu)
    );

    let b = Kernel::boxcar(1.0, 0.6)?;
    let psi = resolvent(
        &b,
        1.0,
        DEFAULT_RESOLVENT_STEP,
        default_resolvent_horizon(&b, 1.0),
    )?;
    println!(
        "box kernel: mass {:.6} (exact {}), renewal residual {:.2e}",
        psi.total_mass(),
        0.6 / 0.4,
        psi.renewal_residual(&b)
    );
    Ok(())
}
