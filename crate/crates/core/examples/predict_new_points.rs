//! Fit once, then evaluate the additive surface at points off the sample,
//! including one too far away for a compact kernel to reach.

use additive_backfit::simulate::{generate, ComponentFn, Design};
use additive_backfit::{backfit_direct, build_pair, predict, BandwidthSpec, Kernel, SimSpec};

fn main() -> additive_backfit::Result<()> {
    let data = generate(&SimSpec {
        n: 150,
        alpha: 2.0,
        m1: ComponentFn::Identity,
        m2: ComponentFn::Sine,
        design: Design::unit_square(),
        noise_sd: 0.1,
        seed: 5,
    })?;
    let kernel = Kernel::Epanechnikov;
    let bw = BandwidthSpec::Constant(0.15);
    let pair = build_pair(&data, kernel, &bw, &bw)?;
    let fit = backfit_direct(&pair, data.y())?;

    for (u, v) in [(0.1, 0.25), (0.5, 0.5), (0.9, 0.75), (3.0, 0.5)] {
        match predict(&data, &fit, (u, v), kernel, &bw, &bw) {
            Ok(y) => println!("y_hat({u}, {v}) = {y:.4}"),
            Err(e) => println!("y_hat({u}, {v}): {e}"),
        }
    }
    Ok(())
}
