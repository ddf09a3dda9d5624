//! How often the gap condition `h > max spacing` holds for uniform designs
//! as the bandwidth shrinks towards `ln(n) / n`.

use additive_backfit::simulate::{ComponentFn, Design};
use additive_backfit::{run_monte_carlo, BandwidthRule, Kernel, MonteCarloConfig, SimSpec, SpectralMethod};

fn main() -> additive_backfit::Result<()> {
    let n = 200;
    let rules = [
        BandwidthRule::Rate { delta: 0.2, multiplier: 1.0, scale_by_sd: false },
        BandwidthRule::LogRate { multiplier: 3.0 },
        BandwidthRule::LogRate { multiplier: 1.5 },
        BandwidthRule::LogRate { multiplier: 1.0 },
    ];
    for rule in rules {
        let cfg = MonteCarloConfig {
            spec: SimSpec {
                n,
                alpha: 0.0,
                m1: ComponentFn::Sine,
                m2: ComponentFn::Square,
                design: Design::unit_square(),
                noise_sd: 0.5,
                seed: 11,
            },
            kernel: Kernel::Epanechnikov,
            bandwidth_u: rule.clone(),
            bandwidth_v: rule,
            replicates: 400,
            certify: false,
            method: SpectralMethod::Dense,
        };
        println!("{}", run_monte_carlo(&cfg)?);
    }
    Ok(())
}
