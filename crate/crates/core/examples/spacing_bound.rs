//! Analytic bounds on `P(max spacing >= h)` for `n` uniforms against a
//! simulated frequency.

use additive_backfit::gap_exceedance_bound;
use additive_backfit::simulate::gap_exceedance_frequency;

fn main() -> additive_backfit::Result<()> {
    println!("{:>6} {:>8} {:>11} {:>11} {:>11} {:>9}", "n", "h", "exact", "exponential", "simulated", "se");
    for n in [50, 100, 400, 1000] {
        let nf = n as f64;
        for c in [1.0, 2.0, 3.0] {
            let h = c * nf.ln() / nf;
            let b = gap_exceedance_bound(n, h)?;
            let est = gap_exceedance_frequency(n, h, 20_000, 3)?;
            println!(
                "{n:>6} {h:>8.4} {:>11.3e} {:>11.3e} {:>11.3e} {:>9.1e}",
                b.exact, b.exponential, est.frequency, est.standard_error
            );
        }
    }
    Ok(())
}
