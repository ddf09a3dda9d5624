//! Weight rows, smoother matrices and their centered forms for a handful of
//! points, under a constant and a nearest-neighbour bandwidth.

use additive_backfit::spectral::chain_structure;
use additive_backfit::{build_smoother, center, spectral_radius, weight_row, BandwidthSpec, Kernel, SpectralMethod};

fn main() -> additive_backfit::Result<()> {
    let x = [0.05, 0.2, 0.22, 0.5, 0.7];
    println!("uniform weights at x[0], h = 0.2: {:?}", weight_row(Kernel::Uniform, &x, 0, 0.2)?);

    for (label, bw) in [("h = 0.3", BandwidthSpec::Constant(0.3)), ("2-NN", BandwidthSpec::KNearest(2))] {
        println!("\nEpanechnikov, {label}: bandwidths {:.3?}", bw.realize(&x)?);
        let s = build_smoother(&x, Kernel::Epanechnikov, &bw)?;
        println!("S ={s:.3}");
        let chain = chain_structure(&s)?;
        println!(
            "irreducible {}, period {:?}, regular {}",
            chain.irreducible,
            chain.period,
            chain.is_regular()
        );
        let radius = spectral_radius(&center(&s), SpectralMethod::Dense)?;
        println!("rho(S*) = {:.6}", radius.value);
    }
    Ok(())
}
