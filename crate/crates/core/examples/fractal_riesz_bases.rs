//! Gram spectra of a convolved orthonormal trigonometric family against the
//! envelopes (Λ/(1+Λ))², (Λ/(1-Λ))² for 0*f and 1/(1+Λ)², 1/(1-Λ)² for f*0.
//!
//!     cargo run --release --example fractal_riesz_bases

use fracconv::cli::FAMILY_RESOLUTION;
use fracconv::frames::{convolve_family, riesz_bounds, trig_basis, Side, SpectralEnvelope};
use fracconv::{FineGrid, Partition, RbOperator, ScaleVector};

fn main() -> fracconv::Result<()> {
    let grid = FineGrid::new(Partition::uniform(0.0, 1.0, 4)?, FAMILY_RESOLUTION)?;
    let fam = trig_basis(16, &grid)?;
    for side in [Side::LeftNull, Side::RightNull, Side::Difference] {
        for lambda in [0.2, 0.3, 0.45] {
            let op = RbOperator::new(grid.clone(), ScaleVector::constant(lambda, &grid)?)?;
            let rb = riesz_bounds(&convolve_family(&fam, side, &op, None)?)?;
            let env = SpectralEnvelope::for_side(side, lambda, true);
            println!(
                "{side:<11?} Λ = {lambda:<4} spectrum [{:.4}, {:.4}]  envelope [{}, {:.4}]",
                rb.lambda_min,
                rb.lambda_max,
                env.lower.map_or("-".into(), |l| format!("{l:.4}")),
                env.upper
            );
        }
    }
    Ok(())
}
