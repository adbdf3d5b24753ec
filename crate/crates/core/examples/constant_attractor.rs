//! The simplest attractor: f ≡ 1, b ≡ 0, α ≡ 1/2 on [0, 1] with two pieces.
//! The fixed point of g = 1 + g/2 is the constant 2.
//!
//!     cargo run --example constant_attractor

use fracconv::{FineGrid, GridFunction, Partition, RbOperator, ScaleVector};

fn main() -> fracconv::Result<()> {
    let grid = FineGrid::new(Partition::uniform(0.0, 1.0, 2)?, 64)?;
    let op = RbOperator::new(grid.clone(), ScaleVector::constant(0.5, &grid)?)?;
    let conv = op.convolve(&GridFunction::constant(&grid, 1.0), &GridFunction::zeros(&grid))?;

    println!("sweep  max |g_k+1 - g_k|");
    for (k, d) in conv.log.distances.iter().enumerate().step_by(4) {
        println!("{k:>5}  {d:.3e}");
    }
    let err = conv.samples.sup_distance(&GridFunction::constant(&grid, 2.0))?;
    println!("converged after {} sweeps, sup |g - 2| = {err:.2e}", conv.log.sweeps);
    println!("successive ratios settle at {:.3}", conv.log.ratios(1e-300).last().copied().unwrap_or(0.0));
    Ok(())
}
