//! Repeatedly convolving 0 with the previous result, b -> 0*b -> 0*(0*b),
//! shrinks by Λ/(1-Λ) per step; with α ≡ 1/4 that is (1/3)^k.
//!
//!     cargo run --example null_iteration

use fracconv::{FineGrid, GridFunction, NormSpec, Partition, RbOperator, ScaleVector};

fn main() -> fracconv::Result<()> {
    let grid = FineGrid::new(Partition::uniform(0.0, 1.0, 4)?, 128)?;
    let op = RbOperator::new(grid.clone(), ScaleVector::constant(0.25, &grid)?)?;
    let b = GridFunction::from_fn(&grid, |x| (5.0 * x).sin() + x * x)?;
    let iterates = op.iterate_left_null(&b, 20)?;
    let n0 = NormSpec::Sup.size(&b);
    println!(" k   sup ratio      (1/3)^k");
    for (k, g) in iterates.iter().enumerate().step_by(2) {
        println!("{k:>2}   {:.4e}   {:.4e}", NormSpec::Sup.size(g) / n0, (1.0f64 / 3.0).powi(k as i32));
    }
    Ok(())
}
