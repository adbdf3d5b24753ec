//! Convolving sets of seeds with sets of bases and comparing the results
//! in the Hausdorff distance.
//!
//!     cargo run --release --example convolution_sets

use fracconv::analysis::{convolve_sets, random_function, TrialConfig};
use fracconv::metrics::{hausdorff, FunctionSet};
use fracconv::{NormSpec, RbOperator, ScaleVector};

fn main() -> fracconv::Result<()> {
    let tc = TrialConfig::default();
    let grid = tc.grid()?;
    let mut rng = tc.rng(99, 0, 0);
    let mut set = |n: usize| -> fracconv::Result<FunctionSet> {
        FunctionSet::new((0..n).map(|_| random_function(&mut rng, &grid, 6)).collect::<fracconv::Result<_>>()?)
    };
    let (seeds, seeds2, bases) = (set(4)?, set(4)?, set(3)?);
    let spec = NormSpec::Norm(2.0);

    for lambda in [0.1, 0.3, 0.49] {
        let op = RbOperator::new(grid.clone(), ScaleVector::constant(lambda, &grid)?)?;
        let a = convolve_sets(&op, &seeds, &bases)?;
        let c = convolve_sets(&op, &seeds2, &bases)?;
        let lhs = hausdorff(&a, &c, &spec)?;
        let rhs = hausdorff(&seeds, &seeds2, &spec)? / (1.0 - lambda);
        println!("Λ = {lambda:<4} h(F*B, F'*B) = {lhs:.4}  <=  h(F, F')/(1-Λ) = {rhs:.4}  ({} members)", a.len());
    }
    Ok(())
}
