//! Fractal interpolation of data on [0, 3]: seed and base both pass through
//! the data, so the attractor does too, whatever the scale functions.
//!
//!     cargo run --example interpolation

use std::sync::Arc;

use fracconv::analysis::interpolant;
use fracconv::{FineGrid, Partition, RbOperator, ScaleVector};

fn main() -> fracconv::Result<()> {
    let data: Vec<(f64, f64)> =
        [0.5, -1.0, 2.0, 0.25, 1.25, -0.75, 1.0].iter().enumerate().map(|(n, &y)| (n as f64 * 0.5, y)).collect();
    let partition = Partition::new(data.iter().map(|d| d.0).collect())?;
    let grid: Arc<FineGrid> = FineGrid::new(partition, 128)?;
    let f = interpolant(&grid, &data, &[0.4, -0.2, 0.1, 0.3, -0.5, 0.2])?;
    let b = interpolant(&grid, &data, &[0.0; 6])?;

    for lambda in [0.2, 0.45, 0.7] {
        let signs = [lambda, -lambda, lambda, lambda, -lambda, lambda];
        let op = RbOperator::new(grid.clone(), ScaleVector::constants(&signs, &grid)?)?;
        let g = op.convolve(&f, &b)?.samples;
        let nodes = op.node_values(&f, &b)?;
        let worst = (0..data.len()).map(|j| (g.at_node(j) - data[j].1).abs().max((nodes[j] - data[j].1).abs())).fold(0.0, f64::max);
        let jump = g.values().windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        println!("Λ = {lambda:<4}  max node deviation {worst:.1e}  largest adjacent jump {jump:.4}");
    }
    Ok(())
}
