//! Two ways to reach the same attractor: iterate the operator to its fixed
//! point on the fine grid, or pull every point back along its address and
//! push the seed values forward again. The gap shrinks like Λ^depth.
//!
//!     cargo run --example cross_method

use fracconv::cli::RunConfig;

fn main() -> fracconv::Result<()> {
    let cfg = RunConfig::figure(1, 256)?;
    let conv_cfg = cfg.convolution()?;
    let fixed = conv_cfg.fixed_point()?.samples;
    let xs = fixed.grid().points().to_vec();
    let lambda = conv_cfg.lambda();
    let gap = conv_cfg.seed().sup_distance(conv_cfg.base())?;

    println!("depth  max deviation  bound");
    for depth in [2, 4, 6, 8, 10, 12] {
        let pushed = conv_cfg.pushforward_at(&xs, depth)?;
        let dev = fixed.values().iter().zip(&pushed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let bound = cfg.tol + lambda.powi(depth as i32) / (1.0 - lambda) * gap;
        println!("{depth:>5}  {dev:>13.3e}  {bound:.3e}");
    }
    Ok(())
}
