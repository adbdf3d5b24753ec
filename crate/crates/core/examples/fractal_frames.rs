//! Frame perturbation with shrinking scales Λ_m = c/m: the sum
//! R = Σ ||f_m*0 - f_m||² decides whether the perturbed family keeps a
//! lower frame bound A' = (√A - √R)².
//!
//!     cargo run --release --example fractal_frames

use fracconv::cli::FAMILY_RESOLUTION;
use fracconv::frames::{frame_perturbation_bounds, lambda_schedule, perturbation_r, trig_basis, ScheduleKind};
use fracconv::{FineGrid, Partition, RbOperator, ScaleVector};

fn main() -> fracconv::Result<()> {
    let grid = FineGrid::new(Partition::uniform(0.0, 1.0, 4)?, FAMILY_RESOLUTION)?;
    let fam = trig_basis(64, &grid)?;
    let template = RbOperator::new(grid.clone(), ScaleVector::constant(0.0, &grid)?)?;
    println!("   c       R     empirical     A'      B'   feasible");
    for c in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let schedule = lambda_schedule(ScheduleKind::OverM(c), fam.len())?;
        let pert = perturbation_r(&fam, &schedule, &template)?;
        let fr = frame_perturbation_bounds(1.0, 1.0, pert.r)?;
        println!("{c:>5.2} {:>8.4} {:>12.4} {:>7.4} {:>7.4}   {}", fr.r, pert.empirical, fr.a_prime, fr.b_prime, fr.feasible);
    }
    Ok(())
}
