//! The three reference pictures on [0, 3] with six pieces and α(x) = x/8:
//! sin(3πx) * exp(x), 0 * sin(3πx) and sin(3πx) * 0. Writes
//! figure{1,2,3}.csv plus JSON sidecars into the directory given as the
//! first argument (default `figures`).
//!
//!     cargo run --example figure_convolutions -- out/

use std::path::PathBuf;

use fracconv::cli::cmd_figure;
use fracconv::function::DEFAULT_RESOLUTION;

fn main() -> fracconv::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(|| PathBuf::from("figures"), PathBuf::from);
    std::fs::create_dir_all(&dir)?;
    let out = cmd_figure(&dir, DEFAULT_RESOLUTION, None)?;
    println!("{}", out.summary);
    for f in out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
