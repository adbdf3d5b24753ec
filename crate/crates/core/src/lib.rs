//! Fractal convolution `f *_T b` of real functions on a compact interval.
//!
//! The convolution is the fixed point of a Read–Bajraktarević operator built
//! from a seed `f`, a base `b`, a partition of the interval and scale
//! functions `alpha_k` with `sup |alpha_k| = lambda < 1`. This crate
//! computes it on a fine grid, evaluates it pointwise by push-forward, and
//! checks its norm bounds, convolution-set distances and the Bessel, Riesz
//! and frame bounds of convolved families.

pub mod error;
pub mod expr;
pub mod function;
pub mod partition;
pub mod engine;
pub mod metrics;
pub mod frames;
pub mod analysis;
pub mod io;
pub mod cli;

pub use engine::{ConvolutionConfig, Convolution, IterationLog, RbOperator};
pub use error::{Error, Result};
pub use expr::Expression;
pub use function::{FineGrid, GridFunction, RealFn, ScaleVector, SharedFn};
pub use metrics::{FunctionSet, NormSpec};
pub use partition::{AffineMaps, Partition};
