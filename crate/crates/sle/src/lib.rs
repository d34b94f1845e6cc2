//! Chordal SLE trace computation in the upper half plane.
//!
//! A trace sample on `[0, 1]` is built from `N` elementary conformal slit
//! maps, one per time step. The `k`-th trace point is the nested composition
//! `z_k = h_1(h_2(...h_k(0)...))`, so computing `N/d` points the obvious way
//! costs `O(N^2/d)` map evaluations. The block evaluator cuts this down by
//! grouping consecutive maps into blocks, replacing each block by the
//! truncated power series of `z -> 1/H(1/z)` (exact far from the block's
//! cut), and falling back to direct composition only near it.
//!
//! Modules, bottom up:
//!
//! * [`rng`] - fixed-algorithm PRNG and Gaussian sampling, so runs are
//!   reproducible byte for byte from a seed.
//! * [`driving`] - time partitions and Brownian driving increments.
//! * [`slitmap`] - the two elementary map families (tilted and vertical
//!   slits) and their real-axis branches.
//! * [`hatseries`] - truncated series of `1/h(1/z)` and their composition.
//! * [`blocks`] - grouping maps into blocks: series, convergence radius,
//!   threshold-switched evaluation.
//! * [`trace`] - end-to-end trace computation, baseline and block-accelerated.
//! * [`bench`] - timing and error sweeps over the algorithm parameters.

pub mod bench;
pub mod blocks;
pub mod driving;
mod error;
pub mod hatseries;
pub mod rng;
pub mod slitmap;
pub mod trace;

pub use error::{Error, Result};
