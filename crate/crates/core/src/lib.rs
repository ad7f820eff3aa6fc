//! Kolmogorov N-width bounds for the solution manifold of the 1D wave
//! equation with jump initial data.
//!
//! The snapshots `phi_mu` are piecewise constant on space-time cones, so
//! every inner product is known in closed form and all computations run in
//! Gram coordinates. The crate provides
//!
//! * the analytic snapshots and a weak-form residual check ([`manifold`]),
//! * Gram matrices, G-orthonormal bases and projections ([`geometry`]),
//! * the packing lower bound `1/(4 sqrt N)` and numerical two-sided width
//!   estimates ([`widths`]),
//! * strong greedy bases and decay fits ([`greedy`]),
//! * sweeps over the wave family and an analytic contrast family
//!   ([`experiments`]) and the `nwidth` command line ([`cli`]).
//!
//! ```
//! use nwidth::widths::packing_lower_bound;
//! assert_eq!(packing_lower_bound(4).unwrap(), 0.125);
//! ```

pub mod cli;
mod compensated;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod greedy;
pub mod manifold;
pub mod quadrature;
pub mod widths;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{assemble_gram, GramMatrix, Subspace};
pub use manifold::{Family, HatFunction, WaveSnapshot};
pub use widths::{minimax_width, MinimaxConfig, WidthEstimate};
