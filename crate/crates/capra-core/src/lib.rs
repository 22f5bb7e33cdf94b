//! Convex-analysis toolkit for the l0 pseudonorm.
//!
//! Starting from any lp source norm on R^d, this crate builds the
//! machinery that makes l0 tractable through duality:
//!
//! - [`norms`]: coordinate-k norms and their duals (top-(k,q) norms),
//!   restriction and K-star norms, and a sparsity detector based on the
//!   graded behaviour of the coordinate-k norm sequence;
//! - [`capra`]: the constant-along-primal-rays (Capra) coupling together
//!   with conjugates, biconjugates and subdifferentials of functions of
//!   l0, each computed by two independent routes;
//! - [`bounds`]: phi-norms built by inf-convolution of scaled
//!   coordinate-k norms, and the resulting norm-ratio lower bounds on l0;
//! - [`oracle`]: brute-force reference implementations (subset
//!   enumeration, grid Legendre transforms, sampled atomic gauges) used
//!   to certify every closed form;
//! - [`solver`]: the shared nonsmooth optimization machinery (support
//!   functions over gauge balls, concave ascent, decomposition programs).
//!
//! Extended-real arithmetic with the Moreau lower/upper additions lives
//! in [`extreal`]; all conjugacy logic goes through it rather than IEEE
//! infinities so that `(+inf) + (-inf)` never silently becomes NaN.

pub mod bounds;
pub mod capra;
pub mod checks;
pub mod cli;
pub mod error;
pub mod extreal;
pub mod l0core;
pub mod norms;
pub mod oracle;
pub mod solver;

pub use error::CapraError;
pub use extreal::ExtReal;
pub use norms::SourceNorm;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, CapraError>;
