//! Tensor-train approximations of probability densities sampled on regular
//! grids.
//!
//! The crate covers the full pipeline used to study low-rank density
//! representations: product grids and sampling ([`grids`]), closed-form test
//! densities ([`densities`]), truncated SVD and cross matrix factorizations
//! ([`matdecomp`]), tensor trains ([`tt`]), exact functional trains of
//! quadratic forms ([`quadratic`]), decorrelating grid transforms
//! ([`gridtransform`]) and a reproducible experiment harness
//! ([`experiments`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod error;
pub mod experiments;
pub mod grids;
pub mod gridtransform;
pub mod linalg;
pub mod matdecomp;
pub mod quadratic;
pub mod tt;

pub use error::{Error, Result};
pub use grids::{DenseTensor, Grid, MomentEstimate};
pub use linalg::Matrix;
pub use tt::TensorTrain;
