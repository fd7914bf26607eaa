//! Randomized numerical linear algebra: sketching operators and the solvers
//! built on them (least squares, truncated SVD, SPSD and CUR approximation),
//! plus the kernel applications that use them.

pub mod apps;
pub mod cur;
pub mod error;
pub mod kernel;
pub mod kmeans;
pub mod ksvd;
pub mod linalg;
pub mod matrix;
pub mod regression;
pub mod rng;
pub mod sketch;
pub mod spsd;
pub mod synth;

pub use error::{Error, Result, Warning};
pub use linalg::{QrFactors, SvdFactors};
pub use matrix::DenseMatrix;
pub use sketch::{SketchKind, SketchSpec};
