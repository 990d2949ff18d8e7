pub mod combined;
pub mod error;
pub mod grid;
pub mod harness;
pub mod init;
pub mod matrix;
pub mod metrics;
pub mod separated;
pub mod tv;

pub use error::{Error, Result};
pub use grid::GridGeometry;
pub use matrix::{DenseMatrix, ProjectionBounds};
