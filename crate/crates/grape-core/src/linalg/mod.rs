//! Self-contained dense linear algebra for desk-scale matrices: the crate
//! deliberately carries its own exponential, eigensolver, and SVD so the
//! closed-form kernels can be checked against an independent numerical route
//! without external solver dependencies.

mod eig;
mod expm;
mod matrix;
mod qr;
mod svd;

pub use eig::{eigenvalues, sort_canonical, spectrum_distance};
pub use expm::expm;
pub use matrix::Mat;
pub use qr::orthonormal_columns;
pub use svd::singular_values;
