//! Group-action positional encodings for attention, at desk scale.
//!
//! Two complementary mechanism families are implemented end to end:
//!
//! * **Multiplicative** rotations in SO(d) built from rank-2 skew generators
//!   with a closed-form exponential ([`rank2`], [`multiplicative`]). RoPE is
//!   the canonical-plane, log-uniform-spectrum special case.
//! * **Additive** logit biases from unipotent lifts in GL(d+1)/GL(d+2)
//!   ([`additive`]) and their path-integral generalization
//!   ([`path_integral`]). ALiBi and forget-gate (FoX-style) biases are exact
//!   special cases.
//!
//! Around the kernels sit a forward-only multi-head attention harness with a
//! streaming KV cache ([`attention`]), spectral diagnostics ([`spectral`]),
//! a small self-contained dense linear algebra layer used as the numerical
//! oracle ([`linalg`]), and benchmark plumbing ([`bench`]).

pub mod additive;
pub mod attention;
pub mod bench;
pub mod error;
pub mod linalg;
pub mod math;
pub mod multiplicative;
pub mod path_integral;
pub mod rank2;
#[cfg(feature = "single-precision")]
pub mod rank2_f32;
pub mod sampling;
pub mod spectral;
pub mod tensor_io;

pub use error::{Error, Result};
