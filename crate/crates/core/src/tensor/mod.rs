//! Dense numerical primitives shared by every network in the crate.
//!
//! Everything is 64-bit. Matrices are row-major; products go through
//! `matrixmultiply`'s single-threaded kernels so results are reproducible
//! bit for bit on a given machine.

mod adam;
mod matrix;
mod rng;

pub use adam::{adam_step, AdamState};
pub use matrix::{gemm, matmul, Matrix, Transpose};
pub use rng::Rng;

/// Anything that owns an ordered list of trainable matrices.
///
/// The order returned by `named_params` and `params_mut` must agree; it is
/// what ties optimizer moments, target networks and checkpoint entries to
/// the right parameter.
pub trait ParamSet {
    fn named_params(&self) -> Vec<(String, &Matrix)>;
    fn params_mut(&mut self) -> Vec<&mut Matrix>;

    fn params(&self) -> Vec<&Matrix> {
        self.named_params().into_iter().map(|(_, m)| m).collect()
    }
}
