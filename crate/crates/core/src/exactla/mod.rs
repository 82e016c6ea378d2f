//! Exact linear-algebra kernel over Q and F_p.
//!
//! Matrices, Kronecker products, linear solving, nullspaces, quotient spaces
//! and tensor slot operations, with one fixed basis-ordering contract
//! (`index(e_i ⊗ f_j) = i·dim(W) + j`) used by every other module. Dense only,
//! no floating point, deterministic tie-breaking via reduced row echelon form.

mod matrix;
mod scalar;
mod solve;
pub mod tensor;

pub use matrix::{decode_index, encode_index, LinearMap};
pub use scalar::{Field, Scalar};
pub use solve::{nullspace, quotient, rref, solve_affine, Quotient, Solution, Subspace};
