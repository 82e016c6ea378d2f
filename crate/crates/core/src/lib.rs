//! Exact-arithmetic coquasi-bialgebras with preantipodes.
//!
//! The crate represents finite-dimensional coquasi-bialgebras, quasi-bialgebras
//! and their (co)module categories by structure constants over Q or F_p,
//! decides and computes preantipodes by exact linear solving, reconstructs the
//! coendomorphism coquasi-bialgebra (with preantipode) of a finite rigid
//! monoidal diagram, and builds finite duals — verifying every identity
//! mechanically, with zero tolerance.
//!
//! Module map:
//! - [`exactla`]: dense exact matrices, RREF solving, quotients, tensor slots
//! - [`coalg`]: coalgebras, algebras, convolution
//! - [`cqb`]: coquasi-bialgebras, preantipodes, coquasi-Hopf data
//! - [`comodcat`]: left comodules, ω-associators, rigid duals
//! - [`recon`]: Tannaka reconstruction from monoidal diagrams
//! - [`qb`]: quasi-bialgebras, the p/q calculus, module duals, finite duals
//! - [`zoo`]: twisted group-algebra example generators

pub mod coalg;
pub mod comodcat;
pub mod cqb;
mod error;
pub mod exactla;
pub mod qb;
pub mod recon;
pub mod report;
pub mod zoo;

pub use error::Error;
