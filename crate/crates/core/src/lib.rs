//! SL(2,C) representations of the figure-eight knot group and the
//! Reidemeister torsion of the closed manifolds obtained by Dehn surgery
//! on it, with chain-complex and Fox-calculus cross-checks.

pub mod chain;
pub mod config;
pub mod error;
pub mod matrix;
pub mod numeric;
pub mod riley;
pub mod sampling;
pub mod surgery;
pub mod torsion;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
pub use numeric::{cx, Cx, Mat2};
