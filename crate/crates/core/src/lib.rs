//! Exact finite-level computations for principal-series diagrams of
//! `GL_2(Q_p)`: p-adic arithmetic, lattices over `o_L`, Iwahori-level
//! diagrams and their deformations, homology on truncated Bruhat–Tits
//! trees, and the filtered φ-modules `D_{k,a_p}`.

pub mod diagrams;
pub mod driver;
pub mod error;
pub mod gl2;
pub mod lattice;
pub mod linalg;
pub mod local_field;
pub mod phimod;
pub mod smooth_reps;
pub mod tree;

pub use error::{Error, Result};
