#![no_std]
extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod fusion;
pub mod lattice;
pub mod linalg;
pub mod mps;
pub mod sparse;
pub mod tube;
pub mod weak_hopf;

pub use num_complex::Complex64 as C64;

pub use fusion::{FusionCategory, FusionError};
pub use sparse::{Element, Sparse3};
pub use tube::{TubeAlgebra, TubeBasisElement};
pub use weak_hopf::WeakHopfAlgebra;
