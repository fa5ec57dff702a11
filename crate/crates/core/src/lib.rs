pub mod error;
pub mod cubelat;
pub mod fnexpr;
pub mod kernels;
pub mod replace;
pub mod retract;
pub mod suite;
pub mod tame;

pub use error::{Error, Result};
