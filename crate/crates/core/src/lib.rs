//! Anonymous resource prices that enforce a target load vector as an equilibrium
//! of a separable resource-allocation game, with exact certificates.

pub mod aggregative;
pub mod apps;
pub mod convexify;
pub mod duality;
pub mod error;
pub mod game;
pub mod lp;
pub mod polymatroid;
pub mod rat;

pub use error::{Error, Result};
pub use rat::{Rat, RatMat, RatVec};
