//! Integral polymatroids: rank oracles, greedy bases and the lifted
//! intersection that decides enforceability for polymatroid games.

pub mod greedy;
pub mod lift;
pub mod rank;

pub use greedy::{greedy_base, optimal_base, optimal_independent};
pub use lift::{enforce_polymatroid, intersect_min_cost, lift, Intersection, LiftedIntersection, PolymatroidOutcome};
pub use rank::RankOracle;
