//! Trading networks: players on a directed multigraph, each edge a potential
//! trade from its seller (tail) to its buyer (head).

use num_traits::Zero;

use crate::convexify::enforce;
use crate::duality::{Certificate, Mode};
use crate::error::{Error, Result};
use crate::game::{CostModel, Instance, StrategySpace};
use crate::lp::Sense;
use crate::rat::{int, zeros, Rat, RatVec};

use super::AppOutcome;

/// Largest number of edges at one player.
pub const MAX_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeSpec {
    pub players: usize,
    /// `(seller, buyer)` per edge.
    pub edges: Vec<(usize, usize)>,
    /// Per player, `w̄_i(S)` indexed by the bitmask of `S` over the player's
    /// incident edges in increasing edge order.
    pub valuations: Vec<RatVec>,
    /// Adding a purchase never lowers a player's value.
    pub buyer_monotone: bool,
}

impl TradeSpec {
    /// Incident edges of player `i` in increasing order.
    pub fn incident(&self, i: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].0 == i || self.edges[e].1 == i).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.valuations.len() != self.players {
            return Err(Error::Dimension(format!("{} valuations for {} players", self.valuations.len(), self.players)));
        }
        for (e, &(s, b)) in self.edges.iter().enumerate() {
            if s >= self.players || b >= self.players || s == b {
                return Err(Error::Structural(format!("edge {e} must join two distinct players")));
            }
        }
        for i in 0..self.players {
            let inc = self.incident(i);
            if inc.len() > MAX_DEGREE {
                return Err(Error::OutOfScale(format!("player {i} has {} edges (limit {MAX_DEGREE})", inc.len())));
            }
            let w = &self.valuations[i];
            if w.len() != 1 << inc.len() {
                return Err(Error::Validation(format!(
                    "player {i} valuation has {} entries, expected {}",
                    w.len(),
                    1usize << inc.len()
                )));
            }
            if self.buyer_monotone {
                for (k, &e) in inc.iter().enumerate() {
                    if self.edges[e].1 != i {
                        continue;
                    }
                    if let Some(s) = (0..w.len()).find(|s| s >> k & 1 == 0 && w[s | 1 << k] < w[*s]) {
                        return Err(Error::Validation(format!(
                            "player {i} loses value buying edge {e} on top of trade set {s:#b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `x_ie = -1` for a sale on `e`, `+1` for a purchase, zero off the incident edges.
fn trade_point(spec: &TradeSpec, i: usize, inc: &[usize], mask: usize) -> RatVec {
    let mut x = zeros(spec.edges.len());
    for (k, &e) in inc.iter().enumerate() {
        if mask >> k & 1 == 1 {
            x[e] = if spec.edges[e].0 == i { int(-1) } else { int(1) };
        }
    }
    x
}

/// Max game with zero target: every edge load is `purchase − sale`.
pub fn build_trading(spec: &TradeSpec) -> Result<Instance> {
    spec.validate()?;
    let m = spec.edges.len();
    let mut spaces = Vec::with_capacity(spec.players);
    let mut costs = Vec::with_capacity(spec.players);
    for i in 0..spec.players {
        let inc = spec.incident(i);
        let table: Vec<(RatVec, Rat)> =
            (0..1usize << inc.len()).map(|s| (trade_point(spec, i, &inc, s), spec.valuations[i][s].clone())).collect();
        for (x, _) in &table {
            if let Some(e) = (0..m).find(|e| !x[*e].is_zero() && !inc.contains(e)) {
                return Err(Error::Structural(format!("player {i} strategy touches non-incident edge {e}")));
            }
        }
        spaces.push(StrategySpace::FinitePoints(table.iter().map(|(x, _)| x.clone()).collect()));
        costs.push(CostModel::Tabulated(table));
    }
    Instance::new(Sense::Max, spaces, costs, zeros(m))
}

/// Exact enforcement for buyer-monotone valuations, weak-market otherwise.
pub fn solve_trading(spec: &TradeSpec) -> Result<AppOutcome> {
    let mode = if spec.buyer_monotone { Mode::Enforce } else { Mode::WeakMarket };
    Ok(enforce(&build_trading(spec)?, mode)?.into())
}

/// Edges traded at `x*`, rejecting a trade selected by only one endpoint.
pub fn realized_trades(spec: &TradeSpec, cert: &Certificate) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (e, &(s, b)) in spec.edges.iter().enumerate() {
        let sold = cert.x_star[s][e] == int(-1);
        let bought = cert.x_star[b][e] == int(1);
        match (sold, bought) {
            (true, true) => out.push(e),
            (false, false) => {}
            _ if cert.mode == Mode::WeakMarket && sold && cert.prices[e].is_zero() => {}
            _ => return Err(Error::Validation(format!("edge {e} is selected by only one endpoint"))),
        }
    }
    Ok(out)
}
