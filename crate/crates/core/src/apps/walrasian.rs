//! Walrasian markets: unit buyers over item bundles, and multi-unit buyers with
//! consumption externalities.

use num_traits::{Signed, Zero};

use crate::aggregative::{lift_certificate, tabulate};
use crate::convexify::enforce;
use crate::duality::{Certificate, Mode};
use crate::error::{Error, Result};
use crate::game::{CoefficientFn, CostModel, Instance, StrategySpace, DEFAULT_CAP};
use crate::lp::Sense;
use crate::polymatroid::{enforce_polymatroid, RankOracle};
use crate::rat::{int, to_i64, Rat, RatVec};

use super::{table_at, table_points, AppOutcome};

/// Largest item count for explicit bundle enumeration.
pub const MAX_ITEMS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Additive(RatVec),
    UnitDemand(RatVec),
    SingleMinded { bundle: Vec<usize>, value: Rat },
    /// `w(S)` indexed by the bitmask of `S`.
    Table(RatVec),
}

impl Valuation {
    pub fn value(&self, mask: u32) -> Rat {
        let has = |j: usize| mask >> j & 1 == 1;
        match self {
            Valuation::Additive(v) => v.iter().enumerate().filter(|(j, _)| has(*j)).map(|(_, v)| v.clone()).sum(),
            Valuation::UnitDemand(v) => v
                .iter()
                .enumerate()
                .filter(|(j, _)| has(*j))
                .map(|(_, v)| v.clone())
                .max()
                .unwrap_or_else(Rat::zero),
            Valuation::SingleMinded { bundle, value } => {
                if bundle.iter().all(|&j| has(j)) {
                    value.clone()
                } else {
                    Rat::zero()
                }
            }
            Valuation::Table(t) => t[mask as usize].clone(),
        }
    }

    fn validate(&self, m: usize, buyer: usize) -> Result<()> {
        let ok = match self {
            Valuation::Additive(v) | Valuation::UnitDemand(v) => v.len() == m,
            Valuation::SingleMinded { bundle, .. } => bundle.iter().all(|&j| j < m),
            Valuation::Table(t) => t.len() == 1 << m,
        };
        if !ok {
            return Err(Error::Dimension(format!("buyer {buyer} valuation does not match {m} items")));
        }
        if !self.value(0).is_zero() {
            return Err(Error::Validation(format!("buyer {buyer} valuation is not normalized: w(∅) = {}", self.value(0))));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketSpec {
    pub multiplicities: Vec<i64>,
    pub buyers: Vec<Valuation>,
}

fn bundle_point(mask: u32, m: usize) -> RatVec {
    (0..m).map(|j| int((mask >> j & 1) as i64)).collect()
}

/// Max game with bundle strategies `{0,1}^m`, values `w_i(S)` and supply `u`.
pub fn build_walrasian(spec: &MarketSpec) -> Result<Instance> {
    let m = spec.multiplicities.len();
    if m > MAX_ITEMS {
        return Err(Error::OutOfScale(format!("{m} items (limit {MAX_ITEMS})")));
    }
    if spec.multiplicities.iter().any(|&k| k < 0) {
        return Err(Error::Validation("multiplicities must be nonnegative".into()));
    }
    let mut spaces = Vec::with_capacity(spec.buyers.len());
    let mut costs = Vec::with_capacity(spec.buyers.len());
    for (i, w) in spec.buyers.iter().enumerate() {
        w.validate(m, i)?;
        let points: Vec<RatVec> = (0..1u32 << m).map(|s| bundle_point(s, m)).collect();
        costs.push(CostModel::Tabulated((0..1u32 << m).map(|s| (bundle_point(s, m), w.value(s))).collect()));
        spaces.push(StrategySpace::FinitePoints(points));
    }
    Instance::new(Sense::Max, spaces, costs, spec.multiplicities.iter().map(|&k| int(k)).collect())
}

pub fn solve_walrasian(spec: &MarketSpec) -> Result<AppOutcome> {
    Ok(enforce(&build_walrasian(spec)?, Mode::WeakMarket)?.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarketReport {
    Equilibrium {
        /// Items held by each buyer.
        allocation: Vec<Vec<usize>>,
        prices: RatVec,
        unsold: Vec<i64>,
        welfare: Rat,
    },
    NoEquilibrium { lp_value: Rat, best_integral_welfare: Option<Rat> },
    Infeasible,
    Undecided(String),
}

/// Reads allocation and item prices off a certificate, checking supply and the
/// zero price of every item with unsold units.
pub fn interpret_market(inst: &Instance, out: &AppOutcome) -> Result<MarketReport> {
    match out {
        AppOutcome::Certificate { certificate, .. } => equilibrium(inst, certificate),
        AppOutcome::FractionalWitness(w) => {
            Ok(MarketReport::NoEquilibrium { lp_value: w.master.value.clone(), best_integral_welfare: w.best_integral_value.clone() })
        }
        AppOutcome::Infeasible => Ok(MarketReport::Infeasible),
        AppOutcome::Undecided(s) => Ok(MarketReport::Undecided(s.clone())),
    }
}

fn equilibrium(inst: &Instance, c: &Certificate) -> Result<MarketReport> {
    let load = inst.load(&c.x_star)?;
    let mut unsold = Vec::with_capacity(inst.m);
    for j in 0..inst.m {
        let left = &inst.target[j] - &load[j];
        if left.is_negative() {
            return Err(Error::TheoremContradiction(format!("item {j} is oversold")));
        }
        if left.is_positive() && !c.prices[j].is_zero() {
            return Err(Error::TheoremContradiction(format!("item {j} has unsold units at price {}", c.prices[j])));
        }
        unsold.push(to_i64(&left).ok_or_else(|| Error::Structural(format!("fractional supply of item {j}")))?);
    }
    let allocation = c
        .x_star
        .iter()
        .map(|x| x.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, _)| j).collect())
        .collect();
    let welfare = crate::duality::social_value(inst, &c.x_star)?;
    Ok(MarketReport::Equilibrium { allocation, prices: c.prices.clone(), unsold, welfare })
}

/// Multi-unit buyers choosing integral vectors of a polymatroid, with values
/// `Σ_j v_ij(ℓ_j) x_ij` that do not increase in the total consumption `ℓ_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalityMarket {
    pub multiplicities: Vec<i64>,
    pub ranks: Vec<RankOracle>,
    /// `[buyer][item][z]` for integer loads `z = 0, 1, ...`.
    pub values: Vec<Vec<RatVec>>,
}

impl ExternalityMarket {
    fn value_at(&self, i: usize, j: usize, z: &Rat) -> Result<Rat> {
        table_at(&self.values[i][j], z, &format!("value table of buyer {i} on item {j}"))
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.multiplicities.len();
        let n = self.ranks.len();
        if self.values.len() != n || self.values.iter().any(|v| v.len() != m) {
            return Err(Error::Dimension(format!("value tables must be {n}x{m}")));
        }
        if self.ranks.iter().any(|f| f.ground_size() != m) {
            return Err(Error::Dimension(format!("rank oracles must be over {m} items")));
        }
        for (i, vi) in self.values.iter().enumerate() {
            for (j, t) in vi.iter().enumerate() {
                if t.is_empty() || t.iter().any(Signed::is_negative) {
                    return Err(Error::Validation(format!("value table of buyer {i} on item {j} must be nonempty and nonnegative")));
                }
                if let Some(k) = t.windows(2).position(|w| w[1] > w[0]) {
                    return Err(Error::Validation(format!(
                        "value of buyer {i} for item {j} increases from load {k} to {}",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The aggregative market and its associated game at the supply, in that order.
pub fn build_externality_market(spec: &ExternalityMarket) -> Result<(Instance, Instance)> {
    spec.validate()?;
    let u: RatVec = spec.multiplicities.iter().map(|&k| int(k)).collect();
    let spaces: Vec<StrategySpace> = spec.ranks.iter().cloned().map(StrategySpace::PolymatroidVectors).collect();
    let mut costs = Vec::with_capacity(spec.ranks.len());
    for (i, vi) in spec.values.iter().enumerate() {
        let mut coeffs = Vec::with_capacity(u.len());
        for (j, t) in vi.iter().enumerate() {
            spec.value_at(i, j, &u[j])?;
            coeffs.push(CoefficientFn::Table { resource: j, points: table_points(t, &int(1)) });
        }
        costs.push(CostModel::PerResourceLinear(coeffs));
    }
    let assoc = Instance::new(Sense::Max, spaces.clone(), costs, u.clone())?;
    let tables = tabulate(&assoc, DEFAULT_CAP, &|i, w, x| {
        let mut acc = Rat::zero();
        for (j, xj) in x.iter().enumerate() {
            if !xj.is_zero() {
                acc += spec.value_at(i, j, &w[j])? * xj;
            }
        }
        Ok(acc)
    })?;
    let mag = Instance::new(Sense::Max, spaces, tables.into_iter().map(CostModel::AggregativeTabulated).collect(), u)?;
    Ok((mag, assoc))
}

/// Polymatroid enforcement of the supply, lifted to the aggregative market when
/// the supply is met exactly.
pub fn solve_externality_market(spec: &ExternalityMarket) -> Result<AppOutcome> {
    let (mag, assoc) = build_externality_market(spec)?;
    match AppOutcome::from(enforce_polymatroid(&assoc)?) {
        AppOutcome::Certificate { certificate, value } if certificate.mode == Mode::Enforce => {
            let lifted = lift_certificate(&mag, &assoc, &certificate)?;
            Ok(AppOutcome::Certificate { certificate: Box::new(lifted), value })
        }
        other => Ok(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, ints};

    #[test]
    fn single_item_single_buyer() {
        let spec = MarketSpec { multiplicities: vec![1], buyers: vec![Valuation::Additive(ints(&[5]))] };
        let inst = build_walrasian(&spec).unwrap();
        let out = solve_walrasian(&spec).unwrap();
        let c = out.certificate().unwrap();
        assert!(c.prices[0] >= int(0) && c.prices[0] <= int(5));
        match interpret_market(&inst, &out).unwrap() {
            MarketReport::Equilibrium { allocation, unsold, welfare, .. } => {
                assert_eq!(allocation, vec![vec![0]]);
                assert_eq!(unsold, vec![0]);
                assert_eq!(welfare, int(5));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn single_minded_gadget_has_no_equilibrium() {
        let spec = MarketSpec {
            multiplicities: vec![1, 1],
            buyers: vec![
                Valuation::SingleMinded { bundle: vec![0, 1], value: int(3) },
                Valuation::UnitDemand(ints(&[2, 2])),
            ],
        };
        let inst = build_walrasian(&spec).unwrap();
        let out = solve_walrasian(&spec).unwrap();
        let w = out.witness().expect("no equilibrium");
        assert_eq!(w.master.value, frac(7, 2));
        assert_eq!(w.best_integral_value, Some(int(3)));
        assert!(matches!(interpret_market(&inst, &out).unwrap(), MarketReport::NoEquilibrium { .. }));
    }

    #[test]
    fn unsold_units_are_free() {
        let spec = MarketSpec { multiplicities: vec![2, 1], buyers: vec![Valuation::UnitDemand(ints(&[3, 1]))] };
        let inst = build_walrasian(&spec).unwrap();
        let out = solve_walrasian(&spec).unwrap();
        match interpret_market(&inst, &out).unwrap() {
            MarketReport::Equilibrium { prices, unsold, .. } => {
                assert_eq!(unsold, vec![1, 1]);
                assert_eq!(prices, ints(&[0, 0]));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn unnormalized_valuation_rejected() {
        let spec = MarketSpec { multiplicities: vec![1], buyers: vec![Valuation::Table(ints(&[1, 2]))] };
        assert!(matches!(build_walrasian(&spec), Err(Error::Validation(_))));
    }

    #[test]
    fn externality_market_lifts() {
        let f = RankOracle::free(2).unwrap();
        let spec = ExternalityMarket {
            multiplicities: vec![1, 1],
            ranks: vec![f.clone(), f],
            values: vec![vec![ints(&[4, 4, 1]), ints(&[2, 2, 1])], vec![ints(&[3, 3, 0]), ints(&[3, 3, 2])]],
        };
        let out = solve_externality_market(&spec).unwrap();
        let c = out.certificate().unwrap();
        assert_eq!(c.mode, Mode::Enforce);
        assert_eq!(c.x_star, vec![ints(&[1, 0]), ints(&[0, 1])]);
    }

    #[test]
    fn increasing_externality_rejected() {
        let f = RankOracle::free(1).unwrap();
        let spec = ExternalityMarket { multiplicities: vec![1], ranks: vec![f], values: vec![vec![ints(&[1, 2])]] };
        assert!(matches!(build_externality_market(&spec), Err(Error::Validation(_))));
    }
}
