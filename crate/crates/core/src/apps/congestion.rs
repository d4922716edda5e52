//! Atomic congestion games with tolls, and nonatomic (Wardrop) routing.

use crate::aggregative::{lift_certificate, tabulate};
use crate::convexify::enforce;
use crate::duality::{check_enforceable, Mode, Verdict};
use crate::error::{Error, Result};
use crate::game::{
    CoefficientFn, CostModel, Digraph, FlowSpace, FlowValue, Instance, StrategySpace, DEFAULT_CAP,
};
use crate::lp::Sense;
use crate::polymatroid::{enforce_polymatroid, RankOracle};
use crate::rat::{int, Rat, RatVec};

use super::flows::solve_flow_master;
use super::{check_nondecreasing, table_at, table_points, unit_vector, AppOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlayerStrategies {
    /// Explicit resource subsets.
    Subsets(Vec<Vec<usize>>),
    /// Unit `source`–`sink` paths; arcs are the resources.
    Network { graph: Digraph, source: usize, sink: usize },
    /// Bases of a matroid over the resources.
    Matroid(RankOracle),
}

/// Cost tables `c(k)` indexed by integer load `k = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostTables {
    Homogeneous(Vec<RatVec>),
    /// `[player][resource]`
    PlayerSpecific(Vec<Vec<RatVec>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongestionSpec {
    pub resources: usize,
    pub players: Vec<PlayerStrategies>,
    pub costs: CostTables,
    /// Per-player multipliers `α_i`, default 1.
    pub weights: Option<RatVec>,
}

impl CongestionSpec {
    pub fn table(&self, i: usize, j: usize) -> &[Rat] {
        match &self.costs {
            CostTables::Homogeneous(t) => &t[j],
            CostTables::PlayerSpecific(t) => &t[i][j],
        }
    }

    pub fn weight(&self, i: usize) -> Rat {
        self.weights.as_ref().map_or_else(|| int(1), |w| w[i].clone())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.players.len();
        let m = self.resources;
        match &self.costs {
            CostTables::Homogeneous(t) if t.len() != m => {
                return Err(Error::Dimension(format!("{} cost tables for {m} resources", t.len())))
            }
            CostTables::PlayerSpecific(t) if t.len() != n || t.iter().any(|r| r.len() != m) => {
                return Err(Error::Dimension(format!("player-specific cost tables must be {n}x{m}")))
            }
            _ => {}
        }
        if let Some(w) = &self.weights {
            if w.len() != n || w.iter().any(|a| a <= &int(0)) {
                return Err(Error::Validation("weights must be positive, one per player".into()));
            }
        }
        for i in 0..n {
            for j in 0..m {
                let t = self.table(i, j);
                if t.is_empty() {
                    return Err(Error::Validation(format!("empty cost table for resource {j}")));
                }
                check_nondecreasing(t, &format!("cost table of player {i} on resource {j}"))?;
            }
            match &self.players[i] {
                PlayerStrategies::Subsets(s) => {
                    if s.is_empty() {
                        return Err(Error::Structural(format!("player {i} has no strategies")));
                    }
                    if s.iter().flatten().any(|&j| j >= m) {
                        return Err(Error::Dimension(format!("player {i} uses a resource outside 0..{m}")));
                    }
                }
                PlayerStrategies::Network { graph, .. } if graph.arcs.len() != m => {
                    return Err(Error::Dimension(format!("player {i} graph has {} arcs, expected {m}", graph.arcs.len())))
                }
                PlayerStrategies::Matroid(f) if f.ground_size() != m => {
                    return Err(Error::Dimension(format!("player {i} matroid has ground size {}", f.ground_size())))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn cost_at(&self, i: usize, j: usize, z: &Rat) -> Result<Rat> {
        Ok(self.weight(i) * table_at(self.table(i, j), z, &format!("cost table of player {i} on resource {j}"))?)
    }
}

fn space(p: &PlayerStrategies, m: usize) -> StrategySpace {
    match p {
        PlayerStrategies::Subsets(s) => StrategySpace::FinitePoints(s.iter().map(|set| unit_vector(m, set)).collect()),
        PlayerStrategies::Network { graph, source, sink } => StrategySpace::FlowPolytope(FlowSpace {
            graph: graph.clone(),
            source: *source,
            sink: *sink,
            value: FlowValue::Fixed(int(1)),
            integral: true,
        }),
        PlayerStrategies::Matroid(f) => StrategySpace::PolymatroidBase(f.clone()),
    }
}

/// The aggregative game and its associated game at `u`, in that order.
///
/// The associated game charges `α_i·c_ij(u_j)` per unit of resource `j`.
pub fn build_congestion(spec: &CongestionSpec, u: &[Rat]) -> Result<(Instance, Instance)> {
    spec.validate()?;
    let m = spec.resources;
    if u.len() != m {
        return Err(Error::Dimension(format!("target has length {}, expected {m}", u.len())));
    }
    let spaces: Vec<StrategySpace> = spec.players.iter().map(|p| space(p, m)).collect();
    let mut costs = Vec::with_capacity(spec.players.len());
    for i in 0..spec.players.len() {
        let mut coeffs = Vec::with_capacity(m);
        for (j, uj) in u.iter().enumerate() {
            spec.cost_at(i, j, uj)?;
            coeffs.push(CoefficientFn::Table { resource: j, points: table_points(spec.table(i, j), &spec.weight(i)) });
        }
        costs.push(CostModel::PerResourceLinear(coeffs));
    }
    let assoc = Instance::new(Sense::Min, spaces.clone(), costs, u.to_vec())?;
    let tables = tabulate(&assoc, DEFAULT_CAP, &|i, w, x| {
        let mut acc = int(0);
        for (j, xj) in x.iter().enumerate() {
            if xj != &int(0) {
                acc += spec.cost_at(i, j, &w[j])? * xj;
            }
        }
        Ok(acc)
    })?;
    let mag = Instance::new(Sense::Min, spaces, tables.into_iter().map(CostModel::AggregativeTabulated).collect(), u.to_vec())?;
    Ok((mag, assoc))
}

/// Enforces `u` in the associated game and lifts exact certificates to the
/// aggregative game. Matroid games use the polymatroid solver unless uniqueness
/// is requested.
pub fn solve_congestion(spec: &CongestionSpec, u: &[Rat], mode: Mode) -> Result<AppOutcome> {
    let (mag, assoc) = build_congestion(spec, u)?;
    let matroids = spec.players.iter().all(|p| matches!(p, PlayerStrategies::Matroid(_)));
    let out: AppOutcome = if matroids && mode != Mode::Unique {
        enforce_polymatroid(&assoc)?.into()
    } else {
        enforce(&assoc, mode)?.into()
    };
    match out {
        AppOutcome::Certificate { certificate, value } if certificate.mode != Mode::WeakMarket => {
            let lifted = lift_certificate(&mag, &assoc, &certificate)?;
            Ok(AppOutcome::Certificate { certificate: Box::new(lifted), value })
        }
        other => Ok(other),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commodity {
    pub source: usize,
    pub sink: usize,
    pub demand: Rat,
}

/// Nonatomic routing: each commodity is one fractional flow player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WardropSpec {
    pub graph: Digraph,
    pub commodities: Vec<Commodity>,
    /// Nondecreasing cost table per arc, indexed by integer load and
    /// interpolated linearly in between.
    pub costs: Vec<RatVec>,
}

/// Flow game with arc costs frozen at `c_e(u_e)`.
pub fn build_wardrop(spec: &WardropSpec, u: &[Rat]) -> Result<Instance> {
    let m = spec.graph.arcs.len();
    if spec.costs.len() != m || u.len() != m {
        return Err(Error::Dimension(format!("{m} arcs need {m} cost tables and a target of length {m}")));
    }
    for (e, t) in spec.costs.iter().enumerate() {
        if t.is_empty() {
            return Err(Error::Validation(format!("empty cost table for arc {e}")));
        }
        check_nondecreasing(t, &format!("cost table of arc {e}"))?;
    }
    let mut coeffs = Vec::with_capacity(m);
    for (e, t) in spec.costs.iter().enumerate() {
        coeffs.push(CoefficientFn::Const(table_at(t, &u[e], &format!("cost table of arc {e}"))?));
    }
    let mut spaces = Vec::with_capacity(spec.commodities.len());
    for (k, c) in spec.commodities.iter().enumerate() {
        if c.demand < int(0) {
            return Err(Error::Validation(format!("commodity {k} has negative demand")));
        }
        spaces.push(StrategySpace::FlowPolytope(FlowSpace {
            graph: spec.graph.clone(),
            source: c.source,
            sink: c.sink,
            value: FlowValue::Fixed(c.demand.clone()),
            integral: false,
        }));
    }
    let costs = vec![CostModel::PerResourceLinear(coeffs); spaces.len()];
    Instance::new(Sense::Min, spaces, costs, u.to_vec())
}

/// Solves the min-cost flow LP under `ℓ ≤ u`; its capacity duals are the tolls.
/// Returns the certified flow, `enforce` when every arc is tight.
pub fn solve_wardrop(spec: &WardropSpec, u: &[Rat]) -> Result<AppOutcome> {
    let inst = build_wardrop(spec, u)?;
    let fm = match solve_flow_master(&inst) {
        Ok(fm) => fm,
        Err(Error::NotAchievable) => return Ok(AppOutcome::Infeasible),
        Err(e) => return Err(e),
    };
    let load = inst.load(&fm.x)?;
    let mode = if load == inst.target { Mode::Enforce } else { Mode::WeakMarket };
    match check_enforceable(&inst, &fm.x, &fm.lambda, mode)? {
        Verdict::Certified(c) => Ok(AppOutcome::Certificate { certificate: c, value: fm.value }),
        Verdict::Refuted(v) => Err(Error::TheoremContradiction(format!("optimal flow fails verification: {v}"))),
    }
}
