//! Joint fractional flow LP for games whose players all route flows over a
//! common arc set with capacities `u`.

use num_traits::Zero;

use crate::duality::add_flow_rows;
use crate::error::{Error, Result};
use crate::game::{CostModel, Instance, StrategySpace};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::rat::{int, Rat, RatVec};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMaster {
    pub lp: LpProblem,
    /// Per-player arc flows at the optimum.
    pub x: Vec<RatVec>,
    pub value: Rat,
    /// Prices on the capacity rows, `≥ 0`.
    pub lambda: RatVec,
}

/// Optimizes the social objective over all players' flows subject to
/// `ℓ(x) ≤ u`; capacity rows come first so their duals are the prices.
///
/// Linear costs enter directly, concave flow-value utilities through one
/// epigraph variable per player.
pub fn solve_flow_master(inst: &Instance) -> Result<FlowMaster> {
    let m = inst.m;
    let mut offsets = Vec::with_capacity(inst.n());
    let mut objective: RatVec = Vec::new();
    for i in 0..inst.n() {
        let fs = match &inst.spaces[i] {
            StrategySpace::FlowPolytope(fs) if fs.graph.arcs.len() == m && inst.consumption[i].0.is_none() => fs,
            _ => return Err(Error::Structural(format!("player {i}: the flow LP needs arc flows over the resource set"))),
        };
        offsets.push(objective.len());
        match &inst.costs[i] {
            CostModel::PerResourceLinear(_) => {
                objective.extend(inst.linear_coefficients(i, &inst.target)?.expect("linear"));
            }
            CostModel::FlowValueUtility(_) => {
                objective.extend(std::iter::repeat_n(Rat::zero(), fs.graph.arcs.len()));
                objective.push(int(1));
            }
            _ => return Err(Error::Unsupported(format!("player {i}: flow LP needs linear or flow-value costs"))),
        }
    }
    let mut p = LpProblem::new(inst.sense, objective);
    for j in 0..m {
        let terms: Vec<(usize, Rat)> = offsets.iter().map(|&o| (o + j, int(1))).collect();
        p.add_sparse_row(&terms, RowKind::Le, inst.target[j].clone());
    }
    for (i, &o) in offsets.iter().enumerate() {
        let StrategySpace::FlowPolytope(fs) = &inst.spaces[i] else { unreachable!() };
        add_flow_rows(&mut p, fs, o);
        if let CostModel::FlowValueUtility(util) = &inst.costs[i] {
            let t = o + m;
            p.set_bounds(t, None, None);
            for (a, b) in util.pieces()? {
                // t - b * val <= a
                let mut terms: Vec<(usize, Rat)> = fs
                    .graph
                    .arcs
                    .iter()
                    .enumerate()
                    .filter_map(|(e, &(s, d))| match (s == fs.source, d == fs.source) {
                        (true, false) => Some((o + e, -b.clone())),
                        (false, true) => Some((o + e, b.clone())),
                        _ => None,
                    })
                    .collect();
                terms.push((t, int(1)));
                p.add_sparse_row(&terms, RowKind::Le, a);
            }
        }
    }
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Infeasible => return Err(Error::NotAchievable),
        LpStatus::Unbounded => return Err(Error::Unbounded("flow LP is unbounded".into())),
        LpStatus::Optimal => {}
    }
    let x = offsets.iter().map(|&o| sol.primal[o..o + m].to_vec()).collect();
    let lambda = sol.dual[..m]
        .iter()
        .map(|y| match inst.sense {
            Sense::Min => -y.clone(),
            Sense::Max => y.clone(),
        })
        .collect();
    Ok(FlowMaster { lp: p, x, value: sol.value, lambda })
}
