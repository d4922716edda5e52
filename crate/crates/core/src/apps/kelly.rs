//! Kelly congestion control: players choose flows from their source to their
//! sink and value the flow value through a concave utility.

use num_traits::{Signed, Zero};

use crate::convexify::enforce;
use crate::duality::{check_enforceable, Mode, Verdict};
use crate::error::{Error, Result};
use crate::game::{CostModel, Digraph, FlowSpace, FlowValue, Instance, StrategySpace, Utility};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::rat::{int, is_integer, Rat, RatVec};

use super::flows::solve_flow_master;
use super::AppOutcome;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KellyPlayer {
    pub source: usize,
    pub sink: usize,
    pub utility: Utility,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KellySpec {
    pub graph: Digraph,
    pub capacities: RatVec,
    pub players: Vec<KellyPlayer>,
    pub integral: bool,
}

/// How `solve_kelly` decided the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KellyPath {
    /// Joint LP over fractional flows.
    Fractional,
    /// Max-flow LP to a super sink, for a common source and identical linear utilities.
    SingleSource,
    /// Master LP over enumerated integral flows with value up to the utility cap.
    Enumerated,
}

impl KellySpec {
    pub fn validate(&self) -> Result<()> {
        let m = self.graph.arcs.len();
        if self.capacities.len() != m {
            return Err(Error::Dimension(format!("{} capacities for {m} arcs", self.capacities.len())));
        }
        if self.capacities.iter().any(Signed::is_negative) {
            return Err(Error::Validation("capacities must be nonnegative".into()));
        }
        for (i, p) in self.players.iter().enumerate() {
            if p.source == p.sink {
                return Err(Error::Structural(format!("player {i} has the same source and sink")));
            }
            p.utility.validate()?;
        }
        Ok(())
    }

    fn common_linear_source(&self) -> Option<(usize, Rat)> {
        let first = self.players.first()?;
        let Utility::Linear(a) = &first.utility else { return None };
        self.players
            .iter()
            .all(|p| p.source == first.source && p.utility == first.utility)
            .then(|| (first.source, a.clone()))
    }
}

/// Flow value beyond which the utility is flat.
fn saturation(u: &Utility) -> Option<Rat> {
    match u {
        Utility::Linear(_) => None,
        Utility::CappedLinear { cap, .. } => Some(cap.clone()),
        Utility::Piecewise(points) => points.last().map(|p| p.0.clone()),
    }
}

/// Max game over arc flows with capacities as target.
///
/// In the integral model, flow values are capped at the utility's saturation
/// point; larger values never gain utility and cost `λ ≥ 0`.
pub fn build_kelly(spec: &KellySpec) -> Result<Instance> {
    spec.validate()?;
    let spaces = spec
        .players
        .iter()
        .map(|p| {
            let value = match (spec.integral, saturation(&p.utility)) {
                (true, Some(c)) => FlowValue::UpTo(Some(c.floor())),
                _ => FlowValue::UpTo(None),
            };
            StrategySpace::FlowPolytope(FlowSpace {
                graph: spec.graph.clone(),
                source: p.source,
                sink: p.sink,
                value,
                integral: spec.integral,
            })
        })
        .collect();
    let costs = spec.players.iter().map(|p| CostModel::FlowValueUtility(p.utility.clone())).collect();
    Instance::new(Sense::Max, spaces, costs, spec.capacities.clone())
}

pub fn solve_kelly(spec: &KellySpec) -> Result<(KellyPath, AppOutcome)> {
    let inst = build_kelly(spec)?;
    if !spec.integral {
        let fm = solve_flow_master(&inst)?;
        return certify(&inst, &fm.x, &fm.lambda, fm.value).map(|o| (KellyPath::Fractional, o));
    }
    if let Some((source, rate)) = spec.common_linear_source() {
        let (x, lambda, value) = single_source(spec, source, &rate)?;
        return certify(&inst, &x, &lambda, value).map(|o| (KellyPath::SingleSource, o));
    }
    if spec.players.iter().any(|p| saturation(&p.utility).is_none()) {
        return Ok((
            KellyPath::Enumerated,
            AppOutcome::Undecided("integral flows with unbounded linear utility are not enumerable".into()),
        ));
    }
    Ok((KellyPath::Enumerated, enforce(&inst, Mode::WeakMarket)?.into()))
}

fn certify(inst: &Instance, x: &[RatVec], lambda: &[Rat], value: Rat) -> Result<AppOutcome> {
    match check_enforceable(inst, x, lambda, Mode::WeakMarket)? {
        Verdict::Certified(c) => Ok(AppOutcome::Certificate { certificate: c, value }),
        Verdict::Refuted(v) => Err(Error::TheoremContradiction(format!("optimal flow fails verification: {v}"))),
    }
}

/// Max-flow LP from the common source to a super sink joined by one arc per
/// player; the vertex optimum is integral and is split into per-player flows.
fn single_source(spec: &KellySpec, source: usize, rate: &Rat) -> Result<(Vec<RatVec>, RatVec, Rat)> {
    let m = spec.graph.arcs.len();
    let n = spec.players.len();
    let sink = spec.graph.nodes;
    let mut arcs = spec.graph.arcs.clone();
    arcs.extend(spec.players.iter().map(|p| (p.sink, sink)));
    let mut objective = vec![Rat::zero(); m];
    objective.extend(std::iter::repeat_n(rate.clone(), n));
    let mut p = LpProblem::new(Sense::Max, objective);
    for (e, c) in spec.capacities.iter().enumerate() {
        p.add_sparse_row(&[(e, int(1))], RowKind::Le, c.clone());
    }
    for v in 0..spec.graph.nodes {
        if v == source {
            continue;
        }
        let terms: Vec<(usize, Rat)> = arcs
            .iter()
            .enumerate()
            .filter_map(|(e, &(a, b))| match (a == v, b == v) {
                (true, false) => Some((e, int(1))),
                (false, true) => Some((e, int(-1))),
                _ => None,
            })
            .collect();
        p.add_sparse_row(&terms, RowKind::Eq, Rat::zero());
    }
    let sol = lp::solve(&p)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Structural(format!("single-source flow LP is {:?}", sol.status)));
    }
    if !sol.primal.iter().all(is_integer) {
        return Err(Error::TheoremContradiction("single-source max-flow vertex is fractional".into()));
    }
    let lambda: RatVec = sol.dual[..m].to_vec();
    let x = decompose(&arcs, sol.primal, source, sink, m, n);
    Ok((x, lambda, sol.value))
}

/// Peels source-to-super-sink paths off `y` and credits each to the player of
/// its last arc; the remaining circulation goes to player 0.
fn decompose(arcs: &[(usize, usize)], mut y: RatVec, source: usize, sink: usize, m: usize, n: usize) -> Vec<RatVec> {
    let mut x = vec![vec![Rat::zero(); m]; n];
    while let Some(path) = find_path(arcs, &y, source, sink) {
        let amount = path.iter().map(|&e| y[e].clone()).min().expect("nonempty path");
        let last = *path.last().expect("nonempty path");
        let player = last - m;
        for &e in &path {
            y[e] -= &amount;
            if e < m {
                x[player][e] += &amount;
            }
        }
    }
    if n > 0 {
        for e in 0..m {
            x[0][e] += &y[e];
        }
    }
    x
}

fn find_path(arcs: &[(usize, usize)], y: &[Rat], source: usize, sink: usize) -> Option<Vec<usize>> {
    let nodes = arcs.iter().map(|&(a, b)| a.max(b)).max()? + 1;
    let mut via: Vec<Option<usize>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    let mut stack = vec![source];
    seen[source] = true;
    while let Some(v) = stack.pop() {
        if v == sink {
            let mut path = Vec::new();
            let mut w = sink;
            while let Some(e) = via[w] {
                path.push(e);
                w = arcs[e].0;
            }
            path.reverse();
            return Some(path);
        }
        for (e, &(a, b)) in arcs.iter().enumerate() {
            if a == v && !seen[b] && y[e].is_positive() {
                seen[b] = true;
                via[b] = Some(e);
                stack.push(b);
            }
        }
    }
    None
}
