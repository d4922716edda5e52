//! Games `G^min(u)` / `G^max(u)`: players, strategy spaces, linear consumption
//! maps and cost or utility models parameterized by the target load `u`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::Sense;
use crate::polymatroid::rank::{subset_sum, RankOracle};
use crate::rat::{add_into, dot, int, is_integer, to_i64, Rat, RatMat, RatVec};

/// Default bound on enumerated strategies and profiles.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub nodes: usize,
    pub arcs: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new(nodes: usize, arcs: Vec<(usize, usize)>) -> Self {
        Digraph { nodes, arcs }
    }

    pub fn reachable(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.arcs {
                if a == v && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen
    }

    /// Kahn order, or `None` if the graph has a directed cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg = vec![0usize; self.nodes];
        for &(_, b) in &self.arcs {
            indeg[b] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..self.nodes).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &(a, b) in &self.arcs {
                if a == v {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
        (order.len() == self.nodes).then_some(order)
    }

    /// Net outflow of `node` under arc flow `x`.
    pub fn net_outflow(&self, x: &[Rat], node: usize) -> Rat {
        let mut net = Rat::zero();
        for (e, &(a, b)) in self.arcs.iter().enumerate() {
            if a == node {
                net += &x[e];
            }
            if b == node {
                net -= &x[e];
            }
        }
        net
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowValue {
    Fixed(Rat),
    /// Any value in `[0, cap]`; `None` leaves it unbounded.
    UpTo(Option<Rat>),
}

/// Flows from `source` to `sink`; one coordinate per arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSpace {
    pub graph: Digraph,
    pub source: usize,
    pub sink: usize,
    pub value: FlowValue,
    pub integral: bool,
}

impl FlowSpace {
    pub fn value_of(&self, x: &[Rat]) -> Rat {
        self.graph.net_outflow(x, self.source)
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        if x.len() != self.graph.arcs.len() || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        if self.integral && !x.iter().all(is_integer) {
            return false;
        }
        let val = self.value_of(x);
        let value_ok = match &self.value {
            FlowValue::Fixed(d) => &val == d,
            FlowValue::UpTo(cap) => !val.is_negative() && cap.as_ref().is_none_or(|c| &val <= c),
        };
        value_ok
            && (0..self.graph.nodes)
                .filter(|&v| v != self.source && v != self.sink)
                .all(|v| self.graph.net_outflow(x, v).is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategySpace {
    FinitePoints(Vec<RatVec>),
    /// Generators of a hull over which the cost extends concavely.
    ConcaveHullPoints(Vec<RatVec>),
    PolymatroidBase(RankOracle),
    /// Integral independent vectors `{x >= 0 : x(S) <= f(S)}`.
    PolymatroidVectors(RankOracle),
    FlowPolytope(FlowSpace),
}

impl StrategySpace {
    pub fn dim(&self) -> Option<usize> {
        match self {
            StrategySpace::FinitePoints(p) | StrategySpace::ConcaveHullPoints(p) => p.first().map(Vec::len),
            StrategySpace::PolymatroidBase(f) | StrategySpace::PolymatroidVectors(f) => Some(f.ground_size()),
            StrategySpace::FlowPolytope(fs) => Some(fs.graph.arcs.len()),
        }
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        match self {
            StrategySpace::FinitePoints(p) | StrategySpace::ConcaveHullPoints(p) => p.iter().any(|q| q == x),
            StrategySpace::PolymatroidBase(f) => int_vec(x).is_some_and(|v| f.is_base(&v)),
            StrategySpace::PolymatroidVectors(f) => int_vec(x).is_some_and(|v| f.is_independent(&v)),
            StrategySpace::FlowPolytope(fs) => fs.contains(x),
        }
    }
}

fn int_vec(x: &[Rat]) -> Option<Vec<i64>> {
    x.iter().map(to_i64).collect()
}

/// `g_i(x_i) = G_i x_i`; `None` is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConsumptionMap(pub Option<RatMat>);

impl ConsumptionMap {
    pub fn identity() -> Self {
        ConsumptionMap(None)
    }

    pub fn matrix(g: RatMat) -> Self {
        ConsumptionMap(Some(g))
    }

    pub fn apply(&self, x: &[Rat]) -> RatVec {
        match &self.0 {
            None => x.to_vec(),
            Some(g) => g.iter().map(|row| dot(row, x)).collect(),
        }
    }
}

/// A coefficient `π_ij(u)` evaluated exactly at the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoefficientFn {
    Const(Rat),
    /// `sum_k coeffs[k] * u[resource]^k`
    Poly { resource: usize, coeffs: RatVec },
    /// Linear interpolation through breakpoints sorted by abscissa, flat beyond the ends.
    Table { resource: usize, points: Vec<(Rat, Rat)> },
}

impl CoefficientFn {
    pub fn eval(&self, u: &[Rat]) -> Result<Rat> {
        match self {
            CoefficientFn::Const(c) => Ok(c.clone()),
            CoefficientFn::Poly { resource, coeffs } => {
                let z = u.get(*resource).ok_or_else(|| bad_resource(*resource, u.len()))?;
                let mut acc = Rat::zero();
                for c in coeffs.iter().rev() {
                    acc = acc * z + c;
                }
                Ok(acc)
            }
            CoefficientFn::Table { resource, points } => {
                let z = u.get(*resource).ok_or_else(|| bad_resource(*resource, u.len()))?;
                interpolate(points, z)
            }
        }
    }
}

fn bad_resource(r: usize, m: usize) -> Error {
    Error::Dimension(format!("resource {r} out of range for {m} resources"))
}

pub fn interpolate(points: &[(Rat, Rat)], z: &Rat) -> Result<Rat> {
    let (first, last) = match (points.first(), points.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Structural("empty coefficient table".into())),
    };
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Structural("table abscissae must be strictly increasing".into()));
    }
    if z <= &first.0 {
        return Ok(first.1.clone());
    }
    if z >= &last.0 {
        return Ok(last.1.clone());
    }
    let w = points
        .windows(2)
        .find(|w| &w[0].0 <= z && z <= &w[1].0)
        .expect("z lies strictly inside the table range");
    let t = (z - &w[0].0) / (&w[1].0 - &w[0].0);
    Ok(&w[0].1 + t * (&w[1].1 - &w[0].1))
}

/// Concave utility of a scalar such as a flow value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Utility {
    Linear(Rat),
    CappedLinear { rate: Rat, cap: Rat },
    /// Breakpoints `(z, U(z))` starting at `z = 0`, flat after the last one.
    Piecewise(Vec<(Rat, Rat)>),
}

impl Utility {
    pub fn eval(&self, z: &Rat) -> Result<Rat> {
        if z.is_negative() {
            return Err(Error::Structural(format!("utility evaluated at negative value {z}")));
        }
        match self {
            Utility::Linear(a) => Ok(a * z),
            Utility::CappedLinear { rate, cap } => Ok(rate * z.min(cap)),
            Utility::Piecewise(points) => interpolate(points, z),
        }
    }

    /// Affine pieces `(intercept, slope)` whose pointwise minimum is `U` on `z >= 0`.
    pub fn pieces(&self) -> Result<Vec<(Rat, Rat)>> {
        self.validate()?;
        match self {
            Utility::Linear(a) => Ok(vec![(Rat::zero(), a.clone())]),
            Utility::CappedLinear { rate, cap } => {
                Ok(vec![(Rat::zero(), rate.clone()), (rate * cap, Rat::zero())])
            }
            Utility::Piecewise(points) => {
                let mut out: Vec<(Rat, Rat)> = points
                    .windows(2)
                    .map(|w| {
                        let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
                        (&w[0].1 - &slope * &w[0].0, slope)
                    })
                    .collect();
                out.push((points.last().expect("validated").1.clone(), Rat::zero()));
                Ok(out)
            }
        }
    }

    /// Concavity and shape checks.
    pub fn validate(&self) -> Result<()> {
        match self {
            Utility::Linear(_) => Ok(()),
            Utility::CappedLinear { rate, cap } => {
                if rate.is_negative() || cap.is_negative() {
                    Err(Error::Validation("capped-linear utility needs rate, cap >= 0".into()))
                } else {
                    Ok(())
                }
            }
            Utility::Piecewise(points) => {
                if points.first().is_none_or(|p| !p.0.is_zero()) {
                    return Err(Error::Validation("piecewise utility must start at z = 0".into()));
                }
                if points.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::Validation("utility breakpoints must increase".into()));
                }
                let slopes: Vec<Rat> = points
                    .windows(2)
                    .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
                    .chain(std::iter::once(Rat::zero()))
                    .collect();
                if slopes.windows(2).any(|s| s[1] > s[0]) {
                    return Err(Error::Validation("utility is not concave".into()));
                }
                Ok(())
            }
        }
    }
}

/// `π_i^moag(w, x_i)` keyed by load vector and strategy point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AggTable {
    pub entries: BTreeMap<(RatVec, RatVec), Rat>,
}

impl AggTable {
    pub fn get(&self, w: &[Rat], x: &[Rat]) -> Option<&Rat> {
        self.entries.get(&(w.to_vec(), x.to_vec()))
    }

    pub fn insert(&mut self, w: RatVec, x: RatVec, v: Rat) {
        self.entries.insert((w, x), v);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostModel {
    /// `sum_j π_ij(u) x_ij`
    PerResourceLinear(Vec<CoefficientFn>),
    /// Cost (or utility) at the target, per strategy point.
    Tabulated(Vec<(RatVec, Rat)>),
    AggregativeTabulated(AggTable),
    /// Utility of the flow value of a `FlowPolytope` strategy.
    FlowValueUtility(Utility),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub sense: Sense,
    pub m: usize,
    pub spaces: Vec<StrategySpace>,
    pub consumption: Vec<ConsumptionMap>,
    pub costs: Vec<CostModel>,
    pub target: RatVec,
}

impl Instance {
    /// Builds and validates an instance with identity consumption maps.
    pub fn new(sense: Sense, spaces: Vec<StrategySpace>, costs: Vec<CostModel>, target: RatVec) -> Result<Self> {
        let n = spaces.len();
        let inst = Instance {
            sense,
            m: target.len(),
            spaces,
            consumption: vec![ConsumptionMap::identity(); n],
            costs,
            target,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_consumption(mut self, consumption: Vec<ConsumptionMap>) -> Result<Self> {
        self.consumption = consumption;
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.spaces.len()
    }

    pub fn dim(&self, i: usize) -> usize {
        self.spaces[i].dim().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.costs.len() != n || self.consumption.len() != n {
            return Err(Error::Dimension(format!(
                "{n} spaces, {} cost models, {} consumption maps",
                self.costs.len(),
                self.consumption.len()
            )));
        }
        if self.target.len() != self.m {
            return Err(Error::Dimension(format!("target has length {}, expected {}", self.target.len(), self.m)));
        }
        for i in 0..n {
            let d = match &self.spaces[i] {
                StrategySpace::FinitePoints(p) | StrategySpace::ConcaveHullPoints(p) => {
                    let d = p
                        .first()
                        .ok_or_else(|| Error::Structural(format!("player {i} has an empty strategy list")))?
                        .len();
                    if p.iter().any(|q| q.len() != d) {
                        return Err(Error::Dimension(format!("player {i} has points of mixed dimension")));
                    }
                    d
                }
                StrategySpace::PolymatroidBase(f) | StrategySpace::PolymatroidVectors(f) => f.ground_size(),
                StrategySpace::FlowPolytope(fs) => {
                    let g = &fs.graph;
                    if fs.source >= g.nodes || fs.sink >= g.nodes || g.arcs.iter().any(|&(a, b)| a >= g.nodes || b >= g.nodes) {
                        return Err(Error::Structural(format!("player {i} flow graph references a missing node")));
                    }
                    if !g.reachable(fs.source)[fs.sink] {
                        return Err(Error::Structural(format!("player {i}: sink unreachable from source")));
                    }
                    g.arcs.len()
                }
            };
            match &self.consumption[i].0 {
                None if d != self.m => {
                    return Err(Error::Dimension(format!(
                        "player {i} strategies have dimension {d} but there are {} resources",
                        self.m
                    )))
                }
                Some(g) if g.len() != self.m || g.iter().any(|r| r.len() != d) => {
                    return Err(Error::Dimension(format!("player {i} consumption matrix is not {}x{d}", self.m)))
                }
                _ => {}
            }
            match &self.costs[i] {
                CostModel::PerResourceLinear(c) if c.len() != d => {
                    return Err(Error::Dimension(format!("player {i} has {} coefficients, expected {d}", c.len())))
                }
                CostModel::Tabulated(t) => {
                    if let StrategySpace::FinitePoints(p) | StrategySpace::ConcaveHullPoints(p) = &self.spaces[i] {
                        if let Some(q) = p.iter().find(|q| !t.iter().any(|(x, _)| x == *q)) {
                            return Err(Error::Structural(format!(
                                "player {i} cost table misses point {}",
                                crate::rat::fmt_vec(q)
                            )));
                        }
                    }
                }
                CostModel::FlowValueUtility(u) => {
                    u.validate()?;
                    if !matches!(self.spaces[i], StrategySpace::FlowPolytope(_)) {
                        return Err(Error::Structural(format!("player {i}: flow-value utility needs a flow space")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// `g_i(x_i)`.
    pub fn consume(&self, i: usize, x: &[Rat]) -> RatVec {
        self.consumption[i].apply(x)
    }

    /// `ℓ(x) = sum_i g_i(x_i)`.
    pub fn load(&self, profile: &[RatVec]) -> Result<RatVec> {
        if profile.len() != self.n() {
            return Err(Error::Dimension(format!("profile has {} players, expected {}", profile.len(), self.n())));
        }
        let mut l = vec![Rat::zero(); self.m];
        for (i, x) in profile.iter().enumerate() {
            if x.len() != self.dim(i) {
                return Err(Error::Dimension(format!(
                    "player {i} strategy has length {}, expected {}",
                    x.len(),
                    self.dim(i)
                )));
            }
            add_into(&mut l, &self.consume(i, x));
        }
        Ok(l)
    }

    /// `π_i(u, x_i)`, or `v_i(u, x_i)` for maximization games.
    pub fn cost(&self, i: usize, u: &[Rat], x: &[Rat]) -> Result<Rat> {
        match &self.costs[i] {
            CostModel::PerResourceLinear(c) => {
                let mut acc = Rat::zero();
                for (cj, xj) in c.iter().zip(x) {
                    if !xj.is_zero() {
                        acc += cj.eval(u)? * xj;
                    }
                }
                Ok(acc)
            }
            CostModel::Tabulated(t) => t
                .iter()
                .find(|(p, _)| p.as_slice() == x)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Structural(format!("player {i} has no cost entry for {}", crate::rat::fmt_vec(x)))),
            CostModel::AggregativeTabulated(t) => t.get(u, x).cloned().ok_or_else(|| {
                Error::Coverage(format!(
                    "player {i}, point {} at load {}",
                    crate::rat::fmt_vec(x),
                    crate::rat::fmt_vec(u)
                ))
            }),
            CostModel::FlowValueUtility(util) => match &self.spaces[i] {
                StrategySpace::FlowPolytope(fs) => util.eval(&fs.value_of(x)),
                _ => Err(Error::Structural(format!("player {i}: flow-value utility needs a flow space"))),
            },
        }
    }

    /// Per-coordinate cost coefficients at `u` if the model is linear.
    pub fn linear_coefficients(&self, i: usize, u: &[Rat]) -> Result<Option<RatVec>> {
        match &self.costs[i] {
            CostModel::PerResourceLinear(c) => Ok(Some(c.iter().map(|f| f.eval(u)).collect::<Result<_>>()?)),
            _ => Ok(None),
        }
    }

    /// Priced objective: `π + λ·g` for min games, `v - λ·g` for max games.
    pub fn priced(&self, i: usize, u: &[Rat], lambda: &[Rat], x: &[Rat]) -> Result<Rat> {
        let c = self.cost(i, u, x)?;
        let p = dot(lambda, &self.consume(i, x));
        Ok(match self.sense {
            Sense::Min => c + p,
            Sense::Max => c - p,
        })
    }

    /// `a` is strictly better than `b` for the game's sense.
    pub fn better(&self, a: &Rat, b: &Rat) -> bool {
        match self.sense {
            Sense::Min => a < b,
            Sense::Max => a > b,
        }
    }

    pub fn enumerate_pure(&self, i: usize, cap: usize) -> Result<Vec<RatVec>> {
        enumerate_space(&self.spaces[i], cap)
    }

    pub fn is_enumerable(&self, i: usize) -> bool {
        match &self.spaces[i] {
            StrategySpace::FlowPolytope(fs) => {
                fs.integral
                    && fs.graph.topological_order().is_some()
                    && !matches!(fs.value, FlowValue::UpTo(None))
            }
            _ => true,
        }
    }
}

/// Exhaustive, duplicate-free pure strategies of a space.
pub fn enumerate_space(space: &StrategySpace, cap: usize) -> Result<Vec<RatVec>> {
    match space {
        StrategySpace::FinitePoints(p) | StrategySpace::ConcaveHullPoints(p) => {
            let mut seen = BTreeSet::new();
            Ok(p.iter().filter(|q| seen.insert((*q).clone())).cloned().collect())
        }
        StrategySpace::PolymatroidBase(f) => enumerate_polymatroid(f, true, cap),
        StrategySpace::PolymatroidVectors(f) => enumerate_polymatroid(f, false, cap),
        StrategySpace::FlowPolytope(fs) => enumerate_flows(fs, cap),
    }
}

fn enumerate_polymatroid(f: &RankOracle, base: bool, cap: usize) -> Result<Vec<RatVec>> {
    let m = f.ground_size();
    let bounds: Vec<i64> = (0..m).map(|j| f.rank(1 << j)).collect();
    let size = bounds.iter().try_fold(1usize, |acc, &b| acc.checked_mul(b as usize + 1));
    if size.is_none_or(|s| s > cap) {
        return Err(Error::Capacity { what: "polymatroid box".into(), cap });
    }
    let target = f.rank(f.full());
    let mut out = Vec::new();
    let mut x = vec![0i64; m];
    fn rec(j: usize, x: &mut Vec<i64>, bounds: &[i64], f: &RankOracle, base: bool, target: i64, out: &mut Vec<RatVec>) {
        let m = x.len();
        if j == m {
            if (!base || subset_sum(x, f.full()) == target) && f.is_independent(x) {
                out.push(x.iter().map(|&v| int(v)).collect());
            }
            return;
        }
        for v in 0..=bounds[j] {
            x[j] = v;
            // prune on the prefix
            let prefix = ((1u64 << (j + 1)) - 1) as u32;
            if (0..=prefix).filter(|s| s & !prefix == 0 && s >> j & 1 == 1).all(|s| subset_sum(x, s) <= f.rank(s)) {
                rec(j + 1, x, bounds, f, base, target, out);
            }
        }
        x[j] = 0;
    }
    rec(0, &mut x, &bounds, f, base, target, &mut out);
    Ok(out)
}

fn enumerate_flows(fs: &FlowSpace, cap: usize) -> Result<Vec<RatVec>> {
    if !fs.integral {
        return Err(Error::Unsupported("fractional flow spaces are not enumerable".into()));
    }
    let order = fs
        .graph
        .topological_order()
        .ok_or_else(|| Error::Unsupported("integral flow enumeration needs an acyclic graph".into()))?;
    let values: Vec<i64> = match &fs.value {
        FlowValue::Fixed(d) => vec![to_i64(d).ok_or_else(|| Error::Structural(format!("non-integral demand {d}")))?],
        FlowValue::UpTo(Some(c)) => {
            let c = c.floor();
            (0..=to_i64(&c).expect("floor is integral")).collect()
        }
        FlowValue::UpTo(None) => return Err(Error::Unsupported("integral flow enumeration needs a value bound".into())),
    };
    let arcs = &fs.graph.arcs;
    let out_arcs: Vec<Vec<usize>> = (0..fs.graph.nodes)
        .map(|v| (0..arcs.len()).filter(|&e| arcs[e].0 == v).collect())
        .collect();
    let mut out: Vec<Vec<i64>> = Vec::new();
    for d in values {
        if d < 0 {
            continue;
        }
        let mut x = vec![0i64; arcs.len()];
        let mut inflow = vec![0i64; fs.graph.nodes];
        flow_rec(0, &order, &out_arcs, arcs, fs, d, &mut x, &mut inflow, &mut out, cap)?;
    }
    out.sort();
    out.dedup();
    Ok(out.into_iter().map(|v| v.into_iter().map(int).collect()).collect())
}

#[allow(clippy::too_many_arguments)]
fn flow_rec(
    k: usize,
    order: &[usize],
    out_arcs: &[Vec<usize>],
    arcs: &[(usize, usize)],
    fs: &FlowSpace,
    d: i64,
    x: &mut Vec<i64>,
    inflow: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
    cap: usize,
) -> Result<()> {
    if k == order.len() {
        if out.len() >= cap {
            return Err(Error::Capacity { what: "integral flows".into(), cap });
        }
        out.push(x.clone());
        return Ok(());
    }
    let v = order[k];
    let mut avail = inflow[v];
    if v == fs.source {
        avail += d;
    }
    if v == fs.sink {
        avail -= d;
    }
    if avail < 0 {
        return Ok(());
    }
    let outs = &out_arcs[v];
    if outs.is_empty() {
        return if avail == 0 { flow_rec(k + 1, order, out_arcs, arcs, fs, d, x, inflow, out, cap) } else { Ok(()) };
    }
    let mut parts = vec![0i64; outs.len()];
    compositions(avail, &mut parts, 0, &mut |parts| {
        for (&e, &p) in outs.iter().zip(parts) {
            x[e] = p;
            inflow[arcs[e].1] += p;
        }
        let r = flow_rec(k + 1, order, out_arcs, arcs, fs, d, x, inflow, out, cap);
        for (&e, &p) in outs.iter().zip(parts) {
            x[e] = 0;
            inflow[arcs[e].1] -= p;
        }
        r
    })
}

fn compositions(total: i64, parts: &mut Vec<i64>, idx: usize, f: &mut dyn FnMut(&[i64]) -> Result<()>) -> Result<()> {
    if idx + 1 == parts.len() {
        parts[idx] = total;
        let r = f(parts);
        parts[idx] = 0;
        return r;
    }
    for v in 0..=total {
        parts[idx] = v;
        compositions(total - v, parts, idx + 1, f)?;
    }
    parts[idx] = 0;
    Ok(())
}

/// Number of joint profiles, `None` on overflow.
pub fn profile_count(lists: &[Vec<RatVec>]) -> Option<usize> {
    lists.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len()))
}
