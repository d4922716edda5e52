//! Lagrangian decomposition, duality gaps and direct verification of the
//! enforceability conditions, including the aggregative variant where a
//! deviation changes the load the deviator is charged at.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{CostModel, FlowSpace, FlowValue, Instance, StrategySpace, DEFAULT_CAP};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::polymatroid::{optimal_base, optimal_independent};
use crate::rat::{dot, fmt_vec, int, sub, Rat, RatVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Enforce,
    WeakMarket,
    Unique,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Enforce => "enforce",
            Mode::WeakMarket => "weak-market",
            Mode::Unique => "unique",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerRecord {
    /// Best achievable priced objective over the player's space.
    pub best: Rat,
    /// Priced objective of `x*_i`.
    pub achieved: Rat,
    /// Optimal points, lexicographically sorted.
    pub argmin: Vec<RatVec>,
    /// Whether `argmin` lists every optimal point (false when an LP or greedy
    /// step produced a single optimum).
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub mode: Mode,
    pub sense: Sense,
    pub x_star: Vec<RatVec>,
    pub prices: RatVec,
    pub records: Vec<PlayerRecord>,
    /// `u - ℓ(x*)` per resource.
    pub slack: RatVec,
    pub gap: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NegativePrice { resource: usize, price: Rat },
    NotInSpace { player: usize, point: RatVec },
    Tightness { resource: usize, load: Rat, target: Rat },
    Overload { resource: usize, load: Rat, target: Rat },
    PricedSlack { resource: usize, slack: Rat, price: Rat },
    Deviation { player: usize, deviation: RatVec, achieved: Rat, improved: Rat },
    NotUnique { other: Vec<RatVec> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativePrice { resource, price } => {
                write!(f, "negative price {price} on resource {resource}")
            }
            Violation::NotInSpace { player, point } => {
                write!(f, "player {player} point {} is not a strategy", fmt_vec(point))
            }
            Violation::Tightness { resource, load, target } => {
                write!(f, "tightness violated on resource {resource}: load {load} != target {target}")
            }
            Violation::Overload { resource, load, target } => {
                write!(f, "resource {resource} overloaded: load {load} > target {target}")
            }
            Violation::PricedSlack { resource, slack, price } => {
                write!(f, "resource {resource} has slack {slack} but price {price}")
            }
            Violation::Deviation { player, deviation, achieved, improved } => write!(
                f,
                "player {player} deviates to {} improving {achieved} to {improved}",
                fmt_vec(deviation)
            ),
            Violation::NotUnique { other } => {
                let parts: Vec<String> = other.iter().map(|x| fmt_vec(x)).collect();
                write!(f, "another enforced profile exists: [{}]", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Certified(Box<Certificate>),
    Refuted(Violation),
}

impl Verdict {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::Certified(c) => Some(c),
            Verdict::Refuted(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            Verdict::Certified(_) => None,
            Verdict::Refuted(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    pub value: Rat,
    pub argmin: Vec<RatVec>,
    pub exhaustive: bool,
}

/// Priced per-coordinate weights `c ± Gᵀλ` for linear cost models.
fn priced_weights(inst: &Instance, i: usize, lambda: &[Rat], coeffs: &[Rat]) -> RatVec {
    let d = coeffs.len();
    (0..d)
        .map(|k| {
            let mut e = vec![Rat::zero(); d];
            e[k] = int(1);
            let p = dot(lambda, &inst.consume(i, &e));
            match inst.sense {
                Sense::Min => &coeffs[k] + p,
                Sense::Max => &coeffs[k] - p,
            }
        })
        .collect()
}

/// Optimal priced response of player `i` at parameter `u` and prices `λ`.
///
/// Enumerable spaces are scanned exhaustively; large polymatroids with linear
/// costs use greedy; non-enumerable flow spaces solve an exact LP.
pub fn best_response(inst: &Instance, i: usize, u: &[Rat], lambda: &[Rat], cap: usize) -> Result<BestResponse> {
    let enumerated = if inst.is_enumerable(i) {
        match inst.enumerate_pure(i, cap) {
            Ok(points) => Some(points),
            Err(Error::Capacity { .. }) if polymatroid_linear(inst, i) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    if let Some(points) = enumerated {
        let mut best: Option<Rat> = None;
        let mut argmin: Vec<RatVec> = Vec::new();
        for x in points {
            let v = inst.priced(i, u, lambda, &x)?;
            match &best {
                Some(b) if inst.better(b, &v) => {}
                Some(b) if *b == v => argmin.push(x),
                _ => {
                    best = Some(v);
                    argmin = vec![x];
                }
            }
        }
        argmin.sort();
        let value = best.ok_or_else(|| Error::Structural(format!("player {i} has no strategies")))?;
        return Ok(BestResponse { value, argmin, exhaustive: true });
    }
    match &inst.spaces[i] {
        StrategySpace::PolymatroidBase(f) | StrategySpace::PolymatroidVectors(f) => {
            let coeffs = inst
                .linear_coefficients(i, u)?
                .ok_or_else(|| Error::Unsupported("large polymatroid spaces need linear costs".into()))?;
            let w = priced_weights(inst, i, lambda, &coeffs);
            let minimize = inst.sense == Sense::Min;
            let x = if matches!(inst.spaces[i], StrategySpace::PolymatroidBase(_)) {
                optimal_base(f, &w, minimize)
            } else {
                optimal_independent(f, &w, minimize)
            };
            let x: RatVec = x.into_iter().map(int).collect();
            let value = inst.priced(i, u, lambda, &x)?;
            Ok(BestResponse { value, argmin: vec![x], exhaustive: false })
        }
        StrategySpace::FlowPolytope(fs) => {
            let (value, x) = flow_best_response(inst, i, fs, u, lambda)?;
            Ok(BestResponse { value, argmin: vec![x], exhaustive: false })
        }
        _ => unreachable!("finite spaces are always enumerable"),
    }
}

fn polymatroid_linear(inst: &Instance, i: usize) -> bool {
    matches!(inst.spaces[i], StrategySpace::PolymatroidBase(_) | StrategySpace::PolymatroidVectors(_))
        && matches!(inst.costs[i], CostModel::PerResourceLinear(_))
}

/// LP over the flow polytope; piecewise-linear concave utilities of the flow
/// value enter through an epigraph variable.
fn flow_best_response(inst: &Instance, i: usize, fs: &FlowSpace, u: &[Rat], lambda: &[Rat]) -> Result<(Rat, RatVec)> {
    let arcs = fs.graph.arcs.len();
    let zero_coeffs = vec![Rat::zero(); arcs];
    let (coeffs, utility) = match &inst.costs[i] {
        CostModel::PerResourceLinear(_) => (inst.linear_coefficients(i, u)?.expect("linear"), None),
        CostModel::FlowValueUtility(util) => (zero_coeffs, Some(util.pieces()?)),
        _ => return Err(Error::Unsupported(format!("player {i}: flow spaces need linear or flow-value costs"))),
    };
    if fs.integral && !(utility.is_none() || matches!(inst.costs[i], CostModel::FlowValueUtility(crate::game::Utility::Linear(_)))) {
        return Err(Error::Unsupported(format!(
            "player {i}: integral flow space is not enumerable and its utility is not linear"
        )));
    }
    let w = priced_weights(inst, i, lambda, &coeffs);
    let mut objective = w;
    if utility.is_some() {
        objective.push(int(1));
    }
    let mut p = LpProblem::new(inst.sense, objective);
    let t = utility.as_ref().map(|_| {
        p.set_bounds(arcs, None, None);
        arcs
    });
    let net = |node: usize| -> Vec<(usize, Rat)> {
        fs.graph
            .arcs
            .iter()
            .enumerate()
            .filter_map(|(e, &(a, b))| match (a == node, b == node) {
                (true, false) => Some((e, int(1))),
                (false, true) => Some((e, int(-1))),
                _ => None,
            })
            .collect()
    };
    add_flow_rows(&mut p, fs, 0);
    if let (Some(pieces), Some(t)) = (&utility, t) {
        for (a, b) in pieces {
            // t - b * val <= a
            let mut terms: Vec<(usize, Rat)> = net(fs.source).into_iter().map(|(e, c)| (e, -(c * b))).collect();
            terms.push((t, int(1)));
            p.add_sparse_row(&terms, RowKind::Le, a.clone());
        }
    }
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Optimal => {
            let x: RatVec = sol.primal[..arcs].to_vec();
            let value = inst.priced(i, u, lambda, &x)?;
            Ok((value, x))
        }
        LpStatus::Unbounded => Err(Error::Unbounded(format!("player {i} best response is unbounded"))),
        LpStatus::Infeasible => Err(Error::Structural(format!("player {i} flow space is empty"))),
    }
}

/// Lagrangian dual `Σ_i min {π_i + λ·g_i} − λ·u` (mirrored for max games).
pub fn dual_value(inst: &Instance, lambda: &[Rat]) -> Result<Rat> {
    dual_value_capped(inst, lambda, DEFAULT_CAP)
}

pub fn dual_value_capped(inst: &Instance, lambda: &[Rat], cap: usize) -> Result<Rat> {
    check_price_len(inst, lambda)?;
    let mut total = Rat::zero();
    for i in 0..inst.n() {
        total += best_response(inst, i, &inst.target, lambda, cap)?.value;
    }
    let lu = dot(lambda, &inst.target);
    Ok(match inst.sense {
        Sense::Min => total - lu,
        Sense::Max => total + lu,
    })
}

fn check_price_len(inst: &Instance, lambda: &[Rat]) -> Result<()> {
    if lambda.len() != inst.m {
        return Err(Error::Dimension(format!("{} prices for {} resources", lambda.len(), inst.m)));
    }
    Ok(())
}

/// Total cost (or utility) of a profile at the target.
pub fn social_value(inst: &Instance, x: &[RatVec]) -> Result<Rat> {
    let mut total = Rat::zero();
    for (i, xi) in x.iter().enumerate() {
        total += inst.cost(i, &inst.target, xi)?;
    }
    Ok(total)
}

/// `π(x*) − dual(λ)` for min games, `dual(λ) − v(x*)` for max games.
pub fn duality_gap(inst: &Instance, x_star: &[RatVec], lambda: &[Rat]) -> Result<Rat> {
    inst.load(x_star)?;
    let primal = social_value(inst, x_star)?;
    let dual = dual_value(inst, lambda)?;
    Ok(match inst.sense {
        Sense::Min => primal - dual,
        Sense::Max => dual - primal,
    })
}

fn is_aggregative(inst: &Instance, i: usize) -> bool {
    matches!(inst.costs[i], CostModel::AggregativeTabulated(_))
}

/// Best response where each deviation is charged at the load it induces.
fn aggregative_response(inst: &Instance, i: usize, x_star: &[RatVec], lambda: &[Rat], cap: usize) -> Result<BestResponse> {
    let mut best: Option<Rat> = None;
    let mut argmin: Vec<RatVec> = Vec::new();
    for y in inst.enumerate_pure(i, cap)? {
        let mut profile = x_star.to_vec();
        profile[i] = y.clone();
        let w = inst.load(&profile)?;
        let v = inst.priced(i, &w, lambda, &y)?;
        match &best {
            Some(b) if inst.better(b, &v) => {}
            Some(b) if *b == v => argmin.push(y),
            _ => {
                best = Some(v);
                argmin = vec![y];
            }
        }
    }
    argmin.sort();
    let value = best.ok_or_else(|| Error::Structural(format!("player {i} has no strategies")))?;
    Ok(BestResponse { value, argmin, exhaustive: true })
}

/// Lexicographically first strictly improving deviation, for enumerable spaces.
fn first_improvement(
    inst: &Instance,
    i: usize,
    x_star: &[RatVec],
    lambda: &[Rat],
    achieved: &Rat,
    cap: usize,
) -> Result<Option<(RatVec, Rat)>> {
    let mut points = inst.enumerate_pure(i, cap)?;
    points.sort();
    for y in points {
        let v = if is_aggregative(inst, i) {
            let mut profile = x_star.to_vec();
            profile[i] = y.clone();
            inst.priced(i, &inst.load(&profile)?, lambda, &y)?
        } else {
            inst.priced(i, &inst.target, lambda, &y)?
        };
        if inst.better(&v, achieved) {
            return Ok(Some((y, v)));
        }
    }
    Ok(None)
}

/// Verifies that `(x*, λ)` enforces the target under `mode`.
///
/// Players with aggregative cost tables are checked with the deviation load
/// `ℓ(y_i, x*_{-i})` recomputed per deviation.
pub fn check_enforceable(inst: &Instance, x_star: &[RatVec], lambda: &[Rat], mode: Mode) -> Result<Verdict> {
    check_enforceable_capped(inst, x_star, lambda, mode, DEFAULT_CAP)
}

pub fn check_enforceable_capped(
    inst: &Instance,
    x_star: &[RatVec],
    lambda: &[Rat],
    mode: Mode,
    cap: usize,
) -> Result<Verdict> {
    check_price_len(inst, lambda)?;
    let load = inst.load(x_star)?;
    if let Some((j, p)) = lambda.iter().enumerate().find(|(_, p)| p.is_negative()) {
        return Ok(Verdict::Refuted(Violation::NegativePrice { resource: j, price: p.clone() }));
    }
    for (i, x) in x_star.iter().enumerate() {
        if !inst.spaces[i].contains(x) {
            return Ok(Verdict::Refuted(Violation::NotInSpace { player: i, point: x.clone() }));
        }
    }
    let slack = sub(&inst.target, &load);
    if let Some(v) = load_violation(inst, &load, &slack, lambda, mode) {
        return Ok(Verdict::Refuted(v));
    }

    let mut records = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let (achieved, br) = if is_aggregative(inst, i) {
            (inst.priced(i, &load, lambda, &x_star[i])?, aggregative_response(inst, i, x_star, lambda, cap)?)
        } else {
            (inst.priced(i, &inst.target, lambda, &x_star[i])?, best_response(inst, i, &inst.target, lambda, cap)?)
        };
        if inst.better(&br.value, &achieved) {
            let (deviation, improved) = if br.exhaustive {
                first_improvement(inst, i, x_star, lambda, &achieved, cap)?
                    .expect("an improving point exists when the optimum beats x*")
            } else {
                (br.argmin[0].clone(), br.value.clone())
            };
            return Ok(Verdict::Refuted(Violation::Deviation { player: i, deviation, achieved, improved }));
        }
        records.push(PlayerRecord { best: br.value, achieved, argmin: br.argmin, exhaustive: br.exhaustive });
    }

    if mode == Mode::Unique {
        if let Some(other) = other_enforced_profile(inst, x_star, &records, cap)? {
            return Ok(Verdict::Refuted(Violation::NotUnique { other }));
        }
    }

    let gap = if (0..inst.n()).any(|i| is_aggregative(inst, i)) {
        Rat::zero()
    } else {
        let primal = social_value(inst, x_star)?;
        let mut dual: Rat = records.iter().map(|r| r.best.clone()).sum();
        let lu = dot(lambda, &inst.target);
        dual = match inst.sense {
            Sense::Min => dual - lu,
            Sense::Max => dual + lu,
        };
        match inst.sense {
            Sense::Min => primal - dual,
            Sense::Max => dual - primal,
        }
    };
    if !gap.is_zero() {
        return Err(Error::TheoremContradiction(format!(
            "verified equilibrium with complementary prices has duality gap {gap}"
        )));
    }

    Ok(Verdict::Certified(Box::new(Certificate {
        mode,
        sense: inst.sense,
        x_star: x_star.to_vec(),
        prices: lambda.to_vec(),
        records,
        slack,
        gap,
    })))
}

fn load_violation(inst: &Instance, load: &[Rat], slack: &[Rat], lambda: &[Rat], mode: Mode) -> Option<Violation> {
    for j in 0..inst.m {
        match mode {
            Mode::Enforce | Mode::Unique => {
                if !slack[j].is_zero() {
                    return Some(Violation::Tightness { resource: j, load: load[j].clone(), target: inst.target[j].clone() });
                }
            }
            Mode::WeakMarket => {
                if slack[j].is_negative() {
                    return Some(Violation::Overload { resource: j, load: load[j].clone(), target: inst.target[j].clone() });
                }
                if slack[j].is_positive() && !lambda[j].is_zero() {
                    return Some(Violation::PricedSlack { resource: j, slack: slack[j].clone(), price: lambda[j].clone() });
                }
            }
        }
    }
    None
}

/// Another profile of best responses with load exactly `u`, if any.
fn other_enforced_profile(inst: &Instance, x_star: &[RatVec], records: &[PlayerRecord], cap: usize) -> Result<Option<Vec<RatVec>>> {
    if records.iter().any(|r| !r.exhaustive) || (0..inst.n()).any(|i| is_aggregative(inst, i)) {
        return Err(Error::Unsupported("uniqueness needs exhaustive best-response sets at the target load".into()));
    }
    let lists: Vec<Vec<RatVec>> = records.iter().map(|r| r.argmin.clone()).collect();
    let mut found = None;
    for_each_profile(&lists, cap, &mut |profile: &[&RatVec]| {
        let owned: Vec<RatVec> = profile.iter().map(|x| (*x).clone()).collect();
        if owned.as_slice() != x_star && inst.load(&owned).expect("dimensions checked") == inst.target {
            found = Some(owned);
            return false;
        }
        true
    })?;
    Ok(found)
}

/// Visits the cartesian product in lexicographic index order; the callback
/// returns `false` to stop early.
pub fn for_each_profile<'a>(lists: &'a [Vec<RatVec>], cap: usize, f: &mut dyn FnMut(&[&'a RatVec]) -> bool) -> Result<()> {
    let count = crate::game::profile_count(lists);
    if count.is_none_or(|c| c > cap) {
        return Err(Error::Capacity { what: "joint profile set".into(), cap });
    }
    if lists.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let n = lists.len();
    let mut idx = vec![0usize; n];
    let mut current: Vec<&RatVec> = lists.iter().map(|l| &l[0]).collect();
    loop {
        if !f(&current) {
            return Ok(());
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                current[k] = &lists[k][idx[k]];
                break;
            }
            idx[k] = 0;
            current[k] = &lists[k][0];
        }
    }
}

/// Load-dominance minimality: no feasible profile has `ℓ(x) ≤ u` with `ℓ(x) ≠ u`.
pub fn check_minimal(inst: &Instance, u: &[Rat]) -> Result<bool> {
    check_minimal_capped(inst, u, DEFAULT_CAP)
}

pub fn check_minimal_capped(inst: &Instance, u: &[Rat], cap: usize) -> Result<bool> {
    if u.len() != inst.m {
        return Err(Error::Dimension(format!("u has length {}, expected {}", u.len(), inst.m)));
    }
    if (0..inst.n()).all(|i| inst.is_enumerable(i)) {
        let lists: Vec<Vec<RatVec>> = (0..inst.n()).map(|i| inst.enumerate_pure(i, cap)).collect::<Result<_>>()?;
        let mut dominated = false;
        for_each_profile(&lists, cap, &mut |profile: &[&RatVec]| {
            let owned: Vec<RatVec> = profile.iter().map(|x| (*x).clone()).collect();
            let l = inst.load(&owned).expect("dimensions checked");
            if crate::rat::leq(&l, u) && l.as_slice() != u {
                dominated = true;
                return false;
            }
            true
        })?;
        return Ok(!dominated);
    }
    minimal_by_lp(inst, u)
}

/// Fractional flow games: minimize the total load subject to `ℓ ≤ u`.
fn minimal_by_lp(inst: &Instance, u: &[Rat]) -> Result<bool> {
    let mut offsets = Vec::new();
    let mut nvars = 0;
    for i in 0..inst.n() {
        match &inst.spaces[i] {
            StrategySpace::FlowPolytope(fs) if !fs.integral => {
                offsets.push(nvars);
                nvars += fs.graph.arcs.len();
            }
            _ => {
                return Err(Error::Unsupported(
                    "minimality for mixed spaces needs every space enumerable or a fractional flow".into(),
                ))
            }
        }
    }
    let mut total = vec![Rat::zero(); nvars];
    let mut load_rows = vec![vec![Rat::zero(); nvars]; inst.m];
    for i in 0..inst.n() {
        let d = inst.dim(i);
        for k in 0..d {
            let mut e = vec![Rat::zero(); d];
            e[k] = int(1);
            let g = inst.consume(i, &e);
            for j in 0..inst.m {
                load_rows[j][offsets[i] + k] = g[j].clone();
                total[offsets[i] + k] += &g[j];
            }
        }
    }
    let mut p = LpProblem::new(Sense::Min, total);
    for (j, row) in load_rows.into_iter().enumerate() {
        p.add_row(row, RowKind::Le, u[j].clone());
    }
    for i in 0..inst.n() {
        if let StrategySpace::FlowPolytope(fs) = &inst.spaces[i] {
            add_flow_rows(&mut p, fs, offsets[i]);
        }
    }
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Infeasible => Ok(true),
        LpStatus::Unbounded => Ok(false),
        LpStatus::Optimal => Ok(sol.value == u.iter().sum::<Rat>()),
    }
}

/// Conservation and value rows for a flow block starting at column `offset`.
pub fn add_flow_rows(p: &mut LpProblem, fs: &FlowSpace, offset: usize) {
    let net = |node: usize| -> Vec<(usize, Rat)> {
        fs.graph
            .arcs
            .iter()
            .enumerate()
            .filter_map(|(e, &(a, b))| match (a == node, b == node) {
                (true, false) => Some((offset + e, int(1))),
                (false, true) => Some((offset + e, int(-1))),
                _ => None,
            })
            .collect()
    };
    for v in 0..fs.graph.nodes {
        if v != fs.source && v != fs.sink {
            p.add_sparse_row(&net(v), RowKind::Eq, Rat::zero());
        }
    }
    match &fs.value {
        FlowValue::Fixed(d) => {
            p.add_sparse_row(&net(fs.source), RowKind::Eq, d.clone());
        }
        FlowValue::UpTo(cap) => {
            p.add_sparse_row(&net(fs.source), RowKind::Ge, Rat::zero());
            if let Some(c) = cap {
                p.add_sparse_row(&net(fs.source), RowKind::Le, c.clone());
            }
        }
    }
}
