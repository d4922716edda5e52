//! Convex envelopes, the configuration (master) LP over strategy points, its
//! solution by full enumeration or column generation, and the integral-optimum
//! search that decides enforceability.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::duality::{check_enforceable_capped, Certificate, Mode, Verdict, Violation};
use crate::error::{Error, Result};
use crate::game::{enumerate_space, profile_count, Instance, StrategySpace, DEFAULT_CAP};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::rat::{add_into, dot, fmt_vec, int, is_integer, Rat, RatVec};

/// `min/max Σ π_i·α_i` s.t. `ℓ(α) ≤ u`, `1·α_i = 1`, `α ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterLp {
    pub sense: Sense,
    pub target: RatVec,
    /// Strategy points per player (the columns).
    pub points: Vec<Vec<RatVec>>,
    /// Cost (or utility) of each point at the target.
    pub costs: Vec<RatVec>,
    /// `g_i(x_ik)` for each point.
    pub loads: Vec<Vec<RatVec>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterSolution {
    pub sense: Sense,
    pub columns: Vec<Vec<RatVec>>,
    pub alpha: Vec<RatVec>,
    pub value: Rat,
    /// Prices on the coupling rows, always `≥ 0`.
    pub lambda: RatVec,
    /// `min_k π_ik + λ·g_ik` (min) or `max_k v_ik − λ·g_ik` (max) at optimum.
    pub mu: RatVec,
    /// Basic master columns as `(player, point index)`.
    pub basis: BTreeSet<(usize, usize)>,
}

impl MasterSolution {
    /// `Σ μ_i − λ·u` (min) or `Σ μ_i + λ·u` (max).
    pub fn dual_objective(&self, target: &[Rat]) -> Rat {
        let mu: Rat = self.mu.iter().sum();
        let lu = dot(&self.lambda, target);
        match self.sense {
            Sense::Min => mu - lu,
            Sense::Max => mu + lu,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.alpha.iter().all(|a| lp::is_integral(a))
    }
}

impl MasterLp {
    pub fn num_columns(&self) -> usize {
        self.points.iter().map(Vec::len).sum()
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        self.target.len()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.points
            .iter()
            .map(|p| {
                let o = acc;
                acc += p.len();
                o
            })
            .collect()
    }

    /// Coupling rows first, then one convexity row per player.
    pub fn to_lp(&self) -> LpProblem {
        let offsets = self.offsets();
        let objective: RatVec = self.costs.iter().flatten().cloned().collect();
        let total = objective.len();
        let mut p = LpProblem::new(self.sense, objective);
        for j in 0..self.m() {
            let mut row = vec![Rat::zero(); total];
            for (i, loads) in self.loads.iter().enumerate() {
                for (k, g) in loads.iter().enumerate() {
                    row[offsets[i] + k] = g[j].clone();
                }
            }
            p.add_row(row, RowKind::Le, self.target[j].clone());
        }
        for (i, pts) in self.points.iter().enumerate() {
            let terms: Vec<(usize, Rat)> = (0..pts.len()).map(|k| (offsets[i] + k, int(1))).collect();
            p.add_sparse_row(&terms, RowKind::Eq, int(1));
        }
        p
    }

    /// Lagrangian of the master at `λ`: `Σ_i min_k (π_ik + λ·g_ik) − λ·u`.
    pub fn lagrangian(&self, lambda: &[Rat]) -> Rat {
        let mut total = Rat::zero();
        for i in 0..self.n() {
            let vals = self.costs[i].iter().zip(&self.loads[i]).map(|(c, g)| match self.sense {
                Sense::Min => c + dot(lambda, g),
                Sense::Max => c - dot(lambda, g),
            });
            let best = match self.sense {
                Sense::Min => vals.min(),
                Sense::Max => vals.max(),
            };
            total += best.expect("every player has a column");
        }
        let lu = dot(lambda, &self.target);
        match self.sense {
            Sense::Min => total - lu,
            Sense::Max => total + lu,
        }
    }
}

/// Strategy points used as master columns for player `i`.
fn master_points(inst: &Instance, i: usize, cap: usize) -> Result<Vec<RatVec>> {
    match &inst.spaces[i] {
        StrategySpace::FlowPolytope(fs) if !fs.integral => Err(Error::Unsupported(format!(
            "player {i}: fractional flow spaces go through the flow LP, not the master"
        ))),
        space => enumerate_space(space, cap),
    }
}

pub fn build_master(inst: &Instance) -> Result<MasterLp> {
    build_master_capped(inst, DEFAULT_CAP)
}

pub fn build_master_capped(inst: &Instance, cap: usize) -> Result<MasterLp> {
    let mut points = Vec::with_capacity(inst.n());
    let mut costs = Vec::with_capacity(inst.n());
    let mut loads = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let pts = master_points(inst, i, cap)?;
        costs.push(pts.iter().map(|x| inst.cost(i, &inst.target, x)).collect::<Result<RatVec>>()?);
        loads.push(pts.iter().map(|x| inst.consume(i, x)).collect());
        points.push(pts);
    }
    Ok(MasterLp { sense: inst.sense, target: inst.target.clone(), points, costs, loads })
}

pub fn solve_master(master: &MasterLp) -> Result<MasterSolution> {
    let p = master.to_lp();
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Infeasible => return Err(Error::NotAchievable),
        LpStatus::Unbounded => return Err(Error::Structural("master LP is unbounded".into())),
        LpStatus::Optimal => {}
    }
    let m = master.m();
    let lambda: RatVec = sol.dual[..m]
        .iter()
        .map(|y| match master.sense {
            Sense::Min => -y.clone(),
            Sense::Max => y.clone(),
        })
        .collect();
    let mu = sol.dual[m..].to_vec();
    let offsets = master.offsets();
    let alpha: Vec<RatVec> = master
        .points
        .iter()
        .enumerate()
        .map(|(i, pts)| sol.primal[offsets[i]..offsets[i] + pts.len()].to_vec())
        .collect();
    let basis = sol
        .basis
        .iter()
        .map(|&c| {
            let i = offsets.iter().rposition(|&o| o <= c).expect("offset 0 exists");
            (i, c - offsets[i])
        })
        .collect();
    let out = MasterSolution {
        sense: master.sense,
        columns: master.points.clone(),
        alpha,
        value: sol.value,
        lambda,
        mu,
        basis,
    };
    debug_assert_eq!(out.dual_objective(&master.target), out.value);
    Ok(out)
}

/// Exact envelope `min {π_i·α : 𝒳_i α = x, α ∈ Λ_i}` over the player's points
/// (the concave upper envelope for maximization games).
pub fn envelope_value(inst: &Instance, i: usize, x: &[Rat]) -> Result<Rat> {
    let pts = master_points(inst, i, DEFAULT_CAP)?;
    let d = inst.dim(i);
    if x.len() != d {
        return Err(Error::Dimension(format!("point has length {}, expected {d}", x.len())));
    }
    let costs: RatVec = pts.iter().map(|p| inst.cost(i, &inst.target, p)).collect::<Result<_>>()?;
    envelope_lp(inst.sense, &pts, &costs, x)
}

/// Envelope LP over explicit points and values.
pub fn envelope_lp(sense: Sense, pts: &[RatVec], costs: &[Rat], x: &[Rat]) -> Result<Rat> {
    let mut p = LpProblem::new(sense, costs.to_vec());
    for (c, xc) in x.iter().enumerate() {
        let row: RatVec = pts.iter().map(|q| q[c].clone()).collect();
        p.add_row(row, RowKind::Eq, xc.clone());
    }
    p.add_row(vec![int(1); pts.len()], RowKind::Eq, int(1));
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        LpStatus::Infeasible => Err(Error::OutsideHull),
        LpStatus::Unbounded => Err(Error::Structural("envelope LP is unbounded".into())),
    }
}

/// Pricing oracle: a point optimizing `w·π_i(u, x) ± λ·g_i(x)` over space `i`,
/// minimizing for min games and maximizing for max games.
pub trait DemandOracle {
    fn demand(&self, player: usize, lambda: &[Rat], cost_weight: &Rat) -> Result<(RatVec, Rat)>;
}

/// Scans explicitly enumerated spaces; ties go to the lexicographically smallest point.
pub struct EnumerationOracle<'a> {
    inst: &'a Instance,
    lists: Vec<Vec<RatVec>>,
}

impl<'a> EnumerationOracle<'a> {
    pub fn new(inst: &'a Instance) -> Result<Self> {
        let lists = (0..inst.n())
            .map(|i| {
                let mut l = master_points(inst, i, DEFAULT_CAP)?;
                l.sort();
                Ok(l)
            })
            .collect::<Result<_>>()?;
        Ok(EnumerationOracle { inst, lists })
    }
}

fn weighted_priced(inst: &Instance, i: usize, lambda: &[Rat], w: &Rat, x: &[Rat]) -> Result<Rat> {
    let c = inst.cost(i, &inst.target, x)? * w;
    let p = dot(lambda, &inst.consume(i, x));
    Ok(match inst.sense {
        Sense::Min => c + p,
        Sense::Max => c - p,
    })
}

impl DemandOracle for EnumerationOracle<'_> {
    fn demand(&self, player: usize, lambda: &[Rat], cost_weight: &Rat) -> Result<(RatVec, Rat)> {
        let mut best: Option<(RatVec, Rat)> = None;
        for x in &self.lists[player] {
            let v = weighted_priced(self.inst, player, lambda, cost_weight, x)?;
            if best.as_ref().is_none_or(|(_, b)| self.inst.better(&v, b)) {
                best = Some((x.clone(), v));
            }
        }
        best.ok_or_else(|| Error::Structural(format!("player {player} has no strategies")))
    }
}

/// Column generation from one oracle point per player.
///
/// Phase one adds an artificial overflow column per coupling row and drives
/// it to zero; phase two prices with the true costs. Both phases stop when
/// no column has an improving reduced cost `w·π_ik ± λ·g_ik − μ_i`.
pub fn solve_master_cg(inst: &Instance, oracle: &dyn DemandOracle) -> Result<MasterSolution> {
    let n = inst.n();
    let m = inst.m;
    let zero_prices = vec![Rat::zero(); m];
    let mut columns: Vec<Vec<RatVec>> = Vec::with_capacity(n);
    for i in 0..n {
        let (x, v) = oracle.demand(i, &zero_prices, &int(1))?;
        validate_demand(inst, i, &zero_prices, &int(1), &x, &v)?;
        columns.push(vec![x]);
    }

    // phase one
    loop {
        let restricted = restricted_master(inst, &columns)?;
        let mut p = restricted.to_lp();
        let penalty = match inst.sense {
            Sense::Min => int(1),
            Sense::Max => int(-1),
        };
        for obj in p.objective.iter_mut() {
            *obj = Rat::zero();
        }
        for j in 0..m {
            let col = p.add_var(penalty.clone());
            p.rows[j][col] = int(-1);
        }
        let sol = lp::solve(&p)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Structural("phase-one master is not optimal".into()));
        }
        if sol.value.is_zero() {
            break;
        }
        let (lambda, mu) = split_duals(inst.sense, &sol.dual, m);
        let mut added = false;
        for i in 0..n {
            let (x, v) = oracle.demand(i, &lambda, &Rat::zero())?;
            validate_demand(inst, i, &lambda, &Rat::zero(), &x, &v)?;
            if improves(inst.sense, &v, &mu[i]) && !columns[i].contains(&x) {
                columns[i].push(x);
                added = true;
            }
        }
        if !added {
            return Err(Error::NotAchievable);
        }
    }

    // phase two
    loop {
        let restricted = restricted_master(inst, &columns)?;
        let sol = solve_master(&restricted)?;
        let mut added = false;
        for i in 0..n {
            let (x, v) = oracle.demand(i, &sol.lambda, &int(1))?;
            validate_demand(inst, i, &sol.lambda, &int(1), &x, &v)?;
            if improves(inst.sense, &v, &sol.mu[i]) && !columns[i].contains(&x) {
                columns[i].push(x);
                added = true;
            }
        }
        if !added {
            return Ok(sol);
        }
    }
}

fn improves(sense: Sense, v: &Rat, mu: &Rat) -> bool {
    match sense {
        Sense::Min => v < mu,
        Sense::Max => v > mu,
    }
}

fn split_duals(sense: Sense, dual: &[Rat], m: usize) -> (RatVec, RatVec) {
    let lambda = dual[..m]
        .iter()
        .map(|y| match sense {
            Sense::Min => -y.clone(),
            Sense::Max => y.clone(),
        })
        .collect();
    (lambda, dual[m..].to_vec())
}

fn validate_demand(inst: &Instance, i: usize, lambda: &[Rat], w: &Rat, x: &[Rat], v: &Rat) -> Result<()> {
    if x.len() != inst.dim(i) || !inst.spaces[i].contains(x) {
        return Err(Error::OracleViolation(format!("player {i}: {} is not a strategy", fmt_vec(x))));
    }
    let expected = weighted_priced(inst, i, lambda, w, x)?;
    if &expected != v {
        return Err(Error::OracleViolation(format!(
            "player {i}: reported value {v} but {} evaluates to {expected}",
            fmt_vec(x)
        )));
    }
    Ok(())
}

fn restricted_master(inst: &Instance, columns: &[Vec<RatVec>]) -> Result<MasterLp> {
    let mut costs = Vec::with_capacity(columns.len());
    let mut loads = Vec::with_capacity(columns.len());
    for (i, pts) in columns.iter().enumerate() {
        costs.push(pts.iter().map(|x| inst.cost(i, &inst.target, x)).collect::<Result<RatVec>>()?);
        loads.push(pts.iter().map(|x| inst.consume(i, x)).collect());
    }
    Ok(MasterLp { sense: inst.sense, target: inst.target.clone(), points: columns.to_vec(), costs, loads })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessReason {
    /// No feasible pure profile attains the master optimum.
    NoIntegralOptimum,
    /// Pure optima exist, but none meets the mode's load condition.
    NoTightOptimum,
    /// More than one enforced profile exists.
    NotUnique,
}

/// A fractional master optimum together with the exhausted pure-profile search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalWitness {
    pub reason: WitnessReason,
    pub master: MasterSolution,
    pub profiles_searched: usize,
    pub feasible_profiles: usize,
    pub optimal_profiles: usize,
    /// Best objective over feasible pure profiles, if any is feasible.
    pub best_integral_value: Option<Rat>,
    /// A bounded sample of rejected optimal profiles with the reason.
    pub rejected: Vec<(Vec<RatVec>, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Certificate { certificate: Box<Certificate>, master: MasterSolution },
    FractionalWitness(Box<FractionalWitness>),
    Infeasible,
    Undecided(String),
}

impl Outcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Outcome::Certificate { certificate, .. } => Some(certificate),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&FractionalWitness> {
        match self {
            Outcome::FractionalWitness(w) => Some(w),
            _ => None,
        }
    }

    pub fn master(&self) -> Option<&MasterSolution> {
        match self {
            Outcome::Certificate { master, .. } => Some(master),
            Outcome::FractionalWitness(w) => Some(&w.master),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Certificate { .. } => "certificate",
            Outcome::FractionalWitness(_) => "fractional-witness",
            Outcome::Infeasible => "infeasible",
            Outcome::Undecided(_) => "undecided",
        }
    }
}

const REJECTED_SAMPLE: usize = 32;

pub fn enforce(inst: &Instance, mode: Mode) -> Result<Outcome> {
    enforce_capped(inst, mode, DEFAULT_CAP)
}

/// Solves the master and searches every pure profile over the master columns
/// for one that attains the optimum and meets the mode's load condition.
pub fn enforce_capped(inst: &Instance, mode: Mode, cap: usize) -> Result<Outcome> {
    let master = match build_master_capped(inst, cap) {
        Ok(mst) => mst,
        Err(Error::Capacity { what, cap }) => return Ok(Outcome::Undecided(format!("{what} exceeds {cap}"))),
        Err(e) => return Err(e),
    };
    let sol = match solve_master(&master) {
        Ok(s) => s,
        Err(Error::NotAchievable) => return Ok(Outcome::Infeasible),
        Err(e) => return Err(e),
    };
    if profile_count(&master.points).is_none_or(|c| c > cap) {
        return Ok(Outcome::Undecided(format!("more than {cap} pure profiles")));
    }

    let search = search_profiles(&master, &sol, mode);
    let mut rejected = search.rejected;
    let mut saw_not_unique = false;
    for cand in &search.candidates {
        match certify(inst, cand, &sol.lambda, mode, cap)? {
            Verdict::Certified(c) => return Ok(Outcome::Certificate { certificate: c, master: sol }),
            Verdict::Refuted(v @ Violation::NotUnique { .. }) => {
                saw_not_unique = true;
                push_rejected(&mut rejected, cand, v.to_string());
            }
            Verdict::Refuted(v) => {
                if let Some(alt) = alternate_dual(&master, &sol)? {
                    if let Verdict::Certified(c) = certify(inst, cand, &alt, mode, cap)? {
                        return Ok(Outcome::Certificate { certificate: c, master: sol });
                    }
                }
                return Err(Error::TheoremContradiction(format!(
                    "optimal pure profile [{}] fails with optimal duals: {v}",
                    cand.iter().map(|x| fmt_vec(x)).collect::<Vec<_>>().join(", ")
                )));
            }
        }
    }
    let reason = if saw_not_unique || (mode == Mode::Unique && search.candidates.len() > 1) {
        WitnessReason::NotUnique
    } else if search.optimal == 0 {
        WitnessReason::NoIntegralOptimum
    } else {
        WitnessReason::NoTightOptimum
    };
    Ok(Outcome::FractionalWitness(Box::new(FractionalWitness {
        reason,
        master: sol,
        profiles_searched: search.searched,
        feasible_profiles: search.feasible,
        optimal_profiles: search.optimal,
        best_integral_value: search.best,
        rejected,
    })))
}

fn certify(inst: &Instance, x: &[RatVec], lambda: &[Rat], mode: Mode, cap: usize) -> Result<Verdict> {
    check_enforceable_capped(inst, x, lambda, mode, cap)
}

fn push_rejected(rejected: &mut Vec<(Vec<RatVec>, String)>, x: &[RatVec], why: String) {
    if rejected.len() < REJECTED_SAMPLE {
        rejected.push((x.to_vec(), why));
    }
}

struct Search {
    searched: usize,
    feasible: usize,
    optimal: usize,
    best: Option<Rat>,
    candidates: Vec<Vec<RatVec>>,
    rejected: Vec<(Vec<RatVec>, String)>,
}

/// Depth-first over all pure profiles with incremental load and objective.
fn search_profiles(master: &MasterLp, sol: &MasterSolution, mode: Mode) -> Search {
    let mut s = Search { searched: 0, feasible: 0, optimal: 0, best: None, candidates: Vec::new(), rejected: Vec::new() };
    // Unique mode only needs to know whether a second candidate exists.
    let limit = if mode == Mode::Unique { 2 } else { 1 };
    let mut load = vec![Rat::zero(); master.m()];
    let mut choice = Vec::with_capacity(master.n());
    dfs(master, sol, mode, limit, 0, &mut load, &Rat::zero(), &mut choice, &mut s);
    s
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    master: &MasterLp,
    sol: &MasterSolution,
    mode: Mode,
    limit: usize,
    i: usize,
    load: &mut RatVec,
    value: &Rat,
    choice: &mut Vec<usize>,
    s: &mut Search,
) {
    if i == master.n() {
        s.searched += 1;
        if !crate::rat::leq(load, &master.target) {
            return;
        }
        s.feasible += 1;
        let improves = s.best.as_ref().is_none_or(|b| match master.sense {
            Sense::Min => value < b,
            Sense::Max => value > b,
        });
        if improves {
            s.best = Some(value.clone());
        }
        if value != &sol.value {
            return;
        }
        s.optimal += 1;
        let profile: Vec<RatVec> = choice.iter().enumerate().map(|(p, &k)| master.points[p][k].clone()).collect();
        let ok = match mode {
            Mode::Enforce | Mode::Unique => load == &master.target,
            Mode::WeakMarket => (0..master.m()).all(|j| (&master.target[j] - &load[j]).is_zero() || sol.lambda[j].is_zero()),
        };
        if ok {
            if s.candidates.len() < limit {
                s.candidates.push(profile);
            }
        } else {
            let why = match mode {
                Mode::WeakMarket => "priced resource with slack".to_string(),
                _ => format!("load {} differs from target", fmt_vec(load)),
            };
            push_rejected(&mut s.rejected, &profile, why);
        }
        return;
    }
    for k in 0..master.points[i].len() {
        add_into(load, &master.loads[i][k]);
        let v = value + &master.costs[i][k];
        choice.push(k);
        dfs(master, sol, mode, limit, i + 1, load, &v, choice, s);
        choice.pop();
        for (l, g) in load.iter_mut().zip(&master.loads[i][k]) {
            *l -= g;
        }
    }
}

/// An optimal dual minimizing `Σ λ`, used when the basic dual fails to certify.
pub fn alternate_dual(master: &MasterLp, sol: &MasterSolution) -> Result<Option<RatVec>> {
    let m = master.m();
    let n = master.n();
    // variables: λ (m, ≥ 0), μ (n, free)
    let mut objective = vec![int(1); m];
    objective.extend(vec![Rat::zero(); n]);
    let mut p = LpProblem::new(Sense::Min, objective);
    for i in 0..n {
        p.set_bounds(m + i, None, None);
    }
    for i in 0..n {
        for (c, g) in master.costs[i].iter().zip(&master.loads[i]) {
            let mut row = vec![Rat::zero(); m + n];
            match master.sense {
                // μ_i − λ·g ≤ π
                Sense::Min => {
                    for j in 0..m {
                        row[j] = -g[j].clone();
                    }
                    row[m + i] = int(1);
                    p.add_row(row, RowKind::Le, c.clone());
                }
                // μ_i + λ·g ≥ v
                Sense::Max => {
                    row[..m].clone_from_slice(g);
                    row[m + i] = int(1);
                    p.add_row(row, RowKind::Ge, c.clone());
                }
            }
        }
    }
    let mut row = vec![Rat::zero(); m + n];
    for j in 0..m {
        row[j] = match master.sense {
            Sense::Min => -master.target[j].clone(),
            Sense::Max => master.target[j].clone(),
        };
    }
    for i in 0..n {
        row[m + i] = int(1);
    }
    p.add_row(row, RowKind::Eq, sol.value.clone());
    let s = lp::solve(&p)?;
    Ok((s.status == LpStatus::Optimal).then(|| s.primal[..m].to_vec()))
}

/// Whether all master columns are integral points (always true for enumerated spaces).
pub fn integral_columns(master: &MasterLp) -> bool {
    master.points.iter().flatten().all(|x| x.iter().all(is_integer))
}

/// Fractional weights, if any, in the solved master.
pub fn fractional_support(sol: &MasterSolution) -> Vec<(usize, usize, Rat)> {
    let mut out = Vec::new();
    for (i, a) in sol.alpha.iter().enumerate() {
        for (k, v) in a.iter().enumerate() {
            if v.is_positive() && !is_integer(v) {
                out.push((i, k, v.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{CoefficientFn, CostModel};
    use crate::rat::{frac, ints};

    fn links(u: &[i64]) -> Instance {
        let pts = vec![ints(&[1, 0]), ints(&[0, 1])];
        let c = CostModel::PerResourceLinear(vec![
            CoefficientFn::Poly { resource: 0, coeffs: ints(&[0, 1]) },
            CoefficientFn::Poly { resource: 1, coeffs: ints(&[0, 1]) },
        ]);
        Instance::new(
            Sense::Min,
            vec![StrategySpace::FinitePoints(pts.clone()), StrategySpace::FinitePoints(pts)],
            vec![c.clone(), c],
            ints(u),
        )
        .unwrap()
    }

    fn one_d(points: &[i64], costs: &[i64], u: i64, concave: bool) -> Instance {
        let pts: Vec<RatVec> = points.iter().map(|&p| ints(&[p])).collect();
        let table = pts.iter().cloned().zip(costs.iter().map(|&c| int(c))).collect();
        let space = if concave { StrategySpace::ConcaveHullPoints(pts) } else { StrategySpace::FinitePoints(pts) };
        Instance::new(Sense::Min, vec![space], vec![CostModel::Tabulated(table)], ints(&[u])).unwrap()
    }

    #[test]
    fn envelopes() {
        let seg = one_d(&[0, 1], &[0, 2], 1, false);
        assert_eq!(envelope_value(&seg, 0, &[frac(1, 2)]).unwrap(), int(1));
        assert_eq!(envelope_value(&seg, 0, &ints(&[1])).unwrap(), int(2));
        let three = one_d(&[0, 1, 2], &[0, 5, 2], 2, false);
        assert_eq!(envelope_value(&three, 0, &ints(&[1])).unwrap(), int(1));
        assert_eq!(envelope_value(&three, 0, &ints(&[3])), Err(Error::OutsideHull));
    }

    #[test]
    fn master_shapes() {
        let mst = build_master(&links(&[1, 1])).unwrap();
        assert_eq!(mst.num_columns(), 4);
        let p = mst.to_lp();
        assert_eq!(p.num_rows(), 4);
    }

    #[test]
    fn master_solutions() {
        let sol = solve_master(&build_master(&links(&[1, 1])).unwrap()).unwrap();
        assert_eq!(sol.value, int(2));
        assert_eq!(sol.dual_objective(&ints(&[1, 1])), int(2));

        let g = links(&[2, 0]);
        let mst = build_master(&g).unwrap();
        let sol = solve_master(&mst).unwrap();
        assert_eq!(sol.value, int(4));
        // λ = (0, 2) is an optimal dual: the Lagrangian attains the optimum there
        assert_eq!(mst.lagrangian(&ints(&[0, 2])), int(4));
        assert_eq!(mst.lagrangian(&sol.lambda), int(4));
    }

    #[test]
    fn column_generation_matches_full_master() {
        for u in [[1, 1], [2, 0], [0, 2]] {
            let g = links(&u);
            let full = solve_master(&build_master(&g).unwrap()).unwrap();
            let cg = solve_master_cg(&g, &EnumerationOracle::new(&g).unwrap()).unwrap();
            assert_eq!(full.value, cg.value);
        }
        let single = one_d(&[4], &[7], 4, false);
        let cg = solve_master_cg(&single, &EnumerationOracle::new(&single).unwrap()).unwrap();
        assert_eq!(cg.columns, vec![vec![ints(&[4])]]);
    }

    #[test]
    fn column_generation_detects_unachievable_target() {
        let g = links(&[1, 0]);
        assert_eq!(solve_master_cg(&g, &EnumerationOracle::new(&g).unwrap()), Err(Error::NotAchievable));
    }

    struct Liar;
    impl DemandOracle for Liar {
        fn demand(&self, _: usize, _: &[Rat], _: &Rat) -> Result<(RatVec, Rat)> {
            Ok((ints(&[7, 7]), int(0)))
        }
    }

    #[test]
    fn oracle_outside_space_is_rejected() {
        assert!(matches!(solve_master_cg(&links(&[1, 1]), &Liar), Err(Error::OracleViolation(_))));
    }

    #[test]
    fn enforce_parallel_links() {
        let out = enforce(&links(&[1, 1]), Mode::Enforce).unwrap();
        let c = out.certificate().expect("certificate");
        assert_eq!(c.prices, ints(&[0, 0]));
        let out = enforce(&links(&[2, 0]), Mode::Enforce).unwrap();
        let c = out.certificate().expect("certificate");
        assert_eq!(c.x_star, vec![ints(&[1, 0]), ints(&[1, 0])]);
        assert!(c.prices[1] >= int(2));
        assert_eq!(enforce(&links(&[1, 0]), Mode::Enforce).unwrap(), Outcome::Infeasible);
        let out = enforce(&links(&[1, 1]), Mode::Unique).unwrap();
        assert_eq!(out.witness().unwrap().reason, WitnessReason::NotUnique);
    }

    #[test]
    fn enforce_concave_hull() {
        // total load is fixed at 2 by the single generator (2); costs 4, 5, 2
        let inst = one_d(&[0, 1, 2], &[4, 5, 2], 2, true);
        let c = enforce(&inst, Mode::Enforce).unwrap();
        assert_eq!(c.certificate().unwrap().x_star, vec![ints(&[2])]);
        // with cost 0 at the origin no nonnegative price pushes the load up to 2
        let inst = one_d(&[0, 1, 2], &[0, 5, 2], 2, true);
        let w = enforce(&inst, Mode::Enforce).unwrap();
        assert_eq!(w.witness().unwrap().reason, WitnessReason::NoTightOptimum);
    }

    #[test]
    fn undecided_above_cap() {
        assert!(matches!(enforce_capped(&links(&[1, 1]), Mode::Enforce, 3).unwrap(), Outcome::Undecided(_)));
    }
}
