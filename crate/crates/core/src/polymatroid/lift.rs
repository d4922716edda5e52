//! Lifting of per-player polymatroids to a common ground set, the resulting
//! intersection problem, and enforcement for polymatroid games.
//!
//! Copy `(i, j)` of resource `j` for player `i` sits at lifted index `i·m + j`.
//! The sum polymatroid `f̄(S) = Σ_i f_i(S ∩ E_i)` has player-disjoint supports,
//! so its constraints are exactly the per-player ones; the coverage function
//! `h(S) = Σ_{j touched by S} u_j` reduces to the `m` capacity rows for `x ≥ 0`.
//! The LP solved below uses those reduced rows and the answer is then checked
//! against every lifted constraint.

use num_traits::{One, Signed, Zero};

use crate::duality::{check_enforceable, Certificate, Mode, Verdict};
use crate::error::{Error, Result};
use crate::game::{Instance, StrategySpace};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::rat::{int, is_integer, to_i64, Rat, RatVec};

use super::rank::RankOracle;

/// Largest lifted ground set handled by full constraint enumeration.
pub const MAX_LIFTED: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedIntersection {
    pub n: usize,
    pub m: usize,
    pub ranks: Vec<RankOracle>,
    pub capacity: Vec<i64>,
    /// `π_ij(u)` (or `v_ij(u)`) at lifted index `i·m + j`.
    pub weights: RatVec,
    /// Base polytopes (min games) or independence polytopes (max games).
    pub bases: bool,
}

impl LiftedIntersection {
    pub fn ground_size(&self) -> usize {
        self.n * self.m
    }

    /// `f̄(S) = Σ_i f_i(S ∩ E_i)` for a lifted set mask.
    pub fn f_bar(&self, set: u64) -> i64 {
        let block = (1u64 << self.m) - 1;
        (0..self.n).map(|i| self.ranks[i].rank(((set >> (i * self.m)) & block) as u32)).sum()
    }

    /// `h(S) = Σ u_j` over resources with at least one copy in `S`.
    pub fn h(&self, set: u64) -> i64 {
        (0..self.m)
            .filter(|&j| (0..self.n).any(|i| set >> (i * self.m + j) & 1 == 1))
            .map(|j| self.capacity[j])
            .sum()
    }

    fn full(&self) -> u64 {
        (1u64 << self.ground_size()) - 1
    }

    /// Checks `x(S) ≤ f̄(S)`, `x(S) ≤ h(S)` for every lifted `S`, `x ≥ 0`, and
    /// `x(Ē) = f̄(Ē)` when bases are required.
    pub fn satisfies_all(&self, x: &[i64]) -> bool {
        if x.len() != self.ground_size() || x.iter().any(|&v| v < 0) {
            return false;
        }
        let sum = |s: u64| -> i64 { x.iter().enumerate().filter(|(k, _)| s >> k & 1 == 1).map(|(_, v)| v).sum() };
        if self.bases && sum(self.full()) != self.f_bar(self.full()) {
            return false;
        }
        (0..=self.full()).all(|s| {
            let xs = sum(s);
            xs <= self.f_bar(s) && xs <= self.h(s)
        })
    }

    /// The reduced LP: per-player subset rows, optional base equalities, capacity rows last.
    pub fn reduced_lp(&self) -> LpProblem {
        let sense = if self.bases { Sense::Min } else { Sense::Max };
        let mut p = LpProblem::new(sense, self.weights.clone());
        let m = self.m;
        for i in 0..self.n {
            let f = &self.ranks[i];
            for s in 1..(1u32 << m) {
                if s == f.full() {
                    continue;
                }
                let terms: Vec<(usize, Rat)> = (0..m).filter(|j| s >> j & 1 == 1).map(|j| (i * m + j, int(1))).collect();
                p.add_sparse_row(&terms, RowKind::Le, int(f.rank(s)));
            }
            let terms: Vec<(usize, Rat)> = (0..m).map(|j| (i * m + j, int(1))).collect();
            let kind = if self.bases { RowKind::Eq } else { RowKind::Le };
            p.add_sparse_row(&terms, kind, int(f.rank(f.full())));
        }
        for j in 0..m {
            let terms: Vec<(usize, Rat)> = (0..self.n).map(|i| (i * m + j, int(1))).collect();
            p.add_sparse_row(&terms, RowKind::Le, int(self.capacity[j]));
        }
        p
    }

    fn capacity_row_start(&self) -> usize {
        self.n * ((1usize << self.m) - 1)
    }
}

/// Lifts a polymatroid game with linear costs at its target.
pub fn lift(inst: &Instance) -> Result<LiftedIntersection> {
    let n = inst.n();
    let m = inst.m;
    if n * m > MAX_LIFTED {
        return Err(Error::OutOfScale(format!("lifted ground set of size {} (limit {MAX_LIFTED})", n * m)));
    }
    let capacity: Vec<i64> = inst
        .target
        .iter()
        .map(|u| to_i64(u).ok_or_else(|| Error::Structural(format!("target entry {u} is not integral"))))
        .collect::<Result<_>>()?;
    if capacity.iter().any(|&c| c < 0) {
        return Err(Error::Structural("polymatroid targets must be nonnegative".into()));
    }
    let bases = inst.sense == Sense::Min;
    let mut ranks = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n * m);
    for i in 0..n {
        let f = match (&inst.spaces[i], bases) {
            (StrategySpace::PolymatroidBase(f), true) | (StrategySpace::PolymatroidVectors(f), false) => f,
            _ => {
                return Err(Error::Structural(format!(
                    "player {i}: min games need polymatroid bases and max games polymatroid vectors"
                )))
            }
        };
        if inst.consumption[i].0.is_some() {
            return Err(Error::Structural(format!("player {i}: polymatroid games use identity consumption")));
        }
        ranks.push(f.clone());
        let w = inst
            .linear_coefficients(i, &inst.target)?
            .ok_or_else(|| Error::Structural(format!("player {i}: polymatroid games need per-resource linear costs")))?;
        weights.extend(w);
    }
    Ok(LiftedIntersection { n, m, ranks, capacity, weights, bases })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intersection {
    /// Per-player integral vectors.
    pub x: Vec<Vec<i64>>,
    pub value: Rat,
    /// Prices read from the capacity rows, `≥ 0`.
    pub lambda: RatVec,
    /// All row duals of the reduced LP.
    pub duals: RatVec,
}

impl Intersection {
    pub fn profile(&self) -> Vec<RatVec> {
        self.x.iter().map(|xi| xi.iter().map(|&v| int(v)).collect()).collect()
    }
}

/// Optimal integral point of the lifted intersection with exact duals.
pub fn intersect_min_cost(li: &LiftedIntersection) -> Result<Intersection> {
    intersect_with_weights(li, &li.weights)
}

fn intersect_with_weights(li: &LiftedIntersection, weights: &[Rat]) -> Result<Intersection> {
    let mut p = li.reduced_lp();
    p.objective = weights.to_vec();
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Infeasible => return Err(Error::NotAchievable),
        LpStatus::Unbounded => return Err(Error::Structural("polymatroid intersection is unbounded".into())),
        LpStatus::Optimal => {}
    }
    if !sol.primal.iter().all(is_integer) {
        return Err(Error::TheoremContradiction(format!(
            "fractional vertex of a polymatroid intersection: {}",
            crate::rat::fmt_vec(&sol.primal)
        )));
    }
    let flat: Vec<i64> = sol.primal.iter().map(|v| to_i64(v).expect("integral")).collect();
    if !li.satisfies_all(&flat) {
        return Err(Error::TheoremContradiction("reduced intersection LP optimum violates a lifted constraint".into()));
    }
    let start = li.capacity_row_start();
    let lambda = sol.dual[start..start + li.m]
        .iter()
        .map(|y| if li.bases { -y.clone() } else { y.clone() })
        .collect();
    let x = flat.chunks(li.m).map(<[i64]>::to_vec).collect();
    Ok(Intersection { x, value: sol.value, lambda, duals: sol.dual })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolymatroidOutcome {
    Certificate {
        certificate: Box<Certificate>,
        intersection: Intersection,
        /// For max games with nonnegative utilities and an achievable target,
        /// set when no optimal profile reaches the target exactly.
        saturation_failed: bool,
    },
    Infeasible,
}

impl PolymatroidOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            PolymatroidOutcome::Certificate { certificate, .. } => Some(certificate),
            PolymatroidOutcome::Infeasible => None,
        }
    }
}

/// Solves the lifted intersection and certifies the decomposed optimum, with
/// `enforce` when it meets the target exactly and `weak-market` otherwise.
///
/// For max games the optimum is first raised towards the target, greedily and
/// then by a lexicographic re-solve that maximizes total load among optima.
pub fn enforce_polymatroid(inst: &Instance) -> Result<PolymatroidOutcome> {
    let li = lift(inst)?;
    let mut sol = match intersect_min_cost(&li) {
        Ok(s) => s,
        Err(Error::NotAchievable) => return Ok(PolymatroidOutcome::Infeasible),
        Err(e) => return Err(e),
    };
    let mut saturation_failed = false;
    if !li.bases && !is_tight(&li, &sol.x) {
        if !saturate(&li, &mut sol.x) {
            if let Some(x) = lexicographic_load(&li, &sol)? {
                sol.x = x;
            }
        }
        let nonnegative = li.weights.iter().all(|w| !w.is_negative());
        saturation_failed = !is_tight(&li, &sol.x) && nonnegative && target_achievable(&li)?;
    }
    let profile = sol.profile();
    let mode = if is_tight(&li, &sol.x) { Mode::Enforce } else { Mode::WeakMarket };
    match check_enforceable(inst, &profile, &sol.lambda, mode)? {
        Verdict::Certified(c) => Ok(PolymatroidOutcome::Certificate { certificate: c, intersection: sol, saturation_failed }),
        Verdict::Refuted(v) => Err(Error::TheoremContradiction(format!("polymatroid optimum fails verification: {v}"))),
    }
}

fn loads(li: &LiftedIntersection, x: &[Vec<i64>]) -> Vec<i64> {
    (0..li.m).map(|j| x.iter().map(|xi| xi[j]).sum()).collect()
}

fn is_tight(li: &LiftedIntersection, x: &[Vec<i64>]) -> bool {
    loads(li, x) == li.capacity
}

/// Raises single coordinates with zero weight while they stay independent and
/// within capacity; returns whether the target is reached.
fn saturate(li: &LiftedIntersection, x: &mut [Vec<i64>]) -> bool {
    loop {
        let l = loads(li, x);
        if l == li.capacity {
            return true;
        }
        let mut raised = false;
        'outer: for i in 0..li.n {
            for j in 0..li.m {
                if l[j] < li.capacity[j] && li.weights[i * li.m + j].is_zero() {
                    x[i][j] += 1;
                    if li.ranks[i].is_independent(&x[i]) {
                        raised = true;
                        break 'outer;
                    }
                    x[i][j] -= 1;
                }
            }
        }
        if !raised {
            return false;
        }
    }
}

/// Among optimal solutions, one of maximum total load: weights `K·v + 1` with
/// `K` large enough that one unit of load never outweighs a value difference.
fn lexicographic_load(li: &LiftedIntersection, sol: &Intersection) -> Result<Option<Vec<Vec<i64>>>> {
    let denom = li
        .weights
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, w| num_integer::Integer::lcm(&acc, w.denom()));
    let total: i64 = li.capacity.iter().sum();
    let k = Rat::from_integer(denom) * int(total + 1);
    let weights: RatVec = li.weights.iter().map(|w| &k * w + int(1)).collect();
    let lex = intersect_with_weights(li, &weights)?;
    let value: Rat = lex
        .x
        .iter()
        .flatten()
        .zip(&li.weights)
        .map(|(&v, w)| w * int(v))
        .sum();
    Ok((value == sol.value).then_some(lex.x))
}

/// Some profile of independent vectors has load exactly `u`.
fn target_achievable(li: &LiftedIntersection) -> Result<bool> {
    let mut p = li.reduced_lp();
    p.objective = vec![int(1); li.ground_size()];
    let sol = lp::solve(&p)?;
    Ok(sol.status == LpStatus::Optimal && sol.value == int(li.capacity.iter().sum()))
}
