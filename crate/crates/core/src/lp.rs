//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex over [`Rat`] using Bland's least-index rule,
//! so it terminates on degenerate inputs. Duals are read off the artificial
//! columns, which the tableau carries for every row and which therefore hold
//! `B^-1` at all times.
//!
//! Sign conventions for duals (one multiplier per row):
//! * min problems: `<=` rows have `y <= 0`, `>=` rows have `y >= 0`;
//! * max problems: `<=` rows have `y >= 0`, `>=` rows have `y <= 0`;
//!
//! and in both cases `c·x = b·y` whenever all variables have lower bound zero
//! and no upper bound.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{dot, Rat, RatMat, RatVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: RatVec,
    pub rows: RatMat,
    pub rhs: RatVec,
    pub kinds: Vec<RowKind>,
    /// `None` means unbounded in that direction.
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: RatVec,
    pub dual: RatVec,
    pub value: Rat,
    /// Original variables whose (first) internal column is basic.
    pub basis: BTreeSet<usize>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        LpSolution {
            status,
            primal: Vec::new(),
            dual: Vec::new(),
            value: Rat::zero(),
            basis: BTreeSet::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LpProblem {
    /// A problem with no rows and every variable in `[0, +inf)`.
    pub fn new(sense: Sense, objective: RatVec) -> Self {
        let n = objective.len();
        LpProblem {
            sense,
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
            kinds: Vec::new(),
            lower: vec![Some(Rat::zero()); n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: RatVec, kind: RowKind, rhs: Rat) -> usize {
        self.rows.push(coeffs);
        self.kinds.push(kind);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn add_sparse_row(&mut self, terms: &[(usize, Rat)], kind: RowKind, rhs: Rat) -> usize {
        let mut row = vec![Rat::zero(); self.num_vars()];
        for (j, c) in terms {
            row[*j] += c;
        }
        self.add_row(row, kind, rhs)
    }

    /// Appends a variable with bounds `[0, +inf)` and returns its index.
    pub fn add_var(&mut self, cost: Rat) -> usize {
        self.objective.push(cost);
        for row in &mut self.rows {
            row.push(Rat::zero());
        }
        self.lower.push(Some(Rat::zero()));
        self.upper.push(None);
        self.objective.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rat>, upper: Option<Rat>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.rhs.len() != self.rows.len() || self.kinds.len() != self.rows.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} right-hand sides and {} row kinds",
                self.rows.len(),
                self.rhs.len(),
                self.kinds.len()
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Dimension(format!(
                "{n} variables but {} lower and {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if let Some((i, row)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {i} has {} coefficients, expected {n}",
                row.len()
            )));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rat]) -> Rat {
        dot(&self.objective, x)
    }

    /// Exact feasibility of `x` against rows and bounds.
    pub fn is_feasible(&self, x: &[Rat]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            self.lower[j].as_ref().is_none_or(|l| v >= l) && self.upper[j].as_ref().is_none_or(|u| v <= u)
        });
        bounds_ok
            && self.rows.iter().zip(&self.kinds).zip(&self.rhs).all(|((row, kind), b)| {
                let lhs = dot(row, x);
                match kind {
                    RowKind::Le => &lhs <= b,
                    RowKind::Eq => &lhs == b,
                    RowKind::Ge => &lhs >= b,
                }
            })
    }

    /// Reduced costs `c - A^T y` in the original variables.
    pub fn reduced_costs(&self, dual: &[Rat]) -> RatVec {
        (0..self.num_vars())
            .map(|j| {
                let mut d = self.objective[j].clone();
                for (row, y) in self.rows.iter().zip(dual) {
                    d -= &row[j] * y;
                }
                d
            })
            .collect()
    }
}

/// How an original variable is expressed through nonnegative internal columns.
#[derive(Debug, Clone)]
enum ColMap {
    /// `x = offset + sign * y[col]`
    Shift { col: usize, offset: Rat, sign: Rat },
    /// `x = y[pos] - y[neg]`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// `rows x (cols + 1)`, last entry of each row is the right-hand side.
    t: Vec<RatVec>,
    basis: Vec<usize>,
    cols: usize,
    art_start: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rat {
        &self.t[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = self.t[r].clone();
        for (k, row) in self.t.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule: first eligible column with negative reduced cost.
    fn entering(&self, cost: &[Rat]) -> Option<usize> {
        (0..self.art_start).find(|&j| {
            if self.basis.contains(&j) {
                return false;
            }
            let mut d = cost[j].clone();
            for (r, &b) in self.basis.iter().enumerate() {
                let a = &self.t[r][j];
                if !a.is_zero() && !cost[b].is_zero() {
                    d -= &cost[b] * a;
                }
            }
            d.is_negative()
        })
    }

    /// Minimum ratio row, ties broken by the smallest basic column index.
    fn leaving(&self, c: usize) -> Option<usize> {
        let mut best: Option<(usize, Rat)> = None;
        for r in 0..self.t.len() {
            let a = &self.t[r][c];
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs(r) / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio || (ratio == bratio && self.basis[r] < self.basis[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Runs simplex iterations; returns false on unboundedness.
    fn optimize(&mut self, cost: &[Rat]) -> bool {
        while let Some(c) = self.entering(cost) {
            match self.leaving(c) {
                Some(r) => self.pivot(r, c),
                None => return false,
            }
        }
        true
    }

    fn objective(&self, cost: &[Rat]) -> Rat {
        self.basis
            .iter()
            .enumerate()
            .fold(Rat::zero(), |acc, (r, &b)| acc + &cost[b] * self.rhs(r))
    }
}

/// Solves `problem` exactly. Deterministic for a fixed input.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let n = problem.num_vars();

    // Map original variables onto nonnegative internal columns.
    let mut maps = Vec::with_capacity(n);
    let mut n_int = 0usize;
    let mut bound_rows: Vec<(usize, Rat)> = Vec::new();
    for j in 0..n {
        match (&problem.lower[j], &problem.upper[j]) {
            (Some(l), up) => {
                if let Some(u) = up {
                    if u < l {
                        return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
                    }
                    bound_rows.push((n_int, u - l));
                }
                maps.push(ColMap::Shift { col: n_int, offset: l.clone(), sign: Rat::one() });
                n_int += 1;
            }
            (None, Some(u)) => {
                maps.push(ColMap::Shift { col: n_int, offset: u.clone(), sign: -Rat::one() });
                n_int += 1;
            }
            (None, None) => {
                maps.push(ColMap::Split { pos: n_int, neg: n_int + 1 });
                n_int += 2;
            }
        }
    }

    // Internal objective, always min-sense.
    let flip_obj = problem.sense == Sense::Max;
    let mut cost_int = vec![Rat::zero(); n_int];
    for (j, map) in maps.iter().enumerate() {
        let c = if flip_obj { -problem.objective[j].clone() } else { problem.objective[j].clone() };
        match map {
            ColMap::Shift { col, sign, .. } => cost_int[*col] += &c * sign,
            ColMap::Split { pos, neg } => {
                cost_int[*pos] += &c;
                cost_int[*neg] -= &c;
            }
        }
    }

    // Internal rows: originals then bound rows.
    let m_orig = problem.num_rows();
    let m = m_orig + bound_rows.len();
    let mut a_int: Vec<RatVec> = Vec::with_capacity(m);
    let mut b_int: RatVec = Vec::with_capacity(m);
    let mut kinds: Vec<RowKind> = Vec::with_capacity(m);
    for i in 0..m_orig {
        let mut row = vec![Rat::zero(); n_int];
        let mut b = problem.rhs[i].clone();
        for (j, map) in maps.iter().enumerate() {
            let a = &problem.rows[i][j];
            if a.is_zero() {
                continue;
            }
            match map {
                ColMap::Shift { col, offset, sign } => {
                    row[*col] += a * sign;
                    b -= a * offset;
                }
                ColMap::Split { pos, neg } => {
                    row[*pos] += a;
                    row[*neg] -= a;
                }
            }
        }
        a_int.push(row);
        b_int.push(b);
        kinds.push(problem.kinds[i]);
    }
    for (col, ub) in &bound_rows {
        let mut row = vec![Rat::zero(); n_int];
        row[*col] = Rat::one();
        a_int.push(row);
        b_int.push(ub.clone());
        kinds.push(RowKind::Le);
    }

    // Slack columns for inequality rows.
    let mut slack_of_row: Vec<Option<usize>> = vec![None; m];
    let mut n_slack = 0;
    for (r, kind) in kinds.iter().enumerate() {
        if *kind != RowKind::Eq {
            slack_of_row[r] = Some(n_int + n_slack);
            n_slack += 1;
        }
    }
    let art_start = n_int + n_slack;
    let cols = art_start + m;

    let mut flips = vec![Rat::one(); m];
    let mut t: Vec<RatVec> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for r in 0..m {
        let mut row = vec![Rat::zero(); cols + 1];
        row[..n_int].clone_from_slice(&a_int[r]);
        if let Some(s) = slack_of_row[r] {
            row[s] = if kinds[r] == RowKind::Le { Rat::one() } else { -Rat::one() };
        }
        row[cols] = b_int[r].clone();
        if b_int[r].is_negative() {
            flips[r] = -Rat::one();
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[art_start + r] = Rat::one();
        let start = match slack_of_row[r] {
            Some(s) if row[s].is_one() => s,
            _ => art_start + r,
        };
        basis.push(start);
        t.push(row);
    }
    let mut tab = Tableau { t, basis, cols, art_start };

    // Phase 1.
    let mut cost1 = vec![Rat::zero(); cols];
    for c in cost1.iter_mut().skip(art_start) {
        *c = Rat::one();
    }
    let phase1_bounded = tab.optimize(&cost1);
    debug_assert!(phase1_bounded, "phase 1 objective is bounded below by zero");
    if tab.objective(&cost1).is_positive() {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= art_start {
            if let Some(c) = (0..art_start).find(|&c| !tab.t[r][c].is_zero()) {
                tab.pivot(r, c);
            }
        }
    }

    // Phase 2.
    let mut cost2 = vec![Rat::zero(); cols];
    cost2[..n_int].clone_from_slice(&cost_int);
    if !tab.optimize(&cost2) {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
    }

    let mut y_int = vec![Rat::zero(); art_start];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < art_start {
            y_int[b] = tab.rhs(r).clone();
        }
    }
    let primal: RatVec = maps
        .iter()
        .map(|map| match map {
            ColMap::Shift { col, offset, sign } => offset + sign * &y_int[*col],
            ColMap::Split { pos, neg } => &y_int[*pos] - &y_int[*neg],
        })
        .collect();

    let dual: RatVec = (0..m_orig)
        .map(|i| {
            let mut y = Rat::zero();
            for (k, &b) in tab.basis.iter().enumerate() {
                let entry = &tab.t[k][art_start + i];
                if !entry.is_zero() && !cost2[b].is_zero() {
                    y += &cost2[b] * entry;
                }
            }
            let y = y * &flips[i];
            if flip_obj {
                -y
            } else {
                y
            }
        })
        .collect();

    let mut basis_set = BTreeSet::new();
    for &b in &tab.basis {
        if b < n_int {
            if let Some(j) = maps.iter().position(|map| match map {
                ColMap::Shift { col, .. } => *col == b,
                ColMap::Split { pos, neg } => *pos == b || *neg == b,
            }) {
                basis_set.insert(j);
            }
        }
    }

    let value = problem.objective_value(&primal);
    Ok(LpSolution { status: LpStatus::Optimal, primal, dual, value, basis: basis_set })
}

/// True iff every entry has denominator one.
pub fn is_integral(v: &[Rat]) -> bool {
    v.iter().all(|x| x.denom().is_one())
}

/// The candidates that are feasible for `problem` and attain `value` exactly.
pub fn optimal_face_points(problem: &LpProblem, value: &Rat, candidates: &[RatVec]) -> Vec<RatVec> {
    candidates
        .iter()
        .filter(|x| problem.is_feasible(x) && &problem.objective_value(x) == value)
        .cloned()
        .collect()
}

/// Dual objective including contributions of finite variable bounds:
/// `b·y + sum_j d_j x_j` where `d` are the reduced costs.
pub fn dual_objective(problem: &LpProblem, sol: &LpSolution) -> Rat {
    let d = problem.reduced_costs(&sol.dual);
    dot(&problem.rhs, &sol.dual) + dot(&d, &sol.primal)
}
