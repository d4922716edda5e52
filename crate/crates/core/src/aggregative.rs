//! Monotone aggregative games: condition scans over the reachable load grid
//! and the transfer of certificates from the associated parameterized game.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;

use crate::duality::{check_enforceable_capped, for_each_profile, Certificate, Verdict};
use crate::error::{Error, Result};
use crate::game::{AggTable, CostModel, Instance, DEFAULT_CAP};
use crate::lp::Sense;
use crate::rat::{fmt_vec, leq, Rat, RatVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MagWitness {
    /// `lower ≤ upper` componentwise but the table goes the wrong way.
    Monotonicity { player: usize, point: RatVec, lower: RatVec, upper: RatVec, lower_value: Rat, upper_value: Rat },
    /// Loads agree on the support of `point` but the values differ.
    Independence { player: usize, point: RatVec, first: RatVec, second: RatVec, first_value: Rat, second_value: Rat },
    /// Two strategies share `resource` in their supports with different consumption.
    Overlap { player: usize, x: RatVec, y: RatVec, resource: usize },
}

impl std::fmt::Display for MagWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MagWitness::Monotonicity { player, point, lower, upper, lower_value, upper_value } => write!(
                f,
                "player {player}, point {}: value {lower_value} at {} vs {upper_value} at {}",
                fmt_vec(point),
                fmt_vec(lower),
                fmt_vec(upper)
            ),
            MagWitness::Independence { player, point, first, second, first_value, second_value } => write!(
                f,
                "player {player}, point {}: loads {} and {} agree on the support but give {first_value} and {second_value}",
                fmt_vec(point),
                fmt_vec(first),
                fmt_vec(second)
            ),
            MagWitness::Overlap { player, x, y, resource } => write!(
                f,
                "player {player}: {} and {} consume resource {resource} differently",
                fmt_vec(x),
                fmt_vec(y)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MagReport {
    pub monotonicity: Option<MagWitness>,
    pub independence: Option<MagWitness>,
    pub overlap: Option<MagWitness>,
}

impl MagReport {
    pub fn passes(&self) -> bool {
        self.monotonicity.is_none() && self.independence.is_none() && self.overlap.is_none()
    }
}

fn table(inst: &Instance, i: usize) -> Result<&AggTable> {
    match &inst.costs[i] {
        CostModel::AggregativeTabulated(t) => Ok(t),
        _ => Err(Error::Validation(format!("player {i} has no aggregative cost table"))),
    }
}

fn support(x: &[Rat]) -> Vec<usize> {
    (0..x.len()).filter(|&j| x[j].is_positive()).collect()
}

/// Loads of all pure profiles, and for each player the loads at which each of
/// its points is played. Deviation loads are profile loads, so they are included.
struct Grid {
    strategies: Vec<Vec<RatVec>>,
    played: Vec<BTreeMap<RatVec, BTreeSet<RatVec>>>,
}

fn build_grid(inst: &Instance, cap: usize) -> Result<Grid> {
    let strategies: Vec<Vec<RatVec>> = (0..inst.n()).map(|i| inst.enumerate_pure(i, cap)).collect::<Result<_>>()?;
    let mut played: Vec<BTreeMap<RatVec, BTreeSet<RatVec>>> = vec![BTreeMap::new(); inst.n()];
    let mut err = None;
    for_each_profile(&strategies, cap, &mut |profile: &[&RatVec]| {
        let owned: Vec<RatVec> = profile.iter().map(|x| (*x).clone()).collect();
        match inst.load(&owned) {
            Ok(l) => {
                for (i, x) in owned.into_iter().enumerate() {
                    played[i].entry(x).or_default().insert(l.clone());
                }
                true
            }
            Err(e) => {
                err = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Grid { strategies, played })
}

/// Scans the monotone-aggregative conditions over the reachable load grid.
///
/// Preconditions (aggregative tables for every player, nonnegative strategies
/// and consumption, table coverage of every reachable `(load, point)`) are
/// reported as errors; condition failures are reported with witnesses.
pub fn check_mag(inst: &Instance) -> Result<MagReport> {
    check_mag_capped(inst, DEFAULT_CAP)
}

pub fn check_mag_capped(inst: &Instance, cap: usize) -> Result<MagReport> {
    for i in 0..inst.n() {
        table(inst, i)?;
    }
    let grid = build_grid(inst, cap)?;
    for (i, pts) in grid.strategies.iter().enumerate() {
        for x in pts {
            if x.iter().any(Signed::is_negative) || inst.consume(i, x).iter().any(Signed::is_negative) {
                return Err(Error::Validation(format!(
                    "player {i}: aggregative games need nonnegative strategies and consumption, got {}",
                    fmt_vec(x)
                )));
            }
        }
    }
    let mut values: Vec<BTreeMap<RatVec, Vec<(RatVec, Rat)>>> = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let t = table(inst, i)?;
        let mut per_point = BTreeMap::new();
        for (x, loads) in &grid.played[i] {
            let mut vals = Vec::with_capacity(loads.len());
            for w in loads {
                let v = t.get(w, x).ok_or_else(|| {
                    Error::Coverage(format!("player {i}, point {} at load {}", fmt_vec(x), fmt_vec(w)))
                })?;
                vals.push((w.clone(), v.clone()));
            }
            per_point.insert(x.clone(), vals);
        }
        values.push(per_point);
    }

    let mut report = MagReport::default();
    'mono: for (i, per_point) in values.iter().enumerate() {
        for (x, vals) in per_point {
            for (w1, v1) in vals {
                for (w2, v2) in vals {
                    if w1 == w2 || !leq(w1, w2) {
                        continue;
                    }
                    let bad = match inst.sense {
                        Sense::Min => v1 > v2,
                        Sense::Max => v1 < v2,
                    };
                    if bad {
                        report.monotonicity = Some(MagWitness::Monotonicity {
                            player: i,
                            point: x.clone(),
                            lower: w1.clone(),
                            upper: w2.clone(),
                            lower_value: v1.clone(),
                            upper_value: v2.clone(),
                        });
                        break 'mono;
                    }
                }
            }
        }
    }
    'indep: for (i, per_point) in values.iter().enumerate() {
        for (x, vals) in per_point {
            let supp = support(x);
            let mut seen: BTreeMap<Vec<Rat>, (&RatVec, &Rat)> = BTreeMap::new();
            for (w, v) in vals {
                let key: Vec<Rat> = supp.iter().map(|&j| w[j].clone()).collect();
                match seen.get(&key) {
                    Some((w0, v0)) if *v0 != v => {
                        report.independence = Some(MagWitness::Independence {
                            player: i,
                            point: x.clone(),
                            first: (*w0).clone(),
                            second: w.clone(),
                            first_value: (*v0).clone(),
                            second_value: v.clone(),
                        });
                        break 'indep;
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key, (w, v));
                    }
                }
            }
        }
    }
    'overlap: for (i, pts) in grid.strategies.iter().enumerate() {
        for (a, x) in pts.iter().enumerate() {
            let gx = inst.consume(i, x);
            for y in &pts[a + 1..] {
                let gy = inst.consume(i, y);
                for j in 0..inst.m {
                    if x[j].is_positive() && y[j].is_positive() && gx[j] != gy[j] {
                        report.overlap = Some(MagWitness::Overlap { player: i, x: x.clone(), y: y.clone(), resource: j });
                        break 'overlap;
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Re-verifies a certificate of the associated game under aggregative
/// semantics, where each deviation is charged at the load it induces.
///
/// `associated` must agree with the aggregative tables at the target for every
/// strategy. A verification failure after the preconditions hold is reported
/// as a theorem contradiction.
pub fn lift_certificate(mag: &Instance, associated: &Instance, cert: &Certificate) -> Result<Certificate> {
    lift_certificate_capped(mag, associated, cert, DEFAULT_CAP)
}

pub fn lift_certificate_capped(mag: &Instance, associated: &Instance, cert: &Certificate, cap: usize) -> Result<Certificate> {
    let report = check_mag_capped(mag, cap)?;
    if !report.passes() {
        let w = report.monotonicity.or(report.independence).or(report.overlap).expect("some check failed");
        return Err(Error::Validation(format!("not a monotone aggregative game: {w}")));
    }
    if associated.n() != mag.n() || associated.m != mag.m || associated.target != mag.target || associated.sense != mag.sense {
        return Err(Error::Validation("associated game does not match the aggregative game".into()));
    }
    for i in 0..mag.n() {
        let t = table(mag, i)?;
        for x in mag.enumerate_pure(i, cap)? {
            if let Some(v) = t.get(&mag.target, &x) {
                if associated.cost(i, &associated.target, &x)? != *v {
                    return Err(Error::Validation(format!(
                        "player {i}: associated cost at {} differs from the aggregative table",
                        fmt_vec(&x)
                    )));
                }
            }
        }
    }
    match check_enforceable_capped(mag, &cert.x_star, &cert.prices, cert.mode, cap)? {
        Verdict::Certified(c) => Ok(*c),
        Verdict::Refuted(v) => Err(Error::TheoremContradiction(format!("aggregative re-verification failed: {v}"))),
    }
}

/// Builds an aggregative table from a function of `(player, load, point)`
/// evaluated on every reachable load and on the target.
pub fn tabulate(
    inst: &Instance,
    cap: usize,
    f: &dyn Fn(usize, &[Rat], &[Rat]) -> Result<Rat>,
) -> Result<Vec<AggTable>> {
    let grid = build_grid(inst, cap)?;
    let mut out = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let mut t = AggTable::default();
        for (x, loads) in &grid.played[i] {
            for w in loads {
                t.insert(w.clone(), x.clone(), f(i, w, x)?);
            }
        }
        for x in &grid.strategies[i] {
            t.insert(inst.target.clone(), x.clone(), f(i, &inst.target, x)?);
        }
        out.push(t);
    }
    Ok(out)
}
