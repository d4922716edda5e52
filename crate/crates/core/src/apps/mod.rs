//! Application builders and interpreters: congestion tolls, Wardrop flows,
//! Walrasian markets, trading networks and Kelly congestion control.

pub mod congestion;
pub mod flows;
pub mod kelly;
pub mod trading;
pub mod walrasian;

use crate::convexify::{FractionalWitness, Outcome};
use crate::duality::Certificate;
use crate::error::{Error, Result};
use crate::polymatroid::PolymatroidOutcome;
use crate::rat::{int, zeros, Rat, RatVec};
use num_traits::Signed;

pub use congestion::{
    build_congestion, build_wardrop, solve_congestion, solve_wardrop, Commodity, CongestionSpec, CostTables,
    PlayerStrategies, WardropSpec,
};
pub use flows::{solve_flow_master, FlowMaster};
pub use kelly::{build_kelly, solve_kelly, KellyPath, KellyPlayer, KellySpec};
pub use trading::{build_trading, realized_trades, solve_trading, TradeSpec};
pub use walrasian::{
    build_externality_market, build_walrasian, interpret_market, solve_externality_market, solve_walrasian,
    ExternalityMarket, MarketReport, MarketSpec, Valuation,
};

/// Result of an application pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppOutcome {
    /// `value` is the optimum of the relaxation that produced the prices.
    Certificate { certificate: Box<Certificate>, value: Rat },
    FractionalWitness(Box<FractionalWitness>),
    Infeasible,
    Undecided(String),
}

impl AppOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            AppOutcome::Certificate { certificate, .. } => Some(certificate),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&FractionalWitness> {
        match self {
            AppOutcome::FractionalWitness(w) => Some(w),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&Rat> {
        match self {
            AppOutcome::Certificate { value, .. } => Some(value),
            AppOutcome::FractionalWitness(w) => Some(&w.master.value),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AppOutcome::Certificate { .. } => "certificate",
            AppOutcome::FractionalWitness(_) => "fractional-witness",
            AppOutcome::Infeasible => "infeasible",
            AppOutcome::Undecided(_) => "undecided",
        }
    }
}

impl From<Outcome> for AppOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Certificate { certificate, master } => AppOutcome::Certificate { certificate, value: master.value },
            Outcome::FractionalWitness(w) => AppOutcome::FractionalWitness(w),
            Outcome::Infeasible => AppOutcome::Infeasible,
            Outcome::Undecided(s) => AppOutcome::Undecided(s),
        }
    }
}

impl From<PolymatroidOutcome> for AppOutcome {
    fn from(o: PolymatroidOutcome) -> Self {
        match o {
            PolymatroidOutcome::Certificate { certificate, intersection, .. } => {
                AppOutcome::Certificate { certificate, value: intersection.value }
            }
            PolymatroidOutcome::Infeasible => AppOutcome::Infeasible,
        }
    }
}

/// Rejects a table that decreases anywhere.
pub(crate) fn check_nondecreasing(table: &[Rat], what: &str) -> Result<()> {
    match table.windows(2).position(|w| w[1] < w[0]) {
        Some(k) => Err(Error::Validation(format!("{what} decreases from load {k} to {}", k + 1))),
        None => Ok(()),
    }
}

/// Breakpoints `(k, t[k])` of a table indexed by integer load.
pub(crate) fn table_points(table: &[Rat], scale: &Rat) -> Vec<(Rat, Rat)> {
    table.iter().enumerate().map(|(k, v)| (int(k as i64), scale * v)).collect()
}

/// Piecewise-linear reading of a load table; loads beyond the last entry are a
/// coverage error rather than an extrapolation.
pub(crate) fn table_at(table: &[Rat], z: &Rat, what: &str) -> Result<Rat> {
    let last = int(table.len() as i64 - 1);
    if z > &last || z.is_negative() {
        return Err(Error::Coverage(format!("{what} has no entry for load {z}")));
    }
    crate::game::interpolate(&table_points(table, &int(1)), z)
}

pub(crate) fn unit_vector(m: usize, set: &[usize]) -> RatVec {
    let mut v = zeros(m);
    for &j in set {
        v[j] = int(1);
    }
    v
}
