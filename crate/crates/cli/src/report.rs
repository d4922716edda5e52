//! Machine-readable reports.

use std::collections::BTreeMap;

use pricing_core::apps::AppOutcome;
use pricing_core::convexify::{fractional_support, WitnessReason};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::schema::{wrap, InstanceFile, ModeTag, R};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub domain: String,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeTag>,
    /// `associated` or `aggregative`: the game the certificate verifies in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_value: Option<R>,
    /// Resource prices keyed from 1.
    #[serde(default)]
    pub prices: BTreeMap<usize, R>,
    #[serde(default)]
    pub allocation: Vec<Vec<R>>,
    #[serde(default)]
    pub margins: Vec<Margin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<serde_json::Value>,
    pub digest: String,
    pub timing_ms: u64,
}

/// Priced objective of `x*_i` against the best response and its tie count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Margin {
    pub achieved: R,
    pub best: R,
    pub ties: usize,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_integral_value: Option<R>,
    pub profiles_searched: usize,
    pub feasible_profiles: usize,
    pub optimal_profiles: usize,
    /// `(player, column, weight)` with weight strictly between 0 and 1.
    pub fractional_support: Vec<(usize, Vec<R>, R)>,
}

/// SHA-256 of the canonical serialization of an instance file.
pub fn digest(file: &InstanceFile) -> String {
    let bytes = serde_json::to_vec(file).expect("instance files always serialize");
    hex::encode(Sha256::digest(&bytes))
}

fn reason(r: WitnessReason) -> &'static str {
    match r {
        WitnessReason::NoIntegralOptimum => "no-integral-optimum",
        WitnessReason::NoTightOptimum => "no-tight-optimum",
        WitnessReason::NotUnique => "not-unique",
    }
}

impl Report {
    pub fn new(file: &InstanceFile, out: &AppOutcome, game: Option<&str>) -> Report {
        let mut r = Report {
            version: crate::schema::VERSION,
            domain: file.body.tag().to_string(),
            outcome: out.label().to_string(),
            mode: None,
            game: None,
            master_value: out.value().cloned().map(R),
            prices: BTreeMap::new(),
            allocation: Vec::new(),
            margins: Vec::new(),
            witness: None,
            message: None,
            interpretation: None,
            digest: digest(file),
            timing_ms: 0,
        };
        match out {
            AppOutcome::Certificate { certificate: c, .. } => {
                r.mode = Some(c.mode.into());
                r.game = game.map(str::to_string);
                r.prices = c.prices.iter().enumerate().map(|(j, p)| (j + 1, R(p.clone()))).collect();
                r.allocation = c.x_star.iter().map(|x| wrap(x)).collect();
                r.margins = c
                    .records
                    .iter()
                    .map(|p| Margin {
                        achieved: R(p.achieved.clone()),
                        best: R(p.best.clone()),
                        ties: p.argmin.len(),
                        exhaustive: p.exhaustive,
                    })
                    .collect();
            }
            AppOutcome::FractionalWitness(w) => {
                r.witness = Some(WitnessSummary {
                    reason: reason(w.reason).to_string(),
                    best_integral_value: w.best_integral_value.clone().map(R),
                    profiles_searched: w.profiles_searched,
                    feasible_profiles: w.feasible_profiles,
                    optimal_profiles: w.optimal_profiles,
                    fractional_support: fractional_support(&w.master)
                        .into_iter()
                        .map(|(i, k, a)| (i, wrap(&w.master.columns[i][k]), R(a)))
                        .collect(),
                });
                r.prices = w.master.lambda.iter().enumerate().map(|(j, p)| (j + 1, R(p.clone()))).collect();
            }
            AppOutcome::Infeasible => r.message = Some("u not achievable".into()),
            AppOutcome::Undecided(s) => r.message = Some(s.clone()),
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// One-line summary for `--format text`.
    pub fn to_text(&self) -> String {
        let prices: Vec<String> = self.prices.iter().map(|(j, p)| format!("{j}={}", p.0)).collect();
        let mut s = format!("{} {}", self.domain, self.outcome);
        if let Some(v) = &self.master_value {
            s += &format!(" value={}", v.0);
        }
        if !prices.is_empty() {
            s += &format!(" prices[{}]", prices.join(" "));
        }
        if let Some(m) = &self.message {
            s += &format!(" ({m})");
        }
        s
    }
}
