//! Subcommand implementations with the fixed exit-code contract.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use pricing_core::apps::{
    build_congestion, build_externality_market, build_kelly, build_trading, build_walrasian, build_wardrop,
    interpret_market, realized_trades, solve_congestion, solve_externality_market, solve_kelly, solve_trading,
    solve_walrasian, solve_wardrop, AppOutcome, MarketReport,
};
use pricing_core::convexify::enforce_capped;
use pricing_core::duality::{check_enforceable_capped, Mode, Verdict};
use pricing_core::game::{Instance, DEFAULT_CAP};
use pricing_core::polymatroid::enforce_polymatroid;
use pricing_core::Error;
use rayon::prelude::*;
use serde_json::json;

use crate::report::{digest, Report};
use crate::schema::{rats, Body, InstanceFile, Market};

pub const EXIT_CERTIFICATE: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_WITNESS: i32 = 10;
pub const EXIT_INFEASIBLE: i32 = 11;
pub const EXIT_UNDECIDED: i32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub mode: Option<Mode>,
    pub cap: usize,
    pub format: Format,
}

impl Default for Options {
    fn default() -> Self {
        Options { mode: None, cap: DEFAULT_CAP, format: Format::Json }
    }
}

/// What a command prints and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn input_error(e: anyhow::Error) -> Self {
        CommandOutput { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {e:#}\n") }
    }
}

pub fn exit_code(out: &AppOutcome) -> i32 {
    match out {
        AppOutcome::Certificate { .. } => EXIT_CERTIFICATE,
        AppOutcome::FractionalWitness(_) => EXIT_WITNESS,
        AppOutcome::Infeasible => EXIT_INFEASIBLE,
        AppOutcome::Undecided(_) => EXIT_UNDECIDED,
    }
}

pub const GAME_ASSOCIATED: &str = "associated";
pub const GAME_AGGREGATIVE: &str = "aggregative";

/// A solved instance file.
#[derive(Debug, Clone)]
pub struct Solved {
    pub outcome: AppOutcome,
    /// Game in which a certificate verifies.
    pub game: &'static str,
    pub interpretation: Option<serde_json::Value>,
}

fn file_mode(file: &InstanceFile, opts: &Options, default: Mode) -> Mode {
    opts.mode.or(file.mode.map(Mode::from)).unwrap_or(default)
}

/// Runs the pipeline of the file's domain.
///
/// The mode applies to generic and congestion files; the other domains use the
/// mode their construction prescribes and report it in the certificate.
pub fn solve_file(file: &InstanceFile, opts: &Options) -> Result<Solved> {
    let plain = |outcome: AppOutcome| Solved { outcome, game: GAME_ASSOCIATED, interpretation: None };
    let lifted = |outcome: AppOutcome| {
        let game = match outcome.certificate() {
            Some(c) if c.mode != Mode::WeakMarket => GAME_AGGREGATIVE,
            _ => GAME_ASSOCIATED,
        };
        Solved { outcome, game, interpretation: None }
    };
    Ok(match &file.body {
        Body::Generic(g) => {
            let inst = g.instance(file.target()?)?;
            plain(enforce_capped(&inst, file_mode(file, opts, Mode::Enforce), opts.cap)?.into())
        }
        Body::Polymatroid(p) => plain(enforce_polymatroid(&p.instance(file.target()?)?)?.into()),
        Body::Congestion(c) => {
            lifted(solve_congestion(&c.spec()?, &file.target()?, file_mode(file, opts, Mode::Enforce))?)
        }
        Body::Wardrop(w) => plain(solve_wardrop(&w.spec(), &file.target()?)?),
        Body::Walrasian(w) => match w.market()? {
            Market::Bundles(spec) => {
                let inst = build_walrasian(&spec)?;
                let outcome = solve_walrasian(&spec)?;
                let interpretation = Some(market_json(&interpret_market(&inst, &outcome)?));
                Solved { outcome, game: GAME_ASSOCIATED, interpretation }
            }
            Market::Externalities(spec) => lifted(solve_externality_market(&spec)?),
        },
        Body::Trading(t) => {
            let spec = t.spec();
            let outcome = solve_trading(&spec)?;
            let interpretation = match outcome.certificate() {
                Some(c) => Some(json!({ "realized_trades": realized_trades(&spec, c)? })),
                None => None,
            };
            Solved { outcome, game: GAME_ASSOCIATED, interpretation }
        }
        Body::Kelly(k) => {
            let (path, outcome) = solve_kelly(&k.spec())?;
            Solved { outcome, game: GAME_ASSOCIATED, interpretation: Some(json!({ "path": format!("{path:?}") })) }
        }
    })
}

fn market_json(r: &MarketReport) -> serde_json::Value {
    match r {
        MarketReport::Equilibrium { allocation, prices, unsold, welfare } => json!({
            "equilibrium": true,
            "bundles": allocation,
            "item_prices": prices.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "unsold": unsold,
            "welfare": welfare.to_string(),
        }),
        MarketReport::NoEquilibrium { lp_value, best_integral_welfare } => json!({
            "equilibrium": false,
            "lp_value": lp_value.to_string(),
            "best_integral_welfare": best_integral_welfare.as_ref().map(ToString::to_string),
        }),
        MarketReport::Infeasible => json!({ "equilibrium": false }),
        MarketReport::Undecided(s) => json!({ "undecided": s }),
    }
}

/// Rebuilds the game a certificate refers to.
pub fn instance_for(file: &InstanceFile, game: &str) -> Result<Instance> {
    let aggregative = game == GAME_AGGREGATIVE;
    Ok(match &file.body {
        Body::Generic(g) => g.instance(file.target()?)?,
        Body::Polymatroid(p) => p.instance(file.target()?)?,
        Body::Congestion(c) => {
            let (mag, assoc) = build_congestion(&c.spec()?, &file.target()?)?;
            if aggregative {
                mag
            } else {
                assoc
            }
        }
        Body::Wardrop(w) => build_wardrop(&w.spec(), &file.target()?)?,
        Body::Walrasian(w) => match w.market()? {
            Market::Bundles(spec) => build_walrasian(&spec)?,
            Market::Externalities(spec) => {
                let (mag, assoc) = build_externality_market(&spec)?;
                if aggregative {
                    mag
                } else {
                    assoc
                }
            }
        },
        Body::Trading(t) => build_trading(&t.spec())?,
        Body::Kelly(k) => build_kelly(&k.spec())?,
    })
}

/// Solves a parsed file and builds its report.
pub fn enforce_file(file: &InstanceFile, opts: &Options) -> Result<(i32, Report)> {
    let start = Instant::now();
    let solved = solve_file(file, opts)?;
    let mut report = Report::new(file, &solved.outcome, Some(solved.game));
    report.interpretation = solved.interpretation;
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok((exit_code(&solved.outcome), report))
}

fn read_file(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    InstanceFile::parse(&text)
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text() + "\n",
    }
}

pub fn cmd_enforce(path: &Path, opts: &Options) -> CommandOutput {
    let file = match read_file(path) {
        Ok(f) => f,
        Err(e) => return CommandOutput::input_error(e),
    };
    match enforce_file(&file, opts) {
        Ok((code, report)) => CommandOutput { code, stdout: render(&report, opts.format), stderr: String::new() },
        Err(e) => CommandOutput::input_error(e),
    }
}

/// Outcome of verifying a report against its instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Verified,
    Violation(String),
}

/// Verifies `(x*, λ)` of a certificate report with the duality checker alone.
pub fn check_report(file: &InstanceFile, report: &Report, cap: usize) -> Result<CheckResult> {
    if report.outcome != "certificate" {
        bail!("report outcome is {:?}, not a certificate", report.outcome);
    }
    if report.digest != digest(file) {
        bail!("report digest does not match the instance file");
    }
    let game = report.game.as_deref().unwrap_or(GAME_ASSOCIATED);
    let inst = instance_for(file, game)?;
    let mode: Mode = report
        .mode
        .map(Mode::from)
        .or(file.mode.map(Mode::from))
        .unwrap_or(Mode::Enforce);
    let mut lambda = vec![pricing_core::Rat::default(); inst.m];
    for (&j, p) in &report.prices {
        if j == 0 || j > inst.m {
            bail!("price key {j} outside 1..={}", inst.m);
        }
        lambda[j - 1] = p.0.clone();
    }
    if report.prices.len() != inst.m {
        bail!("report lists {} prices for {} resources", report.prices.len(), inst.m);
    }
    let x: Vec<_> = report.allocation.iter().map(|v| rats(v)).collect();
    if x.len() != inst.n() || x.iter().enumerate().any(|(i, xi)| xi.len() != inst.dim(i)) {
        bail!("allocation does not match the players' strategy dimensions");
    }
    match check_enforceable_capped(&inst, &x, &lambda, mode, cap) {
        Ok(Verdict::Certified(_)) => Ok(CheckResult::Verified),
        Ok(Verdict::Refuted(v)) => Ok(CheckResult::Violation(v.to_string())),
        Err(e @ (Error::Unbounded(_) | Error::Coverage(_))) => Ok(CheckResult::Violation(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_check(path: &Path, cert: &Path, opts: &Options) -> CommandOutput {
    let run = || -> Result<CheckResult> {
        let file = read_file(path)?;
        let text = std::fs::read_to_string(cert).with_context(|| format!("cannot read {}", cert.display()))?;
        let report: Report = serde_json::from_str(&text).context("malformed certificate report")?;
        check_report(&file, &report, opts.cap)
    };
    match run() {
        Ok(CheckResult::Verified) => CommandOutput { code: EXIT_CERTIFICATE, stdout: "verified\n".into(), stderr: String::new() },
        Ok(CheckResult::Violation(v)) => {
            CommandOutput { code: EXIT_VIOLATION, stdout: format!("violation: {v}\n"), stderr: String::new() }
        }
        Err(e) => CommandOutput::input_error(e),
    }
}

pub fn cmd_gen(family: &str, seed: u64, size: &crate::gen::Size) -> CommandOutput {
    match crate::gen::generate(family, seed, size) {
        Ok(f) => CommandOutput { code: 0, stdout: f.to_json() + "\n", stderr: String::new() },
        Err(e) => CommandOutput::input_error(e),
    }
}

/// Enforces every `*.json` file of a directory, one JSON line per file in
/// name order. Exits with 2 if any file is unreadable or invalid.
pub fn cmd_batch(dir: &Path, jobs: usize, opts: &Options) -> CommandOutput {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => return CommandOutput::input_error(anyhow::anyhow!("cannot read {}: {e}", dir.display())),
    };
    files.sort();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => return CommandOutput::input_error(e.into()),
    };
    let lines: Vec<(i32, String)> = pool.install(|| {
        files
            .par_iter()
            .map(|p| {
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let out = cmd_enforce(p, opts);
                let outcome = match out.code {
                    EXIT_CERTIFICATE => "certificate",
                    EXIT_WITNESS => "fractional-witness",
                    EXIT_INFEASIBLE => "infeasible",
                    EXIT_UNDECIDED => "undecided",
                    _ => "error",
                };
                let line = json!({ "file": name, "exit": out.code, "outcome": outcome, "error": (out.code == EXIT_INPUT).then(|| out.stderr.trim().to_string()) });
                (out.code, line.to_string())
            })
            .collect()
    });
    let code = if lines.iter().any(|(c, _)| *c == EXIT_INPUT) { EXIT_INPUT } else { 0 };
    let stdout = lines.into_iter().map(|(_, l)| l + "\n").collect();
    CommandOutput { code, stdout, stderr: String::new() }
}
