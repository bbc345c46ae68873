//! Run configuration: command-line flags layered over an optional flat TOML
//! file layered over defaults.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use qgamble::analysis::{linearized_optimum, optimal_check_rate};
use qgamble::protocol::{ParamError, ProtocolParams};
use qgamble::strategy::{CheatPoint, ClaimPolicy, StrategyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid {field}: {message}")]
    Field {
        field: &'static str,
        message: String,
    },
    #[error("cannot read config file {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Honest players: Bob's win rate and Alice's gain.
    Honest,
    /// One fixed-state cheat: exact, closed-form and sampled gain.
    Cheat,
    /// Exact gain over a (theta, phi, claim) grid against the 1/√R cap.
    Sweep,
    /// Entanglement attacks against the honest baseline.
    Entangle,
    /// Closed-form, enumeration and optimizer cross-checks.
    Verify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Honest => "honest",
            Command::Cheat => "cheat",
            Command::Sweep => "sweep",
            Command::Entangle => "entangle",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Which measurement policies `entangle` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySet {
    /// Always measure in the z basis.
    Z,
    /// Always measure in the x basis, all four outcome tables.
    X,
    /// z or x depending on Bob's guess.
    Adaptive,
    All,
}

#[derive(Debug, Parser)]
#[command(
    name = "qgamble",
    version,
    about = "Simulate and analyze the qubit coin-tossing game",
    allow_negative_numbers = true
)]
pub struct Cli {
    pub command: Command,
    /// Master seed; every session draws from its own stream of it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo rounds, split evenly across sessions.
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub sessions: Option<u64>,
    /// Check rate; defaults to the rate minimizing the cheating cap for R.
    #[arg(long = "r")]
    pub check_rate: Option<f64>,
    /// Penalty for a failed check.
    #[arg(long = "R")]
    pub penalty: Option<f64>,
    /// Depolarizing probability on the channel to Bob.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub abort_threshold: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    /// zero, zero_bar or nearest.
    #[arg(long)]
    pub claim: Option<String>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicySet>,
    #[arg(long)]
    pub theta_points: Option<usize>,
    #[arg(long)]
    pub phi_points: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write one CSV row per simulated round (honest and cheat only).
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Flat TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub rounds: Option<u64>,
    pub sessions: Option<u64>,
    pub r: Option<f64>,
    #[serde(rename = "R")]
    pub penalty: Option<f64>,
    pub noise: Option<f64>,
    pub abort_threshold: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub claim: Option<String>,
    pub policy: Option<PolicySet>,
    pub theta_points: Option<usize>,
    pub phi_points: Option<usize>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            message: e.message().to_string(),
        })
    }
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub rounds: u64,
    pub sessions: u64,
    pub params: ProtocolParams,
    pub point: CheatPoint,
    pub policy: PolicySet,
    pub theta_points: usize,
    pub phi_points: usize,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
}

pub const DEFAULT_ROUNDS: u64 = 1_000_000;
pub const DEFAULT_PENALTY: f64 = 1e4;
pub const DEFAULT_SESSIONS: u64 = 8;

impl RunConfig {
    /// Parses flags, merging in the config file they name.
    pub fn from_cli(cli: Cli) -> Result<Self, ConfigError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve(cli, file)
    }

    pub fn resolve(cli: Cli, file: FileConfig) -> Result<Self, ConfigError> {
        let rounds = cli.rounds.or(file.rounds).unwrap_or(DEFAULT_ROUNDS);
        if rounds < 2 {
            return Err(field("rounds", format!("need at least 2, got {rounds}")));
        }
        let sessions = cli.sessions.or(file.sessions).unwrap_or(DEFAULT_SESSIONS);
        if sessions == 0 || sessions > rounds {
            return Err(field(
                "sessions",
                format!("must lie in [1, rounds], got {sessions}"),
            ));
        }

        let penalty = cli.penalty.or(file.penalty).unwrap_or(DEFAULT_PENALTY);
        if !(penalty > 0.0 && penalty.is_finite()) {
            return Err(field(
                "R",
                format!("must be positive and finite, got {penalty}"),
            ));
        }
        let r = cli
            .check_rate
            .or(file.r)
            .unwrap_or_else(|| optimal_check_rate(penalty).check_rate.min(0.5));
        let params = ProtocolParams::new(r, penalty)
            .and_then(|p| p.with_noise(cli.noise.or(file.noise).unwrap_or(0.0)))
            .and_then(|p| {
                p.with_abort_threshold(cli.abort_threshold.or(file.abort_threshold).unwrap_or(1.0))
            })
            .map_err(|e| {
                let name = match e {
                    ParamError::CheckRate(_) => "r",
                    ParamError::Penalty(_) => "R",
                    ParamError::Noise(_) => "noise",
                    ParamError::AbortThreshold(_) => "abort_threshold",
                    ParamError::Payout { name, .. } => name,
                };
                field(name, e.to_string())
            })?;

        let claim: ClaimPolicy = match cli.claim.or(file.claim) {
            Some(s) => s.parse().map_err(|e: String| field("claim", e))?,
            None => ClaimPolicy::Zero,
        };
        let theta = cli.theta.or(file.theta).unwrap_or_else(|| {
            linearized_optimum(r, penalty)
                .theta_star
                .min(std::f64::consts::PI)
        });
        let phi = cli.phi.or(file.phi).unwrap_or(0.0);
        let point = CheatPoint::new(theta, phi, claim).map_err(|e| match e {
            StrategyError::Theta(_) => field("theta", e.to_string()),
            StrategyError::Phi(_) => field("phi", e.to_string()),
            other => field("claim", other.to_string()),
        })?;

        let theta_points = cli.theta_points.or(file.theta_points).unwrap_or(200);
        if theta_points == 0 {
            return Err(field("theta_points", "grid must not be empty"));
        }
        let phi_points = cli.phi_points.or(file.phi_points).unwrap_or(3);
        if phi_points == 0 {
            return Err(field("phi_points", "grid must not be empty"));
        }

        let transcript = cli.transcript.or(file.transcript);
        if transcript.is_some() && !matches!(cli.command, Command::Honest | Command::Cheat) {
            return Err(field(
                "transcript",
                "only honest and cheat runs record transcripts",
            ));
        }

        Ok(RunConfig {
            command: cli.command,
            seed: cli.seed.or(file.seed).unwrap_or(0),
            rounds,
            sessions,
            params,
            point,
            policy: cli.policy.or(file.policy).unwrap_or(PolicySet::All),
            theta_points,
            phi_points,
            format: cli.format.or(file.format).unwrap_or(OutputFormat::Json),
            output: cli.output.or(file.output),
            transcript,
        })
    }
}
