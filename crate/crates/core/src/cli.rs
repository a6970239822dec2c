//! Command-line front end. [`run`] returns what the command prints on
//! standard output; the binary maps errors to exit codes with
//! [`CliError::exit_code`].

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::discrete::{evaluate, markowitz_policy, merge_states, q_of, smm_policy, DiscreteMarket, Policy};
use crate::error::SmmError;
use crate::hedging::{flatten_pseudo_assets, solve_hedge};
use crate::io::{
    pseudo_asset_names, read_json, read_leverage_csv, read_table_csv, to_json_string, write_leverage_csv,
    write_table_csv, ConstraintFile, MarketFile, ModelFile, Table,
};
use crate::lcem::{compare_policies, McConfig};
use crate::leverage::{audit, AuditOptions};
use crate::moments::{optimal_objective_value, Objective, PerfSummary};

#[derive(Debug, Parser)]
#[command(name = "smm", version, about = "Conditional second-moment portfolio policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveKind {
    Sharpe,
    MeanVariance,
    Kelly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Optimal policy on a discrete-state market, optionally hedged.
    SolveDiscrete {
        #[arg(long)]
        market: PathBuf,
        #[arg(long, value_enum, default_value = "sharpe")]
        objective: ObjectiveKind,
        /// Cap on unconditional volatility (sharpe objective).
        #[arg(long, default_value_t = 1.0)]
        risk_budget: f64,
        #[arg(long, default_value_t = 0.0)]
        risk_free: f64,
        /// Risk tolerance for the mean-variance objective.
        #[arg(long, default_value_t = 1.0)]
        risk_param: f64,
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Monte-Carlo comparison of the second-moment and Markowitz policies under a linear model.
    SimulateLcem {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "n", default_value_t = 1_000_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        risk_budget: f64,
        #[arg(long, default_value_t = 1)]
        n_streams: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Merge states of a market and report the change in q.
    MergeStates {
        #[arg(long)]
        market: PathBuf,
        /// Comma-separated zero-based state indices.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
    },
    /// Estimate the optimal-leverage curve of an observed strategy.
    LeverageAudit {
        /// CSV with header `leverage,return`.
        #[arg(long = "csv")]
        csv_path: PathBuf,
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long)]
        grid_size: Option<usize>,
        #[arg(long)]
        floor: Option<f64>,
        /// Write the curve here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand returns and features into pseudo-asset returns r ⊗ f.
    Flatten {
        #[arg(long = "returns")]
        returns_csv: PathBuf,
        #[arg(long = "features")]
        features_csv: PathBuf,
        #[arg(long = "out")]
        out_path: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Smm(#[from] SmmError),
}

impl CliError {
    /// 2 for bad input, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Smm(e) if e.is_numerical() => 1,
            _ => 2,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Validation failures are reported as input errors even when they surface
/// from the numeric layer.
fn input(e: SmmError) -> CliError {
    if e.is_numerical() {
        CliError::Smm(e)
    } else {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Debug, Serialize)]
struct PolicyReport {
    policy: Vec<Vec<f64>>,
    performance: PerfSummary,
}

#[derive(Debug, Serialize)]
struct HedgeReport {
    q_g: f64,
    spanned_q: f64,
    multipliers: Vec<f64>,
    m: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    objective: Objective,
    q: f64,
    optimal_objective: f64,
    #[serde(flatten)]
    optimum: PolicyReportFlat,
    #[serde(skip_serializing_if = "Option::is_none")]
    markowitz: Option<PolicyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sharpe_boost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hedge: Option<HedgeReport>,
}

#[derive(Debug, Serialize)]
struct PolicyReportFlat {
    policy: Vec<Vec<f64>>,
    performance: PerfSummary,
}

fn objective_from(kind: ObjectiveKind, risk_budget: f64, risk_free: f64, risk_param: f64) -> Result<Objective, CliError> {
    match kind {
        ObjectiveKind::Sharpe => Objective::sharpe(risk_budget, risk_free),
        ObjectiveKind::MeanVariance => Objective::mean_variance(risk_param),
        ObjectiveKind::Kelly => Ok(Objective::Kelly),
    }
    .map_err(input)
}

fn load_market(path: &Path) -> Result<DiscreteMarket, CliError> {
    let file: MarketFile = read_json(path).map_err(input)?;
    file.to_market().map_err(input)
}

pub fn solve_discrete(
    market: &DiscreteMarket,
    obj: &Objective,
    constraints: Option<&ConstraintFile>,
) -> Result<SolveReport, CliError> {
    let rfr = obj.risk_free();
    let q = q_of(market)?;
    match constraints {
        None => {
            let pol = smm_policy(market, obj)?;
            let perf = evaluate(market, &pol, rfr)?;
            let (markowitz, sharpe_boost) = match markowitz_policy(market, obj) {
                Ok(mp) => {
                    let mperf = evaluate(market, &mp, rfr)?;
                    let boost = match (perf.sharpe, mperf.sharpe) {
                        (Some(a), Some(b)) if b != 0.0 => Some(a / b - 1.0),
                        _ => None,
                    };
                    (
                        Some(PolicyReport {
                            policy: mp.to_rows(),
                            performance: mperf,
                        }),
                        boost,
                    )
                }
                Err(SmmError::DegenerateMarket(_)) => (None, None),
                Err(e) => return Err(e.into()),
            };
            Ok(SolveReport {
                objective: *obj,
                q,
                optimal_objective: optimal_objective_value(q, obj)?,
                optimum: PolicyReportFlat {
                    policy: pol.to_rows(),
                    performance: perf,
                },
                markowitz,
                sharpe_boost,
                hedge: None,
            })
        }
        Some(cf) => {
            let cs = cf.to_constraints(market).map_err(input)?;
            let (pol, sol) = solve_hedge(market, &cs, obj)?;
            let perf = evaluate(market, &pol, rfr)?;
            Ok(SolveReport {
                objective: *obj,
                q,
                optimal_objective: optimal_objective_value(sol.q_g, obj)?,
                optimum: PolicyReportFlat {
                    policy: pol.to_rows(),
                    performance: perf,
                },
                markowitz: None,
                sharpe_boost: None,
                hedge: Some(HedgeReport {
                    q_g: sol.q_g,
                    spanned_q: sol.spanned_q,
                    multipliers: sol.multipliers.iter().copied().collect(),
                    m: crate::linalg::mat_to_rows(&sol.m),
                    b: sol.b.iter().copied().collect(),
                }),
            })
        }
    }
}

#[derive(Debug, Serialize)]
struct MergeReport {
    subset: Vec<usize>,
    q_original: f64,
    q_merged: f64,
    delta_q: f64,
    market: MarketFile,
}

#[derive(Debug, Serialize)]
struct FileReport {
    out: String,
    rows: usize,
    columns: usize,
}

#[derive(Debug, Serialize)]
struct LeverageReport {
    out: String,
    points: usize,
    bandwidth: f64,
    floor: f64,
}

/// Executes one command and returns its standard output.
pub fn run(command: &Command) -> Result<String, CliError> {
    match command {
        Command::SolveDiscrete {
            market,
            objective,
            risk_budget,
            risk_free,
            risk_param,
            constraints,
        } => {
            let obj = objective_from(*objective, *risk_budget, *risk_free, *risk_param)?;
            let mkt = load_market(market)?;
            let cf = match constraints {
                Some(p) => Some(read_json::<ConstraintFile>(p).map_err(input)?),
                None => None,
            };
            let report = solve_discrete(&mkt, &obj, cf.as_ref())?;
            Ok(to_json_string(&report) + "\n")
        }
        Command::SimulateLcem {
            model,
            n_samples,
            seed,
            risk_budget,
            n_streams,
            format,
        } => {
            if *n_samples == 0 || *n_streams == 0 {
                return Err(CliError::Invalid("--n and --n-streams must be at least 1".into()));
            }
            if !(*risk_budget > 0.0) {
                return Err(CliError::Invalid("--risk-budget must be positive".into()));
            }
            let file: ModelFile = read_json(model).map_err(input)?;
            let m = file.to_model().map_err(input)?;
            let cfg = McConfig::new(*n_samples, *seed).with_streams(*n_streams);
            let report = compare_policies(&m, &cfg, *risk_budget)?;
            Ok(match format {
                ReportFormat::Json => to_json_string(&report) + "\n",
                ReportFormat::Text => report.to_text(),
            })
        }
        Command::MergeStates { market, subset } => {
            let mkt = load_market(market)?;
            let (merged, delta_q) = merge_states(&mkt, subset).map_err(input)?;
            let report = MergeReport {
                subset: subset.clone(),
                q_original: q_of(&mkt)?,
                q_merged: q_of(&merged)?,
                delta_q,
                market: MarketFile::from_market(&merged),
            };
            Ok(to_json_string(&report) + "\n")
        }
        Command::LeverageAudit {
            csv_path,
            bandwidth,
            grid_size,
            floor,
            out,
        } => {
            let sample = read_leverage_csv(open(csv_path)?, &csv_path.display().to_string()).map_err(input)?;
            let opts = AuditOptions {
                bandwidth: *bandwidth,
                grid_size: *grid_size,
                floor: *floor,
            };
            let curve = audit(&sample, &opts).map_err(input)?;
            match out {
                Some(path) => {
                    write_leverage_csv(&curve, create(path)?).map_err(input)?;
                    Ok(to_json_string(&LeverageReport {
                        out: path.display().to_string(),
                        points: curve.len(),
                        bandwidth: curve.bandwidth,
                        floor: curve.floor,
                    }) + "\n")
                }
                None => {
                    let mut buf = Vec::new();
                    write_leverage_csv(&curve, &mut buf).map_err(input)?;
                    Ok(String::from_utf8(buf).expect("csv writer emits UTF-8"))
                }
            }
        }
        Command::Flatten {
            returns_csv,
            features_csv,
            out_path,
        } => {
            let r = read_table_csv(open(returns_csv)?, &returns_csv.display().to_string()).map_err(input)?;
            let f = read_table_csv(open(features_csv)?, &features_csv.display().to_string()).map_err(input)?;
            let data = flatten_pseudo_assets(&r.data, &f.data).map_err(input)?;
            let table = Table {
                columns: pseudo_asset_names(&r.columns, &f.columns),
                data,
            };
            write_table_csv(&table, create(out_path)?).map_err(input)?;
            Ok(to_json_string(&FileReport {
                out: out_path.display().to_string(),
                rows: table.data.nrows(),
                columns: table.data.ncols(),
            }) + "\n")
        }
    }
}

/// Re-evaluates a policy read back from `solve-discrete` output.
pub fn reevaluate(market: &DiscreteMarket, policy_rows: &[Vec<f64>], rfr: f64) -> Result<PerfSummary, SmmError> {
    evaluate(market, &Policy::from_rows(policy_rows)?, rfr)
}
