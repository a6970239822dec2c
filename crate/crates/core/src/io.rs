//! File formats: market, constraint and model JSON; leverage and sample CSV;
//! and a JSON writer that prints every float with 17 significant digits.
//!
//! Market:
//! ```json
//! {"states": [{"prob": 0.5, "mu": [1, 1], "sigma": [[1, 0], [0, 1]]}, ...]}
//! ```
//! Each state gives either `sigma` or `second_moment`.
//!
//! Constraints:
//! ```json
//! {"constraints": [{"kind": "zero_covariance", "target": [[1, 0], [1, 0]]},
//!                  {"kind": "raw", "g": [[0, 1], [1, 0]]}]}
//! ```
//!
//! Linear conditional expectation model:
//! ```json
//! {"B": [[...]], "sigma": [[...]], "feature_mean": [...], "feature_cov": [[...]]}
//! ```

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discrete::{DiscreteMarket, Policy};
use crate::error::{Result, SmmError};
use crate::hedging::HedgeConstraint;
use crate::lcem::LcemModel;
use crate::leverage::{LeverageCurve, LeverageSample};
use crate::linalg::{mat_from_rows, mat_to_rows};
use crate::moments::{MomentInput, MomentPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub prob: f64,
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_moment: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub states: Vec<StateSpec>,
}

impl MarketFile {
    pub fn to_market(&self) -> Result<DiscreteMarket> {
        let mut states = Vec::with_capacity(self.states.len());
        for (s, spec) in self.states.iter().enumerate() {
            let ctx = format!("state {s}");
            let mu = DVector::from_column_slice(&spec.mu);
            let pair = match (&spec.sigma, &spec.second_moment) {
                (Some(sig), None) => {
                    MomentPair::from_covariance(mu, mat_from_rows(sig, "sigma").map_err(|e| e.context(&ctx))?)
                }
                (None, Some(sm)) => MomentPair::from_second_moment(
                    mu,
                    mat_from_rows(sm, "second_moment").map_err(|e| e.context(&ctx))?,
                ),
                _ => {
                    return Err(SmmError::InvalidInput(format!(
                        "{ctx}: give exactly one of sigma or second_moment"
                    )))
                }
            }
            .map_err(|e| e.context(&ctx))?;
            states.push((spec.prob, pair));
        }
        DiscreteMarket::new(states)
    }

    /// Serializes each state in the parameterization it was built from.
    pub fn from_market(market: &DiscreteMarket) -> Self {
        MarketFile {
            states: market
                .probs()
                .iter()
                .zip(market.states())
                .map(|(&prob, m)| {
                    let mu = m.mu().iter().copied().collect();
                    match m.supplied() {
                        MomentInput::Covariance => StateSpec {
                            prob,
                            mu,
                            sigma: Some(mat_to_rows(m.sigma())),
                            second_moment: None,
                        },
                        MomentInput::SecondMoment => StateSpec {
                            prob,
                            mu,
                            sigma: None,
                            second_moment: Some(mat_to_rows(m.second_moment())),
                        },
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    ZeroCovariance { target: Vec<Vec<f64>> },
    Raw { g: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub constraints: Vec<ConstraintSpec>,
}

impl ConstraintFile {
    pub fn to_constraints(&self, market: &DiscreteMarket) -> Result<Vec<HedgeConstraint>> {
        self.constraints
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let ctx = format!("constraint {j}");
                match c {
                    ConstraintSpec::ZeroCovariance { target } => {
                        HedgeConstraint::zero_covariance(market, Policy::from_rows(target)?)
                    }
                    ConstraintSpec::Raw { g } => HedgeConstraint::raw(market, Policy::from_rows(g)?),
                }
                .map_err(|e| e.context(&ctx))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub feature_mean: Vec<f64>,
    pub feature_cov: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn to_model(&self) -> Result<LcemModel> {
        LcemModel::new(
            mat_from_rows(&self.b, "B")?,
            mat_from_rows(&self.sigma, "sigma")?,
            DVector::from_column_slice(&self.feature_mean),
            mat_from_rows(&self.feature_cov, "feature_cov")?,
        )
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SmmError::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| SmmError::InvalidInput(format!("{}: {e}", path.display())))
}

/// Formats floats as `{:.16e}` (17 significant digits), which round-trips
/// every finite double exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct Precise17;

impl serde_json::ser::Formatter for Precise17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as compact JSON with 17 significant digits per float.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise17);
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn csv_err(path: &str, e: impl std::fmt::Display) -> SmmError {
    SmmError::InvalidInput(format!("{path}: {e}"))
}

/// Reads a `leverage,return` CSV with a header row.
pub fn read_leverage_csv<R: Read>(reader: R, name: &str) -> Result<LeverageSample> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    if headers.len() != 2 || &headers[0] != "leverage" || &headers[1] != "return" {
        return Err(csv_err(name, "expected header `leverage,return`"));
    }
    let mut x = vec![];
    let mut z = vec![];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let parse = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .map_err(|e| csv_err(name, format!("row {}: {e}", i + 1)))
        };
        x.push(parse(0)?);
        z.push(parse(1)?);
    }
    LeverageSample::new(x, z)
}

/// Writes `x,m_hat,s_hat,lever_hat`.
pub fn write_leverage_csv<W: Write>(curve: &LeverageCurve, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| SmmError::InvalidInput(e.to_string());
    w.write_record(["x", "m_hat", "s_hat", "lever_hat"]).map_err(io)?;
    for i in 0..curve.len() {
        w.write_record([
            format!("{:.16e}", curve.grid[i]),
            format!("{:.16e}", curve.m_hat[i]),
            format!("{:.16e}", curve.s_hat[i]),
            format!("{:.16e}", curve.lever_hat[i]),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| SmmError::InvalidInput(e.to_string()))?;
    Ok(())
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub data: DMatrix<f64>,
}

pub fn read_table_csv<R: Read>(reader: R, name: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let columns: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(name, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = vec![];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let row = rec
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| csv_err(name, format!("row {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let data = mat_from_rows(&rows, name)?;
    if data.nrows() > 0 && data.ncols() != columns.len() {
        return Err(csv_err(name, "row width does not match header"));
    }
    Ok(Table {
        data: if rows.is_empty() { DMatrix::zeros(0, columns.len()) } else { data },
        columns,
    })
}

pub fn write_table_csv<W: Write>(table: &Table, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| SmmError::InvalidInput(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in table.data.row_iter() {
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| SmmError::InvalidInput(e.to_string()))?;
    Ok(())
}

/// Column names for flattened pseudo-assets, `asset*feature`, in the same
/// asset-major order as [`crate::hedging::flatten_pseudo_assets`].
pub fn pseudo_asset_names(assets: &[String], features: &[String]) -> Vec<String> {
    assets
        .iter()
        .flat_map(|a| features.iter().map(move |f| format!("{a}*{f}")))
        .collect()
}
