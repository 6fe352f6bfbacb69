use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Portfolio, PortfolioSource};
use crate::error::{Error, FieldError, Result};
use crate::model::{OrganizationProfile, DEFAULT_M_MAX};

pub const DEFAULT_ERROR_BUDGET: f64 = 0.10;
const CSV_COLUMNS: [&str; 6] = ["org_id", "V", "E", "T_D", "sector_id", "M"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    /// Guesses from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidInput(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Largest tolerated share of rejected rows.
    pub max_error_fraction: f64,
    pub m_max: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            max_error_fraction: DEFAULT_ERROR_BUDGET,
            m_max: DEFAULT_M_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRejection {
    /// CSV line number or zero-based JSON array index.
    pub location: String,
    pub org_id: Option<String>,
    pub errors: Vec<FieldError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub portfolio: Portfolio,
    pub rejected: Vec<RowRejection>,
}

impl IngestReport {
    pub fn total_rows(&self) -> usize {
        self.portfolio.len() + self.rejected.len()
    }
}

pub fn ingest_portfolio(path: &Path, format: InputFormat, opts: &IngestOptions) -> Result<IngestReport> {
    let mut text = String::new();
    File::open(path)?
        .read_to_string(&mut text)
        .map_err(|e| Error::Format { location: "file".into(), message: e.to_string() })?;
    let rows = match format {
        InputFormat::Csv => parse_csv(&text)?,
        InputFormat::Json => parse_json(&text)?,
    };

    let total = rows.len();
    let mut profiles = Vec::new();
    let mut rejected = Vec::new();
    for (location, parsed) in rows {
        match parsed {
            Ok(p) => {
                let errors = p.field_errors(opts.m_max);
                if errors.is_empty() {
                    profiles.push(p);
                } else {
                    rejected.push(RowRejection { location, org_id: Some(p.org_id), errors });
                }
            }
            Err((org_id, errors)) => rejected.push(RowRejection { location, org_id, errors }),
        }
    }

    if total > 0 && rejected.len() as f64 / total as f64 > opts.max_error_fraction {
        return Err(Error::ErrorBudget {
            rejected: rejected.len(),
            total,
            max_fraction: opts.max_error_fraction,
        });
    }
    let portfolio = Portfolio::new(
        profiles,
        PortfolioSource::File { path: path.display().to_string(), format },
    );
    portfolio.check_unique_ids()?;
    Ok(IngestReport { portfolio, rejected })
}

type ParsedRow = (String, std::result::Result<OrganizationProfile, (Option<String>, Vec<FieldError>)>);

fn csv_location(pos: Option<&csv::Position>) -> String {
    match pos {
        Some(p) => format!("line {}, byte {}", p.line(), p.byte()),
        None => "unknown position".into(),
    }
}

fn parse_csv(text: &str) -> Result<Vec<ParsedRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Format {
        location: csv_location(e.position()),
        message: e.to_string(),
    })?;
    let mut index = [0usize; 6];
    for (slot, col) in index.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers.iter().position(|h| h == col).ok_or_else(|| Error::Format {
            location: "line 1".into(),
            message: format!("missing column `{col}`; expected {}", CSV_COLUMNS.join(",")),
        })?;
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format {
            location: csv_location(e.position()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(index[i]).unwrap_or("");
        let mut errors = Vec::new();
        let mut number = |i: usize, name: &str| -> f64 {
            field(i).parse::<f64>().unwrap_or_else(|_| {
                errors.push(FieldError::new(name, format!("not a number: `{}`", field(i))));
                f64::NAN
            })
        };
        let (v, e, t_d, m) = (number(1, "v"), number(2, "e"), number(3, "t_d"), number(5, "m"));
        let org_id = field(0).to_string();
        let parsed = if errors.is_empty() {
            Ok(OrganizationProfile { org_id, v, e, t_d, sector_id: field(4).to_string(), m })
        } else {
            Err((Some(org_id).filter(|s| !s.is_empty()), errors))
        };
        rows.push((format!("line {line}"), parsed));
    }
    Ok(rows)
}

fn parse_json(text: &str) -> Result<Vec<ParsedRow>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let serde_json::Value::Array(items) = value else {
        return Err(Error::Format {
            location: "line 1".into(),
            message: "expected a JSON array of organisations".into(),
        });
    };
    Ok(items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let org_id = item.get("org_id").and_then(|v| v.as_str()).map(str::to_string);
            let parsed = serde_json::from_value::<OrganizationProfile>(item)
                .map_err(|e| (org_id, vec![FieldError::new("record", e.to_string())]));
            (format!("item {i}"), parsed)
        })
        .collect())
}
