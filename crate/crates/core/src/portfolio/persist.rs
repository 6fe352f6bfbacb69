use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Portfolio, PortfolioSource, Provenance};
use crate::error::{Error, Result};
use crate::model::{ModelParams, OrganizationProfile, ScoreReport};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: String,
    provenance: Provenance,
    source: PortfolioSource,
    params: ModelParams,
    t0: f64,
    created_at: String,
    records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Record {
    profile: OrganizationProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<ScoreReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistedPortfolio {
    pub portfolio: Portfolio,
    pub reports: Vec<ScoreReport>,
    pub params: ModelParams,
    pub t0: f64,
    pub created_at: String,
}

/// Writes a JSON-lines file: one header line, then one line per organisation
/// carrying its profile and, when present, its report. The file is written
/// under a temporary name and renamed into place.
pub fn persist_portfolio(
    path: &Path,
    portfolio: &Portfolio,
    reports: &[ScoreReport],
    params: &ModelParams,
    t0: f64,
) -> Result<()> {
    portfolio.check_unique_ids()?;
    let mut by_id: HashMap<&str, &ScoreReport> = HashMap::with_capacity(reports.len());
    for r in reports {
        if by_id.insert(r.org_id.as_str(), r).is_some() {
            return Err(Error::DuplicateOrgId(r.org_id.clone()));
        }
    }
    if let Some(r) = reports
        .iter()
        .find(|r| !portfolio.profiles.iter().any(|p| p.org_id == r.org_id))
    {
        return Err(Error::InvalidInput(format!(
            "report for `{}` has no matching profile",
            r.org_id
        )));
    }

    let header = Header {
        format_version: FORMAT_VERSION.into(),
        provenance: portfolio.provenance,
        source: portfolio.source.clone(),
        params: *params,
        t0,
        created_at: chrono::Utc::now().to_rfc3339(),
        records: portfolio.len(),
    };
    let tmp = path.with_extension("jsonl.partial");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for p in &portfolio.profiles {
            let rec = Record {
                profile: p.clone(),
                report: by_id.get(p.org_id.as_str()).map(|r| (*r).clone()),
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_portfolio(path: &Path) -> Result<PersistedPortfolio> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let corrupt = |line: usize, message: String, last_good: Option<String>| Error::Corrupt {
        line,
        message,
        last_good,
    };

    let first = lines
        .next()
        .ok_or_else(|| corrupt(1, "empty file".into(), None))??;
    let raw: serde_json::Value =
        serde_json::from_str(&first).map_err(|e| corrupt(1, format!("header: {e}"), None))?;
    let version = raw
        .get("format_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| corrupt(1, "header lacks format_version".into(), None))?;
    if version != FORMAT_VERSION {
        return Err(Error::MigrationNeeded {
            found: version.to_string(),
            expected: FORMAT_VERSION.to_string(),
        });
    }
    let header: Header =
        serde_json::from_value(raw).map_err(|e| corrupt(1, format!("header: {e}"), None))?;

    let mut profiles = Vec::with_capacity(header.records);
    let mut reports = Vec::new();
    let mut last_good: Option<String> = None;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| corrupt(line_no, e.to_string(), last_good.clone()))?;
        last_good = Some(rec.profile.org_id.clone());
        profiles.push(rec.profile);
        reports.extend(rec.report);
    }
    if profiles.len() != header.records {
        return Err(corrupt(
            profiles.len() + 1,
            format!("expected {} records, found {}", header.records, profiles.len()),
            last_good,
        ));
    }
    let portfolio = Portfolio {
        profiles,
        provenance: header.provenance,
        source: header.source,
    };
    Ok(PersistedPortfolio {
        portfolio,
        reports,
        params: header.params,
        t0: header.t0,
        created_at: header.created_at,
    })
}
