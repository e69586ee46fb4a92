use std::collections::HashMap;
use std::path::Path;

use super::metrics::{CurveRow, SummaryRow};
use super::trials::TrialRecord;
use super::{HarnessError, Method};
use crate::world::SeriesPoint;

/// Wall-clock for one method over a whole suite.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodTiming {
    pub method: Method,
    pub trials: usize,
    pub total_ms: f64,
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, HarnessError> {
    csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| HarnessError::csv(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| HarnessError::csv(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub const TRIAL_COLUMNS: [&str; 10] = [
    "method",
    "env",
    "corner",
    "csp",
    "steps",
    "distance_m",
    "interactions",
    "ofv",
    "completed",
    "wall_ms",
];

pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &TRIAL_COLUMNS,
        records.iter().map(|r| {
            vec![
                r.method.to_string(),
                r.env.to_string(),
                r.corner.to_string(),
                r.csp.to_string(),
                r.steps.to_string(),
                r.distance_m.to_string(),
                r.interactions.to_string(),
                r.ofv.to_string(),
                (r.completed as u8).to_string(),
                r.wall_ms.to_string(),
            ]
        }),
    )
}

pub fn write_series_csv(path: &Path, records: &[TrialRecord]) -> Result<(), HarnessError> {
    let header = [
        "method", "env", "corner", "csp", "t", "explored", "covered", "reachable", "distance_m",
    ];
    write_rows(
        path,
        &header,
        records.iter().flat_map(|r| {
            r.series.iter().map(move |p| {
                vec![
                    r.method.to_string(),
                    r.env.to_string(),
                    r.corner.to_string(),
                    r.csp.to_string(),
                    p.t.to_string(),
                    p.explored.to_string(),
                    p.covered.to_string(),
                    r.reachable.to_string(),
                    p.distance_m.to_string(),
                ]
            })
        }),
    )
}

pub fn write_timing_csv(path: &Path, timing: &[MethodTiming]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &["method", "trials", "total_ms", "mean_ms"],
        timing.iter().map(|t| {
            vec![
                t.method.to_string(),
                t.trials.to_string(),
                format!("{:.3}", t.total_ms),
                format!("{:.3}", t.total_ms / t.trials.max(1) as f64),
            ]
        }),
    )
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &[
            "method",
            "csp",
            "mean_steps",
            "mean_distance_m",
            "mean_interactions",
            "mean_ofv",
            "completion_rate",
            "trials",
        ],
        rows.iter().map(|r| {
            vec![
                r.method.to_string(),
                r.csp.to_string(),
                r.mean_steps.to_string(),
                r.mean_distance_m.to_string(),
                r.mean_interactions.to_string(),
                r.mean_ofv.to_string(),
                r.completion_rate.to_string(),
                r.trials.to_string(),
            ]
        }),
    )
}

pub fn write_curves_csv(path: &Path, rows: &[CurveRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &["method", "csp", "decile_pct", "mean_distance_m"],
        rows.iter().map(|r| {
            vec![
                r.method.to_string(),
                r.csp.to_string(),
                r.decile_pct.to_string(),
                r.mean_distance_m.to_string(),
            ]
        }),
    )
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>, HarnessError> {
    csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, path: &Path) -> Result<T, HarnessError> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| HarnessError::Config(format!("{}:{line}: bad or missing `{name}`", path.display())))
}

/// Reads trials.csv back into records without series.
pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| HarnessError::csv(path, e))?.clone();
    if header.iter().ne(TRIAL_COLUMNS) {
        return Err(HarnessError::Config(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let method: String = field(&rec, 0, "method", path)?;
        out.push(TrialRecord {
            method: method.parse()?,
            env: field(&rec, 1, "env", path)?,
            corner: field(&rec, 2, "corner", path)?,
            csp: field(&rec, 3, "csp", path)?,
            steps: field(&rec, 4, "steps", path)?,
            distance_m: field(&rec, 5, "distance_m", path)?,
            interactions: field(&rec, 6, "interactions", path)?,
            ofv: field(&rec, 7, "ofv", path)?,
            completed: field::<u8>(&rec, 8, "completed", path)? != 0,
            wall_ms: field(&rec, 9, "wall_ms", path)?,
            reachable: 0,
            series: Vec::new(),
        });
    }
    Ok(out)
}

/// Attaches the series in series.csv to matching records.
pub fn read_series_csv(path: &Path, records: &mut [TrialRecord]) -> Result<(), HarnessError> {
    let mut rdr = reader(path)?;
    let mut by_key: HashMap<(Method, usize, usize, u64), (usize, Vec<SeriesPoint>)> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let method: String = field(&rec, 0, "method", path)?;
        let key = (
            method.parse::<Method>()?,
            field(&rec, 1, "env", path)?,
            field(&rec, 2, "corner", path)?,
            field::<f64>(&rec, 3, "csp", path)?.to_bits(),
        );
        let reachable = field(&rec, 7, "reachable", path)?;
        let entry = by_key.entry(key).or_insert_with(|| (reachable, Vec::new()));
        entry.1.push(SeriesPoint {
            t: field(&rec, 4, "t", path)?,
            explored: field(&rec, 5, "explored", path)?,
            covered: field(&rec, 6, "covered", path)?,
            distance_m: field(&rec, 8, "distance_m", path)?,
        });
    }
    for r in records.iter_mut() {
        if let Some((reachable, series)) = by_key.remove(&(r.method, r.env, r.corner, r.csp.to_bits())) {
            r.reachable = reachable;
            r.series = series;
        }
    }
    Ok(())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, HarnessError> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let method: String = field(&rec, 0, "method", path)?;
        out.push(SummaryRow {
            method: method.parse()?,
            csp: field(&rec, 1, "csp", path)?,
            mean_steps: field(&rec, 2, "mean_steps", path)?,
            mean_distance_m: field(&rec, 3, "mean_distance_m", path)?,
            mean_interactions: field(&rec, 4, "mean_interactions", path)?,
            mean_ofv: field(&rec, 5, "mean_ofv", path)?,
            completion_rate: field(&rec, 6, "completion_rate", path)?,
            trials: field(&rec, 7, "trials", path)?,
        });
    }
    Ok(out)
}

pub fn read_curves_csv(path: &Path) -> Result<Vec<CurveRow>, HarnessError> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let method: String = field(&rec, 0, "method", path)?;
        out.push(CurveRow {
            method: method.parse()?,
            csp: field(&rec, 1, "csp", path)?,
            decile_pct: field(&rec, 2, "decile_pct", path)?,
            mean_distance_m: field(&rec, 3, "mean_distance_m", path)?,
        });
    }
    Ok(out)
}
