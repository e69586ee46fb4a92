use super::trials::TrialRecord;
use super::{HarnessError, Method};
use crate::world::SeriesPoint;

/// Sum over timesteps of explored cells per metre travelled. Timesteps with
/// zero distance are skipped.
pub fn compute_ofv(explored: &[f64], distance: &[f64]) -> Result<f64, HarnessError> {
    if explored.len() != distance.len() {
        return Err(HarnessError::LengthMismatch {
            explored: explored.len(),
            distance: distance.len(),
        });
    }
    Ok(explored
        .iter()
        .zip(distance)
        .filter(|(_, &d)| d > 0.0)
        .map(|(e, d)| e / d)
        .sum())
}

pub const DECILES: [u32; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];

/// Distance travelled when coverage first reaches each decile, linearly
/// interpolated between timesteps. `None` for deciles never reached.
pub fn decile_distances(series: &[SeriesPoint], reachable: usize) -> [Option<f64>; 10] {
    let mut out = [None; 10];
    if reachable == 0 || series.is_empty() {
        return out;
    }
    let pct = |p: &SeriesPoint| p.covered as f64 * 100.0 / reachable as f64;
    for (slot, &decile) in out.iter_mut().zip(&DECILES) {
        let target = decile as f64;
        let Some(k) = series.iter().position(|p| pct(p) >= target) else {
            continue;
        };
        *slot = Some(if k == 0 {
            series[0].distance_m
        } else {
            let (a, b) = (&series[k - 1], &series[k]);
            let (pa, pb) = (pct(a), pct(b));
            a.distance_m + (target - pa) / (pb - pa) * (b.distance_m - a.distance_m)
        });
    }
    out
}

/// Per-method, per-CSP means.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub csp: f64,
    pub trials: usize,
    pub mean_steps: f64,
    pub mean_distance_m: f64,
    pub mean_interactions: f64,
    pub mean_ofv: f64,
    pub completion_rate: f64,
}

/// Mean distance at which trials reach a coverage decile.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub method: Method,
    pub csp: f64,
    pub decile_pct: u32,
    pub mean_distance_m: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Groups records by method (in first-seen order) and CSP (ascending).
/// Method/CSP pairs with no records are skipped with a warning. Curves use
/// only records that carry a series.
pub fn summarize(records: &[TrialRecord]) -> (Vec<SummaryRow>, Vec<CurveRow>) {
    let mut methods: Vec<Method> = Vec::new();
    let mut csps: Vec<f64> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        if !csps.contains(&r.csp) {
            csps.push(r.csp);
        }
    }
    csps.sort_by(f64::total_cmp);
    let mut summary = Vec::new();
    let mut curves = Vec::new();
    for &method in &methods {
        for &csp in &csps {
            let group: Vec<&TrialRecord> = records.iter().filter(|r| r.method == method && r.csp == csp).collect();
            if group.is_empty() {
                log::warn!("no records for {method} at csp {csp}; row omitted");
                continue;
            }
            summary.push(SummaryRow {
                method,
                csp,
                trials: group.len(),
                mean_steps: mean(group.iter().map(|r| r.steps as f64)),
                mean_distance_m: mean(group.iter().map(|r| r.distance_m)),
                mean_interactions: mean(group.iter().map(|r| r.interactions as f64)),
                mean_ofv: mean(group.iter().map(|r| r.ofv)),
                completion_rate: mean(group.iter().map(|r| r.completed as u8 as f64)),
            });
            let per_trial: Vec<[Option<f64>; 10]> = group
                .iter()
                .filter(|r| !r.series.is_empty())
                .map(|r| decile_distances(&r.series, r.reachable))
                .collect();
            for (k, &decile_pct) in DECILES.iter().enumerate() {
                let reached: Vec<f64> = per_trial.iter().filter_map(|d| d[k]).collect();
                if !reached.is_empty() {
                    curves.push(CurveRow {
                        method,
                        csp,
                        decile_pct,
                        mean_distance_m: mean(reached.into_iter()),
                    });
                }
            }
        }
    }
    (summary, curves)
}
