//! Static SVG charts. Every plotted value is also written as a
//! `<!-- data ... -->` comment so charts can be checked against the CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::metrics::{CurveRow, SummaryRow};
use super::{ensure_dir, HarnessError, Method};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// One data point recovered from a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn header(title: &str, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN,
        HEIGHT - MARGIN
    );
    s
}

fn data_comment(s: &mut String, series: &str, x: f64, y: f64) {
    let _ = writeln!(s, r#"<!-- data series="{series}" x="{x}" y="{y}" -->"#);
}

fn legend(s: &mut String, names: &[String]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{name}</text>"#,
            WIDTH - MARGIN - 90.0,
            y - 9.0,
            colour(i),
            WIDTH - MARGIN - 76.0,
            y
        );
    }
}

fn y_ticks(s: &mut String, max: f64) {
    for k in 0..=4 {
        let v = max * k as f64 / 4.0;
        let y = HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v:.3}</text>"#, MARGIN - 4.0, y + 4.0);
    }
}

/// Grouped bars: one group per CSP, one bar per method.
fn bar_chart(title: &str, y_label: &str, rows: &[SummaryRow], value: fn(&SummaryRow) -> f64) -> String {
    let mut methods: Vec<Method> = Vec::new();
    let mut csps: Vec<f64> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        if !csps.contains(&r.csp) {
            csps.push(r.csp);
        }
    }
    csps.sort_by(f64::total_cmp);
    let max = rows.iter().map(value).fold(0.0f64, f64::max).max(1e-12);
    let mut s = header(title, "communication success probability", y_label);
    y_ticks(&mut s, max);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let group_w = plot_w / csps.len() as f64;
    let bar_w = group_w * 0.8 / methods.len() as f64;
    for (g, &csp) in csps.iter().enumerate() {
        let gx = MARGIN + group_w * g as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{csp}</text>"#,
            gx + group_w / 2.0,
            HEIGHT - MARGIN + 16.0
        );
        for (m, &method) in methods.iter().enumerate() {
            let Some(r) = rows.iter().find(|r| r.method == method && r.csp == csp) else {
                continue;
            };
            let v = value(r);
            let h = plot_h * v / max;
            data_comment(&mut s, method.name(), csp, v);
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                gx + group_w * 0.1 + bar_w * m as f64,
                HEIGHT - MARGIN - h,
                bar_w,
                h,
                colour(m)
            );
        }
    }
    legend(&mut s, &methods.iter().map(|m| m.name().to_string()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Percent explored against distance, one line per method.
fn curve_chart(csp: f64, rows: &[&CurveRow]) -> String {
    let mut methods: Vec<Method> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let max_x = rows.iter().map(|r| r.mean_distance_m).fold(0.0f64, f64::max).max(1e-12);
    let mut s = header(
        &format!("Coverage against distance (csp {csp})"),
        "distance travelled (m)",
        "percent explored",
    );
    y_ticks(&mut s, 100.0);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    for (m, &method) in methods.iter().enumerate() {
        let pts: Vec<&&CurveRow> = rows.iter().filter(|r| r.method == method).collect();
        let mut path = String::new();
        for p in &pts {
            data_comment(&mut s, method.name(), p.mean_distance_m, p.decile_pct as f64);
            let x = MARGIN + plot_w * p.mean_distance_m / max_x;
            let y = HEIGHT - MARGIN - plot_h * p.decile_pct as f64 / 100.0;
            let _ = write!(path, "{}{x:.2},{y:.2} ", if path.is_empty() { "M" } else { "L" });
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            path.trim_end(),
            colour(m)
        );
    }
    legend(&mut s, &methods.iter().map(|m| m.name().to_string()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, body: String, written: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    std::fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes one bar chart per metric and one coverage chart per CSP.
/// Returns the files written; empty inputs produce no file for that family.
pub fn emit_plots(out_dir: &Path, summary: &[SummaryRow], curves: &[CurveRow]) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(out_dir)?;
    let mut written = Vec::new();
    if summary.is_empty() {
        log::info!("no summary rows; bar charts skipped");
    } else {
        let charts: [(&str, &str, &str, fn(&SummaryRow) -> f64); 5] = [
            ("steps", "Mean steps to completion", "steps", |r| r.mean_steps),
            ("distance", "Mean total distance", "metres", |r| r.mean_distance_m),
            ("interactions", "Mean local interactions", "pair-timesteps", |r| {
                r.mean_interactions
            }),
            ("ofv", "Mean objective value", "OFV", |r| r.mean_ofv),
            ("completion", "Completion rate", "fraction", |r| r.completion_rate),
        ];
        for (stem, title, label, value) in charts {
            write(
                out_dir.join(format!("{stem}.svg")),
                bar_chart(title, label, summary, value),
                &mut written,
            )?;
        }
    }
    if curves.is_empty() {
        log::info!("no curve rows; coverage charts skipped");
    } else {
        let mut csps: Vec<f64> = Vec::new();
        for r in curves {
            if !csps.contains(&r.csp) {
                csps.push(r.csp);
            }
        }
        csps.sort_by(f64::total_cmp);
        for csp in csps {
            let rows: Vec<&CurveRow> = curves.iter().filter(|r| r.csp == csp).collect();
            write(
                out_dir.join(format!("coverage_csp{csp}.svg")),
                curve_chart(csp, &rows),
                &mut written,
            )?;
        }
    }
    Ok(written)
}

/// Recovers the embedded data points of a chart written by `emit_plots`.
pub fn parse_plot_data(svg: &str) -> Vec<PlotPoint> {
    fn attr<'a>(line: &'a str, key: &str) -> Option<&'a str> {
        let start = line.find(&format!("{key}=\""))? + key.len() + 2;
        let len = line[start..].find('"')?;
        Some(&line[start..start + len])
    }
    svg.lines()
        .filter(|l| l.starts_with("<!-- data "))
        .filter_map(|l| {
            Some(PlotPoint {
                series: attr(l, "series")?.to_string(),
                x: attr(l, "x")?.parse().ok()?,
                y: attr(l, "y")?.parse().ok()?,
            })
        })
        .collect()
}
