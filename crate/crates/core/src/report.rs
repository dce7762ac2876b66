//! Record files, summary tables, SVG charts and run manifests.
//!
//! Every output is a pure function of its input; nothing depends on time,
//! host or thread count.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::{AggregateStats, RunRecord, Summary};
use crate::lab::LemmaReport;

pub const RECORD_FORMAT_VERSION: u32 = 1;
pub const SUMMARY_FORMAT_VERSION: u32 = 1;
pub const PLOT_FORMAT_VERSION: u32 = 1;

/// One JSON object per line. `serde_json` prints the shortest decimal that
/// parses back to the same `f64`, so loading is exact.
pub fn records_to_string(records: &[RunRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::InvalidArgument(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(records_to_string(records)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Parses line-delimited records; blank lines are skipped. Errors carry the
/// 1-based line number.
pub fn parse_records(text: &str) -> Result<Vec<RunRecord>> {
    parse_lines(text.lines().map(|l| Ok(l.to_string())))
}

pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let reader = BufReader::new(fs::File::open(path)?);
    parse_lines(reader.lines().map(|l| l.map_err(Error::from)))
}

fn parse_lines(lines: impl Iterator<Item = Result<String>>) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec =
            serde_json::from_str(&line).map_err(|e| Error::RecordParse { line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

/// Lemma reports, one JSON object per line. Non-finite numbers become `null`.
pub fn lemma_reports_to_string(reports: &[LemmaReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::InvalidArgument(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

const SUMMARY_HEADER: [&str; 22] = [
    "algorithm",
    "problem",
    "n",
    "k",
    "mu",
    "runs",
    "successes",
    "errors",
    "success_rate",
    "iter_median",
    "iter_q25",
    "iter_q75",
    "iter_mean",
    "iter_max",
    "eval_median",
    "eval_mean",
    "d_prime_crossing_median",
    "d_double_prime_crossing_median",
    "floor_held_fraction",
    "min_frequency_min",
    "gap_samples_median",
    "gap_samples_mean",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn field(s: Option<Summary>, f: fn(&Summary) -> f64) -> String {
    opt(s.as_ref().map(f))
}

/// Header row plus one row per cell; `NA` marks missing values.
pub fn summary_csv_string(stats: &[AggregateStats]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in stats {
        let algorithm =
            serde_json::to_value(s.algorithm).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let row = [
            algorithm,
            s.problem.clone(),
            s.n.to_string(),
            opt(s.k),
            opt(s.mu),
            s.runs.to_string(),
            s.successes.to_string(),
            s.errors.to_string(),
            s.success_rate.to_string(),
            field(s.iterations, |x| x.median),
            field(s.iterations, |x| x.q25),
            field(s.iterations, |x| x.q75),
            field(s.iterations, |x| x.mean),
            field(s.iterations, |x| x.max),
            field(s.evaluations, |x| x.median),
            field(s.evaluations, |x| x.mean),
            field(s.d_prime_crossing, |x| x.median),
            field(s.d_double_prime_crossing, |x| x.median),
            s.floor_held_fraction.to_string(),
            field(s.min_frequency, |x| x.min),
            field(s.gap_samples, |x| x.median),
            field(s.gap_samples, |x| x.mean),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn emit_summary_csv(stats: &[AggregateStats], path: &Path) -> Result<()> {
    fs::write(path, summary_csv_string(stats)?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Join the points of each series with a line.
    pub lines: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let u = i as f64 / 4.0;
                let raw = self.lo + u * (self.hi - self.lo);
                let v = if self.log { 10f64.powf(raw) } else { raw };
                (u, format!("{v:.3e}"))
            })
            .collect()
    }
}

/// A deterministic SVG chart. Each data point becomes exactly one
/// `<circle class="point">`; points that cannot be drawn on a log axis
/// (non-positive) are dropped.
pub fn plot_svg_string(plot: &Plot) -> String {
    let usable =
        |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0);
    let all = || plot.series.iter().flat_map(|s| s.points.iter().copied()).filter(usable);
    let ax = Axis::fit(all().map(|p| p.0), plot.log_x);
    let ay = Axis::fit(all().map(|p| p.1), plot.log_y);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + ax.unit(x) * pw;
    let py = |y: f64| TOP + (1.0 - ay.unit(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#);
    for (u, label) in ax.ticks() {
        let x = LEFT + u * pw;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0
        );
    }
    for (u, label) in ay.ticks() {
        let y = TOP + (1.0 - u) * ph;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 5.0,
            LEFT - 7.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&plot.y_label)
    );
    for (i, series) in plot.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = series.points.iter().copied().filter(usable).map(|(x, y)| (px(x), py(y))).collect();
        let _ = writeln!(s, r#"<g class="series" data-name="{}">"#, escape(&series.name));
        if plot.lines && pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                path.join(" ")
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle class="point" cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 9.0,
            lx + 14.0,
            escape(&series.name)
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_plot_svg(plot: &Plot, path: &Path) -> Result<()> {
    fs::write(path, plot_svg_string(plot))?;
    Ok(())
}

/// Log-log chart of median iterations against `n`, one series per
/// algorithm and problem.
pub fn scaling_plot(stats: &[AggregateStats]) -> Plot {
    let mut series: Vec<Series> = Vec::new();
    for s in stats {
        let Some(it) = s.iterations else { continue };
        let name = format!("{:?} {}", s.algorithm, s.problem).to_lowercase();
        match series.iter_mut().find(|x| x.name == name) {
            Some(x) => x.points.push((s.n as f64, it.median)),
            None => series.push(Series { name, points: vec![(s.n as f64, it.median)] }),
        }
    }
    Plot {
        title: "median iterations".into(),
        x_label: "n".into(),
        y_label: "iterations (successful runs)".into(),
        log_x: true,
        log_y: true,
        lines: true,
        series,
    }
}

/// `D_t` over time for every record that carries a trajectory.
pub fn distance_plot(records: &[RunRecord], max_series: usize) -> Plot {
    let series = records
        .iter()
        .filter_map(|r| {
            let d = r.trace.as_ref()?.d_trajectory.as_ref()?;
            Some(Series {
                name: format!("{} n={} #{}", r.problem.label(), r.n, r.seed_index),
                points: d.iter().map(|&(t, v)| (t as f64, v)).collect(),
            })
        })
        .take(max_series)
        .collect();
    Plot {
        title: "frequency distance D_t".into(),
        x_label: "t".into(),
        y_label: "D_t".into(),
        log_x: false,
        log_y: false,
        lines: true,
        series,
    }
}

/// Estimates against stated bounds, indexed by report position.
pub fn bound_plot(reports: &[LemmaReport]) -> Plot {
    let mut est = Series { name: "estimate".into(), points: Vec::new() };
    let mut bound = Series { name: "bound".into(), points: Vec::new() };
    for (i, r) in reports.iter().enumerate() {
        est.points.push((i as f64, r.estimate));
        if let Some(b) = r.bound {
            bound.points.push((i as f64, b));
        }
    }
    Plot {
        title: "estimate vs bound".into(),
        x_label: "configuration".into(),
        y_label: "value".into(),
        log_x: false,
        log_y: false,
        lines: false,
        series: vec![est, bound],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    /// SHA-256 of the canonical configuration text.
    pub config_sha256: String,
    pub base_seed: u64,
    pub record_format_version: u32,
    pub summary_format_version: u32,
    pub plot_format_version: u32,
    pub files: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Manifest {
    pub fn new(config_text: &str, base_seed: u64, files: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            base_seed,
            record_format_version: RECORD_FORMAT_VERSION,
            summary_format_version: SUMMARY_FORMAT_VERSION,
            plot_format_version: PLOT_FORMAT_VERSION,
            files,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{aggregate, run_experiment, ExperimentConfig, MuRule, ProblemSpec};

    fn records() -> Vec<RunRecord> {
        let mut c = ExperimentConfig::new(vec![ProblemSpec::onemax(), ProblemSpec::jump(2)], vec![10, 14], 3, 1);
        c.mu = MuRule { factor: 2.0, fixed: None };
        c.telemetry.record_trajectories = true;
        run_experiment(&c).unwrap()
    }

    #[test]
    fn empty_records_are_an_empty_file() {
        assert_eq!(records_to_string(&[]).unwrap(), "");
        assert!(parse_records("").unwrap().is_empty());
    }

    #[test]
    fn records_round_trip() {
        let recs = records();
        let text = records_to_string(&recs).unwrap();
        assert_eq!(text.lines().count(), recs.len());
        let back = parse_records(&text).unwrap();
        assert_eq!(back, recs);
        assert_eq!(records_to_string(&back).unwrap(), text);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let recs = records();
        let mut text = records_to_string(&recs[..2]).unwrap();
        text.push_str("{not json}\n");
        match parse_records(&text) {
            Err(Error::RecordParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_cell_csv_has_two_lines() {
        let recs: Vec<RunRecord> = records().into_iter().take(3).collect();
        let csv = summary_csv_string(&aggregate(&recs)).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("algorithm,problem,n,"));
    }

    #[test]
    fn plot_has_one_circle_per_point() {
        let plot = Plot {
            title: "t".into(),
            x_label: "n".into(),
            y_label: "y".into(),
            log_x: true,
            log_y: true,
            lines: true,
            series: vec![
                Series { name: "a".into(), points: vec![(64.0, 100.0), (128.0, 210.0), (256.0, 450.0)] },
                Series { name: "b<c>".into(), points: vec![(64.0, 90.0), (128.0, 200.0), (256.0, 400.0)] },
            ],
        };
        let svg = plot_svg_string(&plot);
        assert_eq!(svg.matches(r#"class="point""#).count(), 6);
        assert!(svg.contains("b&lt;c&gt;"));
        assert_eq!(svg, plot_svg_string(&plot));
    }

    #[test]
    fn derived_plots() {
        let recs = records();
        let stats = aggregate(&recs);
        let p = scaling_plot(&stats);
        assert!(p.series.iter().all(|s| s.points.len() <= 2));
        assert_eq!(distance_plot(&recs, 3).series.len(), 3);
    }

    #[test]
    fn manifest_hash() {
        let m = Manifest::new("abc", 5, vec![]);
        assert_eq!(m.config_sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
