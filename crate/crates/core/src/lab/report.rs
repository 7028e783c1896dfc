//! CSV, JSON and SVG output.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::decay::DecayBin;
use super::influence::{summarize, InfluenceRecord};
use super::{ExperimentConfig, LabError};
use crate::rng::splitmix64;

/// Creates `dir` and checks that a file can be written there.
pub fn prepare_output(dir: &Path) -> Result<(), LabError> {
    let fail = |e: std::io::Error| LabError::Runtime(format!("output directory {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".rfim-lab-probe");
    fs::write(&probe, b"").map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)
}

pub fn write_csv<T: Serialize, W: Write>(records: &[T], w: W) -> Result<(), LabError> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>, LabError> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|x| x.map_err(LabError::from))
        .collect()
}

pub fn write_csv_file<T: Serialize>(path: &Path, records: &[T]) -> Result<(), LabError> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Header row only, for commands that produced no rows of a kind.
pub fn influence_header() -> &'static str {
    "T,eps,N,replica,m_hat,stderr,sweeps,seconds"
}

/// Deterministic identifier of a configuration (not a cryptographic hash).
pub fn run_id(cfg: &ExperimentConfig) -> String {
    let h = cfg
        .to_text()
        .bytes()
        .fold(0x5eed_u64, |acc, b| splitmix64(acc ^ b as u64));
    format!("{h:016x}")
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    run_id: String,
    unix_time: u64,
    seconds: f64,
}

/// `summary.json`: metadata, the configuration, and command results.
pub fn write_summary<T: Serialize>(
    dir: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    seconds: f64,
    results: &T,
) -> Result<PathBuf, LabError> {
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = serde_json::json!({
        "metadata": Metadata { tool: "rfim-lab", version: env!("CARGO_PKG_VERSION"), command, run_id: run_id(cfg), unix_time, seconds },
        "config": cfg,
        "results": results,
    });
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    Ok(path)
}

/// A line chart in a small SVG subset: `svg`, `g`, `line`, `polyline`,
/// `circle`, `text`.
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|(_, p)| p.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let range = |f: fn(&(f64, f64)) -> f64| {
            let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            match (lo.is_finite(), hi > lo) {
                (false, _) => (0.0, 1.0),
                (true, true) => (lo, hi),
                (true, false) => (lo - 0.5, lo + 0.5),
            }
        };
        let (x0, x1) = range(|p| p.0);
        let (y0, y1) = range(|p| p.1);
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
            H - PAD,
            W - PAD,
            H - PAD
        );
        let _ = writeln!(
            s,
            r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#,
            H - PAD
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            W / 2.0,
            H - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (v, anchor, x, y) in [(x0, "start", PAD, H - PAD + 16.0), (x1, "end", W - PAD, H - PAD + 16.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#
            );
        }
        for (v, y) in [(y0, H - PAD), (y1, PAD)] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{v:.3}</text>"#,
                PAD - 4.0
            );
        }
        for (i, (name, points)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let coords: Vec<String> = points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(s, r#"<g stroke="{color}" fill="{color}">"#);
            let _ = writeln!(s, r#"<polyline points="{}" fill="none"/>"#, coords.join(" "));
            for c in &coords {
                let (x, y) = c.split_once(',').expect("formatted pair");
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3"/>"#);
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" stroke="none">{}</text>"#,
                W - PAD + 4.0,
                PAD + 14.0 * i as f64,
                escape(name)
            );
            s.push_str("</g>\n");
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Replica-averaged `m̂` against `ε`, one line per `(T, N)`.
pub fn influence_plot(records: &[InfluenceRecord]) -> LinePlot {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for s in summarize(records) {
        let name = format!("T={} N={}", s.t, s.n);
        match series.iter_mut().find(|(n, _)| *n == name) {
            Some((_, pts)) => pts.push((s.eps, s.m_mean)),
            None => series.push((name, vec![(s.eps, s.m_mean)])),
        }
    }
    LinePlot {
        title: "boundary influence".into(),
        x_label: "eps".into(),
        y_label: "m".into(),
        series,
    }
}

/// `ln P(L = ℓ)` against `ℓ`.
pub fn decay_plot(bins: &[DecayBin]) -> LinePlot {
    LinePlot {
        title: "law of L = |B u B'|".into(),
        x_label: "L".into(),
        y_label: "ln P(L)".into(),
        series: vec![("P(L)".into(), bins.iter().map(|b| (b.l as f64, b.prob.ln())).collect())],
    }
}

/// Checks that `svg` only uses the declared element subset and that tags
/// nest properly.
pub fn check_svg(svg: &str) -> Result<(), String> {
    const ALLOWED: [&str; 6] = ["svg", "g", "line", "polyline", "circle", "text"];
    let mut stack: Vec<&str> = Vec::new();
    let mut rest = svg;
    while let Some(open) = rest.find('<') {
        let close = rest[open..].find('>').ok_or("unterminated tag")? + open;
        let tag = &rest[open + 1..close];
        rest = &rest[close + 1..];
        if let Some(name) = tag.strip_prefix('/') {
            match stack.pop() {
                Some(top) if top == name.trim() => {}
                other => return Err(format!("closing </{name}> does not match {other:?}")),
            }
            continue;
        }
        let name = tag.split_whitespace().next().unwrap_or("").trim_end_matches('/');
        if !ALLOWED.contains(&name) {
            return Err(format!("element <{name}> outside the subset"));
        }
        if !tag.matches('"').count().is_multiple_of(2) {
            return Err(format!("unbalanced quotes in <{name}>"));
        }
        if !tag.ends_with('/') {
            stack.push(name);
        }
    }
    match (stack.is_empty(), svg.trim_start().starts_with("<svg")) {
        (true, true) => Ok(()),
        (false, _) => Err(format!("unclosed elements {stack:?}")),
        (_, false) => Err("document does not start with <svg>".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(replica: usize, seconds: Option<f64>) -> InfluenceRecord {
        InfluenceRecord {
            t: 3.0,
            eps: 0.1,
            n: 8,
            replica,
            m_hat: 0.1 + 1.0 / 3.0,
            stderr: 1e-3 / 7.0,
            sweeps: 100,
            seconds,
        }
    }

    #[test]
    fn influence_csv_round_trip() {
        let recs = vec![record(0, None), record(1, Some(0.25))];
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), influence_header());
        assert!(text.lines().nth(1).unwrap().ends_with(",100,"));
        let back: Vec<InfluenceRecord> = read_csv(&buf[..]).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn decay_csv_round_trip() {
        let bins = vec![
            DecayBin {
                l: 0,
                count: 3,
                prob: 0.3,
                prob_stderr: 0.01,
            },
            DecayBin {
                l: 7,
                count: 7,
                prob: 0.7,
                prob_stderr: 0.02,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&bins, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("L,count,prob,prob_stderr\n"));
        assert_eq!(read_csv::<DecayBin, _>(&buf[..]).unwrap(), bins);
    }

    #[test]
    fn svg_is_well_formed() {
        let plot = influence_plot(&[record(0, None), record(1, None)]);
        check_svg(&plot.to_svg()).unwrap();
        let bins = vec![DecayBin {
            l: 3,
            count: 1,
            prob: 1.0,
            prob_stderr: 0.0,
        }];
        check_svg(&decay_plot(&bins).to_svg()).unwrap();
        assert!(check_svg("<svg><rect/></svg>").is_err());
        assert!(check_svg("<svg><g></svg>").is_err());
    }

    #[test]
    fn unwritable_output_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, b"x").unwrap();
        assert!(matches!(prepare_output(&file.join("sub")), Err(LabError::Runtime(_))));
        prepare_output(&dir.path().join("fresh")).unwrap();
    }
}
