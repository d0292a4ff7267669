//! Leaderboard artifacts: CSV table, JSON document and a radar chart.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, CorpusStats, ReliabilityReport};
use crate::optimizer::store::{read_json, write_atomic, write_json};
use crate::ranking::{leaderboard_csv, RankingOutput};
use crate::values::{OrientationProfile, ValueSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    JsonDoc,
    RadarSvg,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::JsonDoc, ReportFormat::RadarSvg];

    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Csv => "leaderboard.csv",
            ReportFormat::JsonDoc => "report.json",
            ReportFormat::RadarSvg => "radar.svg",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" | "json-doc" => Ok(ReportFormat::JsonDoc),
            "svg" | "radar-svg" => Ok(ReportFormat::RadarSvg),
            _ => Err(AnalysisError::Input(format!("unknown report format `{s}` (csv, json-doc, radar-svg)"))),
        }
    }
}

/// The JSON report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub system: String,
    pub dimensions: Vec<String>,
    pub leaderboard: Vec<OrientationProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<CorpusStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<ReliabilityReport>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

pub fn load_report(path: &Path) -> Result<ReportDoc, AnalysisError> {
    Ok(read_json(path)?)
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Radar chart: one axis per dimension, radius 0..100, one closed polygon
/// per model.
pub fn radar_svg(leaderboard: &[OrientationProfile], dims: &[String]) -> String {
    let (size, r, c) = (640.0, 220.0, 320.0);
    let d = dims.len().max(1) as f64;
    let point = |k: usize, v: f64| {
        let a = std::f64::consts::TAU * k as f64 / d - std::f64::consts::FRAC_PI_2;
        (c + r * v / 100.0 * a.cos(), c + r * v / 100.0 * a.sin())
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for ring in [25.0, 50.0, 75.0, 100.0] {
        let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{:.2}" fill="none" stroke="#ddd"/>"##, r * ring / 100.0);
    }
    for (k, dim) in dims.iter().enumerate() {
        let (x, y) = point(k, 100.0);
        let (lx, ly) = point(k, 112.0);
        let _ = writeln!(s, r##"<line class="axis" x1="{c}" y1="{c}" x2="{x:.2}" y2="{y:.2}" stroke="#999"/>"##);
        let _ = writeln!(s, r#"<text x="{lx:.2}" y="{ly:.2}" font-size="12" text-anchor="middle">{}</text>"#, escape(dim));
    }
    for (i, p) in leaderboard.iter().enumerate() {
        let pts: Vec<String> = p
            .scores
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let (x, y) = point(k, v.clamp(0.0, 100.0));
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<polygon class="model" data-model="{}" points="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#,
            escape(&p.model),
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="12" y="{}" font-size="12" fill="{color}">{}</text>"#,
            20 + 16 * i,
            escape(&p.model)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Writes the requested artifact under `dir` and returns its path.
pub fn emit_report(
    out: &RankingOutput,
    system: &ValueSystem,
    stats: Option<&CorpusStats>,
    reliability: Option<&ReliabilityReport>,
    format: ReportFormat,
    dir: &Path,
) -> Result<PathBuf, AnalysisError> {
    if out.leaderboard.is_empty() {
        return Err(AnalysisError::Input("empty leaderboard".into()));
    }
    let dims: Vec<String> = system.dimensions().iter().map(|d| d.id.clone()).collect();
    let path = dir.join(format.file_name());
    match format {
        ReportFormat::Csv => write_atomic(&path, leaderboard_csv(out)?.as_bytes())?,
        ReportFormat::JsonDoc => write_json(
            &path,
            &ReportDoc {
                system: system.name().to_string(),
                dimensions: dims,
                leaderboard: out.leaderboard.clone(),
                stats: stats.cloned(),
                reliability: reliability.cloned(),
                warnings: out.warnings.clone(),
            },
        )?,
        ReportFormat::RadarSvg => write_atomic(&path, radar_svg(&out.leaderboard, &dims).as_bytes())?,
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::{Ratings, RankingConfig};

    fn output(models: &[&str]) -> (RankingOutput, ValueSystem) {
        let s = ValueSystem::schwartz();
        let ids: Vec<String> = models.iter().map(|m| m.to_string()).collect();
        let ratings = Ratings::new(&ids, &s, &RankingConfig::default());
        let leaderboard = ids
            .iter()
            .enumerate()
            .map(|(i, m)| OrientationProfile {
                model: m.clone(),
                scores: (0..s.len()).map(|k| (10 * i + 7 * k) as f64 / 3.0).collect(),
            })
            .collect();
        (RankingOutput { ratings, leaderboard, warnings: vec![] }, s)
    }

    #[test]
    fn svg_structure() {
        let (out, s) = output(&["a", "b"]);
        let dir = tempfile::tempdir().unwrap();
        let p = emit_report(&out, &s, None, None, ReportFormat::RadarSvg, dir.path()).unwrap();
        let svg = std::fs::read_to_string(p).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(svg.matches(r#"class="axis""#).count(), 10);
    }

    #[test]
    fn csv_shape() {
        let (out, s) = output(&["a", "b", "c"]);
        let dir = tempfile::tempdir().unwrap();
        let p = emit_report(&out, &s, None, None, ReportFormat::Csv, dir.path()).unwrap();
        let mut r = csv::Reader::from_path(p).unwrap();
        assert_eq!(r.records().count(), 30);
    }

    #[test]
    fn json_roundtrip() {
        let (out, s) = output(&["a", "b"]);
        let dir = tempfile::tempdir().unwrap();
        let p = emit_report(&out, &s, None, None, ReportFormat::JsonDoc, dir.path()).unwrap();
        assert_eq!(load_report(&p).unwrap().leaderboard, out.leaderboard);
    }

    #[test]
    fn formats_and_empty() {
        assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::JsonDoc);
        assert_eq!("radar-svg".parse::<ReportFormat>().unwrap(), ReportFormat::RadarSvg);
        assert!("pdf".parse::<ReportFormat>().is_err());
        let (mut out, s) = output(&["a"]);
        out.leaderboard.clear();
        assert!(emit_report(&out, &s, None, None, ReportFormat::Csv, Path::new("/tmp")).is_err());
    }
}
