//! Report serialization: pretty JSON, the identity-grid CSV, and a small
//! self-contained SVG plot of estimates against the arcsine curve.
//!
//! All three are pure functions of their inputs with no timestamps or
//! environment lookups, so a rerun with the same seed produces byte-identical
//! files regardless of worker count.

use crate::error::Result;
use crate::oracle::arcsin_law;
use crate::pipeline::IdentityReport;
use serde::Serialize;
use std::fmt::Write as _;

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Unsupported(format!("JSON serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// The identity grid as CSV with a fixed header. Floats use the shortest
/// round-trip decimal form.
pub fn identity_csv(report: &IdentityReport) -> String {
    let mut out = String::from("rho,estimate,std_error,target,deviation_in_se\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.rho, r.estimate, r.std_error, r.target, r.deviation_in_se
        );
    }
    out
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 420.0;
const MARGIN: f64 = 48.0;

fn sx(rho: f64) -> f64 {
    MARGIN + (rho + 1.0) / 2.0 * (SVG_W - 2.0 * MARGIN)
}

fn sy(corr: f64) -> f64 {
    SVG_H - MARGIN - (corr + 1.0) / 2.0 * (SVG_H - 2.0 * MARGIN)
}

/// A line plot of the arcsine curve with the measured estimates and their
/// ±3 SE bars overlaid.
pub fn identity_svg(report: &IdentityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(
        s,
        "<rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>"
    );

    // Axes through the origin plus the frame.
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        SVG_W - 2.0 * MARGIN,
        SVG_H - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#ccc\"/>",
        sx(-1.0),
        sy(0.0),
        sx(1.0),
        sy(0.0)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#ccc\"/>",
        sx(0.0),
        sy(-1.0),
        sx(0.0),
        sy(1.0)
    );

    // Target curve.
    let mut points = String::new();
    for k in 0..=200 {
        let rho = -1.0 + k as f64 / 100.0;
        let t = arcsin_law(rho.clamp(-1.0, 1.0)).unwrap_or(0.0);
        let _ = write!(points, "{},{} ", sx(rho), sy(t));
    }
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#2266cc\" stroke-width=\"1.5\"/>",
        points.trim_end()
    );

    // Estimates with ±3 SE bars.
    for r in &report.rows {
        let x = sx(r.rho);
        let y = sy(r.estimate.clamp(-1.0, 1.0));
        let half = 3.0 * r.std_error;
        let y_lo = sy((r.estimate - half).clamp(-1.0, 1.0));
        let y_hi = sy((r.estimate + half).clamp(-1.0, 1.0));
        let _ = writeln!(
            s,
            "<line x1=\"{x}\" y1=\"{y_lo}\" x2=\"{x}\" y2=\"{y_hi}\" stroke=\"#cc3333\"/>"
        );
        let _ = writeln!(
            s,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"#cc3333\"/>"
        );
    }

    // Labels.
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">rho</text>",
        SVG_W / 2.0,
        SVG_H - 12.0
    );
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">sign correlation</text>",
        SVG_H / 2.0,
        SVG_H / 2.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">scheme {} | replicas {} | h {} | t_max {}</text>",
        SVG_W / 2.0,
        MARGIN - 14.0,
        report.scheme,
        report.replicas,
        report.step_h,
        report.t_max
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::IdentityRow;

    fn sample_report() -> IdentityReport {
        IdentityReport {
            scheme: "xi".into(),
            step_h: 0.001,
            t_max: 12.0,
            absorb_eps: 1e-6,
            seed: 7,
            replicas: 2000,
            rows: vec![
                IdentityRow {
                    rho: -0.5,
                    estimate: -0.334,
                    std_error: 0.021,
                    replicas: 2000,
                    target: -1.0 / 3.0,
                    deviation_in_se: -0.031,
                },
                IdentityRow {
                    rho: 0.5,
                    estimate: 0.3335,
                    std_error: 0.021,
                    replicas: 2000,
                    target: 1.0 / 3.0,
                    deviation_in_se: 0.0095,
                },
            ],
            max_abs_deviation_in_se_units: 0.031,
        }
    }

    #[test]
    fn csv_layout() {
        let csv = identity_csv(&sample_report());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rho,estimate,std_error,target,deviation_in_se"
        );
        assert_eq!(csv.lines().count(), 3);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("-0.5,-0.334,0.021,"));
    }

    #[test]
    fn outputs_are_deterministic() {
        let r = sample_report();
        assert_eq!(identity_csv(&r), identity_csv(&r));
        assert_eq!(identity_svg(&r), identity_svg(&r));
        assert_eq!(to_json_pretty(&r).unwrap(), to_json_pretty(&r).unwrap());
    }

    #[test]
    fn svg_contains_markers_and_curve() {
        let svg = identity_svg(&sample_report());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn json_round_trips() {
        let r = sample_report();
        let json = to_json_pretty(&r).unwrap();
        let back: IdentityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rows.len(), 2);
        assert_eq!(back.seed, 7);
    }
}
