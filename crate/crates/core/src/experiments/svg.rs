//! Minimal standalone SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use super::{format_number, ConvergenceStudy, ExperimentError, SweepResult};
use crate::Scalar;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
/// Values below this are drawn at this height on log axes.
const LOG_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepPanel {
    /// `g1` and `g2` against stiffness.
    Displacement,
    /// Interface stress `s` against stiffness.
    Stress,
    /// Spring length `θ` against stiffness.
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvergencePanel {
    /// V-norm error against `n`, logarithmic.
    Error,
    /// Spring length against `n`.
    Length,
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    log_y: bool,
    series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

impl Chart {
    fn render(&self) -> String {
        let ty = |y: f64| if self.log_y { y.max(LOG_FLOOR).log10() } else { y };
        let all = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(ty(y));
            y1 = y1.max(ty(y));
        }
        let (x0, x1) = padded(x0, x1);
        let (y0, y1) = padded(y0, y1);
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for i in 0..=TICKS {
            let f = i as f64 / TICKS as f64;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let ylabel = if self.log_y {
                format!("1e{:.1}", yv)
            } else {
                format_number((yv * 1e6).round() / 1e6)
            };
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                px(xv),
                TOP + plot_h + 18.0,
                format_number((xv * 1e6).round() / 1e6)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                py(yv) + 4.0,
                ylabel
            );
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#dddddd"/>"##,
                py(yv),
                LEFT + plot_w
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{0:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1}</text>"#,
            TOP + plot_h / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(ty(y))))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            );
            let ly = TOP + 16.0 + 20.0 * i as f64;
            let lx = LEFT + plot_w + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 24.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                lx + 30.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn series<T: Scalar, R>(name: &str, records: &[R], f: impl Fn(&R) -> (T, T)) -> Series {
    Series {
        name: name.into(),
        points: records
            .iter()
            .map(|r| {
                let (x, y) = f(r);
                (x.as_f64(), y.as_f64())
            })
            .collect(),
    }
}

pub fn export_sweep_svg<T: Scalar>(
    result: &SweepResult<T>,
    path: &Path,
    panel: SweepPanel,
) -> Result<(), ExperimentError> {
    if result.records.is_empty() {
        return Err(ExperimentError::EmptyResult);
    }
    let recs = &result.records;
    let (title, y_label, series) = match panel {
        SweepPanel::Displacement => (
            "Displacement of the rod ends",
            "displacement",
            vec![
                series("u1(-l)", recs, |r| (r.k, r.g1)),
                series("u2(l)", recs, |r| (r.k, r.g2)),
            ],
        ),
        SweepPanel::Stress => ("Stress at the rod ends", "stress", vec![series("s", recs, |r| (r.k, r.s))]),
        SweepPanel::Gap => ("Spring length", "theta", vec![series("theta", recs, |r| (r.k, r.theta))]),
    };
    let chart = Chart {
        title: format!(
            "{title} (f1 = {}, f2 = {})",
            format_number(result.forces.f1().as_f64()),
            format_number(result.forces.f2().as_f64())
        ),
        x_label: result.target.name().into(),
        y_label: y_label.into(),
        log_y: false,
        series,
    };
    std::fs::write(path, chart.render())?;
    Ok(())
}

pub fn export_convergence_svg<T: Scalar>(
    study: &ConvergenceStudy<T>,
    path: &Path,
    panel: ConvergencePanel,
) -> Result<(), ExperimentError> {
    if study.records.is_empty() {
        return Err(ExperimentError::EmptyResult);
    }
    let recs = &study.records;
    let n = |r: &super::ConvergenceRecord<T>| T::lit(r.n as f64);
    let chart = match panel {
        ConvergencePanel::Error => Chart {
            title: format!("Approximation error ({} limit)", study.limit_label()),
            x_label: "n".into(),
            y_label: "||u_n - u||_V (log10)".into(),
            log_y: true,
            series: vec![series("error", recs, |r| (n(r), r.error_vnorm))],
        },
        ConvergencePanel::Length => Chart {
            title: format!("Spring length ({} limit)", study.limit_label()),
            x_label: "n".into(),
            y_label: "theta".into(),
            log_y: false,
            series: vec![series("theta_n", recs, |r| (n(r), r.theta))],
        },
    };
    std::fs::write(path, chart.render())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_penalty_convergence, ConvergenceSetup};
    use crate::model::{ConstraintVariant, PenaltyKind, ProblemSpec};

    fn polyline_ys(svg: &str) -> Vec<f64> {
        let start = svg.find("points=\"").unwrap() + 8;
        let end = start + svg[start..].find('"').unwrap();
        svg[start..end]
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    }

    #[test]
    fn error_panel_is_log_scaled_and_non_increasing() {
        let base = ProblemSpec::benchmark(1.0, 1.0, 1.0, -1.0, ConstraintVariant::NonPenetration).unwrap();
        let study = run_penalty_convergence(&base, &ConvergenceSetup::new(PenaltyKind::CompressionOnly)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("error.svg");
        export_convergence_svg(&study, &path, ConvergencePanel::Error).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("version=\"1.1\""));
        assert!(svg.contains("log10"));
        // screen y grows downward, so a non-increasing error has non-decreasing y
        let ys = polyline_ys(&svg);
        assert_eq!(ys.len(), 12);
        assert!(ys.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn constant_series_still_renders() {
        let chart = Chart {
            title: "flat".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_y: false,
            series: vec![Series {
                name: "c".into(),
                points: vec![(1.0, 0.0), (2.0, 0.0)],
            }],
        };
        let svg = chart.render();
        assert!(!svg.contains("NaN"));
        assert_eq!(polyline_ys(&svg).len(), 2);
    }
}
