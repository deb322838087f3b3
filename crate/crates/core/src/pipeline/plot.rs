//! Standalone SVG line charts of the same series as the CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::output::format_sig;
use super::run::{CellRecord, ExperimentOutcome};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

/// Extra point marks drawn on top of the series (e.g. source and destination).
#[derive(Debug, Clone)]
pub struct Landmark {
    pub label: String,
    pub at: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub landmarks: Vec<Landmark>,
    /// Same scale on both axes.
    pub equal_axes: bool,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter()).chain(self.landmarks.iter().map(|l| &l.at));
        let (mut x0, mut x1) = bounds(pts().map(|p| p[0]));
        let (mut y0, mut y1) = bounds(pts().map(|p| p[1]));
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        if self.equal_axes {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            x0 = cx - 0.5 * scale * pw;
            x1 = cx + 0.5 * scale * pw;
            y0 = cy - 0.5 * scale * ph;
            y1 = cy + 0.5 * scale * ph;
        }
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        // grid and ticks
        for (lo, hi, vertical) in [(x0, x1, true), (y0, y1, false)] {
            let step = nice_step(hi - lo);
            let mut t = (lo / step).ceil() * step;
            while t <= hi + 1e-9 * step {
                let label = format_sig((t / step).round() * step);
                if vertical {
                    let x = sx(t);
                    let _ = writeln!(o, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/>"##, TOP + ph);
                    let _ = writeln!(o, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 16.0);
                } else {
                    let y = sy(t);
                    let _ = writeln!(o, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/>"##, LEFT + pw);
                    let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
                }
                t += step;
            }
        }
        let _ = writeln!(o, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1]))).collect();
            if path.len() == 1 {
                let _ = writeln!(o, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(s.points[0][0]), sy(s.points[0][1]));
            } else {
                let _ = writeln!(
                    o,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
                    path.join(" ")
                );
            }
            let ly = TOP + 14.0 + 18.0 * k as f64;
            let lx = LEFT + pw + 14.0;
            let _ = writeln!(o, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 22.0);
            let _ = writeln!(o, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&s.name));
        }
        for l in &self.landmarks {
            let (x, y) = (sx(l.at[0]), sy(l.at[1]));
            let _ = writeln!(o, r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="black"/>"#, x - 4.0, y - 4.0);
            let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 7.0, y - 6.0, escape(&l.label));
        }
        o.push_str("</svg>\n");
        o
    }
}

fn series_name(r: &CellRecord) -> String {
    format!("{} {} ({})", r.run.strategy, r.run.protocol.as_str().to_uppercase(), r.run.init)
}

fn write(path: PathBuf, chart: &Chart) -> Result<PathBuf> {
    fs::write(&path, chart.render()).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    Ok(path)
}

/// Writes one chart per figure family and sweep value, plus the throughput curves.
pub fn emit_plot(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let axis = outcome.axis.as_str();
    let mut values: Vec<f64> = Vec::new();
    for r in &outcome.records {
        if !values.contains(&r.cell.sweep_value) {
            values.push(r.cell.sweep_value);
        }
    }
    let mut written = Vec::new();
    for &v in &values {
        let cell: Vec<&CellRecord> = outcome.records.iter().filter(|r| r.cell.sweep_value == v).collect();
        let tag = format!("{axis}_{}", format_sig(v));
        let slots = |get: &dyn Fn(&CellRecord, usize) -> f64| -> Vec<Series> {
            cell.iter()
                .map(|r| Series {
                    name: series_name(r),
                    points: (0..r.run.profile.len()).map(|i| [(i + 1) as f64, get(r, i)]).collect(),
                })
                .collect()
        };
        let base = |title: &str, y: &str| Chart {
            title: format!("{title}, {axis} = {}", format_sig(v)),
            x_label: "time slot".into(),
            y_label: y.into(),
            series: Vec::new(),
            landmarks: Vec::new(),
            equal_axes: false,
        };
        let chart = Chart { series: slots(&|r, i| r.run.profile.power[i]), ..base("Relay power profile", "relay power") };
        written.push(write(dir.join(format!("power_profile_{tag}.svg")), &chart)?);
        let chart = Chart { series: slots(&|r, i| r.run.profile.rho[i]), ..base("Power-splitting ratio profile", "ratio") };
        written.push(write(dir.join(format!("ratio_profile_{tag}.svg")), &chart)?);
        let chart = Chart {
            series: cell.iter().map(|r| Series { name: series_name(r), points: r.run.trajectory.points.clone() }).collect(),
            landmarks: cell.first().map_or_else(Vec::new, |r| {
                let s = &r.scenario;
                vec![
                    Landmark { label: "S".into(), at: s.source() },
                    Landmark { label: "D".into(), at: s.destination() },
                    Landmark { label: "start".into(), at: s.start() },
                    Landmark { label: "end".into(), at: s.end() },
                ]
            }),
            equal_axes: true,
            x_label: "x".into(),
            y_label: "y".into(),
            ..base("UAV trajectory", "y")
        };
        written.push(write(dir.join(format!("trajectory_{tag}.svg")), &chart)?);
        let chart = Chart {
            series: cell
                .iter()
                .map(|r| Series {
                    name: series_name(r),
                    points: r.run.trace.iter().enumerate().map(|(k, &t)| [k as f64, t]).collect(),
                })
                .collect(),
            x_label: "outer round".into(),
            ..base("Throughput per round", "throughput")
        };
        written.push(write(dir.join(format!("iterations_{tag}.svg")), &chart)?);
    }

    let mut curves: Vec<Series> = Vec::new();
    for r in &outcome.records {
        let name = series_name(r);
        let point = [r.cell.sweep_value, r.run.throughput];
        match curves.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push(point),
            None => curves.push(Series { name, points: vec![point] }),
        }
    }
    let chart = Chart {
        title: format!("Throughput versus {axis}"),
        x_label: axis.into(),
        y_label: "throughput".into(),
        series: curves,
        landmarks: Vec::new(),
        equal_axes: false,
    };
    written.push(write(dir.join("throughput.svg"), &chart)?);
    Ok(written)
}
