//! Minimal SVG output for trajectories and threshold curves.

use std::fmt::Write;

use crate::geometry::Vec2;
use crate::simulator::{ScenarioConfig, SimulationResult};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// A polyline to draw, coloured by `group`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub label: String,
    pub group: usize,
    pub points: Vec<Vec2>,
}

/// Scene made of tracks, filled polygons (vehicle bodies) and markers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Figure {
    pub title: String,
    pub tracks: Vec<Track>,
    pub polygons: Vec<Vec<Vec2>>,
    pub markers: Vec<Vec2>,
}

struct Frame {
    min: Vec2,
    scale: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Vec2>) -> Self {
        let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
        for p in points.filter(|p| p.x.is_finite() && p.y.is_finite()) {
            lo = lo.inf(&p);
            hi = hi.sup(&p);
        }
        if !lo.x.is_finite() {
            lo = Vec2::new(-1.0, -1.0);
            hi = Vec2::new(1.0, 1.0);
        }
        let span = (hi - lo).map(|s| s.max(1e-6));
        let scale = ((WIDTH - 2.0 * MARGIN) / span.x).min((HEIGHT - 2.0 * MARGIN) / span.y);
        Self { min: lo, scale }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            HEIGHT - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn points_attr(frame: &Frame, pts: &[Vec2]) -> String {
    pts.iter()
        .map(|p| {
            let (x, y) = frame.map(*p);
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders with equal axis scaling so geometry is not distorted.
pub fn render(fig: &Figure) -> String {
    let all = fig
        .tracks
        .iter()
        .flat_map(|t| t.points.iter().copied())
        .chain(fig.polygons.iter().flatten().copied())
        .chain(fig.markers.iter().copied());
    let frame = Frame::fit(all);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="16">{}</text>"#,
        escape(&fig.title)
    );
    for poly in &fig.polygons {
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="#888888" fill-opacity="0.15" stroke="#555555" stroke-width="0.5"/>"##,
            points_attr(&frame, poly)
        );
    }
    for t in &fig.tracks {
        let colour = PALETTE[t.group % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"><title>{}</title></polyline>"#,
            points_attr(&frame, &t.points),
            escape(&t.label)
        );
    }
    for m in &fig.markers {
        let (x, y) = frame.map(*m);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

/// Pedestrian paths coloured by flow, vehicle bodies every `every` steps and
/// destinations as markers.
pub fn simulation_figure(config: &ScenarioConfig, result: &SimulationResult, every: usize) -> Figure {
    let every = every.max(1);
    Figure {
        title: format!("{} ({} pedestrians)", config.name, config.pedestrians.len()),
        tracks: config
            .pedestrians
            .iter()
            .zip(&result.pedestrians)
            .map(|(spec, traj)| Track {
                label: spec.id.clone(),
                group: spec.flow,
                points: traj.iter().map(|s| s.position).collect(),
            })
            .collect(),
        polygons: result
            .vehicles
            .iter()
            .flat_map(|traj| traj.iter().step_by(every).map(|v| v.body_corners().to_vec()))
            .collect(),
        markers: config.pedestrians.iter().map(|p| p.destination).collect(),
    }
}

/// Line chart of fraction-below-threshold curves, one series per model.
pub fn threshold_chart(title: &str, thresholds: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let t_max = thresholds
        .iter()
        .copied()
        .filter(|t| t.is_finite())
        .fold(0.0, f64::max)
        .max(1e-9);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let map = |t: f64, f: f64| (MARGIN + t.min(t_max) / t_max * plot_w, HEIGHT - MARGIN - f * plot_h);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="16">{}</text>"#,
        escape(title)
    );
    let (x0, y0) = map(0.0, 0.0);
    let (x1, y1) = map(t_max, 1.0);
    let _ = writeln!(
        s,
        r#"<polyline points="{x0},{y1} {x0},{y0} {x1},{y0}" fill="none" stroke="black"/>"#
    );
    for (i, (name, values)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = thresholds
            .iter()
            .zip(values)
            .filter(|(t, _)| t.is_finite())
            .map(|(t, f)| {
                let (x, y) = map(*t, *f);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{colour}">{}</text>"#,
            x1 - 120.0,
            y1 + 20.0 + 16.0 * i as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}
