//! Plain SVG 1.1 output: labelled scatter plots, decision-region maps and
//! risk-coverage curves.
//!
//! Marker conventions: the first class is drawn as circles, the second as
//! triangles (malignant in the breast-cancer fixtures), further classes as
//! squares, abstention-labelled points as diamonds and injected outliers as
//! stars. Every marker carries `class="marker <shape>"` and every region cell
//! `class="cell region-<label>"` so the files can be inspected structurally.

use std::fmt::Write as _;

use abstainer::dataset::{Dataset, LabelSpace};
use abstainer::evaluation::RiskCoveragePoint;
use abstainer::system::TrainedSystem;
use abstainer::Result;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 4] = ["#4c72b0", "#dd8452", "#55a868", "#8172b3"];
const ABSTAIN_COLOR: &str = "#d9d9d9";

/// Data-space rectangle shown on the canvas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Bounding box of the first two features, padded by 10% per side.
    pub fn of(data: &Dataset) -> Bounds {
        let col = |j: usize| {
            let c = data.features().column(j).to_vec();
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = if hi > lo { 0.1 * (hi - lo) } else { 1.0 };
            (lo - pad, hi + pad)
        };
        let (x_min, x_max) = col(0);
        let (y_min, y_max) = col(1);
        Bounds {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (SIZE - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * (SIZE - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">
<title>{}</title>
<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#,
        escape(title)
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let (lo, hi) = (MARGIN, SIZE - MARGIN);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" stroke-width="1">
<line x1="{lo}" y1="{hi}" x2="{hi}" y2="{hi}"/>
<line x1="{lo}" y1="{hi}" x2="{lo}" y2="{lo}"/>
</g>
<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>
<text x="14" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {})">{}</text>"#,
        SIZE / 2.0,
        SIZE - 12.0,
        escape(x_label),
        SIZE / 2.0,
        SIZE / 2.0,
        escape(y_label)
    );
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Circle,
    Triangle,
    Square,
    Diamond,
    Star,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Triangle => "triangle",
            Shape::Square => "square",
            Shape::Diamond => "diamond",
            Shape::Star => "star",
        }
    }

    pub fn for_label(space: &LabelSpace, label: usize) -> Shape {
        if Some(label) == space.abstention_index() {
            return Shape::Diamond;
        }
        match label {
            0 => Shape::Circle,
            1 => Shape::Triangle,
            _ => Shape::Square,
        }
    }
}

fn color(space: &LabelSpace, label: usize) -> &'static str {
    if Some(label) == space.abstention_index() {
        "#444444"
    } else {
        PALETTE[label % PALETTE.len()]
    }
}

fn marker(out: &mut String, shape: Shape, cx: f64, cy: f64, fill: &str) {
    let r = 5.0;
    let class = shape.as_str();
    let points = |pts: &[(f64, f64)]| {
        pts.iter()
            .map(|(x, y)| format!("{:.2},{:.2}", cx + x, cy + y))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = match shape {
        Shape::Circle => writeln!(
            out,
            r#"<circle class="marker {class}" cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#
        ),
        Shape::Square => writeln!(
            out,
            r#"<rect class="marker {class}" x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#,
            cx - r,
            cy - r,
            2.0 * r,
            2.0 * r
        ),
        Shape::Triangle => writeln!(
            out,
            r#"<polygon class="marker {class}" points="{}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#,
            points(&[(0.0, -r * 1.2), (r * 1.1, r * 0.8), (-r * 1.1, r * 0.8)])
        ),
        Shape::Diamond => writeln!(
            out,
            r#"<polygon class="marker {class}" points="{}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#,
            points(&[(0.0, -r), (r, 0.0), (0.0, r), (-r, 0.0)])
        ),
        Shape::Star => {
            let pts: Vec<(f64, f64)> = (0..10)
                .map(|i| {
                    let rad = if i % 2 == 0 { 2.0 * r } else { 0.8 * r };
                    let a = std::f64::consts::PI * (i as f64 / 5.0 - 0.5);
                    (rad * a.cos(), rad * a.sin())
                })
                .collect();
            writeln!(
                out,
                r##"<polygon class="marker {class}" points="{}" fill="#000000" stroke="black" stroke-width="0.5"/>"##,
                points(&pts)
            )
        }
    };
}

fn markers(out: &mut String, data: &Dataset, bounds: &Bounds, outliers: &[usize]) {
    let space = data.label_space();
    out.push_str("<g class=\"markers\">\n");
    for i in 0..data.n() {
        let row = data.row(i);
        let shape = if outliers.contains(&i) {
            Shape::Star
        } else {
            Shape::for_label(space, data.labels()[i])
        };
        marker(out, shape, bounds.px(row[0]), bounds.py(row[1]), color(space, data.labels()[i]));
    }
    out.push_str("</g>\n");
}

fn legend(out: &mut String, space: &LabelSpace, with_outliers: bool) {
    let mut y = 16.0;
    for (i, name) in space.labels().iter().enumerate() {
        let shape = Shape::for_label(space, i).as_str();
        let _ = writeln!(
            out,
            r#"<text class="legend" x="{}" y="{y}" font-size="11" text-anchor="end" fill="{}">{} ({shape})</text>"#,
            SIZE - 8.0,
            color(space, i),
            escape(name)
        );
        y += 14.0;
    }
    if with_outliers {
        let _ = writeln!(
            out,
            r#"<text class="legend" x="{}" y="{y}" font-size="11" text-anchor="end">outlier (star)</text>"#,
            SIZE - 8.0
        );
    }
}

/// Scatter plot of the first two features; rows listed in `outliers` are
/// drawn as stars.
pub fn scatter_svg(data: &Dataset, outliers: &[usize], title: &str) -> String {
    let bounds = Bounds::of(data);
    let mut out = String::new();
    header(&mut out, title);
    let names = data.feature_names();
    axes(&mut out, &names[0], names.get(1).map_or("", |s| s.as_str()));
    markers(&mut out, data, &bounds, outliers);
    legend(&mut out, data.label_space(), !outliers.is_empty());
    out.push_str("</svg>\n");
    out
}

/// Decision at the centre of every cell of a `resolution x resolution`
/// raster, rows from the top (largest second feature) down. `None` marks
/// abstention.
pub fn region_grid(system: &TrainedSystem, bounds: &Bounds, resolution: usize) -> Result<Vec<Vec<Option<usize>>>> {
    let mut grid = Vec::with_capacity(resolution);
    for r in 0..resolution {
        let y = bounds.y_max - (r as f64 + 0.5) / resolution as f64 * (bounds.y_max - bounds.y_min);
        let mut row = Vec::with_capacity(resolution);
        for c in 0..resolution {
            let x = bounds.x_min + (c as f64 + 0.5) / resolution as f64 * (bounds.x_max - bounds.x_min);
            row.push(system.decide(&[x, y])?.label());
        }
        grid.push(row);
    }
    Ok(grid)
}

/// Decision regions of a two-feature system shaded behind the data.
pub fn region_svg(system: &TrainedSystem, data: &Dataset, resolution: usize, title: &str) -> Result<String> {
    if data.d() != 2 {
        return Err(abstainer::Error::DimensionMismatch {
            expected: 2,
            actual: data.d(),
        });
    }
    let bounds = Bounds::of(data);
    let grid = region_grid(system, &bounds, resolution)?;
    let space = system.label_space();
    let mut out = String::new();
    header(&mut out, title);
    let cell_w = (SIZE - 2.0 * MARGIN) / resolution as f64;
    out.push_str("<g class=\"regions\" opacity=\"0.35\">\n");
    for (r, row) in grid.iter().enumerate() {
        for (c, label) in row.iter().enumerate() {
            let (name, fill) = match label {
                Some(l) => (space.name(*l)?.to_string(), color(space, *l)),
                None => ("abstain".to_string(), ABSTAIN_COLOR),
            };
            let _ = writeln!(
                out,
                r#"<rect class="cell region-{}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                escape(&name),
                MARGIN + c as f64 * cell_w,
                MARGIN + r as f64 * cell_w,
                cell_w + 0.05,
                cell_w + 0.05
            );
        }
    }
    out.push_str("</g>\n");
    let names = data.feature_names();
    axes(&mut out, &names[0], &names[1]);
    markers(&mut out, data, &bounds, &[]);
    legend(&mut out, data.label_space(), false);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Selective risk against coverage, one point per swept value. Points with
/// undefined risk are left out of the curve.
pub fn curve_svg(points: &[RiskCoveragePoint], parameter: &str) -> String {
    let bounds = Bounds {
        x_min: 0.0,
        x_max: 1.0,
        y_min: 0.0,
        y_max: points
            .iter()
            .filter_map(|p| p.selective_risk)
            .fold(0.0, f64::max)
            .max(0.05)
            * 1.1,
    };
    let mut out = String::new();
    header(&mut out, &format!("risk-coverage over {parameter}"));
    axes(&mut out, "coverage", "selective risk");
    let defined: Vec<(f64, f64, f64)> = points
        .iter()
        .filter_map(|p| p.selective_risk.map(|r| (p.parameter, p.coverage, r)))
        .collect();
    let path: Vec<String> = defined
        .iter()
        .map(|(_, c, r)| format!("{:.2},{:.2}", bounds.px(*c), bounds.py(*r)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline class="curve" points="{}" fill="none" stroke="#4c72b0" stroke-width="1.5"/>"##,
        path.join(" ")
    );
    for (param, c, r) in &defined {
        let _ = writeln!(
            out,
            r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="#4c72b0"><title>{parameter}={param}</title></circle>"##,
            bounds.px(*c),
            bounds.py(*r)
        );
    }
    out.push_str("</svg>\n");
    out
}
