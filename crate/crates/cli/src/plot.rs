//! Phase portraits: SVG (direction ticks, streamlines, overlays) and CSV
//! direction samples.
//!
//! All coordinates are printed with fixed precision so the output is a pure
//! function of the inputs.

use std::fmt::Write;

use pindex_core::tangency::{Tangency, TangencyKind};
use pindex_core::{Circle, DirectionField, PlaneField};

const SIZE: f64 = 600.0;
const MAX_STREAM_STEPS: usize = 400;

type Point = [f64; 2];

#[derive(Clone, Copy, Debug)]
pub struct PlotOptions {
    pub grid: usize,
    /// Centre of the viewed square.
    pub view_center: Point,
    /// Half the side length of the viewed square.
    pub extent: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlotStats {
    pub ticks: usize,
    pub streamlines: usize,
}

struct View<'a> {
    field: &'a PlaneField,
    opts: PlotOptions,
    tiny: f64,
}

impl View<'_> {
    fn new(field: &PlaneField, opts: PlotOptions) -> View<'_> {
        let reach = opts.view_center[0].abs().max(opts.view_center[1].abs()) + 2.0 * opts.extent;
        View { field, opts, tiny: 1e-12 * (1.0 + field.magnitude_scale(reach)) }
    }

    fn cell(&self) -> f64 {
        2.0 * self.opts.extent / self.opts.grid as f64
    }

    fn node(&self, i: usize, j: usize) -> Point {
        let o = self.opts;
        [
            o.view_center[0] - o.extent + (i as f64 + 0.5) * self.cell(),
            o.view_center[1] - o.extent + (j as f64 + 0.5) * self.cell(),
        ]
    }

    fn inside(&self, p: Point) -> bool {
        let o = self.opts;
        (p[0] - o.view_center[0]).abs() <= o.extent && (p[1] - o.view_center[1]).abs() <= o.extent
    }

    fn to_px(&self, p: Point) -> (f64, f64) {
        let o = self.opts;
        let s = SIZE / (2.0 * o.extent);
        ((p[0] - o.view_center[0] + o.extent) * s, (o.view_center[1] + o.extent - p[1]) * s)
    }

    /// Unit direction, or `None` where the field (nearly) vanishes.
    fn unit(&self, p: Point) -> Option<Point> {
        let d = self.field.direction(p);
        let n = d[0].hypot(d[1]);
        (n > self.tiny && n.is_finite()).then(|| [d[0] / n, d[1] / n])
    }

    /// Unit direction aligned with `prev` (line fields only flip).
    fn unit_along(&self, p: Point, prev: Point) -> Option<Point> {
        let u = self.unit(p)?;
        if self.field.is_line_field() && u[0] * prev[0] + u[1] * prev[1] < 0.0 {
            Some([-u[0], -u[1]])
        } else {
            Some(u)
        }
    }

    fn trace(&self, seed: Point, sign: f64) -> Vec<Point> {
        let h = 0.25 * self.cell();
        let stop = 0.5 * self.cell();
        let sp = self.field.singular_point;
        let mut pts = vec![seed];
        let Some(u0) = self.unit(seed) else { return pts };
        let mut prev = [sign * u0[0], sign * u0[1]];
        let mut p = seed;
        for _ in 0..MAX_STREAM_STEPS {
            let Some(k1) = self.unit_along(p, prev) else { break };
            let mid = [p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]];
            let Some(k2) = self.unit_along(mid, k1) else { break };
            let next = [p[0] + h * k2[0], p[1] + h * k2[1]];
            if !self.inside(next) || (next[0] - sp[0]).hypot(next[1] - sp[1]) < stop {
                break;
            }
            pts.push(next);
            prev = k2;
            p = next;
        }
        pts
    }
}

/// SVG 1.1 portrait. `overlay` adds the circuit and its tangencies.
pub fn render_svg(
    field: &PlaneField,
    opts: PlotOptions,
    overlay: Option<(&Circle, &[Tangency])>,
) -> (String, PlotStats) {
    let view = View::new(field, opts);
    let mut stats = PlotStats::default();
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##);

    // Streamlines from a coarse seed grid, traced both ways.
    let every = (opts.grid / 8).max(1);
    let _ = writeln!(svg, r##"<g fill="none" stroke="#4a7ab0" stroke-width="1">"##);
    for i in (every / 2..opts.grid).step_by(every) {
        for j in (every / 2..opts.grid).step_by(every) {
            let seed = view.node(i, j);
            let mut back = view.trace(seed, -1.0);
            back.reverse();
            back.pop();
            back.extend(view.trace(seed, 1.0));
            if back.len() < 2 {
                continue;
            }
            svg.push_str("<polyline points=\"");
            for (k, p) in back.iter().enumerate() {
                let (x, y) = view.to_px(*p);
                let _ = write!(svg, "{}{x:.2},{y:.2}", if k == 0 { "" } else { " " });
            }
            svg.push_str("\"/>\n");
            stats.streamlines += 1;
        }
    }
    svg.push_str("</g>\n");

    // Direction ticks; vector fields get a dot at the head.
    let half = 0.4 * SIZE / opts.grid as f64;
    let mut ticks = String::new();
    let mut heads = String::new();
    for j in 0..opts.grid {
        for i in 0..opts.grid {
            let p = view.node(i, j);
            let Some(u) = view.unit(p) else { continue };
            let (x, y) = view.to_px(p);
            // Screen y points down.
            let (dx, dy) = (half * u[0], -half * u[1]);
            let _ = write!(ticks, "M{:.2},{:.2}L{:.2},{:.2}", x - dx, y - dy, x + dx, y + dy);
            if !field.is_line_field() {
                let _ = writeln!(heads, r#"<circle cx="{:.2}" cy="{:.2}" r="1.2"/>"#, x + dx, y + dy);
            }
            stats.ticks += 1;
        }
    }
    let _ = writeln!(svg, r##"<path d="{ticks}" stroke="#222222" stroke-width="1" fill="none"/>"##);
    if !heads.is_empty() {
        let _ = write!(svg, "<g fill=\"#222222\">\n{heads}</g>\n");
    }

    if let Some((circle, tangencies)) = overlay {
        let (cx, cy) = view.to_px(circle.center);
        let r = circle.radius * SIZE / (2.0 * opts.extent);
        let _ = writeln!(
            svg,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="#2a9d4b" stroke-width="1.5" stroke-dasharray="6,4"/>"##
        );
        for t in tangencies {
            let (x, y) = view.to_px(circle.point_at(t.angle));
            let colour = match t.kind {
                TangencyKind::External => "#e07a10",
                TangencyKind::Internal => "#8a2be2",
            };
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{colour}"/>"#);
        }
    }

    let (sx, sy) = view.to_px(field.singular_point);
    let _ = writeln!(
        svg,
        r##"<circle cx="{sx:.2}" cy="{sy:.2}" r="5" fill="#d62828" stroke="#000000" stroke-width="0.5"/>"##
    );
    svg.push_str("</svg>\n");
    (svg, stats)
}

/// `x,y,dx,dy` unit directions at the tick grid; empty `dx,dy` where the
/// field vanishes.
pub fn render_csv(field: &PlaneField, opts: PlotOptions) -> (String, PlotStats) {
    let view = View::new(field, opts);
    let mut stats = PlotStats::default();
    let mut csv = String::from("x,y,dx,dy\n");
    for j in 0..opts.grid {
        for i in 0..opts.grid {
            let p = view.node(i, j);
            match view.unit(p) {
                Some(u) => {
                    let _ = writeln!(csv, "{:.6},{:.6},{:.6},{:.6}", p[0], p[1], u[0], u[1]);
                    stats.ticks += 1;
                }
                None => {
                    let _ = writeln!(csv, "{:.6},{:.6},,", p[0], p[1]);
                }
            }
        }
    }
    (csv, stats)
}
