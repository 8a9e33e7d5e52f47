//! Deterministic SVG rendering of simulation traces: robot paths, obstacle
//! positions sampled over time (opacity encodes time), start/goal markers,
//! and collision annotations. Identical inputs produce identical bytes, so
//! plots are safe regression artifacts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::harness::trace::SimTrace;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 50.0;
/// Obstacle snapshots drawn per dynamic obstacle.
const TIME_SAMPLES: usize = 8;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#e377c2",
];

/// Fixed-width float formatting with the negative-zero artifact removed, so
/// output bytes depend only on values.
fn fmt(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

struct Frame {
    min: Vec2,
    scale: f64,
    offset_x: f64,
    offset_y: f64,
}

impl Frame {
    fn to_screen(&self, p: Vec2) -> (f64, f64) {
        (
            MARGIN + self.offset_x + (p.x - self.min.x) * self.scale,
            HEIGHT - MARGIN - self.offset_y - (p.y - self.min.y) * self.scale,
        )
    }
}

/// Renders one or more traces into an SVG file. Overlaid traces are assumed
/// to share a scene; obstacles, start and goal are drawn from the first.
pub fn emit_plot(traces: &[SimTrace], path: &Path) -> Result<()> {
    let svg = render_svg(traces)?;
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, svg)?;
    Ok(())
}

pub fn render_svg(traces: &[SimTrace]) -> Result<String> {
    let Some(first) = traces.first() else {
        return Err(Error::InvalidParameter(
            "plot requires at least one trace".into(),
        ));
    };
    let scenario = &first.scenario;
    let t_end = traces.iter().map(|t| t.t_final).fold(0.0, f64::max);

    // World bounds over everything drawn.
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut cover = |p: Vec2, pad: f64| {
        lo.x = lo.x.min(p.x - pad);
        lo.y = lo.y.min(p.y - pad);
        hi.x = hi.x.max(p.x + pad);
        hi.y = hi.y.max(p.y + pad);
    };
    cover(scenario.robot.start, scenario.robot.r);
    cover(scenario.robot.goal, scenario.robot.r);
    for trace in traces {
        for row in &trace.rows {
            cover(row.p, scenario.robot.r);
        }
    }
    for o in &scenario.obstacles {
        for j in 0..TIME_SAMPLES {
            let t = t_end * (j as f64) / ((TIME_SAMPLES - 1) as f64);
            cover(o.center + o.velocity * t, o.radius);
        }
    }
    // Breathing room, and a minimum extent so degenerate scenes still render.
    let pad = 0.15;
    lo = lo - Vec2::new(pad, pad);
    hi = hi + Vec2::new(pad, pad);
    let extent = Vec2::new((hi.x - lo.x).max(0.5), (hi.y - lo.y).max(0.5));
    let scale = ((WIDTH - 2.0 * MARGIN) / extent.x).min((HEIGHT - 2.0 * MARGIN) / extent.y);
    let frame = Frame {
        min: lo,
        scale,
        offset_x: 0.5 * (WIDTH - 2.0 * MARGIN - extent.x * scale),
        offset_y: 0.5 * (HEIGHT - 2.0 * MARGIN - extent.y * scale),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        WIDTH as u32, HEIGHT as u32, WIDTH as u32, HEIGHT as u32
    );
    s.push_str("<style>\n");
    for (i, color) in PALETTE.iter().enumerate() {
        let _ = writeln!(
            s,
            ".path{i} {{ stroke: {color}; fill: none; stroke-width: 2; }}"
        );
    }
    s.push_str(".obstacle { fill: #5a6675; stroke: none; }\n");
    s.push_str(".marker-start { fill: #2ca02c; }\n");
    s.push_str(".marker-goal { fill: none; stroke: #2ca02c; stroke-width: 2; }\n");
    s.push_str(".marker-collision { stroke: #d62728; stroke-width: 2.5; }\n");
    s.push_str("text { font-family: sans-serif; font-size: 13px; fill: #333; }\n");
    s.push_str("</style>\n");
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        WIDTH as u32, HEIGHT as u32
    );

    // Obstacle snapshots; static obstacles are drawn once.
    for o in &scenario.obstacles {
        let samples = if o.velocity == Vec2::ZERO {
            TIME_SAMPLES - 1..TIME_SAMPLES
        } else {
            0..TIME_SAMPLES
        };
        for j in samples {
            let t = t_end * (j as f64) / ((TIME_SAMPLES - 1) as f64);
            let (cx, cy) = frame.to_screen(o.center + o.velocity * t);
            let opacity = if o.velocity == Vec2::ZERO {
                0.45
            } else {
                0.10 + 0.35 * (j as f64) / ((TIME_SAMPLES - 1) as f64)
            };
            let _ = writeln!(
                s,
                "<circle class=\"obstacle\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill-opacity=\"{}\"/>",
                fmt(cx),
                fmt(cy),
                fmt(o.radius * frame.scale),
                fmt(opacity)
            );
        }
    }

    // Robot paths, one stroke class per trace.
    for (i, trace) in traces.iter().enumerate() {
        if trace.rows.is_empty() {
            continue;
        }
        let mut points = String::new();
        for row in &trace.rows {
            let (x, y) = frame.to_screen(row.p);
            let _ = write!(points, "{},{} ", fmt(x), fmt(y));
        }
        let _ = writeln!(
            s,
            "<polyline class=\"path{}\" points=\"{}\"/>",
            i % PALETTE.len(),
            points.trim_end()
        );
    }

    // Start and goal markers.
    let (sx, sy) = frame.to_screen(scenario.robot.start);
    let _ = writeln!(
        s,
        "<circle class=\"marker-start\" cx=\"{}\" cy=\"{}\" r=\"5\"/>",
        fmt(sx),
        fmt(sy)
    );
    let (gx, gy) = frame.to_screen(scenario.robot.goal);
    let _ = writeln!(
        s,
        "<circle class=\"marker-goal\" cx=\"{}\" cy=\"{}\" r=\"7\"/>",
        fmt(gx),
        fmt(gy)
    );
    let _ = writeln!(
        s,
        "<line class=\"marker-goal\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
        fmt(gx - 7.0),
        fmt(gy),
        fmt(gx + 7.0),
        fmt(gy)
    );
    let _ = writeln!(
        s,
        "<line class=\"marker-goal\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
        fmt(gx),
        fmt(gy - 7.0),
        fmt(gx),
        fmt(gy + 7.0)
    );

    // Collision annotations at the last recorded position.
    for trace in traces {
        if !trace.collision() {
            continue;
        }
        if let Some(row) = trace.rows.last() {
            let (x, y) = frame.to_screen(row.p);
            for (dx, dy) in [(1.0, 1.0), (1.0, -1.0)] {
                let _ = writeln!(
                    s,
                    "<line class=\"marker-collision\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                    fmt(x - 7.0 * dx),
                    fmt(y - 7.0 * dy),
                    fmt(x + 7.0 * dx),
                    fmt(y + 7.0 * dy)
                );
            }
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\">collision</text>",
                fmt(x + 10.0),
                fmt(y + 4.0)
            );
        }
    }

    // Title and legend.
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-size=\"16\">{}</text>",
        fmt(MARGIN),
        xml_escape(&scenario.name)
    );
    for (i, trace) in traces.iter().enumerate() {
        let y = MARGIN + 16.0 * (i as f64) + 8.0;
        let _ = writeln!(
            s,
            "<line class=\"path{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            i % PALETTE.len(),
            fmt(MARGIN),
            fmt(y - 4.0),
            fmt(MARGIN + 24.0),
            fmt(y - 4.0)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{} N={} ({})</text>",
            fmt(MARGIN + 30.0),
            fmt(y),
            xml_escape(&trace.method),
            trace.horizon,
            trace.outcome
        );
    }

    // Scale bar: 0.5 m.
    let bar = 0.5 * frame.scale;
    let bx = WIDTH - MARGIN - bar;
    let by = HEIGHT - MARGIN + 24.0;
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\" stroke-width=\"2\"/>",
        fmt(bx),
        fmt(by),
        fmt(bx + bar),
        fmt(by)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\">0.5 m</text>",
        fmt(bx),
        fmt(by - 6.0)
    );

    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
