//! SVG pictures of tilings.

use std::fmt::Write as _;

use crate::asymptotics;
use crate::error::Result;
use crate::geometry::{height_from_tiling, polar_classify, DominoClass, PolarLabel, Tiling};

pub const DEFAULT_PALETTE: [&str; 4] = ["#d9433b", "#3b7dd9", "#f2c12e", "#3fa34d"];

#[derive(Clone, Debug)]
pub struct RenderOptions {
    /// Pixels per lattice unit.
    pub scale: f64,
    /// Fill colours for N, E, S, W.
    pub palette: [String; 4],
    /// Shade the polar regions and draw the limiting circle or ellipse.
    pub polar: bool,
    /// Label every vertex with its height.
    pub heights: bool,
    /// Overlay the level curves of the limiting placement probability.
    pub levels: bool,
    /// Bias of the sampled distribution; selects the ellipse overlay.
    pub bias: Option<f64>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            scale: 12.0,
            palette: DEFAULT_PALETTE.map(String::from),
            polar: false,
            heights: false,
            levels: false,
            bias: None,
        }
    }
}

fn class_index(c: DominoClass) -> usize {
    match c {
        DominoClass::North => 0,
        DominoClass::East => 1,
        DominoClass::South => 2,
        DominoClass::West => 3,
    }
}

pub fn render_svg(t: &Tiling, opts: &RenderOptions) -> Result<String> {
    let s = opts.scale;
    let (i0, j0, w, h) = t.region().bounds();
    let margin = s;
    let width = w as f64 * s + 2.0 * margin;
    let height = h as f64 * s + 2.0 * margin;
    // lattice point -> pixel, y pointing up
    let px = |x: f64| (x - i0 as f64) * s + margin;
    let py = |y: f64| ((j0 + h) as f64 - y) * s + margin;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, "<!-- {} -->", crate::VERSION).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    let labels = opts.polar.then(|| polar_classify(t).labels);
    let inset = 0.06 * s;
    let radius = 0.18 * s;
    writeln!(out, r##"<g stroke="#222" stroke-width="{:.3}">"##, 0.04 * s).unwrap();
    for (k, d) in t.dominos().iter().enumerate() {
        let [a, b] = d.squares();
        let (x0, x1) = (a.i.min(b.i) as f64, a.i.max(b.i) as f64 + 1.0);
        let (y0, y1) = (a.j.min(b.j) as f64, a.j.max(b.j) as f64 + 1.0);
        let fill = &opts.palette[class_index(d.class)];
        let opacity = match &labels {
            Some(l) if l[k] == PolarLabel::Temperate => 0.45,
            _ => 1.0,
        };
        writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" rx="{radius:.3}" fill="{fill}" fill-opacity="{opacity}"/>"#,
            px(x0) + inset,
            py(y1) + inset,
            (x1 - x0) * s - 2.0 * inset,
            (y1 - y0) * s - 2.0 * inset,
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();

    let order = t.order();
    if let (Some(n), true) = (order, opts.polar || opts.levels) {
        let n = n as f64;
        let (cx, cy) = (px(0.0), py(0.0));
        let (rx, ry) = match opts.bias {
            Some(p) => (p.sqrt() * n * s, (1.0 - p).sqrt() * n * s),
            None => (
                n * s * std::f64::consts::FRAC_1_SQRT_2,
                n * s * std::f64::consts::FRAC_1_SQRT_2,
            ),
        };
        writeln!(
            out,
            r#"<ellipse cx="{cx:.3}" cy="{cy:.3}" rx="{rx:.3}" ry="{ry:.3}" fill="none" stroke="black" stroke-width="{:.3}"/>"#,
            0.12 * s
        )
        .unwrap();
        if opts.levels && opts.bias.is_none() {
            let r = n * s * std::f64::consts::FRAC_1_SQRT_2;
            writeln!(
                out,
                r#"<clipPath id="temperate"><circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}"/></clipPath>"#
            )
            .unwrap();
            writeln!(
                out,
                r#"<g clip-path="url(#temperate)" fill="none" stroke="black" stroke-width="{:.3}" stroke-dasharray="{:.3}">"#,
                0.1 * s,
                0.3 * s
            )
            .unwrap();
            for k in 1..=4 {
                let e = asymptotics::level_curve(k as f64 / 10.0)?;
                let (ex, ey, ecy) = level_ellipse_axes(e.mix);
                writeln!(
                    out,
                    r#"<ellipse cx="{cx:.3}" cy="{:.3}" rx="{:.3}" ry="{:.3}"/>"#,
                    py(ecy * n),
                    ex * n * s,
                    ey * n * s
                )
                .unwrap();
            }
            writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                px(-n / 2.0),
                py(n / 2.0),
                px(n / 2.0),
                py(n / 2.0)
            )
            .unwrap();
            writeln!(out, "</g>").unwrap();
        }
    }

    if opts.heights {
        let h = height_from_tiling(t, None)?;
        writeln!(
            out,
            r#"<g font-family="sans-serif" font-size="{:.3}" text-anchor="middle" fill="black">"#,
            0.32 * s
        )
        .unwrap();
        for ((x, y), v) in h.iter() {
            writeln!(
                out,
                r#"<text x="{:.3}" y="{:.3}">{v}</text>"#,
                px(x as f64),
                py(y as f64) + 0.11 * s
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Semi-axes and centre height of the level ellipse with weight `mix`,
/// in normalized units.
fn level_ellipse_axes(mix: f64) -> (f64, f64, f64) {
    // 2 mix x^2 + a (y - y0)^2 = a y0^2 - (1 - 2 mix)
    let a = 4.0 - 2.0 * mix;
    let y0 = 2.0 * (1.0 - mix) / a;
    let r = a * y0 * y0 - (1.0 - 2.0 * mix);
    ((r / (2.0 * mix)).sqrt(), (r / a).sqrt(), y0)
}
