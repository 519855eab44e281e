use std::fmt::Write;

use super::{blockade_graph, Arrangement, Role, Species, Unit};

#[derive(Clone, Copy, Debug, Default)]
pub struct SvgOptions {
    /// Draw a line for every blockaded unit pair.
    pub edges: bool,
}

const SCALE: f64 = 60.0;
const MARGIN: f64 = 30.0;
const ATOM_R: f64 = 6.0;
const CLUSTER_R: f64 = 4.0;
const CLUSTER_STEP: f64 = 5.0;

fn colour(s: Species) -> &'static str {
    match s {
        Species::A => "#1f77b4",
        Species::B => "#d62728",
    }
}

/// Render the layout: wires run as rows, superatoms are drawn as 2x2 (or
/// ring) clusters. Output is byte-for-byte deterministic.
pub fn render_svg(arr: &Arrangement, opts: SvgOptions, comment: Option<&str>) -> String {
    let r = arr.blockade_radius();
    let px = |v: f64| MARGIN + SCALE * v / r;
    let (mut w, mut h) = (0.0f64, 0.0f64);
    for u in arr.units() {
        w = w.max(px(u.position[0]));
        h = h.max(px(u.position[1]));
    }
    let (w, h) = (w + MARGIN, h + MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    if let Some(c) = comment {
        let _ = writeln!(out, "<!-- {} -->", c.replace("--", "- -"));
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    if opts.edges {
        if let Ok(g) = blockade_graph(arr) {
            let _ = writeln!(out, r##"<g stroke="#999999" stroke-width="1">"##);
            for (a, b) in g.unit_graph().edges() {
                let (pa, pb) = (arr.unit(a).position, arr.unit(b).position);
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                    px(pa[0]),
                    px(pa[1]),
                    px(pb[0]),
                    px(pb[1])
                );
            }
            let _ = writeln!(out, "</g>");
        }
    }

    for u in arr.units() {
        let (cx, cy) = (px(u.position[0]), px(u.position[1]));
        let fill = colour(u.species);
        if u.is_superatom() {
            let _ = writeln!(
                out,
                r#"<g class="superatom" data-id="{}"{}>"#,
                u.id,
                role_attrs(u)
            );
            for off in cluster_marks(u.size) {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="{CLUSTER_R:.1}" fill="{fill}"/>"#,
                    cx + off[0],
                    cy + off[1]
                );
            }
            let _ = writeln!(out, "</g>");
        } else {
            let _ = writeln!(
                out,
                r#"<circle class="atom" data-id="{}"{} cx="{cx:.2}" cy="{cy:.2}" r="{ATOM_R:.1}" fill="{fill}"/>"#,
                u.id,
                role_attrs(u)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// `data-role` is `head`, `device` (an impurity superatom on a wire),
/// `wire` or `coupler`; wire units also carry `data-wire`.
fn role_attrs(u: &Unit) -> String {
    match u.role {
        Role::Head { wire } => format!(r#" data-role="head" data-wire="{wire}""#),
        Role::Wire { wire, .. } if u.is_superatom() => {
            format!(r#" data-role="device" data-wire="{wire}""#)
        }
        Role::Wire { wire, .. } => format!(r#" data-role="wire" data-wire="{wire}""#),
        Role::Coupler { .. } => r#" data-role="coupler""#.to_string(),
    }
}

fn cluster_marks(size: usize) -> Vec<[f64; 2]> {
    if size == 4 {
        let s = CLUSTER_STEP;
        return vec![[-s, -s], [s, -s], [-s, s], [s, s]];
    }
    (0..size)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / size as f64;
            [1.5 * CLUSTER_STEP * t.cos(), 1.5 * CLUSTER_STEP * t.sin()]
        })
        .collect()
}
