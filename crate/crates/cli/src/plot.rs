//! SVG rendering of a placement over its bin-density heat map.

use std::fmt::Write as _;

use hybro_core::density::build_density;
use hybro_core::{BookshelfDesign, Placement};

/// Width of the drawing in SVG user units.
pub const VIEW_WIDTH: f64 = 800.0;

/// SVG class, style attributes and cell filter of one drawing layer.
type Layer = (&'static str, &'static str, fn(&hybro_core::Cell) -> bool);

struct Frame {
    xl: f64,
    yh: f64,
    scale: f64,
}

impl Frame {
    /// SVG `x y width height` of a layout rectangle; the y axis points up in
    /// the layout and down in SVG.
    fn rect(&self, x: f64, y: f64, w: f64, h: f64) -> String {
        format!(
            "x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\"",
            (x - self.xl) * self.scale,
            (self.yh - y - h) * self.scale,
            w * self.scale,
            h * self.scale
        )
    }
}

/// Renders the canvas outline, a density heat underlay, fixed cells,
/// standard cells and macros, in that order.
pub fn render_svg(design: &BookshelfDesign, placement: &Placement, target_density: f64) -> String {
    let canvas = &design.canvas;
    let netlist = &design.netlist;
    let frame = Frame {
        xl: canvas.xl,
        yh: canvas.yh,
        scale: VIEW_WIDTH / canvas.width(),
    };
    let height = canvas.height() * frame.scale;
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {VIEW_WIDTH:.3} {height:.3}\" width=\"{VIEW_WIDTH:.0}\" height=\"{height:.0}\">"
    );
    let _ = writeln!(
        s,
        "<rect class=\"canvas\" {} fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>",
        frame.rect(canvas.xl, canvas.yl, canvas.width(), canvas.height())
    );

    let grid = build_density(netlist, placement, canvas);
    let _ = writeln!(s, "<g class=\"density\">");
    for gy in 0..grid.ny() {
        for gx in 0..grid.nx() {
            let k = grid.index(gx, gy);
            let (u, c) = (grid.usage[k], grid.capacity[k]);
            if u <= 0.0 || c <= 0.0 {
                continue;
            }
            // full red at twice the target, white at zero
            let heat = (u / c / (2.0 * target_density)).min(1.0);
            let _ = writeln!(
                s,
                "<rect class=\"bin\" {} fill=\"red\" fill-opacity=\"{:.3}\"/>",
                frame.rect(
                    canvas.xl + gx as f64 * grid.bin_w,
                    canvas.yl + gy as f64 * grid.bin_h,
                    grid.bin_w,
                    grid.bin_h
                ),
                0.6 * heat
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let layers: [Layer; 3] = [
        ("fixed", "fill=\"#333333\"", |c| c.is_fixed()),
        ("cell", "fill=\"steelblue\" fill-opacity=\"0.4\"", |c| c.is_movable() && !c.is_macro),
        ("macro", "fill=\"none\" stroke=\"darkgreen\" stroke-width=\"1.5\"", |c| c.is_movable() && c.is_macro),
    ];
    for (class, style, pick) in layers {
        let _ = writeln!(s, "<g class=\"{class}s\">");
        for cell in netlist.cells().iter().filter(|c| pick(c)) {
            let p = placement.get(cell.id);
            let _ = writeln!(
                s,
                "<rect class=\"{class}\" {} {style}><title>{}</title></rect>",
                frame.rect(p.x, p.y, cell.width, cell.height),
                escape(&cell.name)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
