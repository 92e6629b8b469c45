use super::svg::{label, line, no_data, title, Svg, Val};
use super::{RenderOptions, Rgb};
use crate::heatmap::FretboardGrid;
use crate::similarity::Layout2D;

/// Hue sweep from the open string (0°) to the last fret.
pub const GLYPH_HUE_RANGE_DEGREES: f64 = 300.0;
const GLYPH_CELL_PX: f64 = 3.0;
const CALLOUT_CELL_PX: f64 = 8.0;
const GLYPH_VALUE: f64 = 0.9;
const PAD: f64 = 16.0;
const TOP: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    /// Degrees.
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl Hsv {
    pub fn to_rgb(self) -> Rgb {
        let h = self.h.rem_euclid(360.0) / 60.0;
        let (s, v) = (self.s.clamp(0.0, 1.0), self.v.clamp(0.0, 1.0));
        let chroma = v * s;
        let x = chroma * (1.0 - (h % 2.0 - 1.0).abs());
        let (r, g, b) = match h as u32 {
            0 => (chroma, x, 0.0),
            1 => (x, chroma, 0.0),
            2 => (0.0, chroma, x),
            3 => (0.0, x, chroma),
            4 => (x, 0.0, chroma),
            _ => (chroma, 0.0, x),
        };
        let m = v - chroma;
        let ch = |u: f64| ((u + m) * 255.0).round() as u8;
        Rgb(ch(r), ch(g), ch(b))
    }
}

/// Hue encodes the fret, saturation the count relative to the busiest cell
/// across every glyph on the map.
pub fn glyph_color(fret: usize, columns: usize, count: u32, global_max: u32) -> Rgb {
    let h = GLYPH_HUE_RANGE_DEGREES * fret as f64 / columns.max(1) as f64;
    let s = if global_max == 0 { 0.0 } else { count as f64 / global_max as f64 };
    Hsv { h, s, v: GLYPH_VALUE }.to_rgb()
}

/// One miniature fretboard per recording at its snapped layout cell.
/// Outliers get a ring and the first one also a zoomed callout.
pub fn render_similarity_map(layout: &Layout2D, grids: &[FretboardGrid], labels: &[String], _opts: &RenderOptions) -> String {
    let n = layout.len().min(grids.len());
    let (strings, columns) = grids.first().map_or((6, 23), |g| (g.rows, g.cols));
    let glyph_w = columns as f64 * GLYPH_CELL_PX;
    let glyph_h = strings as f64 * GLYPH_CELL_PX;
    let slot_w = glyph_w + PAD;
    let slot_h = glyph_h + PAD + 10.0;
    let (rows, cols) = layout.grid_shape();
    let callout = layout.outliers.iter().take(n).position(|&o| o);
    let callout_w = columns as f64 * CALLOUT_CELL_PX;
    let callout_h = if callout.is_some() { strings as f64 * CALLOUT_CELL_PX + 40.0 } else { 0.0 };
    let grid_top = TOP + callout_h;
    let width = (2.0 * PAD + cols as f64 * slot_w).max(callout_w + 2.0 * PAD).max(260.0);
    let height = grid_top + rows as f64 * slot_h + PAD;
    let global_max = grids.iter().take(n).map(FretboardGrid::max_count).max().unwrap_or(0);
    let label_of = |i: usize| labels.get(i).cloned().unwrap_or_else(|| format!("#{}", i + 1));

    let mut svg = Svg::new(width, height);
    title(&mut svg, PAD, 18.0, &format!("Similarity layout (stress {})", super::fmt_num(layout.stress)));
    if n == 0 {
        no_data(&mut svg, PAD, TOP + 16.0);
        return svg.finish();
    }

    let origin = |i: usize| {
        let (r, c) = layout.grid[i];
        (PAD + c as f64 * slot_w, grid_top + r as f64 * slot_h)
    };

    for i in 0..n {
        let (x, y) = origin(i);
        let name = label_of(i);
        svg.open(
            "g",
            &[
                ("class", Val::S("glyph")),
                ("data-index", Val::O(i.to_string())),
                ("data-recording", Val::O(name.clone())),
                ("transform", Val::O(format!("translate({},{})", super::fmt_num(x), super::fmt_num(y)))),
            ],
        );
        svg.leaf("title", &name);
        glyph_body(&mut svg, &grids[i], GLYPH_CELL_PX, global_max, "cell");
        if layout.outliers[i] {
            svg.empty(
                "rect",
                &[
                    ("class", Val::S("outlier-ring")),
                    ("x", Val::N(-3.0)),
                    ("y", Val::N(-3.0)),
                    ("width", Val::N(glyph_w + 6.0)),
                    ("height", Val::N(glyph_h + 6.0)),
                    ("fill", Val::S("none")),
                    ("stroke", Val::S("#000000")),
                    ("stroke-width", Val::N(2.0)),
                ],
            );
        }
        svg.close("g");
    }

    if let Some(i) = callout {
        let cx = (width - callout_w) / 2.0;
        let cy = TOP + 14.0;
        label(&mut svg, width / 2.0, TOP + 8.0, "middle", 10.0, &format!("outlier: {}", label_of(i)));
        svg.open(
            "g",
            &[
                ("class", Val::S("callout")),
                ("data-index", Val::O(i.to_string())),
                ("transform", Val::O(format!("translate({},{})", super::fmt_num(cx), super::fmt_num(cy)))),
            ],
        );
        glyph_body(&mut svg, &grids[i], CALLOUT_CELL_PX, global_max, "callout-cell");
        svg.close("g");
        let (gx, gy) = origin(i);
        line(
            &mut svg,
            "callout-link",
            (width / 2.0, cy + strings as f64 * CALLOUT_CELL_PX),
            (gx + glyph_w / 2.0, gy - 3.0),
            "#000000",
            1.0,
        );
    }
    svg.finish()
}

fn glyph_body(svg: &mut Svg, grid: &FretboardGrid, cell: f64, global_max: u32, class: &str) {
    svg.empty(
        "rect",
        &[
            ("class", Val::S("glyph-bg")),
            ("x", Val::N(0.0)),
            ("y", Val::N(0.0)),
            ("width", Val::N(grid.cols as f64 * cell)),
            ("height", Val::N(grid.rows as f64 * cell)),
            ("fill", Val::S("#ffffff")),
            ("stroke", Val::S("#cccccc")),
            ("stroke-width", Val::N(0.5)),
        ],
    );
    for s in 0..grid.rows {
        for f in 0..grid.cols {
            let n = grid.counts[s * grid.cols + f];
            if n == 0 {
                continue;
            }
            svg.empty(
                "rect",
                &[
                    ("class", Val::S(class)),
                    ("x", Val::N(f as f64 * cell)),
                    ("y", Val::N(s as f64 * cell)),
                    ("width", Val::N(cell)),
                    ("height", Val::N(cell)),
                    ("fill", Val::O(glyph_color(f, grid.cols, n, global_max).hex())),
                ],
            );
        }
    }
}
