use super::svg::{label, line, no_data, swatch, title, Svg, Val};
use super::{category_color, palette, RenderOptions};
use crate::heatmap::{CellCategory, ComparisonGrid, FretboardGrid};
use crate::score::{note_name, Tuning};

const MARGIN_LEFT: f64 = 40.0;
const MARGIN_TOP: f64 = 30.0;
const MARKER_FRETS: [u8; 9] = [3, 5, 7, 9, 12, 15, 17, 19, 21];

#[derive(Debug, Clone, Copy)]
pub enum FretboardLayer<'a> {
    Counts(&'a FretboardGrid),
    Comparison(&'a ComparisonGrid),
}

impl FretboardLayer<'_> {
    fn shape(&self) -> (usize, usize) {
        match self {
            FretboardLayer::Counts(g) => (g.rows, g.cols),
            FretboardLayer::Comparison(g) => (g.rows, g.cols),
        }
    }
}

/// String 1 on top, fret 0 (open) in the leftmost column.
pub fn render_fretboard(layer: FretboardLayer<'_>, tuning: &Tuning, opts: &RenderOptions) -> String {
    let c = opts.cell_size_px.max(1) as f64;
    let (rows, cols) = layer.shape();
    let board_w = cols as f64 * c;
    let board_h = rows as f64 * c;
    let legend_h = if matches!(layer, FretboardLayer::Comparison(_)) { 24.0 } else { 0.0 };
    let width = MARGIN_LEFT + board_w.max(240.0) + 16.0;
    let height = MARGIN_TOP + board_h + 36.0 + legend_h;

    let mut svg = Svg::new(width, height);
    let heading = match layer {
        FretboardLayer::Counts(g) => format!("Fretboard: {} notes, {} unmapped", g.total_notes, g.unmapped_notes),
        FretboardLayer::Comparison(_) => "Fretboard comparison".to_string(),
    };
    title(&mut svg, MARGIN_LEFT, 18.0, &heading);

    for s in 0..rows {
        if let Some(p) = tuning.open_pitch(s as u8 + 1) {
            label(&mut svg, MARGIN_LEFT - 6.0, MARGIN_TOP + (s as f64 + 0.5) * c + 3.0, "end", 9.0, &note_name(p));
        }
    }

    svg.group("board", MARGIN_LEFT, MARGIN_TOP);
    svg.empty(
        "rect",
        &[
            ("class", Val::S("frame")),
            ("x", Val::N(0.0)),
            ("y", Val::N(0.0)),
            ("width", Val::N(board_w)),
            ("height", Val::N(board_h)),
            ("fill", Val::S("none")),
            ("stroke", Val::S("#666666")),
            ("stroke-width", Val::N(1.0)),
        ],
    );
    match layer {
        FretboardLayer::Counts(g) => {
            let max = g.max_count();
            let fill = palette::COUNT.hex();
            for s in 0..rows {
                for f in 0..cols {
                    let n = g.counts[s * cols + f];
                    if n == 0 {
                        continue;
                    }
                    let mut attrs = cell_attrs(s, f, c, fill.clone());
                    attrs.push(("fill-opacity", Val::N(n as f64 / max as f64)));
                    attrs.push(("data-count", Val::O(n.to_string())));
                    svg.empty("rect", &attrs);
                }
            }
        }
        FretboardLayer::Comparison(g) => {
            for s in 0..rows {
                for f in 0..cols {
                    let cat = g.cells[s * cols + f];
                    let Some(color) = category_color(cat) else { continue };
                    let mut attrs = cell_attrs(s, f, c, color.hex());
                    attrs.push(("data-category", Val::S(category_key(cat))));
                    svg.empty("rect", &attrs);
                }
            }
        }
    }
    let guide = palette::GUIDE.hex();
    for s in 0..rows {
        let y = (s as f64 + 0.5) * c;
        line(&mut svg, "string", (0.0, y), (board_w, y), &guide, 0.5);
    }
    for f in 1..cols {
        let x = f as f64 * c;
        let w = if f == 1 { 2.0 } else { 0.5 };
        line(&mut svg, if f == 1 { "nut" } else { "fret" }, (x, 0.0), (x, board_h), &guide, w);
    }
    svg.close("g");

    if rows == 0 || cols == 0 {
        no_data(&mut svg, MARGIN_LEFT + 8.0, MARGIN_TOP + 16.0);
    }

    let numbers_y = MARGIN_TOP + board_h + 12.0;
    for f in 0..cols {
        label(&mut svg, MARGIN_LEFT + (f as f64 + 0.5) * c, numbers_y, "middle", 8.0, &f.to_string());
    }
    if opts.show_fret_markers {
        let y = numbers_y + 10.0;
        for &f in MARKER_FRETS.iter().filter(|&&f| (f as usize) < cols) {
            let x = MARGIN_LEFT + (f as f64 + 0.5) * c;
            let xs: Vec<f64> = if f == 12 { vec![x - c * 0.2, x + c * 0.2] } else { vec![x] };
            for cx in xs {
                svg.empty(
                    "circle",
                    &[
                        ("class", Val::S("marker")),
                        ("cx", Val::N(cx)),
                        ("cy", Val::N(y)),
                        ("r", Val::N(2.5)),
                        ("fill", Val::S("#bbbbbb")),
                    ],
                );
            }
        }
    }

    if let FretboardLayer::Comparison(_) = layer {
        let (a, b) = opts
            .series_labels
            .clone()
            .unwrap_or_else(|| ("A".to_string(), "B".to_string()));
        let y = MARGIN_TOP + board_h + 44.0;
        swatch(&mut svg, MARGIN_LEFT + 6.0, y, &palette::ONLY_A.hex(), &format!("only {a}"));
        swatch(&mut svg, MARGIN_LEFT + 86.0, y, &palette::ONLY_B.hex(), &format!("only {b}"));
        swatch(&mut svg, MARGIN_LEFT + 166.0, y, &palette::BOTH.hex(), "both");
    }
    svg.finish()
}

fn cell_attrs(string_row: usize, fret: usize, c: f64, fill: String) -> Vec<(&'static str, Val<'static>)> {
    vec![
        ("class", Val::S("cell")),
        ("x", Val::N(fret as f64 * c)),
        ("y", Val::N(string_row as f64 * c)),
        ("width", Val::N(c)),
        ("height", Val::N(c)),
        ("fill", Val::O(fill)),
        ("data-string", Val::O((string_row + 1).to_string())),
        ("data-fret", Val::O(fret.to_string())),
    ]
}

fn category_key(cat: CellCategory) -> &'static str {
    match cat {
        CellCategory::OnlyA => "onlyA",
        CellCategory::OnlyB => "onlyB",
        CellCategory::Both => "both",
        CellCategory::Neither => "neither",
    }
}
