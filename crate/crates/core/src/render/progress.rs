use super::svg::{label, line, no_data, swatch, title, Svg, Val};
use super::{diverging_color, fmt_num, palette, ColorClamp, RenderOptions, MIN_AUTO_CLAMP_SECONDS};
use crate::heatmap::ProgressMatrix;
use crate::score::note_name;
use crate::stats::quantile;

const MARGIN_LEFT: f64 = 72.0;
const MARGIN_TOP: f64 = 48.0;
const LEGEND_WIDTH: f64 = 180.0;

/// Saturation point of the diverging scale, in seconds.
pub fn resolve_clamp(matrix: &ProgressMatrix, clamp: ColorClamp) -> f64 {
    match clamp {
        ColorClamp::Seconds(s) if s > 0.0 && s.is_finite() => s,
        _ => {
            let abs: Vec<f64> = matrix.deviations.iter().flatten().map(|d| d.abs()).collect();
            quantile(&abs, 0.95).unwrap_or(0.0).max(MIN_AUTO_CLAMP_SECONDS)
        }
    }
}

/// Notes top to bottom, repetitions left to right in chronological order.
/// Missed notes are dark grey, early notes blue, late notes red.
pub fn render_progress_heatmap(matrix: &ProgressMatrix, opts: &RenderOptions) -> String {
    let c = opts.cell_size_px.max(1) as f64;
    let clamp = resolve_clamp(matrix, opts.color_clamp);
    let grid_w = matrix.cols as f64 * c;
    let grid_h = matrix.rows as f64 * c;
    let width = MARGIN_LEFT + grid_w.max(LEGEND_WIDTH + 140.0) + 24.0;
    let height = MARGIN_TOP + grid_h + 64.0;

    let mut svg = Svg::new(width, height);
    title(&mut svg, MARGIN_LEFT, 18.0, &format!("Timing deviation: {}", matrix.exercise));
    label(&mut svg, MARGIN_LEFT, 34.0, "start", 10.0, "repetition");

    let ink = palette::INK.hex();
    line(&mut svg, "axis", (MARGIN_LEFT, MARGIN_TOP), (MARGIN_LEFT + grid_w, MARGIN_TOP), &ink, 1.0);
    line(&mut svg, "axis", (MARGIN_LEFT, MARGIN_TOP), (MARGIN_LEFT, MARGIN_TOP + grid_h), &ink, 1.0);

    for (row, &pitch) in matrix.pitches.iter().enumerate() {
        let y = MARGIN_TOP + (row as f64 + 0.5) * c + 3.0;
        label(&mut svg, MARGIN_LEFT - 6.0, y, "end", 9.0, &format!("{} {}", row + 1, note_name(pitch)));
    }
    for col in 0..matrix.cols {
        let x = MARGIN_LEFT + (col as f64 + 0.5) * c;
        label(&mut svg, x, MARGIN_TOP - 4.0, "middle", 8.0, &(col + 1).to_string());
    }

    if matrix.cols == 0 || matrix.rows == 0 {
        no_data(&mut svg, MARGIN_LEFT + 8.0, MARGIN_TOP + 18.0);
    } else {
        svg.group("cells", MARGIN_LEFT, MARGIN_TOP);
        let miss = palette::MISS.hex();
        for row in 0..matrix.rows {
            for col in 0..matrix.cols {
                let dev = matrix.get(row, col);
                let fill = match dev {
                    Some(d) => diverging_color((d / clamp).clamp(-1.0, 1.0)).hex(),
                    None => miss.clone(),
                };
                let value = dev.map_or_else(|| "miss".to_string(), fmt_num);
                svg.empty(
                    "rect",
                    &[
                        ("class", Val::S("cell")),
                        ("x", Val::N(col as f64 * c)),
                        ("y", Val::N(row as f64 * c)),
                        ("width", Val::N(c)),
                        ("height", Val::N(c)),
                        ("fill", Val::O(fill)),
                        ("data-row", Val::O(row.to_string())),
                        ("data-col", Val::O(col.to_string())),
                        ("data-value", Val::O(value)),
                    ],
                );
            }
        }
        svg.close("g");
    }

    let ly = MARGIN_TOP + grid_h + 20.0;
    svg.open("defs", &[]);
    svg.open(
        "linearGradient",
        &[("id", Val::S("diverging")), ("x1", Val::N(0.0)), ("x2", Val::N(1.0)), ("y1", Val::N(0.0)), ("y2", Val::N(0.0))],
    );
    for (offset, color) in [("0%", palette::EARLY), ("50%", palette::NEUTRAL), ("100%", palette::LATE)] {
        svg.empty("stop", &[("offset", Val::S(offset)), ("stop-color", Val::O(color.hex()))]);
    }
    svg.close("linearGradient");
    svg.close("defs");
    svg.empty(
        "rect",
        &[
            ("class", Val::S("legend-scale")),
            ("x", Val::N(MARGIN_LEFT)),
            ("y", Val::N(ly)),
            ("width", Val::N(LEGEND_WIDTH)),
            ("height", Val::N(10.0)),
            ("fill", Val::S("url(#diverging)")),
            ("stroke", Val::S("#666666")),
            ("stroke-width", Val::N(0.5)),
        ],
    );
    label(&mut svg, MARGIN_LEFT, ly + 24.0, "start", 9.0, &format!("-{} s early", fmt_num(clamp)));
    label(&mut svg, MARGIN_LEFT + LEGEND_WIDTH / 2.0, ly + 24.0, "middle", 9.0, "0");
    label(&mut svg, MARGIN_LEFT + LEGEND_WIDTH, ly + 24.0, "end", 9.0, &format!("+{} s late", fmt_num(clamp)));
    swatch(&mut svg, MARGIN_LEFT + LEGEND_WIDTH + 24.0, ly + 5.0, &palette::MISS.hex(), "missed");
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heatmap::ProgressColumn;

    fn matrix(deviations: Vec<Option<f64>>, cols: usize) -> ProgressMatrix {
        let rows = if cols == 0 { 2 } else { deviations.len() / cols };
        ProgressMatrix {
            exercise: "x".into(),
            rows,
            cols,
            pitches: vec![57; rows],
            columns: (0..cols).map(|i| ProgressColumn { recording_id: "r".into(), repetition_index: i }).collect(),
            deviations,
        }
    }

    #[test]
    fn cell_colors_follow_the_clamp() {
        let m = matrix(vec![Some(0.0), Some(0.05), Some(0.1), None], 2);
        let opts = RenderOptions { color_clamp: ColorClamp::Seconds(0.1), ..Default::default() };
        let svg = render_progress_heatmap(&m, &opts);
        assert!(svg.contains("fill=\"#ffffff\" data-row=\"0\" data-col=\"0\""));
        assert!(svg.contains("fill=\"#d98c95\" data-row=\"0\" data-col=\"1\""));
        assert!(svg.contains("fill=\"#b2182b\" data-row=\"1\" data-col=\"0\""));
        assert!(svg.contains("fill=\"#404040\" data-row=\"1\" data-col=\"1\""));
        assert_eq!(svg.matches("class=\"cell\"").count(), 4);
    }

    #[test]
    fn auto_clamp_has_a_floor() {
        let m = matrix(vec![Some(0.001), Some(-0.002)], 1);
        assert_eq!(resolve_clamp(&m, ColorClamp::Auto), MIN_AUTO_CLAMP_SECONDS);
        let m = matrix(vec![Some(0.2), Some(-0.4)], 1);
        assert!((resolve_clamp(&m, ColorClamp::Auto) - 0.39).abs() < 1e-12);
    }

    #[test]
    fn empty_matrix_says_no_data() {
        let svg = render_progress_heatmap(&matrix(vec![], 0), &RenderOptions::default());
        assert!(svg.contains(">no data<"));
        assert!(svg.contains("class=\"axis\""));
        assert_eq!(svg.matches("class=\"cell\"").count(), 0);
    }
}
