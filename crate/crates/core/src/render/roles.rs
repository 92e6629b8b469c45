use super::svg::{label, line, no_data, swatch, title, Svg, Val};
use super::{fmt_num, palette, role_color, RenderOptions, TimeAxis};
use crate::theory::{NoteRole, RoleSequence, ScaleSpec};

pub const TIMELINE_WIDTH_PX: f64 = 500.0;
const LABEL_WIDTH: f64 = 150.0;
const ROW_HEIGHT: f64 = 20.0;
const BAR_HEIGHT: f64 = 14.0;
const TOP: f64 = 32.0;

/// Step of roughly `span / 5` from the 1-2-5 series.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag)
}

/// One timeline row per sequence, spans coloured by scale role. Rows are
/// labelled from `labels` where given, by recording id otherwise.
pub fn render_role_sequence(
    sequences: &[RoleSequence],
    labels: &[String],
    spec: &ScaleSpec,
    opts: &RenderOptions,
) -> String {
    let rows = sequences.len();
    let axis_y = TOP + rows.max(1) as f64 * ROW_HEIGHT + 4.0;
    let legend_y = axis_y + 32.0;
    let width = LABEL_WIDTH + TIMELINE_WIDTH_PX + 24.0;
    let height = legend_y + NoteRole::ALL.len() as f64 * 16.0 + 8.0;
    let shared_end = sequences.iter().map(RoleSequence::end_seconds).fold(0.0, f64::max);

    let mut svg = Svg::new(width, height);
    title(&mut svg, LABEL_WIDTH, 18.0, &format!("Scale roles: {}", spec.name));
    if sequences.iter().all(|s| s.spans.is_empty()) {
        no_data(&mut svg, LABEL_WIDTH, TOP + 14.0);
    }

    for (r, seq) in sequences.iter().enumerate() {
        let y = TOP + r as f64 * ROW_HEIGHT;
        let end = match opts.time_axis {
            TimeAxis::Absolute => shared_end,
            TimeAxis::Normalized => seq.end_seconds(),
        };
        let scale = if end > 0.0 { TIMELINE_WIDTH_PX / end } else { 0.0 };
        let name = labels.get(r).unwrap_or(&seq.recording_id);
        label(&mut svg, LABEL_WIDTH - 8.0, y + 13.0, "end", 10.0, name);
        svg.open(
            "g",
            &[
                ("class", Val::S("row")),
                ("data-recording", Val::O(seq.recording_id.clone())),
                ("transform", Val::O(format!("translate({},{})", fmt_num(LABEL_WIDTH), fmt_num(y)))),
            ],
        );
        for span in &seq.spans {
            svg.empty(
                "rect",
                &[
                    ("class", Val::S("cell")),
                    ("x", Val::N(span.start_seconds * scale)),
                    ("y", Val::N((ROW_HEIGHT - BAR_HEIGHT) / 2.0)),
                    ("width", Val::N((span.duration_seconds * scale).max(0.0))),
                    ("height", Val::N(BAR_HEIGHT)),
                    ("rx", Val::N(3.0)),
                    ("fill", Val::O(role_color(span.role).hex())),
                    ("data-role", Val::S(role_key(span.role))),
                    ("data-pitch", Val::O(span.pitch.to_string())),
                ],
            );
        }
        svg.close("g");
    }

    let ink = palette::INK.hex();
    line(&mut svg, "axis", (LABEL_WIDTH, axis_y), (LABEL_WIDTH + TIMELINE_WIDTH_PX, axis_y), &ink, 1.0);
    match opts.time_axis {
        TimeAxis::Absolute if shared_end > 0.0 => {
            let step = tick_step(shared_end);
            let mut k = 0u32;
            loop {
                let t = k as f64 * step;
                if t > shared_end + 1e-9 {
                    break;
                }
                let x = LABEL_WIDTH + t * TIMELINE_WIDTH_PX / shared_end;
                line(&mut svg, "tick", (x, axis_y), (x, axis_y + 4.0), &ink, 1.0);
                let text = if step >= 1.0 { format!("{t:.0}") } else { fmt_num(t) };
                label(&mut svg, x, axis_y + 14.0, "middle", 9.0, &text);
                k += 1;
            }
            label(&mut svg, LABEL_WIDTH + TIMELINE_WIDTH_PX, axis_y + 26.0, "end", 9.0, "seconds");
        }
        TimeAxis::Normalized => {
            label(&mut svg, LABEL_WIDTH, axis_y + 14.0, "start", 9.0, "start");
            label(&mut svg, LABEL_WIDTH + TIMELINE_WIDTH_PX, axis_y + 14.0, "end", 9.0, "end of recording");
        }
        TimeAxis::Absolute => {}
    }

    for (i, role) in NoteRole::ALL.into_iter().enumerate() {
        swatch(&mut svg, LABEL_WIDTH + 6.0, legend_y + i as f64 * 16.0, &role_color(role).hex(), &spec.role_label(role));
    }
    svg.finish()
}

fn role_key(role: NoteRole) -> &'static str {
    match role {
        NoteRole::Root => "root",
        NoteRole::ScaleTone => "scaleTone",
        NoteRole::BlueNote => "blueNote",
        NoteRole::Outside => "outside",
    }
}
