//! Deterministic SVG renderings of the four views.
//!
//! Output depends only on the inputs: no timestamps, no randomness, every
//! numeric attribute printed with exactly two decimals and every colour as
//! lowercase hex. Data-bearing rectangles carry `class="cell"` so tests and
//! clients can count them.

mod fretboard;
mod progress;
mod roles;
mod similarity;
mod svg;

pub use fretboard::{render_fretboard, FretboardLayer};
pub use progress::{render_progress_heatmap, resolve_clamp};
pub use roles::{render_role_sequence, TIMELINE_WIDTH_PX};
pub use similarity::{glyph_color, render_similarity_map, Hsv, GLYPH_HUE_RANGE_DEGREES};

use serde::{Deserialize, Serialize};

use crate::heatmap::CellCategory;
use crate::theory::NoteRole;

/// Diverging-scale floor for the automatic clamp, in seconds.
pub const MIN_AUTO_CLAMP_SECONDS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ColorClamp {
    /// 95th percentile of |deviation|, at least [`MIN_AUTO_CLAMP_SECONDS`].
    Auto,
    Seconds(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TimeAxis {
    /// Rows share one seconds scale.
    #[default]
    Absolute,
    /// Every row is stretched to the full width.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderOptions {
    pub cell_size_px: u32,
    pub color_clamp: ColorClamp,
    pub show_fret_markers: bool,
    pub time_axis: TimeAxis,
    /// Legend names for the two sides of a comparison.
    pub series_labels: Option<(String, String)>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            cell_size_px: 14,
            color_clamp: ColorClamp::Auto,
            show_fret_markers: true,
            time_axis: TimeAxis::Absolute,
            series_labels: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const fn from_hex(v: u32) -> Self {
        Rgb((v >> 16) as u8, (v >> 8) as u8, v as u8)
    }

    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    /// Channel-wise linear interpolation, rounded half away from zero.
    pub fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let t = t.clamp(0.0, 1.0);
        let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
        Rgb(mix(self.0, other.0), mix(self.1, other.1), mix(self.2, other.2))
    }
}

/// Fixed palette.
pub mod palette {
    use super::Rgb;

    pub const EARLY: Rgb = Rgb::from_hex(0x2166ac);
    pub const NEUTRAL: Rgb = Rgb::from_hex(0xffffff);
    pub const LATE: Rgb = Rgb::from_hex(0xb2182b);
    pub const MISS: Rgb = Rgb::from_hex(0x404040);

    pub const ONLY_A: Rgb = Rgb::from_hex(0xd6604d);
    pub const ONLY_B: Rgb = Rgb::from_hex(0x4393c3);
    pub const BOTH: Rgb = Rgb::from_hex(0x888888);

    pub const ROOT: Rgb = Rgb::from_hex(0x1b7837);
    pub const SCALE_TONE: Rgb = Rgb::from_hex(0x7fbf7b);
    pub const BLUE_NOTE: Rgb = Rgb::from_hex(0x2166ac);
    pub const OUTSIDE: Rgb = Rgb::from_hex(0x999999);

    /// Hue of count heatmaps; intensity goes into opacity.
    pub const COUNT: Rgb = Rgb::from_hex(0x2166ac);
    pub const INK: Rgb = Rgb::from_hex(0x222222);
    pub const GUIDE: Rgb = Rgb::from_hex(0x999999);
}

/// Blue for early, white for on time, red for late; `t` in `[-1, 1]`.
pub fn diverging_color(t: f64) -> Rgb {
    if t < 0.0 {
        palette::NEUTRAL.lerp(palette::EARLY, -t)
    } else {
        palette::NEUTRAL.lerp(palette::LATE, t)
    }
}

/// `None` for cells that stay transparent.
pub fn category_color(category: CellCategory) -> Option<Rgb> {
    match category {
        CellCategory::OnlyA => Some(palette::ONLY_A),
        CellCategory::OnlyB => Some(palette::ONLY_B),
        CellCategory::Both => Some(palette::BOTH),
        CellCategory::Neither => None,
    }
}

pub fn role_color(role: NoteRole) -> Rgb {
    match role {
        NoteRole::Root => palette::ROOT,
        NoteRole::ScaleTone => palette::SCALE_TONE,
        NoteRole::BlueNote => palette::BLUE_NOTE,
        NoteRole::Outside => palette::OUTSIDE,
    }
}

/// Two decimals, never `-0.00`.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}
