//! Query parsing and view computation shared by the HTTP API and the CLI.
//!
//! Every view is a selection of catalog data handed to one analytics
//! function and one renderer from `practice-scope`; nothing is computed here
//! beyond that plumbing.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use practice_scope::alignment::{segment_repetitions, FitMode, Segment};
use practice_scope::heatmap::{comparison_grid, fretboard_counts, progress_matrix, sort_segments};
use practice_scope::render::{
    render_fretboard, render_progress_heatmap, render_role_sequence, render_similarity_map, FretboardLayer,
    RenderOptions,
};
use practice_scope::similarity::{layout_grids, DEFAULT_OUTLIER_NEIGHBORS};
use practice_scope::theory::{role_duration_shares, role_sequence, RoleShares};
use practice_scope::{ComparisonGrid, FretboardGrid, Layout2D, ProgressMatrix, RoleSequence, ScaleSpec};
use serde::Serialize;

use crate::error::{CatalogError, Result};
use crate::store::{Catalog, IndexEntry, RecordingFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Json,
    #[default]
    Svg,
}

impl Format {
    pub fn content_type(self) -> &'static str {
        match self {
            Format::Json => "application/json",
            Format::Svg => "image/svg+xml",
        }
    }
}

/// Recordings selected either by id or by player and exercise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Recording(String),
    PlayerExercise { player: String, exercise: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VizRequest {
    Progress { target: Target, fit: FitMode },
    Fretboard { target: Target },
    Compare { player_a: String, player_b: String, exercise: String },
    Similarity { exercise: String },
    Roles { exercise: String, players: Option<Vec<String>> },
}

pub const VIZ_NAMES: [&str; 5] = ["progress", "fretboard", "compare", "similarity", "roles"];

struct Params<'a> {
    viz: &'a str,
    map: &'a BTreeMap<String, String>,
}

impl Params<'_> {
    fn get(&self, key: &str) -> Option<String> {
        self.map.get(key).map(|v| v.trim().to_string()).filter(|v| !v.is_empty())
    }

    fn require(&self, key: &str) -> Result<String> {
        self.get(key).ok_or_else(|| CatalogError::BadRequest(format!("{} requires `{key}`", self.viz)))
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| k.as_str() != "format" && !keys.contains(&k.as_str())) {
            Some(k) => Err(CatalogError::BadRequest(format!("unknown parameter `{k}` for {}", self.viz))),
            None => Ok(()),
        }
    }

    fn target(&self) -> Result<Target> {
        match (self.get("recording"), self.get("player"), self.get("exercise")) {
            (Some(id), None, None) => Ok(Target::Recording(id)),
            (None, Some(player), Some(exercise)) => Ok(Target::PlayerExercise { player, exercise }),
            _ => Err(CatalogError::BadRequest(format!(
                "{} needs either `recording` or both `player` and `exercise`",
                self.viz
            ))),
        }
    }
}

pub fn parse_format(params: &BTreeMap<String, String>) -> Result<Format> {
    match params.get("format").map(String::as_str) {
        None | Some("svg") => Ok(Format::Svg),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(CatalogError::BadRequest(format!("unknown format `{other}` (expected json or svg)"))),
    }
}

impl VizRequest {
    /// Builds a request from query parameters; `format` is accepted and
    /// ignored here.
    pub fn parse(viz: &str, map: &BTreeMap<String, String>) -> Result<Self> {
        let p = Params { viz, map };
        match viz {
            "progress" => {
                p.allow(&["recording", "player", "exercise", "fit"])?;
                let fit = match p.get("fit") {
                    Some(f) => f.parse().map_err(CatalogError::BadRequest)?,
                    None => FitMode::default(),
                };
                Ok(VizRequest::Progress { target: p.target()?, fit })
            }
            "fretboard" => {
                p.allow(&["recording", "player", "exercise"])?;
                Ok(VizRequest::Fretboard { target: p.target()? })
            }
            "compare" => {
                p.allow(&["playerA", "playerB", "exercise"])?;
                Ok(VizRequest::Compare {
                    player_a: p.require("playerA")?,
                    player_b: p.require("playerB")?,
                    exercise: p.require("exercise")?,
                })
            }
            "similarity" => {
                p.allow(&["exercise"])?;
                Ok(VizRequest::Similarity { exercise: p.require("exercise")? })
            }
            "roles" => {
                p.allow(&["exercise", "players"])?;
                let players = p.get("players").map(|s| {
                    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect::<Vec<_>>()
                });
                Ok(VizRequest::Roles { exercise: p.require("exercise")?, players })
            }
            other => Err(CatalogError::NotFound(format!("unknown visualization `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VizRequest::Progress { .. } => "progress",
            VizRequest::Fretboard { .. } => "fretboard",
            VizRequest::Compare { .. } => "compare",
            VizRequest::Similarity { .. } => "similarity",
            VizRequest::Roles { .. } => "roles",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProgressView {
    pub fit: FitMode,
    pub recordings: Vec<String>,
    pub matrix: ProgressMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FretboardView {
    pub recordings: Vec<String>,
    pub grid: FretboardGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompareView {
    pub player_a: String,
    pub player_b: String,
    pub exercise: String,
    pub grid: ComparisonGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityView {
    pub exercise: String,
    pub recordings: Vec<String>,
    pub labels: Vec<String>,
    pub layout: Layout2D,
    pub grids: Vec<FretboardGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RolesView {
    pub exercise: String,
    pub labels: Vec<String>,
    pub spec: ScaleSpec,
    pub sequences: Vec<RoleSequence>,
    pub shares: Vec<RoleShares>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum VizData {
    Progress(ProgressView),
    Fretboard(FretboardView),
    Compare(CompareView),
    Similarity(SimilarityView),
    Roles(RolesView),
}

impl VizData {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("view data serialises");
        out.push(b'\n');
        out
    }

    pub fn to_svg(&self, catalog: &Catalog, opts: &RenderOptions) -> String {
        let tuning = &catalog.fretboard().tuning;
        match self {
            VizData::Progress(v) => render_progress_heatmap(&v.matrix, opts),
            VizData::Fretboard(v) => render_fretboard(FretboardLayer::Counts(&v.grid), tuning, opts),
            VizData::Compare(v) => {
                let opts = RenderOptions { series_labels: Some((v.player_a.clone(), v.player_b.clone())), ..opts.clone() };
                render_fretboard(FretboardLayer::Comparison(&v.grid), tuning, &opts)
            }
            VizData::Similarity(v) => render_similarity_map(&v.layout, &v.grids, &v.labels, opts),
            VizData::Roles(v) => render_role_sequence(&v.sequences, &v.labels, &v.spec, opts),
        }
    }
}

/// Index entries a request reads, in chronological order.
pub fn select(catalog: &Catalog, req: &VizRequest) -> Result<Vec<IndexEntry>> {
    let by = |player: Option<&str>, exercise: &str| {
        catalog.entries(&RecordingFilter {
            player: player.map(str::to_string),
            exercise: Some(exercise.to_string()),
            ..Default::default()
        })
    };
    let selected = match req {
        VizRequest::Progress { target, .. } | VizRequest::Fretboard { target } => match target {
            Target::Recording(id) => vec![catalog.entry(id)?],
            Target::PlayerExercise { player, exercise } => by(Some(player), exercise),
        },
        VizRequest::Compare { player_a, player_b, exercise } => {
            let mut both = by(Some(player_a), exercise);
            both.extend(by(Some(player_b), exercise));
            both
        }
        VizRequest::Similarity { exercise } => by(None, exercise),
        VizRequest::Roles { exercise, players } => by(None, exercise)
            .into_iter()
            .filter(|e| players.as_ref().map_or(true, |ps| ps.contains(&e.meta.player)))
            .collect(),
    };
    Ok(selected)
}

pub fn exercise_of(req: &VizRequest, selected: &[IndexEntry]) -> Option<String> {
    match req {
        VizRequest::Progress { target, .. } | VizRequest::Fretboard { target } => match target {
            Target::Recording(_) => selected.first().map(|e| e.meta.exercise.clone()),
            Target::PlayerExercise { exercise, .. } => Some(exercise.clone()),
        },
        VizRequest::Compare { exercise, .. } | VizRequest::Similarity { exercise } | VizRequest::Roles { exercise, .. } => {
            Some(exercise.clone())
        }
    }
}

/// Short human label for a recording.
pub fn recording_label(entry: &IndexEntry) -> String {
    format!("{} {}", entry.meta.player, entry.meta.recorded_at.format("%Y-%m-%d %H:%M"))
}

pub fn compute(catalog: &Catalog, req: &VizRequest) -> Result<VizData> {
    let selected = select(catalog, req)?;
    let ids: Vec<String> = selected.iter().map(|e| e.id.clone()).collect();
    let load_all = || -> Result<Vec<_>> { ids.iter().map(|id| catalog.load(id).map(|l| l.recording)).collect() };
    let board = catalog.fretboard();
    let grid_of = |notes: &[practice_scope::NoteEvent]| fretboard_counts(notes, board.strings(), board.fret_count);
    let sum_grids = |recordings: &[practice_scope::Recording]| {
        recordings.iter().fold(FretboardGrid::empty(board.strings(), board.fret_count), |acc, r| &acc + &grid_of(&r.notes))
    };
    Ok(match req {
        VizRequest::Progress { fit, .. } => {
            let exercise = exercise_of(req, &selected).expect("progress names an exercise");
            let (score, _) = catalog.score(&exercise)?;
            let mut segments: Vec<Segment> =
                load_all()?.iter().flat_map(|r| segment_repetitions(r, &score)).collect();
            sort_segments(&mut segments);
            VizData::Progress(ProgressView { fit: *fit, recordings: ids, matrix: progress_matrix(&segments, &score, *fit) })
        }
        VizRequest::Fretboard { .. } => VizData::Fretboard(FretboardView { grid: sum_grids(&load_all()?), recordings: ids }),
        VizRequest::Compare { player_a, player_b, exercise } => {
            let recordings = load_all()?;
            let (a, b): (Vec<_>, Vec<_>) = recordings.into_iter().partition(|r| r.meta.player == *player_a);
            let grid = comparison_grid(&sum_grids(&a), &sum_grids(&b)).expect("grids share the catalog fretboard");
            VizData::Compare(CompareView {
                player_a: player_a.clone(),
                player_b: player_b.clone(),
                exercise: exercise.clone(),
                grid,
            })
        }
        VizRequest::Similarity { exercise } => {
            let grids: Vec<FretboardGrid> = load_all()?.iter().map(|r| grid_of(&r.notes)).collect();
            let layout = layout_grids(&grids, DEFAULT_OUTLIER_NEIGHBORS).expect("grids share the catalog fretboard");
            VizData::Similarity(SimilarityView {
                exercise: exercise.clone(),
                labels: selected.iter().map(recording_label).collect(),
                recordings: ids,
                layout,
                grids,
            })
        }
        VizRequest::Roles { exercise, .. } => {
            let (spec, _) = catalog.scale(exercise)?;
            let sequences: Vec<RoleSequence> = load_all()?.iter().map(|r| role_sequence(r, &spec)).collect();
            VizData::Roles(RolesView {
                exercise: exercise.clone(),
                labels: selected.iter().map(recording_label).collect(),
                shares: sequences.iter().map(role_duration_shares).collect(),
                spec,
                sequences,
            })
        }
    })
}

/// Cache key naming the request and the digests of everything it reads.
fn cache_key(catalog: &Catalog, req: &VizRequest, format: Format) -> Result<String> {
    let selected = select(catalog, req)?;
    let mut key = format!("{req:?}|{format:?}|");
    for e in &selected {
        let _ = write!(key, "{}:{},", e.id, e.digest);
    }
    if let Some(exercise) = exercise_of(req, &selected) {
        match req {
            VizRequest::Progress { .. } => {
                let _ = write!(key, "|score:{}", catalog.score(&exercise)?.1);
            }
            VizRequest::Roles { .. } => {
                let _ = write!(key, "|scale:{}", catalog.scale(&exercise)?.1);
            }
            _ => {}
        }
    }
    Ok(key)
}

/// Response body for a request, memoised in the catalog.
pub fn render(catalog: &Catalog, req: &VizRequest, format: Format) -> Result<Arc<Vec<u8>>> {
    let key = cache_key(catalog, req, format)?;
    catalog.cached(key, || {
        let data = compute(catalog, req)?;
        Ok(match format {
            Format::Json => data.to_json(),
            Format::Svg => data.to_svg(catalog, &RenderOptions::default()).into_bytes(),
        })
    })
}

/// Parses an RFC 3339 timestamp or a bare `YYYY-MM-DD` date (midnight UTC).
pub fn parse_time(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
        .map_err(|_| CatalogError::BadRequest(format!("`{s}` is not an RFC 3339 time or YYYY-MM-DD date")))
}
