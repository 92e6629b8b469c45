//! The `practice-scope` command line.
//!
//! Every command works on one catalog directory, taken from `--root` or the
//! `PRACTICE_SCOPE_ROOT` environment variable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use practice_scope::midi::ChannelMap;
use practice_scope::{ExerciseKind, FitMode, RecordingMeta};
use practice_scope_catalog::views::{self, parse_format, parse_time, Format};
use practice_scope_catalog::{Catalog, RecordingFilter, Target, VizRequest};
use practice_scope_sample::{generate_catalog, GeneratorSpec, DEMO_EXERCISE, DEMO_IMPROVISATION};

#[derive(Debug, Parser)]
#[command(name = "practice-scope", version, about = "Timing, fretboard and scale-role analytics for MIDI practice recordings")]
pub struct Cli {
    /// Catalog directory.
    #[arg(long, env = "PRACTICE_SCOPE_ROOT", global = true)]
    pub root: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Scale,
    Riff,
    Improv,
}

impl From<Kind> for ExerciseKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Scale => ExerciseKind::ScalePattern,
            Kind::Riff => ExerciseKind::Riff,
            Kind::Improv => ExerciseKind::Improvisation,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add a Standard MIDI File to the catalog.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        player: String,
        #[arg(long)]
        exercise: String,
        /// RFC 3339 time or YYYY-MM-DD.
        #[arg(long)]
        recorded_at: String,
        #[arg(long, value_enum, default_value = "scale")]
        kind: Kind,
        /// JSON object mapping MIDI channel to string number, e.g. {"0":1}.
        #[arg(long)]
        channel_map: Option<String>,
    },
    /// List recordings, oldest first.
    List {
        #[arg(long)]
        player: Option<String>,
        #[arg(long)]
        exercise: Option<String>,
        #[arg(long)]
        since: Option<String>,
        #[arg(long)]
        until: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Render a view, with the same parameters as the HTTP API, e.g.
    /// `render progress player=alex exercise=run fit=offset`.
    Render {
        /// progress, fretboard, compare, similarity or roles.
        viz: String,
        /// key=value parameters.
        params: Vec<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fretboard comparison of two players on one exercise.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        exercise: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Serve the HTTP API until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
    /// Write a synthetic catalog into an empty root directory.
    Generate {
        /// Generator spec as JSON; the bundled demo when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Print the demo spec instead of generating.
        #[arg(long)]
        print_demo_spec: bool,
    },
    /// Generate the demo catalog under `<out>/catalog` and render the four
    /// demo figures next to it.
    Demo { out: PathBuf },
}

fn root(cli_root: &Option<PathBuf>) -> anyhow::Result<&Path> {
    cli_root.as_deref().context("no catalog root: pass --root or set PRACTICE_SCOPE_ROOT")
}

fn open(cli_root: &Option<PathBuf>) -> anyhow::Result<Catalog> {
    let root = root(cli_root)?;
    Catalog::open(root).with_context(|| format!("opening catalog at {}", root.display()))
}

fn emit(bytes: &[u8], output: &Option<PathBuf>, out: &mut impl Write) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(out.write_all(bytes)?),
    }
}

/// Splits `key=value` arguments into a parameter map.
pub fn parse_params(params: &[String]) -> anyhow::Result<BTreeMap<String, String>> {
    params
        .iter()
        .map(|p| match p.split_once('=') {
            Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => bail!("parameter `{p}` is not of the form key=value"),
        })
        .collect()
}

pub fn run(cli: Cli, out: &mut impl Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { file, player, exercise, recorded_at, kind, channel_map } => {
            let catalog = open(&cli.root)?;
            let bytes = fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let channel_map: Option<ChannelMap> =
                channel_map.map(|s| serde_json::from_str(&s)).transpose().context("parsing --channel-map")?;
            let meta = RecordingMeta { player, exercise, recorded_at: parse_time(&recorded_at)?, exercise_kind: kind.into() };
            let outcome = catalog.ingest(&bytes, meta, channel_map)?;
            writeln!(out, "{}", outcome.id)?;
            if !outcome.diagnostics.is_clean() {
                writeln!(out, "{}", serde_json::to_string(&outcome.diagnostics)?)?;
            }
        }
        Command::List { player, exercise, since, until, json } => {
            let catalog = open(&cli.root)?;
            let filter = RecordingFilter {
                player,
                exercise,
                since: since.as_deref().map(parse_time).transpose()?,
                until: until.as_deref().map(parse_time).transpose()?,
            };
            let rows = catalog.query(&filter);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
            } else {
                for r in rows {
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}",
                        r.id,
                        r.meta.player,
                        r.meta.exercise,
                        r.meta.recorded_at.format("%Y-%m-%dT%H:%M:%SZ"),
                        r.note_count
                    )?;
                }
            }
        }
        Command::Render { viz, params, output } => {
            let catalog = open(&cli.root)?;
            let map = parse_params(&params)?;
            let format = parse_format(&map)?;
            let req = VizRequest::parse(&viz, &map)?;
            emit(&views::render(&catalog, &req, format)?, &output, out)?;
        }
        Command::Compare { a, b, exercise, output } => {
            let catalog = open(&cli.root)?;
            let req = VizRequest::Compare { player_a: a, player_b: b, exercise };
            emit(&views::render(&catalog, &req, Format::Svg)?, &output, out)?;
        }
        Command::Serve { bind } => {
            let catalog = Arc::new(open(&cli.root)?);
            tokio::runtime::Runtime::new()?.block_on(practice_scope_catalog::api::serve(catalog, bind))?;
        }
        Command::Generate { spec, print_demo_spec } => {
            if print_demo_spec {
                writeln!(out, "{}", serde_json::to_string_pretty(&GeneratorSpec::demo())?)?;
                return Ok(());
            }
            let spec = match spec {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => GeneratorSpec::demo(),
            };
            let catalog = generate_catalog(&spec, root(&cli.root)?)?;
            writeln!(out, "generated {} recordings", catalog.len())?;
        }
        Command::Demo { out: dir } => {
            let figures = demo_pipeline(&dir)?;
            for f in figures.figures {
                writeln!(out, "{}", f.path.display())?;
            }
        }
    }
    Ok(())
}

/// One rendered demo figure.
#[derive(Debug, Clone)]
pub struct Figure {
    pub name: &'static str,
    pub request: VizRequest,
    pub path: PathBuf,
}

pub struct DemoOutput {
    pub catalog: Catalog,
    pub figures: Vec<Figure>,
}

/// The four views of the demo catalog: the improving player's progress,
/// low-string against high-string player, the improvisation similarity map
/// and the scale-role rows.
pub fn demo_requests() -> Vec<(&'static str, VizRequest)> {
    vec![
        (
            "progress",
            VizRequest::Progress {
                target: Target::PlayerExercise { player: "alex".into(), exercise: DEMO_EXERCISE.into() },
                fit: FitMode::Affine,
            },
        ),
        (
            "compare",
            VizRequest::Compare {
                player_a: "alex".into(),
                player_b: "blair".into(),
                exercise: DEMO_IMPROVISATION.into(),
            },
        ),
        ("similarity", VizRequest::Similarity { exercise: DEMO_IMPROVISATION.into() }),
        ("roles", VizRequest::Roles { exercise: DEMO_IMPROVISATION.into(), players: None }),
    ]
}

pub fn demo_pipeline(out: &Path) -> anyhow::Result<DemoOutput> {
    let catalog = generate_catalog(&GeneratorSpec::demo(), out.join("catalog"))?;
    let mut figures = Vec::new();
    for (name, request) in demo_requests() {
        let path = out.join(format!("{name}.svg"));
        fs::write(&path, views::render(&catalog, &request, Format::Svg)?.as_slice())
            .with_context(|| format!("writing {}", path.display()))?;
        figures.push(Figure { name, request, path });
    }
    Ok(DemoOutput { catalog, figures })
}
