use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gammalind::gauge::count_independent_fluxes;
use gammalind::graph::validate;
use gammalind::sweep::{csv_string, GraphSection, SectorSection, SweepConfig, THREADS_ENV};
use gammalind::verify::{self, Level};
use gammalind::Mode;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod config;
mod plot;

use config::{merge, GraphArgs, GridArgs, Merged, OutputArgs, SectorArgs};
use plot::{Band, Style};

#[derive(Parser)]
#[command(name = "gammalind", version, about = "Gap sweeps for dissipative gamma-matrix Lindbladians on edge-colored graphs")]
struct Cli {
    /// Worker threads for sweeps; defaults to all cores.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep γ over a grid and write one CSV row per (γ, n).
    Sweep {
        /// TOML config with [graph], [sector], [sweep] and [output] tables.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the built-in checks against the many-body oracle and invariants.
    Verify {
        #[arg(long, default_value = "fast", value_parser = ["fast", "full"])]
        level: String,
    },
    /// Plot one or more sweep CSVs to SVG.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Band::Auto)]
        band: Band,
        #[arg(long)]
        log_y: bool,
        #[arg(long)]
        title: Option<String>,
    },
    /// Print graph structure, independent-flux counts and the sector summary.
    SectorInfo {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sector: SectorArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        // Read by the sweep driver when it builds its pool; nothing else runs yet.
        std::env::set_var(THREADS_ENV, n.to_string());
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// A closed downstream pipe (`| head`) is not an error.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Sweep { config, graph, sector, grid, output } => {
            let merged = merge(config.as_deref(), &graph, &sector, Some(&grid), Some(&output))?;
            sweep(&merged, config.as_deref())?;
        }
        Command::Verify { level } => return verify_cmd(level.parse()?),
        Command::Plot { csv, output, band, log_y, title } => {
            let mut curves = Vec::new();
            for path in &csv {
                curves.extend(plot::load_curves(path)?);
            }
            plot::render(&curves, &Style { band, log_y, title, ..Style::default() }, &output)?;
            eprintln!("wrote {}", output.display());
        }
        Command::SectorInfo { config, graph, sector } => {
            let merged = merge(config.as_deref(), &graph, &sector, None, None)?;
            sector_info(&merged, config.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn source_name(merged: &Merged, config: Option<&Path>) -> String {
    match (config, merged.overridden) {
        (Some(p), false) => p.display().to_string(),
        (Some(p), true) => format!("{} (with flag overrides)", p.display()),
        (None, _) => "command line".to_string(),
    }
}

/// Line numbers only mean something when the text came from a file.
fn located(e: gammalind::Error, name: &str, config: Option<&Path>) -> anyhow::Error {
    match e {
        gammalind::Error::Parse { msg, .. } if config.is_none() => anyhow::anyhow!("{name}: {msg}"),
        other => anyhow::Error::new(other).context(name.to_string()),
    }
}

fn sweep(merged: &Merged, config: Option<&Path>) -> Result<()> {
    let name = source_name(merged, config);
    let cfg = SweepConfig::from_toml(&merged.text).map_err(|e| located(e, &name, config))?;
    let plan = cfg.plan(&merged.text, &merged.base).map_err(|e| located(e, &name, config))?;
    let rows = gammalind::run_sweep(&plan)?;
    let text = csv_string(&rows)?;
    match &cfg.output.csv {
        Some(p) => {
            let path = merged.base.join(p);
            std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if rows.iter().any(|r| r.exceptional_flag) {
        log::warn!("some points sit near an exceptional point; see the exceptional_flag column");
    }
    if let Some(p) = &cfg.output.plot {
        let path = merged.base.join(p);
        let curves = plot::parse_curves("", &text)?;
        plot::render(&curves, &Style::default(), &path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn verify_cmd(level: Level) -> Result<ExitCode> {
    let report = verify::run(level);
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {}: {} [{:.1} s]", c.name, c.detail, c.seconds);
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    println!("{} of {} checks passed", report.checks.len() - failed, report.checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

/// The `[graph]` and `[sector]` tables of a config; other tables are ignored.
#[derive(serde::Deserialize)]
struct SectorView {
    graph: Option<GraphSection>,
    #[serde(default)]
    sector: SectorSection,
}

fn sector_info(merged: &Merged, config: Option<&Path>) -> Result<()> {
    let name = source_name(merged, config);
    let view: SectorView = toml::from_str(&merged.text).with_context(|| name.clone())?;
    let Some(graph_cfg) = view.graph else { bail!("{name}: no graph given (use --lattice or --graph)") };
    let g = graph_cfg.build(&merged.base).with_context(|| name.clone())?;
    let s = g.surface();
    let mut out = String::new();
    writeln!(
        out,
        "graph: {} sites, {} edges, {} colors, max degree {}, {} component(s)",
        g.n(),
        g.num_edges(),
        g.num_colors(),
        g.max_degree(),
        g.num_components()
    )?;
    writeln!(
        out,
        "surface: genus {}, {} boundary(ies); {} plaquettes, {} noncontractible loops",
        s.genus,
        s.boundaries,
        g.plaquettes().len(),
        g.loops().len()
    )?;
    let c = count_independent_fluxes(&g);
    writeln!(out, "independent fluxes: {} strong, {} weak, {} total", c.strong, c.weak, c.total)?;
    write!(out, "{}", validate(&g))?;

    let sector = view.sector.resolve(&g, &merged.base).with_context(|| name.clone())?;
    let mode = if sector.flips_u.is_empty() { Mode::Number } else { Mode::Parity };
    writeln!(
        out,
        "sector: |U| = {}, |V| = {}, twist {}, auto mode picks {:?}",
        sector.flips_u.len(),
        sector.flips_v.len(),
        sector.inert_twist,
        mode
    )?;
    if mode == Mode::Number {
        let offset = sector.flips_v.len() + usize::from(sector.inert_twist);
        let first = offset % 2;
        writeln!(out, "admissible n: {first}, {}, ... up to {} (same parity as |V| + twist)", first + 2, g.n() - (g.n() + offset) % 2)?;
    }
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(())
}
