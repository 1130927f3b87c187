//! Gap sweeps over a dissipation grid, configured by a TOML file with
//! `[graph]`, `[sector]`, `[sweep]` and `[output]` tables.
//!
//! ```toml
//! [graph]
//! lattice = "honeycomb"   # or file = "graph.txt"
//! nx = 16
//! ny = 16
//!
//! [sector]
//! flux = "zero"
//! V = [0]
//!
//! [sweep]
//! gamma_min = 1e-3
//! gamma_max = 1e3
//! points = 60
//! mode = "auto"
//! n = [1]
//!
//! [output]
//! csv = "gap.csv"
//! ```

use crate::error::{Error, Result};
use crate::gauge::{parse_sector, realize_fluxes, GaugeConfig, SectorSpec};
use crate::graph::{build_lattice, parse_graph, ColoredGraph, LatticeKind};
use crate::number::solve_number;
use crate::parity::{solve_parity, SolveOptions};
use crate::quadratic::{Mode, SingleParticleProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use toml::Spanned;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "GAMMALIND_THREADS";

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub graph: GraphSection,
    #[serde(default)]
    pub sector: SectorSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub lattice: Option<Spanned<String>>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    #[serde(default = "yes")]
    pub periodic: bool,
    pub file: Option<PathBuf>,
    /// Uniform coupling replacing the per-edge values.
    pub coupling: Option<f64>,
    /// Independent uniform couplings per edge.
    pub coupling_range: Option<[f64; 2]>,
    #[serde(default)]
    pub coupling_seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSection {
    pub file: Option<PathBuf>,
    pub flux: Option<String>,
    pub seed: Option<u64>,
    #[serde(rename = "U", default)]
    pub flips_u: Vec<usize>,
    #[serde(rename = "V", default)]
    pub flips_v: Vec<usize>,
    #[serde(default)]
    pub star: Vec<usize>,
    #[serde(default)]
    pub twist: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    #[default]
    Auto,
    Parity,
    Number,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub gamma_min: Spanned<f64>,
    pub gamma_max: Spanned<f64>,
    pub points: Spanned<usize>,
    #[serde(default)]
    pub scale: GridScale,
    pub mode: Option<Spanned<ModeChoice>>,
    pub n: Option<Spanned<Vec<usize>>>,
    pub n_max: Option<usize>,
    /// Site rates are `γ·X_j` with `X_j` uniform in `[1 − spread, 1 + spread]`.
    #[serde(default)]
    pub gamma_spread: f64,
    #[serde(default)]
    pub disorder_seed: u64,
    #[serde(default = "yes")]
    pub conditioning: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    /// Fill `wall_time_ms`. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub timings: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { csv: None, plot: None, timings: false }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn at<T>(text: &str, item: &Spanned<T>, msg: impl Into<String>) -> Error {
    Error::Parse { line: line_of(text, item.span().start), msg: msg.into() }
}

impl SweepConfig {
    /// Parses and checks everything that does not need the graph.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            msg: e.message().to_string(),
        })?;
        let s = &cfg.sweep;
        if *s.points.get_ref() == 0 {
            return Err(at(text, &s.points, "the gamma grid is empty (points = 0)"));
        }
        for v in [&s.gamma_min, &s.gamma_max] {
            if !v.get_ref().is_finite() || *v.get_ref() < 0.0 {
                return Err(at(text, v, "gamma must be finite and non-negative"));
            }
        }
        if s.scale == GridScale::Log && *s.gamma_min.get_ref() <= 0.0 {
            return Err(at(text, &s.gamma_min, "gamma_min must be positive on a log grid"));
        }
        if s.gamma_max.get_ref() < s.gamma_min.get_ref() {
            return Err(at(text, &s.gamma_max, "gamma_max is below gamma_min"));
        }
        if !(0.0..=1.0).contains(&s.gamma_spread) {
            return Err(Error::Config("gamma_spread must lie in [0, 1]".into()));
        }
        match (&cfg.graph.lattice, &cfg.graph.file) {
            (Some(l), Some(_)) => return Err(at(text, l, "give either lattice or file, not both")),
            (None, None) => return Err(Error::Config("[graph] needs lattice or file".into())),
            (Some(l), None) => {
                l.get_ref().parse::<LatticeKind>().map_err(|e| at(text, l, e.to_string()))?;
                if cfg.graph.nx.is_none() || cfg.graph.ny.is_none() {
                    return Err(at(text, l, "a lattice needs nx and ny"));
                }
            }
            _ => {}
        }
        if let Some(m) = &s.mode {
            if *m.get_ref() == ModeChoice::Number && !cfg.sector.flips_u.is_empty() {
                return Err(at(text, m, "mode = number needs an empty U set"));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::from_toml(&text)?, text))
    }

    /// Builds the graph, sector and grid. Relative paths are taken from
    /// `base`; `text` is the config source, for line numbers.
    pub fn plan(&self, text: &str, base: &Path) -> Result<SweepPlan> {
        let graph = self.graph.build(base)?;
        let sector = self.sector.resolve(&graph, base)?;
        let gauge = realize_fluxes(&graph, &sector)?;

        let s = &self.sweep;
        let choice = s.mode.as_ref().map_or(ModeChoice::Auto, |m| *m.get_ref());
        let mode = match choice {
            ModeChoice::Auto if sector.flips_u.is_empty() => Mode::Number,
            ModeChoice::Auto | ModeChoice::Parity => Mode::Parity,
            ModeChoice::Number if !sector.flips_u.is_empty() => {
                let m = s.mode.as_ref().expect("explicit mode");
                return Err(at(text, m, "mode = number needs an empty U set (a star flip lands in U)"));
            }
            ModeChoice::Number => Mode::Number,
        };

        let n_sites = graph.n();
        let offset = sector.flips_v.len() + usize::from(sector.inert_twist);
        let admissible = |n: usize| n <= n_sites && (n + offset) % 2 == 0;
        let n_list = match (&s.n, mode) {
            (Some(list), Mode::Number) => {
                if let Some(&bad) = list.get_ref().iter().find(|&&n| !admissible(n)) {
                    return Err(at(text, list, format!("n = {bad} is not admissible for this sector")));
                }
                list.get_ref().clone()
            }
            (None, Mode::Number) => {
                let n_max = s.n_max.unwrap_or(n_sites.min(sector.flips_v.len() + 4)).min(n_sites);
                (0..=n_max).filter(|&n| admissible(n)).collect()
            }
            (_, Mode::Parity) => Vec::new(),
        };

        let mut rng = ChaCha8Rng::seed_from_u64(s.disorder_seed);
        let profile: Vec<f64> = (0..n_sites)
            .map(|_| if s.gamma_spread > 0.0 { 1.0 + rng.gen_range(-s.gamma_spread..=s.gamma_spread) } else { 1.0 })
            .collect();

        Ok(SweepPlan {
            graph,
            sector,
            gauge,
            grid: gamma_grid(*s.gamma_min.get_ref(), *s.gamma_max.get_ref(), *s.points.get_ref(), s.scale),
            profile,
            mode,
            n_list,
            options: SolveOptions { conditioning: s.conditioning, ..SolveOptions::default() },
            timings: self.output.timings,
        })
    }
}

impl GraphSection {
    /// Builds the lattice or reads the graph file (relative to `base`), then
    /// applies any coupling overrides.
    pub fn build(&self, base: &Path) -> Result<ColoredGraph> {
        let mut graph = match (&self.lattice, &self.file) {
            (Some(l), _) => {
                let kind: LatticeKind = l.get_ref().parse()?;
                build_lattice(kind, self.nx.unwrap_or(0), self.ny.unwrap_or(0), self.periodic)?
            }
            (None, Some(f)) => read_with(&base.join(f), parse_graph)?,
            (None, None) => return Err(Error::Config("[graph] needs lattice or file".into())),
        };
        if let Some(j) = self.coupling {
            let js = vec![j; graph.num_edges()];
            graph = graph.with_couplings(&js)?;
        }
        if let Some([lo, hi]) = self.coupling_range {
            let mut rng = ChaCha8Rng::seed_from_u64(self.coupling_seed);
            let js: Vec<f64> = (0..graph.num_edges()).map(|_| rng.gen_range(lo..=hi)).collect();
            graph = graph.with_couplings(&js)?;
        }
        Ok(graph)
    }
}

impl SectorSection {
    /// Turns the file or inline keys into a validated sector.
    pub fn resolve(&self, g: &ColoredGraph, base: &Path) -> Result<SectorSpec> {
        if let Some(f) = &self.file {
            let inline = self.flux.is_some()
                || self.seed.is_some()
                || !self.flips_u.is_empty()
                || !self.flips_v.is_empty()
                || !self.star.is_empty()
                || self.twist;
            if inline {
                return Err(Error::Config("[sector] takes either a file or inline keys".into()));
            }
            return read_with(&base.join(f), |text| parse_sector(text, g));
        }
        // Inline keys share the sector-file grammar.
        let mut text = String::new();
        if let Some(f) = &self.flux {
            let _ = writeln!(text, "flux = {f}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(text, "seed = {s}");
        }
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(text, "U = [{}]", list(&self.flips_u));
        let _ = writeln!(text, "V = [{}]", list(&self.flips_v));
        let _ = writeln!(text, "star = [{}]", list(&self.star));
        let _ = writeln!(text, "twist = {}", self.twist);
        parse_sector(&text, g).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Config(format!("[sector]: {msg}")),
            other => Error::Config(format!("[sector]: {other}")),
        })
    }
}

/// Reads and parses a referenced file, naming it in any error.
fn read_with<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    let wrap = |e: Error| Error::InFile { path: path.to_path_buf(), inner: Box::new(e) };
    let text = std::fs::read_to_string(path).map_err(|e| wrap(e.into()))?;
    parse(&text).map_err(wrap)
}

pub fn gamma_grid(min: f64, max: f64, points: usize, scale: GridScale) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let step = |k: usize| k as f64 / (points - 1) as f64;
    let mut grid: Vec<f64> = match scale {
        GridScale::Log => (0..points).map(|k| min * (max / min).powf(step(k))).collect(),
        GridScale::Linear => (0..points).map(|k| min + step(k) * (max - min)).collect(),
    };
    grid[points - 1] = max;
    grid
}

/// A resolved sweep: everything a worker needs, shared read-only.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub graph: ColoredGraph,
    pub sector: SectorSpec,
    pub gauge: GaugeConfig,
    pub grid: Vec<f64>,
    /// Per-site multipliers of the grid value.
    pub profile: Vec<f64>,
    pub mode: Mode,
    pub n_list: Vec<usize>,
    pub options: SolveOptions,
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub n: Option<usize>,
    pub gap: f64,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
    pub vacuum_physical: Option<bool>,
    pub pf_sign: Option<i8>,
    pub exceptional_flag: bool,
    pub wall_time_ms: Option<f64>,
}

fn solve_point(plan: &SweepPlan, gamma: f64) -> Result<Vec<SweepRow>> {
    let clock = Instant::now();
    let rates: Vec<f64> = plan.profile.iter().map(|x| x * gamma).collect();
    let problem = SingleParticleProblem::new(&plan.graph, &plan.gauge, &rates)?;
    let mut rows = Vec::new();
    match plan.mode {
        Mode::Parity => {
            let sol = solve_parity(&problem, &plan.options)?;
            rows.push(SweepRow {
                gamma,
                n: None,
                gap: sol.gap,
                bound_lower: None,
                bound_upper: None,
                vacuum_physical: Some(sol.verdict.vacuum_physical),
                pf_sign: Some(sol.spectrum.pf_sign),
                exceptional_flag: sol.spectrum.diagnostics.exceptional,
                wall_time_ms: None,
            });
        }
        Mode::Number => {
            let spec = solve_number(&problem, &plan.options)?;
            for &n in &plan.n_list {
                let (lo, hi) = spec.bounds(n);
                rows.push(SweepRow {
                    gamma,
                    n: Some(n),
                    gap: spec.gap(n)?,
                    bound_lower: Some(lo),
                    bound_upper: Some(hi),
                    vacuum_physical: None,
                    pf_sign: None,
                    exceptional_flag: spec.diagnostics.exceptional,
                    wall_time_ms: None,
                });
            }
        }
    }
    if plan.timings {
        let ms = clock.elapsed().as_secs_f64() * 1e3;
        rows.iter_mut().for_each(|r| r.wall_time_ms = Some(ms));
    }
    Ok(rows)
}

fn worker_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Solves every grid point on a worker pool; rows come back ordered by
/// `(γ, n)` whatever the completion order.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    log::info!(
        "sweeping {} points on {} sites ({:?} mode, {} workers)",
        plan.grid.len(),
        plan.graph.n(),
        plan.mode,
        pool.current_num_threads()
    );
    let per_point: Vec<Vec<SweepRow>> = pool.install(|| {
        plan.grid
            .par_iter()
            .map(|&g| {
                solve_point(plan, g).map_err(|e| match e {
                    Error::Unpaired { .. } | Error::Linalg(_) => {
                        Error::Config(format!("at gamma = {g}: {e}"))
                    }
                    other => other,
                })
            })
            .collect::<Result<_>>()
    })?;
    Ok(per_point.into_iter().flatten().collect())
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[graph]
lattice = "honeycomb"
nx = 3
ny = 4

[sector]
flux = "zero"
V = [0]

[sweep]
gamma_min = 0.01
gamma_max = 10.0
points = 5
n = [1, 3]

[output]
timings = false
"#;

    #[test]
    fn parses_and_runs() {
        let cfg = SweepConfig::from_toml(BASE).unwrap();
        let plan = cfg.plan(BASE, Path::new(".")).unwrap();
        assert_eq!(plan.mode, Mode::Number);
        let rows = run_sweep(&plan).unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.windows(2).all(|w| (w[0].gamma, w[0].n) < (w[1].gamma, w[1].n)));
        for r in &rows {
            assert!(r.bound_lower.unwrap() - 1e-10 <= r.gap && r.gap <= r.bound_upper.unwrap() + 1e-10);
        }
        let csv = csv_string(&rows).unwrap();
        assert!(csv.starts_with("gamma,n,gap,bound_lower,bound_upper,vacuum_physical,pf_sign,exceptional_flag,wall_time_ms\n"));
        assert_eq!(csv, csv_string(&run_sweep(&plan).unwrap()).unwrap());
    }

    #[test]
    fn auto_mode_routes_intralayer_flips_to_parity() {
        let text = BASE.replace("V = [0]", "U = [0]").replace("n = [1, 3]\n", "");
        let cfg = SweepConfig::from_toml(&text).unwrap();
        let plan = cfg.plan(&text, Path::new(".")).unwrap();
        assert_eq!(plan.mode, Mode::Parity);
        let rows = run_sweep(&plan).unwrap();
        assert!(rows.iter().all(|r| r.n.is_none() && r.pf_sign.is_some()));
    }

    #[test]
    fn errors_carry_lines() {
        let empty = BASE.replace("points = 5", "points = 0");
        match SweepConfig::from_toml(&empty) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 14),
            other => panic!("{other:?}"),
        }
        let typo = BASE.replace("gamma_max", "gamma_mx");
        assert!(matches!(SweepConfig::from_toml(&typo), Err(Error::Parse { line: 13, .. })));
        let bad_n = BASE.replace("n = [1, 3]", "n = [2]");
        let cfg = SweepConfig::from_toml(&bad_n).unwrap();
        assert!(matches!(cfg.plan(&bad_n, Path::new(".")), Err(Error::Parse { line: 15, .. })));
        let neg = BASE.replace("gamma_min = 0.01", "gamma_min = 0.0");
        assert!(matches!(SweepConfig::from_toml(&neg), Err(Error::Parse { line: 12, .. })));
    }

    #[test]
    fn grids() {
        let g = gamma_grid(1e-3, 1e3, 7, GridScale::Log);
        assert!((g[3] - 1.0).abs() < 1e-12 && (g[6] - 1e3).abs() < 1e-9);
        assert_eq!(gamma_grid(0.0, 1.0, 3, GridScale::Linear), vec![0.0, 0.5, 1.0]);
    }
}
