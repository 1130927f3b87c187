//! Merging a TOML config file with command-line overrides.

use anyhow::{Context, Result};
use clap::Args;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

#[derive(Debug, Clone, Default, Args)]
pub struct GraphArgs {
    /// Built-in lattice: honeycomb, square or triangular.
    #[arg(long, conflicts_with = "graph")]
    pub lattice: Option<String>,
    /// Unit cells along the first axis.
    #[arg(long)]
    pub nx: Option<usize>,
    /// Unit cells along the second axis.
    #[arg(long)]
    pub ny: Option<usize>,
    /// Open boundaries instead of a torus.
    #[arg(long)]
    pub open: bool,
    /// Graph file in the plain-text edge format.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Uniform coupling J on every edge.
    #[arg(long, allow_negative_numbers = true)]
    pub coupling: Option<f64>,
    /// Independent uniform couplings per edge, as LO,HI.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "LO,HI", allow_hyphen_values = true)]
    pub coupling_range: Option<Vec<f64>>,
    /// Seed for --coupling-range.
    #[arg(long)]
    pub coupling_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SectorArgs {
    /// Sector file.
    #[arg(long)]
    pub sector: Option<PathBuf>,
    /// Flux preset: trivial, zero, pi, +pi/2, -pi/2 or random.
    #[arg(long, allow_hyphen_values = true)]
    pub flux: Option<String>,
    /// Seed for random fluxes.
    #[arg(long)]
    pub sector_seed: Option<u64>,
    /// Intralayer flipped edges (the U set), comma separated.
    #[arg(long = "flip-u", value_delimiter = ',')]
    pub flips_u: Option<Vec<usize>>,
    /// Interlayer flipped sites (the V set), comma separated.
    #[arg(long = "flip-v", value_delimiter = ',')]
    pub flips_v: Option<Vec<usize>>,
    /// Sites whose incident edges are all flipped.
    #[arg(long, value_delimiter = ',')]
    pub star: Option<Vec<usize>>,
    /// Toggle the inert-generator parity twist.
    #[arg(long)]
    pub twist: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Grid size.
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid spacing.
    #[arg(long, value_parser = ["log", "linear"])]
    pub scale: Option<String>,
    /// Solver; auto picks number mode when the U set is empty.
    #[arg(long, value_parser = ["auto", "parity", "number"])]
    pub mode: Option<String>,
    /// Fermion numbers for number mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Largest n when --n is not given.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Rates are γ·X_j with X_j uniform in [1 − spread, 1 + spread].
    #[arg(long)]
    pub gamma_spread: Option<f64>,
    /// Seed for --gamma-spread.
    #[arg(long)]
    pub disorder_seed: Option<u64>,
    /// Skip eigenvectors: faster, but no condition numbers.
    #[arg(long)]
    pub no_conditioning: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG plot path.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Fill the wall_time_ms column.
    #[arg(long)]
    pub timings: bool,
}

/// Config text after overrides, plus the directory relative paths hang off.
pub struct Merged {
    pub text: String,
    pub base: PathBuf,
    pub overridden: bool,
}

struct Overrides {
    table: Table,
    touched: bool,
}

impl Overrides {
    fn set(&mut self, section: &str, key: &str, value: impl Into<Value>) {
        let sec = self
            .table
            .entry(section)
            .or_insert_with(|| Value::Table(Table::new()));
        if let Value::Table(t) = sec {
            t.insert(key.to_string(), value.into());
        }
        self.touched = true;
    }

    fn remove(&mut self, section: &str, key: &str) {
        if let Some(Value::Table(t)) = self.table.get_mut(section) {
            t.remove(key);
        }
    }

    fn set_opt<T: Into<Value>>(&mut self, section: &str, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(section, key, v);
        }
    }

    fn set_list(&mut self, section: &str, key: &str, value: &Option<Vec<usize>>) {
        if let Some(list) = value {
            let items: Vec<Value> = list.iter().map(|&x| Value::Integer(x as i64)).collect();
            self.set(section, key, Value::Array(items));
        }
    }

    fn set_path(&mut self, section: &str, key: &str, path: &Option<PathBuf>) -> Result<()> {
        if let Some(p) = path {
            let abs = absolute(p)?;
            self.set(section, key, abs.to_string_lossy().into_owned());
        }
        Ok(())
    }
}

fn absolute(p: &Path) -> Result<PathBuf> {
    if p.is_absolute() {
        return Ok(p.to_path_buf());
    }
    Ok(std::env::current_dir()?.join(p))
}

fn int(x: u64) -> Value {
    Value::Integer(x as i64)
}

impl GraphArgs {
    fn apply(&self, o: &mut Overrides) -> Result<()> {
        if let Some(l) = &self.lattice {
            o.remove("graph", "file");
            o.set("graph", "lattice", l.as_str());
        }
        if self.graph.is_some() {
            o.remove("graph", "lattice");
            o.set_path("graph", "file", &self.graph)?;
        }
        o.set_opt("graph", "nx", self.nx.map(|x| int(x as u64)));
        o.set_opt("graph", "ny", self.ny.map(|x| int(x as u64)));
        if self.open {
            o.set("graph", "periodic", false);
        }
        o.set_opt("graph", "coupling", self.coupling);
        if let Some(r) = &self.coupling_range {
            anyhow::ensure!(r.len() == 2, "--coupling-range takes two values, LO,HI");
            o.set("graph", "coupling_range", Value::Array(r.iter().map(|&x| Value::Float(x)).collect()));
        }
        o.set_opt("graph", "coupling_seed", self.coupling_seed.map(int));
        Ok(())
    }
}

impl SectorArgs {
    fn apply(&self, o: &mut Overrides) -> Result<()> {
        let inline = self.flux.is_some()
            || self.sector_seed.is_some()
            || self.flips_u.is_some()
            || self.flips_v.is_some()
            || self.star.is_some()
            || self.twist;
        if self.sector.is_some() {
            o.table.remove("sector");
            o.set_path("sector", "file", &self.sector)?;
        } else if inline {
            o.remove("sector", "file");
        }
        o.set_opt("sector", "flux", self.flux.as_deref());
        o.set_opt("sector", "seed", self.sector_seed.map(int));
        o.set_list("sector", "U", &self.flips_u);
        o.set_list("sector", "V", &self.flips_v);
        o.set_list("sector", "star", &self.star);
        if self.twist {
            o.set("sector", "twist", true);
        }
        Ok(())
    }
}

impl GridArgs {
    fn apply(&self, o: &mut Overrides) {
        o.set_opt("sweep", "gamma_min", self.gamma_min);
        o.set_opt("sweep", "gamma_max", self.gamma_max);
        o.set_opt("sweep", "points", self.points.map(|x| int(x as u64)));
        o.set_opt("sweep", "scale", self.scale.as_deref());
        o.set_opt("sweep", "mode", self.mode.as_deref());
        o.set_list("sweep", "n", &self.n);
        o.set_opt("sweep", "n_max", self.n_max.map(|x| int(x as u64)));
        o.set_opt("sweep", "gamma_spread", self.gamma_spread);
        o.set_opt("sweep", "disorder_seed", self.disorder_seed.map(int));
        if self.no_conditioning {
            o.set("sweep", "conditioning", false);
        }
    }
}

impl OutputArgs {
    fn apply(&self, o: &mut Overrides) -> Result<()> {
        o.set_path("output", "csv", &self.csv)?;
        o.set_path("output", "plot", &self.plot)?;
        if self.timings {
            o.set("output", "timings", true);
        }
        Ok(())
    }
}

/// Reads `config` (if any) and layers the flags on top. Without overrides the
/// original text is kept so error lines match the file.
pub fn merge(
    config: Option<&Path>,
    graph: &GraphArgs,
    sector: &SectorArgs,
    grid: Option<&GridArgs>,
    output: Option<&OutputArgs>,
) -> Result<Merged> {
    let (text, base) = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (text, base)
        }
        None => (String::new(), std::env::current_dir()?),
    };
    let table: Table = match config {
        Some(p) => toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            anyhow::anyhow!("{}: line {line}: {}", p.display(), e.message())
        })?,
        None => Table::new(),
    };
    let mut o = Overrides { table, touched: false };
    graph.apply(&mut o)?;
    sector.apply(&mut o)?;
    if let Some(g) = grid {
        g.apply(&mut o);
    }
    if let Some(out) = output {
        out.apply(&mut o)?;
    }
    if !o.touched {
        return Ok(Merged { text, base, overridden: false });
    }
    Ok(Merged { text: toml::to_string(&o.table)?, base, overridden: true })
}
