//! Gap-curve SVG plots from sweep CSVs: log-x, one line per (file, n), and a
//! shaded band between the analytic bounds when the CSV carries them.

use anyhow::{bail, Context, Result};
use plotters::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Band {
    /// Shade bounds wherever a curve has them.
    Auto,
    /// Require bound columns; error when they are missing.
    On,
    Off,
}

#[derive(Debug, Clone)]
pub struct Style {
    pub band: Band,
    pub log_y: bool,
    pub title: Option<String>,
    pub size: (u32, u32),
}

impl Default for Style {
    fn default() -> Self {
        Style { band: Band::Auto, log_y: false, title: None, size: (900, 600) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    /// `(γ, gap)`, sorted by γ.
    pub points: Vec<(f64, f64)>,
    /// `(γ, lower, upper)` when every row carries both bounds.
    pub band: Option<Vec<(f64, f64, f64)>>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn cell<T: std::str::FromStr>(rec: &csv::StringRecord, idx: Option<usize>, row: usize, name: &str) -> Result<Option<T>> {
    let Some(i) = idx else { return Ok(None) };
    let raw = rec.get(i).unwrap_or("").trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| anyhow::anyhow!("row {row}: bad {name} value '{raw}'"))
}

/// Splits a sweep CSV into one curve per fermion number.
pub fn parse_curves(label: &str, text: &str) -> Result<Vec<Curve>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let missing: Vec<&str> = ["gamma", "gap"].into_iter().filter(|c| column(&headers, c).is_none()).collect();
    if !missing.is_empty() {
        bail!("missing column(s): {}", missing.join(", "));
    }
    let (ig, igap) = (column(&headers, "gamma"), column(&headers, "gap"));
    let (in_, ilo, ihi) = (column(&headers, "n"), column(&headers, "bound_lower"), column(&headers, "bound_upper"));

    type Rows = Vec<(f64, f64, Option<f64>, Option<f64>)>;
    let mut groups: BTreeMap<Option<usize>, Rows> = BTreeMap::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        let gamma: f64 = cell(&rec, ig, row, "gamma")?.with_context(|| format!("row {row}: empty gamma"))?;
        let gap: f64 = cell(&rec, igap, row, "gap")?.with_context(|| format!("row {row}: empty gap"))?;
        let n: Option<usize> = cell(&rec, in_, row, "n")?;
        let lo: Option<f64> = cell(&rec, ilo, row, "bound_lower")?;
        let hi: Option<f64> = cell(&rec, ihi, row, "bound_upper")?;
        groups.entry(n).or_default().push((gamma, gap, lo, hi));
    }
    if groups.is_empty() {
        bail!("no data rows");
    }
    let several = groups.len() > 1;
    Ok(groups
        .into_iter()
        .map(|(n, mut rows)| {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let band = rows.iter().map(|&(g, _, lo, hi)| Some((g, lo?, hi?))).collect::<Option<Vec<_>>>();
            let label = match n {
                Some(n) if several || !label.is_empty() => format!("{label} n={n}").trim().to_string(),
                _ => label.to_string(),
            };
            Curve { label, points: rows.iter().map(|r| (r.0, r.1)).collect(), band }
        })
        .collect())
}

pub fn load_curves(path: &Path) -> Result<Vec<Curve>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_curves(&label, &text).with_context(|| path.display().to_string())
}

fn padded(lo: f64, hi: f64, log: bool) -> (f64, f64) {
    if log {
        if lo == hi {
            return (lo / 2.0, hi * 2.0);
        }
        let pad = (hi / lo).powf(0.03);
        (lo / pad, hi * pad)
    } else {
        if lo == hi {
            return (lo - 0.5, hi + 0.5);
        }
        let pad = 0.05 * (hi - lo);
        let floor = if lo >= 0.0 { (lo - pad).max(0.0) } else { lo - pad };
        (floor, hi + pad)
    }
}

/// Renders `curves` to an SVG at `out`.
pub fn render(curves: &[Curve], style: &Style, out: &Path) -> Result<()> {
    if curves.is_empty() {
        bail!("nothing to plot");
    }
    if style.band == Band::On && curves.iter().all(|c| c.band.is_none()) {
        bail!("missing column(s): bound_lower, bound_upper (needed for the bound band)");
    }
    let show_band = style.band != Band::Off;
    let keep = |y: f64| !style.log_y || y > 0.0;

    let xs = curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)).filter(|&x| x > 0.0);
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !xmin.is_finite() {
        bail!("log-x plot needs positive gamma values");
    }
    let mut ys: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().map(|p| p.1)).collect();
    if show_band {
        for c in curves {
            ys.extend(c.band.iter().flatten().flat_map(|b| [b.1, b.2]));
        }
    }
    let (ymin, ymax) = ys
        .into_iter()
        .filter(|y| y.is_finite() && keep(*y))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !ymin.is_finite() {
        bail!("no plottable gap values");
    }
    let (x0, x1) = padded(xmin, xmax, true);
    let (y0, y1) = padded(ymin, ymax, style.log_y);

    let root = SVGBackend::new(out, style.size).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let title = style.title.clone().unwrap_or_default();
    let mut builder = ChartBuilder::on(&root);
    builder.caption(title, ("sans-serif", 22)).margin(12).x_label_area_size(44).y_label_area_size(64);

    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart.configure_mesh().x_desc("gamma").y_desc("gap").draw().map_err(draw_err)?;
            if show_band {
                for band in curves.iter().filter_map(|c| c.band.as_ref()) {
                    let mut poly: Vec<(f64, f64)> =
                        band.iter().filter(|b| keep(b.1)).map(|b| (b.0, b.1)).collect();
                    poly.extend(band.iter().rev().filter(|b| keep(b.2)).map(|b| (b.0, b.2)));
                    chart
                        .draw_series(std::iter::once(Polygon::new(poly, BLACK.mix(0.15).filled())))
                        .map_err(draw_err)?;
                }
            }
            for (k, c) in curves.iter().enumerate() {
                let color = Palette99::pick(k).to_rgba();
                let pts: Vec<(f64, f64)> = c.points.iter().copied().filter(|p| p.0 > 0.0 && keep(p.1)).collect();
                let series = chart
                    .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                    .map_err(draw_err)?;
                if !c.label.is_empty() {
                    series.label(c.label.clone()).legend(move |(x, y)| {
                        PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2))
                    });
                }
            }
            if curves.iter().any(|c| !c.label.is_empty()) {
                chart
                    .configure_series_labels()
                    .background_style(WHITE.mix(0.85))
                    .border_style(BLACK)
                    .draw()
                    .map_err(draw_err)?;
            }
        }};
    }

    if style.log_y {
        draw!(builder.build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale()).map_err(draw_err)?);
    } else {
        draw!(builder.build_cartesian_2d((x0..x1).log_scale(), y0..y1).map_err(draw_err)?);
    }
    root.present().map_err(draw_err)?;
    Ok(())
}

fn draw_err<E: std::fmt::Debug>(e: E) -> anyhow::Error {
    anyhow::anyhow!("plot: {e:?}")
}
