//! Sector files: `key = value` lines, `//` comments.
//!
//! ```text
//! flux = zero            // trivial | zero | pi | +pi/2 | -pi/2 | random
//! seed = 7               // required for flux = random
//! p 3 = -1               // per-plaquette override
//! l 0 = +i               // per-loop override
//! U = [4, 17]            // intralayer flips (edge ids)
//! V = [0]                // interlayer flips (vertex ids)
//! star = [5]             // intralayer flips on every edge at these vertices
//! twist = false
//! ```

use super::{random_sector, Flux, FluxPreset, SectorSpec};
use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use std::collections::BTreeSet;
use std::fmt::Write as _;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_list(v: &str, line: usize) -> Result<Vec<usize>> {
    let inner = v
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| perr(line, "expected a list like [1, 2, 3]"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| perr(line, format!("bad index '{s}'"))))
        .collect()
}

pub fn parse_sector(text: &str, g: &ColoredGraph) -> Result<SectorSpec> {
    let mut preset: Option<(usize, String)> = None;
    let mut seed = None;
    let mut overrides: Vec<(usize, bool, usize, Flux)> = Vec::new();
    let mut flips_u = BTreeSet::new();
    let mut flips_v = BTreeSet::new();
    let mut stars: Vec<(usize, usize)> = Vec::new();
    let mut twist = false;

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| perr(ln, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        let toks: Vec<&str> = key.split_whitespace().collect();
        match toks.as_slice() {
            ["flux"] => preset = Some((ln, value.to_string())),
            ["seed"] => seed = Some(value.parse::<u64>().map_err(|_| perr(ln, "seed must be an unsigned integer"))?),
            ["twist"] => {
                twist = value.parse::<bool>().map_err(|_| perr(ln, "twist must be true or false"))?
            }
            ["U"] => flips_u.extend(parse_list(value, ln)?),
            ["V"] => flips_v.extend(parse_list(value, ln)?),
            ["star"] => stars.extend(parse_list(value, ln)?.into_iter().map(|v| (ln, v))),
            [kind @ ("p" | "l"), idx] => {
                let idx: usize = idx.parse().map_err(|_| perr(ln, format!("bad index '{idx}'")))?;
                let w: Flux = value.parse().map_err(|e: Error| perr(ln, e.to_string()))?;
                overrides.push((ln, *kind == "l", idx, w));
            }
            _ => return Err(perr(ln, format!("unknown key '{key}'"))),
        }
    }

    let mut spec = match preset {
        Some((ln, name)) if name == "random" => {
            let s = seed.ok_or_else(|| perr(ln, "flux = random needs a seed"))?;
            random_sector(g, s, [], [])
        }
        Some((ln, name)) => {
            let p: FluxPreset = name.parse().map_err(|e: Error| perr(ln, e.to_string()))?;
            SectorSpec::preset(g, p).map_err(|e| perr(ln, e.to_string()))?
        }
        None => SectorSpec::trivial(g),
    };
    spec.seed = seed.or(spec.seed);
    for (ln, is_loop, idx, w) in overrides {
        let target = if is_loop { &mut spec.loop_flux } else { &mut spec.plaquette_flux };
        let len = target.len();
        *target.get_mut(idx).ok_or_else(|| perr(ln, format!("index {idx} out of range ({len})")))? = w;
    }
    spec.flips_u = flips_u;
    spec.flips_v = flips_v;
    spec.inert_twist = twist;
    for (ln, v) in stars {
        if v >= g.n() {
            return Err(perr(ln, format!("star vertex {v} out of range")));
        }
        spec = spec.with_star_flip(g, v);
    }
    spec.validate(g)?;
    Ok(spec)
}

/// Writes a sector with explicit per-cycle values so it reloads exactly.
pub fn write_sector(spec: &SectorSpec) -> String {
    let mut out = String::new();
    if let Some(s) = spec.seed {
        let _ = writeln!(out, "seed = {s}");
    }
    for (k, w) in spec.plaquette_flux.iter().enumerate() {
        let _ = writeln!(out, "p {k} = {w}");
    }
    for (k, w) in spec.loop_flux.iter().enumerate() {
        let _ = writeln!(out, "l {k} = {w}");
    }
    let list = |s: &BTreeSet<usize>| s.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
    let _ = writeln!(out, "U = [{}]", list(&spec.flips_u));
    let _ = writeln!(out, "V = [{}]", list(&spec.flips_v));
    let _ = writeln!(out, "twist = {}", spec.inert_twist);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, LatticeKind};

    #[test]
    fn presets_and_overrides() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 4, true).unwrap();
        let s = parse_sector("flux = pi\np 0 = +1\np 1 = +1\nU = [2]\nV=[0, 5]\n", &g).unwrap();
        assert_eq!(s.plaquette_flux[0], Flux::ONE);
        assert_eq!(s.plaquette_flux[2], Flux::MINUS_ONE);
        assert_eq!(s.flips_v.len(), 2);
        let again = parse_sector(&write_sector(&s), &g).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn random_needs_seed() {
        let g = build_lattice(LatticeKind::Square, 2, 2, true).unwrap();
        assert!(matches!(parse_sector("flux = random\n", &g), Err(Error::Parse { line: 1, .. })));
        let a = parse_sector("flux = random\nseed = 3\n", &g).unwrap();
        let b = parse_sector("seed = 3\nflux = random\n", &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors_have_lines() {
        let g = build_lattice(LatticeKind::Square, 2, 2, true).unwrap();
        for (text, line) in [("flux = zero\np 9 = -1\n", 2), ("\n\nbogus = 1\n", 3), ("p 0 = +i\n", 1)] {
            match parse_sector(text, &g) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                Err(Error::Sector(_)) if line == 1 => {}
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
