//! Plain-text graph files.
//!
//! ```text
//! // comment
//! N E
//! i j color J            (E lines, 0-based vertices)
//! #plaquettes
//! v0 v1 v2 ...           (closed vertex cycle, counterclockwise)
//! e 3+ 7- 2+             (or explicit edge steps: id and direction)
//! #loops
//! ...                    (same syntax as plaquettes)
//! #dualloops
//! e0 e1 ...              (crossed edge ids)
//! #surface
//! g B                    (genus, boundary count; default 0 1 = disk)
//! ```

use super::{ColoredGraph, Cycle, Edge, Step, Surface};
use crate::error::{Error, Result};
use std::collections::HashSet;
use std::fmt::Write as _;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| perr(line, format!("bad {what} '{tok}'")))
}

#[derive(PartialEq)]
enum Section {
    Edges,
    Plaquettes,
    Loops,
    Dual,
    Surface,
}

pub fn parse_graph(text: &str) -> Result<ColoredGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split("//").next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty graph file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(perr(hl, "header must be 'N E'"));
    }
    let n: usize = num(head[0], hl, "vertex count")?;
    let e_count: usize = num(head[1], hl, "edge count")?;

    let mut edges = Vec::with_capacity(e_count);
    let mut seen = HashSet::new();
    let mut section = Section::Edges;
    let mut raw_cycles: Vec<(usize, bool, Vec<String>)> = Vec::new();
    let mut dual = Vec::new();
    let mut surface = None;
    let mut last_line = hl;

    for (ln, line) in lines {
        last_line = ln;
        if let Some(name) = line.strip_prefix('#') {
            section = match name.trim() {
                "plaquettes" => Section::Plaquettes,
                "loops" => Section::Loops,
                "dualloops" => Section::Dual,
                "surface" => Section::Surface,
                other => return Err(perr(ln, format!("unknown section '#{other}'"))),
            };
            if edges.len() != e_count {
                return Err(perr(ln, format!("expected {e_count} edges before sections, found {}", edges.len())));
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Edges => {
                if toks.len() != 4 {
                    return Err(perr(ln, "edge line must be 'i j color J'"));
                }
                let i: usize = num(toks[0], ln, "vertex")?;
                let j: usize = num(toks[1], ln, "vertex")?;
                let color: u32 = num(toks[2], ln, "color")?;
                let coupling: f64 = num(toks[3], ln, "coupling")?;
                if i >= n || j >= n {
                    return Err(perr(ln, format!("vertex out of range (N = {n})")));
                }
                if i == j {
                    return Err(perr(ln, "self-loop"));
                }
                if color == 0 {
                    return Err(perr(ln, "colors start at 1"));
                }
                if !coupling.is_finite() {
                    return Err(perr(ln, "coupling must be finite"));
                }
                // Parallel edges are fine (small tori); a repeated color is not.
                if !seen.insert((i.min(j), i.max(j), color)) {
                    return Err(perr(ln, format!("duplicate edge {i}-{j} with color {color}")));
                }
                if edges.len() == e_count {
                    return Err(perr(ln, format!("more than {e_count} edges")));
                }
                edges.push(Edge { i, j, color, coupling });
            }
            Section::Plaquettes | Section::Loops => {
                let is_loop = section == Section::Loops;
                raw_cycles.push((ln, is_loop, toks.iter().map(|t| t.to_string()).collect()));
            }
            Section::Dual => {
                let mut ids = Vec::with_capacity(toks.len());
                for t in toks {
                    let e: usize = num(t, ln, "edge id")?;
                    if e >= e_count {
                        return Err(perr(ln, format!("edge id {e} out of range (E = {e_count})")));
                    }
                    ids.push(e);
                }
                dual.push(ids);
            }
            Section::Surface => {
                if surface.is_some() || toks.len() != 2 {
                    return Err(perr(ln, "surface section takes one line 'genus boundaries'"));
                }
                surface = Some(Surface {
                    genus: num(toks[0], ln, "genus")?,
                    boundaries: num(toks[1], ln, "boundary count")?,
                });
            }
        }
    }
    if edges.len() != e_count {
        return Err(perr(last_line, format!("expected {e_count} edges, found {}", edges.len())));
    }

    let g = ColoredGraph::new(n, edges)?;
    let mut plaquettes = Vec::new();
    let mut loops = Vec::new();
    for (ln, is_loop, toks) in raw_cycles {
        let cycle = parse_cycle(&g, &toks, ln)?;
        if is_loop {
            loops.push(cycle);
        } else {
            plaquettes.push(cycle);
        }
    }
    g.with_embedding(plaquettes, loops, dual, surface.unwrap_or(Surface::DISK))
}

fn parse_cycle(g: &ColoredGraph, toks: &[String], ln: usize) -> Result<Cycle> {
    let wrap = |e: Error| perr(ln, e.to_string());
    if toks.first().map(String::as_str) == Some("e") {
        let mut steps = Vec::new();
        for t in &toks[1..] {
            let (id, dir) = t.split_at(t.len().saturating_sub(1));
            let forward = match dir {
                "+" => true,
                "-" => false,
                _ => return Err(perr(ln, format!("edge step '{t}' needs a +/- suffix"))),
            };
            let e: usize = num(id, ln, "edge id")?;
            if e >= g.num_edges() {
                return Err(perr(ln, format!("edge id {e} out of range")));
            }
            steps.push(Step::new(e, forward));
        }
        Cycle::new(g, steps).map_err(wrap)
    } else {
        let verts = toks.iter().map(|t| num::<usize>(t, ln, "vertex")).collect::<Result<Vec<_>>>()?;
        Cycle::from_vertices(g, &verts).map_err(wrap)
    }
}

/// Serializes a graph. Cycles are written as explicit edge steps so that
/// parallel edges survive; the parser still rejects such multigraphs.
pub fn write_graph(g: &ColoredGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n(), g.num_edges());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {} {}", e.i, e.j, e.color, e.coupling);
    }
    let cycle_line = |c: &Cycle| {
        let mut s = String::from("e");
        for st in c.steps() {
            let _ = write!(s, " {}{}", st.edge, if st.forward { '+' } else { '-' });
        }
        s
    };
    if !g.plaquettes().is_empty() {
        out.push_str("#plaquettes\n");
        for p in g.plaquettes() {
            let _ = writeln!(out, "{}", cycle_line(p));
        }
    }
    if !g.loops().is_empty() {
        out.push_str("#loops\n");
        for l in g.loops() {
            let _ = writeln!(out, "{}", cycle_line(l));
        }
    }
    if !g.dual_loops().is_empty() {
        out.push_str("#dualloops\n");
        for d in g.dual_loops() {
            let ids: Vec<String> = d.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", ids.join(" "));
        }
    }
    let s = g.surface();
    let _ = writeln!(out, "#surface\n{} {}", s.genus, s.boundaries);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, validate, LatticeKind};

    const TRIANGLE: &str = "3 3\n0 1 1 1.0\n1 2 2 1.0\n0 2 3 0.5\n#plaquettes\n0 1 2\n";

    #[test]
    fn triangle_round_trip() {
        let g = parse_graph(TRIANGLE).unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.edge(2).coupling, 0.5);
        assert!(validate(&g).is_ok());
        let again = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(again.edges(), g.edges());
        assert_eq!(again.plaquettes(), g.plaquettes());
    }

    #[test]
    fn lattice_round_trip() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, true).unwrap();
        let h = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(h.plaquettes(), g.plaquettes());
        assert_eq!(h.loops(), g.loops());
        assert_eq!(h.dual_loops(), g.dual_loops());
        assert!(validate(&h).is_ok());
    }

    fn line_of(text: &str) -> usize {
        match parse_graph(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("3 2\n0 1 1 1\n1 0 1 2\n"), 3);
        assert!(parse_graph("2 2\n0 1 1 1\n1 0 2 1\n").is_ok(), "parallel edges with distinct colors");
        assert_eq!(line_of("3 2\n0 1 1 1\n1 5 2 1\n"), 3);
        assert_eq!(line_of("3 2\n0 1 1 1\n\n1 2 x 1\n"), 4);
        assert_eq!(line_of("3 3\n0 1 1 1\n1 2 2 1\n0 2 3 1\n#plaquettes\n0 1 5\n"), 6);
        assert_eq!(line_of("2 1\n0 1 1 1\n#faces\n"), 3);
        assert_eq!(line_of("3 3\n0 1 1 1\n1 2 2 1\n#plaquettes\n"), 4);
    }
}
