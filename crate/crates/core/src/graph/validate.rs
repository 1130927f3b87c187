use super::ColoredGraph;
use std::collections::BTreeMap;

/// Report produced by [`validate`]; empty lists mean the check passed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// (vertex, color, edges sharing that color there)
    pub color_violations: Vec<(usize, u32, Vec<usize>)>,
    /// (expected N − E + F, found)
    pub euler_mismatch: Option<(i64, i64)>,
    pub plaquette_errors: Vec<String>,
    /// Edges bordering more than two plaquettes.
    pub overused_edges: Vec<usize>,
    /// Loop and dual-loop counts that disagree with the surface.
    pub loop_count_errors: Vec<String>,
    /// (loop a, dual loop b, crossings) with the wrong parity.
    pub intersection_failures: Vec<(usize, usize, usize)>,
    pub components: usize,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.color_violations.is_empty()
            && self.euler_mismatch.is_none()
            && self.plaquette_errors.is_empty()
            && self.overused_edges.is_empty()
            && self.loop_count_errors.is_empty()
            && self.intersection_failures.is_empty()
    }
}

impl std::fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            return writeln!(f, "graph ok ({} component(s))", self.components);
        }
        for (v, c, es) in &self.color_violations {
            writeln!(f, "color rule: vertex {v} has color {c} on edges {es:?}")?;
        }
        if let Some((want, got)) = self.euler_mismatch {
            writeln!(f, "euler: N - E + F = {got}, surface expects {want}")?;
        }
        for p in &self.plaquette_errors {
            writeln!(f, "plaquette: {p}")?;
        }
        if !self.overused_edges.is_empty() {
            writeln!(f, "edges bordering > 2 plaquettes: {:?}", self.overused_edges)?;
        }
        for l in &self.loop_count_errors {
            writeln!(f, "loops: {l}")?;
        }
        for (a, b, k) in &self.intersection_failures {
            writeln!(f, "loop {a} crosses dual loop {b} {k} time(s)")?;
        }
        Ok(())
    }
}

/// Checks the color rule, Euler characteristic, plaquette sanity and
/// loop/dual-loop intersection parity. Never fails; only reports.
pub fn validate(g: &ColoredGraph) -> Diagnostics {
    let mut d = Diagnostics { components: g.num_components(), ..Default::default() };

    for v in 0..g.n() {
        let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &e in g.incident(v) {
            by_color.entry(g.edge(e).color).or_default().push(e);
        }
        for (c, es) in by_color {
            if es.len() > 1 {
                d.color_violations.push((v, c, es));
            }
        }
    }

    let surface = g.surface();
    let chi = g.n() as i64 - g.num_edges() as i64 + g.plaquettes().len() as i64;
    let expected = surface.euler() * d.components as i64;
    if chi != expected {
        d.euler_mismatch = Some((expected, chi));
    }

    let mut border = vec![0usize; g.num_edges()];
    for (k, p) in g.plaquettes().iter().enumerate() {
        let verts = p.vertices(g);
        let mut sorted = verts.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != verts.len() {
            d.plaquette_errors.push(format!("plaquette {k} revisits a vertex"));
        }
        let mut es: Vec<usize> = p.steps().iter().map(|s| s.edge).collect();
        es.sort_unstable();
        let n = es.len();
        es.dedup();
        if es.len() != n {
            d.plaquette_errors.push(format!("plaquette {k} reuses an edge"));
        }
        for e in es {
            border[e] += 1;
        }
    }
    d.overused_edges = (0..g.num_edges()).filter(|&e| border[e] > 2).collect();

    let b1 = surface.betti1();
    if g.loops().len() != b1 {
        d.loop_count_errors.push(format!("{} loops for a surface with b1 = {b1}", g.loops().len()));
    }
    if g.dual_loops().len() != g.loops().len() {
        d.loop_count_errors.push(format!(
            "{} dual loops for {} loops",
            g.dual_loops().len(),
            g.loops().len()
        ));
    }
    for (a, l) in g.loops().iter().enumerate() {
        for (b, dual) in g.dual_loops().iter().enumerate() {
            let k: usize = dual.iter().map(|&e| l.uses_edge(e)).sum();
            if (k % 2 == 1) != (a == b) {
                d.intersection_failures.push((a, b, k));
            }
        }
    }
    d
}
