//! Properly edge-colored graphs with a surface embedding.
//!
//! Edges are stored with a canonical direction `i < j`; every signed quantity
//! attached to an edge (gauge field, traversal sign) is relative to it.

mod coloring;
mod io;
mod lattice;
mod validate;

pub use coloring::color_edges;
pub use io::{parse_graph, write_graph};
pub use lattice::{build_lattice, ring, LatticeGeometry, LatticeKind};
pub use validate::{validate, Diagnostics};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub color: u32,
    pub coupling: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.i {
            self.j
        } else {
            self.i
        }
    }

    pub fn touches(&self, v: usize) -> bool {
        self.i == v || self.j == v
    }
}

/// One traversed edge of a walk. `forward` means canonical direction (i → j).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl Step {
    pub fn new(edge: usize, forward: bool) -> Self {
        Step { edge, forward }
    }

    pub fn tail(&self, g: &ColoredGraph) -> usize {
        let e = &g.edges[self.edge];
        if self.forward {
            e.i
        } else {
            e.j
        }
    }

    pub fn head(&self, g: &ColoredGraph) -> usize {
        let e = &g.edges[self.edge];
        if self.forward {
            e.j
        } else {
            e.i
        }
    }

    pub fn reversed(self) -> Self {
        Step { edge: self.edge, forward: !self.forward }
    }
}

/// Checks that consecutive steps join up and the walk returns to its start.
pub fn check_closed(g: &ColoredGraph, steps: &[Step]) -> Result<()> {
    if steps.is_empty() {
        return Err(Error::Graph("empty cycle".into()));
    }
    for s in steps {
        if s.edge >= g.edges.len() {
            return Err(Error::Graph(format!("cycle uses unknown edge {}", s.edge)));
        }
    }
    for w in steps.windows(2) {
        let (a, b) = (w[0].head(g), w[1].tail(g));
        if a != b {
            return Err(Error::Graph(format!(
                "cycle breaks between edges {} and {} ({a} vs {b})",
                w[0].edge, w[1].edge
            )));
        }
    }
    let start = steps[0].tail(g);
    let end = steps[steps.len() - 1].head(g);
    if start != end {
        return Err(Error::OpenPath { start, end });
    }
    Ok(())
}

/// A closed oriented walk on the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    steps: Vec<Step>,
}

impl Cycle {
    pub fn new(g: &ColoredGraph, steps: Vec<Step>) -> Result<Self> {
        check_closed(g, &steps)?;
        Ok(Cycle { steps })
    }

    /// Resolves a closed vertex sequence `v0 v1 … v_{k-1}` (the return to `v0`
    /// is implied). Fails if a hop has no edge or is ambiguous (parallel edges).
    pub fn from_vertices(g: &ColoredGraph, verts: &[usize]) -> Result<Self> {
        if verts.len() < 2 {
            return Err(Error::Graph("cycle needs at least two vertices".into()));
        }
        let mut steps = Vec::with_capacity(verts.len());
        for k in 0..verts.len() {
            let (a, b) = (verts[k], verts[(k + 1) % verts.len()]);
            if a >= g.n || b >= g.n {
                return Err(Error::Graph(format!("cycle vertex out of range: {a}-{b}")));
            }
            let found: Vec<usize> =
                g.incidence[a].iter().copied().filter(|&e| g.edges[e].touches(b) && a != b).collect();
            match found.as_slice() {
                [e] => steps.push(Step::new(*e, g.edges[*e].i == a)),
                [] => return Err(Error::Graph(format!("no edge between {a} and {b}"))),
                _ => return Err(Error::Graph(format!("parallel edges between {a} and {b}; give edge steps"))),
            }
        }
        Cycle::new(g, steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn vertices(&self, g: &ColoredGraph) -> Vec<usize> {
        self.steps.iter().map(|s| s.tail(g)).collect()
    }

    pub fn reversed(&self) -> Self {
        Cycle { steps: self.steps.iter().rev().map(|s| s.reversed()).collect() }
    }

    pub fn uses_edge(&self, e: usize) -> usize {
        self.steps.iter().filter(|s| s.edge == e).count()
    }
}

/// Orientable surface with `genus` handles and `boundaries` boundary circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Surface {
    pub genus: u32,
    pub boundaries: u32,
}

impl Surface {
    pub const DISK: Surface = Surface { genus: 0, boundaries: 1 };
    pub const TORUS: Surface = Surface { genus: 1, boundaries: 0 };

    pub fn euler(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundaries as i64
    }

    pub fn is_closed(&self) -> bool {
        self.boundaries == 0
    }

    /// First Betti number: number of independent noncontractible loops.
    pub fn betti1(&self) -> usize {
        if self.is_closed() {
            2 * self.genus as usize
        } else {
            (2 * self.genus + self.boundaries - 1) as usize
        }
    }

    pub fn betti2(&self) -> usize {
        usize::from(self.is_closed())
    }
}

#[derive(Debug, Clone)]
pub struct ColoredGraph {
    n: usize,
    edges: Vec<Edge>,
    incidence: Vec<Vec<usize>>,
    plaquettes: Vec<Cycle>,
    loops: Vec<Cycle>,
    dual_loops: Vec<Vec<usize>>,
    surface: Surface,
    geometry: Option<LatticeGeometry>,
}

impl ColoredGraph {
    /// Builds a graph from explicitly colored edges. Endpoints are put in
    /// canonical order; parallel edges are allowed (small tori need them).
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for (k, mut e) in edges.into_iter().enumerate() {
            if e.i >= n || e.j >= n {
                return Err(Error::Graph(format!("edge {k} ({}, {}) out of range for N = {n}", e.i, e.j)));
            }
            if e.i == e.j {
                return Err(Error::Graph(format!("edge {k} is a self-loop at {}", e.i)));
            }
            if e.color == 0 {
                return Err(Error::Graph(format!("edge {k} has color 0; colors start at 1")));
            }
            if !e.coupling.is_finite() {
                return Err(Error::Graph(format!("edge {k} has non-finite coupling")));
            }
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            out.push(e);
        }
        let mut incidence = vec![Vec::new(); n];
        for (k, e) in out.iter().enumerate() {
            incidence[e.i].push(k);
            incidence[e.j].push(k);
        }
        Ok(ColoredGraph {
            n,
            edges: out,
            incidence,
            plaquettes: Vec::new(),
            loops: Vec::new(),
            dual_loops: Vec::new(),
            surface: Surface::DISK,
            geometry: None,
        })
    }

    /// Builds a graph from uncolored `(i, j, J)` triples, coloring greedily.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let uv: Vec<(usize, usize)> = pairs.iter().map(|&(i, j, _)| (i, j)).collect();
        for &(i, j) in &uv {
            if i >= n || j >= n || i == j {
                return Err(Error::Graph(format!("bad edge ({i}, {j}) for N = {n}")));
            }
        }
        let colors = color_edges(n, &uv);
        let edges = pairs
            .iter()
            .zip(colors)
            .map(|(&(i, j, coupling), color)| Edge { i, j, color, coupling })
            .collect();
        ColoredGraph::new(n, edges)
    }

    /// Attaches the surface embedding. Cycles must have been built against
    /// this graph; dual loops are lists of crossed edge ids.
    pub fn with_embedding(
        mut self,
        plaquettes: Vec<Cycle>,
        loops: Vec<Cycle>,
        dual_loops: Vec<Vec<usize>>,
        surface: Surface,
    ) -> Result<Self> {
        for c in plaquettes.iter().chain(loops.iter()) {
            check_closed(&self, c.steps())?;
        }
        for d in &dual_loops {
            if let Some(&e) = d.iter().find(|&&e| e >= self.edges.len()) {
                return Err(Error::Graph(format!("dual loop crosses unknown edge {e}")));
            }
        }
        self.plaquettes = plaquettes;
        self.loops = loops;
        self.dual_loops = dual_loops;
        self.surface = surface;
        Ok(self)
    }

    pub(crate) fn with_geometry(mut self, geometry: LatticeGeometry) -> Self {
        self.geometry = Some(geometry);
        self
    }

    /// Replaces all couplings, keeping topology and colors.
    pub fn with_couplings(mut self, couplings: &[f64]) -> Result<Self> {
        if couplings.len() != self.edges.len() {
            return Err(Error::Graph(format!(
                "{} couplings given for {} edges",
                couplings.len(),
                self.edges.len()
            )));
        }
        for (e, &c) in self.edges.iter_mut().zip(couplings) {
            e.coupling = c;
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn num_colors(&self) -> usize {
        let mut c: Vec<u32> = self.edges.iter().map(|e| e.color).collect();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    pub fn plaquettes(&self) -> &[Cycle] {
        &self.plaquettes
    }

    pub fn loops(&self) -> &[Cycle] {
        &self.loops
    }

    pub fn dual_loops(&self) -> &[Vec<usize>] {
        &self.dual_loops
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn geometry(&self) -> Option<&LatticeGeometry> {
        self.geometry.as_ref()
    }

    /// Edges of one color, in index order.
    pub fn color_class(&self, color: u32) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].color == color).collect()
    }

    pub fn num_components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &e in &self.incidence[v] {
                    let w = self.edges[e].other(v);
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}
