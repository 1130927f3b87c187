use super::{ColoredGraph, Cycle, Edge, Step, Surface};
use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Honeycomb,
    Square,
    Triangular,
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "honeycomb" => Ok(LatticeKind::Honeycomb),
            "square" => Ok(LatticeKind::Square),
            "triangular" => Ok(LatticeKind::Triangular),
            other => Err(Error::Lattice(format!("unknown lattice kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LatticeKind::Honeycomb => "honeycomb",
            LatticeKind::Square => "square",
            LatticeKind::Triangular => "triangular",
        })
    }
}

/// Unit-cell bookkeeping kept alongside built-in lattices so dual loops can
/// be placed at any seam.
#[derive(Debug, Clone)]
pub struct LatticeGeometry {
    pub kind: LatticeKind,
    pub nx: usize,
    pub ny: usize,
    pub periodic: bool,
    cell: Vec<(usize, usize)>,
    sublattice: Vec<u8>,
    // unwrapped cell offset from edge.i to edge.j
    shift: Vec<(i32, i32)>,
    tail: Vec<usize>,
}

impl LatticeGeometry {
    pub fn cell(&self, v: usize) -> (usize, usize) {
        self.cell[v]
    }

    fn basis(&self) -> ([f64; 2], [f64; 2]) {
        match self.kind {
            LatticeKind::Honeycomb => ([SQRT3, 0.0], [SQRT3 / 2.0, 1.5]),
            LatticeKind::Square => ([1.0, 0.0], [0.0, 1.0]),
            LatticeKind::Triangular => ([1.0, 0.0], [-0.5, SQRT3 / 2.0]),
        }
    }

    fn offset(&self, v: usize) -> [f64; 2] {
        match (self.kind, self.sublattice[v]) {
            (LatticeKind::Honeycomb, 1) => [0.0, 1.0],
            _ => [0.0, 0.0],
        }
    }

    /// Position of a vertex inside the fundamental domain.
    pub fn position(&self, v: usize) -> [f64; 2] {
        let (a1, a2) = self.basis();
        let (x, y) = self.cell[v];
        let o = self.offset(v);
        [x as f64 * a1[0] + y as f64 * a2[0] + o[0], x as f64 * a1[1] + y as f64 * a2[1] + o[1]]
    }

    /// Real-space vector of a step, unwrapped across periodic boundaries.
    pub fn step_vector(&self, g: &ColoredGraph, s: Step) -> [f64; 2] {
        let e = g.edge(s.edge);
        let (a1, a2) = self.basis();
        let (dx, dy) = self.shift[s.edge];
        let (oi, oj) = (self.offset(e.i), self.offset(e.j));
        let v = [
            oj[0] - oi[0] + dx as f64 * a1[0] + dy as f64 * a2[0],
            oj[1] - oi[1] + dx as f64 * a1[1] + dy as f64 * a2[1],
        ];
        if s.forward {
            v
        } else {
            [-v[0], -v[1]]
        }
    }

    /// Signed area enclosed by a cycle (positive when counterclockwise).
    pub fn signed_area(&self, g: &ColoredGraph, steps: &[Step]) -> f64 {
        let mut p = [0.0, 0.0];
        let mut area = 0.0;
        for &s in steps {
            let d = self.step_vector(g, s);
            let q = [p[0] + d[0], p[1] + d[1]];
            area += p[0] * q[1] - q[0] * p[1];
            p = q;
        }
        area / 2.0
    }

    /// Edges crossing the seam between cell columns `c` and `c + 1`
    /// (`axis = 0`) or rows (`axis = 1`), wrapping at the boundary. On a
    /// torus this is a dual loop crossing the loop along that axis once.
    pub fn seam(&self, axis: usize, c: usize) -> Vec<usize> {
        let len = if axis == 0 { self.nx } else { self.ny };
        (0..self.shift.len())
            .filter(|&e| {
                let d = if axis == 0 { self.shift[e].0 } else { self.shift[e].1 };
                let (cx, cy) = self.cell_of_edge_tail(e);
                let at = if axis == 0 { cx } else { cy };
                match d {
                    1 => at == c,
                    -1 => (at + len - 1) % len == c,
                    _ => false,
                }
            })
            .collect()
    }

    fn cell_of_edge_tail(&self, e: usize) -> (usize, usize) {
        self.cell[self.tail[e]]
    }
}

struct Draft {
    nx: usize,
    ny: usize,
    periodic: bool,
    cell: Vec<(usize, usize)>,
    sublattice: Vec<u8>,
    edges: Vec<Edge>,
    shift: Vec<(i32, i32)>,
    flipped: Vec<bool>,
    keys: std::collections::HashMap<(u8, usize, usize), usize>,
}

impl Draft {
    fn wrap(&self, x: isize, y: isize) -> Option<(usize, usize)> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        if self.periodic {
            Some((x.rem_euclid(nx) as usize, y.rem_euclid(ny) as usize))
        } else if (0..nx).contains(&x) && (0..ny).contains(&y) {
            Some((x as usize, y as usize))
        } else {
            None
        }
    }

    fn add(&mut self, key: (u8, usize, usize), a: usize, b: usize, color: u32, shift: (i32, i32)) {
        let flip = a > b;
        let (i, j) = if flip { (b, a) } else { (a, b) };
        self.keys.insert(key, self.edges.len());
        self.edges.push(Edge { i, j, color, coupling: 1.0 });
        self.shift.push(if flip { (-shift.0, -shift.1) } else { shift });
        self.flipped.push(flip);
    }

    // step along (`along = true`) or against the direction the edge was added in
    fn step(&self, key: (u8, isize, isize), along: bool) -> Option<Step> {
        let (x, y) = self.wrap(key.1, key.2)?;
        let e = *self.keys.get(&(key.0, x, y))?;
        Some(Step::new(e, along != self.flipped[e]))
    }

    fn walk(&self, parts: &[((u8, isize, isize), bool)]) -> Option<Vec<Step>> {
        parts.iter().map(|&(k, along)| self.step(k, along)).collect()
    }
}

/// Builds a honeycomb, square or triangular lattice of `nx × ny` unit cells.
///
/// Periodic lattices live on a torus with two loops and two dual loops;
/// open ones are disks. Couplings start at 1. Honeycomb cells hold two sites
/// (A sites are numbered first, so every bond points A → B); square and
/// triangular cells hold one and need even extents when periodic so that the
/// striped coloring closes around the torus.
pub fn build_lattice(kind: LatticeKind, nx: usize, ny: usize, periodic: bool) -> Result<ColoredGraph> {
    if nx == 0 || ny == 0 {
        return Err(Error::Lattice("lattice extents must be positive".into()));
    }
    if periodic && (nx < 2 || ny < 2) {
        return Err(Error::Lattice(format!("periodic {kind} needs nx, ny >= 2 (got {nx}x{ny})")));
    }
    match kind {
        LatticeKind::Honeycomb if !periodic && ny < 2 => {
            return Err(Error::Lattice("open honeycomb needs ny >= 2 to be connected".into()))
        }
        LatticeKind::Square | LatticeKind::Triangular if periodic && (nx % 2 == 1 || ny % 2 == 1) => {
            return Err(Error::Lattice(format!(
                "periodic {kind} needs even nx and ny for a proper {}-coloring (got {nx}x{ny})",
                if kind == LatticeKind::Square { 4 } else { 6 }
            )))
        }
        _ => {}
    }
    let cells = nx * ny;
    let per_cell = if kind == LatticeKind::Honeycomb { 2 } else { 1 };
    let n = per_cell * cells;
    let mut cell = vec![(0, 0); n];
    let mut sublattice = vec![0u8; n];
    for y in 0..ny {
        for x in 0..nx {
            cell[x + nx * y] = (x, y);
            if per_cell == 2 {
                cell[cells + x + nx * y] = (x, y);
                sublattice[cells + x + nx * y] = 1;
            }
        }
    }
    let mut d = Draft {
        nx,
        ny,
        periodic,
        cell,
        sublattice,
        edges: Vec::new(),
        shift: Vec::new(),
        flipped: Vec::new(),
        keys: Default::default(),
    };
    let site = |x: usize, y: usize| x + nx * y;

    let mut faces: Vec<Vec<((u8, isize, isize), bool)>> = Vec::new();
    let (loop_x, loop_y): (Vec<_>, Vec<_>);
    match kind {
        LatticeKind::Honeycomb => {
            let b = |x: usize, y: usize| cells + x + nx * y;
            for y in 0..ny {
                for x in 0..nx {
                    let (x_, y_) = (x as isize, y as isize);
                    d.add((0, x, y), site(x, y), b(x, y), 1, (0, 0));
                    if let Some((bx, by)) = d.wrap(x_, y_ - 1) {
                        d.add((1, x, y), site(x, y), b(bx, by), 2, (0, -1));
                    }
                    if let Some((bx, by)) = d.wrap(x_ + 1, y_ - 1) {
                        d.add((2, x, y), site(x, y), b(bx, by), 3, (1, -1));
                    }
                }
            }
            for y in 0..ny as isize {
                for x in 0..nx as isize {
                    faces.push(vec![
                        ((0, x, y), true),
                        ((1, x, y + 1), false),
                        ((2, x, y + 1), true),
                        ((0, x + 1, y), false),
                        ((1, x + 1, y), true),
                        ((2, x, y), false),
                    ]);
                }
            }
            loop_x = (0..nx as isize).flat_map(|x| [((2, x, 1), true), ((1, x + 1, 1), false)]).collect();
            loop_y = (0..ny as isize).flat_map(|y| [((0, 0, y), true), ((1, 0, y + 1), false)]).collect();
        }
        LatticeKind::Square => {
            for y in 0..ny {
                for x in 0..nx {
                    let (x_, y_) = (x as isize, y as isize);
                    if let Some((a, b)) = d.wrap(x_ + 1, y_) {
                        d.add((0, x, y), site(x, y), site(a, b), 1 + (x % 2) as u32, (1, 0));
                    }
                    if let Some((a, b)) = d.wrap(x_, y_ + 1) {
                        d.add((1, x, y), site(x, y), site(a, b), 3 + (y % 2) as u32, (0, 1));
                    }
                }
            }
            for y in 0..ny as isize {
                for x in 0..nx as isize {
                    faces.push(vec![
                        ((0, x, y), true),
                        ((1, x + 1, y), true),
                        ((0, x, y + 1), false),
                        ((1, x, y), false),
                    ]);
                }
            }
            loop_x = (0..nx as isize).map(|x| ((0, x, 0), true)).collect();
            loop_y = (0..ny as isize).map(|y| ((1, 0, y), true)).collect();
        }
        LatticeKind::Triangular => {
            for y in 0..ny {
                for x in 0..nx {
                    let (x_, y_) = (x as isize, y as isize);
                    if let Some((a, b)) = d.wrap(x_ + 1, y_) {
                        d.add((0, x, y), site(x, y), site(a, b), 1 + (x % 2) as u32, (1, 0));
                    }
                    if let Some((a, b)) = d.wrap(x_, y_ + 1) {
                        d.add((1, x, y), site(x, y), site(a, b), 3 + (y % 2) as u32, (0, 1));
                    }
                    if let Some((a, b)) = d.wrap(x_ + 1, y_ + 1) {
                        d.add((2, x, y), site(x, y), site(a, b), 5 + (x % 2) as u32, (1, 1));
                    }
                }
            }
            for y in 0..ny as isize {
                for x in 0..nx as isize {
                    faces.push(vec![((0, x, y), true), ((1, x + 1, y), true), ((2, x, y), false)]);
                    faces.push(vec![((2, x, y), true), ((0, x, y + 1), false), ((1, x, y), false)]);
                }
            }
            loop_x = (0..nx as isize).map(|x| ((0, x, 0), true)).collect();
            loop_y = (0..ny as isize).map(|y| ((1, 0, y), true)).collect();
        }
    }

    let face_steps: Vec<Vec<Step>> = faces.iter().filter_map(|f| d.walk(f)).collect();
    let loop_steps = if periodic {
        vec![d.walk(&loop_x).expect("x loop"), d.walk(&loop_y).expect("y loop")]
    } else {
        Vec::new()
    };
    let tail: Vec<usize> = d.edges.iter().map(|e| e.i).collect();
    let geometry = LatticeGeometry {
        kind,
        nx,
        ny,
        periodic,
        cell: d.cell,
        sublattice: d.sublattice,
        shift: d.shift,
        tail,
    };
    let graph = ColoredGraph::new(n, d.edges)?;
    let plaquettes = face_steps
        .into_iter()
        .map(|steps| {
            let c = Cycle::new(&graph, steps)?;
            Ok(if geometry.signed_area(&graph, c.steps()) < 0.0 { c.reversed() } else { c })
        })
        .collect::<Result<Vec<_>>>()?;
    let loops = loop_steps.into_iter().map(|s| Cycle::new(&graph, s)).collect::<Result<Vec<_>>>()?;
    let (dual, surface) = if periodic {
        (vec![geometry.seam(0, nx - 1), geometry.seam(1, ny - 1)], Surface::TORUS)
    } else {
        (Vec::new(), Surface::DISK)
    };
    Ok(graph.with_embedding(plaquettes, loops, dual, surface)?.with_geometry(geometry))
}

/// The `n`-cycle as a disk with a single counterclockwise plaquette.
pub fn ring(n: usize) -> Result<ColoredGraph> {
    if n < 3 {
        return Err(Error::Lattice(format!("a ring needs at least 3 sites (got {n})")));
    }
    let pairs: Vec<(usize, usize, f64)> = (0..n).map(|k| (k, (k + 1) % n, 1.0)).collect();
    let g = ColoredGraph::from_pairs(n, &pairs)?;
    let face = Cycle::from_vertices(&g, &(0..n).collect::<Vec<_>>())?;
    g.with_embedding(vec![face], Vec::new(), Vec::new(), Surface::DISK)
}
