//! Longest-edge bisection with recursive conformity closure. Neighbor
//! chains always move to strictly longer edges, so the closure terminates;
//! splitting an edge endpoint to its midpoint halves the cell volume and
//! preserves orientation.

use super::Mesh;
use std::collections::HashMap;

type Edge = (usize, usize);

struct Refiner {
    dim: usize,
    coords: Vec<f64>,
    cells: Vec<Vec<usize>>,
    alive: Vec<bool>,
    edge_cells: HashMap<Edge, Vec<usize>>,
    midpoints: HashMap<Edge, usize>,
}

fn edge_of(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Refiner {
    fn new(mesh: &Mesh) -> Self {
        let k = mesh.dim + 1;
        let cells: Vec<Vec<usize>> =
            (0..mesh.n_cells()).map(|c| mesh.cell(c).to_vec()).collect();
        let mut r = Refiner {
            dim: mesh.dim,
            coords: mesh.coords.clone(),
            cells,
            alive: vec![true; mesh.n_cells()],
            edge_cells: HashMap::new(),
            midpoints: HashMap::new(),
        };
        for c in 0..r.cells.len() {
            r.register_edges(c);
        }
        debug_assert_eq!(mesh.cells.len() % k, 0);
        r
    }

    fn register_edges(&mut self, c: usize) {
        let cell = self.cells[c].clone();
        for i in 0..cell.len() {
            for j in (i + 1)..cell.len() {
                self.edge_cells.entry(edge_of(cell[i], cell[j])).or_default().push(c);
            }
        }
    }

    fn unregister_edges(&mut self, c: usize) {
        let cell = self.cells[c].clone();
        for i in 0..cell.len() {
            for j in (i + 1)..cell.len() {
                if let Some(list) = self.edge_cells.get_mut(&edge_of(cell[i], cell[j])) {
                    list.retain(|&x| x != c);
                }
            }
        }
    }

    fn len2(&self, e: Edge) -> f64 {
        let a = &self.coords[e.0 * self.dim..(e.0 + 1) * self.dim];
        let b = &self.coords[e.1 * self.dim..(e.1 + 1) * self.dim];
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    /// Longest edge with deterministic tie-break (length, then indices).
    fn longest_edge(&self, c: usize) -> Edge {
        let cell = &self.cells[c];
        let mut best: Option<(f64, Edge)> = None;
        for i in 0..cell.len() {
            for j in (i + 1)..cell.len() {
                let e = edge_of(cell[i], cell[j]);
                let l = self.len2(e);
                let better = match best {
                    None => true,
                    Some((bl, be)) => {
                        l > bl || (l == bl && (e.0, e.1) < (be.0, be.1))
                    }
                };
                if better {
                    best = Some((l, e));
                }
            }
        }
        best.unwrap().1
    }

    fn midpoint(&mut self, e: Edge) -> usize {
        if let Some(&m) = self.midpoints.get(&e) {
            return m;
        }
        let dim = self.dim;
        let idx = self.coords.len() / dim;
        for k in 0..dim {
            let v = 0.5 * (self.coords[e.0 * dim + k] + self.coords[e.1 * dim + k]);
            self.coords.push(v);
        }
        self.midpoints.insert(e, idx);
        idx
    }

    fn bisect_across(&mut self, c: usize, e: Edge) {
        debug_assert!(self.alive[c]);
        let m = self.midpoint(e);
        self.unregister_edges(c);
        self.alive[c] = false;
        let parent = self.cells[c].clone();
        let mut child_a = parent.clone();
        let mut child_b = parent;
        for v in child_a.iter_mut() {
            if *v == e.0 {
                *v = m;
            }
        }
        for v in child_b.iter_mut() {
            if *v == e.1 {
                *v = m;
            }
        }
        for child in [child_a, child_b] {
            let id = self.cells.len();
            self.cells.push(child);
            self.alive.push(true);
            self.register_edges(id);
        }
    }

    /// Bisect cell c across its longest edge, first closing neighbors whose
    /// own longest edge is longer.
    fn ensure_bisected(&mut self, c0: usize) {
        let limit = 20 * self.cells.len() + 1000;
        let mut stack = vec![c0];
        let mut steps = 0usize;
        while let Some(&t) = stack.last() {
            steps += 1;
            assert!(steps < limit, "bisection closure failed to terminate");
            if !self.alive[t] {
                stack.pop();
                continue;
            }
            let e = self.longest_edge(t);
            let sharers: Vec<usize> = self
                .edge_cells
                .get(&e)
                .map(|v| v.iter().copied().filter(|&s| self.alive[s]).collect())
                .unwrap_or_default();
            let blocker = sharers
                .iter()
                .copied()
                .filter(|&s| self.longest_edge(s) != e)
                .min();
            match blocker {
                Some(b) => stack.push(b),
                None => {
                    for s in sharers {
                        if self.alive[s] {
                            self.bisect_across(s, e);
                        }
                    }
                    stack.pop();
                }
            }
        }
    }

    fn into_mesh(self, template: &Mesh) -> Mesh {
        let k = self.dim + 1;
        let mut cells = Vec::new();
        for (c, cell) in self.cells.iter().enumerate() {
            if self.alive[c] {
                cells.extend_from_slice(cell);
            }
        }
        debug_assert_eq!(cells.len() % k, 0);
        let mut m = Mesh {
            dim: self.dim,
            coords: self.coords,
            cells,
            singular_vertices: template.singular_vertices.clone(),
            boundary_vertices: vec![],
            grading: template.grading,
            target_h: template.target_h,
            label: template.label.clone(),
        };
        m.detect_boundary();
        m
    }
}

/// Bisect every marked cell once (descendants may be split further by the
/// conformity closure). Existing vertices keep their indices, so the output
/// is a nested conforming refinement.
pub(crate) fn bisect_marked(mesh: &Mesh, marks: &[bool]) -> Mesh {
    assert_eq!(marks.len(), mesh.n_cells());
    let mut r = Refiner::new(mesh);
    for (c, &marked) in marks.iter().enumerate() {
        if marked && r.alive[c] {
            r.ensure_bisected(c);
        }
    }
    r.into_mesh(mesh)
}
