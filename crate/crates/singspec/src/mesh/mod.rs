//! Simplicial meshes of chart domains in dimensions 1-3, with geometric
//! grading toward singular sets, puncturing, and persistence.

mod io;
mod refine;

pub use io::{read_mesh, write_mesh};

use crate::geometry::SingularSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("domain descriptor cannot be meshed: {0}")]
    UnmeshableDomain(String),
    #[error("grading to {levels} levels would produce cells below 1e-12 diameter")]
    GradingOverflow { levels: u32 },
    #[error("no mesh vertex lies within {tol:.3e} of a singular-set component")]
    SetNotResolved { tol: f64 },
    #[error("mesh file format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Region descriptors accepted by `build_mesh`.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
    /// Polar disk with uniformly spaced rings.
    Disk { radius: f64 },
    /// Polar disk with explicit ring radii (strictly increasing) and a fixed
    /// number of vertices per ring.
    DiskRings { radii: Vec<f64>, n_theta: usize },
    Box3 { lo: [f64; 3], hi: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PunctureMode {
    /// Mark the snapped vertices as singular for later Dirichlet pinning.
    Pin,
    /// Remove the open star of the snapped vertices.
    Excise,
}

/// Conforming simplicial mesh. Vertex coordinates are stored flat with
/// stride `dim`, cells flat with stride `dim + 1`, positively oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub cells: Vec<usize>,
    pub singular_vertices: Vec<usize>,
    pub boundary_vertices: Vec<usize>,
    pub grading: (f64, u32),
    pub target_h: f64,
    pub label: String,
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertex3(&self, i: usize) -> [f64; 3] {
        let v = self.vertex(i);
        let mut p = [0.0; 3];
        p[..self.dim].copy_from_slice(v);
        p
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    /// Signed cell volume (positive on a well-oriented mesh).
    pub fn cell_volume(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        match self.dim {
            1 => self.vertex(cell[1])[0] - self.vertex(cell[0])[0],
            2 => {
                let a = self.vertex(cell[0]);
                let b = self.vertex(cell[1]);
                let d = self.vertex(cell[2]);
                0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]))
            }
            _ => {
                let a = self.vertex3(cell[0]);
                let m: Vec<[f64; 3]> = (1..4)
                    .map(|i| {
                        let v = self.vertex3(cell[i]);
                        [v[0] - a[0], v[1] - a[1], v[2] - a[2]]
                    })
                    .collect();
                (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
                    / 6.0
            }
        }
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        let mut d2 = 0.0f64;
        for i in 0..cell.len() {
            for j in (i + 1)..cell.len() {
                let a = self.vertex(cell[i]);
                let b = self.vertex(cell[j]);
                let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                d2 = d2.max(s);
            }
        }
        d2.sqrt()
    }

    pub fn max_cell_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    pub fn min_cell_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(f64::INFINITY, f64::min)
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 3] {
        let cell = self.cell(c);
        let mut p = [0.0; 3];
        for &v in cell {
            let x = self.vertex3(v);
            for k in 0..3 {
                p[k] += x[k];
            }
        }
        for k in 0..3 {
            p[k] /= cell.len() as f64;
        }
        p
    }

    pub fn nearest_vertex(&self, x: &[f64; 3]) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for i in 0..self.n_vertices() {
            let v = self.vertex3(i);
            let d2: f64 = (0..3).map(|k| (v[k] - x[k]) * (v[k] - x[k])).sum();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    /// Vertices within chart distance `radius` of a singular set, ascending.
    pub fn vertices_within(&self, set: &SingularSet, radius: f64) -> Vec<usize> {
        (0..self.n_vertices())
            .filter(|&i| set.distance(&self.vertex3(i)) <= radius)
            .collect()
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let nv = self.n_vertices();
        let k = self.dim + 1;
        if self.cells.len() % k != 0 {
            return Err(MeshError::Format { line: 0, message: "ragged cell list".into() });
        }
        for (pos, &v) in self.cells.iter().enumerate() {
            if v >= nv {
                return Err(MeshError::Format {
                    line: 0,
                    message: format!("cell entry {pos} references missing vertex {v}"),
                });
            }
        }
        for c in 0..self.n_cells() {
            if self.cell_volume(c) <= 0.0 {
                return Err(MeshError::Format {
                    line: 0,
                    message: format!("cell {c} has non-positive volume"),
                });
            }
        }
        for &i in self.singular_vertices.iter().chain(&self.boundary_vertices) {
            if i >= nv {
                return Err(MeshError::Format {
                    line: 0,
                    message: format!("marker references missing vertex {i}"),
                });
            }
        }
        Ok(())
    }

    /// Boundary vertices from facet incidence: a facet on exactly one cell
    /// is boundary.
    pub(crate) fn detect_boundary(&mut self) {
        use std::collections::HashMap;
        let k = self.dim + 1;
        let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
        for c in 0..self.n_cells() {
            let cell = self.cell(c).to_vec();
            for skip in 0..k {
                let mut f: Vec<usize> =
                    cell.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                f.sort_unstable();
                *facets.entry(f).or_insert(0) += 1;
            }
        }
        let mut on_boundary = vec![false; self.n_vertices()];
        for (f, count) in facets {
            if count == 1 {
                for v in f {
                    on_boundary[v] = true;
                }
            }
        }
        self.boundary_vertices =
            (0..self.n_vertices()).filter(|&i| on_boundary[i]).collect();
    }
}

/// Build a conforming mesh of the domain with bulk cell diameter <= target_h
/// (polar meshes: ring spacing and outer chord <= target_h).
pub fn build_mesh(domain: &Domain, target_h: f64) -> Result<Mesh, MeshError> {
    assert!(target_h > 0.0, "target_h must be positive");
    match domain {
        Domain::Interval { a, b } => {
            if b <= a {
                return Err(MeshError::UnmeshableDomain(format!("empty interval [{a}, {b}]")));
            }
            let n = ((b - a) / target_h).ceil() as usize;
            let n = n.max(1);
            let mut coords = Vec::with_capacity(n + 1);
            for i in 0..=n {
                coords.push(a + (b - a) * (i as f64) / (n as f64));
            }
            let mut cells = Vec::with_capacity(2 * n);
            for i in 0..n {
                cells.push(i);
                cells.push(i + 1);
            }
            let mut m = Mesh {
                dim: 1,
                coords,
                cells,
                singular_vertices: vec![],
                boundary_vertices: vec![],
                grading: (0.5, 0),
                target_h,
                label: format!("interval[{a},{b}]-h{target_h}"),
            };
            m.detect_boundary();
            Ok(m)
        }
        Domain::Rectangle { lo, hi } => {
            if hi[0] <= lo[0] || hi[1] <= lo[1] {
                return Err(MeshError::UnmeshableDomain("empty rectangle".into()));
            }
            let nx = (((hi[0] - lo[0]) / target_h).ceil() as usize).max(1);
            let ny = (((hi[1] - lo[1]) / target_h).ceil() as usize).max(1);
            let idx = |i: usize, j: usize| j * (nx + 1) + i;
            let mut coords = Vec::with_capacity(2 * (nx + 1) * (ny + 1));
            for j in 0..=ny {
                for i in 0..=nx {
                    coords.push(lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64);
                    coords.push(lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64);
                }
            }
            let mut cells = Vec::with_capacity(6 * nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    cells.extend_from_slice(&[idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                    cells.extend_from_slice(&[idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                }
            }
            let mut m = Mesh {
                dim: 2,
                coords,
                cells,
                singular_vertices: vec![],
                boundary_vertices: vec![],
                grading: (0.5, 0),
                target_h,
                label: format!("rect[{},{}]x[{},{}]-h{target_h}", lo[0], hi[0], lo[1], hi[1]),
            };
            m.detect_boundary();
            Ok(m)
        }
        Domain::Disk { radius } => {
            if *radius <= 0.0 {
                return Err(MeshError::UnmeshableDomain("disk radius must be positive".into()));
            }
            let nr = ((radius / target_h).ceil() as usize).max(1);
            let radii: Vec<f64> = (1..=nr).map(|k| radius * k as f64 / nr as f64).collect();
            let n_theta = ((2.0 * std::f64::consts::PI * radius / target_h).ceil() as usize).max(8);
            build_polar(&radii, n_theta, target_h)
        }
        Domain::DiskRings { radii, n_theta } => {
            if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
                return Err(MeshError::UnmeshableDomain(
                    "ring radii must be positive and strictly increasing".into(),
                ));
            }
            if *n_theta < 3 {
                return Err(MeshError::UnmeshableDomain("need at least 3 vertices per ring".into()));
            }
            build_polar(radii, *n_theta, target_h)
        }
        Domain::Box3 { lo, hi } => {
            if (0..3).any(|k| hi[k] <= lo[k]) {
                return Err(MeshError::UnmeshableDomain("empty box".into()));
            }
            let n: Vec<usize> = (0..3)
                .map(|k| (((hi[k] - lo[k]) / target_h).ceil() as usize).max(1))
                .collect();
            let (nx, ny, nz) = (n[0], n[1], n[2]);
            let idx = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
            let mut coords = Vec::new();
            for k in 0..=nz {
                for j in 0..=ny {
                    for i in 0..=nx {
                        coords.push(lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64);
                        coords.push(lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64);
                        coords.push(lo[2] + (hi[2] - lo[2]) * k as f64 / nz as f64);
                    }
                }
            }
            // Kuhn subdivision: six tetrahedra per cube along vertex paths
            // from (0,0,0) to (1,1,1).
            let paths: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let mut cells = Vec::new();
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        for path in &paths {
                            let mut p = [i, j, k];
                            let mut tet = [idx(p[0], p[1], p[2]), 0, 0, 0];
                            for (step, &axis) in path.iter().enumerate() {
                                p[axis] += 1;
                                tet[step + 1] = idx(p[0], p[1], p[2]);
                            }
                            cells.extend_from_slice(&tet);
                        }
                    }
                }
            }
            let mut m = Mesh {
                dim: 3,
                coords,
                cells,
                singular_vertices: vec![],
                boundary_vertices: vec![],
                grading: (0.5, 0),
                target_h,
                label: format!("box3-h{target_h}"),
            };
            orient_positive(&mut m);
            m.detect_boundary();
            Ok(m)
        }
    }
}

fn orient_positive(m: &mut Mesh) {
    let k = m.dim + 1;
    for c in 0..m.n_cells() {
        if m.cell_volume(c) < 0.0 {
            m.cells.swap(c * k, c * k + 1);
        }
    }
}

fn build_polar(radii: &[f64], n_theta: usize, target_h: f64) -> Result<Mesh, MeshError> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut coords = vec![0.0, 0.0];
    for &r in radii {
        for t in 0..n_theta {
            let ang = two_pi * t as f64 / n_theta as f64;
            coords.push(r * ang.cos());
            coords.push(r * ang.sin());
        }
    }
    let ring = |k: usize, t: usize| 1 + k * n_theta + (t % n_theta);
    let mut cells = Vec::new();
    for t in 0..n_theta {
        cells.extend_from_slice(&[0, ring(0, t), ring(0, t + 1)]);
    }
    for k in 0..radii.len() - 1 {
        for t in 0..n_theta {
            let a = ring(k, t);
            let b = ring(k, t + 1);
            let c = ring(k + 1, t + 1);
            let d = ring(k + 1, t);
            cells.extend_from_slice(&[a, d, c]);
            cells.extend_from_slice(&[a, c, b]);
        }
    }
    let mut m = Mesh {
        dim: 2,
        coords,
        cells,
        singular_vertices: vec![],
        boundary_vertices: vec![],
        grading: (0.5, 0),
        target_h,
        label: format!("disk-r{}-h{target_h}", radii.last().unwrap()),
    };
    m.detect_boundary();
    Ok(m)
}

/// Ring radii for conformally round charts: spacing target_h inside
/// `flat_radius`, then growing like (1 + r^2)/2 so rings stay uniform in
/// the curved metric. `flat_radius = 0` gives the round-sphere profile.
pub fn conformal_ring_radii(target_h: f64, outer: f64, flat_radius: f64) -> Vec<f64> {
    let mut radii = Vec::new();
    let mut r = 0.0f64;
    loop {
        let step = if r < flat_radius {
            target_h
        } else {
            target_h * (1.0 + r * r) / 2.0
        };
        r += step;
        if r >= outer {
            radii.push(outer);
            break;
        }
        radii.push(r);
    }
    radii
}

/// Ring radii for capacity runs: hit every target radius exactly, resolve
/// below the smallest by two halvings, and keep adjacent ratios <= growth.
pub fn capacity_ring_radii(targets: &[f64], outer: f64, growth: f64) -> Vec<f64> {
    assert!(!targets.is_empty());
    let mut radii: Vec<f64> = targets.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let smallest = radii[0];
    radii.push(smallest / 2.0);
    radii.push(smallest / 4.0);
    radii.push(outer);
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();
    // Insert geometric intermediates until the ratio bound holds.
    loop {
        let mut inserted = false;
        let mut next = Vec::with_capacity(radii.len() * 2);
        for w in 0..radii.len() {
            next.push(radii[w]);
            if w + 1 < radii.len() && radii[w + 1] / radii[w] > growth {
                next.push((radii[w] * radii[w + 1]).sqrt());
                inserted = true;
            }
        }
        radii = next;
        if !inserted {
            break;
        }
    }
    radii
}

/// Geometric grading toward a singular set: after this call, cells within
/// distance ratio^j of the set have diameter <= target_h * ratio^j for
/// j = 1..levels. `levels = 0` returns the input unchanged.
pub fn grade_toward(
    mesh: &Mesh,
    set: &SingularSet,
    ratio: f64,
    levels: u32,
) -> Result<Mesh, MeshError> {
    assert!(ratio > 0.0 && ratio < 1.0, "grading ratio must be in (0,1)");
    if levels == 0 {
        return Ok(mesh.clone());
    }
    let base_h = mesh.target_h;
    if base_h * ratio.powi(levels as i32) < 1e-12 {
        return Err(MeshError::GradingOverflow { levels });
    }
    let mut current = mesh.clone();
    for _pass in 0..10_000usize {
        let mut marks = vec![false; current.n_cells()];
        let mut any = false;
        for c in 0..current.n_cells() {
            let cell = current.cell(c);
            let dist = cell
                .iter()
                .map(|&v| set.distance(&current.vertex3(v)))
                .fold(f64::INFINITY, f64::min);
            let diam = current.cell_diameter(c);
            for j in 1..=levels {
                let reach = ratio.powi(j as i32);
                if dist <= reach && diam > base_h * reach {
                    marks[c] = true;
                    any = true;
                    break;
                }
            }
        }
        if !any {
            break;
        }
        current = refine::bisect_marked(&current, &marks);
    }
    current.grading = (ratio, levels);
    current.label = format!("{}-graded(r{ratio},L{levels})", mesh.label);
    current.detect_boundary();
    Ok(current)
}

/// Bisect every cell `times` times (with conformity closure); produces a
/// nested refinement of the input.
pub fn refine_all(mesh: &Mesh, times: u32) -> Mesh {
    let mut current = mesh.clone();
    for _ in 0..times {
        let marks = vec![true; current.n_cells()];
        current = refine::bisect_marked(&current, &marks);
        // One marked pass bisects each original cell once; halve diameters
        // properly by a second sweep in 2D/3D where bisection alternates
        // edge classes.
        current.target_h = current.max_cell_diameter();
    }
    current.detect_boundary();
    current.label = format!("{}-refined", mesh.label);
    current
}

/// Resolve a singular set onto mesh vertices and either pin or excise.
pub fn puncture(mesh: &Mesh, set: &SingularSet, mode: PunctureMode) -> Result<Mesh, MeshError> {
    let tol = mesh.target_h / 10.0;
    let point_components: Option<Vec<[f64; 3]>> = match set {
        SingularSet::Point { at } => Some(vec![*at]),
        SingularSet::PointList { points } => Some(points.clone()),
        _ => None,
    };
    let snapped: Vec<usize> = match point_components {
        Some(points) => {
            let mut out = Vec::new();
            for p in points {
                let (idx, dist) = mesh.nearest_vertex(&p);
                if dist > tol {
                    return Err(MeshError::SetNotResolved { tol });
                }
                out.push(idx);
            }
            out.sort_unstable();
            out.dedup();
            out
        }
        None => {
            let verts = mesh.vertices_within(set, tol);
            if verts.is_empty() {
                return Err(MeshError::SetNotResolved { tol });
            }
            verts
        }
    };
    match mode {
        PunctureMode::Pin => {
            let mut m = mesh.clone();
            let mut merged = m.singular_vertices.clone();
            merged.extend_from_slice(&snapped);
            merged.sort_unstable();
            merged.dedup();
            m.singular_vertices = merged;
            m.label = format!("{}-pinned", mesh.label);
            Ok(m)
        }
        PunctureMode::Excise => {
            let k = mesh.dim + 1;
            let drop_mask: Vec<bool> = (0..mesh.n_cells())
                .map(|c| mesh.cell(c).iter().any(|v| snapped.binary_search(v).is_ok()))
                .collect();
            let mut new_cells = Vec::new();
            for c in 0..mesh.n_cells() {
                if !drop_mask[c] {
                    new_cells.extend_from_slice(mesh.cell(c));
                }
            }
            if new_cells.is_empty() {
                return Err(MeshError::UnmeshableDomain("excision removed every cell".into()));
            }
            // Compact vertices.
            let nv = mesh.n_vertices();
            let mut used = vec![false; nv];
            for &v in &new_cells {
                used[v] = true;
            }
            let mut remap = vec![usize::MAX; nv];
            let mut coords = Vec::new();
            let mut next = 0usize;
            for v in 0..nv {
                if used[v] {
                    remap[v] = next;
                    next += 1;
                    coords.extend_from_slice(mesh.vertex(v));
                }
            }
            for v in new_cells.iter_mut() {
                *v = remap[*v];
            }
            let singular: Vec<usize> = mesh
                .singular_vertices
                .iter()
                .filter_map(|&v| (remap[v] != usize::MAX).then(|| remap[v]))
                .collect();
            let mut m = Mesh {
                dim: mesh.dim,
                coords,
                cells: new_cells,
                singular_vertices: singular,
                boundary_vertices: vec![],
                grading: mesh.grading,
                target_h: mesh.target_h,
                label: format!("{}-excised", mesh.label),
            };
            m.detect_boundary();
            debug_assert_eq!(m.cells.len() % k, 0);
            Ok(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_two_cells() {
        let m = build_mesh(&Domain::Interval { a: 0.0, b: 1.0 }, 0.5).unwrap();
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.n_vertices(), 3);
        assert_eq!(m.boundary_vertices, vec![0, 2]);
        m.validate().unwrap();
    }

    #[test]
    fn square_cell_count_scales_inverse_quadratically() {
        let m1 = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.125).unwrap();
        let m2 = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.0625).unwrap();
        let ratio = m2.n_cells() as f64 / m1.n_cells() as f64;
        assert!(ratio > 1.0 && ratio < 16.0, "ratio {ratio}");
        assert!((ratio - 4.0).abs() < 3.0);
        assert!((m1.total_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_area_close_to_pi() {
        let m = build_mesh(&Domain::Disk { radius: 1.0 }, 0.1).unwrap();
        m.validate().unwrap();
        // Inscribed-polygon area deficit ~ (2 pi / n)^2 / 6; documented 1%.
        let area = m.total_volume();
        assert!((area - std::f64::consts::PI).abs() / std::f64::consts::PI < 0.01, "area {area}");
    }

    #[test]
    fn disk_area_matches_inscribed_polygon_exactly_in_structure() {
        let m = build_mesh(&Domain::Disk { radius: 1.0 }, 0.2).unwrap();
        // All cell volumes positive.
        for c in 0..m.n_cells() {
            assert!(m.cell_volume(c) > 0.0);
        }
    }

    #[test]
    fn box3_volume_and_orientation() {
        let m = build_mesh(&Domain::Box3 { lo: [0.0; 3], hi: [1.0, 1.0, 1.0] }, 0.34).unwrap();
        m.validate().unwrap();
        assert!((m.total_volume() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grading_levels_zero_is_identity() {
        let m = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.25).unwrap();
        let set = SingularSet::Point { at: [0.5, 0.5, 0.0] };
        let g = grade_toward(&m, &set, 0.5, 0).unwrap();
        assert_eq!(m, g);
    }

    #[test]
    fn grading_shrinks_cells_near_point() {
        let m = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.25).unwrap();
        let set = SingularSet::Point { at: [0.5, 0.5, 0.0] };
        let g = grade_toward(&m, &set, 0.5, 3).unwrap();
        g.validate().unwrap();
        // Postcondition at the deepest level.
        for c in 0..g.n_cells() {
            let dist = g
                .cell(c)
                .iter()
                .map(|&v| set.distance(&g.vertex3(v)))
                .fold(f64::INFINITY, f64::min);
            if dist <= 0.125 {
                assert!(
                    g.cell_diameter(c) <= 0.25 * 0.125 + 1e-12,
                    "cell {c} diameter {} at distance {dist}",
                    g.cell_diameter(c)
                );
            }
        }
        // Domain covered: total volume preserved.
        assert!((g.total_volume() - m.total_volume()).abs() < 1e-8 * m.total_volume());
        // Smallest cells near the point obey h * ratio^levels.
        let smallest = g.min_cell_diameter();
        assert!(smallest <= 0.25 * 0.125 + 1e-12, "smallest {smallest}");
    }

    #[test]
    fn grading_overflow_detected() {
        let m = build_mesh(&Domain::Interval { a: 0.0, b: 1.0 }, 1e-3).unwrap();
        let set = SingularSet::Point { at: [0.5, 0.0, 0.0] };
        let err = grade_toward(&m, &set, 0.5, 40).unwrap_err();
        assert!(matches!(err, MeshError::GradingOverflow { .. }));
    }

    #[test]
    fn refine_all_nests_and_shrinks() {
        let m = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.5).unwrap();
        let r = refine_all(&m, 2);
        r.validate().unwrap();
        assert!(r.n_cells() > m.n_cells());
        assert!((r.total_volume() - 1.0).abs() < 1e-10);
        // Old vertices kept in place.
        for i in 0..m.n_vertices() {
            assert_eq!(m.vertex(i), r.vertex(i));
        }
    }

    #[test]
    fn puncture_pin_marks_nearest_vertex() {
        let m = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.25).unwrap();
        let set = SingularSet::Point { at: [0.5, 0.5, 0.0] };
        let p = puncture(&m, &set, PunctureMode::Pin).unwrap();
        assert_eq!(p.singular_vertices.len(), 1);
        let v = p.vertex(p.singular_vertices[0]);
        assert!((v[0] - 0.5).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12);
        assert_eq!(p.n_cells(), m.n_cells());
    }

    #[test]
    fn puncture_excise_removes_star() {
        let m = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.25).unwrap();
        let set = SingularSet::Point { at: [0.5, 0.5, 0.0] };
        // Vertex degree of an interior vertex in this pattern is 6.
        let target = m.nearest_vertex(&[0.5, 0.5, 0.0]).0;
        let degree = (0..m.n_cells()).filter(|&c| m.cell(c).contains(&target)).count();
        let p = puncture(&m, &set, PunctureMode::Excise).unwrap();
        assert_eq!(m.n_cells() - p.n_cells(), degree);
        p.validate().unwrap();
    }

    #[test]
    fn puncture_far_point_unresolved() {
        let m = build_mesh(&Domain::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.25).unwrap();
        let set = SingularSet::Point { at: [0.512, 0.5, 0.0] };
        // 0.012 off the nearest vertex with tol 0.025: resolved.
        assert!(puncture(&m, &set, PunctureMode::Pin).is_ok());
        let set_far = SingularSet::Point { at: [0.56, 0.44, 0.0] };
        assert!(matches!(
            puncture(&m, &set_far, PunctureMode::Pin),
            Err(MeshError::SetNotResolved { .. })
        ));
    }

    #[test]
    fn capacity_rings_hit_targets() {
        let targets = [0.2, 0.1, 0.05, 0.025];
        let radii = capacity_ring_radii(&targets, 8.0, 1.35);
        for t in targets {
            assert!(radii.iter().any(|&r| (r - t).abs() < 1e-14), "missing ring {t}");
        }
        for w in radii.windows(2) {
            assert!(w[1] > w[0]);
            assert!(w[1] / w[0] <= 1.35 + 1e-9);
        }
        assert!(radii[0] <= 0.025 / 4.0 + 1e-14);
    }

    #[test]
    fn conformal_rings_grow_outward() {
        let radii = conformal_ring_radii(0.1, 20.0, 1.0);
        assert!(radii.len() > 20);
        for w in radii.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(*radii.last().unwrap(), 20.0);
    }
}
