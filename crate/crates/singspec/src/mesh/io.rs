//! ASCII mesh persistence.
//!
//! Format (bit-exact round trip on coordinates and indices):
//! ```text
//! smesh <dim> <nv> <nc>
//! <nv lines of dim coordinates, 17 significant digits>
//! <nc lines of dim+1 zero-based vertex indices>
//! singular: <indices>
//! boundary: <indices>
//! ```

use super::{Mesh, MeshError};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "smesh {} {} {}", mesh.dim, mesh.n_vertices(), mesh.n_cells())?;
    for i in 0..mesh.n_vertices() {
        let v = mesh.vertex(i);
        let line: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    for c in 0..mesh.n_cells() {
        let line: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    let fmt = |ids: &[usize]| {
        ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    };
    writeln!(out, "singular: {}", fmt(&mesh.singular_vertices))?;
    writeln!(out, "boundary: {}", fmt(&mesh.boundary_vertices))?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<Mesh, MeshError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();
    let bad = |line: usize, message: &str| MeshError::Format {
        line: line + 1,
        message: message.to_string(),
    };

    let (lno, header) = lines
        .next()
        .ok_or_else(|| bad(0, "empty file"))
        .and_then(|(n, l)| Ok((n, l?)))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "smesh" {
        return Err(bad(lno, "expected header `smesh <dim> <nv> <nc>`"));
    }
    let dim: usize = parts[1].parse().map_err(|_| bad(lno, "bad dim"))?;
    if !(1..=3).contains(&dim) {
        return Err(bad(lno, "dim must be 1, 2 or 3"));
    }
    let nv: usize = parts[2].parse().map_err(|_| bad(lno, "bad vertex count"))?;
    let nc: usize = parts[3].parse().map_err(|_| bad(lno, "bad cell count"))?;

    let mut coords = Vec::with_capacity(nv * dim);
    for _ in 0..nv {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| bad(usize::MAX - 1, "unexpected end of file in vertex block"))
            .and_then(|(n, l)| Ok((n, l?)))?;
        let vals: Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|_| bad(lno, "bad coordinate"))?;
        if vals.len() != dim {
            return Err(bad(lno, "wrong number of coordinates"));
        }
        coords.extend_from_slice(&vals);
    }
    let mut cells = Vec::with_capacity(nc * (dim + 1));
    for _ in 0..nc {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| bad(usize::MAX - 1, "unexpected end of file in cell block"))
            .and_then(|(n, l)| Ok((n, l?)))?;
        let vals: Result<Vec<usize>, _> =
            line.split_whitespace().map(str::parse::<usize>).collect();
        let vals = vals.map_err(|_| bad(lno, "bad cell index"))?;
        if vals.len() != dim + 1 {
            return Err(bad(lno, "wrong number of cell indices"));
        }
        for &v in &vals {
            if v >= nv {
                return Err(bad(lno, "cell index out of range"));
            }
        }
        cells.extend_from_slice(&vals);
    }
    let mut read_marker = |tag: &str| -> Result<Vec<usize>, MeshError> {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| bad(usize::MAX - 1, "missing marker line"))
            .and_then(|(n, l)| Ok((n, l?)))?;
        let rest = line
            .strip_prefix(tag)
            .ok_or_else(|| bad(lno, &format!("expected `{tag}` line")))?;
        let vals: Result<Vec<usize>, _> =
            rest.split_whitespace().map(str::parse::<usize>).collect();
        let vals = vals.map_err(|_| bad(lno, "bad marker index"))?;
        for &v in &vals {
            if v >= nv {
                return Err(bad(lno, "marker index out of range"));
            }
        }
        Ok(vals)
    };
    let singular = read_marker("singular:")?;
    let boundary = read_marker("boundary:")?;

    let mesh = Mesh {
        dim,
        coords,
        cells,
        singular_vertices: singular,
        boundary_vertices: boundary,
        grading: (0.5, 0),
        target_h: 0.0,
        label: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    // Volume validation with a line number pointing at the offending cell.
    for c in 0..mesh.n_cells() {
        if mesh.cell_volume(c) <= 0.0 {
            return Err(MeshError::Format {
                line: 1 + nv + c + 1,
                message: format!("cell {c} has non-positive volume"),
            });
        }
    }
    let mut mesh = mesh;
    mesh.target_h = mesh.max_cell_diameter();
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, grade_toward, Domain};
    use crate::geometry::SingularSet;

    #[test]
    fn round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.smesh");
        let m0 = build_mesh(&Domain::Disk { radius: 2.0 }, 0.5).unwrap();
        let set = SingularSet::Point { at: [0.0; 3] };
        let m = grade_toward(&m0, &set, 0.5, 2).unwrap();
        write_mesh(&m, &path).unwrap();
        let r = read_mesh(&path).unwrap();
        assert_eq!(m.coords, r.coords);
        assert_eq!(m.cells, r.cells);
        assert_eq!(m.singular_vertices, r.singular_vertices);
        assert_eq!(m.boundary_vertices, r.boundary_vertices);
    }

    #[test]
    fn hand_written_interval_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("interval.smesh");
        std::fs::write(
            &path,
            "smesh 1 3 2\n0.0e0\n5.0e-1\n1.0e0\n0 1\n1 2\nsingular:\nboundary: 0 2\n",
        )
        .unwrap();
        let m = read_mesh(&path).unwrap();
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.n_vertices(), 3);
        let reference = build_mesh(&Domain::Interval { a: 0.0, b: 1.0 }, 0.5).unwrap();
        assert_eq!(m.cells, reference.cells);
        assert_eq!(m.coords, reference.coords);
    }

    #[test]
    fn negative_volume_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.smesh");
        // Cell 1 0 has negative length.
        std::fs::write(
            &path,
            "smesh 1 3 2\n0.0e0\n5.0e-1\n1.0e0\n0 1\n2 1\nsingular:\nboundary: 0 2\n",
        )
        .unwrap();
        let err = read_mesh(&path).unwrap_err();
        match err {
            MeshError::Format { line, .. } => assert_eq!(line, 6),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad2.smesh");
        std::fs::write(&path, "mesh 2 3 1\n").unwrap();
        assert!(matches!(read_mesh(&path), Err(MeshError::Format { line: 1, .. })));
    }
}
