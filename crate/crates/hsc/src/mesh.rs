//! Triangle mesh container and ASCII OFF / OBJ interchange.

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Indexed triangle mesh. Faces hold 0-based vertex indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
}

impl Mesh {
    /// Validates index bounds, face non-degeneracy and coordinate finiteness.
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len() as u32;
        for (i, v) in vertices.iter().enumerate() {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::Format(format!("non-finite coordinate at vertex {i}")));
            }
        }
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&ix| ix >= n) {
                return Err(Error::Format(format!("face {i} references vertex out of range")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Format(format!("face {i} has repeated vertex indices")));
            }
        }
        Ok(Mesh { vertices, faces })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Coordinate matrix U with one row per vertex, columns X, Y, Z.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.vertices.len(), 3, |i, j| self.vertices[i][j])
    }

    pub fn set_coordinates(&mut self, u: &DMatrix<f64>) {
        assert_eq!(u.nrows(), self.vertices.len());
        for i in 0..u.nrows() {
            self.vertices[i] = [u[(i, 0)], u[(i, 1)], u[(i, 2)]];
        }
    }

    /// Sum of triangle areas; degenerate faces contribute zero.
    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = [
                    self.vertices[f[0] as usize],
                    self.vertices[f[1] as usize],
                    self.vertices[f[2] as usize],
                ];
                let u = sub(b, a);
                let v = sub(c, a);
                0.5 * norm(cross(u, v))
            })
            .sum()
    }

    /// Diagonal of the axis-aligned bounding box; 0 for an empty mesh.
    pub fn bbox_diagonal(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for d in 0..3 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        norm([hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]])
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses ASCII OFF. Polygonal faces are fan-triangulated from the first
/// listed vertex, so the output contains triangles only.
pub fn parse_off(text: &str) -> Result<Mesh> {
    // Meaningful lines with their 1-based numbers; '#' starts a comment.
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            None
        } else {
            Some((i + 1, s))
        }
    });

    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    if header != "OFF" {
        return Err(parse_err(hline, format!("expected OFF header, found '{header}'")));
    }
    let (cline, counts) = lines
        .next()
        .ok_or_else(|| parse_err(hline, "missing counts line"))?;
    let counts: Vec<&str> = counts.split_whitespace().collect();
    if counts.len() < 2 {
        return Err(parse_err(cline, "counts line needs vertex and face counts"));
    }
    let nv: usize = counts[0]
        .parse()
        .map_err(|_| parse_err(cline, format!("bad vertex count '{}'", counts[0])))?;
    let nf: usize = counts[1]
        .parse()
        .map_err(|_| parse_err(cline, format!("bad face count '{}'", counts[1])))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, s) = lines
            .next()
            .ok_or_else(|| parse_err(cline, format!("expected {nv} vertex lines")))?;
        let mut it = s.split_whitespace();
        let mut v = [0.0; 3];
        for c in &mut v {
            let tok = it.next().ok_or_else(|| parse_err(ln, "vertex line needs 3 coordinates"))?;
            *c = tok
                .parse()
                .map_err(|_| parse_err(ln, format!("non-numeric coordinate '{tok}'")))?;
        }
        vertices.push(v);
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, s) = lines
            .next()
            .ok_or_else(|| parse_err(cline, format!("expected {nf} face lines")))?;
        let mut it = s.split_whitespace();
        let k: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "face line needs a vertex count"))?;
        if k < 3 {
            return Err(parse_err(ln, format!("face with {k} vertices")));
        }
        let mut poly = Vec::with_capacity(k);
        for _ in 0..k {
            let tok = it.next().ok_or_else(|| parse_err(ln, "face line short of indices"))?;
            let ix: u32 = tok
                .parse()
                .map_err(|_| parse_err(ln, format!("non-numeric face index '{tok}'")))?;
            if ix as usize >= nv {
                return Err(parse_err(ln, format!("face index {ix} out of range (n={nv})")));
            }
            poly.push(ix);
        }
        for t in 1..k - 1 {
            faces.push([poly[0], poly[t], poly[t + 1]]);
        }
    }
    Mesh::new(vertices, faces)
}

/// Parses the `v`/`f` subset of Wavefront OBJ; texture and normal records
/// are ignored, `f` entries may carry `/vt/vn` suffixes.
pub fn parse_obj(text: &str) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        let mut it = s.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut v = [0.0; 3];
                for c in &mut v {
                    let tok = it.next().ok_or_else(|| parse_err(ln, "v record needs 3 coordinates"))?;
                    *c = tok
                        .parse()
                        .map_err(|_| parse_err(ln, format!("non-numeric coordinate '{tok}'")))?;
                }
                vertices.push(v);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let ix: i64 = first
                        .parse()
                        .map_err(|_| parse_err(ln, format!("bad face index '{tok}'")))?;
                    if ix < 1 || ix as usize > vertices.len() {
                        return Err(parse_err(ln, format!("face index {ix} out of range")));
                    }
                    poly.push((ix - 1) as u32);
                }
                if poly.len() < 3 {
                    return Err(parse_err(ln, "face with fewer than 3 vertices"));
                }
                for t in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[t], poly[t + 1]]);
                }
            }
            _ => {}
        }
    }
    Mesh::new(vertices, faces)
}

/// Reads a mesh from a path, dispatching on the `.obj` extension (anything
/// else is treated as OFF).
pub fn read_mesh(path: &std::path::Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj")) {
        parse_obj(&text)
    } else {
        parse_off(&text)
    }
}

/// Serializes to ASCII OFF with fixed decimal precision and LF endings.
pub fn write_off(mesh: &Mesh, precision: usize) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!("{} {} 0\n", mesh.vertices.len(), mesh.faces.len()));
    for v in &mesh.vertices {
        out.push_str(&format!(
            "{:.p$} {:.p$} {:.p$}\n",
            v[0],
            v[1],
            v[2],
            p = precision
        ));
    }
    for f in &mesh.faces {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    out
}

pub fn write_mesh(mesh: &Mesh, path: &std::path::Path, precision: usize) -> Result<()> {
    std::fs::write(path, write_off(mesh, precision)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: &str = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

    #[test]
    fn parses_minimal_triangle() {
        let m = parse_off(TRI).unwrap();
        assert_eq!(m.vertices.len(), 3);
        assert_eq!(m.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn quad_fan_splits_into_two_triangles() {
        let off = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let m = parse_off(off).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn out_of_range_index_reports_line() {
        let off = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n";
        match parse_off(off) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn off_round_trip_at_precision_9() {
        let m = parse_off(TRI).unwrap();
        let again = parse_off(&write_off(&m, 9)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn fractional_coordinate_rounds_at_precision_3() {
        let m = Mesh::new(vec![[1.0 / 3.0, 0.0, 0.0]], vec![]).unwrap();
        let text = write_off(&m, 3);
        assert!(text.contains("0.333 0.000 0.000"), "{text}");
    }

    #[test]
    fn empty_mesh_round_trips() {
        let m = Mesh::new(vec![], vec![]).unwrap();
        let again = parse_off(&write_off(&m, 6)).unwrap();
        assert_eq!(again.vertices.len(), 0);
        assert_eq!(again.faces.len(), 0);
    }

    #[test]
    fn unit_right_triangle_area() {
        let m = parse_off(TRI).unwrap();
        assert!((m.surface_area() - 0.5).abs() < 1e-15);
        let mut two = m.clone();
        two.faces.push([0, 1, 2]);
        assert!((two.surface_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collinear_face_contributes_zero_area() {
        let m = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.surface_area(), 0.0);
    }

    #[test]
    fn area_is_rigid_motion_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let verts: Vec<[f64; 3]> = (0..12).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
            let faces: Vec<[u32; 3]> = (0..8)
                .map(|_| loop {
                    let f: [u32; 3] = std::array::from_fn(|_| rng.gen_range(0..12u32));
                    if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
                        break f;
                    }
                })
                .collect();
            let m = Mesh::new(verts.clone(), faces.clone()).unwrap();
            // random rotation from a normalized quaternion, plus translation
            let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let qn = (q.iter().map(|x| x * x).sum::<f64>()).sqrt();
            let [w, x, y, z] = [q[0] / qn, q[1] / qn, q[2] / qn, q[3] / qn];
            let rot = [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ];
            let t: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
            let moved: Vec<[f64; 3]> = verts
                .iter()
                .map(|v| {
                    std::array::from_fn(|r| {
                        rot[r][0] * v[0] + rot[r][1] * v[1] + rot[r][2] * v[2] + t[r]
                    })
                })
                .collect();
            let m2 = Mesh::new(moved, faces).unwrap();
            let (a, b) = (m.surface_area(), m2.surface_area());
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn obj_subset_parses_and_fan_splits() {
        let obj = "# comment\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1 4/4/1\n";
        let m = parse_obj(obj).unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn rejects_nan_coordinates() {
        assert!(Mesh::new(vec![[f64::NAN, 0.0, 0.0]], vec![]).is_err());
    }
}
