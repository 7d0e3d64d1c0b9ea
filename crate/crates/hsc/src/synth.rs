//! Seeded test-shape generators: icospheres with layered radial detail,
//! grid terrains, and a planar curve with a localized rough patch. All
//! output is a pure function of the arguments, so fixtures never need to
//! ship with the repository.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Mesh;

/// Unit icosahedron refined by `subdiv` rounds of midpoint subdivision,
/// every vertex re-projected to the unit sphere. 10*4^s + 2 vertices.
pub fn icosphere(subdiv: u32) -> Mesh {
    let p = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw: [[f64; 3]; 12] = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let mut vertices: Vec<[f64; 3]> = raw.iter().map(|v| normalize(*v)).collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<[f64; 3]>| -> u32 {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let va = vertices[a as usize];
                let vb = vertices[b as usize];
                vertices.push(normalize([va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]]));
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    Mesh::new(vertices, faces).expect("icosphere construction is always valid")
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn randn3(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mut draw = || {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    [draw(), draw(), draw()]
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let d = randn3(rng);
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if n > 1e-6 {
            return [d[0] / n, d[1] / n, d[2] / n];
        }
    }
}

/// Icosphere with a layered radial displacement field: a few smooth
/// low-frequency swells, a mid band, two narrow high-frequency lines, and
/// four localized ripple spots. `stretch` scales the axes afterwards for
/// an anisotropic variant. The total displacement stays below 0.75, so the
/// radius never collapses.
pub fn detail_sphere(subdiv: u32, seed: u64, stretch: Option<[f64; 3]>) -> Mesh {
    let base = icosphere(subdiv);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = base.vertices.len();
    let mut radius = vec![1.0; n];

    let add_wave = |radius: &mut Vec<f64>, freq: f64, amp: f64, rng: &mut ChaCha8Rng| {
        let d = random_direction(rng);
        let phase: f64 = rng.gen::<f64>() * 7.0;
        for (r, v) in radius.iter_mut().zip(&base.vertices) {
            let t = v[0] * d[0] + v[1] * d[1] + v[2] * d[2];
            *r += amp * (freq * t + phase).sin();
        }
    };

    for (freq, amp) in [(2.0, 0.15), (4.0, 0.08), (7.0, 0.04)] {
        add_wave(&mut radius, freq, amp, &mut rng);
    }
    for freq in [14.0, 19.0, 26.0, 35.0] {
        add_wave(&mut radius, freq, 0.02, &mut rng);
    }
    // narrow spectral lines well above any truncation cutoff in use
    for _ in 0..2 {
        add_wave(&mut radius, 50.0, 0.04, &mut rng);
    }
    for _ in 0..4 {
        let c = random_direction(&mut rng);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        for (r, v) in radius.iter_mut().zip(&base.vertices) {
            let dist = ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2))
                .sqrt();
            *r += sign * 0.08 * (-(dist / 0.18).powi(2)).exp() * (18.0 * dist).cos();
        }
    }

    let s = stretch.unwrap_or([1.0; 3]);
    let vertices = base
        .vertices
        .iter()
        .zip(&radius)
        .map(|(v, r)| [v[0] * r * s[0], v[1] * r * s[1], v[2] * r * s[2]])
        .collect();
    Mesh::new(vertices, base.faces).expect("radial displacement keeps vertices finite")
}

/// Regular nx-by-ny triangulated height field over the unit square, with a
/// seeded mix of smooth hills and one rough band.
pub fn terrain(nx: usize, ny: usize, seed: u64) -> Mesh {
    assert!(nx >= 2 && ny >= 2, "terrain needs at least a 2x2 grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<([f64; 2], f64, f64, f64)> = (0..6)
        .map(|i| {
            let angle: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let freq = 2.0 + 5.0 * i as f64 + rng.gen::<f64>() * 2.0;
            let amp = 0.18 / (1.0 + i as f64);
            let phase: f64 = rng.gen::<f64>() * 7.0;
            ([angle.cos(), angle.sin()], freq, amp, phase)
        })
        .collect();
    let band: f64 = 0.3 + rng.gen::<f64>() * 0.4;

    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = i as f64 / (nx - 1) as f64;
            let y = j as f64 / (ny - 1) as f64;
            let mut h = 0.0;
            for ([dx, dy], freq, amp, phase) in &waves {
                h += amp * (freq * (x * dx + y * dy) + phase).sin();
            }
            // rough horizontal band: short-wavelength detail in one strip
            let falloff = (-((y - band) / 0.08).powi(2)).exp();
            h += 0.05 * falloff * (40.0 * x).sin();
            vertices.push([x, y, h]);
        }
    }
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = (j * nx + i) as u32;
            let b = a + 1;
            let c = a + nx as u32;
            let d = c + 1;
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    Mesh::new(vertices, faces).expect("grid terrain is always valid")
}

/// Recenter so the bounding box straddles the origin; returns the applied
/// shift. Keeping coordinates near zero maximizes float headroom relative
/// to the bounding-box diagonal.
pub fn center_bbox(mesh: &mut Mesh) -> [f64; 3] {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &mesh.vertices {
        for c in 0..3 {
            lo[c] = lo[c].min(v[c]);
            hi[c] = hi[c].max(v[c]);
        }
    }
    let shift = [
        -(lo[0] + hi[0]) / 2.0,
        -(lo[1] + hi[1]) / 2.0,
        -(lo[2] + hi[2]) / 2.0,
    ];
    for v in &mut mesh.vertices {
        for c in 0..3 {
            v[c] += shift[c];
        }
    }
    shift
}

/// Small connected mesh (well under 2000 vertices) for round-trip and
/// smoke testing, centered on the origin. The seed picks both the family
/// and its randomization.
pub fn small_random_mesh(seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut mesh = match seed % 3 {
        0 => detail_sphere(2, seed, None),
        1 => {
            let nx = 12 + (rng.gen::<u64>() % 6) as usize;
            let ny = 11 + (rng.gen::<u64>() % 6) as usize;
            terrain(nx, ny, seed)
        }
        _ => {
            let stretch = if rng.gen::<bool>() {
                Some([1.3, 1.0, 0.75])
            } else {
                None
            };
            detail_sphere(3, seed, stretch)
        }
    };
    center_bbox(&mut mesh);
    mesh
}

/// The five-mesh comparison corpus: four detail spheres with different
/// seeds plus one anisotropically stretched variant, 2562 vertices each.
pub fn method_corpus() -> Vec<(String, Mesh)> {
    let mut out = Vec::new();
    for seed in [5u64, 11, 17, 23] {
        out.push((format!("sphere-{seed}"), detail_sphere(4, seed, None)));
    }
    out.push((
        "sphere-31-stretched".to_string(),
        detail_sphere(4, 31, Some([1.25, 1.0, 0.8])),
    ));
    out
}

/// Open planar curve, 240 samples on [0,1]: two smooth arcs plus a
/// broadband rough patch on s in [0.21, 0.39). The patch sums direction
/// frequencies 6..=89 with power-law amplitudes and golden-ratio phases
/// (no two harmonics align), Hann-windowed and rescaled to peak 0.35.
/// Returned as an n-by-3 coordinate matrix with z = 0.
pub fn detail_curve(n: usize) -> DMatrix<f64> {
    assert!(n >= 8, "curve needs enough samples to carry detail");
    let center = 0.3;
    let frac = 0.18;
    let (lo, hi) = (center - frac / 2.0, center + frac / 2.0);
    let golden = 0.618_033_988_749_894_9_f64;

    let s: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut y: Vec<f64> = s
        .iter()
        .map(|&t| 0.4 * (std::f64::consts::PI * t).sin() + 0.15 * (std::f64::consts::TAU * t).sin())
        .collect();

    let idx: Vec<usize> = (0..n).filter(|&i| s[i] >= lo && s[i] < hi).collect();
    let m = idx.len();
    let mut detail = vec![0.0; m];
    for f in 6..90 {
        let f = f as f64;
        let amp = (6.0 / f).powf(0.6);
        let phase = std::f64::consts::TAU * ((f * golden).fract());
        for (d, &i) in detail.iter_mut().zip(&idx) {
            *d += amp * (std::f64::consts::TAU * f * s[i] + phase).sin();
        }
    }
    for (w, d) in (0..m).zip(detail.iter_mut()) {
        let hann = 0.5 - 0.5 * (std::f64::consts::TAU * w as f64 / (m - 1) as f64).cos();
        *d *= hann;
    }
    let peak = detail.iter().fold(0.0f64, |a, &d| a.max(d.abs()));
    for (&i, d) in idx.iter().zip(&detail) {
        y[i] += 0.35 * d / peak;
    }

    DMatrix::from_fn(n, 3, |i, c| match c {
        0 => s[i],
        1 => y[i],
        _ => 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_adjacency;
    use std::collections::HashSet;

    fn is_connected(mesh: &Mesh) -> bool {
        let g = build_adjacency(mesh);
        let n = mesh.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &g.neighbors[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w as usize);
                }
            }
        }
        count == n
    }

    #[test]
    fn icosphere_counts_follow_the_refinement_formula() {
        for s in 0..4u32 {
            let m = icosphere(s);
            let pow = 4usize.pow(s);
            assert_eq!(m.vertices.len(), 10 * pow + 2);
            assert_eq!(m.faces.len(), 20 * pow);
            for v in &m.vertices {
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn icosphere_is_a_closed_surface() {
        // Euler characteristic 2 confirms midpoints are shared, not duplicated
        let m = icosphere(2);
        let mut edges = HashSet::new();
        for f in &m.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let (v, e, f) = (m.vertices.len() as i64, edges.len() as i64, m.faces.len() as i64);
        assert_eq!(v - e + f, 2);
    }

    #[test]
    fn detail_sphere_is_deterministic_per_seed() {
        let a = detail_sphere(2, 9, None);
        let b = detail_sphere(2, 9, None);
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.faces, b.faces);
        let c = detail_sphere(2, 10, None);
        assert_ne!(a.vertices, c.vertices);
    }

    #[test]
    fn detail_sphere_radius_stays_in_band() {
        let m = detail_sphere(3, 5, None);
        for v in &m.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!(r > 0.25 && r < 1.75, "radius {r} escaped the design band");
        }
    }

    #[test]
    fn stretch_scales_each_axis() {
        let plain = detail_sphere(1, 4, None);
        let stretched = detail_sphere(1, 4, Some([2.0, 1.0, 0.5]));
        for (a, b) in plain.vertices.iter().zip(&stretched.vertices) {
            assert!((b[0] - 2.0 * a[0]).abs() < 1e-14);
            assert!((b[1] - a[1]).abs() < 1e-14);
            assert!((b[2] - 0.5 * a[2]).abs() < 1e-14);
        }
    }

    #[test]
    fn terrain_shape_and_connectivity() {
        let m = terrain(7, 5, 3);
        assert_eq!(m.vertices.len(), 35);
        assert_eq!(m.faces.len(), 2 * 6 * 4);
        assert!(is_connected(&m));
        let again = terrain(7, 5, 3);
        assert_eq!(m.vertices, again.vertices);
    }

    #[test]
    fn small_random_meshes_are_valid_centered_and_bounded() {
        for seed in 0..12u64 {
            let m = small_random_mesh(seed);
            assert!(m.vertices.len() <= 2000, "seed {seed} too large");
            assert!(is_connected(&m), "seed {seed} not connected");
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for v in &m.vertices {
                for c in 0..3 {
                    lo[c] = lo[c].min(v[c]);
                    hi[c] = hi[c].max(v[c]);
                }
            }
            for c in 0..3 {
                assert!((lo[c] + hi[c]).abs() < 1e-12, "seed {seed} off-center");
            }
        }
    }

    #[test]
    fn corpus_has_five_distinct_meshes() {
        let corpus = method_corpus();
        assert_eq!(corpus.len(), 5);
        for (_, m) in &corpus {
            assert_eq!(m.vertices.len(), 2562);
        }
        for i in 0..corpus.len() {
            for j in i + 1..corpus.len() {
                assert_ne!(corpus[i].1.vertices, corpus[j].1.vertices);
            }
        }
    }

    #[test]
    fn curve_detail_stays_inside_its_window() {
        let n = 240;
        let u = detail_curve(n);
        assert_eq!(u.nrows(), n);
        let mut max_dev = 0.0f64;
        for i in 0..n {
            let s = i as f64 / (n - 1) as f64;
            let base =
                0.4 * (std::f64::consts::PI * s).sin() + 0.15 * (std::f64::consts::TAU * s).sin();
            let dev = (u[(i, 1)] - base).abs();
            if s < 0.21 || s >= 0.39 {
                assert!(dev < 1e-14, "sample {i} outside window was displaced");
            }
            max_dev = max_dev.max(dev);
            assert_eq!(u[(i, 2)], 0.0);
            assert!((u[(i, 0)] - s).abs() < 1e-15);
        }
        assert!((max_dev - 0.35).abs() < 1e-12, "peak detail {max_dev}");
    }
}
