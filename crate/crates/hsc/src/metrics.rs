//! Reconstruction quality: per-vertex visual error (displacement plus
//! geometric-Laplacian difference) and plain RMS.

use crate::graph::{build_adjacency, AdjacencyGraph};
use crate::mesh::Mesh;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub per_vertex: Vec<f64>,
    /// Sum of per-vertex errors divided by the original surface area.
    pub global: f64,
    /// Plain coordinate RMS, sqrt(sum ||pi - pi~||^2 / n).
    pub rms: f64,
    /// Unnormalized sum of per-vertex errors; reported because the global
    /// value normalizes by both vertex count and area.
    pub raw_sum: f64,
}

/// Vertex minus its inverse-edge-length-weighted neighbor average; zero for
/// an isolated vertex (the empty sum).
pub fn gl_term(mesh: &Mesh, graph: &AdjacencyGraph, i: usize) -> Result<[f64; 3]> {
    let pi = mesh.vertices[i];
    let nbrs = &graph.neighbors[i];
    if nbrs.is_empty() {
        return Ok([0.0; 3]);
    }
    let mut wsum = 0.0;
    let mut acc = [0.0; 3];
    for &jn in nbrs {
        let pj = mesh.vertices[jn as usize];
        let d = dist(pi, pj);
        if d <= 0.0 {
            return Err(Error::Numerical(format!(
                "zero-length edge between vertices {i} and {jn}"
            )));
        }
        let w = 1.0 / d;
        wsum += w;
        for c in 0..3 {
            acc[c] += w * pj[c];
        }
    }
    Ok([
        pi[0] - acc[0] / wsum,
        pi[1] - acc[1] / wsum,
        pi[2] - acc[2] / wsum,
    ])
}

/// Per-vertex error (||pi - pi~|| + ||GL(pi) - GL(pi~)||) / (2n), summed
/// and normalized by the original mesh's surface area for the global
/// figure. Each mesh's GL uses its own edge lengths.
pub fn visual_error(original: &Mesh, reconstructed: &Mesh) -> Result<ErrorReport> {
    if original.faces != reconstructed.faces || original.vertices.len() != reconstructed.vertices.len()
    {
        return Err(Error::Format("connectivity mismatch between meshes".into()));
    }
    let n = original.vertices.len();
    let graph = build_adjacency(original);
    let two_n = 2.0 * n as f64;

    let mut per_vertex = Vec::with_capacity(n);
    let mut sq_sum = 0.0;
    for i in 0..n {
        let a = original.vertices[i];
        let b = reconstructed.vertices[i];
        let disp = dist(a, b);
        sq_sum += disp * disp;
        let ga = gl_term(original, &graph, i)?;
        let gb = gl_term(reconstructed, &graph, i)?;
        let gd = ((ga[0] - gb[0]).powi(2) + (ga[1] - gb[1]).powi(2) + (ga[2] - gb[2]).powi(2)).sqrt();
        per_vertex.push((disp + gd) / two_n);
    }
    let raw_sum: f64 = per_vertex.iter().sum();
    let area = original.surface_area();
    if area <= 0.0 {
        return Err(Error::Numerical("original mesh has zero surface area".into()));
    }
    Ok(ErrorReport {
        global: raw_sum / area,
        rms: (sq_sum / n as f64).sqrt(),
        raw_sum,
        per_vertex,
    })
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
