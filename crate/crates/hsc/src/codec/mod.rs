//! Block codec: per-block sparse coding over a Laplacian eigenbasis that
//! is optionally extended by potential-shifted bases, plus scalar
//! quantization and rate accounting. The container lives in
//! [`container`]; raw bit plumbing in [`bits`].

pub mod bits;
pub mod container;

use nalgebra::DMatrix;

use crate::graph::{build_adjacency, combinatorial_laplacian, extract_submesh, partition, PartitionSet};
use crate::mesh::Mesh;
use crate::sparse::{build_dictionary, reconstruct, somp, SparseCode};
use crate::spectral::{hamiltonian, linear_potential_placed, SpectralBasis};
use crate::{Error, Result};

/// Relative residual below which a block is treated as exactly
/// represented; the potential search is skipped since there is no error
/// profile left to exploit.
const EXACT_RESIDUAL: f64 = 1e-10;

/// Log-spaced search grid for the potential strength, scaled by the mean
/// eigenvalue of the block operator so the same factors work at any mesh
/// density. Points are rounded through f32 up front: the stored and the
/// searched value must be the same number or the decoder would rebuild a
/// slightly different basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MuGrid {
    pub lo_factor: f64,
    pub hi_factor: f64,
    pub count: usize,
}

impl Default for MuGrid {
    fn default() -> Self {
        MuGrid {
            lo_factor: 1e-2,
            hi_factor: 1e3,
            count: 12,
        }
    }
}

impl MuGrid {
    pub fn points(&self, mean_eigenvalue: f64) -> Vec<f64> {
        if mean_eigenvalue <= 0.0 || self.count == 0 {
            return Vec::new();
        }
        let lo = (self.lo_factor * mean_eigenvalue).ln();
        let hi = (self.hi_factor * mean_eigenvalue).ln();
        (0..self.count)
            .map(|i| {
                let t = if self.count == 1 {
                    0.0
                } else {
                    i as f64 / (self.count - 1) as f64
                };
                ((lo + t * (hi - lo)).exp() as f32) as f64
            })
            .collect()
    }

    pub fn id(&self) -> String {
        format!("log{}x[{:e},{:e}]", self.count, self.lo_factor, self.hi_factor)
    }
}

#[derive(Debug, Clone)]
pub struct EncoderConfig {
    /// Fraction of the raw 3n*32-bit coordinate budget, in (0, 1].
    pub target_ratio: f64,
    pub block_size: u16,
    pub mu_grid: MuGrid,
    pub max_subdicts: u8,
    /// Minimum relative residual improvement to keep an appended basis.
    pub improvement_tolerance: f64,
    /// Bits per stored coefficient; 32 bypasses quantization.
    pub coefficient_bits: u8,
    pub coordinate_bits: u8,
    pub mu_bits: u8,
    /// Relabel vertices into per-block error order instead of storing the
    /// permutation records.
    pub reorder_in_place: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            target_ratio: 1.0,
            block_size: 300,
            mu_grid: MuGrid::default(),
            max_subdicts: 4,
            improvement_tolerance: 1e-3,
            coefficient_bits: 32,
            coordinate_bits: 32,
            mu_bits: 32,
            reorder_in_place: false,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "target_ratio {} outside (0, 1]",
                self.target_ratio
            )));
        }
        // merged blocks can reach twice the target and must fit u16 fields
        if self.block_size == 0 || self.block_size > 32767 {
            return Err(Error::Config(format!(
                "block_size {} outside [1, 32767]",
                self.block_size
            )));
        }
        if !(2..=32).contains(&self.coefficient_bits) {
            return Err(Error::Config(format!(
                "coefficient_bits {} outside [2, 32]",
                self.coefficient_bits
            )));
        }
        if self.coordinate_bits != 32 {
            return Err(Error::Config(
                "only 32-bit coordinate ranges are supported".into(),
            ));
        }
        if self.mu_bits != 32 {
            return Err(Error::Config("only 32-bit mu storage is supported".into()));
        }
        if self.mu_grid.count == 0 && self.max_subdicts > 0 {
            return Err(Error::Config("mu grid is empty".into()));
        }
        if !self.improvement_tolerance.is_finite() || self.improvement_tolerance < 0.0 {
            return Err(Error::Config("improvement_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Everything the rate formula needs. `m` is absent for plain basis
/// truncation, where no support set is transmitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionBudget {
    /// Vertices covered.
    pub n: u64,
    /// Bits per raw coordinate scalar.
    pub k: u64,
    /// Retained atoms (sparsity or truncation length).
    pub n_d: u64,
    /// Bits per stored coefficient.
    pub k_d: u64,
    /// Dictionary size, when a support set must be transmitted.
    pub m: Option<u64>,
    /// Stored potential strengths.
    pub n_mu: u64,
    /// Bits per stored potential strength.
    pub k_mu: u64,
}

pub fn ceil_log2(m: u64) -> u32 {
    assert!(m >= 1, "ceil_log2 of zero");
    if m == 1 {
        0
    } else {
        64 - (m - 1).leading_zeros()
    }
}

/// Cheaper of the two support encodings: an m-bit membership vector or
/// n_d explicit indices.
pub fn support_bits(m: u64, n_d: u64) -> u64 {
    m.min(n_d * ceil_log2(m) as u64)
}

/// Stored bits over raw bits. The numerator gains the support-set term
/// only when a dictionary is involved.
pub fn compression_ratio(b: &CompressionBudget) -> f64 {
    let mut numer = 3 * b.n_d * b.k_d + b.n_mu * b.k_mu;
    if let Some(m) = b.m {
        numer += support_bits(m, b.n_d);
    }
    numer as f64 / (3 * b.n * b.k) as f64
}

/// Largest sparsity whose worst-case block cost (all `max_subdicts`
/// strengths assumed stored) fits the target fraction of the raw budget.
/// A full-rate target always gets the complete basis: the side terms
/// would otherwise make ratio 1.0 unreachable by construction.
pub fn sparsity_for_ratio(n_b: usize, config: &EncoderConfig) -> Result<usize> {
    if config.target_ratio >= 1.0 {
        return Ok(n_b);
    }
    let m = (1 + config.max_subdicts as u64) * n_b as u64;
    let budget = config.target_ratio * (3 * n_b as u64 * 32) as f64;
    let fixed = config.max_subdicts as u64 * config.mu_bits as u64;
    let mut best = 0usize;
    for k in 1..=n_b {
        let cost = 3 * k as u64 * config.coefficient_bits as u64
            + support_bits(m, k as u64)
            + fixed;
        if cost as f64 <= budget {
            best = k;
        } else {
            break;
        }
    }
    if best == 0 {
        return Err(Error::Config(format!(
            "target_ratio {} cannot fit one atom in a {n_b}-vertex block; \
             raise the ratio or the block size",
            config.target_ratio
        )));
    }
    Ok(best)
}

/// Uniform scalar quantization per channel: bin index against the stored
/// f32 range, midpoint dequantization. The range is rounded outward so
/// every coefficient lands inside it; a zero-width range pins the whole
/// channel to its single value. 32 bits stores the f32 rounding of each
/// coefficient directly.
pub fn quantize(coefficients: &DMatrix<f64>, bits: u8) -> (Vec<[u32; 3]>, [[f32; 2]; 3]) {
    assert!((2..=32).contains(&bits), "bits {bits} outside [2, 32]");
    let k = coefficients.nrows();
    let mut ranges = [[0.0f32; 2]; 3];
    for c in 0..3 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..k {
            lo = lo.min(coefficients[(r, c)]);
            hi = hi.max(coefficients[(r, c)]);
        }
        if k == 0 {
            lo = 0.0;
            hi = 0.0;
        }
        if lo == hi {
            // constant channel: zero-width range, dequantizes to this value
            let v = lo as f32;
            ranges[c] = [v, v];
            continue;
        }
        let mut l = lo as f32;
        if (l as f64) > lo {
            l = l.next_down();
        }
        let mut h = hi as f32;
        if (h as f64) < hi {
            h = h.next_up();
        }
        ranges[c] = [l, h];
    }
    let mut levels = Vec::with_capacity(k);
    for r in 0..k {
        let mut row = [0u32; 3];
        for c in 0..3 {
            let v = coefficients[(r, c)];
            row[c] = if bits == 32 {
                (v as f32).to_bits()
            } else {
                let lo = ranges[c][0] as f64;
                let span = ranges[c][1] as f64 - lo;
                if span <= 0.0 {
                    0
                } else {
                    let steps = (1u64 << bits) as f64;
                    let q = ((v - lo) / span * steps).floor() as u64;
                    q.min((1u64 << bits) - 1) as u32
                }
            };
        }
        levels.push(row);
    }
    (levels, ranges)
}

pub fn dequantize(levels: &[[u32; 3]], ranges: &[[f32; 2]; 3], bits: u8) -> DMatrix<f64> {
    assert!((2..=32).contains(&bits), "bits {bits} outside [2, 32]");
    DMatrix::from_fn(levels.len(), 3, |r, c| {
        if bits == 32 {
            f32::from_bits(levels[r][c]) as f64
        } else {
            let lo = ranges[c][0] as f64;
            let span = ranges[c][1] as f64 - lo;
            lo + (levels[r][c] as f64 + 0.5) * span / (1u64 << bits) as f64
        }
    })
}

/// Coefficients of the first `n_d` basis vectors; exact when the basis is
/// complete because the columns are orthonormal.
pub fn truncation_code(u_block: &DMatrix<f64>, basis: &SpectralBasis, n_d: usize) -> SparseCode {
    assert!(n_d <= basis.n(), "truncation beyond basis size");
    let b = basis.vectors.columns(0, n_d);
    SparseCode {
        support: (0..n_d as u32).collect(),
        coefficients: b.tr_mul(u_block),
        skipped: Vec::new(),
    }
}

fn ascending_stable_order(values: &[f64]) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..values.len() as u32).collect();
    idx.sort_by(|&a, &b| {
        values[a as usize]
            .partial_cmp(&values[b as usize])
            .expect("non-finite error value")
    });
    idx
}

fn per_vertex_error(u: &DMatrix<f64>, approx: &DMatrix<f64>) -> Vec<f64> {
    (0..u.nrows())
        .map(|i| {
            let mut s = 0.0;
            for c in 0..3 {
                let d = u[(i, c)] - approx[(i, c)];
                s += d * d;
            }
            s.sqrt()
        })
        .collect()
}

/// Vertices sorted by how badly a k-sparse code over the plain basis
/// reconstructs them, worst last. Ties keep ascending index order.
pub fn vertex_error_permutation(
    u_block: &DMatrix<f64>,
    basis: &SpectralBasis,
    k: usize,
) -> Result<Vec<u32>> {
    let dict = build_dictionary(&[basis])?;
    let code = somp(u_block, &dict, k);
    let approx = reconstruct(&dict, &code);
    Ok(ascending_stable_order(&per_vertex_error(u_block, &approx)))
}

#[derive(Debug)]
pub struct MuSearchOutcome {
    /// Index of the winning grid point.
    pub index: usize,
    pub mu: f64,
    /// Frobenius residual of the winning joint code.
    pub residual: f64,
    /// Code over [existing bases | winning candidate], in that atom order.
    pub code: SparseCode,
}

/// Evaluates every candidate basis appended to the existing ones and
/// keeps the lowest residual; ties go to the earliest (smallest) entry.
pub fn search_mu_cached(
    u_block: &DMatrix<f64>,
    existing: &[&SpectralBasis],
    k: usize,
    candidates: &[(f64, SpectralBasis)],
) -> Result<MuSearchOutcome> {
    if candidates.is_empty() {
        return Err(Error::Config("mu search over an empty grid".into()));
    }
    let mut best: Option<MuSearchOutcome> = None;
    for (i, (mu, psi)) in candidates.iter().enumerate() {
        let mut bases: Vec<&SpectralBasis> = existing.to_vec();
        bases.push(psi);
        let dict = build_dictionary(&bases)?;
        let code = somp(u_block, &dict, k);
        let residual = (u_block - reconstruct(&dict, &code)).norm();
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(MuSearchOutcome {
                index: i,
                mu: *mu,
                residual,
                code,
            });
        }
    }
    Ok(best.expect("nonempty grid yields a winner"))
}

/// One-shot search that builds each candidate basis from the operator; the
/// encoder itself precomputes the grid once per block and calls the cached
/// form round after round.
pub fn search_mu(
    u_block: &DMatrix<f64>,
    laplacian: &DMatrix<f64>,
    potential: &crate::spectral::Potential,
    existing: &[&SpectralBasis],
    k: usize,
    mu_grid: &[f64],
) -> Result<MuSearchOutcome> {
    let candidates = grid_bases(laplacian, potential, mu_grid)?;
    search_mu_cached(u_block, existing, k, &candidates)
}

fn grid_bases(
    laplacian: &DMatrix<f64>,
    potential: &crate::spectral::Potential,
    mu_grid: &[f64],
) -> Result<Vec<(f64, SpectralBasis)>> {
    mu_grid
        .iter()
        .map(|&mu| {
            let op = hamiltonian(laplacian, &potential.clone().with_mu(mu));
            Ok((mu, SpectralBasis::of(&op)?))
        })
        .collect()
}

/// One encoded block: stored strengths, the error-order permutation that
/// places the potential (absent when vertices were relabeled instead),
/// the ascending support set, per-channel coefficient ranges, and the
/// quantized coefficient rows in support order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedBlock {
    pub k: u16,
    pub mus: Vec<f32>,
    pub permutation: Option<Vec<u16>>,
    pub support: Vec<u32>,
    pub ranges: [[f32; 2]; 3],
    pub levels: Vec<[u32; 3]>,
}

impl CompressedBlock {
    /// Dictionary size implied by the stored strength count.
    pub fn dictionary_size(&self, n_b: usize) -> u64 {
        (1 + self.mus.len() as u64) * n_b as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedMesh {
    pub version: u16,
    pub n: u32,
    pub faces: Vec<[u32; 3]>,
    pub block_size: u16,
    pub coefficient_bits: u8,
    /// Vertices were relabeled into contiguous per-block error order.
    pub reordered: bool,
    /// Per-block vertex counts in block order. Serialized only in
    /// reordered streams; recomputed from connectivity otherwise.
    pub block_sizes: Vec<u16>,
    pub blocks: Vec<CompressedBlock>,
    /// Encoder grid echo; not serialized.
    pub mu_grid_id: Option<String>,
}

impl CompressedMesh {
    /// Geometry-payload bits of one block by the rate formula.
    pub fn block_geometry_bits(&self, i: usize) -> u64 {
        let b = &self.blocks[i];
        let m = b.dictionary_size(self.block_sizes[i] as usize);
        3 * b.k as u64 * self.coefficient_bits as u64
            + support_bits(m, b.k as u64)
            + b.mus.len() as u64 * 32
    }

    /// Achieved ratio: total geometry payload over the raw 32-bit budget.
    pub fn achieved_ratio(&self) -> f64 {
        let numer: u64 = (0..self.blocks.len())
            .map(|i| self.block_geometry_bits(i))
            .sum();
        numer as f64 / (3 * self.n as u64 * 32) as f64
    }
}

fn sorted_by_support(code: &SparseCode) -> (Vec<u32>, DMatrix<f64>) {
    let mut order: Vec<usize> = (0..code.support.len()).collect();
    order.sort_by_key(|&i| code.support[i]);
    let support: Vec<u32> = order.iter().map(|&i| code.support[i]).collect();
    let coeffs = DMatrix::from_fn(code.support.len(), 3, |r, c| {
        code.coefficients[(order[r], c)]
    });
    (support, coeffs)
}

/// Runs the whole per-block pipeline. `fixed_order` pins the potential
/// placement (used after relabeling, where block-local index order is
/// already error order); otherwise the order is computed from the plain
/// basis code's per-vertex error.
fn encode_block(
    sub: &Mesh,
    config: &EncoderConfig,
    fixed_order: Option<&[u32]>,
) -> Result<CompressedBlock> {
    let n_b = sub.vertices.len();
    let u = sub.coordinate_matrix();
    let l = combinatorial_laplacian(&build_adjacency(sub));
    let phi = SpectralBasis::of(&l)?;
    let k_target = sparsity_for_ratio(n_b, config)?;

    let phi_dict = build_dictionary(&[&phi])?;
    let mut code = somp(&u, &phi_dict, k_target);
    let approx = reconstruct(&phi_dict, &code);
    let mut residual = (&u - &approx).norm();
    let u_norm = u.norm();

    let mut order: Vec<u32> = (0..n_b as u32).collect();
    let mut mus: Vec<f64> = Vec::new();
    let mut bases: Vec<SpectralBasis> = vec![phi];

    let representable = residual <= EXACT_RESIDUAL * u_norm.max(1e-300);
    if !representable && config.max_subdicts > 0 && n_b >= 2 {
        order = match fixed_order {
            Some(o) => o.to_vec(),
            None => ascending_stable_order(&per_vertex_error(&u, &approx)),
        };
        let potential = linear_potential_placed(&order);
        let grid = config.mu_grid.points(bases[0].mean_eigenvalue());
        if !grid.is_empty() {
            let candidates = grid_bases(&l, &potential, &grid)?;
            for _ in 0..config.max_subdicts {
                let existing: Vec<&SpectralBasis> = bases.iter().collect();
                let outcome = search_mu_cached(&u, &existing, k_target, &candidates)?;
                let improvement = (residual - outcome.residual) / residual;
                if improvement <= config.improvement_tolerance {
                    break;
                }
                mus.push(outcome.mu);
                bases.push(candidates[outcome.index].1.clone());
                residual = outcome.residual;
                code = outcome.code;
                if residual <= EXACT_RESIDUAL * u_norm.max(1e-300) {
                    break;
                }
            }
        }
    }
    let (support, coeffs) = sorted_by_support(&code);
    let (levels, ranges) = quantize(&coeffs, config.coefficient_bits);
    let permutation = (!mus.is_empty() && !config.reorder_in_place)
        .then(|| order.iter().map(|&v| v as u16).collect());
    Ok(CompressedBlock {
        k: code.k() as u16,
        mus: mus.iter().map(|&m| m as f32).collect(),
        permutation,
        support,
        ranges,
        levels,
    })
}

/// Ascending-error local order from the plain-basis code alone; the first
/// pass of relabeling encodes, which must fix vertex order before the
/// full pipeline runs on the relabeled block.
fn initial_error_order(sub: &Mesh, config: &EncoderConfig) -> Result<Vec<u32>> {
    let u = sub.coordinate_matrix();
    let l = combinatorial_laplacian(&build_adjacency(sub));
    let phi = SpectralBasis::of(&l)?;
    let k_target = sparsity_for_ratio(sub.vertices.len(), config)?;
    vertex_error_permutation(&u, &phi, k_target)
}

pub fn encode(mesh: &Mesh, config: &EncoderConfig) -> Result<CompressedMesh> {
    config.validate()?;
    let n = mesh.vertices.len();
    if n == 0 {
        return Err(Error::Config("cannot encode an empty mesh".into()));
    }
    let graph = build_adjacency(mesh);
    let parts = partition(&graph, config.block_size as usize);

    if config.reorder_in_place {
        encode_reordered(mesh, config, &parts)
    } else {
        let mut blocks = Vec::with_capacity(parts.blocks.len());
        let mut block_sizes = Vec::with_capacity(parts.blocks.len());
        for b in 0..parts.blocks.len() {
            let (sub, _globals) = extract_submesh(mesh, &parts, b);
            let block = encode_block(&sub, config, None)?;
            block_sizes.push(sub.vertices.len() as u16);
            blocks.push(block);
        }
        Ok(CompressedMesh {
            version: container::FORMAT_VERSION,
            n: n as u32,
            faces: mesh.faces.clone(),
            block_size: config.block_size,
            coefficient_bits: config.coefficient_bits,
            reordered: false,
            block_sizes,
            blocks,
            mu_grid_id: Some(config.mu_grid.id()),
        })
    }
}

/// Relabeling mode: a first pass fixes each block's error order, vertices
/// are renamed so blocks are contiguous ranges in that order, and the
/// pipeline then runs on the relabeled blocks with identity placement. No
/// permutation records are stored; the decoder reads the block-size table
/// instead of re-partitioning.
fn encode_reordered(
    mesh: &Mesh,
    config: &EncoderConfig,
    parts: &PartitionSet,
) -> Result<CompressedMesh> {
    let n = mesh.vertices.len();
    let mut new_of_old = vec![u32::MAX; n];
    let mut relabeled_subs = Vec::with_capacity(parts.blocks.len());
    let mut offset = 0u32;
    for b in 0..parts.blocks.len() {
        let (sub, globals) = extract_submesh(mesh, parts, b);
        let order = initial_error_order(&sub, config)?;
        let n_b = sub.vertices.len();
        let mut inv = vec![0u32; n_b];
        for (rank, &local) in order.iter().enumerate() {
            inv[local as usize] = rank as u32;
            new_of_old[globals[local as usize] as usize] = offset + rank as u32;
        }
        let vertices: Vec<[f64; 3]> = order.iter().map(|&l| sub.vertices[l as usize]).collect();
        let faces: Vec<[u32; 3]> = sub
            .faces
            .iter()
            .map(|f| [inv[f[0] as usize], inv[f[1] as usize], inv[f[2] as usize]])
            .collect();
        relabeled_subs.push(Mesh { vertices, faces });
        offset += n_b as u32;
    }
    debug_assert!(new_of_old.iter().all(|&x| x != u32::MAX));

    let faces: Vec<[u32; 3]> = mesh
        .faces
        .iter()
        .map(|f| {
            [
                new_of_old[f[0] as usize],
                new_of_old[f[1] as usize],
                new_of_old[f[2] as usize],
            ]
        })
        .collect();

    let mut blocks = Vec::with_capacity(relabeled_subs.len());
    let mut block_sizes = Vec::with_capacity(relabeled_subs.len());
    for sub in &relabeled_subs {
        let identity: Vec<u32> = (0..sub.vertices.len() as u32).collect();
        let block = encode_block(sub, config, Some(&identity))?;
        block_sizes.push(sub.vertices.len() as u16);
        blocks.push(block);
    }
    Ok(CompressedMesh {
        version: container::FORMAT_VERSION,
        n: n as u32,
        faces,
        block_size: config.block_size,
        coefficient_bits: config.coefficient_bits,
        reordered: true,
        block_sizes,
        blocks,
        mu_grid_id: Some(config.mu_grid.id()),
    })
}

/// Block membership for decoding: the stored size table for relabeled
/// streams, otherwise the deterministic partitioner re-run on the stored
/// connectivity.
pub fn decode_partition(cm: &CompressedMesh) -> Result<PartitionSet> {
    let n = cm.n as usize;
    if cm.reordered {
        let total: usize = cm.block_sizes.iter().map(|&s| s as usize).sum();
        if total != n {
            return Err(Error::Format(format!(
                "block sizes sum to {total}, header says {n} vertices"
            )));
        }
        let mut assignment = vec![0u32; n];
        let mut blocks = Vec::with_capacity(cm.block_sizes.len());
        let mut offset = 0u32;
        for (b, &s) in cm.block_sizes.iter().enumerate() {
            let range: Vec<u32> = (offset..offset + s as u32).collect();
            for &v in &range {
                assignment[v as usize] = b as u32;
            }
            blocks.push(range);
            offset += s as u32;
        }
        Ok(PartitionSet { assignment, blocks })
    } else {
        let dummy = Mesh {
            vertices: vec![[0.0; 3]; n],
            faces: cm.faces.clone(),
        };
        Ok(partition(&build_adjacency(&dummy), cm.block_size as usize))
    }
}

pub fn decode(cm: &CompressedMesh) -> Result<Mesh> {
    let n = cm.n as usize;
    if n == 0 {
        return Err(Error::Format("container holds no vertices".into()));
    }
    for f in &cm.faces {
        if f.iter().any(|&v| v as usize >= n) {
            return Err(Error::Format("face references a missing vertex".into()));
        }
    }
    let parts = decode_partition(cm)?;
    if parts.blocks.len() != cm.blocks.len() {
        return Err(Error::Format(format!(
            "connectivity yields {} blocks, container stores {}",
            parts.blocks.len(),
            cm.blocks.len()
        )));
    }
    let dummy = Mesh {
        vertices: vec![[0.0; 3]; n],
        faces: cm.faces.clone(),
    };
    let mut vertices = vec![[0.0f64; 3]; n];
    for (b, cb) in cm.blocks.iter().enumerate() {
        let (sub, globals) = extract_submesh(&dummy, &parts, b);
        let n_b = sub.vertices.len();
        let l = combinatorial_laplacian(&build_adjacency(&sub));
        let mut bases = vec![SpectralBasis::of(&l)?];
        if !cb.mus.is_empty() {
            let order: Vec<u32> = if cm.reordered {
                (0..n_b as u32).collect()
            } else {
                let perm = cb.permutation.as_ref().ok_or_else(|| {
                    Error::Format(format!("block {b} stores strengths but no permutation"))
                })?;
                let order: Vec<u32> = perm.iter().map(|&v| v as u32).collect();
                let mut seen = vec![false; n_b];
                for &v in &order {
                    if v as usize >= n_b || seen[v as usize] {
                        return Err(Error::Format(format!(
                            "block {b} permutation is not a permutation"
                        )));
                    }
                    seen[v as usize] = true;
                }
                order
            };
            let potential = linear_potential_placed(&order);
            for &mu in &cb.mus {
                let op = hamiltonian(&l, &potential.clone().with_mu(mu as f64));
                bases.push(SpectralBasis::of(&op)?);
            }
        }
        let refs: Vec<&SpectralBasis> = bases.iter().collect();
        let dict = build_dictionary(&refs)?;
        for &s in &cb.support {
            if s as usize >= dict.m() {
                return Err(Error::Format(format!(
                    "block {b} support index {s} outside dictionary of {}",
                    dict.m()
                )));
            }
        }
        let coeffs = dequantize(&cb.levels, &cb.ranges, cm.coefficient_bits);
        let code = SparseCode {
            support: cb.support.clone(),
            coefficients: coeffs,
            skipped: Vec::new(),
        };
        let u_b = reconstruct(&dict, &code);
        for (local, &g) in globals.iter().enumerate() {
            vertices[g as usize] = [u_b[(local, 0)], u_b[(local, 1)], u_b[(local, 2)]];
        }
    }
    Mesh::new(vertices, cm.faces.clone())
}
