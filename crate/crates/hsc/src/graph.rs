//! Mesh connectivity: adjacency, combinatorial Laplacian, block partitioning.

use crate::mesh::Mesh;
use nalgebra::DMatrix;
use std::collections::VecDeque;

/// Undirected vertex adjacency derived from face edges, deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyGraph {
    pub n: usize,
    /// Sorted ascending, no self-loops.
    pub neighbors: Vec<Vec<u32>>,
}

impl AdjacencyGraph {
    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(|v| v.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }
}

/// Open chain 0-1-2-...-n-1; its Laplacian has free ends (degree one), the
/// right operator for open polyline signals.
pub fn path_graph(n: usize) -> AdjacencyGraph {
    assert!(n >= 1);
    let neighbors = (0..n)
        .map(|i| {
            let mut nbrs = Vec::with_capacity(2);
            if i > 0 {
                nbrs.push(i as u32 - 1);
            }
            if i + 1 < n {
                nbrs.push(i as u32 + 1);
            }
            nbrs
        })
        .collect();
    AdjacencyGraph { n, neighbors }
}

pub fn build_adjacency(mesh: &Mesh) -> AdjacencyGraph {
    let n = mesh.vertices.len();
    let mut neighbors = vec![Vec::new(); n];
    let mut push = |a: u32, b: u32| {
        if !neighbors[a as usize].contains(&b) {
            neighbors[a as usize].push(b);
        }
    };
    for f in &mesh.faces {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[0], f[2])] {
            push(a, b);
            push(b, a);
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    AdjacencyGraph { n, neighbors }
}

/// Dense L = A - W with unit edge weights: diagonal holds vertex valence,
/// off-diagonal -1 per edge. Rows sum to zero.
pub fn combinatorial_laplacian(graph: &AdjacencyGraph) -> DMatrix<f64> {
    let n = graph.n;
    let mut l = DMatrix::zeros(n, n);
    for (i, nbrs) in graph.neighbors.iter().enumerate() {
        l[(i, i)] = nbrs.len() as f64;
        for &j in nbrs {
            l[(i, j as usize)] = -1.0;
        }
    }
    l
}

/// Vertex blocks for independent coding. Block order and within-block vertex
/// order depend only on connectivity, never on geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSet {
    /// vertex -> block id
    pub assignment: Vec<u32>,
    /// per block: ordered global vertex indices (BFS dequeue order, then
    /// any merged block's vertices appended)
    pub blocks: Vec<Vec<u32>>,
}

/// Greedy BFS region growing. Seeds at the lowest-index unassigned vertex,
/// visits neighbors in ascending index order, commits vertices in dequeue
/// order until `target_size` is reached. A post-pass merges any block
/// smaller than ceil(target/2) into the adjacent block sharing the most
/// edges (ties toward the lower block id), preferring hosts that keep the
/// merged size within 2*target, and repeats until stable.
pub fn partition(graph: &AdjacencyGraph, target_size: usize) -> PartitionSet {
    assert!(target_size >= 1);
    let n = graph.n;
    const UNASSIGNED: u32 = u32::MAX;
    let mut assign = vec![UNASSIGNED; n];
    let mut blocks: Vec<Vec<u32>> = Vec::new();

    let mut cursor = 0usize; // lowest possibly-unassigned index
    loop {
        while cursor < n && assign[cursor] != UNASSIGNED {
            cursor += 1;
        }
        if cursor >= n {
            break;
        }
        let seed = cursor as u32;
        let id = blocks.len() as u32;
        let mut blk = Vec::new();
        let mut q = VecDeque::new();
        // vertices are claimed on enqueue, committed on dequeue
        assign[seed as usize] = id;
        q.push_back(seed);
        while let Some(u) = q.pop_front() {
            blk.push(u);
            if blk.len() >= target_size {
                break;
            }
            for &w in &graph.neighbors[u as usize] {
                if assign[w as usize] == UNASSIGNED {
                    assign[w as usize] = id;
                    q.push_back(w);
                }
            }
        }
        for u in q {
            assign[u as usize] = UNASSIGNED;
        }
        blocks.push(blk);
    }

    // merge undersized blocks into their best-connected neighbor
    let half = target_size.div_ceil(2);
    loop {
        let mut changed = false;
        for bi in 0..blocks.len() {
            if blocks[bi].is_empty() || blocks[bi].len() >= half {
                continue;
            }
            let mut cnt: Vec<usize> = vec![0; blocks.len()];
            for &u in &blocks[bi] {
                for &w in &graph.neighbors[u as usize] {
                    let bj = assign[w as usize] as usize;
                    if bj != bi {
                        cnt[bj] += 1;
                    }
                }
            }
            let candidates: Vec<usize> = (0..blocks.len()).filter(|&b| cnt[b] > 0).collect();
            if candidates.is_empty() {
                continue; // isolated component; may legitimately stay small
            }
            let best_of = |it: &mut dyn Iterator<Item = usize>| -> Option<usize> {
                it.min_by_key(|&b| (usize::MAX - cnt[b], b))
            };
            let capped = best_of(
                &mut candidates
                    .iter()
                    .copied()
                    .filter(|&b| blocks[b].len() + blocks[bi].len() <= 2 * target_size),
            );
            let host = capped
                .or_else(|| best_of(&mut candidates.iter().copied()))
                .unwrap();
            let moved = std::mem::take(&mut blocks[bi]);
            for &u in &moved {
                assign[u as usize] = host as u32;
            }
            blocks[host].extend(moved);
            changed = true;
        }
        if !changed {
            break;
        }
    }

    // drop emptied blocks, renumber in surviving order
    let mut remap = vec![0u32; blocks.len()];
    let mut kept = Vec::new();
    for (old, blk) in blocks.into_iter().enumerate() {
        if !blk.is_empty() {
            remap[old] = kept.len() as u32;
            kept.push(blk);
        }
    }
    for a in &mut assign {
        *a = remap[*a as usize];
    }
    PartitionSet {
        assignment: assign,
        blocks: kept,
    }
}

/// Submesh of one block: its vertices in block order plus every face whose
/// three corners lie inside the block. Returns the local-to-global index map.
pub fn extract_submesh(mesh: &Mesh, parts: &PartitionSet, block_id: usize) -> (Mesh, Vec<u32>) {
    let block = &parts.blocks[block_id];
    let mut local = vec![u32::MAX; mesh.vertices.len()];
    for (li, &g) in block.iter().enumerate() {
        local[g as usize] = li as u32;
    }
    let vertices: Vec<[f64; 3]> = block.iter().map(|&g| mesh.vertices[g as usize]).collect();
    let faces: Vec<[u32; 3]> = mesh
        .faces
        .iter()
        .filter_map(|f| {
            let m: [u32; 3] = [local[f[0] as usize], local[f[1] as usize], local[f[2] as usize]];
            (m.iter().all(|&x| x != u32::MAX)).then_some(m)
        })
        .collect();
    (
        Mesh { vertices, faces },
        block.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    fn tri() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    fn path_graph(n: usize) -> AdjacencyGraph {
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n - 1 {
            neighbors[i].push(i as u32 + 1);
            neighbors[i + 1].push(i as u32);
        }
        for l in &mut neighbors {
            l.sort_unstable();
        }
        AdjacencyGraph { n, neighbors }
    }

    #[test]
    fn triangle_has_three_edges() {
        assert_eq!(build_adjacency(&tri()).edge_count(), 3);
    }

    #[test]
    fn shared_edge_deduplicates() {
        let m = Mesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            vec![[0, 1, 2], [1, 3, 2]],
        )
        .unwrap();
        assert_eq!(build_adjacency(&m).edge_count(), 5);
    }

    #[test]
    fn unreferenced_vertex_has_degree_zero() {
        let m = Mesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [9.0, 9.0, 9.0]], vec![[0, 1, 2]]).unwrap();
        assert_eq!(build_adjacency(&m).degree(3), 0);
    }

    #[test]
    fn k3_laplacian_entries() {
        let l = combinatorial_laplacian(&build_adjacency(&tri()));
        for i in 0..3 {
            assert_eq!(l[(i, i)], 2.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(l[(i, j)], -1.0);
                }
            }
        }
    }

    #[test]
    fn path3_laplacian_entries() {
        let l = combinatorial_laplacian(&path_graph(3));
        assert_eq!((l[(0, 0)], l[(1, 1)], l[(2, 2)]), (1.0, 2.0, 1.0));
        assert_eq!((l[(0, 1)], l[(1, 2)], l[(0, 2)]), (-1.0, -1.0, 0.0));
    }

    #[test]
    fn laplacian_annihilates_constants() {
        let g = path_graph(40);
        let l = combinatorial_laplacian(&g);
        let ones = nalgebra::DVector::from_element(40, 1.0);
        assert!((&l * ones).amax() <= 1e-12);
    }

    #[test]
    fn small_graph_is_single_block() {
        let p = partition(&build_adjacency(&tri()), 300);
        assert_eq!(p.blocks, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn path10_target5_splits_contiguously() {
        let p = partition(&path_graph(10), 5);
        assert_eq!(p.blocks, vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]);
    }

    #[test]
    fn disconnected_components_stay_separate() {
        // two K3 components, target far above their size
        let m = Mesh::new(
            vec![[0.0; 3]; 6],
            vec![[0, 1, 2], [3, 4, 5]],
        );
        // identical coordinates are fine for connectivity-only partitioning
        let m = m.unwrap_or_else(|_| Mesh {
            vertices: vec![[0.0; 3]; 6],
            faces: vec![[0, 1, 2], [3, 4, 5]],
        });
        let p = partition(&build_adjacency(&m), 10);
        assert_eq!(p.blocks.len(), 2);
        assert_eq!(p.blocks[0], vec![0, 1, 2]);
        assert_eq!(p.blocks[1], vec![3, 4, 5]);
    }

    #[test]
    fn partition_covers_and_is_deterministic() {
        let g = path_graph(137);
        let p1 = partition(&g, 10);
        let p2 = partition(&g, 10);
        assert_eq!(p1, p2);
        let total: usize = p1.blocks.iter().map(|b| b.len()).sum();
        assert_eq!(total, 137);
        for (v, &b) in p1.assignment.iter().enumerate() {
            assert!(p1.blocks[b as usize].contains(&(v as u32)));
        }
    }

    #[test]
    fn merge_pass_respects_size_floor() {
        // path of 23 at target 10: raw growth gives 10+10+3, the 3 merges
        let p = partition(&path_graph(23), 10);
        assert!(p.blocks.iter().all(|b| b.len() >= 5), "{:?}", p.blocks);
    }

    #[test]
    fn straddling_face_is_dropped_from_both_submeshes() {
        // two triangles sharing an edge, split so the shared faces straddle
        let m = Mesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            vec![[0, 1, 2], [1, 3, 2]],
        )
        .unwrap();
        let parts = PartitionSet {
            assignment: vec![0, 0, 1, 1],
            blocks: vec![vec![0, 1], vec![2, 3]],
        };
        let (s0, map0) = extract_submesh(&m, &parts, 0);
        let (s1, _) = extract_submesh(&m, &parts, 1);
        assert_eq!(s0.faces.len(), 0);
        assert_eq!(s1.faces.len(), 0);
        assert_eq!(map0, vec![0, 1]);
        assert_eq!(s0.vertices.len(), 2);
    }

    #[test]
    fn single_block_extraction_is_identity() {
        let m = tri();
        let parts = partition(&build_adjacency(&m), 300);
        let (s, map) = extract_submesh(&m, &parts, 0);
        assert_eq!(s, m);
        assert_eq!(map, vec![0, 1, 2]);
    }

    #[test]
    fn path_graph_laplacian_has_free_ends() {
        let l = combinatorial_laplacian(&path_graph(5));
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(4, 4)], 1.0);
        for i in 1..4 {
            assert_eq!(l[(i, i)], 2.0);
            assert_eq!(l[(i, i - 1)], -1.0);
            assert_eq!(l[(i, i + 1)], -1.0);
        }
        assert_eq!(l[(0, 2)], 0.0);
        let single = path_graph(1);
        assert_eq!(single.edge_count(), 0);
    }
}
