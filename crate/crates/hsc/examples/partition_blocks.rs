//! Block partitioning. Grows breadth-first regions of about `target`
//! vertices, then merges runts into their best-connected neighbor, so
//! every block is big enough to code independently but small enough for
//! dense eigensolves. Depends only on connectivity: two meshes with the
//! same faces partition identically no matter where the vertices sit.

use hsc::graph::{build_adjacency, partition};
use hsc::synth::{detail_sphere, icosphere};

fn main() {
    let mesh = icosphere(4);
    let graph = build_adjacency(&mesh);
    let target = 300;
    let parts = partition(&graph, target);

    let mut sizes: Vec<usize> = parts.blocks.iter().map(|b| b.len()).collect();
    println!(
        "{} vertices -> {} blocks (target {target})",
        mesh.vertices.len(),
        parts.blocks.len()
    );
    println!("block sizes: {sizes:?}");

    let covered: usize = sizes.iter().sum();
    assert_eq!(covered, mesh.vertices.len(), "every vertex in exactly one block");
    sizes.sort_unstable();
    assert!(*sizes.first().unwrap() >= target.div_ceil(2), "no runt blocks after merging");
    assert!(*sizes.last().unwrap() <= 2 * target, "merges stay within twice the target");

    // geometry independence: same connectivity, displaced vertices
    let bumpy = detail_sphere(4, 99, Some([1.4, 0.9, 1.1]));
    assert_eq!(bumpy.faces, mesh.faces);
    let parts2 = partition(&build_adjacency(&bumpy), target);
    assert_eq!(parts2, parts, "partition must ignore vertex positions");
    println!("re-partitioned a deformed copy: identical block structure");
}
