//! Eigenstructure of the combinatorial Laplacian on a small sphere. The
//! lowest mode is constant with eigenvalue zero, the next few oscillate
//! slowly over the surface, and coordinate signals concentrate almost all
//! of their energy in those low modes; that concentration is what the
//! codec spends its bits on.

use hsc::graph::{build_adjacency, combinatorial_laplacian};
use hsc::spectral::SpectralBasis;
use hsc::synth::icosphere;

fn main() {
    let mesh = icosphere(2);
    let n = mesh.vertices.len();
    let l = combinatorial_laplacian(&build_adjacency(&mesh));
    let basis = SpectralBasis::of(&l).expect("symmetric eigensolve");

    println!("sphere: {n} vertices");
    print!("lowest eigenvalues: ");
    for i in 0..6 {
        print!("{:.5} ", basis.values[i]);
    }
    println!("... {:.3} (largest)", basis.values[n - 1]);

    assert!(basis.values[0].abs() < 1e-10, "constant mode has eigenvalue 0");
    assert!(basis.values[1] > 1e-8, "connected mesh: second eigenvalue positive");
    let first = basis.vectors.column(0);
    let spread = first.max() - first.min();
    assert!(spread < 1e-8, "lowest mode is constant, spread {spread:.2e}");

    // energy of the coordinate signal captured by the first k modes
    let u = mesh.coordinate_matrix();
    let coeffs = basis.vectors.transpose() * &u;
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    for k in [10, 40, 160] {
        let head: f64 = (0..k)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|(r, c)| coeffs[(r, c)] * coeffs[(r, c)])
            .sum();
        println!("first {k:3} modes hold {:6.3}% of coordinate energy", 100.0 * head / total);
    }
}
