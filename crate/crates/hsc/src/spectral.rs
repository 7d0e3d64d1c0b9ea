//! Spectral bases, the diagonal ramp potential, and the weighted-gradient
//! bound on chain graphs.

use crate::eigen::symmetric_eigen;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Orthonormal eigenvector columns with ascending eigenvalues, as produced
/// by the deterministic dense solver.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SpectralBasis {
    pub fn of(matrix: &DMatrix<f64>) -> Result<Self> {
        let (values, vectors) = symmetric_eigen(matrix)?;
        Ok(SpectralBasis { values, vectors })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Mean eigenvalue (trace / n); sets the natural scale for mu grids.
    pub fn mean_eigenvalue(&self) -> f64 {
        self.values.sum() / self.values.len() as f64
    }
}

/// Diagonal potential: nonnegative per-vertex weights with unit Frobenius
/// norm, plus the scalar strength mu applied when assembling an operator.
#[derive(Debug, Clone)]
pub struct Potential {
    pub diagonal: DVector<f64>,
    pub mu: f64,
}

impl Potential {
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }
}

fn ramp_normalizer(n: usize) -> f64 {
    // sqrt(1^2 + 2^2 + ... + n^2)
    (1..=n).map(|j| (j as f64) * (j as f64)).sum::<f64>().sqrt()
}

/// Ramp potential diag(1..n) scaled to unit Frobenius norm; mu starts at 0.
pub fn linear_potential(n: usize) -> Potential {
    assert!(n >= 1);
    let s = ramp_normalizer(n);
    Potential {
        diagonal: DVector::from_iterator(n, (1..=n).map(|j| j as f64 / s)),
        mu: 0.0,
    }
}

/// Ramp potential placed by a vertex ordering: `order[p]` receives rank
/// p+1, so early entries of `order` get the smallest potential values.
pub fn linear_potential_placed(order: &[u32]) -> Potential {
    let n = order.len();
    let s = ramp_normalizer(n);
    let mut diagonal = DVector::zeros(n);
    for (p, &v) in order.iter().enumerate() {
        diagonal[v as usize] = (p + 1) as f64 / s;
    }
    Potential { diagonal, mu: 0.0 }
}

/// Residual after projecting each column of `u` onto the first `nd` basis
/// vectors. Orthonormality of the basis is assumed, so the projection is
/// B (B^T u).
pub fn leading_mode_residual(u: &DMatrix<f64>, basis: &SpectralBasis, nd: usize) -> DMatrix<f64> {
    assert!(nd <= basis.vectors.ncols(), "truncation beyond basis size");
    let b = basis.vectors.columns(0, nd);
    let coeffs = b.tr_mul(u);
    u - b * coeffs
}

/// In-place [0.25, 0.5, 0.25] smoothing with replicated endpoints. Keeps a
/// constant profile fixed and spreads localized peaks to their neighbors.
pub fn smooth_clamped(values: &mut [f64], passes: usize) {
    let n = values.len();
    if n < 2 {
        return;
    }
    let mut prev = vec![0.0; n];
    for _ in 0..passes {
        prev.copy_from_slice(values);
        for i in 0..n {
            let left = prev[if i == 0 { 0 } else { i - 1 }];
            let right = prev[if i == n - 1 { n - 1 } else { i + 1 }];
            values[i] = 0.5 * prev[i] + 0.25 * (left + right);
        }
    }
}

/// Indices sorted by descending value; ties keep their original order.
/// Feeding the result to [`linear_potential_placed`] gives the largest
/// input the smallest potential rank.
pub fn descending_rank_order(values: &[f64]) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..values.len() as u32).collect();
    idx.sort_by(|&a, &b| {
        values[b as usize]
            .partial_cmp(&values[a as usize])
            .expect("non-finite value in rank order")
    });
    idx
}

/// H = L + mu * diag(V). Shares L's off-diagonal sparsity pattern.
pub fn hamiltonian(laplacian: &DMatrix<f64>, potential: &Potential) -> DMatrix<f64> {
    let n = laplacian.nrows();
    assert_eq!(n, potential.diagonal.len(), "dimension mismatch");
    let mut h = laplacian.clone();
    for i in 0..n {
        h[(i, i)] += potential.mu * potential.diagonal[i];
    }
    h
}

/// Forward-difference matrix of the Dirichlet chain: unit lower bidiagonal
/// with (Df)_0 = f_0 and (Df)_i = f_i - f_{i-1}. Always invertible
/// (unit determinant), which is what makes the weighted bound well posed.
pub fn dirichlet_difference(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = 1.0;
        if i > 0 {
            d[(i, i - 1)] = -1.0;
        }
    }
    d
}

/// D^T D: the chain Laplacian with a fixed left boundary, tridiagonal
/// (-1, [2,..,2,1], -1).
pub fn dirichlet_chain_laplacian(n: usize) -> DMatrix<f64> {
    let d = dirichlet_difference(n);
    d.transpose() * d
}

/// W = (I + D^{-T} (mu V) D^{-1})^{1/2} via the eigendecomposition square
/// root. Satisfies (WD)^T (WD) = D^T D + mu V to machine precision.
pub fn weight_matrix(potential: &Potential) -> Result<DMatrix<f64>> {
    let n = potential.diagonal.len();
    // D^{-1} for the Dirichlet chain is the running-sum operator, the
    // all-ones lower triangle; build A = diag(sqrt(mu v)) D^{-1} directly.
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let w = potential.mu * potential.diagonal[i];
        if w < 0.0 {
            return Err(Error::Numerical("negative potential weight".into()));
        }
        let sw = w.sqrt();
        for j in 0..=i {
            a[(i, j)] = sw;
        }
    }
    let m = DMatrix::identity(n, n) + a.transpose() * a;
    let (vals, vecs) = symmetric_eigen(&m)?;
    let sqrt_vals = vals.map(|x| x.max(0.0).sqrt());
    Ok(&vecs * DMatrix::from_diagonal(&sqrt_vals) * vecs.transpose())
}

/// Evaluates both sides of the truncation bound on the Dirichlet chain:
/// returns (||f - P_k f||^2, ||W D f||^2 / E_{k+1}) where P_k projects onto
/// the first k eigenvectors of H = D^T D + mu V. The caller asserts
/// residual <= bound.
pub fn verify_weighted_gradient_bound(
    potential: &Potential,
    f: &DVector<f64>,
    k: usize,
) -> Result<(f64, f64)> {
    let n = f.len();
    assert_eq!(n, potential.diagonal.len());
    assert!(k < n, "truncation order must leave a tail");
    let h = hamiltonian(&dirichlet_chain_laplacian(n), potential);
    let basis = SpectralBasis::of(&h)?;
    let coeffs = basis.vectors.transpose() * f;
    let residual_sq: f64 = (k..n).map(|i| coeffs[i] * coeffs[i]).sum();

    let d = dirichlet_difference(n);
    let w = weight_matrix(potential)?;
    let wdf = w * (d * f);
    let e_next = basis.values[k];
    if e_next <= 0.0 {
        return Err(Error::Numerical("nonpositive eigenvalue in bound denominator".into()));
    }
    Ok((residual_sq, wdf.norm_squared() / e_next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k3() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0])
    }

    #[test]
    fn linear_potential_small_cases() {
        let p = linear_potential(1);
        assert_eq!(p.diagonal[0], 1.0);
        let p = linear_potential(3);
        let s = 14.0f64.sqrt();
        for (i, want) in [(0, 1.0), (1, 2.0), (2, 3.0)] {
            assert!((p.diagonal[i] - want / s).abs() < 1e-15);
        }
    }

    #[test]
    fn potential_is_unit_frobenius_and_increasing() {
        for n in [1, 2, 7, 100, 300] {
            let p = linear_potential(n);
            assert!((p.diagonal.norm_squared() - 1.0).abs() < 1e-12);
            for i in 1..n {
                assert!(p.diagonal[i] > p.diagonal[i - 1]);
            }
        }
    }

    #[test]
    fn placed_potential_follows_ordering() {
        // vertex 2 ranked first, then 0, then 1
        let p = linear_potential_placed(&[2, 0, 1]);
        let s = 14.0f64.sqrt();
        assert!((p.diagonal[2] - 1.0 / s).abs() < 1e-15);
        assert!((p.diagonal[0] - 2.0 / s).abs() < 1e-15);
        assert!((p.diagonal[1] - 3.0 / s).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_with_zero_mu_is_the_laplacian() {
        let l = k3();
        let h = hamiltonian(&l, &linear_potential(3));
        assert_eq!(h.as_slice(), l.as_slice());
    }

    #[test]
    fn k3_hamiltonian_diagonal() {
        let h = hamiltonian(&k3(), &linear_potential(3).with_mu(14.0f64.sqrt()));
        for (i, want) in [(0, 3.0), (1, 4.0), (2, 5.0)] {
            assert!((h[(i, i)] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_eigenvalues_dominate_laplacian_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let n = 24;
            // random connected-ish graph Laplacian
            let mut l = DMatrix::zeros(n, n);
            for i in 0..n - 1 {
                l[(i, i + 1)] = -1.0;
                l[(i + 1, i)] = -1.0;
            }
            for _ in 0..20 {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b && l[(a, b)] == 0.0 {
                    l[(a, b)] = -1.0;
                    l[(b, a)] = -1.0;
                }
            }
            for i in 0..n {
                let deg: f64 = (0..n).filter(|&j| j != i).map(|j| -l[(i, j)]).sum();
                l[(i, i)] = deg;
            }
            let lam = SpectralBasis::of(&l).unwrap().values;
            let h = hamiltonian(&l, &linear_potential(n).with_mu(rng.gen_range(0.1..10.0)));
            let ham = SpectralBasis::of(&h).unwrap().values;
            for i in 0..n {
                assert!(ham[i] >= lam[i] - 1e-10, "index {i}: {} < {}", ham[i], lam[i]);
            }
        }
    }

    #[test]
    fn difference_factor_reproduces_chain_laplacian() {
        let l = dirichlet_chain_laplacian(6);
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(5, 5)], 1.0);
        for i in 1..5 {
            assert_eq!(l[(i, i)], 2.0);
        }
        for i in 0..5 {
            assert_eq!(l[(i, i + 1)], -1.0);
            assert_eq!(l[(i + 1, i)], -1.0);
        }
    }

    #[test]
    fn weighted_factorization_matches_hamiltonian() {
        for mu in [0.0, 1.0, 10.0] {
            let pot = linear_potential(64).with_mu(mu);
            let d = dirichlet_difference(64);
            let w = weight_matrix(&pot).unwrap();
            let wd = &w * &d;
            let h = hamiltonian(&dirichlet_chain_laplacian(64), &pot);
            let resid = (wd.transpose() * &wd - h).amax();
            assert!(resid <= 1e-8, "mu={mu}: {resid}");
        }
    }

    #[test]
    fn bound_is_tight_for_a_pure_eigenvector() {
        let pot = linear_potential(32).with_mu(1.0);
        let h = hamiltonian(&dirichlet_chain_laplacian(32), &pot);
        let basis = SpectralBasis::of(&h).unwrap();
        let f = DVector::from_column_slice(basis.vectors.column(0).as_slice());
        let (residual, bound) = verify_weighted_gradient_bound(&pot, &f, 4).unwrap();
        assert!(residual <= 1e-18);
        assert!(residual <= bound);
    }

    #[test]
    fn zero_potential_reduces_to_laplacian_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 48;
        let pot = linear_potential(n).with_mu(0.0);
        let f = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let (residual, bound) = verify_weighted_gradient_bound(&pot, &f, 6).unwrap();
        // independent evaluation of ||Df||^2 / lambda_{k+1}
        let d = dirichlet_difference(n);
        let basis = SpectralBasis::of(&dirichlet_chain_laplacian(n)).unwrap();
        let expect = (&d * &f).norm_squared() / basis.values[6];
        assert!((bound - expect).abs() <= 1e-9 * expect);
        assert!(residual <= bound + 1e-12);
    }

    #[test]
    fn random_functions_respect_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for mu in [0.0, 1.0, 10.0] {
            let pot = linear_potential(64).with_mu(mu);
            for _ in 0..10 {
                let f = DVector::from_fn(64, |_, _| rng.gen_range(-1.0..1.0));
                for k in [1, 8, 32] {
                    let (residual, bound) = verify_weighted_gradient_bound(&pot, &f, k).unwrap();
                    assert!(residual <= bound + 1e-9, "mu={mu} k={k}: {residual} > {bound}");
                }
            }
        }
    }

    #[test]
    fn full_basis_residual_vanishes_and_truncation_grows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = dirichlet_chain_laplacian(20);
        let basis = SpectralBasis::of(&l).unwrap();
        let u = DMatrix::from_fn(20, 3, |_, _| rng.gen_range(-1.0..1.0));
        assert!(leading_mode_residual(&u, &basis, 20).norm() <= 1e-10);
        let mut last = f64::INFINITY;
        for nd in [1, 5, 10, 15] {
            let r = leading_mode_residual(&u, &basis, nd).norm();
            assert!(r <= last + 1e-12, "residual must shrink as modes are added");
            last = r;
        }
    }

    #[test]
    fn smoothing_fixes_constants_and_spreads_peaks() {
        let mut c = vec![2.5; 9];
        smooth_clamped(&mut c, 4);
        assert!(c.iter().all(|&x| (x - 2.5).abs() < 1e-15));

        let mut delta = vec![0.0; 9];
        delta[4] = 1.0;
        smooth_clamped(&mut delta, 1);
        assert_eq!(&delta[3..6], &[0.25, 0.5, 0.25]);
        assert_eq!(delta[2], 0.0);
    }

    #[test]
    fn descending_order_is_stable() {
        assert_eq!(descending_rank_order(&[3.0, 1.0, 2.0]), vec![0, 2, 1]);
        assert_eq!(descending_rank_order(&[1.0, 2.0, 2.0, 0.5]), vec![1, 2, 0, 3]);
    }
}
