//! Dictionary assembly and Simultaneous Orthogonal Matching Pursuit over
//! the three coordinate channels.

use crate::spectral::SpectralBasis;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Column-stacked unit-norm atoms from one or more spectral bases.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub atoms: DMatrix<f64>,
    /// (source basis id, eigen index) per atom, in column order.
    pub provenance: Vec<(u16, u32)>,
}

impl Dictionary {
    pub fn n(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn m(&self) -> usize {
        self.atoms.ncols()
    }
}

/// Concatenates eigenvector columns of the given bases, in list order.
pub fn build_dictionary(bases: &[&SpectralBasis]) -> Result<Dictionary> {
    assert!(!bases.is_empty());
    let n = bases[0].n();
    for b in bases {
        if b.n() != n {
            return Err(Error::Numerical("dictionary bases differ in dimension".into()));
        }
    }
    let m = n * bases.len();
    let mut atoms = DMatrix::zeros(n, m);
    let mut provenance = Vec::with_capacity(m);
    for (s, b) in bases.iter().enumerate() {
        atoms
            .columns_mut(s * n, n)
            .copy_from(&b.vectors);
        for e in 0..n {
            provenance.push((s as u16, e as u32));
        }
    }
    Ok(Dictionary { atoms, provenance })
}

/// Shared-support sparse code: atom indices in selection order and one
/// coefficient row triple (X, Y, Z) per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub support: Vec<u32>,
    pub coefficients: DMatrix<f64>,
    /// Atoms rejected by the collinearity guard during selection.
    pub skipped: Vec<u32>,
}

impl SparseCode {
    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn empty() -> Self {
        SparseCode {
            support: Vec::new(),
            coefficients: DMatrix::zeros(0, 3),
            skipped: Vec::new(),
        }
    }
}

/// Greedy simultaneous OMP. Each step selects the unused atom whose
/// correlation 3-vector against the current residual has the largest l2
/// norm (ties within 1e-12 go to the lowest index), orthogonalizes it
/// against the running QR factorization of the selected set, and updates
/// the residual; this keeps the coefficients least-squares optimal on the
/// support after every step. Returns early once the remaining correlations
/// fall to numerical zero relative to the signal.
pub fn somp(signals: &DMatrix<f64>, dictionary: &Dictionary, k: usize) -> SparseCode {
    somp_trace(signals, dictionary, k).0
}

/// As [`somp`], also returning the residual Frobenius norm after each
/// accepted atom (index 0 = before any selection).
pub fn somp_trace(signals: &DMatrix<f64>, dictionary: &Dictionary, k: usize) -> (SparseCode, Vec<f64>) {
    let n = dictionary.n();
    let m = dictionary.m();
    assert_eq!(signals.nrows(), n, "signal dimension mismatch");
    assert_eq!(signals.ncols(), 3, "three coordinate channels expected");
    let kmax = k.min(m);

    let u_norm = signals.norm();
    let stop_correlation = 1e-12 * u_norm;

    let mut residual = signals.clone();
    // correlations of every atom against the residual, maintained across steps
    let mut corr = dictionary.atoms.tr_mul(&residual); // m x 3
    let mut used = vec![false; m];

    // thin QR of the selected atoms: q columns orthonormal, rfac upper triangular
    let mut q = DMatrix::<f64>::zeros(n, kmax);
    let mut rfac = DMatrix::<f64>::zeros(kmax, kmax);

    let mut support: Vec<u32> = Vec::with_capacity(kmax);
    let mut skipped = Vec::new();
    let mut trace = vec![u_norm];

    while support.len() < kmax {
        // argmax of per-atom correlation norms, lowest index on near-ties
        let mut best = -1.0f64;
        for j in 0..m {
            if used[j] {
                continue;
            }
            let row = corr.row(j);
            let s = (row[0] * row[0] + row[1] * row[1] + row[2] * row[2]).sqrt();
            if s > best {
                best = s;
            }
        }
        if best <= stop_correlation {
            break;
        }
        let mut pick = usize::MAX;
        for j in 0..m {
            if used[j] {
                continue;
            }
            let row = corr.row(j);
            let s = (row[0] * row[0] + row[1] * row[1] + row[2] * row[2]).sqrt();
            if s >= best - 1e-12 {
                pick = j;
                break;
            }
        }

        // modified Gram-Schmidt against the current Q
        let t = support.len();
        let mut v = DVector::from_column_slice(dictionary.atoms.column(pick).as_slice());
        for i in 0..t {
            let qi = q.column(i);
            let r = qi.dot(&v);
            rfac[(i, t)] = r;
            v.axpy(-r, &qi.clone_owned(), 1.0);
        }
        let vn = v.norm();
        used[pick] = true;
        if vn < 1e-10 {
            // effectively inside the selected span; note it and move on
            skipped.push(pick as u32);
            continue;
        }
        rfac[(t, t)] = vn;
        v /= vn;

        // residual and correlation downdate: R -= q (q^T R)
        let qr_row = v.tr_mul(&residual); // 1 x 3
        for c in 0..3 {
            let coef = qr_row[(0, c)];
            residual.column_mut(c).axpy(-coef, &v, 1.0);
        }
        let aq = dictionary.atoms.tr_mul(&v); // m x 1
        for c in 0..3 {
            let coef = qr_row[(0, c)];
            corr.column_mut(c).axpy(-coef, &aq, 1.0);
        }
        q.column_mut(t).copy_from(&v);
        support.push(pick as u32);
        trace.push(residual.norm());
    }

    let kk = support.len();
    // back-substitute rfac * gamma = q^T u for the least-squares coefficients
    let qtu = q.columns(0, kk).tr_mul(signals); // kk x 3
    let mut coefficients = DMatrix::zeros(kk, 3);
    for c in 0..3 {
        for i in (0..kk).rev() {
            let mut s = qtu[(i, c)];
            for j in i + 1..kk {
                s -= rfac[(i, j)] * coefficients[(j, c)];
            }
            coefficients[(i, c)] = s / rfac[(i, i)];
        }
    }

    (
        SparseCode {
            support,
            coefficients,
            skipped,
        },
        trace,
    )
}

/// Sum of selected atoms weighted per channel: U_hat = A_S Gamma.
pub fn reconstruct(dictionary: &Dictionary, code: &SparseCode) -> DMatrix<f64> {
    let n = dictionary.n();
    let mut out = DMatrix::zeros(n, 3);
    for (row, &j) in code.support.iter().enumerate() {
        let atom = dictionary.atoms.column(j as usize);
        for c in 0..3 {
            out.column_mut(c).axpy(code.coefficients[(row, c)], &atom, 1.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralBasis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_laplacian_basis(n: usize, seed: u64) -> SpectralBasis {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut l = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            l[(i, i + 1)] = -1.0;
            l[(i + 1, i)] = -1.0;
        }
        for _ in 0..n {
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
        SpectralBasis::of(&l).unwrap()
    }

    fn random_signals(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(n, 3, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn dictionary_concatenates_in_order() {
        let b1 = random_laplacian_basis(20, 1);
        let b2 = random_laplacian_basis(20, 2);
        let d = build_dictionary(&[&b1, &b2]).unwrap();
        assert_eq!(d.m(), 40);
        assert_eq!(d.provenance[0], (0, 0));
        assert_eq!(d.provenance[25], (1, 5));
        for c in 0..40 {
            assert!((d.atoms.column(c).norm() - 1.0).abs() < 1e-10);
        }
        assert_eq!(d.atoms.column(23).as_slice(), b2.vectors.column(3).as_slice());
    }

    #[test]
    fn complete_orthobasis_reconstructs_exactly() {
        let b = random_laplacian_basis(24, 3);
        let d = build_dictionary(&[&b]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_signals(24, &mut rng);
        let code = somp(&u, &d, 24);
        let rec = reconstruct(&d, &code);
        assert!((rec - &u).norm() <= 1e-9 * u.norm());
    }

    #[test]
    fn one_atom_signal_recovers_support_and_coefficient() {
        let b = random_laplacian_basis(16, 5);
        let d = build_dictionary(&[&b]).unwrap();
        let mut u = DMatrix::zeros(16, 3);
        let atom7 = d.atoms.column(7);
        u.column_mut(0).axpy(5.0, &atom7, 1.0);
        let code = somp(&u, &d, 1);
        assert_eq!(code.support, vec![7]);
        assert!((code.coefficients[(0, 0)] - 5.0).abs() < 1e-10);
        assert!(code.coefficients[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn planted_two_sparse_recovery() {
        let b = random_laplacian_basis(30, 6);
        let d = build_dictionary(&[&b]).unwrap();
        let mut u = DMatrix::zeros(30, 3);
        for c in 0..3 {
            u.column_mut(c).axpy(2.0, &d.atoms.column(11), 1.0);
            u.column_mut(c).axpy(-1.0 - c as f64, &d.atoms.column(23), 1.0);
        }
        let code = somp(&u, &d, 2);
        let mut s = code.support.clone();
        s.sort_unstable();
        assert_eq!(s, vec![11, 23]);
        let rec = reconstruct(&d, &code);
        assert!((rec - &u).norm() <= 1e-10);
    }

    #[test]
    fn residual_is_monotone_and_orthogonal_to_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b1 = random_laplacian_basis(28, 9);
        let b2 = random_laplacian_basis(28, 10);
        let d = build_dictionary(&[&b1, &b2]).unwrap();
        for _ in 0..20 {
            let u = random_signals(28, &mut rng);
            let (code, trace) = somp_trace(&u, &d, 9);
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
            let rec = reconstruct(&d, &code);
            let resid = &u - rec;
            for &j in &code.support {
                let corr = d.atoms.column(j as usize).tr_mul(&resid);
                assert!(corr.amax() <= 1e-8, "atom {j} correlation {corr:?}");
            }
        }
    }

    #[test]
    fn duplicate_atoms_trigger_collinearity_guard() {
        let b = random_laplacian_basis(12, 11);
        // same basis twice: every atom of the second copy is collinear
        let d = build_dictionary(&[&b, &b]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = random_signals(12, &mut rng);
        let code = somp(&u, &d, 12);
        let rec = reconstruct(&d, &code);
        assert!((rec - &u).norm() <= 1e-9 * u.norm());
        assert_eq!(code.k(), 12, "twelve independent atoms suffice");
    }

    #[test]
    fn empty_support_reconstructs_zero() {
        let b = random_laplacian_basis(8, 13);
        let d = build_dictionary(&[&b]).unwrap();
        let rec = reconstruct(&d, &SparseCode::empty());
        assert_eq!(rec, DMatrix::zeros(8, 3));
    }

    #[test]
    fn superset_dictionary_first_pick_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let b1 = random_laplacian_basis(20, 15);
        let b2 = random_laplacian_basis(20, 16);
        let sub = build_dictionary(&[&b1]).unwrap();
        let sup = build_dictionary(&[&b1, &b2]).unwrap();
        for _ in 0..10 {
            let u = random_signals(20, &mut rng);
            let c_sub = sub.atoms.tr_mul(&u);
            let c_sup = sup.atoms.tr_mul(&u);
            let best = |c: &DMatrix<f64>| {
                (0..c.nrows())
                    .map(|j| c.row(j).norm())
                    .fold(0.0f64, f64::max)
            };
            assert!(best(&c_sup) >= best(&c_sub) - 1e-14);
        }
    }

    #[test]
    fn greedy_matches_brute_force_often_enough_small() {
        // small pilot of the acceptance-scale oracle: n=20, m=40, k=2
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b1 = random_laplacian_basis(20, 18);
        let b2 = random_laplacian_basis(20, 19);
        let d = build_dictionary(&[&b1, &b2]).unwrap();
        let mut within = 0;
        let trials = 40;
        for _ in 0..trials {
            let u = random_signals(20, &mut rng);
            let greedy = {
                let code = somp(&u, &d, 2);
                (&u - reconstruct(&d, &code)).norm()
            };
            let mut best = f64::INFINITY;
            for a in 0..40 {
                for b in a + 1..40 {
                    let cols = DMatrix::from_columns(&[d.atoms.column(a), d.atoms.column(b)]);
                    let sol = cols.clone().svd(true, true).solve(&u, 1e-12).unwrap();
                    let r = (&u - cols * sol).norm();
                    if r < best {
                        best = r;
                    }
                }
            }
            if greedy <= 2.0 * best + 1e-12 {
                within += 1;
            }
        }
        assert!(within * 100 >= trials * 95, "{within}/{trials}");
    }
}
