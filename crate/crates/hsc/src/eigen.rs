//! Dense symmetric eigendecomposition with deterministic output ordering.
//!
//! Householder reduction to tridiagonal form followed by implicit-shift QL
//! iteration, the classic EISPACK tred2/tql2 pair. Chosen over an external
//! LAPACK binding because the codec requires reproducible eigenvector signs
//! and tie handling: eigenvalues are returned ascending and every
//! eigenvector is normalized so its largest-magnitude entry (lowest index
//! when magnitudes tie within 1e-12) is positive.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

const MAX_QL_ITERS: usize = 64;

/// Full spectrum of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvector columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    assert!(n > 0, "empty matrix");

    // row-major working copy; tred2 overwrites it with the orthogonal factor
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = m[(i, j)];
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut a, n, &mut d, &mut e);

    // column-major accumulation target so QL rotations touch contiguous columns
    let mut z = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = a[i * n + j];
        }
    }
    tql2(&mut d, &mut e, &mut z, n)?;

    // ascending eigenvalue order, stable on exact ties
    let mut order: Vec<usize> = (0..n).collect();
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("eigenvalue iteration produced non-finite values".into()));
    }
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap().then(i.cmp(&j)));

    let values = DVector::from_iterator(n, order.iter().map(|&i| d[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).copy_from(&z.column(src));
    }
    for c in 0..n {
        fix_sign(&mut vectors.column_mut(c));
    }
    Ok((values, vectors))
}

/// Flips the column so its largest-magnitude entry is positive; magnitudes
/// within 1e-12 of the maximum count as tied and the lowest index decides.
fn fix_sign(col: &mut nalgebra::DVectorViewMut<f64>) {
    let max_mag = col.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let lead = col
        .iter()
        .position(|&x| x.abs() >= max_mag - 1e-12)
        .unwrap_or(0);
    if col[lead] < 0.0 {
        col.neg_mut();
    }
}

/// Householder reduction of a row-major symmetric matrix to tridiagonal
/// form; `a` is replaced by the accumulated orthogonal transform, `d`
/// receives the diagonal and `e[1..]` the subdiagonal.
fn tred2(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    // scratch for the current Householder vector (a copy of row i) so the
    // inner updates run on contiguous slices
    let mut u = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = a[i * n..=i * n + l].iter().map(|x| x.abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                u[..=l].copy_from_slice(&a[i * n..=i * n + l]);

                // e = (lower-triangular A applied symmetrically to u) / h,
                // built row by row so every inner pass is contiguous
                e[..=l].fill(0.0);
                for j in 0..=l {
                    let row_j = &a[j * n..=j * n + j];
                    let mut dot = 0.0;
                    for (&ajk, &uk) in row_j.iter().zip(&u[..=j]) {
                        dot += ajk * uk;
                    }
                    e[j] += dot;
                    let uj = u[j];
                    for (ek, &ajk) in e[..j].iter_mut().zip(row_j) {
                        *ek += ajk * uj;
                    }
                }
                let mut f_acc = 0.0;
                for j in 0..=l {
                    a[j * n + i] = u[j] / h;
                    e[j] /= h;
                    f_acc += e[j] * u[j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let fj = u[j];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    let row_j = &mut a[j * n..=j * n + j];
                    for ((ajk, &ek), &uk) in row_j.iter_mut().zip(&e[..=j]).zip(&u[..=j]) {
                        *ajk -= fj * ek + gj * uk;
                    }
                }
            }
        } else if n > 1 {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    // accumulate the transform stored in the strict lower part; the g
    // buffer turns both passes into row-contiguous sweeps
    let mut gbuf = vec![0.0; n];
    for i in 0..n {
        if d[i] != 0.0 {
            gbuf[..i].fill(0.0);
            for k in 0..i {
                let aik = a[i * n + k];
                let row_k = &a[k * n..k * n + i];
                for (g, &akj) in gbuf[..i].iter_mut().zip(row_k) {
                    *g += aik * akj;
                }
            }
            for k in 0..i {
                let aki = a[k * n + i];
                let row_k = &mut a[k * n..k * n + i];
                for (akj, &g) in row_k.iter_mut().zip(&gbuf[..i]) {
                    *akj -= g * aki;
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for j in 0..i {
            a[j * n + i] = 0.0;
            a[i * n + j] = 0.0;
        }
    }
}

/// Implicit-shift QL on the tridiagonal (d, e), accumulating rotations into
/// the columns of `z`. Errors out instead of spinning when an eigenvalue
/// fails to converge within the iteration cap.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut DMatrix<f64>, n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let zs = z.as_mut_slice(); // column-major: column c occupies [c*n, (c+1)*n)
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERS {
                return Err(Error::Numerical(format!(
                    "QL iteration failed to converge for eigenvalue {l} after {MAX_QL_ITERS} sweeps"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let (lo, hi) = zs.split_at_mut((i + 1) * n);
                let col_i = &mut lo[i * n..(i + 1) * n];
                let col_j = &mut hi[..n];
                for (zi, zj) in col_i.iter_mut().zip(col_j.iter_mut()) {
                    let t = *zj;
                    *zj = s * *zi + c * t;
                    *zi = c * *zi - s * t;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
