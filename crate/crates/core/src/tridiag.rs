//! Implicit-shift QL iteration for real symmetric tridiagonal matrices.
//!
//! Follows the EISPACK `tql2` scheme. Eigenvectors are accumulated as the
//! columns of a column-major matrix so every Givens rotation touches two
//! contiguous slices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Full eigendecomposition of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as matrix columns.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            found: offdiag.len(),
        });
    }

    let mut d = diag.to_vec();
    // e[i] couples rows i and i + 1; e[n - 1] = 0 terminates the split search.
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);

    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut tst1 = 0.0f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(Error::ConvergenceFailure { index: l });
                }

                // Wilkinson-type shift from the leading 2x2 block.
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift_total += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_columns(&mut z, i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += shift_total;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok((values, vectors))
}

/// Applies the rotation to columns `i` and `i + 1` of `z`.
#[inline]
fn rotate_columns(z: &mut DMatrix<f64>, i: usize, c: f64, s: f64) {
    let n = z.nrows();
    let data = z.as_mut_slice();
    let (left, right) = data[i * n..(i + 2) * n].split_at_mut(n);
    for (zi, zi1) in left.iter_mut().zip(right.iter_mut()) {
        let h = *zi1;
        *zi1 = s * *zi + c * h;
        *zi = c * *zi - s * h;
    }
}
