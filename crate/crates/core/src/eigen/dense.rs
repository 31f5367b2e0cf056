//! Dense symmetric kernels: Cholesky reduction of the pencil, Householder
//! tridiagonalization and implicit-shift QL.
//!
//! Matrices are `n * n` slices. Eigenvector matrices are column-major so
//! that the QL rotations touch two contiguous columns.

use crate::error::{Error, Result};

/// In-place lower Cholesky factor of a row-major SPD matrix. The strict upper
/// triangle is zeroed.
pub(crate) fn cholesky(b: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = b[j * n + j];
        for k in 0..j {
            d -= b[j * n + k] * b[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { row: j, pivot: d });
        }
        let d = d.sqrt();
        b[j * n + j] = d;
        for i in j + 1..n {
            let mut s = b[i * n + j];
            for k in 0..j {
                s -= b[i * n + k] * b[j * n + k];
            }
            b[i * n + j] = s / d;
        }
        for k in j + 1..n {
            b[j * n + k] = 0.0;
        }
    }
    Ok(())
}

/// Forward substitution `L y = x` in place.
fn solve_lower(l: &[f64], n: usize, x: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
        x[i] = (x[i] - s) / l[i * n + i];
    }
}

/// Back substitution `Lᵀ y = x` in place.
pub(crate) fn solve_lower_transposed(l: &[f64], n: usize, x: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
}

/// `C = L⁻¹ A L⁻ᵀ` for symmetric row-major `A`.
pub(crate) fn reduce_to_standard(a: &[f64], l: &[f64], n: usize) -> Vec<f64> {
    // W = L⁻¹ A, one column at a time; stored transposed (row j = column j).
    let mut w = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = a[i * n + j];
        }
        solve_lower(l, n, &mut col);
        w[j * n..(j + 1) * n].copy_from_slice(&col);
    }
    // C = L⁻¹ Wᵀ: column j of Wᵀ is row j of W, which we stored as w[j*n+..]
    // transposed, i.e. (Wᵀ)[i][j] = W[j][i] = w[i*n + j].
    let mut c = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            col[i] = w[i * n + j];
        }
        solve_lower(l, n, &mut col);
        for i in 0..n {
            c[i * n + j] = col[i];
        }
    }
    // symmetrize away rounding
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = s;
            c[j * n + i] = s;
        }
    }
    c
}

/// Eigen-decomposition of a symmetric row-major matrix.
///
/// Returns eigenvalues (ascending) and column-major eigenvectors.
pub(crate) fn symmetric_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    // z[j * n + k] holds element (k, j).
    let mut z = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            z[j * n + k] = a[k * n + j];
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e, n);
    implicit_ql(&mut z, &mut d, &mut e, n)?;
    Ok((d, z))
}

/// Householder reduction to tridiagonal form, accumulating the orthogonal
/// transform in `z` (EISPACK `tred2`). On return `d` is the diagonal and
/// `e[1..]` the subdiagonal.
fn tridiagonalize(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    // element (row, col) of the working matrix
    let at = |row: usize, col: usize| col * n + row;

    for j in 0..n {
        d[j] = z[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = z[at(i - 1, j)];
                z[at(i, j)] = 0.0;
                z[at(j, i)] = 0.0;
            }
        } else {
            for x in d[..i].iter_mut() {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                z[at(j, i)] = f;
                g = e[j] + z[at(j, j)] * f;
                for k in j + 1..i {
                    let zkj = z[at(k, j)];
                    g += zkj * d[k];
                    e[k] += zkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let column = &mut z[j * n..(j + 1) * n];
                for k in j..i {
                    column[k] -= f * e[k] + g * d[k];
                }
                d[j] = z[at(i - 1, j)];
                z[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        z[at(n - 1, i)] = z[at(i, i)];
        z[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = z[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let (left, right) = z.split_at_mut((i + 1) * n);
                let vj = &mut left[j * n..j * n + i + 1];
                let vi = &right[..i + 1];
                let g: f64 = vi.iter().zip(vj.iter()).map(|(a, b)| a * b).sum();
                for (k, x) in vj.iter_mut().enumerate() {
                    *x -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            z[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = z[at(n - 1, j)];
        z[at(n - 1, j)] = 0.0;
    }
    z[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)` (EISPACK `tql2`), rotating
/// the columns of `z`. Eigenvalues come back sorted ascending with their
/// columns.
fn implicit_ql(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_sweeps = 30 * n;
    let mut sweeps = 0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] == 0 so m < n here
        if m > l {
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::NoConvergence { sweeps: max_sweeps });
                }
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
                for x in d[l + 2..n].iter_mut() {
                    *x -= h;
                }
                f += h;

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

                    let (left, right) = z.split_at_mut((i + 1) * n);
                    let zi = &mut left[i * n..];
                    let zi1 = &mut right[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // selection sort keeps the column swaps cheap and deterministic
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            let (left, right) = z.split_at_mut(k * n);
            left[i * n..(i + 1) * n].swap_with_slice(&mut right[..n]);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn check_decomposition(a: &[f64], n: usize) {
        let (w, z) = symmetric_eigen(a, n).unwrap();
        for j in 0..n {
            let v = &z[j * n..(j + 1) * n];
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[i * n + k] * v[k]).sum();
                assert!((av - w[j] * v[i]).abs() < 1e-12 * (1.0 + w[j].abs()), "pair {j}");
            }
            for k in 0..n {
                let dot: f64 = (0..n).map(|i| z[k * n + i] * v[i]).sum();
                let expected = if k == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-13);
            }
        }
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn two_by_two() {
        let (w, z) = symmetric_eigen(&[2.0, -1.0, -1.0, 2.0], 2).unwrap();
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(w[1], 3.0, epsilon = 1e-15);
        assert_relative_eq!(z[0].abs(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(z[0], z[1], epsilon = 1e-15);
        assert_relative_eq!(z[2], -z[3], epsilon = 1e-15);
    }

    #[test]
    fn one_by_one_and_diagonal() {
        let (w, z) = symmetric_eigen(&[5.0], 1).unwrap();
        assert_eq!((w[0], z[0]), (5.0, 1.0));
        let (w, _) = symmetric_eigen(&[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0], 3).unwrap();
        assert_eq!(w, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_symmetric_matrices() {
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [3, 7, 16, 33] {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let x = next();
                    a[i * n + j] = x;
                    a[j * n + i] = x;
                }
            }
            check_decomposition(&a, n);
        }
    }

    #[test]
    fn cholesky_reduction() {
        let n = 4;
        let mut b = vec![
            4.0, 1.0, 0.0, 1.0, //
            1.0, 4.0, 1.0, 0.0, //
            0.0, 1.0, 4.0, 1.0, //
            1.0, 0.0, 1.0, 4.0,
        ];
        let orig = b.clone();
        cholesky(&mut b, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum();
                assert_relative_eq!(s, orig[i * n + j], epsilon = 1e-14);
            }
        }
        let mut bad = vec![1.0, 2.0, 2.0, 1.0];
        assert!(matches!(
            cholesky(&mut bad, 2),
            Err(Error::NotPositiveDefinite { row: 1, .. })
        ));
    }
}
