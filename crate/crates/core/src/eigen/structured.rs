//! Eigenpairs at the low end of a cyclic-tridiagonal pencil without forming
//! dense matrices. Inertia counts from an `LDLᵀ` factorization drive
//! bisection; inverse iteration with a pivoted band LU recovers the vectors.
//! Cost is O(N) per shift, so refined grids with many thousands of points
//! stay cheap.

use crate::operator::CyclicTridiagonal;

/// Number of negative pivots in the unpivoted `LDLᵀ` of a symmetric
/// cyclic-tridiagonal matrix, which by Sylvester's law is the number of
/// negative eigenvalues. `L` is banded except for a dense last row, which is
/// eliminated on the fly.
pub(crate) fn negative_pivots(m: &CyclicTridiagonal, pivmin: f64) -> usize {
    let n = m.len();
    let a = m.diag();
    let b = m.edges();
    let guard = |d: f64| if d.abs() < pivmin { -pivmin } else { d };

    let mut negatives = 0;
    let mut next_diag = a[0];
    // coupling between the current row and row N-1
    let mut coupling = b[n - 1];
    let mut last_diag = a[n - 1];
    for i in 0..n - 1 {
        let d = guard(next_diag);
        if d < 0.0 {
            negatives += 1;
        }
        last_diag -= coupling * coupling / d;
        if i + 1 < n - 1 {
            let l = b[i] / d;
            next_diag = a[i + 1] - b[i] * l;
            coupling *= -l;
            if i + 1 == n - 2 {
                coupling += b[n - 2];
            }
        }
    }
    if guard(last_diag) < 0.0 {
        negatives += 1;
    }
    negatives
}

/// Number of eigenvalues of `A v = λ B v` strictly below `sigma`.
pub(crate) fn count_below(a: &CyclicTridiagonal, b: &CyclicTridiagonal, sigma: f64) -> usize {
    let shifted = a.shifted(sigma, b);
    let pivmin = pivot_floor(&shifted);
    negative_pivots(&shifted, pivmin)
}

pub(crate) fn pivot_floor(m: &CyclicTridiagonal) -> f64 {
    1e-30 * m.norm_inf().max(1.0)
}

/// A shift with no eigenvalue below it.
pub(crate) fn lower_bound(a: &CyclicTridiagonal, b: &CyclicTridiagonal) -> f64 {
    let n = a.len();
    let gersh = |m: &CyclicTridiagonal| -> (f64, f64) {
        (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let r = m.edges()[(i + n - 1) % n].abs() + m.edges()[i].abs();
            (lo.min(m.diag()[i] - r), hi.max(m.diag()[i] + r))
        })
    };
    let (a_lo, _) = gersh(a);
    let (b_lo, b_hi) = gersh(b);
    let mut lo = if b_lo > 0.0 {
        (a_lo / b_lo).min(a_lo / b_hi)
    } else {
        a_lo
    };
    lo -= 1e-12 * lo.abs() + 1e-300;
    let mut widen = lo.abs().max(1.0);
    while count_below(a, b, lo) > 0 {
        lo -= widen;
        widen *= 2.0;
    }
    lo
}

/// The `j`-th smallest eigenvalue (0-based) by bisection on inertia counts.
pub(crate) fn bisect(a: &CyclicTridiagonal, b: &CyclicTridiagonal, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    // invariant: count(lo) <= j < count(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if count_below(a, b, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Deterministic start vector with no special symmetry.
pub(crate) fn start_vector(n: usize, salt: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = (i + 7 * salt) as f64;
            1.0 + 0.5 * (1.618_033_988_749_895 * t).sin() + 0.25 * (0.377 * t * t).cos()
        })
        .collect()
}

/// Visits the cycle alternately from both ends (`0, N-1, 1, N-2, ...`), which
/// turns a cyclic-tridiagonal matrix into a pentadiagonal one.
fn interleaved_order(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0, n - 1);
    while lo <= hi {
        order.push(lo);
        if hi != lo {
            order.push(hi);
        }
        lo += 1;
        if hi == 0 {
            break;
        }
        hi -= 1;
    }
    order
}

const BAND_WIDTH: usize = 7;
const BAND_OFFSET: usize = 2;

/// LU with partial pivoting of the interleaved (pentadiagonal) form of a
/// cyclic-tridiagonal matrix. Used for the inverse-iteration solves, where
/// the unpivoted `LDLᵀ` is not accurate enough near repeated eigenvalues.
pub(crate) struct BandLu {
    order: Vec<usize>,
    // row i holds columns i-2 ..= i+4
    rows: Vec<[f64; BAND_WIDTH]>,
    pivots: Vec<usize>,
    multipliers: Vec<[f64; 2]>,
}

impl BandLu {
    pub(crate) fn factor(m: &CyclicTridiagonal) -> Self {
        let n = m.len();
        let order = interleaved_order(n);
        let mut position = vec![0; n];
        for (p, &node) in order.iter().enumerate() {
            position[node] = p;
        }
        let mut rows = vec![[0.0; BAND_WIDTH]; n];
        for node in 0..n {
            let next = (node + 1) % n;
            let (i, j) = (position[node], position[next]);
            rows[i][BAND_OFFSET] = m.diag()[node];
            rows[i][j + BAND_OFFSET - i] = m.edges()[node];
            rows[j][i + BAND_OFFSET - j] = m.edges()[node];
        }
        let floor = f64::EPSILON * m.norm_inf().max(f64::MIN_POSITIVE);

        let at = |i: usize, j: usize| j + BAND_OFFSET - i;
        let mut pivots = vec![0; n];
        let mut multipliers = vec![[0.0; 2]; n];
        for i in 0..n {
            let last = (i + 2).min(n - 1);
            let mut p = i;
            for r in i + 1..=last {
                if rows[r][at(r, i)].abs() > rows[p][at(p, i)].abs() {
                    p = r;
                }
            }
            pivots[i] = p;
            let right = (i + 4).min(n - 1);
            if p != i {
                for j in i..=right {
                    let (a, b) = (at(i, j), at(p, j));
                    let t = rows[i][a];
                    rows[i][a] = rows[p][b];
                    rows[p][b] = t;
                }
            }
            if rows[i][at(i, i)].abs() < floor {
                rows[i][at(i, i)] = floor;
            }
            let pivot = rows[i][at(i, i)];
            for r in i + 1..=last {
                let f = rows[r][at(r, i)] / pivot;
                multipliers[i][r - i - 1] = f;
                rows[r][at(r, i)] = 0.0;
                for j in i + 1..=right {
                    let v = rows[i][at(i, j)];
                    rows[r][at(r, j)] -= f * v;
                }
            }
        }
        Self {
            order,
            rows,
            pivots,
            multipliers,
        }
    }

    pub(crate) fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut y: Vec<f64> = self.order.iter().map(|&node| rhs[node]).collect();
        for i in 0..n {
            y.swap(i, self.pivots[i]);
            let yi = y[i];
            for (k, f) in self.multipliers[i].iter().enumerate() {
                if i + 1 + k < n {
                    y[i + 1 + k] -= f * yi;
                }
            }
        }
        for i in (0..n).rev() {
            let row = &self.rows[i];
            let mut s = y[i];
            for j in i + 1..=(i + 4).min(n - 1) {
                s -= row[j + BAND_OFFSET - i] * y[j];
            }
            y[i] = s / row[BAND_OFFSET];
        }
        for (p, &node) in self.order.iter().enumerate() {
            rhs[node] = y[p];
        }
    }
}
