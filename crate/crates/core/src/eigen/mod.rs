//! Certified eigenpairs of the symmetric-definite pencil `A v = λ B v`.
//!
//! [`eigen_full`] is the dense path: Cholesky reduction of `B`, Householder
//! tridiagonalization and implicit-shift QL. [`eigen_below`] is the
//! structured path used on refined grids where only the bottom of the
//! spectrum is needed.

mod dense;
mod structured;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operator::{DiscreteOperator, Scheme};

/// Largest operator the dense path accepts.
pub const DENSE_LIMIT: usize = 4096;

/// Residual tolerance relative to `‖A‖∞`.
pub const TOL_EIG: f64 = 1e-10;

/// Tolerance on `vᵀ B v = 1`.
pub const TOL_NORMALIZATION: f64 = 1e-12;

/// Entries within this relative distance of the largest magnitude count as
/// "largest" when orienting a vector, so near-flat vectors orient stably.
const DOMINANT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// B-normalized, oriented so the dominant entry is positive.
    pub vector: Vec<f64>,
    /// `‖A v − λ B v‖₂`.
    pub residual: f64,
    pub rank_from_top: usize,
}

impl EigenPair {
    /// Index of the first entry whose magnitude is (within 1e-9 relative) the
    /// largest.
    pub fn dominant_index(&self) -> usize {
        dominant_index(&self.vector)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    /// Sorted by descending eigenvalue.
    pub pairs: Vec<EigenPair>,
    pub scheme: Scheme,
    pub grid: Grid,
    /// `‖A‖∞` of the operator the pairs came from.
    pub norm_inf: f64,
}

impl SpectrumSlice {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// Pair with the given 1-based rank from the top.
    pub fn rank(&self, rank: usize) -> Result<&EigenPair> {
        rank.checked_sub(1)
            .and_then(|i| self.pairs.get(i))
            .ok_or(Error::RankOutOfRange {
                rank,
                available: self.pairs.len(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub residual: f64,
    /// `vᵀ B v`.
    pub normalization: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub(crate) fn dominant_index(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cut = max * (1.0 - DOMINANT_REL_TOL);
    v.iter().position(|x| x.abs() >= cut).unwrap_or(0)
}

/// Flips `v` so its dominant entry is positive.
pub(crate) fn orient(v: &mut [f64]) {
    let i = dominant_index(v);
    if v[i] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual_norm(op: &DiscreteOperator, lambda: f64, v: &[f64]) -> f64 {
    let av = op.stiffness().mul(v);
    let bv = op.mass().mul(v);
    av.iter()
        .zip(&bv)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn b_normalize(op: &DiscreteOperator, v: &mut [f64]) -> Result<()> {
    let norm2 = op.mass().bilinear(v, v);
    if !(norm2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let s = norm2.sqrt().recip();
    v.iter_mut().for_each(|x| *x *= s);
    Ok(())
}

pub fn tolerance(op: &DiscreteOperator) -> f64 {
    TOL_EIG * op.stiffness().norm_inf()
}

/// Recomputes `‖A v − λ B v‖₂` and `vᵀ B v` with the structured products.
pub fn certify(pair: &EigenPair, op: &DiscreteOperator) -> Certificate {
    let tolerance = tolerance(op);
    if pair.vector.len() != op.len() {
        return Certificate {
            residual: f64::INFINITY,
            normalization: f64::NAN,
            tolerance,
            passed: false,
        };
    }
    let residual = residual_norm(op, pair.lambda, &pair.vector);
    let normalization = op.mass().bilinear(&pair.vector, &pair.vector);
    Certificate {
        residual,
        normalization,
        tolerance,
        passed: residual <= tolerance && (normalization - 1.0).abs() <= TOL_NORMALIZATION,
    }
}

fn finish_pair(op: &DiscreteOperator, lambda: f64, mut vector: Vec<f64>) -> Result<EigenPair> {
    b_normalize(op, &mut vector)?;
    orient(&mut vector);
    let residual = residual_norm(op, lambda, &vector);
    let tol = tolerance(op);
    if !(residual <= tol) {
        return Err(Error::Uncertified {
            residual,
            tolerance: tol,
        });
    }
    Ok(EigenPair {
        lambda,
        vector,
        residual,
        rank_from_top: 0,
    })
}

/// All `N` eigenpairs, descending. Exact ties are ordered by ascending
/// dominant index.
pub fn eigen_full(op: &DiscreteOperator) -> Result<SpectrumSlice> {
    let n = op.len();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            got: n,
            max: DENSE_LIMIT,
        });
    }
    let a = op.stiffness().to_dense();
    let (values, vectors) = if op.is_standard() {
        dense::symmetric_eigen(&a, n)?
    } else {
        let mut l = op.mass().to_dense();
        dense::cholesky(&mut l, n)?;
        let c = dense::reduce_to_standard(&a, &l, n);
        let (values, mut vectors) = dense::symmetric_eigen(&c, n)?;
        for column in vectors.chunks_exact_mut(n) {
            dense::solve_lower_transposed(&l, n, column);
        }
        (values, vectors)
    };

    let mut pairs = values
        .iter()
        .zip(vectors.chunks_exact(n))
        .rev()
        .map(|(&lambda, column)| finish_pair(op, lambda, column.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_by(|x, y| {
        y.lambda
            .total_cmp(&x.lambda)
            .then_with(|| x.dominant_index().cmp(&y.dominant_index()))
    });
    for (i, p) in pairs.iter_mut().enumerate() {
        p.rank_from_top = i + 1;
    }
    Ok(SpectrumSlice {
        pairs,
        scheme: op.scheme(),
        grid: *op.grid(),
        norm_inf: op.stiffness().norm_inf(),
    })
}

/// The `k` largest eigenpairs.
///
/// The selection stands in for a largest-magnitude request, so it fails if an
/// excluded eigenvalue is larger in magnitude than a selected one.
pub fn top_k(op: &DiscreteOperator, k: usize) -> Result<SpectrumSlice> {
    let n = op.len();
    if k == 0 || k > n {
        return Err(Error::InvalidCount { k, n });
    }
    let mut full = eigen_full(op)?;
    let smallest_selected = full.pairs[..k]
        .iter()
        .map(|p| p.lambda.abs())
        .fold(f64::INFINITY, f64::min);
    let largest_excluded = full.pairs[k..].iter().map(|p| p.lambda.abs()).fold(0.0, f64::max);
    if largest_excluded > smallest_selected {
        return Err(Error::MagnitudeOrdering {
            negative: full.pairs[n - 1].lambda,
            selected: full.pairs[k - 1].lambda,
        });
    }
    full.pairs.truncate(k);
    Ok(full)
}

/// Number of eigenvalues strictly below `sigma`, from the inertia of
/// `A − σB`.
pub fn count_below(op: &DiscreteOperator, sigma: f64) -> usize {
    structured::count_below(op.stiffness(), op.mass(), sigma)
}

/// All eigenpairs with `λ < upper`, ascending, using inertia bisection and
/// inverse iteration. No size limit.
pub fn eigen_below(op: &DiscreteOperator, upper: f64) -> Result<Vec<EigenPair>> {
    let a = op.stiffness();
    let b = op.mass();
    let n = op.len();
    let count = structured::count_below(a, b, upper);
    if count == 0 {
        return Ok(Vec::new());
    }
    let floor = structured::lower_bound(a, b);

    let mut lambdas = Vec::with_capacity(count);
    let mut lo = floor;
    for j in 0..count {
        let lambda = structured::bisect(a, b, j, lo, upper);
        lambdas.push(lambda);
        // eigenvalues are sorted, so the next search can start here
        lo = lambda.min(upper) - 4.0 * f64::EPSILON * lambda.abs();
        if structured::count_below(a, b, lo) > j + 1 {
            lo = floor;
        }
    }

    let tol = tolerance(op);
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
    for (j, &shift) in lambdas.iter().enumerate() {
        let shifted = a.shifted(shift, b);
        let lu = structured::BandLu::factor(&shifted);
        let mut x = structured::start_vector(n, j);
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for _ in 0..12 {
            let mut y = b.mul(&x);
            lu.solve(&mut y);
            // eigenvectors of distinct eigenvalues are B-orthogonal; projecting
            // the earlier ones out also separates degenerate pairs
            for p in &pairs {
                let c = b.bilinear(&p.vector, &y);
                y.iter_mut().zip(&p.vector).for_each(|(yi, vi)| *yi -= c * vi);
            }
            b_normalize(op, &mut y)?;
            // the Rayleigh quotient is far more accurate than the bisected shift
            let lambda = a.bilinear(&y, &y);
            let r = residual_norm(op, lambda, &y);
            if best.as_ref().is_none_or(|(br, _, _)| r < *br) {
                best = Some((r, lambda, y.clone()));
            }
            x = y;
            if r <= 1e-3 * tol {
                break;
            }
        }
        let (_, lambda, vector) = best.ok_or(Error::ZeroVector)?;
        let mut pair = finish_pair(op, lambda, vector)?;
        pair.rank_from_top = n - j;
        pairs.push(pair);
    }
    pairs.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Potential;
    use crate::operator::{assemble, assemble_samples, CyclicTridiagonal};
    use approx::assert_relative_eq;

    fn cd(potential: &Potential, grid: &Grid) -> DiscreteOperator {
        assemble(Scheme::CentralDifference, potential, grid).unwrap()
    }

    #[test]
    fn nyquist_pair_is_top_with_positive_first_entry() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let op = cd(&Potential::zero(), &g);
        let top = top_k(&op, 1).unwrap();
        let p = &top.pairs[0];
        assert_relative_eq!(p.lambda, 400.0, max_relative = 1e-12);
        let s = (320f64).sqrt().recip();
        for (n, v) in p.vector.iter().enumerate() {
            let expected = if n % 2 == 0 { s } else { -s };
            assert!((v - expected).abs() < 1e-10, "n = {n}: {v}");
        }
        assert_eq!(p.rank_from_top, 1);
    }

    #[test]
    fn top_k_validates_count() {
        let g = Grid::new(0.0, 4.0, 1.0).unwrap();
        let op = cd(&Potential::zero(), &g);
        assert!(matches!(top_k(&op, 0), Err(Error::InvalidCount { .. })));
        assert!(matches!(top_k(&op, 5), Err(Error::InvalidCount { .. })));
        assert_eq!(top_k(&op, 4).unwrap(), eigen_full(&op).unwrap());
    }

    #[test]
    fn small_free_spectrum() {
        let g = Grid::new(0.0, 4.0, 1.0).unwrap();
        let s = eigen_full(&cd(&Potential::zero(), &g)).unwrap();
        let w = s.eigenvalues();
        let expected = [4.0, 2.0, 2.0, 0.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn magnitude_ordering_is_enforced() {
        let g = Grid::new(0.0, 4.0, 1.0).unwrap();
        let op = assemble_samples(Scheme::CentralDifference, vec![-10.0, 0.0, 0.0, 0.0], &g).unwrap();
        // smallest eigenvalue is about -10.5, bigger in magnitude than 4.x
        assert!(matches!(top_k(&op, 1), Err(Error::MagnitudeOrdering { .. })));
        assert!(top_k(&op, 4).is_ok());
    }

    #[test]
    fn certificate_flags_perturbed_vectors() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let op = cd(&Potential::zero(), &g);
        let s = (320f64).sqrt().recip();
        let exact = EigenPair {
            lambda: 4.0 / (0.1 * 0.1),
            vector: (0..320).map(|n| if n % 2 == 0 { s } else { -s }).collect(),
            residual: 0.0,
            rank_from_top: 1,
        };
        let c = certify(&exact, &op);
        assert!(c.passed);
        assert!(c.residual <= 1e-12 * 400.0);

        let mut bad = exact.clone();
        for (i, v) in bad.vector.iter_mut().enumerate() {
            *v += 1e-3 * ((i * 37 % 11) as f64 / 11.0 - 0.5);
        }
        let c = certify(&bad, &op);
        assert!(!c.passed);
        assert!(c.residual > 1e-6 * op.stiffness().norm_inf());

        let short = EigenPair {
            vector: vec![1.0; 3],
            ..exact
        };
        assert!(!certify(&short, &op).passed);
    }

    #[test]
    fn non_definite_mass_is_rejected() {
        // hand-built pencil with an indefinite mass matrix
        let g = Grid::new(0.0, 4.0, 1.0).unwrap();
        let mut op = assemble(Scheme::Numerov, &Potential::zero(), &g).unwrap();
        op = crate::operator::tests_support::with_mass(op, CyclicTridiagonal::new(vec![1.0; 4], vec![2.0; 4]).unwrap());
        assert!(matches!(eigen_full(&op), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn structured_matches_dense_at_the_bottom() {
        let g = Grid::new(-8.0, 16.0, 0.1).unwrap();
        for scheme in [Scheme::CentralDifference, Scheme::Numerov] {
            for amp in [-3.0, 0.0, 2.0] {
                let op = assemble(scheme, &Potential::sech(amp, 0.7).unwrap(), &g).unwrap();
                let full = eigen_full(&op).unwrap();
                let mut ascending = full.eigenvalues();
                ascending.reverse();
                let cut = (9..).find(|&i| ascending[i + 1] - ascending[i] > 1e-3).unwrap();
                let upper = 0.5 * (ascending[cut] + ascending[cut + 1]);
                let low = eigen_below(&op, upper).unwrap_or_else(|e| panic!("{scheme} {amp}: {e}"));
                assert_eq!(low.len(), cut + 1, "{scheme} {amp}");
                for (p, w) in low.iter().zip(&ascending) {
                    assert!(
                        (p.lambda - w).abs() <= 1e-9 * (1.0 + w.abs()),
                        "{scheme} {amp}: {} vs {w}",
                        p.lambda
                    );
                    assert!(certify(p, &op).passed);
                }
                for i in 0..low.len() {
                    for j in 0..i {
                        let d = op.mass().bilinear(&low[i].vector, &low[j].vector);
                        assert!(d.abs() < 1e-8, "{scheme} {amp}: <{i},{j}> = {d}");
                    }
                }
                for sigma in [-5.0, -0.5, 0.1, 3.0, 50.0, 300.0, 1000.0] {
                    let expected = ascending.iter().filter(|&&w| w < sigma).count();
                    assert_eq!(count_below(&op, sigma), expected, "{scheme} {amp} sigma {sigma}");
                }
            }
        }
    }
}
