//! The continuum envelope problem `φ'' + (V − Δλ) φ = 0`.
//!
//! Written as `(−d²/dx² − V) φ = μ φ` with `μ = −Δλ`, its bound states
//! predict which Nyquist modes of the discrete operator are localized. The
//! problem is solved with the central-difference operator on a grid `refine`
//! times finer than the one being checked.

use serde::Serialize;

use crate::eigen::{eigen_below, orient};
use crate::error::{Error, Result};
use crate::grid::{Grid, Potential};
use crate::modes::{
    circular_mean, node_count, potential_center, tail_mass_about, ModeAnalysis, LOCALIZATION_THRESHOLD,
};
use crate::operator::{assemble_samples, Scheme};

pub const DEFAULT_REFINE: usize = 8;

/// States need `μ < −BOUND_CUTOFF · max V` to count as bound.
pub const BOUND_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundState {
    pub delta_lambda_pred: f64,
    /// Sampled on the fine grid, oriented, largest magnitude 1.
    pub phi: Vec<f64>,
    pub node_count: usize,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePrediction {
    /// Descending `Δλ`, ground state first.
    pub bound_states: Vec<BoundState>,
    /// States below the cutoff that are too weakly bound to be localized on
    /// this domain, continuing the order of `bound_states`.
    pub weakly_bound: Vec<BoundState>,
    pub potential: Potential,
    pub fine_grid: Grid,
    pub refine: usize,
}

impl EnvelopePrediction {
    pub fn len(&self) -> usize {
        self.bound_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bound_states.is_empty()
    }

    pub fn delta_lambdas(&self) -> Vec<f64> {
        self.bound_states.iter().map(|s| s.delta_lambda_pred).collect()
    }
}

pub fn predict(potential: &Potential, base_grid: &Grid, refine: usize) -> Result<EnvelopePrediction> {
    if refine == 0 {
        return Err(Error::config("refine", "must be at least 1"));
    }
    let fine_grid = base_grid.refined(refine)?;
    let v = potential.resample(&fine_grid);
    let max_v = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let op = assemble_samples(Scheme::CentralDifference, v.iter().map(|x| -x).collect(), &fine_grid)?;

    // a few ulps of ‖A‖ on top, so roundoff at the continuum edge never
    // produces a spurious state
    let cutoff = -BOUND_CUTOFF * max_v.max(0.0) - 64.0 * f64::EPSILON * op.stiffness().norm_inf();
    let pairs = eigen_below(&op, cutoff)?;

    let center = potential_center(&v, &fine_grid);
    let mut bound_states = Vec::new();
    let mut weakly_bound = Vec::new();
    for pair in pairs {
        let peak = pair.vector.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut phi: Vec<f64> = pair.vector.iter().map(|x| x / peak).collect();
        orient(&mut phi);
        let center = center.or_else(|| {
            let w: Vec<f64> = phi.iter().map(|x| x * x).collect();
            circular_mean(&w, &fine_grid)
        });
        let tail_mass = tail_mass_about(&phi, &fine_grid, center.unwrap_or(fine_grid.x_min()))?;
        let state = BoundState {
            delta_lambda_pred: -pair.lambda,
            node_count: node_count(&phi),
            phi,
            tail_mass,
        };
        if weakly_bound.is_empty() && tail_mass < LOCALIZATION_THRESHOLD {
            bound_states.push(state);
        } else {
            weakly_bound.push(state);
        }
    }
    Ok(EnvelopePrediction {
        bound_states,
        weakly_bound,
        potential: potential.clone(),
        fine_grid,
        refine,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub rank: usize,
    pub delta_lambda_fd: f64,
    pub delta_lambda_pred: f64,
    /// `|Δλ_FD − Δλ_pred|`.
    pub gap: f64,
    /// Normalized correlation of `|ψ|` with `|φ|` on the coarse nodes, at
    /// the best circular shift.
    pub correlation: f64,
    /// Circular shift (coarse samples) that maximizes the correlation.
    pub shift: isize,
    pub fd_nodes: usize,
    pub predicted_nodes: usize,
    pub nodes_match: bool,
}

pub fn compare(pred: &EnvelopePrediction, analysis: &ModeAnalysis, rank: usize) -> Result<MatchReport> {
    if pred.bound_states.is_empty() {
        return Err(Error::NoBoundStates);
    }
    if rank == 0 || rank > pred.bound_states.len() {
        return Err(Error::RankOutOfRange {
            rank,
            available: pred.bound_states.len(),
        });
    }
    let state = &pred.bound_states[rank - 1];
    let n = analysis.envelope_abs.len();
    if n * pred.refine != pred.fine_grid.len() {
        return Err(Error::LengthMismatch {
            expected: pred.fine_grid.len() / pred.refine,
            got: n,
        });
    }
    let coarse: Vec<f64> = (0..n).map(|i| state.phi[i * pred.refine].abs()).collect();
    let (correlation, shift) = best_circular_correlation(&analysis.envelope_abs, &coarse);
    let fd_nodes = analysis.node_count();
    Ok(MatchReport {
        rank,
        delta_lambda_fd: analysis.delta_lambda,
        delta_lambda_pred: state.delta_lambda_pred,
        gap: (analysis.delta_lambda - state.delta_lambda_pred).abs(),
        correlation,
        shift,
        fd_nodes,
        predicted_nodes: state.node_count,
        nodes_match: fd_nodes == rank - 1 && state.node_count == rank - 1,
    })
}

/// `max_s |Σ a_n b_{n+s}| / (‖a‖ ‖b‖)` over circular shifts `s`, with the
/// smallest `|s|` winning ties.
pub fn best_circular_correlation(a: &[f64], b: &[f64]) -> (f64, isize) {
    let n = a.len();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || n == 0 {
        return (0.0, 0);
    }
    let mut best = (f64::NEG_INFINITY, 0isize);
    for s in 0..n {
        let dot: f64 = (0..n).map(|i| a[i] * b[(i + s) % n]).sum();
        let c = dot.abs() / norm;
        let signed = if s > n / 2 { s as isize - n as isize } else { s as isize };
        if c > best.0 || (c == best.0 && signed.abs() < best.1.abs()) {
            best = (c, signed);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::top_k;
    use crate::modes::{demodulate, Demodulation};
    use crate::operator::assemble;

    fn default_grid() -> Grid {
        Grid::new(-16.0, 32.0, 0.1).unwrap()
    }

    #[test]
    fn repulsive_well_has_four_bound_states() {
        let p = predict(&Potential::sech(3.0, 0.5).unwrap(), &default_grid(), DEFAULT_REFINE).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.fine_grid.len(), 2560);
        for (j, s) in p.bound_states.iter().enumerate() {
            assert_eq!(s.node_count, j);
            assert!(s.delta_lambda_pred > 0.0 && s.delta_lambda_pred <= 3.0);
        }
        assert!(p.delta_lambdas().windows(2).all(|w| w[0] > w[1]));
        // the next state is bound but spreads over the whole cell
        assert!(!p.weakly_bound.is_empty());
        assert!(p.weakly_bound[0].tail_mass > LOCALIZATION_THRESHOLD);
    }

    #[test]
    fn attractive_and_free_potentials_have_none() {
        for p in [Potential::sech(-3.0, 0.5).unwrap(), Potential::zero()] {
            let pred = predict(&p, &default_grid(), DEFAULT_REFINE).unwrap();
            assert!(pred.is_empty());
            assert!(pred.weakly_bound.is_empty());
        }
    }

    #[test]
    fn ground_state_is_even() {
        let p = predict(&Potential::sech(3.0, 0.5).unwrap(), &default_grid(), 4).unwrap();
        let phi = &p.bound_states[0].phi;
        let m = phi.len();
        let mid = m / 2;
        for k in 1..mid {
            assert!((phi[mid + k] - phi[mid - k]).abs() < 1e-6, "k = {k}");
        }
    }

    #[test]
    fn fd_modes_match_prediction() {
        let g = default_grid();
        let v = Potential::sech(3.0, 0.5).unwrap();
        let pred = predict(&v, &g, DEFAULT_REFINE).unwrap();
        let op = assemble(Scheme::CentralDifference, &v, &g).unwrap();
        let slice = top_k(&op, 4).unwrap();
        let ctx = Demodulation::for_operator(&op);
        for rank in 1..=4 {
            let m = demodulate(&slice.pairs[rank - 1], &ctx).unwrap();
            let r = compare(&pred, &m, rank).unwrap();
            assert!(r.nodes_match, "{r:?}");
            assert!(r.correlation >= 0.99, "{r:?}");
            assert!(r.gap < 0.05, "{r:?}");
        }
    }

    #[test]
    fn compare_rejects_empty_and_out_of_range() {
        let g = default_grid();
        let op = assemble(Scheme::CentralDifference, &Potential::zero(), &g).unwrap();
        let slice = top_k(&op, 1).unwrap();
        let m = demodulate(&slice.pairs[0], &Demodulation::for_operator(&op)).unwrap();
        let empty = predict(&Potential::zero(), &g, 2).unwrap();
        assert_eq!(compare(&empty, &m, 1).unwrap_err(), Error::NoBoundStates);
        let full = predict(&Potential::sech(3.0, 0.5).unwrap(), &g, 2).unwrap();
        assert!(matches!(
            compare(&full, &m, 9),
            Err(Error::RankOutOfRange { rank: 9, .. })
        ));
        assert!(matches!(compare(&full, &m, 0), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn correlation_finds_the_shift() {
        let a = [0.0, 1.0, 2.0, 1.0, 0.0, 0.0];
        let b = [0.0, 0.0, 0.0, 1.0, 2.0, 1.0];
        let (c, s) = best_circular_correlation(&a, &b);
        assert!((c - 1.0).abs() < 1e-15);
        assert_eq!(s, 2);
    }
}

#[cfg(test)]
mod convergence_tests {
    use super::*;
    use crate::eigen::top_k;
    use crate::modes::{demodulate, Demodulation};
    use crate::operator::assemble;

    fn rank_one_gap(h: f64) -> f64 {
        let g = Grid::new(-16.0, 32.0, h).unwrap();
        let v = Potential::sech(3.0, 0.5).unwrap();
        let pred = predict(&v, &g, DEFAULT_REFINE).unwrap();
        let op = assemble(Scheme::CentralDifference, &v, &g).unwrap();
        let slice = top_k(&op, 1).unwrap();
        let m = demodulate(&slice.pairs[0], &Demodulation::for_operator(&op)).unwrap();
        compare(&pred, &m, 1).unwrap().gap
    }

    #[test]
    fn gap_is_second_order() {
        let gaps: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| rank_one_gap(h)).collect();
        for w in gaps.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "{gaps:?}");
        }
    }

    #[test]
    fn oracle_is_converged_at_default_refinement() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let v = Potential::sech(3.0, 0.5).unwrap();
        let a = predict(&v, &g, DEFAULT_REFINE).unwrap().delta_lambdas();
        let b = predict(&v, &g, 2 * DEFAULT_REFINE).unwrap().delta_lambdas();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(((x - y) / y).abs() < 1e-4, "{x} vs {y}");
        }
    }
}
