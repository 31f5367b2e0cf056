//! Demodulation of Nyquist-carrier modes and the localization measure.

use std::f64::consts::TAU;

use crate::eigen::{orient, EigenPair, SpectrumSlice};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operator::DiscreteOperator;

/// A mode is localized when less than this fraction of its mass sits in the
/// tail region.
pub const LOCALIZATION_THRESHOLD: f64 = 0.01;

/// The tail region is everything farther than this fraction of `L` from the
/// center, i.e. the outer quarter of the periodic cell.
pub const TAIL_START: f64 = 0.375;

/// Envelope samples below this fraction of the peak are ignored when counting
/// sign changes.
pub const NODE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeAnalysis {
    pub rank: usize,
    pub lambda: f64,
    pub residual: f64,
    /// `(-1)^n ψ_n`, oriented so the largest entry is positive.
    pub envelope_signed: Vec<f64>,
    /// `|ψ_n|` scaled to a maximum of exactly 1.
    pub envelope_abs: Vec<f64>,
    /// `λ` minus the carrier eigenvalue of the free operator.
    pub delta_lambda: f64,
    pub tail_mass: f64,
    pub localized: bool,
}

impl ModeAnalysis {
    pub fn node_count(&self) -> usize {
        node_count(&self.envelope_signed)
    }
}

/// Grid, carrier eigenvalue and (optional) fixed center for tail
/// measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demodulation {
    pub grid: Grid,
    /// `4/h²` for central differences.
    pub ceiling: f64,
    /// Center of the tail window. `None` centers each envelope on its own
    /// circular mean.
    pub anchor: Option<f64>,
}

impl Demodulation {
    pub fn new(grid: Grid, ceiling: f64) -> Self {
        Self {
            grid,
            ceiling,
            anchor: None,
        }
    }

    /// Uses the operator's carrier eigenvalue and anchors the tail window on
    /// the center of the potential. Measuring from the potential keeps
    /// envelopes that are pushed away from a barrier (and pile up at the far
    /// side of the cell) from passing as localized.
    pub fn for_operator(op: &DiscreteOperator) -> Self {
        Self {
            grid: *op.grid(),
            ceiling: op.nyquist_ceiling(),
            anchor: potential_center(op.potential(), op.grid()),
        }
    }

    pub fn with_anchor(mut self, anchor: Option<f64>) -> Self {
        self.anchor = anchor;
        self
    }
}

/// Multiplies by the `(-1)^n` carrier. Applying it twice is the identity.
pub fn carrier_product(v: &[f64]) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(n, x)| if n % 2 == 0 { *x } else { -*x })
        .collect()
}

pub fn demodulate(pair: &EigenPair, ctx: &Demodulation) -> Result<ModeAnalysis> {
    let grid = &ctx.grid;
    grid.require_even()?;
    if pair.vector.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: pair.vector.len(),
        });
    }
    let peak = pair.vector.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut envelope_signed = carrier_product(&pair.vector);
    orient(&mut envelope_signed);
    let envelope_abs: Vec<f64> = pair.vector.iter().map(|x| x.abs() / peak).collect();
    let tail_mass = match ctx.anchor {
        Some(center) => tail_mass_about(&envelope_abs, grid, center)?,
        None => tail_mass(&envelope_abs, grid)?,
    };
    Ok(ModeAnalysis {
        rank: pair.rank_from_top,
        lambda: pair.lambda,
        residual: pair.residual,
        envelope_signed,
        envelope_abs,
        delta_lambda: pair.lambda - ctx.ceiling,
        tail_mass,
        localized: tail_mass < LOCALIZATION_THRESHOLD,
    })
}

/// Circular mean position of `weights` on the periodic cell, or `None` when
/// the weights have no preferred direction (e.g. uniform).
pub fn circular_mean(weights: &[f64], grid: &Grid) -> Option<f64> {
    let total: f64 = weights.iter().map(|w| w.abs()).sum();
    if total == 0.0 {
        return None;
    }
    let (mut c, mut s) = (0.0, 0.0);
    for (n, w) in weights.iter().enumerate() {
        let theta = TAU * n as f64 / grid.len() as f64;
        c += w * theta.cos();
        s += w * theta.sin();
    }
    if c.hypot(s) <= 1e-12 * total {
        return None;
    }
    let theta = s.atan2(c).rem_euclid(TAU);
    Some(grid.x_min() + theta / TAU * grid.length())
}

/// Center of `|V|` on the grid, if the potential has one.
pub fn potential_center(values: &[f64], grid: &Grid) -> Option<f64> {
    let weights: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    circular_mean(&weights, grid)
}

/// Fraction of `Σ e_n²` in the outer quarter of the cell, measured from the
/// envelope's own circular mean.
pub fn tail_mass(envelope: &[f64], grid: &Grid) -> Result<f64> {
    let weights: Vec<f64> = envelope.iter().map(|e| e * e).collect();
    let center = circular_mean(&weights, grid).unwrap_or(grid.x_min());
    tail_mass_about(envelope, grid, center)
}

/// Fraction of `Σ e_n²` farther than `0.375 L` (periodically) from `center`.
///
/// Each sample stands for a cell of width `h`, and counts with the fraction
/// of that cell inside the tail region, so a flat envelope gives exactly 1/4.
pub fn tail_mass_about(envelope: &[f64], grid: &Grid, center: f64) -> Result<f64> {
    if envelope.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: envelope.len(),
        });
    }
    let h = grid.step();
    let start = TAIL_START * grid.length();
    let (mut total, mut tail) = (0.0, 0.0);
    for (n, e) in envelope.iter().enumerate() {
        let mass = e * e;
        let d = grid.wrapped_offset(grid.x(n), center).abs();
        let inside = ((d + 0.5 * h - start) / h).clamp(0.0, 1.0);
        total += mass;
        tail += inside * mass;
    }
    if total == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(tail / total)
}

/// Sign changes along the (non-periodic) sample sequence, skipping samples
/// below [`NODE_FLOOR`] of the peak.
pub fn node_count(signed: &[f64]) -> usize {
    let peak = signed.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = NODE_FLOOR * peak;
    let mut last_sign = 0.0;
    let mut nodes = 0;
    for &x in signed {
        if x.abs() <= floor {
            continue;
        }
        let sign = x.signum();
        if last_sign != 0.0 && sign != last_sign {
            nodes += 1;
        }
        last_sign = sign;
    }
    nodes
}

/// `Σ |v_{n+1} - v_n|` around the cycle.
pub fn total_variation(v: &[f64]) -> f64 {
    let n = v.len();
    (0..n).map(|i| (v[(i + 1) % n] - v[i]).abs()).sum()
}

/// Number of consecutive localized modes from the top of the slice.
pub fn count_localized(slice: &SpectrumSlice, ctx: &Demodulation) -> Result<usize> {
    let mut count = 0;
    for pair in &slice.pairs {
        if !demodulate(pair, ctx)?.localized {
            break;
        }
        count += 1;
    }
    Ok(count)
}


#[cfg(test)]
mod spectrum_tests {
    use super::*;
    use crate::eigen::top_k;
    use crate::grid::Potential;
    use crate::operator::{assemble, Scheme};

    fn localized(amplitude: f64) -> (usize, Vec<ModeAnalysis>) {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let op = assemble(Scheme::CentralDifference, &Potential::sech(amplitude, 0.5).unwrap(), &g).unwrap();
        let slice = top_k(&op, 8).unwrap();
        let ctx = Demodulation::for_operator(&op);
        let modes = slice.pairs.iter().map(|p| demodulate(p, &ctx).unwrap()).collect();
        (count_localized(&slice, &ctx).unwrap(), modes)
    }

    #[test]
    fn well_of_depth_three_holds_four_modes() {
        let (count, modes) = localized(3.0);
        assert_eq!(count, 4);
        for (j, m) in modes.iter().take(4).enumerate() {
            assert_eq!(m.node_count(), j, "rank {}", m.rank);
            assert!(m.delta_lambda > 0.0);
        }
        assert!(
            (modes[0].delta_lambda - 2.4579).abs() < 1e-3,
            "{}",
            modes[0].delta_lambda
        );
    }

    #[test]
    fn barrier_holds_none() {
        let (count, modes) = localized(-3.0);
        assert_eq!(count, 0);
        assert!(modes.iter().all(|m| m.delta_lambda < 0.0));
    }
}
