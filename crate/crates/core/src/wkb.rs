//! WKB reference for well-resolved, turning-point-free modes:
//! `ψ ≈ (λ/(λ−V))^{1/4} exp(±i(√λ x − λ^{-1/2} ∫V))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eigen::{EigenPair, SpectrumSlice};
use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, Grid, Potential};

/// Modes need at least this many grid points per nominal wavelength.
pub const POINTS_PER_WAVELENGTH: f64 = 10.0;

/// A neighbor is treated as the degenerate partner when its gap is below this
/// fraction of the gap on the other side.
pub const PARTNER_GAP_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WkbMode {
    pub lambda: f64,
    pub amplitude: Vec<f64>,
    /// `√λ x − λ^{-1/2} ∫_{x_min}^{x} V`.
    pub phase: Vec<f64>,
    pub branch: Branch,
}

impl WkbMode {
    /// Real part of the branch, `amplitude · cos(±phase)`.
    pub fn real(&self) -> Vec<f64> {
        let s = self.branch.sign();
        self.amplitude
            .iter()
            .zip(&self.phase)
            .map(|(a, p)| a * (s * p).cos())
            .collect()
    }

    pub fn max_amplitude_deviation(&self) -> f64 {
        self.amplitude.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Smallest admissible `λ` for a potential whose maximum is `max_v`.
pub fn turning_point_bound(max_v: f64) -> f64 {
    (2.0 * max_v).max(0.0)
}

/// Largest `λ` whose nominal wavelength `2π/√λ` still spans ten steps.
pub fn resolution_bound(h: f64) -> f64 {
    let k = 2.0 * PI / (POINTS_PER_WAVELENGTH * h);
    k * k
}

pub fn wkb_evaluate(p: &Potential, g: &Grid, lambda: f64, branch: Branch) -> Result<WkbMode> {
    let values = p.resample(g);
    let max_v = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound = turning_point_bound(max_v);
    if !(lambda > bound) {
        return Err(Error::TurningPoint { lambda, bound });
    }
    let root = lambda.sqrt();
    let integral = cumulative_integral(&values, g);
    let amplitude = values.iter().map(|v| (lambda / (lambda - v)).powf(0.25)).collect();
    let phase = (0..g.len()).map(|n| root * g.x(n) - integral[n] / root).collect();
    Ok(WkbMode {
        lambda,
        amplitude,
        phase,
        branch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeMethod {
    AnalyticSignal,
    Extrema,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WkbReport {
    pub rank: usize,
    pub lambda: f64,
    pub wavelength: f64,
    pub min_wavelength: f64,
    pub method: AmplitudeMethod,
    pub partner_rank: Option<usize>,
    /// `max_n |a_FD − a_WKB| / a_WKB` after both are scaled to unit RMS.
    pub max_deviation: f64,
    /// `1/√λ`.
    pub error_scale: f64,
    pub within_scale: bool,
    pub wkb_amplitude_deviation: f64,
}

pub fn wkb_compare(slice: &SpectrumSlice, p: &Potential, g: &Grid, rank: usize) -> Result<WkbReport> {
    let pair = slice.rank(rank)?;
    if pair.vector.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: g.len(),
            got: pair.vector.len(),
        });
    }
    let lambda = pair.lambda;
    let min_wavelength = POINTS_PER_WAVELENGTH * g.step();
    let wavelength = if lambda > 0.0 {
        2.0 * PI / lambda.sqrt()
    } else {
        f64::INFINITY
    };
    if !(lambda > 0.0 && wavelength >= min_wavelength) {
        return Err(Error::Unresolved {
            wavelength: if lambda > 0.0 { wavelength } else { f64::NAN },
            minimum: min_wavelength,
        });
    }
    let wkb = wkb_evaluate(p, g, lambda, Branch::Plus)?;

    let partner = partner_index(slice, rank - 1);
    let (method, fd) = match partner {
        Some(j) => (
            AmplitudeMethod::AnalyticSignal,
            analytic_amplitude(pair, &slice.pairs[j]),
        ),
        None => (AmplitudeMethod::Extrema, extrema_amplitude(&pair.vector)),
    };
    let fd = unit_rms(&fd);
    let reference = unit_rms(&wkb.amplitude);
    let max_deviation = fd
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    let error_scale = lambda.sqrt().recip();
    Ok(WkbReport {
        rank,
        lambda,
        wavelength,
        min_wavelength,
        method,
        partner_rank: partner.map(|j| slice.pairs[j].rank_from_top),
        max_deviation,
        error_scale,
        within_scale: max_deviation <= error_scale,
        wkb_amplitude_deviation: wkb.max_amplitude_deviation(),
    })
}

/// Highest-λ mode of the slice inside the WKB band, as a rank.
pub fn select_band_rank(slice: &SpectrumSlice, p: &Potential) -> Option<usize> {
    let values = p.resample(&slice.grid);
    let max_v = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = turning_point_bound(max_v);
    let hi = resolution_bound(slice.grid.step());
    slice
        .pairs
        .iter()
        .find(|q| q.lambda > lo && q.lambda <= hi)
        .map(|q| q.rank_from_top)
}

/// Index of the near-degenerate neighbor of `slice.pairs[i]`, if any.
fn partner_index(slice: &SpectrumSlice, i: usize) -> Option<usize> {
    let pairs = &slice.pairs;
    if i == 0 || i + 1 >= pairs.len() {
        return None;
    }
    let up = pairs[i - 1].lambda - pairs[i].lambda;
    let down = pairs[i].lambda - pairs[i + 1].lambda;
    if up < PARTNER_GAP_RATIO * down {
        Some(i - 1)
    } else if down < PARTNER_GAP_RATIO * up {
        Some(i + 1)
    } else {
        None
    }
}

fn analytic_amplitude(a: &EigenPair, b: &EigenPair) -> Vec<f64> {
    a.vector.iter().zip(&b.vector).map(|(x, y)| x.hypot(*y)).collect()
}

/// Periodic linear interpolation of `|v|` through its local maxima.
fn extrema_amplitude(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let m: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let peaks: Vec<usize> = (0..n)
        .filter(|&i| m[i] > 0.0 && m[i] >= m[(i + n - 1) % n] && m[i] >= m[(i + 1) % n])
        .collect();
    match peaks.len() {
        0 => m,
        1 => vec![m[peaks[0]]; n],
        _ => {
            let mut out = vec![0.0; n];
            for (k, &p) in peaks.iter().enumerate() {
                let q = peaks[(k + 1) % peaks.len()];
                let span = (q + n - p) % n;
                let span = if span == 0 { n } else { span };
                for s in 0..span {
                    let t = s as f64 / span as f64;
                    out[(p + s) % n] = (1.0 - t) * m[p] + t * m[q];
                }
            }
            out
        }
    }
}

fn unit_rms(v: &[f64]) -> Vec<f64> {
    let rms = (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    v.iter().map(|x| x / rms).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigen_full;
    use crate::operator::{assemble, Scheme};
    use approx::assert_relative_eq;

    fn default_grid() -> Grid {
        Grid::new(-16.0, 32.0, 0.1).unwrap()
    }

    #[test]
    fn free_wave() {
        let g = default_grid();
        let w = wkb_evaluate(&Potential::zero(), &g, 100.0, Branch::Plus).unwrap();
        assert!(w.amplitude.iter().all(|&a| a == 1.0));
        for n in 0..g.len() {
            assert_relative_eq!(w.phase[n], 10.0 * g.x(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn sech_prefactor_at_the_peak() {
        let g = default_grid();
        let w = wkb_evaluate(&Potential::sech(3.0, 0.5).unwrap(), &g, 100.0, Branch::Minus).unwrap();
        assert_relative_eq!(w.amplitude[160], (100.0f64 / 97.0).powf(0.25), max_relative = 1e-14);
        assert!((w.amplitude[160] - 1.00765).abs() < 1e-5);
        let d = w.max_amplitude_deviation();
        assert!(d <= 3.0 / 200.0 * (1.0 + 3.0 / 100.0));
    }

    #[test]
    fn turning_points_are_rejected() {
        let g = default_grid();
        let e = wkb_evaluate(&Potential::sech(3.0, 0.5).unwrap(), &g, 4.0, Branch::Plus).unwrap_err();
        assert!(matches!(e, Error::TurningPoint { .. }));
    }

    #[test]
    fn phase_derivative_is_local_wavenumber() {
        let g = default_grid();
        let p = Potential::sech(3.0, 0.5).unwrap();
        let lambda = 30.0;
        let w = wkb_evaluate(&p, &g, lambda, Branch::Plus).unwrap();
        let h = g.step();
        for n in 1..g.len() - 1 {
            let d = (w.phase[n + 1] - w.phase[n - 1]) / (2.0 * h);
            let expected = lambda.sqrt() - p.eval(g.x(n)) / lambda.sqrt();
            assert!((d - expected).abs() < 2e-3, "n = {n}: {d} vs {expected}");
        }
    }

    #[test]
    fn amplitude_deviation_decreases_with_lambda() {
        let g = default_grid();
        let p = Potential::sech(3.0, 0.5).unwrap();
        let devs: Vec<f64> = [7.0, 10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&l| wkb_evaluate(&p, &g, l, Branch::Plus).unwrap().max_amplitude_deviation())
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    }

    #[test]
    fn resolved_modes_follow_the_prefactor() {
        let g = default_grid();
        for (p, bound) in [(Potential::zero(), 1e-8), (Potential::sech(3.0, 0.5).unwrap(), 0.16)] {
            let op = assemble(Scheme::CentralDifference, &p, &g).unwrap();
            let slice = eigen_full(&op).unwrap();
            let rank = select_band_rank(&slice, &p).unwrap();
            let r = wkb_compare(&slice, &p, &g, rank).unwrap();
            assert!(r.lambda <= resolution_bound(0.1));
            assert!(r.lambda > 35.0, "{r:?}");
            assert_eq!(r.method, AmplitudeMethod::AnalyticSignal);
            assert!(r.max_deviation <= bound, "{r:?}");
        }
    }

    #[test]
    fn nyquist_mode_is_too_coarse() {
        let g = default_grid();
        let p = Potential::sech(3.0, 0.5).unwrap();
        let op = assemble(Scheme::CentralDifference, &p, &g).unwrap();
        let slice = eigen_full(&op).unwrap();
        assert!(matches!(wkb_compare(&slice, &p, &g, 1), Err(Error::Unresolved { .. })));
    }

    #[test]
    fn extrema_envelope_of_a_beat() {
        let n = 400;
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 * 2.0 * PI;
                (1.0 + 0.2 * t.cos()) * (40.0 * t).sin()
            })
            .collect();
        let env = extrema_amplitude(&v);
        for (i, e) in env.iter().enumerate() {
            let t = i as f64 / n as f64 * 2.0 * PI;
            // sampled peaks sit up to half a step off the true maxima
            assert!((e - (1.0 + 0.2 * t.cos())).abs() < 0.06, "i = {i}");
        }
    }
}
