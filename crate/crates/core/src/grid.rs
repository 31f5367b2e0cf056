//! Periodic sampling grids and the potentials sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `N * h == L`.
const DIVISIBILITY_TOL: f64 = 1e-12;

/// Uniform periodic 1-D lattice `x_n = x_min + n h`, `n = 0..N`, with
/// `x_min + L` identified with `x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    length: f64,
    step: f64,
    len: usize,
}

impl Grid {
    pub fn new(x_min: f64, length: f64, step: f64) -> Result<Self> {
        if !x_min.is_finite() {
            return Err(Error::InvalidGrid(format!("x_min must be finite, got {x_min}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        let ratio = length / step;
        let len = ratio.round();
        if len < 1.0 || (len * step - length).abs() > DIVISIBILITY_TOL * length {
            return Err(Error::NonDivisibleStep { length, step, ratio });
        }
        Ok(Self {
            x_min,
            length,
            step,
            len: len as usize,
        })
    }

    /// Like [`Grid::new`] but also rejects odd point counts, for callers that
    /// demodulate against the `(-1)^n` carrier.
    pub fn with_nyquist(x_min: f64, length: f64, step: f64) -> Result<Self> {
        let grid = Self::new(x_min, length, step)?;
        grid.require_even()?;
        Ok(grid)
    }

    pub fn require_even(&self) -> Result<()> {
        if self.len.is_multiple_of(2) {
            Ok(())
        } else {
            Err(Error::OddPointCount(self.len))
        }
    }

    /// Same domain with the step divided by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid("refinement factor must be at least 1".into()));
        }
        Self::new(self.x_min, self.length, self.step / factor as f64)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Right end of the periodic cell (not itself a sample point).
    pub fn x_max(&self) -> f64 {
        self.x_min + self.length
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x(&self, n: usize) -> f64 {
        self.x_min + n as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|n| self.x(n)).collect()
    }

    /// Signed periodic displacement `x - center` wrapped into `[-L/2, L/2)`.
    pub fn wrapped_offset(&self, x: f64, center: f64) -> f64 {
        let half = 0.5 * self.length;
        (x - center + half).rem_euclid(self.length) - half
    }

    /// Index of the sample closest to `x` (periodically).
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = ((x - self.x_min) / self.step).round();
        (t.rem_euclid(self.len as f64) as usize) % self.len
    }
}

/// Samples of a potential bound to the grid they were taken on.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    grid: Grid,
    values: Vec<f64>,
}

impl Tabulated {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V(x) = amplitude * sech(width * x)`.
    Sech {
        amplitude: f64,
        width: f64,
    },
    Tabulated(Tabulated),
}

impl Potential {
    pub fn sech(amplitude: f64, width: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "amplitude must be finite, got {amplitude}"
            )));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidPotential(format!("width must be positive, got {width}")));
        }
        Ok(Potential::Sech { amplitude, width })
    }

    pub fn zero() -> Self {
        Potential::Sech {
            amplitude: 0.0,
            width: 1.0,
        }
    }

    pub fn tabulated(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(n) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!("sample {n} is not finite")));
        }
        Ok(Potential::Tabulated(Tabulated { grid, values }))
    }

    /// Pointwise value. Tabulated potentials are interpolated linearly and
    /// periodically between their samples.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Sech { amplitude, width } => amplitude / (width * x).cosh(),
            Potential::Tabulated(t) => {
                let g = &t.grid;
                let s = (x - g.x_min()).rem_euclid(g.length()) / g.step();
                let i = (s.floor() as usize).min(g.len() - 1);
                let frac = s - i as f64;
                let j = (i + 1) % g.len();
                t.values[i] * (1.0 - frac) + t.values[j] * frac
            }
        }
    }

    /// `V(x_n)` for every grid point. A tabulated potential only samples on
    /// the grid it is bound to.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Potential::Sech { .. } => Ok(grid.points().into_iter().map(|x| self.eval(x)).collect()),
            Potential::Tabulated(t) => {
                if t.grid != *grid {
                    return Err(Error::GridMismatch {
                        expected: t.grid.len(),
                        got: grid.len(),
                    });
                }
                Ok(t.values.clone())
            }
        }
    }

    /// Samples on an arbitrary grid, interpolating tabulated data when the
    /// grids differ.
    pub fn resample(&self, grid: &Grid) -> Vec<f64> {
        match self {
            Potential::Tabulated(t) if t.grid == *grid => t.values.clone(),
            _ => grid.points().into_iter().map(|x| self.eval(x)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Potential::Sech { amplitude, width } => Potential::Sech {
                amplitude: amplitude * factor,
                width: *width,
            },
            Potential::Tabulated(t) => Potential::Tabulated(Tabulated {
                grid: t.grid,
                values: t.values.iter().map(|v| v * factor).collect(),
            }),
        }
    }

    /// Closed-form antiderivative anchored at `x = 0`, when one exists.
    ///
    /// For the sech family this is `(2A/w) atan(tanh(w x / 2))`, i.e.
    /// `(A/w) gd(w x)` with `gd` the Gudermannian.
    pub fn antiderivative(&self, x: f64) -> Option<f64> {
        match self {
            Potential::Sech { amplitude, width } => Some(2.0 * amplitude / width * (0.5 * width * x).tanh().atan()),
            Potential::Tabulated(_) => None,
        }
    }
}

/// Cumulative trapezoid integral of the sampled potential at every node,
/// `I[n] = ∫_{x_min}^{x_n} V`, plus the full-cell integral as the last entry
/// (using periodicity for the closing segment).
pub fn cumulative_integral(values: &[f64], grid: &Grid) -> Vec<f64> {
    let n = values.len();
    let h = grid.step();
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for i in 0..n {
        let next = values[(i + 1) % n];
        acc += 0.5 * h * (values[i] + next);
        out.push(acc);
    }
    out
}

/// `∫_{x_min}^{x} V(s) ds` by the composite trapezoid rule on the grid, with
/// linear interpolation inside the last partial cell.
pub fn phase_integral(potential: &Potential, grid: &Grid, x: f64) -> Result<f64> {
    let lo = grid.x_min();
    let hi = grid.x_max();
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    let values = potential.sample(grid)?;
    let cumulative = cumulative_integral(&values, grid);
    let n = grid.len();
    let s = (x - lo) / grid.step();
    let cell = (s.floor() as usize).min(n);
    if cell == n {
        return Ok(cumulative[n]);
    }
    let frac = s - cell as f64;
    let left = values[cell];
    let right = values[(cell + 1) % n];
    let at_x = left + frac * (right - left);
    Ok(cumulative[cell] + 0.5 * frac * grid.step() * (left + at_x))
}

/// Analytic counterpart of [`phase_integral`] for potentials with a closed-form
/// antiderivative.
pub fn phase_integral_exact(potential: &Potential, grid: &Grid, x: f64) -> Option<f64> {
    Some(potential.antiderivative(x)? - potential.antiderivative(grid.x_min())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_grid() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        assert_eq!(g.len(), 320);
        assert_eq!(g.x(0), -16.0);
        assert_relative_eq!(g.x(319), 15.9, epsilon = 1e-12);
        assert_eq!(g.x(160), 0.0);
    }

    #[test]
    fn small_exact_grid() {
        let g = Grid::new(0.0, 4.0, 1.0).unwrap();
        assert_eq!(g.points(), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_non_divisible_step() {
        let err = Grid::new(-16.0, 32.0, 0.3).unwrap_err();
        assert!(matches!(err, Error::NonDivisibleStep { .. }));
        assert!(err.to_string().contains("must divide"));
    }

    #[test]
    fn rejects_odd_count_for_nyquist() {
        assert_eq!(Grid::with_nyquist(0.0, 3.0, 1.0).unwrap_err(), Error::OddPointCount(3));
        assert!(Grid::with_nyquist(0.0, 4.0, 1.0).is_ok());
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(Grid::new(0.0, -1.0, 0.1).is_err());
        assert!(Grid::new(0.0, 1.0, 0.0).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 0.1).is_err());
        assert!(Grid::new(0.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn sech_samples() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let v = Potential::sech(3.0, 0.5).unwrap().sample(&g).unwrap();
        assert_eq!(v[160], 3.0);
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        assert_eq!(imax, 160);
        // 3 sech(8) = 6 / (e^8 + e^-8)
        let edge = 6.0 / (8f64.exp() + (-8f64).exp());
        assert_relative_eq!(v[0], edge, max_relative = 1e-14);
        assert_relative_eq!(v[0], 2.013e-3, max_relative = 1e-3);
        let zero = Potential::sech(0.0, 0.5).unwrap().sample(&g).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sech_is_even_on_symmetric_nodes() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let v = Potential::sech(3.0, 0.5).unwrap().sample(&g).unwrap();
        for n in 1..160 {
            let (a, b) = (v[160 - n], v[160 + n]);
            assert!((a - b).abs() <= 1e-14, "n = {n}");
        }
    }

    #[test]
    fn tabulated_is_bound_to_its_grid() {
        let g = Grid::new(0.0, 4.0, 1.0).unwrap();
        let other = Grid::new(0.0, 4.0, 0.5).unwrap();
        let p = Potential::tabulated(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.sample(&g).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(p.sample(&other), Err(Error::GridMismatch { .. })));
        assert_eq!(p.resample(&other)[1], 1.5);
        // wraps from the last sample back to the first
        assert_eq!(p.resample(&other)[7], 2.5);
        assert!(Potential::tabulated(g, vec![0.0, f64::INFINITY, 0.0, 0.0]).is_err());
        assert!(Potential::tabulated(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn phase_integral_of_zero_is_zero() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let p = Potential::zero();
        for x in [-16.0, -3.33, 0.0, 15.95, 16.0] {
            assert_eq!(phase_integral(&p, &g, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn phase_integral_rejects_outside_points() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let p = Potential::sech(3.0, 0.5).unwrap();
        assert!(matches!(phase_integral(&p, &g, 16.5), Err(Error::OutOfDomain { .. })));
        assert!(phase_integral(&p, &g, -16.01).is_err());
    }

    #[test]
    fn phase_integral_off_node_interpolates() {
        // V linear on a cell: trapezoid with interpolation is exact there.
        let g = Grid::new(0.0, 4.0, 1.0).unwrap();
        let p = Potential::tabulated(g, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(phase_integral(&p, &g, 1.5).unwrap(), 0.5 + 0.5 * (1.0 + 1.5) * 0.5);
        // closing segment uses V(x_0) at x_max
        assert_relative_eq!(phase_integral(&p, &g, 4.0).unwrap(), 0.5 + 1.5 + 2.5 + 1.5);
    }
}
