//! Periodic three-point discretizations of `-d²/dx² + V(x)`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "cd")]
    CentralDifference,
    #[serde(rename = "numerov")]
    Numerov,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::CentralDifference => "cd",
            Scheme::Numerov => "numerov",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cd" | "central" | "central-difference" => Ok(Scheme::CentralDifference),
            "numerov" => Ok(Scheme::Numerov),
            other => Err(Error::config(
                "scheme",
                format!("expected cd or numerov, got {other:?}"),
            )),
        }
    }
}

/// Symmetric matrix with nonzeros only on the diagonal, the first off-diagonal
/// and the two periodic corners.
///
/// `edge[i]` couples rows `i` and `(i + 1) % N`; `edge[N - 1]` is the corner.
/// One value is stored per edge, so the matrix is symmetric bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    diag: Vec<f64>,
    edge: Vec<f64>,
}

impl CyclicTridiagonal {
    pub fn new(diag: Vec<f64>, edge: Vec<f64>) -> Result<Self> {
        if diag.len() != edge.len() {
            return Err(Error::LengthMismatch {
                expected: diag.len(),
                got: edge.len(),
            });
        }
        if diag.len() < 3 {
            return Err(Error::TooFewPoints(diag.len()));
        }
        Ok(Self { diag, edge })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: vec![1.0; n],
            edge: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn edges(&self) -> &[f64] {
        &self.edge
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.len();
        if i == j {
            self.diag[i]
        } else if j == (i + 1) % n {
            self.edge[i]
        } else if i == (j + 1) % n {
            self.edge[j]
        } else {
            0.0
        }
    }

    /// `out = M x` in O(N).
    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            out[i] = self.edge[prev] * x[prev] + self.diag[i] * x[i] + self.edge[i] * x[next];
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.mul_into(x, &mut out);
        out
    }

    /// `xᵀ M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let next = (i + 1) % n;
                x[i] * self.diag[i] * y[i] + self.edge[i] * (x[i] * y[next] + x[next] * y[i])
            })
            .sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| self.edge[(i + n - 1) % n].abs() + self.diag[i].abs() + self.edge[i].abs())
            .fold(0.0, f64::max)
    }

    /// `self - sigma * other`, same sparsity.
    pub fn shifted(&self, sigma: f64, other: &CyclicTridiagonal) -> CyclicTridiagonal {
        CyclicTridiagonal {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a - sigma * b).collect(),
            edge: self.edge.iter().zip(&other.edge).map(|(a, b)| a - sigma * b).collect(),
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            let j = (i + 1) % n;
            m[i * n + i] = self.diag[i];
            m[i * n + j] = self.edge[i];
            m[j * n + i] = self.edge[i];
        }
        m
    }

    /// Nonzero entries as `(i, j, value)` in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::with_capacity(3 * n);
        for i in 0..n {
            let mut cols = [(i + n - 1) % n, i, (i + 1) % n];
            cols.sort_unstable();
            for j in cols {
                out.push((i, j, self.get(i, j)));
            }
        }
        out
    }
}

/// Symmetric pencil `(A, B)` for `A v = λ B v` on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    scheme: Scheme,
    stiffness: CyclicTridiagonal,
    mass: CyclicTridiagonal,
    grid: Grid,
    potential: Vec<f64>,
}

pub const NUMEROV_MASS_DIAG: f64 = 10.0 / 12.0;
pub const NUMEROV_MASS_EDGE: f64 = 1.0 / 12.0;

impl DiscreteOperator {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn stiffness(&self) -> &CyclicTridiagonal {
        &self.stiffness
    }

    pub fn mass(&self) -> &CyclicTridiagonal {
        &self.mass
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Potential samples the operator was assembled from.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// True when `B` is the identity.
    pub fn is_standard(&self) -> bool {
        self.scheme == Scheme::CentralDifference
    }

    /// Eigenvalue of the `(-1)^n` mode for `V = 0`: `4/h²` for central
    /// differences and `6/h²` for Numerov (whose mass matrix scales the
    /// carrier by `2/3`).
    pub fn nyquist_ceiling(&self) -> f64 {
        nyquist_ceiling(self.scheme, self.grid.step())
    }

    pub fn apply(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: v.len(),
            });
        }
        Ok((self.stiffness.mul(v), self.mass.mul(v)))
    }

    /// Writes `i,j,value` rows for the stiffness matrix (or the mass matrix),
    /// 17 significant digits, LF line endings.
    pub fn dump_csv<W: Write>(&self, which: Matrix, mut out: W) -> io::Result<()> {
        let m = match which {
            Matrix::Stiffness => &self.stiffness,
            Matrix::Mass => &self.mass,
        };
        writeln!(out, "i,j,value")?;
        for (i, j, v) in m.entries() {
            writeln!(out, "{i},{j},{v:.16e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matrix {
    Stiffness,
    Mass,
}

pub fn nyquist_ceiling(scheme: Scheme, h: f64) -> f64 {
    match scheme {
        Scheme::CentralDifference => 4.0 / (h * h),
        Scheme::Numerov => 6.0 / (h * h),
    }
}

pub fn assemble(scheme: Scheme, potential: &Potential, grid: &Grid) -> Result<DiscreteOperator> {
    if grid.len() < 3 {
        return Err(Error::TooFewPoints(grid.len()));
    }
    let values = potential.sample(grid)?;
    assemble_samples(scheme, values, grid)
}

/// Assembles from potential samples already taken on `grid`.
pub fn assemble_samples(scheme: Scheme, potential: Vec<f64>, grid: &Grid) -> Result<DiscreteOperator> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    if potential.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: potential.len(),
        });
    }
    let h = grid.step();
    let h2 = h * h;
    let (stiffness, mass) = match scheme {
        Scheme::CentralDifference => {
            // same literal form as [-1 2 -1]/h^2 + diag(V)
            let diag = potential.iter().map(|v| 2.0 / h2 + v).collect();
            let edge = vec![-1.0 / h2; n];
            (CyclicTridiagonal { diag, edge }, CyclicTridiagonal::identity(n))
        }
        Scheme::Numerov => {
            // A = D + (B diag(V) + diag(V) B) / 2, the symmetric part of the
            // Numerov potential term.
            let diag = potential.iter().map(|v| 2.0 / h2 + NUMEROV_MASS_DIAG * v).collect();
            let edge = (0..n)
                .map(|i| -1.0 / h2 + (potential[i] + potential[(i + 1) % n]) / 24.0)
                .collect();
            let mass = CyclicTridiagonal {
                diag: vec![NUMEROV_MASS_DIAG; n],
                edge: vec![NUMEROV_MASS_EDGE; n],
            };
            (CyclicTridiagonal { diag, edge }, mass)
        }
    };
    Ok(DiscreteOperator {
        scheme,
        stiffness,
        mass,
        grid: *grid,
        potential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_grid() -> Grid {
        Grid::new(0.0, 4.0, 1.0).unwrap()
    }

    #[test]
    fn free_central_difference_entries() {
        let op = assemble(Scheme::CentralDifference, &Potential::zero(), &unit_grid()).unwrap();
        assert_eq!(op.stiffness().diag(), &[2.0; 4]);
        assert_eq!(op.stiffness().edges(), &[-1.0; 4]);
        assert_eq!(op.mass(), &CyclicTridiagonal::identity(4));
        assert_eq!(op.stiffness().get(0, 3), -1.0);
        assert_eq!(op.stiffness().get(3, 0), -1.0);
        assert_eq!(op.stiffness().get(0, 2), 0.0);
    }

    #[test]
    fn default_diagonal_at_center() {
        let g = Grid::new(-16.0, 32.0, 0.1).unwrap();
        let op = assemble(Scheme::CentralDifference, &Potential::sech(3.0, 0.5).unwrap(), &g).unwrap();
        assert_relative_eq!(op.stiffness().diag()[160], 203.0, max_relative = 1e-14);
        assert_relative_eq!(op.stiffness().get(0, 319), -100.0, max_relative = 1e-14);
        assert_relative_eq!(op.nyquist_ceiling(), 400.0, max_relative = 1e-14);
    }

    #[test]
    fn constant_shift_is_linear_in_mass() {
        let g = Grid::new(-4.0, 8.0, 0.25).unwrap();
        for scheme in [Scheme::CentralDifference, Scheme::Numerov] {
            let base = assemble(scheme, &Potential::zero(), &g).unwrap();
            let c = 1.75;
            let shifted = assemble_samples(scheme, vec![c; g.len()], &g).unwrap();
            let expected = base.stiffness().shifted(-c, base.mass());
            for i in 0..g.len() {
                for j in 0..g.len() {
                    assert_relative_eq!(shifted.stiffness().get(i, j), expected.get(i, j), max_relative = 1e-15);
                }
            }
        }
    }

    #[test]
    fn rejects_tiny_grids() {
        let g = Grid::new(0.0, 2.0, 1.0).unwrap();
        assert_eq!(
            assemble(Scheme::CentralDifference, &Potential::zero(), &g).unwrap_err(),
            Error::TooFewPoints(2)
        );
    }

    #[test]
    fn apply_kernel_and_nyquist() {
        let g = Grid::new(-1.0, 2.0, 0.25).unwrap();
        let h2 = 0.25 * 0.25;
        let op = assemble(Scheme::CentralDifference, &Potential::zero(), &g).unwrap();
        let (av, bv) = op.apply(&[1.0; 8]).unwrap();
        assert!(av.iter().all(|&x| x == 0.0));
        assert_eq!(bv, vec![1.0; 8]);
        let alt: Vec<f64> = (0..8).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (av, _) = op.apply(&alt).unwrap();
        for (a, v) in av.iter().zip(&alt) {
            assert_relative_eq!(*a, 4.0 / h2 * v, max_relative = 1e-15);
        }
        assert!(matches!(op.apply(&[1.0; 3]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn numerov_row_sums() {
        let g = Grid::new(-1.0, 2.0, 0.25).unwrap();
        let op = assemble(Scheme::Numerov, &Potential::zero(), &g).unwrap();
        let (av, bv) = op.apply(&[1.0; 8]).unwrap();
        for (a, b) in av.iter().zip(&bv) {
            assert!(a.abs() < 1e-12);
            assert_relative_eq!(*b, 1.0, max_relative = 1e-15);
        }
        assert_relative_eq!(op.nyquist_ceiling(), 6.0 / 0.0625);
    }

    /// Max error of the stencil against B(−ψ'' + Vψ) for ψ = exp(sin x), V = cos x on [0, 2π).
    fn consistency_error(scheme: Scheme, n: usize, with_potential: bool) -> f64 {
        let length = 2.0 * std::f64::consts::PI;
        let g = Grid::new(0.0, length, length / n as f64).unwrap();
        let x = g.points();
        let psi: Vec<f64> = x.iter().map(|t| t.sin().exp()).collect();
        let v: Vec<f64> = x.iter().map(|t| if with_potential { t.cos() } else { 0.0 }).collect();
        let exact: Vec<f64> = x
            .iter()
            .zip(&v)
            .map(|(t, vt)| {
                let p = t.sin().exp();
                let d2 = p * (t.cos() * t.cos() - t.sin());
                -d2 + vt * p
            })
            .collect();
        let op = assemble_samples(scheme, v, &g).unwrap();
        let target = op.mass().mul(&exact);
        let (av, _) = op.apply(&psi).unwrap();
        av.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn consistency_orders() {
        let order = |scheme, with_potential| {
            let e: Vec<f64> = [32, 64, 128]
                .iter()
                .map(|&n| consistency_error(scheme, n, with_potential))
                .collect();
            ((e[0] / e[1]).log2(), (e[1] / e[2]).log2())
        };
        let (a, b) = order(Scheme::CentralDifference, true);
        assert!((a - 2.0).abs() < 0.3 && (b - 2.0).abs() < 0.3, "{a} {b}");
        let (a, b) = order(Scheme::Numerov, false);
        assert!((a - 4.0).abs() < 0.3 && (b - 4.0).abs() < 0.3, "{a} {b}");
        // the symmetrized potential coupling is only second order
        let (a, b) = order(Scheme::Numerov, true);
        assert!((a - 2.0).abs() < 0.3 && (b - 2.0).abs() < 0.3, "{a} {b}");
    }

    #[test]
    fn dense_copy_is_symmetric() {
        let g = Grid::new(-16.0, 32.0, 0.5).unwrap();
        for scheme in [Scheme::CentralDifference, Scheme::Numerov] {
            let op = assemble(scheme, &Potential::sech(3.0, 0.5).unwrap(), &g).unwrap();
            let n = g.len();
            let a = op.stiffness().to_dense();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(a[i * n + j].to_bits(), a[j * n + i].to_bits());
                }
            }
        }
    }

    #[test]
    fn csv_dump_format() {
        let op = assemble(Scheme::CentralDifference, &Potential::zero(), &unit_grid()).unwrap();
        let mut buf = Vec::new();
        op.dump_csv(Matrix::Stiffness, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,value");
        assert_eq!(lines[1], "0,0,2.0000000000000000e0");
        assert_eq!(lines[2], "0,1,-1.0000000000000000e0");
        assert_eq!(lines[3], "0,3,-1.0000000000000000e0");
        assert_eq!(lines.len(), 1 + 12);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("cd".parse::<Scheme>().unwrap(), Scheme::CentralDifference);
        assert_eq!("numerov".parse::<Scheme>().unwrap(), Scheme::Numerov);
        assert!("fem".parse::<Scheme>().is_err());
    }
}
