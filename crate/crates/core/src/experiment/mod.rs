//! Experiment runners behind the `hfmode` command line. Each runner takes a
//! validated [`ExperimentConfig`] and returns a plain report; [`output`]
//! turns reports into files.

mod config;
pub mod output;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ExperimentConfig, Format, GridConfig, OutputConfig, PotentialConfig, PotentialKind, OUT_DIR_ENV};

use crate::eigen::{eigen_full, top_k, SpectrumSlice};
use crate::envelope::{compare, predict, MatchReport};
use crate::error::{Error, Result};
use crate::grid::{Grid, Potential};
use crate::modes::{count_localized, demodulate, Demodulation, ModeAnalysis};
use crate::operator::{assemble, DiscreteOperator};
use crate::wkb::{select_band_rank, wkb_compare, WkbReport};

/// Half-open window shown in the carrier close-up.
pub const CARRIER_WINDOW: (f64, f64) = (-2.0, 2.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub config: ExperimentConfig,
    pub max_residual: f64,
    pub version: &'static str,
}

impl Metadata {
    fn new(config: &ExperimentConfig, max_residual: f64) -> Self {
        Self {
            config: config.clone(),
            max_residual,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

struct Setup {
    grid: Grid,
    potential: Potential,
    op: DiscreteOperator,
}

fn setup(config: &ExperimentConfig) -> Result<Setup> {
    config.validate()?;
    let grid = config.grid()?;
    let potential = config.potential()?;
    let op = assemble(config.scheme, &potential, &grid)?;
    Ok(Setup { grid, potential, op })
}

fn analyze(slice: &SpectrumSlice, op: &DiscreteOperator) -> Result<Vec<ModeAnalysis>> {
    let ctx = Demodulation::for_operator(op);
    slice.pairs.iter().map(|p| demodulate(p, &ctx)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub rank: usize,
    pub lambda: f64,
    pub delta_lambda: f64,
    pub localized: bool,
    pub tail_mass: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub modes: Vec<SpectrumRow>,
    pub metadata: Metadata,
}

pub fn spectrum(config: &ExperimentConfig) -> Result<SpectrumReport> {
    let s = setup(config)?;
    let slice = top_k(&s.op, config.k)?;
    let modes = analyze(&slice, &s.op)?
        .into_iter()
        .map(|m| SpectrumRow {
            rank: m.rank,
            lambda: m.lambda,
            delta_lambda: m.delta_lambda,
            localized: m.localized,
            tail_mass: m.tail_mass,
            residual: m.residual,
        })
        .collect();
    Ok(SpectrumReport {
        modes,
        metadata: Metadata::new(config, slice.max_residual()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
        })
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            other => Err(Error::config("figure", format!("expected fig1 or fig2, got {other:?}"))),
        }
    }
}

/// One mode of a figure, with everything needed to plot it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRecord {
    /// `base` for the configured potential, `negated` for its mirror image.
    pub potential: &'static str,
    pub rank: usize,
    pub lambda: f64,
    pub delta_lambda: f64,
    pub localized: bool,
    pub tail_mass: f64,
    pub x: Vec<f64>,
    pub envelope_abs: Vec<f64>,
    pub envelope_signed: Vec<f64>,
    /// `V / max |V|`, or zero for a vanishing potential.
    pub v_normalized: Vec<f64>,
}

/// Raw samples of the top mode around the center of the domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarrierWindow {
    pub rank: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureDataset {
    pub figure: Figure,
    pub modes: Vec<ModeRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier: Option<CarrierWindow>,
    pub metadata: Metadata,
}

fn normalized_potential(values: &[f64]) -> Vec<f64> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        vec![0.0; values.len()]
    } else {
        values.iter().map(|v| v / peak).collect()
    }
}

/// Top-mode records of `potential` at the requested ranks.
fn figure_modes(
    config: &ExperimentConfig,
    grid: &Grid,
    potential: &Potential,
    label: &'static str,
    ranks: &[usize],
) -> Result<(Vec<ModeRecord>, SpectrumSlice)> {
    let op = assemble(config.scheme, potential, grid)?;
    let k = ranks.iter().copied().max().unwrap_or(1).max(config.k).min(grid.len());
    let slice = top_k(&op, k)?;
    let analyses = analyze(&slice, &op)?;
    let x = grid.points();
    let v_normalized = normalized_potential(op.potential());
    let records = ranks
        .iter()
        .map(|&r| {
            let m = &analyses[r - 1];
            ModeRecord {
                potential: label,
                rank: m.rank,
                lambda: m.lambda,
                delta_lambda: m.delta_lambda,
                localized: m.localized,
                tail_mass: m.tail_mass,
                x: x.clone(),
                envelope_abs: m.envelope_abs.clone(),
                envelope_signed: m.envelope_signed.clone(),
                v_normalized: v_normalized.clone(),
            }
        })
        .collect();
    Ok((records, slice))
}

pub fn reproduce(config: &ExperimentConfig, figure: Figure) -> Result<FigureDataset> {
    let s = setup(config)?;
    match figure {
        Figure::Fig1 => {
            let (modes, slice) = figure_modes(config, &s.grid, &s.potential, "base", &[1, 4])?;
            let (lo, hi) = CARRIER_WINDOW;
            let top = &slice.pairs[0];
            let (x, psi): (Vec<f64>, Vec<f64>) = (0..s.grid.len())
                .map(|n| (s.grid.x(n), top.vector[n]))
                .filter(|(x, _)| *x >= lo - 1e-9 * s.grid.step() && *x < hi - 1e-9 * s.grid.step())
                .unzip();
            Ok(FigureDataset {
                figure,
                modes,
                carrier: Some(CarrierWindow {
                    rank: 1,
                    x_lo: lo,
                    x_hi: hi,
                    x,
                    psi,
                }),
                metadata: Metadata::new(config, slice.max_residual()),
            })
        }
        Figure::Fig2 => {
            let (mut modes, a) = figure_modes(config, &s.grid, &s.potential, "base", &[5])?;
            let negated = s.potential.scaled(-1.0);
            let (more, b) = figure_modes(config, &s.grid, &negated, "negated", &[1, 4, 5])?;
            modes.extend(more);
            Ok(FigureDataset {
                figure,
                modes,
                carrier: None,
                metadata: Metadata::new(config, a.max_residual().max(b.max_residual())),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundStateRow {
    pub rank: usize,
    pub delta_lambda_pred: f64,
    pub node_count: usize,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictReport {
    pub bound_states: Vec<BoundStateRow>,
    pub comparisons: Vec<MatchReport>,
    /// Localized count of the discrete operator, for reference.
    pub fd_localized: usize,
    pub metadata: Metadata,
}

pub fn run_predict(config: &ExperimentConfig) -> Result<PredictReport> {
    let s = setup(config)?;
    let pred = predict(&s.potential, &s.grid, config.refine)?;
    let full = eigen_full(&s.op)?;
    let ctx = Demodulation::for_operator(&s.op);
    let fd_localized = count_localized(&full, &ctx)?;
    let comparisons = (1..=pred.len())
        .map(|rank| compare(&pred, &demodulate(&full.pairs[rank - 1], &ctx)?, rank))
        .collect::<Result<Vec<_>>>()?;
    let bound_states = pred
        .bound_states
        .iter()
        .enumerate()
        .map(|(j, b)| BoundStateRow {
            rank: j + 1,
            delta_lambda_pred: b.delta_lambda_pred,
            node_count: b.node_count,
            tail_mass: b.tail_mass,
        })
        .collect();
    Ok(PredictReport {
        bound_states,
        comparisons,
        fd_localized,
        metadata: Metadata::new(config, full.max_residual()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParameter {
    #[serde(rename = "A")]
    Amplitude,
    #[serde(rename = "w")]
    Width,
    #[serde(rename = "h")]
    Step,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::Amplitude => "A",
            SweepParameter::Width => "w",
            SweepParameter::Step => "h",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "amplitude" => Ok(SweepParameter::Amplitude),
            "w" | "width" => Ok(SweepParameter::Width),
            "h" | "step" => Ok(SweepParameter::Step),
            other => Err(Error::config("param", format!("expected A, w or h, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub fd_count: usize,
    pub oracle_count: usize,
    pub lambda_1: f64,
    pub delta_lambda_1: f64,
    /// `|Δλ_FD − Δλ_pred|` for the top mode, when the oracle has a bound state.
    pub gap_1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    /// For `A` sweeps: counts never decrease as `A` grows. For `w` sweeps:
    /// counts never increase as `w` grows. Absent for `h` sweeps.
    pub monotone: Option<bool>,
    /// `gap_1[i] / gap_1[i+1]` for consecutive rows of an `h` sweep.
    pub gap_ratios: Vec<f64>,
    pub metadata: Metadata,
}

fn sweep_point(base: &ExperimentConfig, parameter: SweepParameter, value: f64) -> Result<(SweepRow, f64)> {
    let mut config = base.clone();
    match parameter {
        SweepParameter::Amplitude => config.potential.amplitude = value,
        SweepParameter::Width => config.potential.w = value,
        SweepParameter::Step => config.grid.h = value,
    }
    let s = setup(&config)?;
    let full = eigen_full(&s.op)?;
    let ctx = Demodulation::for_operator(&s.op);
    let fd_count = count_localized(&full, &ctx)?;
    let pred = predict(&s.potential, &s.grid, config.refine)?;
    let top = demodulate(&full.pairs[0], &ctx)?;
    let gap_1 = if pred.is_empty() {
        None
    } else {
        Some(compare(&pred, &top, 1)?.gap)
    };
    let row = SweepRow {
        value,
        fd_count,
        oracle_count: pred.len(),
        lambda_1: top.lambda,
        delta_lambda_1: top.delta_lambda,
        gap_1,
    };
    Ok((row, full.max_residual()))
}

pub fn sweep(
    config: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
    workers: usize,
) -> Result<SweepReport> {
    config.validate()?;
    if values.is_empty() {
        return Err(Error::config("values", "need at least one value"));
    }
    if workers == 0 {
        return Err(Error::config("workers", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let points = pool.install(|| {
        values
            .par_iter()
            .map(|&v| sweep_point(config, parameter, v))
            .collect::<Result<Vec<_>>>()
    })?;
    let max_residual = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let rows: Vec<SweepRow> = points.into_iter().map(|p| p.0).collect();

    let mut by_value: Vec<&SweepRow> = rows.iter().collect();
    by_value.sort_by(|a, b| a.value.total_cmp(&b.value));
    let counts = |f: fn(&SweepRow) -> usize| by_value.iter().map(|r| f(r)).collect::<Vec<_>>();
    let monotone = match parameter {
        SweepParameter::Amplitude => Some(
            [counts(|r| r.fd_count), counts(|r| r.oracle_count)]
                .iter()
                .all(|c| c.windows(2).all(|w| w[0] <= w[1])),
        ),
        SweepParameter::Width => Some(
            [counts(|r| r.fd_count), counts(|r| r.oracle_count)]
                .iter()
                .all(|c| c.windows(2).all(|w| w[0] >= w[1])),
        ),
        SweepParameter::Step => None,
    };
    let gap_ratios = match parameter {
        SweepParameter::Step => rows
            .windows(2)
            .filter_map(|w| Some(w[0].gap_1? / w[1].gap_1?))
            .collect(),
        _ => Vec::new(),
    };
    Ok(SweepReport {
        parameter,
        rows,
        monotone,
        gap_ratios,
        metadata: Metadata::new(config, max_residual),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WkbOutput {
    pub report: WkbReport,
    pub metadata: Metadata,
}

/// WKB comparison at `rank`, or at the highest mode inside the WKB band.
pub fn run_wkb(config: &ExperimentConfig, rank: Option<usize>) -> Result<WkbOutput> {
    let s = setup(config)?;
    let full = eigen_full(&s.op)?;
    let rank = match rank {
        Some(r) => r,
        None => select_band_rank(&full, &s.potential)
            .ok_or_else(|| Error::config("rank", "no mode lies in the resolved, turning-point-free band"))?,
    };
    let report = wkb_compare(&full, &s.potential, &s.grid, rank)?;
    Ok(WkbOutput {
        report,
        metadata: Metadata::new(config, full.max_residual()),
    })
}
