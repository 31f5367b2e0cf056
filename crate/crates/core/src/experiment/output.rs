//! CSV/JSON rendering. Files are LF-terminated, CSV floats carry 17
//! significant digits, and nothing depends on the clock, so identical
//! configurations give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{FigureDataset, Format, Metadata, PredictReport, SpectrumReport, SweepReport, WkbOutput};
use crate::error::{Error, Result};

/// A rendered output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }
}

/// 17 significant digits, which round-trips any `f64`.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// 12 significant digits in positional notation where that stays readable.
pub fn short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            format!("{:.11}", 0.0)
        } else {
            x.to_string()
        };
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..12).contains(&e) {
        format!("{:.*}", (11 - e) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn metadata_file(stem: &str, metadata: &Metadata) -> OutputFile {
    OutputFile::new(format!("{stem}_metadata.json"), json(metadata))
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(full).unwrap_or_default()
}

pub fn spectrum_files(r: &SpectrumReport, format: Format) -> Vec<OutputFile> {
    match format {
        Format::Json => vec![OutputFile::new("spectrum.json", json(r))],
        Format::Csv => {
            let mut s = String::from("rank,lambda,delta_lambda,localized,tail_mass,residual\n");
            for m in &r.modes {
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    m.rank,
                    full(m.lambda),
                    full(m.delta_lambda),
                    m.localized,
                    full(m.tail_mass),
                    full(m.residual)
                )
                .unwrap();
            }
            vec![
                OutputFile::new("spectrum.csv", s),
                metadata_file("spectrum", &r.metadata),
            ]
        }
    }
}

/// Fixed-width table for the terminal.
pub fn spectrum_table(r: &SpectrumReport) -> String {
    let mut s = format!(
        "{:>4}  {:>20}  {:>20}  {:>9}  {:>20}  {:>20}\n",
        "rank", "lambda", "delta_lambda", "localized", "tail_mass", "residual"
    );
    for m in &r.modes {
        writeln!(
            s,
            "{:>4}  {:>20}  {:>20}  {:>9}  {:>20}  {:>20}",
            m.rank,
            short(m.lambda),
            short(m.delta_lambda),
            m.localized,
            short(m.tail_mass),
            short(m.residual)
        )
        .unwrap();
    }
    s
}

pub fn figure_files(d: &FigureDataset, format: Format) -> Vec<OutputFile> {
    let stem = d.figure.to_string();
    if format == Format::Json {
        return vec![OutputFile::new(format!("{stem}.json"), json(d))];
    }
    let mut files = Vec::new();
    let mut summary = String::from("potential,rank,lambda,delta_lambda,localized,tail_mass\n");
    for m in &d.modes {
        writeln!(
            summary,
            "{},{},{},{},{},{}",
            m.potential,
            m.rank,
            full(m.lambda),
            full(m.delta_lambda),
            m.localized,
            full(m.tail_mass)
        )
        .unwrap();
        let mut s = String::from("x,envelope_abs,envelope_signed,V_normalized\n");
        for n in 0..m.x.len() {
            writeln!(
                s,
                "{},{},{},{}",
                full(m.x[n]),
                full(m.envelope_abs[n]),
                full(m.envelope_signed[n]),
                full(m.v_normalized[n])
            )
            .unwrap();
        }
        files.push(OutputFile::new(format!("{stem}_{}_mode{}.csv", m.potential, m.rank), s));
    }
    if let Some(c) = &d.carrier {
        let mut s = String::from("x,psi\n");
        for (x, p) in c.x.iter().zip(&c.psi) {
            writeln!(s, "{},{}", full(*x), full(*p)).unwrap();
        }
        files.push(OutputFile::new(format!("{stem}_carrier.csv"), s));
    }
    files.push(OutputFile::new(format!("{stem}_summary.csv"), summary));
    files.push(metadata_file(&stem, &d.metadata));
    files
}

pub fn predict_files(r: &PredictReport, format: Format) -> Vec<OutputFile> {
    if format == Format::Json {
        return vec![OutputFile::new("predict.json", json(r))];
    }
    let mut s = String::from("rank,delta_lambda_pred,node_count,tail_mass,delta_lambda_fd,gap,correlation,fd_nodes\n");
    for (b, c) in r.bound_states.iter().zip(&r.comparisons) {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            b.rank,
            full(b.delta_lambda_pred),
            b.node_count,
            full(b.tail_mass),
            full(c.delta_lambda_fd),
            full(c.gap),
            full(c.correlation),
            c.fd_nodes
        )
        .unwrap();
    }
    vec![OutputFile::new("predict.csv", s), metadata_file("predict", &r.metadata)]
}

pub fn sweep_files(r: &SweepReport, format: Format) -> Vec<OutputFile> {
    let stem = format!("sweep_{}", r.parameter);
    if format == Format::Json {
        return vec![OutputFile::new(format!("{stem}.json"), json(r))];
    }
    let mut s = String::from("value,fd_count,oracle_count,lambda_1,delta_lambda_1,gap_1\n");
    for row in &r.rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            full(row.value),
            row.fd_count,
            row.oracle_count,
            full(row.lambda_1),
            full(row.delta_lambda_1),
            csv_opt(row.gap_1)
        )
        .unwrap();
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        monotone: Option<bool>,
        gap_ratios: &'a [f64],
        metadata: &'a Metadata,
    }
    let summary = Summary {
        monotone: r.monotone,
        gap_ratios: &r.gap_ratios,
        metadata: &r.metadata,
    };
    vec![
        OutputFile::new(format!("{stem}.csv"), s),
        OutputFile::new(format!("{stem}_metadata.json"), json(&summary)),
    ]
}

/// The WKB report is always JSON.
pub fn wkb_files(r: &WkbOutput) -> Vec<OutputFile> {
    vec![OutputFile::new("wkb.json", json(r))]
}

/// Writes `files` under `dir`, creating it if needed.
pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            fs::write(&path, &f.contents).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
