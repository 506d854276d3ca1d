//! Deterministic parallel parameter sweeps and the datasets they produce.
//!
//! A [`SweepSpec`] names a model family, a set of axes and the requested
//! outputs. [`run_sweep`] evaluates the Cartesian product of the axes in
//! row-major order (first axis slowest). Points are evaluated in parallel but
//! every value depends only on its own point, so the output is bitwise
//! identical for any thread count.

mod dataset;
mod figures;

pub use dataset::{format_number, Column, Dataset, Provenance};
pub use figures::{figure_dataset, sheet_columns, FigureId, BANDWIDTH_GAMMAS};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_full_matrix, EffectiveParams, ExternalCoupling, FullParams, ModelError, RingParams};
use crate::scattering::{
    chirality, ring_s_closed, s14_closed, s21_closed, s23_closed, s41_closed, s_general, FourPort, ScatteringError,
};
use crate::spectra::{
    eig2_closed, eig_numeric, eigengap, ring_discrepancy, ring_eig_circulant, ring_eig_paper, SpectraError,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("at sweep row {row}: {source}")]
    Point { row: usize, source: Box<SweepError> },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

impl SweepError {
    /// True for failures of the numerics rather than of the request.
    pub fn is_numerical(&self) -> bool {
        match self {
            Self::Spec(_) | Self::Model(_) => false,
            Self::Point { source, .. } => source.is_numerical(),
            Self::Spectra(SpectraError::Grid(_)) | Self::Spectra(SpectraError::Model(_)) => false,
            Self::Scattering(ScatteringError::Grid(_)) | Self::Scattering(ScatteringError::Model(_)) => false,
            Self::Spectra(_) | Self::Scattering(_) => true,
        }
    }
}

/// How a two-cavity parameter set is embedded in the three-mode model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lift {
    /// `|G_a|² = Jγ`.
    #[default]
    Literal,
    /// `|G_a|² = J(γ − κ)`, exact self-energy at the cavity resonance.
    Resonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum Family {
    Effective,
    Full { lift: Lift },
    Ring,
}

impl Family {
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Self::Effective => &[
                "omega",
                "kappa_i",
                "kappa_e",
                "G",
                "J",
                "ratio",
                "theta",
                "theta_over_halfpi",
                "delta",
            ],
            Self::Full { .. } => &[
                "omega",
                "kappa_i",
                "kappa_e",
                "G",
                "J",
                "ratio",
                "theta",
                "theta_over_halfpi",
                "delta",
                "gamma",
            ],
            Self::Ring => &[
                "omega",
                "kappa",
                "G",
                "J",
                "ratio",
                "theta",
                "theta_over_halfpi",
                "delta",
            ],
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Self::Effective => &["eigenvalues", "eigengap", "S21", "S41", "S14", "S23", "alpha", "D"],
            Self::Full { .. } => &["eigenvalues", "S21", "S41", "S14", "D"],
            Self::Ring => &[
                "eigenvalues",
                "eigenvalues_paper",
                "discrepancy",
                "S11",
                "S12",
                "S13",
                "S21",
                "S22",
                "S23",
                "S31",
                "S32",
                "S33",
            ],
        }
    }

    fn output_columns(self, output: &str) -> Vec<String> {
        let complex = |stem: &str, n: usize| {
            (0..n)
                .flat_map(|k| [format!("{stem}{k}_re"), format!("{stem}{k}_im")])
                .collect::<Vec<_>>()
        };
        match (self, output) {
            (Self::Effective, "eigenvalues") => complex("lambda", 2),
            (Self::Full { .. }, "eigenvalues") | (Self::Ring, "eigenvalues") => complex("lambda", 3),
            (Self::Ring, "eigenvalues_paper") => complex("paper", 3),
            (Self::Ring, "discrepancy") => (0..3).map(|k| format!("discrepancy{k}")).collect(),
            (_, "eigengap") | (_, "alpha") | (_, "D") => vec![output.to_string()],
            (_, s) => vec![format!("{s}_re"), format!("{s}_im"), format!("{s}_abs")],
        }
    }
}

/// A named grid of values for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    /// `n` evenly spaced values on `[lo, hi]`.
    pub fn linspace(name: impl Into<String>, lo: f64, hi: f64, n: usize) -> Self {
        let values = match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        };
        Self::new(name, values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl SweepSpec {
    /// Checks names, grids and outputs without evaluating anything.
    pub fn validate(&self) -> Result<(), SweepError> {
        let known = self.family.parameters();
        if self.outputs.is_empty() {
            return Err(SweepError::Spec("no outputs requested".into()));
        }
        for out in &self.outputs {
            if !self.family.outputs().contains(&out.as_str()) {
                return Err(SweepError::Spec(format!(
                    "unknown output `{out}` (valid: {})",
                    self.family.outputs().join(", ")
                )));
            }
        }
        let mut seen: Vec<&str> = Vec::new();
        for axis in &self.axes {
            if !known.contains(&axis.name.as_str()) {
                return Err(SweepError::Spec(format!(
                    "unknown axis `{}` (valid: {})",
                    axis.name,
                    known.join(", ")
                )));
            }
            if seen.contains(&axis.name.as_str()) {
                return Err(SweepError::Spec(format!("axis `{}` given twice", axis.name)));
            }
            seen.push(&axis.name);
            if axis.values.is_empty() {
                return Err(SweepError::Spec(format!("axis `{}` is empty", axis.name)));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(SweepError::Spec(format!("axis `{}` has non-finite values", axis.name)));
            }
            let up = axis.values.windows(2).all(|w| w[1] > w[0]);
            let down = axis.values.windows(2).all(|w| w[1] < w[0]);
            if !(up || down) {
                return Err(SweepError::Spec(format!(
                    "axis `{}` is not strictly monotone",
                    axis.name
                )));
            }
        }
        for (name, value) in &self.fixed {
            if !known.contains(&name.as_str()) {
                return Err(SweepError::Spec(format!(
                    "unknown parameter `{name}` (valid: {})",
                    known.join(", ")
                )));
            }
            if seen.contains(&name.as_str()) {
                return Err(SweepError::Spec(format!("`{name}` is both fixed and swept")));
            }
            if !value.is_finite() {
                return Err(SweepError::Spec(format!("`{name}` must be finite")));
            }
            seen.push(name);
        }
        for (a, b) in [("J", "ratio"), ("theta", "theta_over_halfpi")] {
            if seen.contains(&a) && seen.contains(&b) {
                return Err(SweepError::Spec(format!("`{a}` and `{b}` are mutually exclusive")));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.axes
            .iter()
            .map(|a| a.name.clone())
            .chain(self.outputs.iter().flat_map(|o| self.family.output_columns(o)))
            .collect()
    }
}

/// Parameter lookup for one sweep point.
struct Point<'a> {
    spec: &'a SweepSpec,
    axis_values: Vec<f64>,
}

impl Point<'_> {
    fn get(&self, name: &str) -> Option<f64> {
        self.spec
            .axes
            .iter()
            .position(|a| a.name == name)
            .map(|k| self.axis_values[k])
            .or_else(|| self.spec.fixed.get(name).copied())
    }

    fn or(&self, name: &str, default: f64) -> f64 {
        self.get(name).unwrap_or(default)
    }

    fn theta(&self) -> f64 {
        match self.get("theta_over_halfpi") {
            Some(q) => q * std::f64::consts::FRAC_PI_2,
            None => self.or("theta", 0.0),
        }
    }

    fn g(&self) -> f64 {
        self.or("G", 10.0)
    }

    fn j(&self) -> f64 {
        match self.get("ratio") {
            Some(r) => r * self.g(),
            None => self.or("J", 0.0),
        }
    }

    fn effective(&self) -> Result<EffectiveParams<f64>, ModelError> {
        let coupling = match self.get("kappa_e") {
            Some(ke) => ExternalCoupling::Fixed(ke),
            None => ExternalCoupling::Critical,
        };
        EffectiveParams::new(
            self.or("omega", 0.0),
            self.or("kappa_i", 1.0),
            coupling,
            self.g(),
            self.j(),
            self.theta(),
        )
    }

    fn ring(&self) -> Result<RingParams<f64>, ModelError> {
        RingParams::new(
            self.or("omega", 0.0),
            self.or("kappa", 22.0),
            self.g(),
            self.j(),
            self.theta(),
        )
    }
}

/// Default mechanical damping of the full family.
pub const DEFAULT_GAMMA: f64 = 500.0;

fn push_complex(row: &mut Vec<f64>, z: num_complex::Complex<f64>) {
    row.extend([z.re, z.im, z.norm()]);
}

fn evaluate(point: &Point<'_>) -> Result<Vec<f64>, SweepError> {
    let spec = point.spec;
    let delta = point.or("delta", 0.0);
    let mut row = point.axis_values.clone();
    match spec.family {
        Family::Effective => {
            let p = point.effective()?;
            for out in &spec.outputs {
                match out.as_str() {
                    "eigenvalues" => {
                        for z in eig2_closed(&p).eigenvalues {
                            row.extend([z.re, z.im]);
                        }
                    }
                    "eigengap" => row.push(eigengap(&p)),
                    "S21" => push_complex(&mut row, s21_closed(&p, delta)),
                    "S41" => push_complex(&mut row, s41_closed(&p, delta)),
                    "S14" => push_complex(&mut row, s14_closed(&p, delta)),
                    "S23" => push_complex(&mut row, s23_closed(&p, delta)),
                    "alpha" => row.push(chirality(&p, delta).map(|c| c.alpha).unwrap_or(f64::NAN)),
                    "D" => row.push(s14_closed(&p, delta).norm() - s41_closed(&p, delta).norm()),
                    _ => unreachable!("outputs validated"),
                }
            }
        }
        Family::Full { lift } => {
            let e = point.effective()?;
            let gamma = point.or("gamma", DEFAULT_GAMMA);
            let full = match lift {
                Lift::Literal => FullParams::lift(&e, gamma)?,
                Lift::Resonant => FullParams::lift_resonant(&e, gamma)?,
            };
            let m = build_full_matrix(&full, e.kappa())?;
            let needs_s = spec.outputs.iter().any(|o| o != "eigenvalues");
            let four = if needs_s {
                Some(FourPort::from_modes(&s_general(&m, e.omega() - delta)?))
            } else {
                None
            };
            for out in &spec.outputs {
                match (out.as_str(), &four) {
                    ("eigenvalues", _) => {
                        for z in eig_numeric(&m)?.eigenvalues {
                            row.extend([z.re, z.im]);
                        }
                    }
                    ("S21", Some(f)) => push_complex(&mut row, f.s21),
                    ("S41", Some(f)) => push_complex(&mut row, f.s41),
                    ("S14", Some(f)) => push_complex(&mut row, f.s14),
                    ("D", Some(f)) => row.push(f.s14.norm() - f.s41.norm()),
                    _ => unreachable!("outputs validated"),
                }
            }
        }
        Family::Ring => {
            let p = point.ring()?;
            let closed = ring_s_closed(&p, delta).ok();
            for out in &spec.outputs {
                match out.as_str() {
                    "eigenvalues" => {
                        for z in ring_eig_circulant(&p).eigenvalues {
                            row.extend([z.re, z.im]);
                        }
                    }
                    "eigenvalues_paper" => {
                        for z in ring_eig_paper(&p).eigenvalues {
                            row.extend([z.re, z.im]);
                        }
                    }
                    "discrepancy" => row.extend(ring_discrepancy(&p)?.per_branch),
                    s => {
                        let (r, c) = (s.as_bytes()[1] - b'1', s.as_bytes()[2] - b'1');
                        match &closed {
                            Some(rs) => push_complex(&mut row, rs.smatrix.get(r as usize, c as usize)),
                            None => row.extend([f64::NAN; 3]),
                        }
                    }
                }
            }
        }
    }
    Ok(row)
}

/// Evaluate a sweep. Validation happens before any point is computed.
pub fn run_sweep(spec: &SweepSpec) -> Result<Dataset, SweepError> {
    spec.validate()?;
    let dims: Vec<usize> = spec.axes.iter().map(|a| a.values.len()).collect();
    let rows: Vec<Vec<f64>> = (0..spec.rows())
        .into_par_iter()
        .map(|index| {
            let mut rest = index;
            let mut axis_values = vec![0.0; dims.len()];
            for k in (0..dims.len()).rev() {
                axis_values[k] = spec.axes[k].values[rest % dims[k]];
                rest /= dims[k];
            }
            evaluate(&Point { spec, axis_values }).map_err(|e| SweepError::Point {
                row: index,
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;
    let names = spec.column_names();
    let mut columns: Vec<Column> = names
        .into_iter()
        .map(|n| Column::new(n, Vec::with_capacity(rows.len())))
        .collect();
    for row in rows {
        for (col, v) in columns.iter_mut().zip(row) {
            col.values.push(v);
        }
    }
    let provenance = Provenance::for_spec(spec);
    Ok(Dataset::new("sweep", columns, provenance))
}

/// Effective template used by the figure generators: `G = 10`, critical coupling.
pub fn default_effective() -> EffectiveParams<f64> {
    EffectiveParams::critical(10.0, 10.0, std::f64::consts::FRAC_PI_2).expect("valid defaults")
}
