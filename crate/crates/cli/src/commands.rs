use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use anyhow::{anyhow, bail, Result};
use clap::{Args, ValueEnum};
use num_complex::Complex;
use rayon::prelude::*;
use revdiss::model::build_effective_matrix;
use revdiss::scattering::{curve_area, effective_curve, PortPair, ScatteringModel};
use revdiss::spectra::{adiabatic_error, locate_ring_coalescences, ring_discrepancy, EpSearch};
use revdiss::sweeps::{sheet_columns, Column, Provenance, BANDWIDTH_GAMMAS};
use revdiss::{
    build_full_matrix, build_ring_matrix, chirality, classify_parity, eig2_closed, eig_numeric, figure_dataset, fwhm,
    locate_eps, nonreciprocity_curve, ring_s_closed, s_general, sweep_riemann, CoefficientMatrix, Dataset, FigureId,
    FourPort, ProbeGrid, ScatteringError, SearchBox, SpectraError, SpectrumSource, SweepError,
};
use serde_json::{json, Value};

use crate::config::{ModelKind, Resolved};

/// Relative discriminant threshold below which a point is reported as an EP.
pub const EP_DISCRIMINANT_TOL: f64 = 1e-6;

const DEFAULT_CURVE_POINTS: usize = 401;
const DEFAULT_BANDWIDTH_POINTS: usize = 2001;
const SHEET_POINTS: usize = 201;

/// Failure of the numerics (singular solve, pole, undefined metric) as
/// opposed to a bad request. Maps to exit code 2.
#[derive(Debug)]
pub struct Numerical(pub String);

impl fmt::Display for Numerical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Numerical {}

trait Classify<T> {
    fn classified(self) -> Result<T>;
}

fn split(numerical: bool, msg: String) -> anyhow::Error {
    if numerical {
        anyhow!(Numerical(msg))
    } else {
        anyhow!(msg)
    }
}

impl<T> Classify<T> for Result<T, SpectraError> {
    fn classified(self) -> Result<T> {
        self.map_err(|e| split(matches!(e, SpectraError::Linalg(_)), e.to_string()))
    }
}

impl<T> Classify<T> for Result<T, ScatteringError> {
    fn classified(self) -> Result<T> {
        self.map_err(|e| {
            let numerical = !matches!(e, ScatteringError::Grid(_) | ScatteringError::Model(_));
            split(numerical, e.to_string())
        })
    }
}

impl<T> Classify<T> for Result<T, SweepError> {
    fn classified(self) -> Result<T> {
        self.map_err(|e| split(e.is_numerical(), e.to_string()))
    }
}

/// A file to be written once the whole command has succeeded.
pub enum Artifact {
    /// `<id>.csv` plus `<id>.meta.json`.
    Data(Dataset),
    Json {
        name: String,
        value: Value,
    },
    Text {
        name: String,
        text: String,
    },
}

/// Files plus a JSON summary printed on stdout.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
}

fn range_pair(v: &Option<Vec<f64>>, flag: &str) -> Result<Option<(f64, f64)>> {
    match v.as_deref() {
        None => Ok(None),
        Some([lo, hi]) if lo.is_finite() && hi.is_finite() && lo < hi => Ok(Some((*lo, *hi))),
        Some(_) => bail!("--{flag} needs two finite values LO < HI"),
    }
}

fn probe_grid(
    r: &Resolved,
    range: &Option<Vec<f64>>,
    points: Option<usize>,
    default_points: usize,
) -> Result<ProbeGrid<f64>> {
    let half = 5.0 * r.loss_scale();
    let (lo, hi) = match range_pair(range, "delta-range")? {
        Some(p) => p,
        None => (r.sweep.delta_min.unwrap_or(-half), r.sweep.delta_max.unwrap_or(half)),
    };
    let n = points.or(r.sweep.points).unwrap_or(default_points);
    if n < 2 || lo >= hi {
        bail!("probe grid needs at least 2 points and delta_min < delta_max (got {n} points on [{lo}, {hi}])");
    }
    ProbeGrid::linspace(lo, hi, n).classified()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Effective => "effective",
        ModelKind::Full => "full",
        ModelKind::Ring => "ring",
    }
}

fn parameters(r: &Resolved) -> Value {
    let mut p =
        json!({ "omega": r.omega, "G": r.g, "J": r.j, "theta": r.theta, "theta_over_halfpi": r.theta / FRAC_PI_2 });
    match r.kind {
        ModelKind::Ring => {
            p["kappa"] = json!(r.kappa);
        }
        kind => {
            let e = r.effective().expect("validated at resolve");
            p["kappa_i"] = json!(r.kappa_i);
            p["kappa_e"] = json!(e.kappa_e());
            p["kappa"] = json!(e.kappa());
            if kind == ModelKind::Full {
                p["gamma"] = json!(r.gamma);
                p["lift"] = json!(r.lift);
            }
        }
    }
    p
}

fn provenance(command: &str, r: &Resolved) -> Provenance {
    let mut prov = Provenance::new(format!("revdiss {command}")).param("model", model_name(r.kind));
    if let Value::Object(map) = parameters(r) {
        for (k, v) in map {
            prov = prov.param(&k, v);
        }
    }
    prov
}

fn cplx(z: Complex<f64>) -> Value {
    json!([z.re, z.im])
}

// ---------------------------------------------------------------- eigen

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RingForm {
    /// The published closed form, verbatim.
    Paper,
    /// Discrete-Fourier diagonalization of the circulant matrix.
    Circulant,
    /// Dense eigensolver.
    Numeric,
}

#[derive(Debug, Clone, Args)]
pub struct EigenArgs {
    /// Add the numeric branches of the full three-mode model.
    #[arg(long)]
    pub compare_full: bool,
    /// Ring eigenvalue forms to report (comma separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub closed_form: Vec<RingForm>,
    /// Also write the tracked sheets over the sweep's (theta, J/G) grid.
    #[arg(long)]
    pub sheets: bool,
}

struct EigenRow {
    source: &'static str,
    branch: usize,
    z: Complex<f64>,
    discrepancy: f64,
}

fn eigen_csv(rows: &[EigenRow]) -> String {
    use revdiss::sweeps::format_number as num;
    let mut out = String::from("source,branch,re,im,discrepancy\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.source,
            row.branch,
            num(row.z.re),
            num(row.z.im),
            num(row.discrepancy)
        ));
    }
    out
}

fn push_spectrum(rows: &mut Vec<EigenRow>, source: &'static str, eig: &[Complex<f64>], discrepancy: Option<&[f64]>) {
    for (k, &z) in eig.iter().enumerate() {
        rows.push(EigenRow {
            source,
            branch: k,
            z,
            discrepancy: discrepancy.map_or(f64::NAN, |d| d[k]),
        });
    }
}

pub fn eigen(r: &Resolved, a: &EigenArgs) -> Result<Outcome> {
    if !a.closed_form.is_empty() && r.kind != ModelKind::Ring {
        bail!("--closed-form applies to --model ring");
    }
    if a.compare_full && r.kind == ModelKind::Ring {
        bail!("--compare-full applies to the two-cavity models");
    }
    if a.sheets && r.kind == ModelKind::Ring {
        bail!("--sheets applies to the two-cavity models");
    }
    let mut rows = Vec::new();
    let mut summary = json!({ "model": model_name(r.kind), "parameters": parameters(r) });
    let mut artifacts = Vec::new();

    match r.kind {
        ModelKind::Effective | ModelKind::Full => {
            let e = r.two_cavity()?;
            let spec = eig2_closed(&e);
            push_spectrum(
                &mut rows,
                SpectrumSource::EffectiveClosedForm.as_str(),
                &spec.eigenvalues,
                None,
            );
            let diff = spec.eigenvalues[0] - spec.eigenvalues[1];
            let discriminant = diff.norm_sqr() / 4.0;
            let tol = EP_DISCRIMINANT_TOL * e.g() * e.g();
            summary["eigenvalues"] = json!(spec.eigenvalues.iter().map(|&z| cplx(z)).collect::<Vec<_>>());
            summary["discriminant"] = json!(discriminant);
            summary["ep_tolerance"] = json!(tol);
            summary["ep"] = json!(discriminant <= tol);
            if let Some((n, parity)) = classify_parity(e.theta()) {
                summary["phase_matching"] = json!({ "n": n, "parity": parity });
            }
            if a.compare_full || r.kind == ModelKind::Full {
                let full = match r.kind {
                    ModelKind::Full => r.full()?,
                    _ => r.lift_effective(&e, r.gamma)?,
                };
                let numeric = eig_numeric(&build_full_matrix(&full, e.kappa())?).classified()?;
                push_spectrum(&mut rows, "full-numeric", &numeric.eigenvalues, None);
                summary["full_eigenvalues"] = json!(numeric.eigenvalues.iter().map(|&z| cplx(z)).collect::<Vec<_>>());
                summary["adiabatic_error"] = json!(adiabatic_error(&e, &full).classified()?);
                summary["gamma"] = json!(full.gamma());
            }
            if a.sheets {
                let theta = linspace(
                    r.sweep.theta_min.unwrap_or(0.0),
                    r.sweep.theta_max.unwrap_or(4.0 * PI),
                    r.sweep.theta_points.unwrap_or(SHEET_POINTS),
                );
                let ratio = linspace(
                    r.sweep.ratio_min.unwrap_or(0.0),
                    r.sweep.ratio_max.unwrap_or(1.5),
                    r.sweep.ratio_points.unwrap_or(SHEET_POINTS),
                );
                let grid = sweep_riemann(&e, &theta, &ratio).classified()?;
                let ds = Dataset::new("sheets", sheet_columns(&grid), provenance("eigen --sheets", r))
                    .with_summary("max_branch_jump", grid.max_branch_jump());
                artifacts.push(Artifact::Data(ds));
            }
        }
        ModelKind::Ring => {
            let p = r.ring()?;
            let forms = if a.closed_form.is_empty() {
                vec![RingForm::Circulant]
            } else {
                a.closed_form.clone()
            };
            let d = ring_discrepancy(&p).classified()?;
            for form in &forms {
                match form {
                    RingForm::Paper => push_spectrum(
                        &mut rows,
                        SpectrumSource::RingAsPublished.as_str(),
                        &d.as_published.eigenvalues,
                        Some(&d.per_branch),
                    ),
                    RingForm::Circulant => push_spectrum(
                        &mut rows,
                        SpectrumSource::RingCirculant.as_str(),
                        &d.circulant.eigenvalues,
                        None,
                    ),
                    RingForm::Numeric => push_spectrum(
                        &mut rows,
                        SpectrumSource::Numeric.as_str(),
                        &d.numeric.eigenvalues,
                        None,
                    ),
                }
            }
            summary["discrepancy"] = json!({
                "per_branch": d.per_branch,
                "max": d.per_branch.iter().copied().fold(0.0, f64::max),
                "matching": d.matching,
                "published_residual": d.published_residual,
                "circulant_residual": d.circulant_residual,
                "normality_defect": d.normality_defect,
            });
        }
    }
    artifacts.insert(
        0,
        Artifact::Text {
            name: "eigen.csv".into(),
            text: eigen_csv(&rows),
        },
    );
    artifacts.push(Artifact::Json {
        name: "eigen.json".into(),
        value: summary.clone(),
    });
    Ok(Outcome { artifacts, summary })
}

// ---------------------------------------------------------------- smatrix

#[derive(Debug, Clone, Args)]
pub struct SmatrixArgs {
    /// Port pair such as 41 or S41; repeatable.
    #[arg(long = "pair", value_name = "PAIR")]
    pub pairs: Vec<String>,
    /// Dump the whole mode-level S-matrix at every probe point as JSON.
    #[arg(long)]
    pub all_ports: bool,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub delta_range: Option<Vec<f64>>,
    #[arg(long)]
    pub points: Option<usize>,
}

fn default_pairs(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::Effective => &["21", "41", "14", "23"],
        ModelKind::Full => &["21", "41", "14"],
        ModelKind::Ring => &["21", "32", "13", "12", "23", "31"],
    }
}

fn mode_matrix(r: &Resolved) -> Result<(CoefficientMatrix<f64>, f64)> {
    Ok(match r.kind {
        ModelKind::Effective => {
            let e = r.effective()?;
            (build_effective_matrix(&e), e.omega())
        }
        ModelKind::Full => {
            let full = r.full()?;
            let e = r.effective()?;
            (build_full_matrix(&full, e.kappa())?, full.delta_a())
        }
        ModelKind::Ring => {
            let p = r.ring()?;
            (build_ring_matrix(&p), p.omega())
        }
    })
}

pub fn smatrix(r: &Resolved, a: &SmatrixArgs) -> Result<Outcome> {
    let names: Vec<String> = if a.pairs.is_empty() {
        default_pairs(r.kind).iter().map(|s| s.to_string()).collect()
    } else {
        a.pairs.clone()
    };
    let mut pairs = Vec::new();
    for n in &names {
        let pair: PortPair = n.parse().map_err(|e: String| anyhow!(e))?;
        let ok = match r.kind {
            ModelKind::Effective => PortPair::EFFECTIVE.contains(&pair),
            ModelKind::Full => PortPair::EFFECTIVE[..3].contains(&pair),
            ModelKind::Ring => pair.is_ring_pair(),
        };
        if !ok {
            bail!("--pair {pair} is not available for the {} model", model_name(r.kind));
        }
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    let grid = probe_grid(r, &a.delta_range, a.points, DEFAULT_CURVE_POINTS)?;
    let deltas = grid.values().to_vec();
    let mut artifacts = Vec::new();
    let mut per_pair = serde_json::Map::new();

    for pair in &pairs {
        // one value per probe point; None marks a pole of the ring closed form
        let values: Vec<Option<Complex<f64>>> = match r.kind {
            ModelKind::Effective => effective_curve(&r.effective()?, &grid, *pair)
                .classified()?
                .values
                .into_iter()
                .map(Some)
                .collect(),
            ModelKind::Full => {
                let (m, omega) = mode_matrix(r)?;
                deltas
                    .par_iter()
                    .map(|&d| {
                        let four = FourPort::from_modes(&s_general(&m, omega - d).classified()?);
                        Ok(Some(match (pair.out, pair.input) {
                            (2, 1) => four.s21,
                            (4, 1) => four.s41,
                            _ => four.s14,
                        }))
                    })
                    .collect::<Result<_>>()?
            }
            ModelKind::Ring => {
                let p = r.ring()?;
                let (row, col) = (pair.out as usize - 1, pair.input as usize - 1);
                deltas
                    .par_iter()
                    .map(|&d| match ring_s_closed(&p, d) {
                        Ok(rs) => Ok(Some(rs.smatrix.get(row, col))),
                        Err(ScatteringError::Pole { delta }) => {
                            log::warn!("{pair}: pole of the closed form at delta = {delta}; row flagged");
                            Ok(None)
                        }
                        Err(e) => Err(e).classified(),
                    })
                    .collect::<Result<_>>()?
            }
        };
        let nan = f64::NAN;
        let pick = |f: fn(Complex<f64>) -> f64| values.iter().map(|v| v.map_or(nan, f)).collect::<Vec<_>>();
        let mut cols = vec![
            Column::new("delta", deltas.clone()),
            Column::new("re", pick(|z| z.re)),
            Column::new("im", pick(|z| z.im)),
            Column::new("abs", pick(|z| z.norm())),
        ];
        let poles = values.iter().filter(|v| v.is_none()).count();
        if r.kind == ModelKind::Ring {
            cols.push(Column::new(
                "pole",
                values.iter().map(|v| if v.is_none() { 1.0 } else { 0.0 }).collect(),
            ));
        }
        let max_abs = values.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let mut prov = provenance("smatrix", r);
        if r.kind == ModelKind::Ring {
            prov = prov.note("three-cavity entries from the published closed form");
        }
        let ds = Dataset::new(pair.to_string(), cols, prov)
            .with_summary("max_abs", max_abs)
            .with_summary("pole_rows", poles);
        per_pair.insert(pair.to_string(), json!({ "max_abs": max_abs, "pole_rows": poles }));
        artifacts.push(Artifact::Data(ds));
    }

    if a.all_ports {
        let (m, omega) = mode_matrix(r)?;
        let records: Vec<Value> = deltas
            .par_iter()
            .map(|&d| match s_general(&m, omega - d) {
                Ok(s) => {
                    let rows: Vec<Vec<Value>> = (0..s.ports())
                        .map(|i| (0..s.ports()).map(|j| cplx(s.get(i, j))).collect())
                        .collect();
                    json!({ "delta": d, "omega_probe": omega - d, "singular": false, "s": rows })
                }
                Err(e) => {
                    log::warn!("all-ports: {e}; row flagged");
                    json!({ "delta": d, "omega_probe": omega - d, "singular": true, "s": null })
                }
            })
            .collect();
        artifacts.push(Artifact::Json {
            name: "smatrix.json".into(),
            value: json!({
                "model": model_name(r.kind),
                "parameters": parameters(r),
                "labels": m.labels(),
                "records": records,
            }),
        });
    }
    let summary = json!({ "model": model_name(r.kind), "points": deltas.len(), "pairs": per_pair });
    Ok(Outcome { artifacts, summary })
}

// ---------------------------------------------------------------- ep-find

#[derive(Debug, Clone, Args)]
pub struct EpFindArgs {
    /// 2 for the two-cavity EPs, 3 for ring coalescences.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub order: u8,
    /// Phase window in radians.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, conflicts_with = "theta_range_halfpi")]
    pub theta_range: Option<Vec<f64>>,
    /// Phase window in multiples of π/2.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub theta_range_halfpi: Option<Vec<f64>>,
    /// Window of J/G.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub ratio_range: Option<Vec<f64>>,
}

pub fn ep_find(r: &Resolved, a: &EpFindArgs) -> Result<Outcome> {
    let theta = match (
        range_pair(&a.theta_range, "theta-range")?,
        range_pair(&a.theta_range_halfpi, "theta-range-halfpi")?,
    ) {
        (Some(t), _) => t,
        (None, Some((lo, hi))) => (lo * FRAC_PI_2, hi * FRAC_PI_2),
        (None, None) => (r.sweep.theta_min.unwrap_or(0.0), r.sweep.theta_max.unwrap_or(4.0 * PI)),
    };
    let ratio = range_pair(&a.ratio_range, "ratio-range")?
        .unwrap_or((r.sweep.ratio_min.unwrap_or(0.5), r.sweep.ratio_max.unwrap_or(1.5)));
    let bx = SearchBox::new(theta.0, theta.1, ratio.0, ratio.1).classified()?;
    let box_json = json!({ "theta": [bx.theta_min, bx.theta_max], "j_over_g": [bx.ratio_min, bx.ratio_max] });

    match (a.order, r.kind) {
        (2, ModelKind::Ring) => bail!("--order 2 applies to the two-cavity models; use --order 3 with --model ring"),
        (3, ModelKind::Effective | ModelKind::Full) => bail!("--order 3 needs --model ring"),
        (2, _) => {
            let e = r.two_cavity()?;
            let eps = locate_eps(&e, &bx).classified()?;
            let value = serde_json::to_value(&eps)?;
            Ok(Outcome {
                artifacts: vec![Artifact::Json {
                    name: "eps.json".into(),
                    value: value.clone(),
                }],
                summary: json!({ "box": box_json, "count": eps.len(), "eps": value }),
            })
        }
        _ => {
            let p = r.ring()?;
            let search = EpSearch::default();
            let circ = locate_ring_coalescences(&p, &bx, SpectrumSource::RingCirculant, &search).classified()?;
            let published = locate_ring_coalescences(&p, &bx, SpectrumSource::RingAsPublished, &search).classified()?;
            let value = json!({
                "defective": {
                    "label": "third-order EPs of the circulant matrix (normal, never defective)",
                    "count": circ.len(),
                    "points": circ,
                },
                "as_published": {
                    "label": "coalescences of the published closed-form eigenvalues",
                    "count": published.len(),
                    "points": published,
                },
            });
            Ok(Outcome {
                artifacts: vec![Artifact::Json {
                    name: "eps.json".into(),
                    value: value.clone(),
                }],
                summary: json!({ "box": box_json, "result": value }),
            })
        }
    }
}

// ---------------------------------------------------------------- chirality

#[derive(Debug, Clone, Args)]
pub struct ChiralityArgs {
    /// Probe detuning.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    /// Phase window in multiples of π/2 (default 0 8).
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub theta_range_halfpi: Option<Vec<f64>>,
    #[arg(long)]
    pub points: Option<usize>,
}

pub fn chirality_cmd(r: &Resolved, a: &ChiralityArgs) -> Result<Outcome> {
    if r.kind == ModelKind::Ring {
        bail!("chirality is defined for the two-cavity models");
    }
    let e = r.two_cavity()?;
    if !a.delta.is_finite() {
        bail!("--delta must be finite");
    }
    let (lo, hi) = range_pair(&a.theta_range_halfpi, "theta-range-halfpi")?.unwrap_or((0.0, 8.0));
    let n = a.points.unwrap_or(DEFAULT_CURVE_POINTS);
    if n < 2 {
        bail!("--points must be at least 2");
    }
    let halfpi = linspace(lo, hi, n);
    let samples: Vec<(f64, f64, f64, f64)> = halfpi
        .par_iter()
        .map(|&h| {
            let p = e.with_theta(h * FRAC_PI_2)?;
            let alpha = chirality(&p, a.delta).map_or(f64::NAN, |s| s.alpha);
            let s41 = revdiss::s41_closed(&p, a.delta).norm();
            let s23 = revdiss::s23_closed(&p, a.delta).norm();
            Ok((h * FRAC_PI_2, alpha, s41, s23))
        })
        .collect::<Result<_>>()?;
    let undefined = samples.iter().filter(|s| s.1.is_nan()).count();
    if undefined > 0 {
        log::warn!("chirality undefined at {undefined} phase points (both transmissions vanish)");
    }
    let col = |f: fn(&(f64, f64, f64, f64)) -> f64| samples.iter().map(f).collect::<Vec<_>>();
    let ds = Dataset::new(
        "chirality",
        vec![
            Column::new("theta", col(|s| s.0)),
            Column::new("theta_over_halfpi", halfpi.clone()),
            Column::new("alpha", col(|s| s.1)),
            Column::new("S41_abs", col(|s| s.2)),
            Column::new("S23_abs", col(|s| s.3)),
        ],
        provenance("chirality", r).param("delta", a.delta),
    )
    .with_summary("undefined_rows", undefined);
    let alphas: Vec<f64> = samples.iter().map(|s| s.1).filter(|x| !x.is_nan()).collect();
    let summary = json!({
        "delta": a.delta,
        "points": n,
        "alpha_min": alphas.iter().copied().fold(f64::INFINITY, f64::min),
        "alpha_max": alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "undefined_rows": undefined,
    });
    Ok(Outcome {
        artifacts: vec![Artifact::Data(ds)],
        summary,
    })
}

// ---------------------------------------------------------------- bandwidth

#[derive(Debug, Clone, Args)]
pub struct BandwidthArgs {
    /// Mechanical damping values in units of G (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub gamma_over_g: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub delta_range: Option<Vec<f64>>,
    #[arg(long)]
    pub points: Option<usize>,
}

fn gamma_label(g: f64) -> String {
    format!("D_gamma{g}")
}

pub fn bandwidth(r: &Resolved, a: &BandwidthArgs) -> Result<Outcome> {
    if r.kind == ModelKind::Ring {
        bail!("bandwidth is defined for the two-cavity models");
    }
    let e = r.two_cavity()?;
    let grid = probe_grid(r, &a.delta_range, a.points, DEFAULT_BANDWIDTH_POINTS)?;
    let gammas: Vec<f64> = match r.kind {
        ModelKind::Effective if !a.gamma_over_g.is_empty() => {
            bail!("--gamma-over-g needs --model full")
        }
        ModelKind::Effective => Vec::new(),
        _ if a.gamma_over_g.is_empty() => BANDWIDTH_GAMMAS.to_vec(),
        _ => a.gamma_over_g.clone(),
    };
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        bail!("--gamma-over-g values must be positive, got {g}");
    }
    // validate every lift before the first solve
    let fulls = gammas
        .iter()
        .map(|&g| r.lift_effective(&e, g * e.g()))
        .collect::<Result<Vec<_>>>()?;

    let mut cols = vec![Column::new("delta", grid.values().to_vec())];
    let mut widths = serde_json::Map::new();
    let mut record = |label: String, curve: revdiss::TransmissionCurve<f64>| {
        let width = fwhm(&curve).map_err(|err| log::warn!("{label}: {err}")).ok();
        widths.insert(label.clone(), json!({ "fwhm": width, "area": curve_area(&curve) }));
        cols.push(Column::new(label, curve.values.iter().map(|z| z.re).collect()));
    };
    for (g, full) in gammas.iter().zip(fulls) {
        let model = ScatteringModel::Full {
            params: full,
            port_rate: e.kappa(),
        };
        record(gamma_label(*g), nonreciprocity_curve(&model, &grid).classified()?);
    }
    record(
        "D_effective".into(),
        nonreciprocity_curve(&ScatteringModel::Effective(e), &grid).classified()?,
    );
    let mut ds = Dataset::new(
        "bandwidth",
        cols,
        provenance("bandwidth", r).param("gamma_over_g", gammas.clone()),
    );
    for (k, v) in &widths {
        ds = ds.with_summary(k, v.clone());
    }
    Ok(Outcome {
        artifacts: vec![Artifact::Data(ds)],
        summary: json!({ "gamma_over_g": gammas, "curves": widths }),
    })
}

// ---------------------------------------------------------------- figure

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure id, e.g. fig5 or 5.
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    pub id: Option<String>,
    /// Regenerate every figure dataset.
    #[arg(long)]
    pub all: bool,
}

pub fn figure(a: &FigureArgs) -> Result<Outcome> {
    let ids: Vec<FigureId> = match &a.id {
        Some(id) => vec![id.parse::<FigureId>().map_err(|e| anyhow!(e))?],
        None => FigureId::ALL.to_vec(),
    };
    let sets = ids
        .par_iter()
        .map(|&id| figure_dataset(id).classified())
        .collect::<Result<Vec<_>>>()?;
    let summary = json!(sets
        .iter()
        .map(|d| json!({ "id": d.id, "rows": d.rows(), "columns": d.columns.len() }))
        .collect::<Vec<_>>());
    Ok(Outcome {
        artifacts: sets.into_iter().map(Artifact::Data).collect(),
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_numerical(e: &anyhow::Error) -> bool {
        e.chain().any(|c| c.is::<Numerical>())
    }

    #[test]
    fn numerics_and_requests_are_told_apart() {
        let pole: Result<(), _> = Err(ScatteringError::Pole { delta: 1.0 });
        assert!(is_numerical(&pole.classified().unwrap_err()));
        let grid: Result<(), _> = Err(ScatteringError::Grid("bad".into()));
        assert!(!is_numerical(&grid.classified().unwrap_err()));
        let spec: Result<(), _> = Err(SweepError::Spec("bad".into()));
        assert!(!is_numerical(&spec.classified().unwrap_err()));
    }

    #[test]
    fn range_pair_rejects_reversed_bounds() {
        assert!(range_pair(&Some(vec![2.0, 1.0]), "x").is_err());
        assert_eq!(range_pair(&Some(vec![-1.0, 1.0]), "x").unwrap(), Some((-1.0, 1.0)));
        assert_eq!(range_pair(&None, "x").unwrap(), None);
    }
}
