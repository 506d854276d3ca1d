//! Transmission curves and the figures of merit derived from them.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ring_s_closed, s14_closed, s21_closed, s23_closed, s41_closed, s_general, FourPort, ProbeGrid, ScatteringError,
};
use crate::model::{build_full_matrix, reduce_full_to_effective, EffectiveParams, FullParams, RingParams};
use crate::scalar::{re, wrap_two_pi, Real};

/// `S_{out,in}` with one-based port numbers, written `S21` etc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PortPair {
    pub out: u8,
    pub input: u8,
}

impl PortPair {
    pub const fn new(out: u8, input: u8) -> Self {
        Self { out, input }
    }

    /// Pairs with a closed form in the two-cavity model.
    pub const EFFECTIVE: [PortPair; 4] = [
        PortPair::new(2, 1),
        PortPair::new(4, 1),
        PortPair::new(1, 4),
        PortPair::new(2, 3),
    ];

    pub fn is_ring_pair(self) -> bool {
        (1..=3).contains(&self.out) && (1..=3).contains(&self.input)
    }
}

impl fmt::Display for PortPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}{}", self.out, self.input)
    }
}

impl FromStr for PortPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix(['S', 's']).unwrap_or(s);
        let mut chars = digits.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) if a.is_ascii_digit() && b.is_ascii_digit() => {
                Ok(Self::new(a as u8 - b'0', b as u8 - b'0'))
            }
            _ => Err(format!("port pair `{s}` is not of the form S<out><in>")),
        }
    }
}

/// Complex S-parameter (or derived real quantity) over a probe grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionCurve<T> {
    pub grid: ProbeGrid<T>,
    pub label: String,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> TransmissionCurve<T> {
    pub fn new(grid: ProbeGrid<T>, label: impl Into<String>, values: Vec<Complex<T>>) -> Result<Self, ScatteringError> {
        if values.len() != grid.len() {
            return Err(ScatteringError::Grid(format!(
                "{} values for {} probe points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            label: label.into(),
            values,
        })
    }

    pub fn abs(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn evaluate<T, F>(grid: &ProbeGrid<T>, f: F) -> Result<Vec<Complex<T>>, ScatteringError>
where
    T: Real,
    F: Fn(T) -> Result<Complex<T>, ScatteringError> + Sync,
{
    grid.values().par_iter().map(|&d| f(d)).collect()
}

/// Closed-form two-cavity curve for one of [`PortPair::EFFECTIVE`].
pub fn effective_curve<T: Real>(
    p: &EffectiveParams<T>,
    grid: &ProbeGrid<T>,
    pair: PortPair,
) -> Result<TransmissionCurve<T>, ScatteringError> {
    let f: fn(&EffectiveParams<T>, T) -> Complex<T> = match (pair.out, pair.input) {
        (2, 1) => s21_closed,
        (4, 1) => s41_closed,
        (1, 4) => s14_closed,
        (2, 3) => s23_closed,
        _ => {
            return Err(ScatteringError::Grid(format!(
                "{pair} has no two-cavity closed form (use S21, S41, S14 or S23)"
            )))
        }
    };
    let values = evaluate(grid, |d| Ok(f(p, d)))?;
    TransmissionCurve::new(grid.clone(), pair.to_string(), values)
}

/// Entry of the published three-cavity matrix over the grid.
pub fn ring_curve<T: Real>(
    p: &RingParams<T>,
    grid: &ProbeGrid<T>,
    pair: PortPair,
) -> Result<TransmissionCurve<T>, ScatteringError> {
    if !pair.is_ring_pair() {
        return Err(ScatteringError::Grid(format!("{pair} is not a three-port pair")));
    }
    let (r, c) = (pair.out as usize - 1, pair.input as usize - 1);
    let values = evaluate(grid, |d| Ok(ring_s_closed(p, d)?.smatrix.get(r, c)))?;
    TransmissionCurve::new(grid.clone(), pair.to_string(), values)
}

/// Source of the S-parameters for [`nonreciprocity_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScatteringModel<T> {
    /// Two-cavity closed forms.
    Effective(EffectiveParams<T>),
    /// Dense solve on the three-mode matrix with both cavity ports at `port_rate`.
    Full { params: FullParams<T>, port_rate: T },
}

impl<T: Real> ScatteringModel<T> {
    /// Full model with the port rate of its reduced two-cavity counterpart.
    pub fn full(params: FullParams<T>) -> Result<Self, ScatteringError> {
        let port_rate = reduce_full_to_effective(&params)?.kappa();
        Ok(Self::Full { params, port_rate })
    }

    fn theta(&self) -> Result<T, ScatteringError> {
        Ok(match self {
            Self::Effective(p) => p.theta(),
            Self::Full { params, .. } => reduce_full_to_effective(params)?.theta(),
        })
    }
}

/// `D(δ) = |S14(δ)| − |S41(δ)|`, stored as real values.
pub fn nonreciprocity_curve<T: Real>(
    model: &ScatteringModel<T>,
    grid: &ProbeGrid<T>,
) -> Result<TransmissionCurve<T>, ScatteringError> {
    let theta = wrap_two_pi(model.theta()?);
    if (theta - T::FRAC_PI_2()).abs() > T::lit(1e-9) {
        log::warn!("nonreciprocal difference evaluated away from θ = π/2 (θ = {theta})");
    }
    let values = match model {
        ScatteringModel::Effective(p) => evaluate(grid, |d| Ok(re(s14_closed(p, d).norm() - s41_closed(p, d).norm())))?,
        ScatteringModel::Full { params, port_rate } => {
            let m = build_full_matrix(params, *port_rate)?;
            evaluate(grid, |d| {
                let s = s_general(&m, params.delta_a() - d)?;
                let four = FourPort::from_modes(&s);
                Ok(re(four.s14.norm() - four.s41.norm()))
            })?
        }
    };
    TransmissionCurve::new(grid.clone(), "D", values)
}

/// Chirality `α = (|S41| − |S23|)/(|S41| + |S23|)` at one probe detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiralitySample<T> {
    pub delta: T,
    pub alpha: T,
}

pub fn chirality<T: Real>(p: &EffectiveParams<T>, delta: T) -> Result<ChiralitySample<T>, ScatteringError> {
    let forward = s41_closed(p, delta).norm();
    let mirror = s23_closed(p, delta).norm();
    let total = forward + mirror;
    if !(total > T::zero()) {
        return Err(ScatteringError::UndefinedChirality { delta: delta.as_f64() });
    }
    Ok(ChiralitySample {
        delta,
        alpha: (forward - mirror) / total,
    })
}

/// Full width at half maximum of `|curve|`, linearly interpolated between
/// the samples that bracket the half level on each side of the peak.
pub fn fwhm<T: Real>(curve: &TransmissionCurve<T>) -> Result<T, ScatteringError> {
    let mag = curve.abs();
    let x = curve.grid.values();
    let (peak_at, peak) =
        mag.iter().copied().enumerate().fold(
            (0, T::neg_infinity()),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    if !(peak > T::zero()) {
        return Err(ScatteringError::Bandwidth(format!(
            "{}: peak is not positive",
            curve.label
        )));
    }
    let half = peak / T::lit(2.0);
    let cross = |a: usize, b: usize| x[a] + (x[b] - x[a]) * (half - mag[a]) / (mag[b] - mag[a]);
    let left = (0..peak_at)
        .rev()
        .find(|&k| mag[k] <= half)
        .map(|k| cross(k, k + 1))
        .ok_or_else(|| ScatteringError::Bandwidth(format!("{}: half level not reached below the peak", curve.label)))?;
    let right = (peak_at + 1..mag.len())
        .find(|&k| mag[k] <= half)
        .map(|k| cross(k - 1, k))
        .ok_or_else(|| ScatteringError::Bandwidth(format!("{}: half level not reached above the peak", curve.label)))?;
    Ok(right - left)
}

/// Trapezoid-rule integral of the real part over the probe grid.
pub fn curve_area<T: Real>(curve: &TransmissionCurve<T>) -> T {
    let x = curve.grid.values();
    x.windows(2)
        .zip(curve.values.windows(2))
        .fold(T::zero(), |acc, (dx, v)| {
            acc + (dx[1] - dx[0]) * (v[0].re + v[1].re) / T::lit(2.0)
        })
}
