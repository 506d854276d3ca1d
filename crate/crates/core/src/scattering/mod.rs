//! Scattering parameters from input-output theory.
//!
//! With drift `dμ/dt = −i M μ + Γ μ_in` and `μ_out = μ_in − Γ μ`, a probe at
//! frequency `ω_p` sees
//!
//! ```text
//! S(ω_p) = I + i Γᵀ (M − ω_p I)⁻¹ Γ
//! ```
//!
//! where `Γ` is the `N × P` port matrix. Probe detuning is `δ = ω − ω_p`.
//! The two-cavity closed forms use the four-port labelling in which port 1
//! drives cavity `a` (output port 2) and port 4 drives cavity `b` (output port
//! 3); the ports on `b` carry a reference phase of `π`.

mod metrics;

pub use metrics::{
    chirality, curve_area, effective_curve, fwhm, nonreciprocity_curve, ring_curve, ChiralitySample, PortPair,
    ScatteringModel, TransmissionCurve,
};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{spectral_norm, CMatrix, LinalgError, Lu};
use crate::model::{CoefficientMatrix, EffectiveParams, ModelError, RingParams};
use crate::scalar::{cis, i, re, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("singular system at probe frequency {omega_probe}: {source}")]
    Singular { omega_probe: f64, source: LinalgError },
    #[error("pole of the scattering matrix at detuning {delta}")]
    Pole { delta: f64 },
    #[error("chirality undefined at detuning {delta}: both transmissions vanish")]
    UndefinedChirality { delta: f64 },
    #[error("bandwidth undefined: {0}")]
    Bandwidth(String),
    #[error("invalid probe grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Probe detunings `δ`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid<T> {
    delta_values: Vec<T>,
}

impl<T: Real> ProbeGrid<T> {
    pub fn new(delta_values: Vec<T>) -> Result<Self, ScatteringError> {
        if delta_values.is_empty() {
            return Err(ScatteringError::Grid("no probe points".into()));
        }
        if delta_values.iter().any(|d| !d.is_finite()) {
            return Err(ScatteringError::Grid("probe detunings must be finite".into()));
        }
        if delta_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScatteringError::Grid(
                "probe detunings must be strictly increasing".into(),
            ));
        }
        Ok(Self { delta_values })
    }

    /// `n` evenly spaced points on `[lo, hi]` (a single point needs `lo == hi`).
    pub fn linspace(lo: T, hi: T, n: usize) -> Result<Self, ScatteringError> {
        match n {
            0 => Err(ScatteringError::Grid("need at least one point".into())),
            1 => Self::new(vec![lo]),
            _ => {
                let last = T::lit((n - 1) as f64);
                Self::new((0..n).map(|k| lo + (hi - lo) * T::lit(k as f64) / last).collect())
            }
        }
    }

    pub fn values(&self) -> &[T] {
        &self.delta_values
    }

    pub fn len(&self) -> usize {
        self.delta_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_values.is_empty()
    }
}

/// Scattering matrix at one probe point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SMatrix<T> {
    pub s: CMatrix<T>,
    pub labels: Vec<String>,
    pub omega_probe: T,
}

impl<T: Real> SMatrix<T> {
    /// Entry `S[out][in]` (zero-based port indices).
    pub fn get(&self, out: usize, input: usize) -> Complex<T> {
        self.s[(out, input)]
    }

    pub fn ports(&self) -> usize {
        self.s.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite()
    }

    pub fn max_singular_value(&self) -> Result<T, LinalgError> {
        spectral_norm(&self.s)
    }
}

/// Four-port reading of a two-cavity mode-level scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourPort<T> {
    pub s21: Complex<T>,
    pub s41: Complex<T>,
    pub s14: Complex<T>,
    pub s34: Complex<T>,
}

impl<T: Real> FourPort<T> {
    pub fn from_modes(s: &SMatrix<T>) -> Self {
        assert_eq!(s.ports(), 2, "four-port view needs a two-port mode-level matrix");
        Self {
            s21: s.get(0, 0),
            s41: -s.get(1, 0),
            s14: -s.get(0, 1),
            s34: s.get(1, 1),
        }
    }
}

/// Dense-solve evaluation of `S(ω_p)` for any coefficient matrix.
pub fn s_general<T: Real>(m: &CoefficientMatrix<T>, omega_probe: T) -> Result<SMatrix<T>, ScatteringError> {
    let b = m.port_matrix();
    let lu = Lu::new(&m.matrix().shifted(re(omega_probe))).map_err(|source| ScatteringError::Singular {
        omega_probe: omega_probe.as_f64(),
        source,
    })?;
    let x = lu.solve(&b)?;
    let mut s = (&b.transpose() * &x).scale(i::<T>());
    for k in 0..s.nrows() {
        s[(k, k)] = s[(k, k)] + T::one();
    }
    let labels = m.ports().iter().map(|p| m.labels()[p.mode].clone()).collect();
    Ok(SMatrix { s, labels, omega_probe })
}

struct TwoMode<T> {
    kappa: T,
    d: Complex<T>,
    j1: Complex<T>,
    j2: Complex<T>,
    det: Complex<T>,
}

fn two_mode<T: Real>(p: &EffectiveParams<T>, delta: T) -> TwoMode<T> {
    let kappa = p.kappa();
    let d = Complex::new(kappa, delta);
    let (j1, j2) = (j_minus(p.g(), p.j(), p.theta()), j_minus(p.g(), p.j(), -p.theta()));
    TwoMode {
        kappa,
        d,
        j1,
        j2,
        det: d * d - j1 * j2,
    }
}

/// `J e^{−iθ} − iG`.
fn j_minus<T: Real>(g: T, j: T, theta: T) -> Complex<T> {
    cis(-theta) * j - i::<T>() * g
}

/// Reflection-type transmission `1 → 2` through cavity `a`.
pub fn s21_closed<T: Real>(p: &EffectiveParams<T>, delta: T) -> Complex<T> {
    let t = two_mode(p, delta);
    re(T::one()) - t.d * t.kappa / t.det
}

/// Transfer `1 → 4` from cavity `a` to cavity `b`.
pub fn s41_closed<T: Real>(p: &EffectiveParams<T>, delta: T) -> Complex<T> {
    let t = two_mode(p, delta);
    t.j2 * t.kappa / t.det
}

/// Transfer `4 → 1` from cavity `b` to cavity `a`.
pub fn s14_closed<T: Real>(p: &EffectiveParams<T>, delta: T) -> Complex<T> {
    let t = two_mode(p, delta);
    t.j1 * t.kappa / t.det
}

/// Mirror-image path `3 → 2`: the `1 → 4` form with the numerator phase
/// conjugated.
pub fn s23_closed<T: Real>(p: &EffectiveParams<T>, delta: T) -> Complex<T> {
    let t = two_mode(p, delta);
    j_minus(p.g(), p.j(), p.theta()) * t.kappa / t.det
}

/// Intermediates of the explicit three-cavity scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeCavityAux<T> {
    /// `X = −(κ + iδ)`.
    pub x: Complex<T>,
    /// `J₁ = J e^{−iθ} − iG`.
    pub j1: Complex<T>,
    /// `J₂ = J e^{iθ} − iG`.
    pub j2: Complex<T>,
    /// `Λ = X³ + J₁³ + J₂³ − 3 X J₁ J₂`.
    pub lambda_det: Complex<T>,
}

impl<T: Real> ThreeCavityAux<T> {
    pub fn new(p: &RingParams<T>, delta: T) -> Self {
        let x = -Complex::new(p.kappa(), delta);
        let j1 = j_minus(p.g(), p.j(), p.theta());
        let j2 = j_minus(p.g(), p.j(), -p.theta());
        let three = re(T::lit(3.0));
        let lambda_det = x * x * x + j1 * j1 * j1 + j2 * j2 * j2 - three * x * j1 * j2;
        Self { x, j1, j2, lambda_det }
    }

    /// The three distinct entries `(X² − J₁J₂, J₂² − J₁X, J₁² − J₂X)`.
    pub fn circulant_numerators(&self) -> [Complex<T>; 3] {
        let (x, j1, j2) = (self.x, self.j1, self.j2);
        [x * x - j1 * j2, j2 * j2 - j1 * x, j1 * j1 - j2 * x]
    }

    fn is_pole(&self) -> bool {
        let scale = self.x.norm() + self.j1.norm() + self.j2.norm();
        self.lambda_det.norm() <= T::lit(16.0) * T::epsilon() * scale * scale * scale
    }
}

/// Explicit three-cavity matrix together with its intermediates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingScattering<T> {
    pub smatrix: SMatrix<T>,
    pub aux: ThreeCavityAux<T>,
}

fn ring_closed<T: Real>(
    p: &RingParams<T>,
    delta: T,
    diagonal: impl Fn(Complex<T>) -> Complex<T>,
) -> Result<RingScattering<T>, ScatteringError> {
    let aux = ThreeCavityAux::new(p, delta);
    if aux.is_pole() {
        return Err(ScatteringError::Pole { delta: delta.as_f64() });
    }
    let scale = re(p.kappa()) / aux.lambda_det;
    let [a0, a1, a2] = aux.circulant_numerators();
    let s = CMatrix::from_fn(3, 3, |r, c| match (c + 3 - r) % 3 {
        0 => diagonal(a0 * scale),
        1 => a1 * scale,
        _ => a2 * scale,
    });
    Ok(RingScattering {
        smatrix: SMatrix {
            s,
            labels: vec!["a".into(), "b".into(), "c".into()],
            omega_probe: p.omega() - delta,
        },
        aux,
    })
}

/// The three-cavity scattering matrix exactly as published: every diagonal
/// entry is `κ(X² − J₁J₂ + 1)/Λ`, off-diagonal entries are `κ(J₂² − J₁X)/Λ`
/// above and `κ(J₁² − J₂X)/Λ` below the diagonal (cyclically).
pub fn ring_s_closed<T: Real>(p: &RingParams<T>, delta: T) -> Result<RingScattering<T>, ScatteringError> {
    let aux = ThreeCavityAux::new(p, delta);
    let extra = re(p.kappa()) / aux.lambda_det;
    ring_closed(p, delta, |d| d + extra)
}

/// The same matrix with the diagonal made consistent with the general
/// formula: `1 + κ(X² − J₁J₂)/Λ`.
pub fn ring_s_corrected<T: Real>(p: &RingParams<T>, delta: T) -> Result<RingScattering<T>, ScatteringError> {
    ring_closed(p, delta, |d| d + T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::determinant;
    use crate::model::{build_effective_matrix, build_ring_matrix, Port};
    use std::f64::consts::{FRAC_PI_2, PI};

    type C = Complex<f64>;

    fn eff(g: f64, j: f64, theta: f64) -> EffectiveParams<f64> {
        EffectiveParams::critical(g, j, theta).unwrap()
    }

    #[test]
    fn bare_cavity() {
        let p = eff(0.0, 0.0, 0.0);
        assert_eq!(p.kappa(), 2.0);
        assert_eq!(s21_closed(&p, 0.0), C::new(0.0, 0.0));
        assert!((s21_closed(&p, 1e9) - 1.0).norm() < 1e-8);
        assert!((s21_closed(&p, -1e9) - 1.0).norm() < 1e-8);
    }

    #[test]
    fn blockade_at_eps() {
        let odd = eff(10.0, 10.0, FRAC_PI_2);
        assert_eq!(odd.kappa(), 22.0);
        assert_eq!(s21_closed(&odd, 0.0), C::new(0.0, 0.0));
        for d in [-30.0, 0.0, 4.5, 100.0] {
            assert_eq!(s41_closed(&odd, d), C::new(0.0, 0.0));
        }
        assert!((s14_closed(&odd, 0.0).norm() - 10.0 / 11.0).abs() < 1e-14);

        let even = eff(10.0, 10.0, 3.0 * FRAC_PI_2);
        assert!((s41_closed(&even, 0.0).norm() - 10.0 / 11.0).abs() < 1e-14);
        for d in [-30.0, 0.0, 4.5] {
            assert_eq!(s14_closed(&even, d), C::new(0.0, 0.0));
        }
    }

    #[test]
    fn reciprocity_without_dissipative_coupling() {
        let p = eff(7.0, 0.0, 1.3);
        for d in [-3.0, 0.0, 2.0] {
            assert_eq!(s41_closed(&p, d), s14_closed(&p, d));
        }
        let q = eff(10.0, 10.0, 0.0);
        for d in [-3.0, 0.0, 2.0] {
            assert!((s41_closed(&q, d).norm() - s14_closed(&q, d).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn general_matches_closed_forms() {
        for &(g, j, th, d) in &[
            (10.0, 10.0, FRAC_PI_2, 0.0),
            (3.0, 8.0, 0.7, -4.0),
            (1.0, 0.5, 4.0, 12.0),
        ] {
            let p = eff(g, j, th);
            let s = s_general(&build_effective_matrix(&p), p.omega() - d).unwrap();
            let four = FourPort::from_modes(&s);
            assert!((four.s21 - s21_closed(&p, d)).norm() < 1e-12);
            assert!((four.s41 - s41_closed(&p, d)).norm() < 1e-12);
            assert!((four.s14 - s14_closed(&p, d)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_on_resonance() {
        let m = CoefficientMatrix::new(
            CMatrix::from_diagonal(&[C::new(3.0, -2.0)]),
            vec![Port { mode: 0, rate: 2.0 }],
            vec!["a".into()],
        )
        .unwrap();
        let s = s_general(&m, 3.0).unwrap();
        assert!(s.get(0, 0).norm() < 1e-15);
        assert_eq!(s.labels, vec!["a".to_string()]);
    }

    #[test]
    fn singular_probe_reported() {
        let m = CoefficientMatrix::new(
            CMatrix::from_diagonal(&[C::new(3.0, 0.0)]),
            vec![Port { mode: 0, rate: 0.0 }],
            vec!["a".into()],
        )
        .unwrap();
        match s_general(&m, 3.0) {
            Err(ScatteringError::Singular { omega_probe, .. }) => assert_eq!(omega_probe, 3.0),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn ring_isolation_contrast() {
        let p = RingParams::new(0.0, 1000.0, 10.0, 10.0, FRAC_PI_2).unwrap();
        let r = ring_s_closed(&p, 0.0).unwrap();
        let (s21, s12) = (r.smatrix.get(1, 0).norm(), r.smatrix.get(0, 1).norm());
        assert!((s21 - 4.0e-4).abs() < 1e-5);
        assert!((s12 - 2.0e-2).abs() < 1e-4);
        assert!((s12 / s21 - 50.0).abs() < 0.5);
        // cyclic equalities hold exactly
        let s = &r.smatrix;
        assert_eq!(s.get(1, 0), s.get(2, 1));
        assert_eq!(s.get(1, 0), s.get(0, 2));
        assert_eq!(s.get(0, 1), s.get(1, 2));
        assert_eq!(s.get(0, 1), s.get(2, 0));
    }

    #[test]
    fn ring_direction_flips_with_parity() {
        let odd = RingParams::new(0.0, 1000.0, 10.0, 10.0, FRAC_PI_2).unwrap();
        let even = odd.with_theta(3.0 * FRAC_PI_2).unwrap();
        let a = ring_s_closed(&odd, 0.0).unwrap().smatrix;
        let b = ring_s_closed(&even, 0.0).unwrap().smatrix;
        assert!(a.get(0, 1).norm() > a.get(1, 0).norm());
        assert!(b.get(0, 1).norm() < b.get(1, 0).norm());
        let recip = odd.with_theta(0.0).unwrap();
        for d in [-50.0, 0.0, 30.0] {
            let s = ring_s_closed(&recip, d).unwrap().smatrix;
            assert!((s.get(1, 0).norm() - s.get(0, 1).norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn ring_general_agrees_off_diagonal() {
        let p = RingParams::new(0.0, 22.0, 10.0, 7.0, 0.9).unwrap();
        let m = build_ring_matrix(&p);
        for d in [-20.0, 0.0, 3.0] {
            let g = s_general(&m, p.omega() - d).unwrap();
            let published = ring_s_closed(&p, d).unwrap();
            let corrected = ring_s_corrected(&p, d).unwrap();
            for r in 0..3 {
                for c in 0..3 {
                    assert!((g.get(r, c) - corrected.smatrix.get(r, c)).norm() < 1e-12);
                    if r != c {
                        assert!((g.get(r, c) - published.smatrix.get(r, c)).norm() < 1e-12);
                    }
                }
            }
            // Λ is the characteristic determinant up to a factor −i
            let det = determinant(&m.matrix().shifted(C::new(p.omega() - d, 0.0)));
            assert!((det - C::new(0.0, -1.0) * published.aux.lambda_det).norm() < 1e-9 * det.norm());
        }
    }

    #[test]
    fn ring_pole_reported() {
        // a nearly lossless ring has a pole on the real axis at δ = −2G
        let p = RingParams::new(0.0, 1e-20, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(ring_s_closed(&p, -2.0), Err(ScatteringError::Pole { .. })));
        assert!(ring_s_closed(&p, 0.5).is_ok());
    }

    #[test]
    fn probe_grid_validation() {
        assert!(ProbeGrid::<f64>::new(vec![]).is_err());
        assert!(ProbeGrid::new(vec![1.0, 1.0]).is_err());
        assert!(ProbeGrid::new(vec![0.0, f64::NAN]).is_err());
        let g = ProbeGrid::linspace(-PI, PI, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.values()[2], 0.0);
    }
}
