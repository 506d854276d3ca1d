//! System parameters and the non-Hermitian dynamical matrices built from them.
//!
//! Rates are expressed in units of the intrinsic cavity loss (`kappa_i = 1`)
//! and frequencies are offsets from the rotating-frame reference `omega = 0`.
//! Loss rates enter the dynamical matrix as `-i·kappa` on the diagonal, so the
//! Langevin drift is `dμ/dt = -i M μ + Γ μ_in`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{hermitian_min_eigenvalue, CMatrix};
use crate::scalar::{cis, i, re, wrap_two_pi, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid coefficient matrix: {0}")]
    InvalidMatrix(String),
}

fn check<T: Real>(name: &'static str, value: T, ok: bool, reason: &'static str) -> Result<(), ModelError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value: value.as_f64(),
            reason,
        })
    }
}

/// Which rate a cavity port carries in the input-output relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PortConvention {
    /// Port rate equals the total loss `kappa`; reproduces the closed-form
    /// transmission `S21(δ=0) = 0` of a bare critically coupled cavity.
    #[default]
    TotalLoss,
    /// Port rate equals the external coupling `kappa_e`.
    External,
}

/// External coupling of the two effective cavities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExternalCoupling<T> {
    /// `kappa_e = kappa_i + J`, hence `kappa = 2 (J + kappa_i)`.
    Critical,
    Fixed(T),
}

/// Two-mode effective system obtained after eliminating the mechanical mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams<T> {
    omega: T,
    kappa_i: T,
    kappa_e: ExternalCoupling<T>,
    g: T,
    j: T,
    theta: T,
}

impl<T: Real> EffectiveParams<T> {
    pub fn new(omega: T, kappa_i: T, kappa_e: ExternalCoupling<T>, g: T, j: T, theta: T) -> Result<Self, ModelError> {
        check("omega", omega, true, "must be finite")?;
        check("kappa_i", kappa_i, kappa_i > T::zero(), "must be > 0")?;
        if let ExternalCoupling::Fixed(ke) = kappa_e {
            check("kappa_e", ke, ke >= T::zero(), "must be >= 0")?;
        }
        check("G", g, g >= T::zero(), "must be >= 0")?;
        check("J", j, j >= T::zero(), "must be >= 0")?;
        check("theta", theta, true, "must be finite")?;
        Ok(Self {
            omega,
            kappa_i,
            kappa_e,
            g,
            j,
            theta,
        })
    }

    /// Critically coupled system in natural units (`kappa_i = 1`, `omega = 0`).
    pub fn critical(g: T, j: T, theta: T) -> Result<Self, ModelError> {
        Self::new(T::zero(), T::one(), ExternalCoupling::Critical, g, j, theta)
    }

    /// System with a prescribed total loss `kappa = kappa_i + kappa_e + J`
    /// (`kappa_i = 1`); requires `kappa >= 1 + J`.
    pub fn with_total_loss(kappa: T, g: T, j: T, theta: T) -> Result<Self, ModelError> {
        let ke = kappa - T::one() - j;
        check("kappa", kappa, ke >= T::zero(), "total loss must be >= kappa_i + J")?;
        Self::new(T::zero(), T::one(), ExternalCoupling::Fixed(ke), g, j, theta)
    }

    pub fn omega(&self) -> T {
        self.omega
    }
    pub fn kappa_i(&self) -> T {
        self.kappa_i
    }
    pub fn g(&self) -> T {
        self.g
    }
    pub fn j(&self) -> T {
        self.j
    }
    pub fn theta(&self) -> T {
        self.theta
    }
    pub fn external_coupling(&self) -> ExternalCoupling<T> {
        self.kappa_e
    }
    pub fn is_critical(&self) -> bool {
        matches!(self.kappa_e, ExternalCoupling::Critical)
    }

    pub fn kappa_e(&self) -> T {
        match self.kappa_e {
            ExternalCoupling::Critical => self.kappa_i + self.j,
            ExternalCoupling::Fixed(ke) => ke,
        }
    }

    /// Total loss `kappa_i + kappa_e + J`.
    pub fn kappa(&self) -> T {
        self.kappa_i + self.kappa_e() + self.j
    }

    pub fn port_rate(&self, convention: PortConvention) -> T {
        match convention {
            PortConvention::TotalLoss => self.kappa(),
            PortConvention::External => self.kappa_e(),
        }
    }

    /// `J / G` (infinite when `G = 0` and `J > 0`).
    pub fn coupling_ratio(&self) -> T {
        self.j / self.g
    }

    pub fn with_theta(self, theta: T) -> Result<Self, ModelError> {
        Self::new(self.omega, self.kappa_i, self.kappa_e, self.g, self.j, theta)
    }

    pub fn with_j(self, j: T) -> Result<Self, ModelError> {
        Self::new(self.omega, self.kappa_i, self.kappa_e, self.g, j, self.theta)
    }

    pub fn with_g(self, g: T) -> Result<Self, ModelError> {
        Self::new(self.omega, self.kappa_i, self.kappa_e, g, self.j, self.theta)
    }

    pub fn with_omega(self, omega: T) -> Result<Self, ModelError> {
        Self::new(omega, self.kappa_i, self.kappa_e, self.g, self.j, self.theta)
    }

    pub fn with_kappa_i(self, kappa_i: T) -> Result<Self, ModelError> {
        Self::new(self.omega, kappa_i, self.kappa_e, self.g, self.j, self.theta)
    }

    pub fn with_external_coupling(self, kappa_e: ExternalCoupling<T>) -> Result<Self, ModelError> {
        Self::new(self.omega, self.kappa_i, kappa_e, self.g, self.j, self.theta)
    }

    /// Set `J = ratio · G`, keeping the external-coupling rule.
    pub fn with_coupling_ratio(self, ratio: T) -> Result<Self, ModelError> {
        self.with_j(ratio * self.g)
    }

    /// Coefficient of `a†b`: `iJe^{-iθ} + G`.
    pub fn coupling_ab(&self) -> Complex<T> {
        coupling_ab(self.g, self.j, self.theta)
    }

    /// Coefficient of `b†a`: `iJe^{iθ} + G`.
    pub fn coupling_ba(&self) -> Complex<T> {
        coupling_ba(self.g, self.j, self.theta)
    }
}

/// Coherent plus dissipative coupling `iJe^{-iθ} + G` (the `a†b` term).
pub fn coupling_ab<T: Real>(g: T, j: T, theta: T) -> Complex<T> {
    i::<T>() * cis(-theta) * j + re(g)
}

/// Coherent plus dissipative coupling `iJe^{iθ} + G` (the `b†a` term).
pub fn coupling_ba<T: Real>(g: T, j: T, theta: T) -> Complex<T> {
    i::<T>() * cis(theta) * j + re(g)
}

/// Linearized three-mode optomechanical system (cavities `a`, `b`, mechanics `m`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullParams<T> {
    delta_a: T,
    delta_b: T,
    omega_m: T,
    kappa_1: T,
    kappa_2: T,
    gamma: T,
    g: T,
    g_a: Complex<T>,
    g_b: Complex<T>,
}

/// `gamma` must exceed this multiple of every other rate for the
/// reversed-dissipation flag to be raised.
pub const REVERSED_DISSIPATION_FACTOR: f64 = 10.0;

impl<T: Real> FullParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        delta_a: T,
        delta_b: T,
        omega_m: T,
        kappa_1: T,
        kappa_2: T,
        gamma: T,
        g: T,
        g_a: Complex<T>,
        g_b: Complex<T>,
    ) -> Result<Self, ModelError> {
        check("delta_a", delta_a, true, "must be finite")?;
        check("delta_b", delta_b, true, "must be finite")?;
        check("omega_m", omega_m, true, "must be finite")?;
        check("kappa_1", kappa_1, kappa_1 >= T::zero(), "must be >= 0")?;
        check("kappa_2", kappa_2, kappa_2 >= T::zero(), "must be >= 0")?;
        check("gamma", gamma, gamma > T::zero(), "must be > 0")?;
        check("G", g, true, "must be finite")?;
        check("G_a", g_a.norm(), true, "must be finite")?;
        check("G_b", g_b.norm(), true, "must be finite")?;
        Ok(Self {
            delta_a,
            delta_b,
            omega_m,
            kappa_1,
            kappa_2,
            gamma,
            g,
            g_a,
            g_b,
        })
    }

    /// Lift an effective system to the full model at mechanical decay `gamma`
    /// with `|G_a| = |G_b| = sqrt(J γ)`; exact inverse of
    /// [`reduce_full_to_effective`].
    pub fn lift(e: &EffectiveParams<T>, gamma: T) -> Result<Self, ModelError> {
        check("gamma", gamma, gamma > T::zero(), "must be > 0")?;
        Self::lift_with_magnitude(e, gamma, (e.j() * gamma).sqrt())
    }

    /// Lift with `|G_a|² = J (γ − κ)`, which makes the mechanical self-energy
    /// at the cavity resonance `λ = ω − iκ` equal the effective couplings
    /// exactly. Requires `γ > κ`.
    pub fn lift_resonant(e: &EffectiveParams<T>, gamma: T) -> Result<Self, ModelError> {
        let kappa = e.kappa();
        check("gamma", gamma, gamma > kappa, "resonant lift needs gamma > kappa")?;
        Self::lift_with_magnitude(e, gamma, (e.j() * (gamma - kappa)).sqrt())
    }

    fn lift_with_magnitude(e: &EffectiveParams<T>, gamma: T, mag: T) -> Result<Self, ModelError> {
        let cavity_loss = e.kappa_i() + e.kappa_e();
        // arg G_b = θ + π: eliminating m yields G + iJe^{-iθ} on a†b
        let g_b = -cis(e.theta()) * mag;
        Self::new(
            e.omega(),
            e.omega(),
            e.omega(),
            cavity_loss,
            cavity_loss,
            gamma,
            e.g(),
            re(mag),
            g_b,
        )
    }

    pub fn delta_a(&self) -> T {
        self.delta_a
    }
    pub fn delta_b(&self) -> T {
        self.delta_b
    }
    pub fn omega_m(&self) -> T {
        self.omega_m
    }
    pub fn kappa_1(&self) -> T {
        self.kappa_1
    }
    pub fn kappa_2(&self) -> T {
        self.kappa_2
    }
    pub fn gamma(&self) -> T {
        self.gamma
    }
    pub fn g(&self) -> T {
        self.g
    }
    pub fn g_a(&self) -> Complex<T> {
        self.g_a
    }
    pub fn g_b(&self) -> Complex<T> {
        self.g_b
    }

    /// `arg(G_a* G_b)`, the phase difference of the two parametric couplings.
    pub fn parametric_phase(&self) -> T {
        (self.g_a.conj() * self.g_b).arg()
    }

    /// `gamma > 10 · max(|G_a|, |G_b|, kappa_1, kappa_2)`. Advisory only.
    pub fn is_reversed_dissipation(&self) -> bool {
        let largest = self.g_a.norm().max(self.g_b.norm()).max(self.kappa_1).max(self.kappa_2);
        self.gamma > T::lit(REVERSED_DISSIPATION_FACTOR) * largest
    }

    pub fn with_gamma(self, gamma: T) -> Result<Self, ModelError> {
        Self::new(
            self.delta_a,
            self.delta_b,
            self.omega_m,
            self.kappa_1,
            self.kappa_2,
            gamma,
            self.g,
            self.g_a,
            self.g_b,
        )
    }
}

/// Three identical cavities on a ring, every pair coupled by the same
/// coherent and dissipative couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingParams<T> {
    omega: T,
    kappa: T,
    g: T,
    j: T,
    theta: T,
}

impl<T: Real> RingParams<T> {
    pub fn new(omega: T, kappa: T, g: T, j: T, theta: T) -> Result<Self, ModelError> {
        check("omega", omega, true, "must be finite")?;
        check("kappa", kappa, kappa > T::zero(), "must be > 0")?;
        check("G", g, g >= T::zero(), "must be >= 0")?;
        check("J", j, j >= T::zero(), "must be >= 0")?;
        check("theta", theta, true, "must be finite")?;
        Ok(Self {
            omega,
            kappa,
            g,
            j,
            theta,
        })
    }

    pub fn omega(&self) -> T {
        self.omega
    }
    pub fn kappa(&self) -> T {
        self.kappa
    }
    pub fn g(&self) -> T {
        self.g
    }
    pub fn j(&self) -> T {
        self.j
    }
    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn with_theta(self, theta: T) -> Result<Self, ModelError> {
        Self::new(self.omega, self.kappa, self.g, self.j, theta)
    }

    pub fn with_j(self, j: T) -> Result<Self, ModelError> {
        Self::new(self.omega, self.kappa, self.g, j, self.theta)
    }

    pub fn with_kappa(self, kappa: T) -> Result<Self, ModelError> {
        Self::new(self.omega, kappa, self.g, self.j, self.theta)
    }

    /// Circulant coefficient on the `a→b→c→a` cycle, `iJe^{-iθ} + G`.
    pub fn c1(&self) -> Complex<T> {
        coupling_ab(self.g, self.j, self.theta)
    }

    /// Circulant coefficient on the reverse cycle, `iJe^{iθ} + G`.
    pub fn c2(&self) -> Complex<T> {
        coupling_ba(self.g, self.j, self.theta)
    }
}

/// A port attached to one mode of a coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Port<T> {
    pub mode: usize,
    pub rate: T,
}

/// Non-Hermitian dynamical matrix `M` with its port map (`Γ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix<T> {
    m: CMatrix<T>,
    ports: Vec<Port<T>>,
    labels: Vec<String>,
}

impl<T: Real> CoefficientMatrix<T> {
    pub fn new(m: CMatrix<T>, ports: Vec<Port<T>>, labels: Vec<String>) -> Result<Self, ModelError> {
        let n = m.nrows();
        if !m.is_square() || n == 0 || n > 3 {
            return Err(ModelError::InvalidMatrix(format!(
                "expected a square matrix of size 1..=3, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if labels.len() != n {
            return Err(ModelError::InvalidMatrix(format!(
                "{} labels for {n} modes",
                labels.len()
            )));
        }
        if !m.is_finite() {
            return Err(ModelError::InvalidMatrix("non-finite entry".into()));
        }
        for p in &ports {
            if p.mode >= n {
                return Err(ModelError::InvalidMatrix(format!("port on missing mode {}", p.mode)));
            }
            if !(p.rate >= T::zero()) || !p.rate.is_finite() {
                return Err(ModelError::InvalidMatrix(format!("port rate {} < 0", p.rate)));
            }
        }
        if let Some(k) = m.diagonal().iter().position(|z| z.im > T::zero()) {
            return Err(ModelError::InvalidMatrix(format!(
                "diagonal entry {k} has gain (positive imaginary part)"
            )));
        }
        Ok(Self { m, ports, labels })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn ports(&self) -> &[Port<T>] {
        &self.ports
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `N × P` coupling matrix with `sqrt(rate)` at (mode, port).
    pub fn port_matrix(&self) -> CMatrix<T> {
        let mut b = CMatrix::zeros(self.dim(), self.ports.len());
        for (k, p) in self.ports.iter().enumerate() {
            b[(p.mode, k)] = re(p.rate.sqrt());
        }
        b
    }

    /// Hermitian dissipation left after the ports are paid for:
    /// `i (M − M†)/2 − B B†/2`. Positive semidefinite iff the scattering
    /// matrix is passive at every real probe frequency.
    pub fn residual_dissipation(&self) -> CMatrix<T> {
        let half = re(T::lit(0.5));
        let anti = (&self.m - &self.m.adjoint()).scale(i::<T>() * half);
        let b = self.port_matrix();
        &anti - &(&b * &b.adjoint()).scale(half)
    }

    pub fn is_passive(&self) -> bool {
        let tol = T::lit(1e-12) * self.m.max_abs().max(T::one());
        hermitian_min_eigenvalue(&self.residual_dissipation())
            .map(|v| v >= -tol)
            .unwrap_or(false)
    }
}

/// Effective two-mode matrix with ports of rate `kappa` on both cavities.
pub fn build_effective_matrix<T: Real>(p: &EffectiveParams<T>) -> CoefficientMatrix<T> {
    build_effective_matrix_with(p, PortConvention::TotalLoss)
}

pub fn build_effective_matrix_with<T: Real>(
    p: &EffectiveParams<T>,
    convention: PortConvention,
) -> CoefficientMatrix<T> {
    let diag = Complex::new(p.omega(), -p.kappa());
    let m = CMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 1) => p.coupling_ab(),
        (1, 0) => p.coupling_ba(),
        _ => diag,
    });
    let rate = p.port_rate(convention);
    CoefficientMatrix::new(
        m,
        vec![Port { mode: 0, rate }, Port { mode: 1, rate }],
        vec!["a".into(), "b".into()],
    )
    .expect("validated effective parameters give a valid matrix")
}

/// Full `(a, b, m)` matrix; only the two cavities carry ports.
pub fn build_full_matrix<T: Real>(p: &FullParams<T>, port_rate: T) -> Result<CoefficientMatrix<T>, ModelError> {
    check("port_rate", port_rate, port_rate >= T::zero(), "must be >= 0")?;
    let g = re(p.g());
    let m = CMatrix::from_rows(&[
        vec![Complex::new(p.delta_a(), -p.kappa_1()), g, p.g_a()],
        vec![g, Complex::new(p.delta_b(), -p.kappa_2()), p.g_b()],
        vec![p.g_a().conj(), p.g_b().conj(), Complex::new(p.omega_m(), -p.gamma())],
    ])
    .expect("3x3 rows");
    CoefficientMatrix::new(
        m,
        vec![
            Port {
                mode: 0,
                rate: port_rate,
            },
            Port {
                mode: 1,
                rate: port_rate,
            },
        ],
        vec!["a".into(), "b".into(), "m".into()],
    )
}

/// Circulant ring matrix; `M[i][j]` depends only on `(j − i) mod 3`.
pub fn build_ring_matrix<T: Real>(p: &RingParams<T>) -> CoefficientMatrix<T> {
    let c0 = Complex::new(p.omega(), -p.kappa());
    let (c1, c2) = (p.c1(), p.c2());
    let m = CMatrix::from_fn(3, 3, |r, c| match (c + 3 - r) % 3 {
        0 => c0,
        1 => c1,
        _ => c2,
    });
    let ports = (0..3).map(|mode| Port { mode, rate: p.kappa() }).collect();
    CoefficientMatrix::new(m, ports, vec!["a".into(), "b".into(), "c".into()])
        .expect("validated ring parameters give a valid matrix")
}

/// Eliminate the mechanical mode: `J = |G_a|²/γ`, `θ = arg(G_a* G_b) + π`,
/// `kappa_e = kappa_1 − kappa_i` with `kappa_i = 1`.
///
/// Outside the reversed-dissipation regime the reduction is still returned but
/// a warning is logged.
pub fn reduce_full_to_effective<T: Real>(p: &FullParams<T>) -> Result<EffectiveParams<T>, ModelError> {
    reduce_full_to_effective_with(p, T::one())
}

pub fn reduce_full_to_effective_with<T: Real>(p: &FullParams<T>, kappa_i: T) -> Result<EffectiveParams<T>, ModelError> {
    if !p.is_reversed_dissipation() {
        log::warn!(
            "reducing outside the reversed-dissipation regime (gamma = {}, |G_a| = {}, kappa_1 = {})",
            p.gamma(),
            p.g_a().norm(),
            p.kappa_1()
        );
    }
    if p.kappa_1() != p.kappa_2() || p.delta_a() != p.delta_b() {
        log::warn!("cavities are not identical; using cavity a for the effective loss and frequency");
    }
    let j = p.g_a().norm_sqr() / p.gamma();
    let theta = wrap_two_pi(p.parametric_phase() + T::PI());
    let kappa_e = p.kappa_1() - kappa_i;
    EffectiveParams::new(p.delta_a(), kappa_i, ExternalCoupling::Fixed(kappa_e), p.g(), j, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;
    use num_traits::Zero;
    use std::f64::consts::{FRAC_PI_2, PI};

    type C = Complex<f64>;

    #[test]
    fn effective_matrix_without_dissipative_coupling() {
        let p = EffectiveParams::critical(10.0, 0.0, 0.0).unwrap();
        let m = build_effective_matrix(&p);
        assert_eq!(m.matrix()[(0, 0)], C::new(0.0, -2.0));
        assert_eq!(m.matrix()[(1, 1)], C::new(0.0, -2.0));
        assert_eq!(m.matrix()[(0, 1)], C::new(10.0, 0.0));
        assert_eq!(m.matrix()[(1, 0)], C::new(10.0, 0.0));
        assert!(m.ports().iter().all(|p| p.rate == 2.0));
    }

    #[test]
    fn odd_phase_matching_is_one_way() {
        let p = EffectiveParams::critical(10.0, 10.0, FRAC_PI_2).unwrap();
        let m = build_effective_matrix(&p);
        assert_eq!(m.matrix()[(0, 1)], C::new(20.0, 0.0));
        assert_eq!(m.matrix()[(1, 0)], C::new(0.0, 0.0));
        assert_eq!(m.matrix()[(0, 0)], C::new(0.0, -22.0));
        // defective: rank(M − λI) = 1 at the double eigenvalue
        assert_eq!(rank(&m.matrix().shifted(C::new(0.0, -22.0)), 1e-12), 1);
    }

    #[test]
    fn even_phase_matching_reverses() {
        let p = EffectiveParams::critical(10.0, 10.0, 3.0 * FRAC_PI_2).unwrap();
        let m = build_effective_matrix(&p);
        assert_eq!(m.matrix()[(0, 1)], C::new(0.0, 0.0));
        assert_eq!(m.matrix()[(1, 0)], C::new(20.0, 0.0));
    }

    #[test]
    fn critical_coupling_total_loss() {
        let p = EffectiveParams::critical(10.0, 3.5, 0.2).unwrap();
        assert_eq!(p.kappa(), 2.0 * (3.5 + 1.0));
        assert_eq!(p.kappa_e(), 4.5);
        let q = EffectiveParams::with_total_loss(30.0, 10.0, 3.5, 0.2).unwrap();
        assert_eq!(q.kappa(), 30.0);
        assert!(EffectiveParams::with_total_loss(3.0, 10.0, 3.5, 0.2).is_err());
    }

    #[test]
    fn parameter_invariants_rejected() {
        assert!(EffectiveParams::critical(-1.0, 0.0, 0.0).is_err());
        assert!(EffectiveParams::critical(1.0, -1.0, 0.0).is_err());
        assert!(EffectiveParams::new(0.0, 0.0, ExternalCoupling::Critical, 1.0, 1.0, 0.0).is_err());
        assert!(EffectiveParams::new(0.0, 1.0, ExternalCoupling::Fixed(-0.5), 1.0, 1.0, 0.0).is_err());
        assert!(RingParams::new(0.0, 0.0, 1.0, 1.0, 0.0).is_err());
        let err = FullParams::new(0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, C::new(1.0, 0.0), C::new(1.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn full_matrix_without_optomechanics_decouples() {
        let e = EffectiveParams::critical(10.0, 0.0, 0.0).unwrap();
        let f = FullParams::new(0.0, 0.0, 0.0, 2.0, 2.0, 50.0, 10.0, C::zero(), C::zero()).unwrap();
        let full = build_full_matrix(&f, 2.0).unwrap();
        let eff = build_effective_matrix(&e);
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(full.matrix()[(r, c)], eff.matrix()[(r, c)]);
            }
            assert_eq!(full.matrix()[(r, 2)], C::zero());
            assert_eq!(full.matrix()[(2, r)], C::zero());
        }
        assert_eq!(full.matrix()[(2, 2)], C::new(0.0, -50.0));
        assert_eq!(full.ports().len(), 2);
    }

    #[test]
    fn full_matrix_layout() {
        let f = FullParams::new(0.5, -0.5, 0.25, 3.0, 4.0, 90.0, 2.0, C::new(1.0, 0.0), C::new(0.0, 1.0)).unwrap();
        assert!((f.parametric_phase() - FRAC_PI_2).abs() < 1e-15);
        let m = build_full_matrix(&f, 7.0).unwrap();
        let x = m.matrix();
        assert_eq!(x[(0, 0)], C::new(0.5, -3.0));
        assert_eq!(x[(1, 1)], C::new(-0.5, -4.0));
        assert_eq!(x[(2, 2)], C::new(0.25, -90.0));
        assert_eq!(x[(0, 2)], C::new(1.0, 0.0));
        assert_eq!(x[(1, 2)], C::new(0.0, 1.0));
        assert_eq!(x[(2, 1)], C::new(0.0, -1.0));
        assert_eq!(x[(0, 1)], C::new(2.0, 0.0));
        assert!(m.ports().iter().all(|p| p.rate == 7.0 && p.mode < 2));
    }

    #[test]
    fn ring_matrix_is_circulant_and_one_way_at_matching() {
        let p = RingParams::new(0.0, 5.0, 10.0, 10.0, FRAC_PI_2).unwrap();
        let m = build_ring_matrix(&p);
        let x = m.matrix();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(x[(r, c)], x[(0, (c + 3 - r) % 3)]);
            }
        }
        assert_eq!(x[(0, 1)], C::new(20.0, 0.0));
        assert_eq!(x[(0, 2)], C::new(0.0, 0.0));
        let q = p.with_theta(3.0 * FRAC_PI_2).unwrap();
        let y = build_ring_matrix(&q);
        assert_eq!(y.matrix()[(0, 1)], C::new(0.0, 0.0));
        assert_eq!(y.matrix()[(0, 2)], C::new(20.0, 0.0));
        let sym = build_ring_matrix(&p.with_j(0.0).unwrap());
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(sym.matrix()[(r, c)], C::new(10.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn reduction_examples() {
        let f = FullParams::new(
            0.0,
            0.0,
            0.0,
            2.0,
            2.0,
            500.0,
            10.0,
            C::new(10.0, 0.0),
            C::new(0.0, 10.0),
        )
        .unwrap();
        let e = reduce_full_to_effective(&f).unwrap();
        assert!((e.j() - 0.2).abs() < 1e-15);

        let f = FullParams::new(0.0, 0.0, 0.0, 2.0, 2.0, 90.0, 1.0, C::new(3.0, 0.0), C::new(0.0, 3.0)).unwrap();
        assert!((f.parametric_phase() - FRAC_PI_2).abs() < 1e-15);
        let e = reduce_full_to_effective(&f).unwrap();
        assert!((e.j() - 0.1).abs() < 1e-15);
        // effective phase carries the extra π from eliminating m
        assert!((e.theta() - 3.0 * FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn lift_sets_equal_magnitudes() {
        let e = EffectiveParams::critical(10.0, 10.0, 0.7).unwrap();
        let f: FullParams<f64> = FullParams::lift(&e, 500.0).unwrap();
        assert!((f.g_a().norm() - f.g_b().norm()).abs() < 1e-12);
        assert!((f.g_a().norm_sqr() - 5000.0).abs() < 1e-9);
        assert!((f.parametric_phase() - (0.7 - PI)).abs() < 1e-14);
        assert_eq!(f.kappa_1(), 12.0);
        let r = FullParams::lift_resonant(&e, 500.0).unwrap();
        assert!((r.g_a().norm_sqr() - 10.0 * (500.0 - 22.0)).abs() < 1e-9);
        assert!(FullParams::lift_resonant(&e, 20.0).is_err());
    }

    #[test]
    fn reversed_dissipation_flag() {
        let e = EffectiveParams::critical(10.0, 0.1, 0.0).unwrap();
        assert!(FullParams::lift(&e, 5000.0).unwrap().is_reversed_dissipation());
        assert!(!FullParams::lift(&e, 15.0).unwrap().is_reversed_dissipation());
    }

    #[test]
    fn coefficient_matrix_validation() {
        let bad = CMatrix::from_diagonal(&[C::new(0.0, 1.0)]);
        assert!(CoefficientMatrix::new(bad, vec![], vec!["a".into()]).is_err());
        let ok = CMatrix::from_diagonal(&[C::new(0.0, -1.0)]);
        assert!(CoefficientMatrix::new(ok.clone(), vec![Port { mode: 1, rate: 1.0 }], vec!["a".into()]).is_err());
        assert!(CoefficientMatrix::new(ok.clone(), vec![Port { mode: 0, rate: -1.0 }], vec!["a".into()]).is_err());
        assert!(CoefficientMatrix::new(ok, vec![Port { mode: 0, rate: 1.0 }], vec!["a".into()]).is_ok());
        let big = CMatrix::<f64>::identity(4);
        assert!(CoefficientMatrix::new(big, vec![], vec!["".into(); 4]).is_err());
    }

    #[test]
    fn passivity_of_standard_builds() {
        let e = EffectiveParams::critical(10.0, 10.0, 0.3).unwrap();
        assert!(build_effective_matrix(&e).is_passive());
        let ring = RingParams::new(0.0, 1000.0, 10.0, 10.0, FRAC_PI_2).unwrap();
        assert!(build_ring_matrix(&ring).is_passive());
        // port rate larger than twice the available loss is active
        let f = FullParams::new(0.0, 0.0, 0.0, 1.0, 1.0, 10.0, 1.0, C::zero(), C::zero()).unwrap();
        assert!(!build_full_matrix(&f, 5.0).unwrap().is_passive());
    }

    #[test]
    fn f32_builds() {
        let p = EffectiveParams::<f32>::critical(10.0, 10.0, std::f32::consts::FRAC_PI_2).unwrap();
        let m = build_effective_matrix(&p);
        assert_eq!(m.matrix()[(1, 0)], Complex::new(0.0_f32, 0.0));
    }
}
