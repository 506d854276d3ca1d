//! Complex eigenvalues of the effective, full and ring models.
//!
//! Closed forms and the general dense solver are kept side by side so each
//! can serve as the other's oracle. For the ring the as-published closed form
//! is reproduced verbatim next to the circulant (DFT) diagonalization, and
//! [`ring_discrepancy`] quantifies how far apart they are.

mod ep;
mod sheets;

pub use ep::{
    classify_parity, locate_eps, locate_eps_with, locate_ring_coalescences, EpRecord, EpSearch, Parity, SearchBox,
    PHASE_TOLERANCE,
};
pub use sheets::{sweep_riemann, sweep_sheets, track_branches, SheetGrid, SheetPoint};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigenvalues, LinalgError};
use crate::model::{
    build_full_matrix, build_ring_matrix, CoefficientMatrix, EffectiveParams, FullParams, ModelError, RingParams,
};
use crate::scalar::{cis, i, principal_sqrt, re, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which model and method produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource {
    EffectiveClosedForm,
    Numeric,
    RingCirculant,
    /// The published three-cavity closed form, reproduced verbatim.
    RingAsPublished,
}

impl SpectrumSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EffectiveClosedForm => "effective-closed-form",
            Self::Numeric => "numeric",
            Self::RingCirculant => "ring-circulant",
            Self::RingAsPublished => "ring-as-published",
        }
    }
}

/// Complex eigenfrequencies: real part is the supermode frequency, imaginary
/// part is minus the linewidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub branch_ids: Vec<usize>,
    pub source: SpectrumSource,
}

impl<T: Real> Spectrum<T> {
    pub fn new(eigenvalues: Vec<Complex<T>>, source: SpectrumSource) -> Self {
        let branch_ids = (0..eigenvalues.len()).collect();
        Self {
            eigenvalues,
            branch_ids,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues reordered so that index `k` holds branch `k`.
    pub fn by_branch(&self) -> Vec<Complex<T>> {
        let mut out = self.eigenvalues.clone();
        for (value, &id) in self.eigenvalues.iter().zip(&self.branch_ids) {
            out[id] = *value;
        }
        out
    }

    /// Largest pairwise distance between eigenvalues (zero at a full coalescence).
    pub fn spread(&self) -> T {
        let mut best = T::zero();
        for (a, x) in self.eigenvalues.iter().enumerate() {
            for y in &self.eigenvalues[a + 1..] {
                best = best.max((x - y).norm());
            }
        }
        best
    }

    /// Frequencies (real parts) in branch order.
    pub fn frequencies(&self) -> Vec<T> {
        self.by_branch().iter().map(|z| z.re).collect()
    }

    /// Linewidths `-Im λ` in branch order.
    pub fn linewidths(&self) -> Vec<T> {
        self.by_branch().iter().map(|z| -z.im).collect()
    }
}

/// `(iJe^{-iθ} + G)(iJe^{iθ} + G)`, evaluated as the unsimplified product.
pub fn radicand<T: Real>(p: &EffectiveParams<T>) -> Complex<T> {
    p.coupling_ab() * p.coupling_ba()
}

/// `G² − J² + 2iJG cos θ`, the simplified radicand.
pub fn radicand_simplified<T: Real>(p: &EffectiveParams<T>) -> Complex<T> {
    let (g, j) = (p.g(), p.j());
    Complex::new(g * g - j * j, T::lit(2.0) * j * g * p.theta().cos())
}

/// Two-mode eigenvalues `λ± = ω − iκ ± sqrt(radicand)` on the principal branch.
pub fn eig2_closed<T: Real>(p: &EffectiveParams<T>) -> Spectrum<T> {
    let center = Complex::new(p.omega(), -p.kappa());
    let root = principal_sqrt(radicand(p));
    Spectrum::new(vec![center + root, center - root], SpectrumSource::EffectiveClosedForm)
}

/// `|λ₊ − λ₋|` of the two-mode model.
pub fn eigengap<T: Real>(p: &EffectiveParams<T>) -> T {
    T::lit(2.0) * principal_sqrt(radicand(p)).norm()
}

/// All eigenvalues of a coefficient matrix from the dense solver, sorted from
/// least to most damped (ties by frequency).
pub fn eig_numeric<T: Real>(m: &CoefficientMatrix<T>) -> Result<Spectrum<T>, SpectraError> {
    let mut ev = eigenvalues(m.matrix())?;
    ev.sort_by(|a, b| {
        b.im.partial_cmp(&a.im)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(Spectrum::new(ev, SpectrumSource::Numeric))
}

/// Eigenvalues of the circulant ring matrix by DFT:
/// `λ_k = (ω − iκ) + c₁ w^k + c₂ w^{2k}` with `w = e^{2πi/3}`.
pub fn ring_eig_circulant<T: Real>(p: &RingParams<T>) -> Spectrum<T> {
    let c0 = Complex::new(p.omega(), -p.kappa());
    let (c1, c2) = (p.c1(), p.c2());
    let half = T::lit(0.5);
    let h = T::lit(3.0).sqrt() * half;
    let roots = [
        Complex::new(T::one(), T::zero()),
        Complex::new(-half, h),
        Complex::new(-half, -h),
    ];
    let ev = (0..3).map(|k| c0 + c1 * roots[k] + c2 * roots[(2 * k) % 3]).collect();
    Spectrum::new(ev, SpectrumSource::RingCirculant)
}

/// The published three-cavity closed forms, with the scalar loss read as `κ`:
/// `λ′₁ = ω − iκ`, `λ′± = ω − iκ ± sqrt((G² − J²) + iJG(e^{iθ} + e^{-iθ}))`.
pub fn ring_eig_paper<T: Real>(p: &RingParams<T>) -> Spectrum<T> {
    let center = Complex::new(p.omega(), -p.kappa());
    let (g, j) = (p.g(), p.j());
    let rad = re(g * g - j * j) + i::<T>() * (j * g) * (cis(p.theta()) + cis(-p.theta()));
    let root = principal_sqrt(rad);
    Spectrum::new(
        vec![center, center + root, center - root],
        SpectrumSource::RingAsPublished,
    )
}

/// Permutation `perm` minimizing `Σ |a[k] − b[perm[k]]|`, brute force (len ≤ 6).
pub fn optimal_assignment<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<usize> {
    assert_eq!(a.len(), b.len(), "assignment needs equal lengths");
    assert!(a.len() <= 6, "brute-force assignment is limited to 6 branches");
    let mut best: Option<(T, Vec<usize>)> = None;
    for perm in permutations(a.len()) {
        let cost = perm
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, &p)| acc + (a[k] - b[p]).norm());
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

/// Max over matched pairs after optimal assignment (a set distance).
pub fn set_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    let perm = optimal_assignment(a, b);
    perm.iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, &p)| acc.max((a[k] - b[p]).norm()))
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

/// Side-by-side comparison of the ring eigenvalue routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingDiscrepancy<T> {
    pub as_published: Spectrum<T>,
    pub circulant: Spectrum<T>,
    pub numeric: Spectrum<T>,
    /// `|λ_published − λ_circulant|` per published branch after optimal matching.
    pub per_branch: Vec<T>,
    /// Circulant branch matched to each published branch.
    pub matching: Vec<usize>,
    /// `‖M M† − M† M‖_F` of the ring matrix.
    pub normality_defect: T,
    /// `max |det(M − λ′ I)|` over the published eigenvalues.
    pub published_residual: T,
    /// `max |det(M − λ I)|` over the circulant eigenvalues.
    pub circulant_residual: T,
}

pub fn ring_discrepancy<T: Real>(p: &RingParams<T>) -> Result<RingDiscrepancy<T>, SpectraError> {
    let m = build_ring_matrix(p);
    let as_published = ring_eig_paper(p);
    let circulant = ring_eig_circulant(p);
    let numeric = eig_numeric(&m)?;
    let matching = optimal_assignment(&as_published.eigenvalues, &circulant.eigenvalues);
    let per_branch = matching
        .iter()
        .enumerate()
        .map(|(k, &c)| (as_published.eigenvalues[k] - circulant.eigenvalues[c]).norm())
        .collect();
    let residual = |values: &[Complex<T>]| {
        values
            .iter()
            .map(|&l| crate::linalg::determinant(&m.matrix().shifted(l)).norm())
            .fold(T::zero(), T::max)
    };
    Ok(RingDiscrepancy {
        normality_defect: m.matrix().normality_defect(),
        published_residual: residual(&as_published.eigenvalues),
        circulant_residual: residual(&circulant.eigenvalues),
        as_published,
        circulant,
        numeric,
        per_branch,
        matching,
    })
}

/// The two cavity-like eigenvalues of the full model: the least damped pair.
pub fn cavity_branches<T: Real>(full: &FullParams<T>, port_rate: T) -> Result<Vec<Complex<T>>, SpectraError> {
    let spec = eig_numeric(&build_full_matrix(full, port_rate)?)?;
    Ok(spec.eigenvalues.into_iter().take(2).collect())
}

/// Set distance between the full model's cavity-like eigenvalues and the
/// two-mode closed form of `e`.
pub fn adiabatic_error<T: Real>(e: &EffectiveParams<T>, full: &FullParams<T>) -> Result<T, SpectraError> {
    let cav = cavity_branches(full, e.kappa())?;
    Ok(set_distance(&cav, &eig2_closed(e).eigenvalues))
}
