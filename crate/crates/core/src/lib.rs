//! Reversed-dissipation cavity optomechanics: eigenvalue topology,
//! exceptional points and nonreciprocal scattering.
//!
//! The physics is generic over the scalar type through [`Real`] (implemented
//! for `f32` and `f64`). Sweeps and datasets are `f64` only.
//!
//! ```
//! use revdiss::{eig2_closed, s41_closed, EffectiveParamsF64};
//! use std::f64::consts::FRAC_PI_2;
//!
//! // balanced couplings at an odd phase-matching point
//! let p = EffectiveParamsF64::critical(10.0, 10.0, FRAC_PI_2).unwrap();
//! let s = eig2_closed(&p);
//! assert_eq!(s.eigenvalues[0], s.eigenvalues[1]);
//! assert_eq!(s41_closed(&p, 3.0).norm(), 0.0);
//! ```

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod linalg;
pub mod model;
pub mod scalar;
pub mod scattering;
pub mod spectra;
pub mod sweeps;

pub use linalg::{CMatrix, LinalgError};
pub use model::{
    build_effective_matrix, build_effective_matrix_with, build_full_matrix, build_ring_matrix,
    reduce_full_to_effective, CoefficientMatrix, EffectiveParams, ExternalCoupling, FullParams, ModelError, Port,
    PortConvention, RingParams,
};
pub use scalar::Real;
pub use scattering::{
    chirality, fwhm, nonreciprocity_curve, ring_s_closed, s14_closed, s21_closed, s23_closed, s41_closed, s_general,
    ChiralitySample, FourPort, ProbeGrid, SMatrix, ScatteringError, ThreeCavityAux, TransmissionCurve,
};
pub use spectra::{
    classify_parity, eig2_closed, eig_numeric, locate_eps, ring_eig_circulant, ring_eig_paper, sweep_riemann, EpRecord,
    Parity, SearchBox, SheetGrid, SpectraError, Spectrum, SpectrumSource,
};
pub use sweeps::{figure_dataset, run_sweep, Dataset, FigureId, SweepError, SweepSpec};

pub use num_complex::Complex;

pub type EffectiveParamsF64 = EffectiveParams<f64>;
pub type EffectiveParamsF32 = EffectiveParams<f32>;
pub type FullParamsF64 = FullParams<f64>;
pub type FullParamsF32 = FullParams<f32>;
pub type RingParamsF64 = RingParams<f64>;
pub type RingParamsF32 = RingParams<f32>;
pub type CoefficientMatrixF64 = CoefficientMatrix<f64>;
pub type CoefficientMatrixF32 = CoefficientMatrix<f32>;
pub type SpectrumF64 = Spectrum<f64>;
pub type SpectrumF32 = Spectrum<f32>;
pub type SMatrixF64 = SMatrix<f64>;
pub type SMatrixF32 = SMatrix<f32>;
pub type TransmissionCurveF64 = TransmissionCurve<f64>;
pub type EpRecordF64 = EpRecord<f64>;
pub type SheetGridF64 = SheetGrid<f64>;
pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;
