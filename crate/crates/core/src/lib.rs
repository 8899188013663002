//! Simulation toolkit for a tunable source of polarization-entangled
//! photon pairs and the experiments built around it: Clauser-Horne
//! inequality evaluation and maximization, detection-loophole mapping,
//! the Casado local-realistic rate bound, PDC detector calibration,
//! two-photon double-slit interference (standard quantum mechanics vs.
//! the de Broglie-Bohm semiplane prediction) and a d=4 time-bin x
//! polarization key-distribution protocol with eavesdropping analysis.
//!
//! The numerical core is generic over the floating-point scalar via
//! [`scalar::Real`]; concrete `f64` aliases live at the crate root.

// `!(x > 0)` deliberately rejects NaN together with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops in the linear-algebra kernels pair several containers.
#![allow(clippy::needless_range_loop)]

pub mod bell;
pub mod calibration;
pub mod casado;
pub mod doubleslit;
pub mod error;
pub mod mc;
pub mod polarization;
pub mod qkd;
pub mod scalar;

pub use error::Error;
pub use scalar::Real;

/// `f64` aliases for the generic core types.
pub type ComplexAmplitude64 = num_complex::Complex<f64>;
pub type BiphotonState64 = polarization::BiphotonState<f64>;
pub type AnalyzerSetting64 = polarization::AnalyzerSetting<f64>;
pub type ArmEfficiency64 = polarization::ArmEfficiency<f64>;
pub type ChConfiguration64 = bell::ChConfiguration<f64>;
pub type ChResult64 = bell::ChResult<f64>;
pub type LoopholeMap64 = bell::LoopholeMap<f64>;
pub type RateModel64 = bell::RateModel<f64>;
pub type CasadoParameters64 = casado::CasadoParameters<f64>;
pub type SlitGeometry64 = doubleslit::SlitGeometry<f64>;
pub type DetectorPlane64 = doubleslit::DetectorPlane<f64>;
pub type JointPattern64 = doubleslit::JointPattern<f64>;
