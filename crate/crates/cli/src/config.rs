//! Experiment configuration: one TOML document shared by every
//! subcommand. Unknown keys are rejected. Units are fixed: lengths in
//! meters, times in seconds, rates in 1/s, analyzer angles in degrees,
//! interferometer phases in radians.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Master RNG seed; overridable with --seed.
    pub seed: u64,
    pub source: SourceConfig,
    pub analyzers: AnalyzerConfig,
    pub efficiencies: EfficiencyConfig,
    pub casado: CasadoConfig,
    pub calibration: CalibrationConfig,
    pub slit: SlitConfig,
    pub qkd: QkdConfig,
}

/// Entangled-pair source: `(|HH> + f |VV>) / sqrt(1 + f^2)` plus count
/// rates for projections to coincidences per second.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    /// Real entanglement parameter f.
    pub f: f64,
    /// Emitted pairs per second.
    pub pair_rate: f64,
    /// Accidental background per second on every coincidence term.
    pub background_rate: f64,
    /// Acquisition time in seconds.
    pub acquisition: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            f: 1.0,
            pair_rate: 1.0e5,
            background_rate: 0.0,
            acquisition: 1.0,
        }
    }
}

/// The four CH analyzer angles (degrees from the vertical) and each
/// arm's transmittances along/normal to the analyzer axis.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzerConfig {
    /// (theta1, theta2, theta1', theta2') in degrees.
    pub angles: [f64; 4],
    pub eps_par1: f64,
    pub eps_perp1: f64,
    pub eps_par2: f64,
    pub eps_perp2: f64,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            angles: [67.5, 45.0, 22.5, 0.0],
            eps_par1: 1.0,
            eps_perp1: 0.0,
            eps_par2: 1.0,
            eps_perp2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EfficiencyConfig {
    pub eta1: f64,
    pub eta2: f64,
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        Self { eta1: 1.0, eta2: 1.0 }
    }
}

/// Parameters of the local-realistic rate bound (SI units) together
/// with the observations the verdict is judged against.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CasadoConfig {
    pub eta: f64,
    /// Lens focal distance (m).
    pub focal: f64,
    /// Active-region radius of the nonlinear medium (m).
    pub active_radius: f64,
    /// Photon coherence time (s).
    pub coherence_time: f64,
    /// Medium-to-detector distance (m).
    pub distance: f64,
    /// Mean detected wavelength (m).
    pub wavelength: f64,
    /// Detector active depth (m).
    pub active_depth: f64,
    /// Absorption time used when evaluating the rate bound (s).
    pub absorption_time: f64,
    /// Measured singles rate (1/s).
    pub observed_singles_rate: f64,
    /// Measured fringe visibility in [0, 1].
    pub observed_visibility: f64,
    /// Whether a positive CH sum was observed.
    pub observed_ch_positive: bool,
}

impl Default for CasadoConfig {
    fn default() -> Self {
        Self {
            eta: 0.51,
            focal: 0.009,
            active_radius: 0.001,
            coherence_time: 4.2e-13,
            distance: 0.75,
            wavelength: 711e-9,
            active_depth: 3.0e-5,
            absorption_time: 1.0,
            observed_singles_rate: 1.0e5,
            observed_visibility: 0.98,
            observed_ch_positive: true,
        }
    }
}

/// Detector-calibration Monte Carlo scenario.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub pair_rate: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Dark counts per second on each detector.
    pub dark1: f64,
    pub dark2: f64,
    /// Coincidence window (s).
    pub coincidence_window: f64,
    /// Acquisition time (s).
    pub acquisition: f64,
    /// Detector dead time (s); 0 disables the correction.
    pub dead_time: f64,
    /// Number of independent replicas.
    pub seeds: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            pair_rate: 1.0e5,
            eta1: 0.51,
            eta2: 0.30,
            dark1: 50.0,
            dark2: 50.0,
            coincidence_window: 1.0e-8,
            acquisition: 100.0,
            dead_time: 0.0,
            seeds: 100,
        }
    }
}

/// Two-photon double-slit geometry and scan ranges.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlitConfig {
    /// Slit center-to-center separation (m).
    pub separation: f64,
    /// Slit width (m).
    pub width: f64,
    pub wavelength: f64,
    /// Extra phase on slit B relative to slit A (radians).
    pub relative_phase: f64,
    /// Distances of the two detector planes from the slits (m).
    pub plane1_distance: f64,
    pub plane2_distance: f64,
    /// Detector aperture widths (m).
    pub aperture1: f64,
    pub aperture2: f64,
    /// Scan range and resolution shared by both planes (m).
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// Partner-detector position for fixed-x2 cuts (m).
    pub fixed_x2: f64,
    /// Expected peak counts of the synthetic chi-square data.
    pub counts_scale: f64,
    /// Number of synthetic replicas in chi2 mode.
    pub chi2_seeds: u64,
}

impl Default for SlitConfig {
    fn default() -> Self {
        Self {
            separation: 100e-6,
            width: 10e-6,
            wavelength: 702e-9,
            relative_phase: 0.0,
            plane1_distance: 1.21,
            plane2_distance: 1.5,
            aperture1: 0.002,
            aperture2: 0.006,
            x_min: -0.02,
            x_max: 0.02,
            points: 81,
            fixed_x2: -0.01,
            counts_scale: 400.0,
            chi2_seeds: 100,
        }
    }
}

/// d = 4 key-distribution run settings.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QkdConfig {
    pub rounds: u64,
    /// Pump interferometer phase (radians), in [0, 2 pi).
    pub phi: f64,
    /// Polarization entanglement parameter (complex, split in re/im).
    pub f_pol_re: f64,
    pub f_pol_im: f64,
    /// Eavesdropping strategy: "none", "fixed-basis" or "breidbart".
    pub eve: String,
    /// Fraction of rounds Eve intercepts, in [0, 1].
    pub intercept_fraction: f64,
    /// Eve-information level equalized in the ratio subcommand.
    pub target_information: f64,
    /// Rounds per channel in the ratio subcommand.
    pub ratio_rounds: u64,
}

impl Default for QkdConfig {
    fn default() -> Self {
        Self {
            rounds: 100_000,
            phi: 0.0,
            f_pol_re: 1.0,
            f_pol_im: 0.0,
            eve: "none".into(),
            intercept_fraction: 1.0,
            target_information: 0.2,
            ratio_rounds: 200_000,
        }
    }
}
