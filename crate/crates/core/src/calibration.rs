//! Monte Carlo model of absolute detector calibration with PDC
//! coincidences: the estimator `eta1 = Nc / N2` with dark-count and
//! accidental-coincidence corrections.

use crate::error::{Error, Result};
use crate::mc::{binomial_sample, poisson_sample, RngStream, Tally};

/// One calibration run: source brightness, true efficiencies, dark rates,
/// the coincidence window and the acquisition time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationScenario {
    /// Emitted pairs per second.
    pub pair_rate: f64,
    /// True efficiency of the detector under calibration.
    pub eta1: f64,
    /// True efficiency of the trigger detector.
    pub eta2: f64,
    /// Dark counts per second on each detector.
    pub dark1: f64,
    pub dark2: f64,
    /// Coincidence window in seconds; must stay well below 1/pair_rate
    /// for the accidental model to hold.
    pub coincidence_window: f64,
    /// Acquisition time in seconds.
    pub acquisition: f64,
    pub seed: u64,
    /// Detector dead time in seconds; 0 disables the correction. The
    /// reference method mentions electronic corrections without formulas,
    /// so this knob goes beyond it and defaults to off.
    pub dead_time: f64,
}

impl CalibrationScenario {
    pub fn validate(&self) -> Result<()> {
        if self.acquisition <= 0.0 {
            return Err(Error::ZeroAcquisition);
        }
        for (name, v) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0,1], got {v}"
                )));
            }
        }
        for (name, v) in [
            ("pair_rate", self.pair_rate),
            ("dark1", self.dark1),
            ("dark2", self.dark2),
            ("coincidence_window", self.coincidence_window),
            ("dead_time", self.dead_time),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Raw counts observed in one simulated acquisition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawCounts {
    pub n1: u64,
    pub n2: u64,
    pub nc: u64,
    /// Estimated accidental coincidences `N1 * N2 * window / acquisition`.
    pub accidental_estimate: f64,
}

/// Efficiency estimate with its standard error and the raw counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    pub eta1_hat: f64,
    pub stderr: f64,
    pub raw: RawCounts,
}

/// Simulates one calibration acquisition and applies the corrected
/// estimator. Reproducible for a given seed.
pub fn simulate_calibration(s: &CalibrationScenario) -> Result<CalibrationResult> {
    s.validate()?;
    let mut rng = RngStream::new(s.seed, 0);
    let pairs = poisson_sample(&mut rng, s.pair_rate * s.acquisition)?;
    // Joint thinning of the pair stream over the four detect/miss outcomes.
    let both = binomial_sample(&mut rng, pairs, s.eta1 * s.eta2);
    let only1 = binomial_sample(
        &mut rng,
        pairs - both,
        cond_prob(s.eta1 * (1.0 - s.eta2), 1.0 - s.eta1 * s.eta2),
    );
    let rest = pairs - both - only1;
    let only2 = binomial_sample(
        &mut rng,
        rest,
        cond_prob(
            (1.0 - s.eta1) * s.eta2,
            1.0 - s.eta1 * s.eta2 - s.eta1 * (1.0 - s.eta2),
        ),
    );
    let dark1 = poisson_sample(&mut rng, s.dark1 * s.acquisition)?;
    let dark2 = poisson_sample(&mut rng, s.dark2 * s.acquisition)?;
    let n1 = both + only1 + dark1;
    let n2 = both + only2 + dark2;
    // Uncorrelated singles occasionally land inside the window.
    let accidental_mean = n1 as f64 * n2 as f64 * s.coincidence_window / s.acquisition;
    let accidentals = poisson_sample(&mut rng, accidental_mean)?;
    let nc = both + accidentals;

    let accidental_estimate = n1 as f64 * n2 as f64 * s.coincidence_window / s.acquisition;
    // Dark rates are measured independently of the PDC light; subtract
    // their expected contribution from the trigger arm.
    let n2_corrected = n2 as f64 - s.dark2 * s.acquisition;
    let nc_corrected = nc as f64 - accidental_estimate;
    if n2_corrected <= 0.0 {
        return Err(Error::EstimationFailure);
    }
    let dead_time_factor = 1.0 / (1.0 - (n2 as f64 / s.acquisition) * s.dead_time).max(f64::MIN_POSITIVE);
    let eta1_hat = (nc_corrected / n2_corrected * dead_time_factor).max(0.0);

    // Conditional on the trigger counts the true coincidences are
    // binomial; accidental and dark subtractions add their own noise.
    let p = eta1_hat.clamp(0.0, 1.0);
    let var_counts = (nc_corrected.max(0.0) * (1.0 - p)).max(0.0)
        + 2.0 * accidental_estimate
        + p * p * s.dark2 * s.acquisition;
    let stderr = var_counts.sqrt() / n2_corrected;
    Ok(CalibrationResult {
        eta1_hat,
        stderr,
        raw: RawCounts {
            n1,
            n2,
            nc,
            accidental_estimate,
        },
    })
}

fn cond_prob(num: f64, den: f64) -> f64 {
    if den <= 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// One row of a bias scan: scenario cell, seed-averaged bias and spread.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub scenario: CalibrationScenario,
    /// Mean of `eta1_hat - eta1` over the seed batch; NaN when flagged.
    pub bias: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    pub seeds: usize,
    /// True when every seed in the cell failed estimation.
    pub flagged: bool,
}

/// Runs `seeds_per_cell` independent replicas of every scenario and
/// summarizes the estimator bias per cell. Estimation failures are
/// propagated as flagged rows rather than errors.
pub fn estimator_bias_scan(
    scenarios: &[CalibrationScenario],
    seeds_per_cell: usize,
) -> Result<Vec<BiasRow>> {
    if scenarios.is_empty() || seeds_per_cell == 0 {
        return Err(Error::InvalidParameter(
            "bias scan needs at least one scenario and one seed".into(),
        ));
    }
    let mut rows = Vec::with_capacity(scenarios.len());
    for base in scenarios {
        base.validate()?;
        let mut tally = Tally::new();
        for k in 0..seeds_per_cell {
            let cell = CalibrationScenario {
                seed: base
                    .seed
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(k as u64),
                ..*base
            };
            match simulate_calibration(&cell) {
                Ok(res) => tally.add(res.eta1_hat - base.eta1),
                Err(Error::EstimationFailure) => {}
                Err(e) => return Err(e),
            }
        }
        let flagged = tally.count == 0;
        rows.push(BiasRow {
            scenario: *base,
            bias: if flagged { f64::NAN } else { tally.mean() },
            stderr: if flagged { f64::NAN } else { tally.stderr() },
            seeds: tally.count as usize,
            flagged,
        });
    }
    Ok(rows)
}
