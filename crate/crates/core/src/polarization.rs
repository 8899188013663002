//! Two-photon polarization state and projective measurement through
//! (possibly imperfect) polarization analyzers.
//!
//! Angle convention: analyzer angles are measured in degrees from the
//! vertical axis, so an H-polarized photon transmits through an ideal
//! analyzer at angle theta with probability sin^2(theta). This is fixed
//! globally across the crate.

use crate::error::{Error, Result};
use crate::scalar::{r, Real};
use num_complex::Complex;

/// Default number of scan points per 180 degrees for fringe-visibility
/// sweeps; keeps the discretization error of the extrema below 1e-4.
pub const DEFAULT_SWEEP_RESOLUTION: usize = 720;

/// Polarization-entangled pair `(|HH> + f |VV>) / sqrt(1 + |f|^2)`.
///
/// `f = 1` is the maximally entangled state, `f = 0` the product state
/// `|HH>`. The phase of `f` is representable but only `f + f*` enters
/// coincidence probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphotonState<R: Real> {
    f: Complex<R>,
}

impl<R: Real> BiphotonState<R> {
    pub fn new(f: Complex<R>) -> Result<Self> {
        if !f.re.is_finite() || !f.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "entanglement parameter must be finite, got {f}"
            )));
        }
        Ok(Self { f })
    }

    pub fn real(f: R) -> Result<Self> {
        Self::new(Complex::new(f, R::zero()))
    }

    pub fn f(&self) -> Complex<R> {
        self.f
    }

    /// Normalization factor `1 / (1 + |f|^2)`.
    pub fn norm_factor(&self) -> R {
        R::one() / (R::one() + self.f.norm_sqr())
    }
}

/// One polarization analyzer: angle from the vertical axis plus the
/// transmittances along and normal to its axis. `present = false`
/// models the "no polarizer" setting (unit transmittance on both axes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting<R: Real> {
    theta_deg: R,
    eps_par: R,
    eps_perp: R,
    present: bool,
}

impl<R: Real> AnalyzerSetting<R> {
    pub fn new(theta_deg: R, eps_par: R, eps_perp: R) -> Result<Self> {
        if !(eps_perp >= R::zero() && eps_perp <= eps_par && eps_par <= R::one()) {
            return Err(Error::TransmittanceOutOfRange {
                eps_par: eps_par.to_f64().unwrap_or(f64::NAN),
                eps_perp: eps_perp.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !theta_deg.is_finite() {
            return Err(Error::InvalidParameter("non-finite analyzer angle".into()));
        }
        Ok(Self {
            theta_deg: reduce_mod_180(theta_deg),
            eps_par,
            eps_perp,
            present: true,
        })
    }

    pub fn ideal(theta_deg: R) -> Self {
        Self::new(theta_deg, R::one(), R::zero()).expect("ideal transmittances are valid")
    }

    /// The removed-polarizer setting of the Clauser-Horne sum.
    pub fn absent() -> Self {
        Self {
            theta_deg: R::zero(),
            eps_par: R::one(),
            eps_perp: R::one(),
            present: false,
        }
    }

    pub fn with_theta(&self, theta_deg: R) -> Self {
        Self {
            theta_deg: reduce_mod_180(theta_deg),
            ..*self
        }
    }

    pub fn theta_deg(&self) -> R {
        self.theta_deg
    }
    pub fn eps_par(&self) -> R {
        self.eps_par
    }
    pub fn eps_perp(&self) -> R {
        self.eps_perp
    }
    pub fn is_present(&self) -> bool {
        self.present
    }

    /// Analyzer transmitting the orthogonal outcome (axis rotated 90 deg,
    /// ideal case): used to enumerate pass/block outcome combinations.
    pub fn blocked_complement(&self) -> Self {
        Self {
            theta_deg: self.theta_deg,
            eps_par: R::one() - self.eps_par.min(R::one()),
            eps_perp: R::one() - self.eps_perp,
            present: true,
        }
    }
}

fn reduce_mod_180<R: Real>(theta: R) -> R {
    let period = r::<R>(180.0);
    let mut t = theta % period;
    if t < R::zero() {
        t += period;
    }
    t
}

/// sin/cos of the analyzer angle measured from the vertical.
fn trig<R: Real>(a: &AnalyzerSetting<R>) -> (R, R) {
    let rad = a.theta_deg.to_radians();
    (rad.sin(), rad.cos())
}

/// Coincidence probability per emitted pair behind two analyzers.
///
/// The detection operator on each arm is
/// `eps_par |theta><theta| + eps_perp |theta_perp><theta_perp|`
/// with `|theta> = sin(theta)|H> + cos(theta)|V>`; in the ideal limit
/// this reduces to `|sin t1 sin t2 + f cos t1 cos t2|^2 / (1 + |f|^2)`.
pub fn coincidence_prob<R: Real>(
    state: &BiphotonState<R>,
    a1: &AnalyzerSetting<R>,
    a2: &AnalyzerSetting<R>,
) -> Result<R> {
    if !a1.present || !a2.present {
        return Err(Error::AnalyzerAbsent);
    }
    Ok(coincidence_prob_raw(state, a1, a2))
}

/// Same as [`coincidence_prob`] but an absent analyzer is treated as unit
/// transmittance on both axes (the "infinity" setting of the CH sum).
pub fn coincidence_prob_raw<R: Real>(
    state: &BiphotonState<R>,
    a1: &AnalyzerSetting<R>,
    a2: &AnalyzerSetting<R>,
) -> R {
    let f = state.f();
    let (s1, c1) = trig(a1);
    let (s2, c2) = trig(a2);
    // Projection amplitudes (times sqrt(1+|f|^2)) onto the four
    // axis/normal outcome combinations of the two analyzers.
    let amp_pp = Complex::new(s1 * s2, R::zero()) + f * (c1 * c2);
    let amp_px = Complex::new(s1 * c2, R::zero()) - f * (c1 * s2);
    let amp_xp = Complex::new(c1 * s2, R::zero()) - f * (s1 * c2);
    let amp_xx = Complex::new(c1 * c2, R::zero()) + f * (s1 * s2);
    let p = a1.eps_par * a2.eps_par * amp_pp.norm_sqr()
        + a1.eps_par * a2.eps_perp * amp_px.norm_sqr()
        + a1.eps_perp * a2.eps_par * amp_xp.norm_sqr()
        + a1.eps_perp * a2.eps_perp * amp_xx.norm_sqr();
    p * state.norm_factor()
}

/// Which arm of the pair an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    One,
    Two,
}

/// Singles probability per emitted pair: analyzer on one arm only, the
/// other photon unconditionally accepted.
pub fn single_prob<R: Real>(
    state: &BiphotonState<R>,
    analyzer: &AnalyzerSetting<R>,
    arm: Arm,
) -> Result<R> {
    if !analyzer.present {
        return Err(Error::AnalyzerAbsent);
    }
    let open = AnalyzerSetting::absent();
    Ok(match arm {
        Arm::One => coincidence_prob_raw(state, analyzer, &open),
        Arm::Two => coincidence_prob_raw(state, &open, analyzer),
    })
}

/// Fringe visibility `(N_max - N_min) / (N_max + N_min)` over a scan of
/// the movable analyzer with the fixed one held at its setting.
///
/// The movable analyzer's transmittances are taken from `movable`; its
/// angle is swept over 180 degrees in `sweep_resolution` steps.
pub fn fringe_visibility<R: Real>(
    state: &BiphotonState<R>,
    fixed: &AnalyzerSetting<R>,
    movable: &AnalyzerSetting<R>,
    sweep_resolution: usize,
) -> Result<R> {
    if sweep_resolution < 4 {
        return Err(Error::InvalidParameter(
            "sweep resolution must be at least 4".into(),
        ));
    }
    let mut lo = R::infinity();
    let mut hi = R::neg_infinity();
    for k in 0..sweep_resolution {
        let theta = r::<R>(180.0 * k as f64 / sweep_resolution as f64);
        let p = coincidence_prob(state, fixed, &movable.with_theta(theta))?;
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let denom = hi + lo;
    if denom <= R::zero() {
        return Err(Error::UndefinedVisibility);
    }
    Ok((hi - lo) / denom)
}

/// Per-arm detection efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmEfficiency<R: Real> {
    eta: R,
}

impl<R: Real> ArmEfficiency<R> {
    pub fn new(eta: R) -> Result<Self> {
        if !(eta >= R::zero() && eta <= R::one()) {
            return Err(Error::InvalidParameter(format!(
                "efficiency must lie in [0,1], got {eta}"
            )));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> R {
        self.eta
    }
}
