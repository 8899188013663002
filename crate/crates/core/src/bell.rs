//! Clauser-Horne sum evaluation (experimental-substituted and strict
//! forms), derivative-free maximization over the four analyzer angles,
//! and detection-loophole mapping in the (efficiency, entanglement) plane.

use crate::error::{Error, Result};
use crate::polarization::{
    coincidence_prob_raw, single_prob, AnalyzerSetting, Arm, BiphotonState,
};
use crate::scalar::{r, Real};

/// Which form of the CH sum the singles terms use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChForm {
    /// Singles replaced by coincidences with the other polarizer removed,
    /// every term scaled by eta1*eta2. The sign is then independent of
    /// the detection efficiencies.
    Substituted,
    /// True singles scaled by the single arm's efficiency only.
    Strict,
}

/// The four analyzer angles plus per-arm analyzer imperfections and
/// detection efficiencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChConfiguration<R: Real> {
    /// (theta1, theta2, theta1', theta2') in degrees.
    pub angles: [R; 4],
    /// (eps_par, eps_perp) of the arm-1 analyzer.
    pub analyzer1: (R, R),
    /// (eps_par, eps_perp) of the arm-2 analyzer.
    pub analyzer2: (R, R),
    pub eta1: R,
    pub eta2: R,
}

impl<R: Real> ChConfiguration<R> {
    pub fn new(angles: [R; 4], analyzer1: (R, R), analyzer2: (R, R), eta1: R, eta2: R) -> Result<Self> {
        // Constructing the analyzers validates the transmittances.
        AnalyzerSetting::new(R::zero(), analyzer1.0, analyzer1.1)?;
        AnalyzerSetting::new(R::zero(), analyzer2.0, analyzer2.1)?;
        for eta in [eta1, eta2] {
            if !(eta >= R::zero() && eta <= R::one()) {
                return Err(Error::InvalidParameter(format!(
                    "efficiency must lie in [0,1], got {eta}"
                )));
            }
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("non-finite angle".into()));
        }
        Ok(Self {
            angles,
            analyzer1,
            analyzer2,
            eta1,
            eta2,
        })
    }

    pub fn ideal(angles: [R; 4], eta1: R, eta2: R) -> Result<Self> {
        Self::new(angles, (R::one(), R::zero()), (R::one(), R::zero()), eta1, eta2)
    }

    fn analyzer1_at(&self, theta: R) -> AnalyzerSetting<R> {
        AnalyzerSetting::new(theta, self.analyzer1.0, self.analyzer1.1).expect("validated")
    }

    fn analyzer2_at(&self, theta: R) -> AnalyzerSetting<R> {
        AnalyzerSetting::new(theta, self.analyzer2.0, self.analyzer2.1).expect("validated")
    }
}

/// A CH sum value together with its six signed addends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChResult<R: Real> {
    /// Normalized CH per emitted pair.
    pub value: R,
    /// The six signed addends, in the order
    /// +N(t1,t2), -N(t1,t2'), +N(t1',t2), +N(t1',t2'), -singles(t1'), -singles(t2).
    pub terms: [R; 6],
    pub form: ChForm,
}

fn ch_eval<R: Real>(state: &BiphotonState<R>, cfg: &ChConfiguration<R>, form: ChForm) -> Result<ChResult<R>> {
    let [t1, t2, t1p, t2p] = cfg.angles;
    let a1 = cfg.analyzer1_at(t1);
    let a1p = cfg.analyzer1_at(t1p);
    let a2 = cfg.analyzer2_at(t2);
    let a2p = cfg.analyzer2_at(t2p);
    let open = AnalyzerSetting::absent();
    let cc = cfg.eta1 * cfg.eta2;
    let coin = |x: &AnalyzerSetting<R>, y: &AnalyzerSetting<R>| cc * coincidence_prob_raw(state, x, y);
    let (s1, s2) = match form {
        ChForm::Substituted => (
            cc * coincidence_prob_raw(state, &a1p, &open),
            cc * coincidence_prob_raw(state, &open, &a2),
        ),
        ChForm::Strict => (
            cfg.eta1 * single_prob(state, &a1p, Arm::One)?,
            cfg.eta2 * single_prob(state, &a2, Arm::Two)?,
        ),
    };
    let terms = [
        coin(&a1, &a2),
        -coin(&a1, &a2p),
        coin(&a1p, &a2),
        coin(&a1p, &a2p),
        -s1,
        -s2,
    ];
    Ok(ChResult {
        value: terms.iter().copied().fold(R::zero(), |a, b| a + b),
        terms,
        form,
    })
}

/// CH sum with the experimental substitution: singles replaced by
/// coincidences with the opposite polarizer removed.
pub fn ch_substituted<R: Real>(state: &BiphotonState<R>, cfg: &ChConfiguration<R>) -> Result<ChResult<R>> {
    ch_eval(state, cfg, ChForm::Substituted)
}

/// Original CH sum with true singles probabilities.
pub fn ch_strict<R: Real>(state: &BiphotonState<R>, cfg: &ChConfiguration<R>) -> Result<ChResult<R>> {
    ch_eval(state, cfg, ChForm::Strict)
}

/// Knobs of the grid-plus-golden-section maximizer.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerSettings {
    /// Step of the exhaustive coarse grid, in degrees.
    pub coarse_step_deg: f64,
    /// Maximum coordinate-descent sweeps during refinement.
    pub max_sweeps: usize,
    /// Stop refining once a full sweep improves the value by less than this.
    pub value_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            coarse_step_deg: 1.0,
            max_sweeps: 60,
            value_tol: 1e-12,
        }
    }
}

/// Maximizes the CH sum over the four analyzer angles.
///
/// Exhaustive coarse grid over the angle torus (the two theta2-type
/// coordinates maximize independently for fixed theta1-type coordinates,
/// which keeps the scan cheap) followed by coordinate-wise golden-section
/// refinement. Deterministic; never returns less than the best coarse
/// grid point. Angles are reported canonically: the maximum lies on a
/// degenerate one-parameter manifold (an exact global rotation for
/// |f| = 1, and an empirically flat direction otherwise), so the
/// representative with theta2' = 0 is selected whenever a constrained
/// re-maximization reproduces the unconstrained value; angles are then
/// reduced mod 180 degrees and the overall-reflection symmetry resolved
/// toward the smaller angle sum.
pub fn ch_optimize<R: Real>(
    state: &BiphotonState<R>,
    efficiencies: (R, R),
    analyzer1: (R, R),
    analyzer2: (R, R),
    form: ChForm,
) -> Result<(ChConfiguration<R>, ChResult<R>)> {
    ch_optimize_with(state, efficiencies, analyzer1, analyzer2, form, &OptimizerSettings::default())
}

pub fn ch_optimize_with<R: Real>(
    state: &BiphotonState<R>,
    efficiencies: (R, R),
    analyzer1: (R, R),
    analyzer2: (R, R),
    form: ChForm,
    settings: &OptimizerSettings,
) -> Result<(ChConfiguration<R>, ChResult<R>)> {
    let (eta1, eta2) = efficiencies;
    let mk_cfg = |angles: [R; 4]| ChConfiguration::new(angles, analyzer1, analyzer2, eta1, eta2);
    // Validate inputs once up front.
    let probe = mk_cfg([R::zero(); 4])?;

    let n = (180.0 / settings.coarse_step_deg).round() as usize;
    if n < 4 {
        return Err(Error::InvalidParameter("coarse grid step too large".into()));
    }
    let step = r::<R>(180.0 / n as f64);
    let angles_deg: Vec<R> = (0..n).map(|i| step * r::<R>(i as f64)).collect();

    // Precompute per-pair coincidence and per-angle singles tables.
    let a1s: Vec<AnalyzerSetting<R>> = angles_deg.iter().map(|&t| probe.analyzer1_at(t)).collect();
    let a2s: Vec<AnalyzerSetting<R>> = angles_deg.iter().map(|&t| probe.analyzer2_at(t)).collect();
    let open = AnalyzerSetting::absent();
    let cc = eta1 * eta2;
    let mut pair = vec![R::zero(); n * n];
    for (i, a1) in a1s.iter().enumerate() {
        for (j, a2) in a2s.iter().enumerate() {
            pair[i * n + j] = cc * coincidence_prob_raw(state, a1, a2);
        }
    }
    let sub1: Vec<R> = match form {
        ChForm::Substituted => a1s
            .iter()
            .map(|a| cc * coincidence_prob_raw(state, a, &open))
            .collect(),
        ChForm::Strict => a1s
            .iter()
            .map(|a| eta1 * coincidence_prob_raw(state, a, &open))
            .collect(),
    };
    let sub2: Vec<R> = match form {
        ChForm::Substituted => a2s
            .iter()
            .map(|a| cc * coincidence_prob_raw(state, &open, a))
            .collect(),
        ChForm::Strict => a2s
            .iter()
            .map(|a| eta2 * coincidence_prob_raw(state, &open, a))
            .collect(),
    };

    // Coarse scan: for fixed (theta1, theta1'), the contributions of
    // theta2 and theta2' decouple and maximize independently.
    let mut best_val = R::neg_infinity();
    let mut best_idx = [0usize; 4];
    for i1 in 0..n {
        for i1p in 0..n {
            let mut best_a = R::neg_infinity();
            let mut best_j2 = 0;
            let mut best_b = R::neg_infinity();
            let mut best_j2p = 0;
            for j in 0..n {
                let a = pair[i1 * n + j] + pair[i1p * n + j] - sub2[j];
                if a > best_a {
                    best_a = a;
                    best_j2 = j;
                }
                let b = pair[i1p * n + j] - pair[i1 * n + j];
                if b > best_b {
                    best_b = b;
                    best_j2p = j;
                }
            }
            let v = best_a + best_b - sub1[i1p];
            if v > best_val {
                best_val = v;
                best_idx = [i1, best_j2, i1p, best_j2p];
            }
        }
    }

    let mut angles = [
        angles_deg[best_idx[0]],
        angles_deg[best_idx[1]],
        angles_deg[best_idx[2]],
        angles_deg[best_idx[3]],
    ];
    let eval = |angles: [R; 4]| -> R {
        let cfg = mk_cfg(angles).expect("angles stay finite");
        ch_eval(state, &cfg, form).expect("evaluation cannot fail").value
    };
    let coarse_best = eval(angles);
    let mut current = coarse_best;

    // Coordinate-wise golden-section refinement around the grid optimum.
    let mut window = step;
    let tol = r::<R>(settings.value_tol);
    for _ in 0..settings.max_sweeps {
        let before = current;
        for k in 0..4 {
            let (x, v) = golden_section_max(
                |t| {
                    let mut a = angles;
                    a[k] = t;
                    eval(a)
                },
                angles[k] - window,
                angles[k] + window,
            );
            if v > current {
                current = v;
                angles[k] = x;
            }
        }
        window = (window * r::<R>(0.5)).max(r::<R>(1e-5));
        if current - before < tol {
            break;
        }
    }
    if current < coarse_best {
        return Err(Error::NonConvergence(
            "refinement fell below the coarse-grid optimum".into(),
        ));
    }

    // Canonical representative with theta2' pinned to 0: coarse scan over
    // (theta1, theta1') with theta2 maximized independently, then the
    // same golden-section refinement over the three free angles.
    let mut c_best = R::neg_infinity();
    let mut c_idx = [0usize; 3];
    for i1 in 0..n {
        for i1p in 0..n {
            let fixed = pair[i1p * n] - pair[i1 * n];
            let mut best_a = R::neg_infinity();
            let mut best_j2 = 0;
            for j in 0..n {
                let a = pair[i1 * n + j] + pair[i1p * n + j] - sub2[j];
                if a > best_a {
                    best_a = a;
                    best_j2 = j;
                }
            }
            let v = best_a + fixed - sub1[i1p];
            if v > c_best {
                c_best = v;
                c_idx = [i1, best_j2, i1p];
            }
        }
    }
    let mut pinned = [
        angles_deg[c_idx[0]],
        angles_deg[c_idx[1]],
        angles_deg[c_idx[2]],
        R::zero(),
    ];
    let mut pinned_val = eval(pinned);
    let mut window = step;
    for _ in 0..settings.max_sweeps {
        let before = pinned_val;
        for k in 0..3 {
            let (x, v) = golden_section_max(
                |t| {
                    let mut a = pinned;
                    a[k] = t;
                    eval(a)
                },
                pinned[k] - window,
                pinned[k] + window,
            );
            if v > pinned_val {
                pinned_val = v;
                pinned[k] = x;
            }
        }
        // Shrink gently: coordinate descent zigzags along the correlated
        // directions of this objective and stalls if starved of window.
        window = (window * r::<R>(0.7)).max(r::<R>(1e-5));
        if pinned_val - before < tol {
            break;
        }
    }
    if pinned_val >= current - r::<R>(1e-8) {
        angles = pinned;
    }

    let canonical = canonicalize_angles(angles, eval);
    let cfg = mk_cfg(canonical)?;
    let result = ch_eval(state, &cfg, form)?;
    Ok((cfg, result))
}

/// Golden-section maximization on [a, b]; the objective is assumed
/// unimodal on the bracket. Returns (argmax, max).
fn golden_section_max<R: Real>(f: impl Fn(R) -> R, mut a: R, mut b: R) -> (R, R) {
    let inv_phi = r::<R>(0.618_033_988_749_894_9);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if (b - a).abs() < r::<R>(1e-9) {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn reduce_deg<R: Real>(t: R) -> R {
    let period = r::<R>(180.0);
    let mut x = t % period;
    if x < R::zero() {
        x += period;
    }
    // Snap the wrap-around boundary onto zero.
    if (period - x).abs() < r::<R>(1e-6) {
        x = R::zero();
    }
    x
}

/// Reduces an optimizer output to the documented canonical representative
/// of its symmetry orbit: angles mod 180 degrees, then the
/// overall-reflection image (theta -> 180 - theta, always an exact
/// symmetry of the objective) if it has the smaller angle sum.
fn canonicalize_angles<R: Real>(mut angles: [R; 4], eval: impl Fn([R; 4]) -> R) -> [R; 4] {
    let value = eval(angles);
    for a in angles.iter_mut() {
        *a = reduce_deg(*a);
    }
    let reflected = {
        let mut m = angles;
        for a in m.iter_mut() {
            *a = reduce_deg(r::<R>(180.0) - *a);
        }
        m
    };
    let sum = |a: [R; 4]| a.iter().copied().fold(R::zero(), |x, y| x + y);
    if (eval(reflected) - value).abs() < r::<R>(1e-9) && sum(reflected) < sum(angles) {
        reflected
    } else {
        angles
    }
}

/// Maximized strict CH/N over a grid in the (f, eta) plane, with the
/// paper-figure contour levels. Ideal polarizers.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopholeMap<R: Real> {
    pub f_axis: Vec<R>,
    pub eta_axis: Vec<R>,
    /// `ch_over_n[i][j]` is the maximized strict CH per emitted pair at
    /// `f_axis[i]`, `eta_axis[j]`.
    pub ch_over_n: Vec<Vec<R>>,
    pub contour_levels: Vec<R>,
}

impl<R: Real> LoopholeMap<R> {
    /// For each f row, the smallest grid efficiency with CH > 0 (the zero
    /// contour), if any.
    pub fn zero_contour(&self) -> Vec<Option<R>> {
        self.ch_over_n
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.eta_axis)
                    .find(|(v, _)| **v > R::zero())
                    .map(|(_, eta)| *eta)
            })
            .collect()
    }
}

/// Contour levels of the reference loophole figure.
pub fn default_contour_levels<R: Real>() -> Vec<R> {
    vec![R::zero(), r(0.01), r(0.1), r(0.15), r(0.2)]
}

fn check_grid<R: Real>(grid: &[R]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadGrid);
    }
    Ok(())
}

/// Optimizer settings used for map cells and efficiency-threshold
/// bisection, where many maximizations run in sequence.
fn fast_settings() -> OptimizerSettings {
    OptimizerSettings {
        coarse_step_deg: 3.0,
        max_sweeps: 40,
        value_tol: 1e-13,
    }
}

fn max_strict_ch<R: Real>(f: R, eta: R, settings: &OptimizerSettings) -> Result<R> {
    let state = BiphotonState::real(f)?;
    let ideal = (R::one(), R::zero());
    let (_, result) = ch_optimize_with(&state, (eta, eta), ideal, ideal, ChForm::Strict, settings)?;
    Ok(result.value)
}

/// Builds the detection-loophole map: maximized strict CH/N with ideal
/// polarizers over the given grids.
pub fn loophole_map<R: Real>(f_grid: &[R], eta_grid: &[R]) -> Result<LoopholeMap<R>> {
    check_grid(f_grid)?;
    check_grid(eta_grid)?;
    let settings = fast_settings();
    let mut rows = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        let mut row = Vec::with_capacity(eta_grid.len());
        for &eta in eta_grid {
            row.push(max_strict_ch(f, eta, &settings)?);
        }
        rows.push(row);
    }
    Ok(LoopholeMap {
        f_axis: f_grid.to_vec(),
        eta_axis: eta_grid.to_vec(),
        ch_over_n: rows,
        contour_levels: default_contour_levels(),
    })
}

/// Detection efficiency at which the maximized strict CH crosses zero
/// for the state with real entanglement parameter `f`, bisected to 1e-4.
pub fn critical_efficiency<R: Real>(f: R) -> Result<R> {
    if !(f > R::zero() && f <= R::one()) {
        return Err(Error::InvalidParameter(format!(
            "entanglement parameter must lie in (0, 1], got {f}"
        )));
    }
    let settings = OptimizerSettings {
        coarse_step_deg: 2.0,
        max_sweeps: 50,
        value_tol: 1e-14,
    };
    let g = |eta: R| max_strict_ch(f, eta, &settings);
    let mut lo = r::<R>(0.5);
    let mut hi = R::one();
    if g(lo)? >= R::zero() {
        return Err(Error::NonConvergence("lower bracket not negative".into()));
    }
    if g(hi)? <= R::zero() {
        return Err(Error::NonConvergence("no violation at unit efficiency".into()));
    }
    while hi - lo > r::<R>(1e-4) {
        let mid = (lo + hi) * r::<R>(0.5);
        if g(mid)? > R::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * r::<R>(0.5))
}

/// Source brightness and accidental background for count-rate
/// projections of the CH sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel<R: Real> {
    /// Emitted pairs per second.
    pub pair_rate: R,
    /// Accidental coincidences per second added to every CH term.
    pub background_rate: R,
    /// Acquisition time in seconds.
    pub acquisition: R,
}

impl<R: Real> RateModel<R> {
    pub fn new(pair_rate: R, background_rate: R, acquisition: R) -> Result<Self> {
        if pair_rate < R::zero() || background_rate < R::zero() || acquisition < R::zero() {
            return Err(Error::InvalidParameter("rate-model fields must be nonnegative".into()));
        }
        Ok(Self {
            pair_rate,
            background_rate,
            acquisition,
        })
    }
}

/// CH expressed in coincidences per second with a Poisson standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChCounts<R: Real> {
    /// Expected CH in coincidences per second.
    pub rate: R,
    pub stderr: R,
    /// `rate / stderr`; `None` when the error vanishes (no light at all).
    pub significance: Option<R>,
}

/// Scales the substituted CH sum to count rates and attaches the Poisson
/// standard error from the six underlying terms.
pub fn ch_counts<R: Real>(
    state: &BiphotonState<R>,
    cfg: &ChConfiguration<R>,
    rates: &RateModel<R>,
) -> Result<ChCounts<R>> {
    if rates.acquisition <= R::zero() {
        return Err(Error::ZeroAcquisition);
    }
    let ch = ch_substituted(state, cfg)?;
    let rate = rates.pair_rate * ch.value;
    // The CH sign pattern (+,-,+,+,-,-) cancels a common background in
    // expectation, but every term still contributes Poisson variance.
    let var = ch
        .terms
        .iter()
        .map(|t| rates.pair_rate * t.abs() + rates.background_rate)
        .fold(R::zero(), |a, b| a + b)
        / rates.acquisition;
    let stderr = var.sqrt();
    let significance = if stderr > R::zero() { Some(rate / stderr) } else { None };
    Ok(ChCounts {
        rate,
        stderr,
        significance,
    })
}
