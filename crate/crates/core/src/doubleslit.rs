//! Two-photon double-slit model: Fraunhofer per-slit amplitudes, the
//! fourth-order-interference coincidence pattern of standard quantum
//! mechanics, the de Broglie-Bohm same-semiplane comparator, and
//! chi-square model comparison against measured counts.

use crate::error::{Error, Result};
use crate::scalar::{r, Real};
use num_complex::Complex;

/// Far-field validity threshold on width^2 / (lambda * distance).
const FRAUNHOFER_LIMIT: f64 = 0.01;

/// Double-slit dimensions and illumination wavelength (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitGeometry<R: Real> {
    /// Center-to-center slit separation.
    pub separation: R,
    /// Width of each slit.
    pub width: R,
    pub wavelength: R,
    /// Relative phase between the two slit illuminations; the converging
    /// pump geometry is reduced to equal amplitudes and this phase.
    pub relative_phase: R,
}

impl<R: Real> SlitGeometry<R> {
    pub fn new(separation: R, width: R, wavelength: R) -> Result<Self> {
        if !(separation > R::zero() && width > R::zero() && wavelength > R::zero()) {
            return Err(Error::InvalidParameter("slit dimensions must be positive".into()));
        }
        if width >= separation {
            return Err(Error::InvalidParameter(
                "slit width must be smaller than the separation".into(),
            ));
        }
        Ok(Self {
            separation,
            width,
            wavelength,
            relative_phase: R::zero(),
        })
    }

    /// The reference geometry: 100 um separation, 10 um width, 702 nm.
    pub fn reference() -> Self {
        Self::new(r(100e-6), r(10e-6), r(702e-9)).expect("reference geometry is valid")
    }

    pub fn with_relative_phase(self, phase: R) -> Self {
        Self {
            relative_phase: phase,
            ..self
        }
    }
}

/// A detection plane: distance from the slits, collection aperture and
/// the transverse detector positions (signed, 0 on the symmetry axis).
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorPlane<R: Real> {
    pub distance: R,
    pub aperture: R,
    pub positions: Vec<R>,
}

impl<R: Real> DetectorPlane<R> {
    pub fn new(distance: R, aperture: R, positions: Vec<R>) -> Result<Self> {
        if !(distance > R::zero() && aperture > R::zero()) {
            return Err(Error::InvalidParameter(
                "detector distance and aperture must be positive".into(),
            ));
        }
        Ok(Self {
            distance,
            aperture,
            positions,
        })
    }

    /// Uniformly spaced positions across [lo, hi].
    pub fn scan(distance: R, aperture: R, lo: R, hi: R, n: usize) -> Result<Self> {
        if n < 2 || hi <= lo {
            return Err(Error::BadGrid);
        }
        let step = (hi - lo) / r::<R>((n - 1) as f64);
        let positions = (0..n).map(|i| lo + step * r::<R>(i as f64)).collect();
        Self::new(distance, aperture, positions)
    }
}

/// Which slit an amplitude refers to. Slit A is centered at -separation/2,
/// slit B at +separation/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slit {
    A,
    B,
}

fn check_fraunhofer<R: Real>(g: &SlitGeometry<R>, plane_distance: R) -> Result<()> {
    let q = (g.width * g.width / (g.wavelength * plane_distance))
        .to_f64()
        .unwrap_or(f64::INFINITY);
    if q > FRAUNHOFER_LIMIT {
        return Err(Error::FraunhoferViolated(q));
    }
    Ok(())
}

fn sinc<R: Real>(x: R) -> R {
    if x.abs() < r(1e-8) {
        R::one()
    } else {
        x.sin() / x
    }
}

/// Far-field single-slit amplitude at transverse position `x` on the
/// plane: sinc envelope of the slit width times the slit-center phase
/// factor `exp(-i k a x / D)`.
pub fn slit_amplitude<R: Real>(
    g: &SlitGeometry<R>,
    which: Slit,
    plane_distance: R,
    x: R,
) -> Result<Complex<R>> {
    check_fraunhofer(g, plane_distance)?;
    Ok(slit_amplitude_unchecked(g, which, plane_distance, x))
}

fn slit_amplitude_unchecked<R: Real>(
    g: &SlitGeometry<R>,
    which: Slit,
    plane_distance: R,
    x: R,
) -> Complex<R> {
    let k = r::<R>(2.0) * R::PI() / g.wavelength;
    let angle = x / plane_distance;
    let envelope = sinc(k * g.width * angle / r(2.0));
    let half = g.separation / r(2.0);
    let (center, extra_phase) = match which {
        Slit::A => (-half, R::zero()),
        Slit::B => (half, g.relative_phase),
    };
    let phase = -k * center * angle + extra_phase;
    Complex::from_polar(envelope, phase)
}

/// Envelope first zero `lambda * D / width` of a plane.
pub fn envelope_zero_spacing<R: Real>(g: &SlitGeometry<R>, plane_distance: R) -> R {
    g.wavelength * plane_distance / g.width
}

/// Coincidence fringe period `lambda * D / separation` on a plane.
pub fn fringe_period<R: Real>(g: &SlitGeometry<R>, plane_distance: R) -> R {
    g.wavelength * plane_distance / g.separation
}

/// 16-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 16] = [
    -0.989_400_934_991_649_9,
    -0.944_575_023_073_232_6,
    -0.865_631_202_387_831_7,
    -0.755_404_408_355_003,
    -0.617_876_244_402_643_7,
    -0.458_016_777_657_227_4,
    -0.281_603_550_779_258_9,
    -0.095_012_509_837_637_44,
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_WEIGHTS: [f64; 16] = [
    0.027_152_459_411_754_1,
    0.062_253_523_938_647_9,
    0.095_158_511_682_492_8,
    0.124_628_971_255_533_9,
    0.149_595_988_816_576_7,
    0.169_156_519_395_002_5,
    0.182_603_415_044_923_6,
    0.189_450_610_455_068_5,
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

/// Averages `f` over an aperture of the given diameter centered at `x`.
fn aperture_average<R: Real>(x: R, aperture: R, mut f: impl FnMut(R) -> R) -> R {
    let half = aperture / r(2.0);
    let mut acc = R::zero();
    for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += r::<R>(*weight) * f(x + half * r::<R>(*node));
    }
    acc / r(2.0)
}

fn sqm_point_density<R: Real>(
    g: &SlitGeometry<R>,
    d1: R,
    d2: R,
    x1: R,
    x2: R,
) -> R {
    // Either photon may have crossed either slit; the two assignments are
    // indistinguishable and interfere.
    let a1 = slit_amplitude_unchecked(g, Slit::A, d1, x1);
    let b1 = slit_amplitude_unchecked(g, Slit::B, d1, x1);
    let a2 = slit_amplitude_unchecked(g, Slit::A, d2, x2);
    let b2 = slit_amplitude_unchecked(g, Slit::B, d2, x2);
    (a1 * b2 + b1 * a2).norm_sqr()
}

fn dbb_point_density<R: Real>(g: &SlitGeometry<R>, d1: R, d2: R, x1: R, x2: R) -> R {
    // Each photon stays in the semiplane of its slit, so the two
    // assignments never overlap and nothing interferes.
    let mut density = R::zero();
    if x1 <= R::zero() && x2 >= R::zero() {
        let a1 = slit_amplitude_unchecked(g, Slit::A, d1, x1);
        let b2 = slit_amplitude_unchecked(g, Slit::B, d2, x2);
        density += a1.norm_sqr() * b2.norm_sqr();
    }
    if x1 >= R::zero() && x2 <= R::zero() {
        let b1 = slit_amplitude_unchecked(g, Slit::B, d1, x1);
        let a2 = slit_amplitude_unchecked(g, Slit::A, d2, x2);
        density += b1.norm_sqr() * a2.norm_sqr();
    }
    if x1.signum() == x2.signum() && x1 != R::zero() && x2 != R::zero() {
        return R::zero();
    }
    density
}

/// Aperture-averaged SQM joint coincidence density at one detector pair
/// position (unnormalized).
pub fn sqm_joint_density<R: Real>(
    g: &SlitGeometry<R>,
    plane1: &DetectorPlane<R>,
    plane2: &DetectorPlane<R>,
    x1: R,
    x2: R,
) -> Result<R> {
    check_fraunhofer(g, plane1.distance)?;
    check_fraunhofer(g, plane2.distance)?;
    Ok(aperture_average(x1, plane1.aperture, |u| {
        aperture_average(x2, plane2.aperture, |v| {
            sqm_point_density(g, plane1.distance, plane2.distance, u, v)
        })
    }))
}

/// Aperture-averaged de Broglie-Bohm comparator density at one point:
/// exactly zero whenever both detectors sit in the same semiplane.
pub fn dbb_joint_density<R: Real>(
    g: &SlitGeometry<R>,
    plane1: &DetectorPlane<R>,
    plane2: &DetectorPlane<R>,
    x1: R,
    x2: R,
) -> Result<R> {
    check_fraunhofer(g, plane1.distance)?;
    check_fraunhofer(g, plane2.distance)?;
    if x1.signum() == x2.signum() && x1 != R::zero() && x2 != R::zero() {
        return Ok(R::zero());
    }
    Ok(aperture_average(x1, plane1.aperture, |u| {
        aperture_average(x2, plane2.aperture, |v| {
            dbb_point_density(g, plane1.distance, plane2.distance, u, v)
        })
    }))
}

/// Normalized joint coincidence density over a grid of detector-pair
/// positions, with its two marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPattern<R: Real> {
    pub x1: Vec<R>,
    pub x2: Vec<R>,
    /// `density[i][j]` at `(x1[i], x2[j])`; normalized so the trapezoidal
    /// integral over the grid is 1.
    pub density: Vec<Vec<R>>,
    pub marginal1: Vec<R>,
    pub marginal2: Vec<R>,
}

fn trapezoid_weights<R: Real>(xs: &[R]) -> Vec<R> {
    let n = xs.len();
    let mut w = vec![R::zero(); n];
    for i in 0..n - 1 {
        let h = (xs[i + 1] - xs[i]) / r(2.0);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

fn build_pattern<R: Real>(
    g: &SlitGeometry<R>,
    plane1: &DetectorPlane<R>,
    plane2: &DetectorPlane<R>,
    density_fn: impl Fn(R, R) -> R,
) -> Result<JointPattern<R>> {
    if plane1.positions.len() < 2 || plane2.positions.len() < 2 {
        return Err(Error::BadGrid);
    }
    // Fringes must be resolved by the grid on both planes.
    for plane in [plane1, plane2] {
        let period = fringe_period(g, plane.distance);
        let max_step = plane
            .positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(R::zero(), |a, b| a.max(b));
        if max_step * r(4.0) > period {
            return Err(Error::GridTooCoarse);
        }
    }
    let mut density: Vec<Vec<R>> = plane1
        .positions
        .iter()
        .map(|&u| plane2.positions.iter().map(|&v| density_fn(u, v)).collect())
        .collect();
    let w1 = trapezoid_weights(&plane1.positions);
    let w2 = trapezoid_weights(&plane2.positions);
    let mut total = R::zero();
    for (i, row) in density.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            total += w1[i] * w2[j] * d;
        }
    }
    if !(total > R::zero()) {
        return Err(Error::InvalidParameter("pattern integrates to zero".into()));
    }
    for row in density.iter_mut() {
        for d in row.iter_mut() {
            *d /= total;
        }
    }
    let marginal1: Vec<R> = density
        .iter()
        .map(|row| row.iter().zip(&w2).map(|(&d, &w)| d * w).sum())
        .collect();
    let marginal2: Vec<R> = (0..plane2.positions.len())
        .map(|j| density.iter().zip(&w1).map(|(row, &w)| row[j] * w).sum())
        .collect();
    Ok(JointPattern {
        x1: plane1.positions.clone(),
        x2: plane2.positions.clone(),
        density,
        marginal1,
        marginal2,
    })
}

/// Normalized SQM joint pattern over the planes' position grids.
pub fn sqm_joint_pattern<R: Real>(
    g: &SlitGeometry<R>,
    plane1: &DetectorPlane<R>,
    plane2: &DetectorPlane<R>,
) -> Result<JointPattern<R>> {
    check_fraunhofer(g, plane1.distance)?;
    check_fraunhofer(g, plane2.distance)?;
    build_pattern(g, plane1, plane2, |u, v| {
        aperture_average(u, plane1.aperture, |a| {
            aperture_average(v, plane2.aperture, |b| {
                sqm_point_density(g, plane1.distance, plane2.distance, a, b)
            })
        })
    })
}

/// Normalized dBB comparator pattern over the same grids.
pub fn dbb_joint_pattern<R: Real>(
    g: &SlitGeometry<R>,
    plane1: &DetectorPlane<R>,
    plane2: &DetectorPlane<R>,
) -> Result<JointPattern<R>> {
    check_fraunhofer(g, plane1.distance)?;
    check_fraunhofer(g, plane2.distance)?;
    build_pattern(g, plane1, plane2, |u, v| {
        if u.signum() == v.signum() && u != R::zero() && v != R::zero() {
            R::zero()
        } else {
            aperture_average(u, plane1.aperture, |a| {
                aperture_average(v, plane2.aperture, |b| {
                    dbb_point_density(g, plane1.distance, plane2.distance, a, b)
                })
            })
        }
    })
}

/// Singles (marginal) density at the plane's positions, integrating the
/// partner coordinate over `[-half_range, half_range]`.
///
/// The range must cover at least six envelope zeros on the partner plane
/// (three on each side of the axis).
pub fn sqm_singles_pattern<R: Real>(
    g: &SlitGeometry<R>,
    plane: &DetectorPlane<R>,
    partner: &DetectorPlane<R>,
    half_range: R,
) -> Result<Vec<R>> {
    check_fraunhofer(g, plane.distance)?;
    check_fraunhofer(g, partner.distance)?;
    let zero = envelope_zero_spacing(g, partner.distance);
    if half_range < zero * r(3.0) {
        return Err(Error::IntegrationRangeTooNarrow);
    }
    // Resolve the partner-plane fringes comfortably.
    let period = fringe_period(g, partner.distance);
    let n = ((r::<R>(2.0) * half_range / period).to_f64().unwrap_or(0.0) * 16.0).ceil() as usize;
    let n = n.max(64);
    let step = r::<R>(2.0) * half_range / r((n - 1) as f64);
    let partner_grid: Vec<R> = (0..n).map(|i| -half_range + step * r::<R>(i as f64)).collect();
    let weights = trapezoid_weights(&partner_grid);
    let marginal: Vec<R> = plane
        .positions
        .iter()
        .map(|&x| {
            partner_grid
                .iter()
                .zip(&weights)
                .map(|(&v, &w)| {
                    w * sqm_point_density(g, plane.distance, partner.distance, x, v)
                })
                .sum()
        })
        .collect();
    Ok(marginal)
}

/// (max - min) / (max + min) of a sampled curve.
pub fn curve_visibility<R: Real>(values: &[R]) -> Result<R> {
    let hi = values.iter().copied().fold(R::neg_infinity(), R::max);
    let lo = values.iter().copied().fold(R::infinity(), R::min);
    if !(hi + lo > R::zero()) {
        return Err(Error::UndefinedVisibility);
    }
    Ok((hi - lo) / (hi + lo))
}

/// Model to compare against measured counts.
pub enum FitModel<'a, R: Real> {
    /// Counts proportional to tabulated model values (one scale
    /// parameter, optionally a flat background).
    Scaled(&'a [R]),
    /// Straight line `a + b x` (absence of interference).
    Linear,
}

/// Result of a weighted least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<R: Real> {
    pub reduced_chi_square: R,
    pub degrees_of_freedom: usize,
    pub parameters: Vec<R>,
}

/// Weighted least-squares fit of the model to counts with uncertainties;
/// data rows are `(position, counts, stderr)`.
pub fn chi_square_compare<R: Real>(
    data: &[(R, R, R)],
    model: FitModel<'_, R>,
    free_background: bool,
) -> Result<FitReport<R>> {
    // Design matrix columns for each model.
    let columns: Vec<Vec<R>> = match model {
        FitModel::Scaled(values) => {
            if values.len() != data.len() {
                return Err(Error::InvalidParameter(
                    "model values must match the data length".into(),
                ));
            }
            let mut cols = vec![values.to_vec()];
            if free_background {
                cols.push(vec![R::one(); data.len()]);
            }
            cols
        }
        FitModel::Linear => {
            let xs: Vec<R> = data.iter().map(|d| d.0).collect();
            vec![vec![R::one(); data.len()], xs]
        }
    };
    let n_params = columns.len();
    if data.len() < n_params + 2 {
        return Err(Error::TooFewPoints);
    }
    if data.iter().any(|d| !(d.2 > R::zero())) {
        return Err(Error::InvalidParameter("uncertainties must be positive".into()));
    }
    // Normal equations (at most 2x2 here).
    let mut ata = vec![vec![R::zero(); n_params]; n_params];
    let mut atb = vec![R::zero(); n_params];
    for (i, &(_, y, sigma)) in data.iter().enumerate() {
        let w = R::one() / (sigma * sigma);
        for a in 0..n_params {
            atb[a] += w * columns[a][i] * y;
            for b in 0..n_params {
                ata[a][b] += w * columns[a][i] * columns[b][i];
            }
        }
    }
    let params = solve_small(&mut ata, &mut atb)?;
    let mut chi2 = R::zero();
    for (i, &(_, y, sigma)) in data.iter().enumerate() {
        let mut fit = R::zero();
        for (a, p) in params.iter().enumerate() {
            fit += *p * columns[a][i];
        }
        let d = (y - fit) / sigma;
        chi2 += d * d;
    }
    let dof = data.len() - n_params;
    Ok(FitReport {
        reduced_chi_square: chi2 / r(dof as f64),
        degrees_of_freedom: dof,
        parameters: params,
    })
}

/// Gaussian elimination with partial pivoting for the tiny normal systems.
fn solve_small<R: Real>(a: &mut [Vec<R>], b: &mut [R]) -> Result<Vec<R>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < r(1e-300) {
            return Err(Error::SingularFit);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![R::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn geometry() -> SlitGeometry<f64> {
        SlitGeometry::reference()
    }

    fn plane1() -> DetectorPlane<f64> {
        DetectorPlane::new(1.21, 0.002, vec![]).unwrap()
    }

    fn plane2() -> DetectorPlane<f64> {
        DetectorPlane::new(1.5, 0.006, vec![]).unwrap()
    }

    #[test]
    fn equal_moduli_on_axis() {
        let g = geometry();
        let a = slit_amplitude(&g, Slit::A, 1.21, 0.0).unwrap();
        let b = slit_amplitude(&g, Slit::B, 1.21, 0.0).unwrap();
        assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-14);
        assert_abs_diff_eq!(a.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn envelope_zero_location() {
        let g = geometry();
        // lambda * D / width ~ 8.5 cm at 1.21 m.
        let x0 = envelope_zero_spacing(&g, 1.21);
        assert_relative_eq!(x0, 0.0849, epsilon = 1e-3);
        let amp = slit_amplitude(&g, Slit::A, 1.21, x0).unwrap();
        assert!(amp.norm() < 1e-10);
    }

    #[test]
    fn slit_phase_difference_drives_fringe_period() {
        let g = geometry();
        let x = 0.003;
        let d = 1.21;
        let a = slit_amplitude(&g, Slit::A, d, x).unwrap();
        let b = slit_amplitude(&g, Slit::B, d, x).unwrap();
        let k = 2.0 * std::f64::consts::PI / g.wavelength;
        let expect = k * g.separation * x / d;
        let got = (a / b).arg();
        let wrapped = (expect - got) / (2.0 * std::f64::consts::PI);
        assert_abs_diff_eq!(wrapped, wrapped.round(), epsilon = 1e-9);
        assert_relative_eq!(fringe_period(&g, d), 8.494e-3, epsilon = 1e-3);
    }

    #[test]
    fn fraunhofer_guard() {
        let g = SlitGeometry::new(5e-3, 1e-3, 702e-9).unwrap();
        assert!(matches!(
            slit_amplitude(&g, Slit::A, 0.5, 0.0),
            Err(Error::FraunhoferViolated(_))
        ));
    }

    #[test]
    fn symmetric_points_are_modulation_maxima() {
        let g = geometry();
        let (p1, p2) = (plane1(), plane2());
        let x = 0.004;
        let center = sqm_joint_density(&g, &p1, &p2, -x, x * 1.21 / 1.5).unwrap();
        // Shifting one detector by half a fringe period lowers the density.
        let half = fringe_period(&g, 1.21) / 2.0;
        let off = sqm_joint_density(&g, &p1, &p2, -x + half, x * 1.21 / 1.5).unwrap();
        assert!(center > off, "center {center} vs off {off}");
    }

    #[test]
    fn same_semiplane_sqm_positive_dbb_zero() {
        let g = geometry();
        let (p1, p2) = (plane1(), plane2());
        let sqm = sqm_joint_density(&g, &p1, &p2, -0.017, -0.055).unwrap();
        assert!(sqm > 0.0);
        let dbb = dbb_joint_density(&g, &p1, &p2, -0.017, -0.055).unwrap();
        assert_eq!(dbb, 0.0);
    }

    #[test]
    fn joint_pattern_reflection_symmetry() {
        let g = geometry();
        let mut p1 = plane1();
        let mut p2 = plane2();
        p1 = DetectorPlane::scan(p1.distance, p1.aperture, -0.02, 0.02, 41).unwrap();
        p2 = DetectorPlane::scan(p2.distance, p2.aperture, -0.02, 0.02, 41).unwrap();
        let pat = sqm_joint_pattern(&g, &p1, &p2).unwrap();
        let n = pat.x1.len();
        for i in 0..n {
            for j in 0..n {
                assert_relative_eq!(
                    pat.density[i][j],
                    pat.density[n - 1 - i][n - 1 - j],
                    max_relative = 1e-9,
                );
            }
        }
    }

    #[test]
    fn grid_too_coarse_rejected() {
        let g = geometry();
        let p1 = DetectorPlane::scan(1.21, 0.002, -0.02, 0.02, 5).unwrap();
        let p2 = DetectorPlane::scan(1.5, 0.006, -0.02, 0.02, 41).unwrap();
        assert!(matches!(
            sqm_joint_pattern(&g, &p1, &p2),
            Err(Error::GridTooCoarse)
        ));
    }

    #[test]
    fn patterns_normalized_and_dbb_quadrants_empty() {
        let g = geometry();
        let p1 = DetectorPlane::scan(1.21, 0.002, -0.02, 0.02, 61).unwrap();
        let p2 = DetectorPlane::scan(1.5, 0.006, -0.02, 0.02, 61).unwrap();
        let sqm = sqm_joint_pattern(&g, &p1, &p2).unwrap();
        let dbb = dbb_joint_pattern(&g, &p1, &p2).unwrap();
        let integrate = |pat: &JointPattern<f64>| {
            let w1 = trapezoid_weights(&pat.x1);
            let w2 = trapezoid_weights(&pat.x2);
            let mut total = 0.0;
            for (i, row) in pat.density.iter().enumerate() {
                for (j, &d) in row.iter().enumerate() {
                    total += w1[i] * w2[j] * d;
                }
            }
            total
        };
        assert_relative_eq!(integrate(&sqm), 1.0, epsilon = 1e-9);
        assert_relative_eq!(integrate(&dbb), 1.0, epsilon = 1e-9);
        for (i, &u) in dbb.x1.iter().enumerate() {
            for (j, &v) in dbb.x2.iter().enumerate() {
                if u.signum() == v.signum() && u != 0.0 && v != 0.0 {
                    assert_eq!(dbb.density[i][j], 0.0);
                }
            }
        }
        // The two patterns differ substantially.
        let w1 = trapezoid_weights(&sqm.x1);
        let w2 = trapezoid_weights(&sqm.x2);
        let mut l1 = 0.0;
        for i in 0..sqm.x1.len() {
            for j in 0..sqm.x2.len() {
                l1 += w1[i] * w2[j] * (sqm.density[i][j] - dbb.density[i][j]).abs();
            }
        }
        assert!(l1 > 0.1, "L1 distance {l1}");
    }

    #[test]
    fn aperture_average_converges_to_point_value() {
        let g = geometry();
        let period = fringe_period(&g, 1.21);
        let tiny = DetectorPlane::new(1.21, period / 100.0, vec![]).unwrap();
        let p2 = DetectorPlane::new(1.5, period / 100.0, vec![]).unwrap();
        let averaged = sqm_joint_density(&g, &tiny, &p2, -0.003, 0.004).unwrap();
        let point = sqm_point_density(&g, 1.21, 1.5, -0.003, 0.004);
        assert_relative_eq!(averaged, point, max_relative = 1e-3);
    }

    #[test]
    fn singles_are_structureless() {
        let g = geometry();
        let scan = DetectorPlane::scan(1.21, 0.002, -0.008, 0.008, 81).unwrap();
        let partner = plane2();
        let half_range = envelope_zero_spacing(&g, 1.5) * 3.5;
        let marginal = sqm_singles_pattern(&g, &scan, &partner, half_range).unwrap();
        let v = curve_visibility(&marginal).unwrap();
        assert!(v < 0.05, "singles visibility {v}");
        // Shape tracks the incoherent two-slit sum.
        let incoherent: Vec<f64> = scan
            .positions
            .iter()
            .map(|&x| {
                slit_amplitude(&g, Slit::A, 1.21, x).unwrap().norm_sqr()
                    + slit_amplitude(&g, Slit::B, 1.21, x).unwrap().norm_sqr()
            })
            .collect();
        let norm = |v: &[f64]| {
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let a = norm(&marginal);
        let b = norm(&incoherent);
        let l2: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!(l2 < 0.02, "L2 distance {l2}");
    }

    #[test]
    fn singles_range_guard() {
        let g = geometry();
        let scan = DetectorPlane::scan(1.21, 0.002, -0.008, 0.008, 41).unwrap();
        assert!(matches!(
            sqm_singles_pattern(&g, &scan, &plane2(), 0.01),
            Err(Error::IntegrationRangeTooNarrow)
        ));
    }

    #[test]
    fn chi_square_exact_data_is_zero() {
        let model = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let data: Vec<(f64, f64, f64)> = model
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as f64, 2.5 * m, 1.0))
            .collect();
        let report = chi_square_compare(&data, FitModel::Scaled(&model), false).unwrap();
        assert_abs_diff_eq!(report.reduced_chi_square, 0.0, epsilon = 1e-20);
        assert_abs_diff_eq!(report.parameters[0], 2.5, epsilon = 1e-12);
        assert_eq!(report.degrees_of_freedom, 5);
    }

    #[test]
    fn chi_square_guards() {
        let model = [1.0, 2.0];
        let data = vec![(0.0, 1.0, 1.0), (1.0, 2.0, 1.0)];
        assert!(matches!(
            chi_square_compare(&data, FitModel::Scaled(&model), false),
            Err(Error::TooFewPoints)
        ));
        // Singular: constant-zero model column.
        let zeros = [0.0; 6];
        let data6: Vec<(f64, f64, f64)> = (0..6).map(|i| (i as f64, 1.0, 1.0)).collect();
        assert!(matches!(
            chi_square_compare(&data6, FitModel::Scaled(&zeros), false),
            Err(Error::SingularFit)
        ));
    }
}
