//! Four-level quantum key distribution over the double-entangled channel
//! (polarization x time-bin): joint measurement statistics with
//! central-slot post-selection, a full protocol Monte Carlo with
//! intercept-resend eavesdropping, the single-channel baseline, and the
//! information-versus-disturbance comparison between the two channels.

use crate::error::{Error, Result};
use crate::mc::{mutual_information, RngStream};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, TAU};

/// Shared two-photon state of the protocol: a polarization-entangled pair
/// whose pump has traversed a short/long interferometer, entangling the
/// emission time bins with relative phase `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleEntangledState {
    /// Pump interferometer phase (radians, [0, 2 pi)).
    pub phi: f64,
    /// Polarization entanglement parameter; 1 is the maximally entangled
    /// default.
    pub f_pol: Complex64,
}

impl DoubleEntangledState {
    pub fn new(phi: f64, f_pol: Complex64) -> Result<Self> {
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "pump phase must lie in [0, 2pi), got {phi}"
            )));
        }
        if !f_pol.re.is_finite() || !f_pol.im.is_finite() {
            return Err(Error::InvalidParameter("f_pol must be finite".into()));
        }
        Ok(Self { phi, f_pol })
    }

    /// Maximally entangled in both degrees of freedom, pump phase zero.
    pub fn ideal() -> Self {
        Self {
            phi: 0.0,
            f_pol: Complex64::new(1.0, 0.0),
        }
    }
}

/// Polarization measurement basis of one observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolBasis {
    /// Horizontal/vertical.
    Z,
    /// +-45 degrees.
    X,
}

/// One observer's settings for a single round: a polarization basis and
/// the phase applied on the long arm of the local interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverSettings {
    pub pol_basis: PolBasis,
    pub phase_setting: f64,
}

impl ObserverSettings {
    pub fn new(pol_basis: PolBasis, phase_setting: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&phase_setting.rem_euclid(TAU)) {
            return Err(Error::InvalidParameter("phase setting must be finite".into()));
        }
        if !phase_setting.is_finite() {
            return Err(Error::InvalidParameter("phase setting must be finite".into()));
        }
        Ok(Self {
            pol_basis,
            phase_setting,
        })
    }
}

/// The two phase settings an observer alternates between. The defaults
/// are the standard conjugate pair: Alice {0, pi/2}, Bob {0, -pi/2}, so
/// that equal indices give deterministic correlations at `phi = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverPolicy {
    pub phase_settings: [f64; 2],
}

impl ObserverPolicy {
    pub fn alice_default() -> Self {
        Self {
            phase_settings: [0.0, FRAC_PI_2],
        }
    }

    pub fn bob_default() -> Self {
        Self {
            phase_settings: [0.0, -FRAC_PI_2],
        }
    }
}

/// Which degrees of freedom Eve attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveTarget {
    PolarizationOnly,
    PhaseOnly,
    Both,
}

/// Eavesdropping strategy on the Bob-bound photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveKind {
    None,
    /// Measure in one of the two protocol bases, chosen uniformly per
    /// round, and resend the outcome eigenstate.
    FixedBasis,
    /// Measure in the intermediate (Breidbart) basis and resend.
    Breidbart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveStrategy {
    pub kind: EveKind,
    /// Fraction of rounds intercepted.
    pub intercept_fraction: f64,
    pub target: EveTarget,
}

impl EveStrategy {
    pub fn none() -> Self {
        Self {
            kind: EveKind::None,
            intercept_fraction: 0.0,
            target: EveTarget::Both,
        }
    }

    pub fn new(kind: EveKind, intercept_fraction: f64, target: EveTarget) -> Result<Self> {
        if !(0.0..=1.0).contains(&intercept_fraction) {
            return Err(Error::InvalidParameter(format!(
                "intercept fraction must lie in [0,1], got {intercept_fraction}"
            )));
        }
        Ok(Self {
            kind,
            intercept_fraction,
            target,
        })
    }
}

/// Joint outcome distribution of one round, conditioned on both photons
/// being detected in the central time slot. The polarization and phase
/// sectors factorize because the two entanglements are independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementDistribution {
    /// `pol[a][b]` = P(Alice pol bit a, Bob pol bit b).
    pub pol: [[f64; 2]; 2],
    /// `phase[a][b]` = P(phase bits | both photons central).
    pub phase: [[f64; 2]; 2],
    /// Probability that one photon lands in its central slot.
    pub central_slot_prob: f64,
    /// Probability that both photons land in their central slots.
    pub both_central_prob: f64,
}

impl MeasurementDistribution {
    /// Full joint probability of the four bits given the central slots.
    pub fn joint(&self, pol_a: usize, pol_b: usize, phase_a: usize, phase_b: usize) -> f64 {
        self.pol[pol_a][pol_b] * self.phase[phase_a][phase_b]
    }
}

type Qubit = [Complex64; 2];
type Basis = [Qubit; 2];

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn pol_basis_vectors(basis: PolBasis) -> Basis {
    let s = Complex64::new(INV_SQRT2, 0.0);
    match basis {
        PolBasis::Z => [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ],
        PolBasis::X => [[s, s], [s, -s]],
    }
}

/// Breidbart polarization basis: halfway between H and +45 degrees.
fn breidbart_pol_basis() -> Basis {
    let c = Complex64::new(FRAC_PI_8.cos(), 0.0);
    let s = Complex64::new(FRAC_PI_8.sin(), 0.0);
    [[c, s], [-s, c]]
}

/// Interferometric basis with long-arm phase `gamma`: the two output
/// ports of a balanced analyzer restricted to the central slot.
fn equatorial_basis(gamma: f64) -> Basis {
    let s = Complex64::new(INV_SQRT2, 0.0);
    let e = Complex64::from_polar(INV_SQRT2, gamma);
    [[s, e], [s, -e]]
}

/// Breidbart phase basis: halfway between Bob's two settings {0, -pi/2}.
fn breidbart_phase_basis() -> Basis {
    equatorial_basis(-FRAC_PI_4)
}

/// Two-qubit amplitude `<u_a| <u_b| psi>` for the sector state
/// `(|00> + g |11>) / sqrt(1 + |g|^2)`.
fn sector_amplitude(g: Complex64, ua: &Qubit, ub: &Qubit) -> Complex64 {
    let norm = (1.0 + g.norm_sqr()).sqrt();
    (ua[0].conj() * ub[0].conj() + g * ua[1].conj() * ub[1].conj()) / norm
}

fn sector_joint(g: Complex64, alice: &Basis, bob: &Basis) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, p) in row.iter_mut().enumerate() {
            *p = sector_amplitude(g, &alice[a], &bob[b]).norm_sqr();
        }
    }
    out
}

/// Joint central-slot outcome distribution for the given settings.
pub fn measurement_distribution(
    state: &DoubleEntangledState,
    alice: &ObserverSettings,
    bob: &ObserverSettings,
) -> Result<MeasurementDistribution> {
    DoubleEntangledState::new(state.phi, state.f_pol)?;
    let pol = sector_joint(
        state.f_pol,
        &pol_basis_vectors(alice.pol_basis),
        &pol_basis_vectors(bob.pol_basis),
    );
    let phase = sector_joint(
        Complex64::from_polar(1.0, state.phi),
        &equatorial_basis(alice.phase_setting),
        &equatorial_basis(bob.phase_setting),
    );
    Ok(MeasurementDistribution {
        pol,
        phase,
        // Each photon splits evenly over (early, central x 1/2, late) in
        // its local balanced interferometer: the two indistinguishable
        // path assignments each carry amplitude 1/2 into the central slot.
        central_slot_prob: 0.5,
        both_central_prob: 0.25,
    })
}

/// Born probability of projecting `state` on `v`.
fn born(state: &Qubit, v: &Qubit) -> f64 {
    (v[0].conj() * state[0] + v[1].conj() * state[1]).norm_sqr()
}

/// Collapsed Bob-bound qubit after Alice's projection on `ua`.
fn collapse(g: Complex64, ua: &Qubit) -> Qubit {
    let w = [ua[0].conj(), g * ua[1].conj()];
    let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    [w[0] / n, w[1] / n]
}

fn sample2(rng: &mut RngStream, p0: f64) -> usize {
    usize::from(!rng.gen_bool(p0.clamp(0.0, 1.0)))
}

/// What Eve recorded about one degree of freedom in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EveRecord {
    /// Index of the basis she used (protocol basis index, or 0 for the
    /// Breidbart basis).
    pub basis: u8,
    pub outcome: u8,
}

/// One protocol round as written to the transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    /// Both photons detected in their central slots (always true for the
    /// single-channel baseline, which has no time-bin selection).
    pub kept: bool,
    /// (polarization basis index, phase setting index) per observer.
    pub alice_bases: (u8, u8),
    pub bob_bases: (u8, u8),
    /// (polarization bit, phase bit).
    pub alice_bits: (u8, u8),
    pub bob_bits: (u8, u8),
    pub intercepted: bool,
    pub eve_pol: Option<EveRecord>,
    pub eve_phase: Option<EveRecord>,
    /// Both bases matched, so the round enters the key.
    pub sifted: bool,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportStat {
    pub value: f64,
    pub stderr: f64,
}

impl ReportStat {
    fn from_fraction(hits: u64, n: u64) -> Self {
        if n == 0 {
            return Self {
                value: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let p = hits as f64 / n as f64;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

}

/// Aggregated channel statistics over the sifted rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub rounds: u64,
    /// Rounds surviving central-slot post-selection.
    pub post_selected: u64,
    pub sifted: u64,
    /// Bits carried by one sifted symbol: 2 for the double channel, 1 for
    /// the single-channel baseline.
    pub bits_per_symbol: usize,
    /// Sifted fraction among post-selected rounds.
    pub sifted_rate: ReportStat,
    /// Per-bit disagreement rate between the sifted keys.
    pub qber: ReportStat,
    /// Fraction of sifted symbols with at least one wrong bit.
    pub symbol_error_rate: ReportStat,
    /// Empirical mutual information between Alice's sifted symbol and
    /// Eve's full record, bits per symbol.
    pub i_ae_mutual: ReportStat,
    /// Mean over the degrees of freedom of the per-bit Alice-Eve mutual
    /// information.
    pub i_ae_per_qubit: ReportStat,
    /// Probability that Eve knows the complete symbol with certainty
    /// (every attacked basis matched the announced one).
    pub p_full_symbol: ReportStat,
    /// Probability that Eve's maximum-likelihood symbol guess is right,
    /// minus the blind-guess baseline.
    pub eve_guess_excess: ReportStat,
}

/// Everything produced by one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub report: ChannelReport,
    pub transcript: Vec<RoundRecord>,
    /// Sifted symbols, one entry per sifted round, 2 bits each for the
    /// double channel (`pol | phase << 1`).
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
}

/// Variance of the plug-in mutual information by the delta method.
fn mi_with_stderr(joint: &[Vec<u64>]) -> Result<ReportStat> {
    let value = mutual_information(joint)?;
    let total: u64 = joint.iter().flatten().sum();
    let n = total as f64;
    let cols = joint[0].len();
    let row_sums: Vec<f64> = joint
        .iter()
        .map(|row| row.iter().sum::<u64>() as f64)
        .collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| joint.iter().map(|row| row[j]).sum::<u64>() as f64)
        .collect();
    let mut second = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / n;
                let term = (p * n * n / (row_sums[i] * col_sums[j])).log2();
                second += p * term * term;
            }
        }
    }
    let var = ((second - value * value) / n).max(0.0);
    Ok(ReportStat {
        value,
        stderr: var.sqrt(),
    })
}

/// Index of Eve's record in the per-bit MI alphabet: 0 = no record, then
/// (basis agreement, outcome) pairs. The basis announcement is public,
/// so whether Eve's basis matched the announced one is part of her
/// knowledge, and conditioning on it is what lets a matching fixed-basis
/// interception carry a full bit.
fn record_symbol(record: Option<EveRecord>, matched_announced: bool) -> usize {
    match record {
        None => 0,
        Some(r) => 1 + 2 * usize::from(matched_announced) + r.outcome as usize,
    }
}

const RECORD_ALPHABET: usize = 5;

struct SectorResult {
    alice_bit: u8,
    bob_bit: u8,
    eve: Option<EveRecord>,
    /// Eve's maximum-likelihood guess of Alice's bit.
    eve_guess: u8,
    /// Eve's basis coincides with the (later announced) protocol basis,
    /// so her record is certain.
    eve_certain: bool,
}

/// Simulates one entangled qubit sector of one round, with optional
/// intercept-resend in the middle.
#[allow(clippy::too_many_arguments)]
fn run_sector(
    rng: &mut RngStream,
    g: Complex64,
    alice_basis: &Basis,
    bob_basis: &Basis,
    announced_basis_idx: u8,
    eve_kind: EveKind,
    eve_bases: &[(u8, Basis)],
    intercept: bool,
) -> SectorResult {
    // Alice measures first; her marginal over the two outcomes.
    let p_a0 = sector_amplitude(g, &alice_basis[0], &bob_basis[0]).norm_sqr()
        + sector_amplitude(g, &alice_basis[0], &bob_basis[1]).norm_sqr();
    let alice_bit = sample2(rng, p_a0) as u8;
    let bob_bound = collapse(g, &alice_basis[alice_bit as usize]);
    let (bob_state, eve, eve_guess, eve_certain) = if intercept && eve_kind != EveKind::None {
        let (basis_id, eve_basis) = match eve_kind {
            EveKind::FixedBasis => eve_bases[rng.gen_range_usize(eve_bases.len())],
            EveKind::Breidbart => eve_bases[0],
            EveKind::None => unreachable!(),
        };
        let outcome = sample2(rng, born(&bob_bound, &eve_basis[0])) as u8;
        let certain = eve_kind == EveKind::FixedBasis && basis_id == announced_basis_idx;
        // Without basis agreement a fixed-basis record carries no
        // information; her best guess is then a coin flip. The Breidbart
        // outcome always points at the likelier bit.
        let guess = match eve_kind {
            EveKind::FixedBasis if certain => outcome,
            EveKind::FixedBasis => rng.gen_range_usize(2) as u8,
            _ => outcome,
        };
        (
            eve_basis[outcome as usize],
            Some(EveRecord {
                basis: basis_id,
                outcome,
            }),
            guess,
            certain,
        )
    } else {
        (bob_bound, None, rng.gen_range_usize(2) as u8, false)
    };
    let bob_bit = sample2(rng, born(&bob_state, &bob_basis[0])) as u8;
    SectorResult {
        alice_bit,
        bob_bit,
        eve,
        eve_guess,
        eve_certain,
    }
}

fn eve_pol_bases(kind: EveKind) -> Vec<(u8, Basis)> {
    match kind {
        EveKind::Breidbart => vec![(0, breidbart_pol_basis())],
        _ => vec![
            (0, pol_basis_vectors(PolBasis::Z)),
            (1, pol_basis_vectors(PolBasis::X)),
        ],
    }
}

fn eve_phase_bases(kind: EveKind, bob: &ObserverPolicy) -> Vec<(u8, Basis)> {
    match kind {
        EveKind::Breidbart => vec![(0, breidbart_phase_basis())],
        // Fixed-basis Eve uses Bob's protocol pair: those are the bases
        // in which the Bob-bound states are eigenstates.
        _ => vec![
            (0, equatorial_basis(bob.phase_settings[0])),
            (1, equatorial_basis(bob.phase_settings[1])),
        ],
    }
}

fn run_channel(
    state: &DoubleEntangledState,
    n_rounds: u64,
    alice_policy: &ObserverPolicy,
    bob_policy: &ObserverPolicy,
    eve: &EveStrategy,
    seed: u64,
    with_phase_dof: bool,
) -> Result<ProtocolOutcome> {
    if n_rounds == 0 {
        return Err(Error::NoRounds);
    }
    EveStrategy::new(eve.kind, eve.intercept_fraction, eve.target)?;
    DoubleEntangledState::new(state.phi, state.f_pol)?;

    let attack_pol = eve.target != EveTarget::PhaseOnly;
    let attack_phase = with_phase_dof && eve.target != EveTarget::PolarizationOnly;
    let pol_eve_bases = eve_pol_bases(eve.kind);
    let phase_eve_bases = eve_phase_bases(eve.kind, bob_policy);
    let g_phase = Complex64::from_polar(1.0, state.phi);
    let bits_per_symbol = if with_phase_dof { 2 } else { 1 };
    let n_symbols = 1usize << bits_per_symbol;

    let mut transcript = Vec::with_capacity(n_rounds as usize);
    let mut alice_key = Vec::new();
    let mut bob_key = Vec::new();
    let mut post_selected = 0u64;
    let mut sifted = 0u64;
    let mut bit_errors = 0u64;
    let mut symbol_errors = 0u64;
    let mut full_certain = 0u64;
    let mut guess_hits = 0u64;
    let mut pol_mi_table = vec![vec![0u64; RECORD_ALPHABET]; 2];
    let mut phase_mi_table = vec![vec![0u64; RECORD_ALPHABET]; 2];
    let mut symbol_mi_table =
        vec![vec![0u64; RECORD_ALPHABET * RECORD_ALPHABET]; n_symbols];

    for round in 0..n_rounds {
        let mut rng = RngStream::new(seed, round);
        // Central-slot post-selection is independent of everything else
        // in this model; discarded rounds still consume their substream.
        let kept = !with_phase_dof || rng.gen_bool(0.25);
        let a_pol_basis = rng.gen_range_usize(2) as u8;
        let a_phase_idx = rng.gen_range_usize(2) as u8;
        let b_pol_basis = rng.gen_range_usize(2) as u8;
        let b_phase_idx = rng.gen_range_usize(2) as u8;
        let intercepted = eve.kind != EveKind::None
            && eve.intercept_fraction > 0.0
            && rng.gen_bool(eve.intercept_fraction);
        if !kept {
            transcript.push(RoundRecord {
                round,
                kept,
                alice_bases: (a_pol_basis, a_phase_idx),
                bob_bases: (b_pol_basis, b_phase_idx),
                alice_bits: (0, 0),
                bob_bits: (0, 0),
                intercepted,
                eve_pol: None,
                eve_phase: None,
                sifted: false,
            });
            continue;
        }
        post_selected += 1;

        let to_basis = |idx: u8| if idx == 0 { PolBasis::Z } else { PolBasis::X };
        let pol = run_sector(
            &mut rng,
            state.f_pol,
            &pol_basis_vectors(to_basis(a_pol_basis)),
            &pol_basis_vectors(to_basis(b_pol_basis)),
            b_pol_basis,
            eve.kind,
            &pol_eve_bases,
            intercepted && attack_pol,
        );
        let phase = if with_phase_dof {
            Some(run_sector(
                &mut rng,
                g_phase,
                &equatorial_basis(alice_policy.phase_settings[a_phase_idx as usize]),
                &equatorial_basis(bob_policy.phase_settings[b_phase_idx as usize]),
                b_phase_idx,
                eve.kind,
                &phase_eve_bases,
                intercepted && attack_phase,
            ))
        } else {
            None
        };

        let bases_match = a_pol_basis == b_pol_basis
            && (!with_phase_dof || a_phase_idx == b_phase_idx);
        let (a_phase_bit, b_phase_bit, eve_phase_rec) = match &phase {
            Some(p) => (p.alice_bit, p.bob_bit, p.eve),
            None => (0, 0, None),
        };
        if bases_match {
            sifted += 1;
            let a_symbol = pol.alice_bit | (a_phase_bit << 1);
            let b_symbol = pol.bob_bit | (b_phase_bit << 1);
            alice_key.push(a_symbol);
            bob_key.push(b_symbol);
            let mut errs = u64::from(pol.alice_bit != pol.bob_bit);
            if with_phase_dof {
                errs += u64::from(a_phase_bit != b_phase_bit);
            }
            bit_errors += errs;
            symbol_errors += u64::from(errs > 0);

            pol_mi_table[pol.alice_bit as usize][record_symbol(pol.eve, pol.eve_certain)] += 1;
            if let Some(p) = &phase {
                phase_mi_table[p.alice_bit as usize][record_symbol(p.eve, p.eve_certain)] += 1;
            }
            let phase_certain = phase.as_ref().is_some_and(|p| p.eve_certain);
            let eve_symbol = record_symbol(pol.eve, pol.eve_certain)
                + RECORD_ALPHABET * record_symbol(eve_phase_rec, phase_certain);
            symbol_mi_table[a_symbol as usize][eve_symbol] += 1;

            let certain = intercepted
                && (!attack_pol || pol.eve_certain)
                && (!attack_phase || phase.as_ref().is_some_and(|p| p.eve_certain))
                && (attack_pol || attack_phase);
            full_certain += u64::from(certain);
            let guess_ok = pol.eve_guess == pol.alice_bit
                && (!with_phase_dof
                    || phase.as_ref().is_some_and(|p| p.eve_guess == p.alice_bit));
            guess_hits += u64::from(guess_ok);
        }
        transcript.push(RoundRecord {
            round,
            kept,
            alice_bases: (a_pol_basis, a_phase_idx),
            bob_bases: (b_pol_basis, b_phase_idx),
            alice_bits: (pol.alice_bit, a_phase_bit),
            bob_bits: (pol.bob_bit, b_phase_bit),
            intercepted,
            eve_pol: pol.eve,
            eve_phase: eve_phase_rec,
            sifted: bases_match,
        });
    }

    if sifted == 0 {
        return Err(Error::EmptySiftedSet);
    }

    let i_ae_mutual = mi_with_stderr(&symbol_mi_table)?;
    let pol_mi = mi_with_stderr(&pol_mi_table)?;
    let i_ae_per_qubit = if with_phase_dof {
        let phase_mi = mi_with_stderr(&phase_mi_table)?;
        ReportStat {
            value: 0.5 * (pol_mi.value + phase_mi.value),
            stderr: 0.5 * (pol_mi.stderr.powi(2) + phase_mi.stderr.powi(2)).sqrt(),
        }
    } else {
        pol_mi
    };
    let blind = 1.0 / n_symbols as f64;
    let guess = ReportStat::from_fraction(guess_hits, sifted);
    let report = ChannelReport {
        rounds: n_rounds,
        post_selected,
        sifted,
        bits_per_symbol,
        sifted_rate: ReportStat::from_fraction(sifted, post_selected),
        qber: ReportStat::from_fraction(bit_errors, sifted * bits_per_symbol as u64),
        symbol_error_rate: ReportStat::from_fraction(symbol_errors, sifted),
        i_ae_mutual,
        i_ae_per_qubit,
        p_full_symbol: ReportStat::from_fraction(full_certain, sifted),
        eve_guess_excess: ReportStat {
            value: guess.value - blind,
            stderr: guess.stderr,
        },
    };
    Ok(ProtocolOutcome {
        report,
        transcript,
        alice_key,
        bob_key,
    })
}

/// Runs the full d = 4 protocol (polarization and time-bin bits) for
/// `n_rounds` emitted pairs. Reproducible by seed; rounds consume
/// independent RNG substreams.
pub fn run_protocol(
    state: &DoubleEntangledState,
    n_rounds: u64,
    alice_policy: &ObserverPolicy,
    bob_policy: &ObserverPolicy,
    eve: &EveStrategy,
    seed: u64,
) -> Result<ProtocolOutcome> {
    run_channel(state, n_rounds, alice_policy, bob_policy, eve, seed, true)
}

/// The polarization-only baseline channel used as the denominator of the
/// information/disturbance comparison.
pub fn single_channel_baseline(
    n_rounds: u64,
    eve: &EveStrategy,
    seed: u64,
) -> Result<ProtocolOutcome> {
    run_channel(
        &DoubleEntangledState::ideal(),
        n_rounds,
        &ObserverPolicy::alice_default(),
        &ObserverPolicy::bob_default(),
        eve,
        seed,
        false,
    )
}

/// The pluggable Eve-information metric of the disturbance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InformationMetric {
    /// Mean per-bit Alice-Eve mutual information.
    PerQubitMutual,
    /// Probability that Eve's best full-symbol guess is right, above the
    /// blind-guess baseline.
    FullSymbolGuessExcess,
}

/// Outcome of the equal-information disturbance comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceRecord {
    pub metric: InformationMetric,
    pub kind: EveKind,
    pub target_information: f64,
    /// Intercept fractions achieving the target on each channel.
    pub eta_double: f64,
    pub eta_single: f64,
    /// Symbol error rate induced on the double channel at `eta_double`.
    pub double_disturbance: ReportStat,
    /// QBER induced on the single channel at `eta_single`.
    pub single_disturbance: ReportStat,
    pub ratio: f64,
    /// First-order propagated standard error of the ratio.
    pub ratio_stderr: f64,
}

fn metric_value(report: &ChannelReport, metric: InformationMetric) -> f64 {
    match metric {
        InformationMetric::PerQubitMutual => report.i_ae_per_qubit.value,
        InformationMetric::FullSymbolGuessExcess => report.eve_guess_excess.value,
    }
}

/// Finds, for each channel, the intercept fraction at which Eve's
/// information equals `target_information`, then compares the error rates
/// she inflicts. Both metrics are linear in the intercept fraction, so
/// the fraction is solved from the full-interception slope.
pub fn disturbance_ratio(
    kind: EveKind,
    metric: InformationMetric,
    target_information: f64,
    n_rounds: u64,
    seed: u64,
) -> Result<DisturbanceRecord> {
    if kind == EveKind::None {
        return Err(Error::InvalidParameter(
            "disturbance comparison needs an active eavesdropper".into(),
        ));
    }
    if !(target_information > 0.0) {
        return Err(Error::InvalidParameter(
            "target information must be positive".into(),
        ));
    }
    let state = DoubleEntangledState::ideal();
    let alice = ObserverPolicy::alice_default();
    let bob = ObserverPolicy::bob_default();
    let full = EveStrategy::new(kind, 1.0, EveTarget::Both)?;

    let slope_double = metric_value(
        &run_protocol(&state, n_rounds, &alice, &bob, &full, seed)?.report,
        metric,
    );
    let slope_single =
        metric_value(&single_channel_baseline(n_rounds, &full, seed ^ 1)?.report, metric);
    let eta_double = target_information / slope_double;
    let eta_single = target_information / slope_single;
    if !(0.0..=1.0).contains(&eta_double) || !(0.0..=1.0).contains(&eta_single) {
        return Err(Error::UnreachableTarget {
            target: target_information,
            max: slope_double.min(slope_single),
        });
    }
    let at_double = EveStrategy::new(kind, eta_double, EveTarget::Both)?;
    let at_single = EveStrategy::new(kind, eta_single, EveTarget::Both)?;
    let double_disturbance = run_protocol(&state, n_rounds, &alice, &bob, &at_double, seed ^ 2)?
        .report
        .symbol_error_rate;
    let single_disturbance = single_channel_baseline(n_rounds, &at_single, seed ^ 3)?
        .report
        .qber;
    let ratio = double_disturbance.value / single_disturbance.value;
    let ratio_stderr = ratio
        * ((double_disturbance.stderr / double_disturbance.value).powi(2)
            + (single_disturbance.stderr / single_disturbance.value).powi(2))
        .sqrt();
    Ok(DisturbanceRecord {
        metric,
        kind,
        target_information,
        eta_double,
        eta_single,
        double_disturbance,
        single_disturbance,
        ratio,
        ratio_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    const ROUNDS: u64 = 100_000;

    fn settings(basis: PolBasis, phase: f64) -> ObserverSettings {
        ObserverSettings::new(basis, phase).unwrap()
    }

    #[test]
    fn distribution_sums_to_one_and_factorizes() {
        let state = DoubleEntangledState::new(1.1, Complex64::new(0.6, 0.2)).unwrap();
        let a = settings(PolBasis::X, 0.4);
        let b = settings(PolBasis::Z, -0.9);
        let d = measurement_distribution(&state, &a, &b).unwrap();
        let mut total = 0.0;
        for pa in 0..2 {
            for pb in 0..2 {
                for fa in 0..2 {
                    for fb in 0..2 {
                        total += d.joint(pa, pb, fa, fb);
                    }
                }
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.central_slot_prob, 0.5);
        assert_abs_diff_eq!(d.both_central_prob, 0.25);
    }

    #[test]
    fn same_pol_basis_perfectly_correlated_at_unit_f() {
        let state = DoubleEntangledState::ideal();
        for basis in [PolBasis::Z, PolBasis::X] {
            let s = settings(basis, 0.0);
            let d = measurement_distribution(&state, &s, &s).unwrap();
            assert_abs_diff_eq!(d.pol[0][1], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.pol[1][0], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.pol[0][0] + d.pol[1][1], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn phase_fringe_argument() {
        // phi - alpha - beta = 0: correlated; = pi: anticorrelated.
        let state = DoubleEntangledState::new(0.7, Complex64::new(1.0, 0.0)).unwrap();
        let a = settings(PolBasis::Z, 0.5);
        let b0 = settings(PolBasis::Z, 0.2);
        let d0 = measurement_distribution(&state, &a, &b0).unwrap();
        assert_abs_diff_eq!(d0.phase[0][1] + d0.phase[1][0], 0.0, epsilon = 1e-12);
        let bpi = settings(PolBasis::Z, 0.2 - PI);
        let dpi = measurement_distribution(&state, &a, &bpi).unwrap();
        assert_abs_diff_eq!(dpi.phase[0][0] + dpi.phase[1][1], 0.0, epsilon = 1e-12);
        // Generic argument follows the cosine law.
        let bm = settings(PolBasis::Z, -0.3);
        let dm = measurement_distribution(&state, &a, &bm).unwrap();
        let same = (1.0 + (0.7_f64 - 0.5 - (-0.3)).cos()) / 2.0;
        assert_relative_eq!(dm.phase[0][0] + dm.phase[1][1], same, epsilon = 1e-12);
    }

    #[test]
    fn alice_marginal_independent_of_bob_settings() {
        let state = DoubleEntangledState::new(0.3, Complex64::new(0.4, 0.0)).unwrap();
        let a = settings(PolBasis::X, 1.0);
        let reference = measurement_distribution(&state, &a, &settings(PolBasis::Z, 0.1)).unwrap();
        let ref_marg = [
            reference.pol[0][0] + reference.pol[0][1],
            reference.pol[1][0] + reference.pol[1][1],
        ];
        for bob in [
            settings(PolBasis::Z, 2.0),
            settings(PolBasis::X, 0.0),
            settings(PolBasis::X, 1.4),
        ] {
            let d = measurement_distribution(&state, &a, &bob).unwrap();
            for i in 0..2 {
                assert_abs_diff_eq!(
                    d.pol[i][0] + d.pol[i][1],
                    ref_marg[i],
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(d.phase[i][0] + d.phase[i][1], 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn no_eve_gives_identical_keys_and_quarter_sifting() {
        let out = run_protocol(
            &DoubleEntangledState::ideal(),
            ROUNDS,
            &ObserverPolicy::alice_default(),
            &ObserverPolicy::bob_default(),
            &EveStrategy::none(),
            11,
        )
        .unwrap();
        assert_eq!(out.alice_key, out.bob_key);
        assert_abs_diff_eq!(out.report.qber.value, 0.0);
        assert_abs_diff_eq!(out.report.sifted_rate.value, 0.25, epsilon = 0.02);
        // Post-selection keeps about a quarter of the rounds.
        let kept = out.report.post_selected as f64 / out.report.rounds as f64;
        assert_abs_diff_eq!(kept, 0.25, epsilon = 0.02);
        assert!(out.report.i_ae_mutual.value < 0.01);
    }

    #[test]
    fn fixed_basis_full_interception_statistics() {
        let eve = EveStrategy::new(EveKind::FixedBasis, 1.0, EveTarget::Both).unwrap();
        let out = run_protocol(
            &DoubleEntangledState::ideal(),
            2 * ROUNDS,
            &ObserverPolicy::alice_default(),
            &ObserverPolicy::bob_default(),
            &eve,
            23,
        )
        .unwrap();
        let r = &out.report;
        assert_abs_diff_eq!(r.qber.value, 0.25, epsilon = 0.02);
        assert_abs_diff_eq!(r.symbol_error_rate.value, 7.0 / 16.0, epsilon = 0.02);
        assert_abs_diff_eq!(r.p_full_symbol.value, 0.25, epsilon = 0.02);
        assert_abs_diff_eq!(r.i_ae_per_qubit.value, 0.5, epsilon = 0.03);
        // Per-symbol information is two per-bit halves.
        assert_abs_diff_eq!(r.i_ae_mutual.value, 1.0, epsilon = 0.05);
        assert_abs_diff_eq!(r.eve_guess_excess.value, 5.0 / 16.0, epsilon = 0.02);
    }

    #[test]
    fn single_channel_fixed_basis_qber_quarter() {
        let eve = EveStrategy::new(EveKind::FixedBasis, 1.0, EveTarget::Both).unwrap();
        let out = single_channel_baseline(ROUNDS, &eve, 31).unwrap();
        assert_abs_diff_eq!(out.report.qber.value, 0.25, epsilon = 0.02);
        assert_abs_diff_eq!(out.report.i_ae_per_qubit.value, 0.5, epsilon = 0.03);
        assert_abs_diff_eq!(out.report.p_full_symbol.value, 0.5, epsilon = 0.02);
        assert_abs_diff_eq!(out.report.sifted_rate.value, 0.5, epsilon = 0.02);
    }

    #[test]
    fn breidbart_single_channel_information() {
        let eve = EveStrategy::new(EveKind::Breidbart, 1.0, EveTarget::Both).unwrap();
        let out = single_channel_baseline(2 * ROUNDS, &eve, 37).unwrap();
        assert_abs_diff_eq!(out.report.qber.value, 0.25, epsilon = 0.02);
        assert_abs_diff_eq!(out.report.i_ae_per_qubit.value, 0.399, epsilon = 0.03);
        // The Breidbart basis never coincides with a protocol basis.
        assert_abs_diff_eq!(out.report.p_full_symbol.value, 0.0);
    }

    #[test]
    fn breidbart_double_channel_disturbs_both_bits() {
        let eve = EveStrategy::new(EveKind::Breidbart, 1.0, EveTarget::Both).unwrap();
        let out = run_protocol(
            &DoubleEntangledState::ideal(),
            2 * ROUNDS,
            &ObserverPolicy::alice_default(),
            &ObserverPolicy::bob_default(),
            &eve,
            41,
        )
        .unwrap();
        assert_abs_diff_eq!(out.report.qber.value, 0.25, epsilon = 0.02);
        assert_abs_diff_eq!(out.report.symbol_error_rate.value, 7.0 / 16.0, epsilon = 0.02);
        assert_abs_diff_eq!(out.report.p_full_symbol.value, 0.0);
    }

    #[test]
    fn qber_and_information_monotone_in_intercept_fraction() {
        let mut qbers = Vec::new();
        let mut infos = Vec::new();
        for eta in [0.0, 0.5, 1.0] {
            let eve = EveStrategy::new(EveKind::FixedBasis, eta, EveTarget::Both).unwrap();
            let out = run_protocol(
                &DoubleEntangledState::ideal(),
                ROUNDS,
                &ObserverPolicy::alice_default(),
                &ObserverPolicy::bob_default(),
                &eve,
                57,
            )
            .unwrap();
            qbers.push(out.report.qber.value);
            infos.push(out.report.i_ae_mutual.value);
        }
        assert!(qbers[0] < qbers[1] && qbers[1] < qbers[2], "{qbers:?}");
        assert!(infos[0] < infos[1] && infos[1] < infos[2], "{infos:?}");
    }

    #[test]
    fn transcripts_are_seed_deterministic() {
        let eve = EveStrategy::new(EveKind::FixedBasis, 0.7, EveTarget::Both).unwrap();
        let run = || {
            run_protocol(
                &DoubleEntangledState::ideal(),
                2000,
                &ObserverPolicy::alice_default(),
                &ObserverPolicy::bob_default(),
                &eve,
                99,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.alice_key, b.alice_key);
        let c = run_protocol(
            &DoubleEntangledState::ideal(),
            2000,
            &ObserverPolicy::alice_default(),
            &ObserverPolicy::bob_default(),
            &eve,
            100,
        )
        .unwrap();
        assert_ne!(a.transcript, c.transcript);
    }

    #[test]
    fn pol_and_phase_outcomes_are_independent_without_eve() {
        let out = run_protocol(
            &DoubleEntangledState::ideal(),
            2 * ROUNDS,
            &ObserverPolicy::alice_default(),
            &ObserverPolicy::bob_default(),
            &EveStrategy::none(),
            71,
        )
        .unwrap();
        let mut table = vec![vec![0u64; 2]; 2];
        for sym in &out.alice_key {
            table[(sym & 1) as usize][(sym >> 1) as usize] += 1;
        }
        let mi = mutual_information(&table).unwrap();
        assert!(mi < 1e-3, "pol/phase mutual information {mi}");
    }

    #[test]
    fn disturbance_ratios_exceed_one() {
        for kind in [EveKind::FixedBasis, EveKind::Breidbart] {
            for metric in [
                InformationMetric::PerQubitMutual,
                InformationMetric::FullSymbolGuessExcess,
            ] {
                let rec = disturbance_ratio(kind, metric, 0.15, ROUNDS, 123).unwrap();
                assert!(
                    rec.ratio > 1.0,
                    "{kind:?}/{metric:?} ratio {} not above 1",
                    rec.ratio
                );
            }
        }
    }

    #[test]
    fn fixed_basis_ratio_values() {
        let mi = disturbance_ratio(
            EveKind::FixedBasis,
            InformationMetric::PerQubitMutual,
            0.2,
            2 * ROUNDS,
            7,
        )
        .unwrap();
        // Equal intercept fractions on both channels: the ratio is the
        // symbol-vs-bit error ratio (7/16) / (1/4) = 1.75.
        assert_abs_diff_eq!(mi.ratio, 1.75, epsilon = 0.1);
        let guess = disturbance_ratio(
            EveKind::FixedBasis,
            InformationMetric::FullSymbolGuessExcess,
            0.2,
            2 * ROUNDS,
            7,
        )
        .unwrap();
        // (7/16)/(5/16) / ((1/4)/(1/4)) = 1.4.
        assert_abs_diff_eq!(guess.ratio, 1.4, epsilon = 0.1);
    }

    #[test]
    fn unreachable_target_flagged() {
        let err = disturbance_ratio(
            EveKind::FixedBasis,
            InformationMetric::PerQubitMutual,
            0.9,
            ROUNDS,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnreachableTarget { .. }));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(
            run_protocol(
                &DoubleEntangledState::ideal(),
                0,
                &ObserverPolicy::alice_default(),
                &ObserverPolicy::bob_default(),
                &EveStrategy::none(),
                1,
            ),
            Err(Error::NoRounds)
        ));
        assert!(EveStrategy::new(EveKind::FixedBasis, 1.5, EveTarget::Both).is_err());
        assert!(DoubleEntangledState::new(-0.1, Complex64::new(1.0, 0.0)).is_err());
    }
}
