//! Command-line surface of the biphoton toolkit: reads one TOML
//! experiment configuration, runs a subcommand, and writes a CSV whose
//! leading '#' lines record version, command, seed and config hash, so
//! identical inputs give byte-identical outputs.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

// `!(x > 0)` deliberately rejects NaN together with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use biphoton::bell::{ch_optimize, loophole_map, ChForm};
use biphoton::calibration::{simulate_calibration, CalibrationScenario};
use biphoton::casado::{casado_rate_bound, exclusion_verdict, CasadoParameters};
use biphoton::doubleslit::{
    chi_square_compare, dbb_joint_pattern, sqm_joint_density, sqm_joint_pattern,
    DetectorPlane, FitModel, SlitGeometry,
};
use biphoton::mc::{poisson_sample, RngStream};
use biphoton::polarization::{coincidence_prob, AnalyzerSetting, BiphotonState};
use biphoton::qkd::{
    disturbance_ratio, run_protocol, ChannelReport, DoubleEntangledState, EveKind,
    EveStrategy, EveTarget, InformationMetric, ObserverPolicy, ProtocolOutcome,
};

use config::ExperimentConfig;

const UNITS_NOTE: &str = "Units: lengths in meters, times in seconds, rates in 1/s, \
analyzer angles in degrees, interferometer phases in radians. \
All CSV output starts with '#' metadata lines (version, command, seed, config hash); \
re-running a command with the same config and seed produces byte-identical output.";

#[derive(Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Entangled-biphoton experiment simulations",
    long_about = None,
    after_help = UNITS_NOTE,
    propagate_version = true
)]
struct Cli {
    /// Path to the TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the RNG seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coincidence fringe: sweep one analyzer with the other fixed.
    ChScan {
        /// Fixed-arm (arm 1) analyzer angle in degrees; defaults to the
        /// config's theta1.
        #[arg(long)]
        fixed_angle: Option<f64>,
        /// Number of sweep steps over 180 degrees.
        #[arg(long, default_value_t = 180)]
        steps: usize,
    },
    /// Maximize the CH sum over the four analyzer angles.
    ChOptimize,
    /// Maximized strict CH over an (f, eta) grid; header row is the eta
    /// axis, first column the f axis.
    LoopholeMap {
        #[arg(long, default_value_t = 0.02)]
        f_min: f64,
        #[arg(long, default_value_t = 1.0)]
        f_max: f64,
        #[arg(long, default_value_t = 50)]
        f_steps: usize,
        #[arg(long, default_value_t = 0.55)]
        eta_min: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_max: f64,
        #[arg(long, default_value_t = 50)]
        eta_steps: usize,
    },
    /// Local-realistic rate bound, solved absorption time and verdict.
    Casado,
    /// Detector-calibration Monte Carlo, one row per replica.
    Calibrate,
    /// Two-photon double-slit patterns and the chi-square comparison.
    DoubleSlit {
        #[arg(long, value_enum)]
        mode: SlitMode,
    },
    /// d = 4 key distribution with optional intercept-resend Eve.
    Qkd {
        #[command(subcommand)]
        sub: QkdCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SlitMode {
    /// Normalized quantum-mechanical joint pattern.
    Sqm,
    /// Semiplane-restricted comparator pattern.
    Dbb,
    /// Synthetic-counts chi-square comparison of both fits.
    Chi2,
}

#[derive(Subcommand)]
enum QkdCommand {
    /// One protocol run; writes the channel report, optionally the
    /// per-round transcript.
    Run {
        /// Also write the full round transcript to this CSV path.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Channel statistics versus Eve's intercept fraction.
    EveSweep,
    /// Equal-information disturbance ratios for both strategies and
    /// both information metrics.
    Ratio,
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<biphoton::Error> for CliError {
    fn from(e: biphoton::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let raw = fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ExperimentConfig = toml::from_str(
        std::str::from_utf8(&raw)
            .map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let config_hash = hex::encode(Sha256::digest(&raw));

    let body = match &cli.command {
        Command::ChScan { fixed_angle, steps } => ch_scan(&cfg, *fixed_angle, *steps)?,
        Command::ChOptimize => ch_optimize_cmd(&cfg)?,
        Command::LoopholeMap {
            f_min,
            f_max,
            f_steps,
            eta_min,
            eta_max,
            eta_steps,
        } => loophole_map_cmd((*f_min, *f_max, *f_steps), (*eta_min, *eta_max, *eta_steps))?,
        Command::Casado => casado_cmd(&cfg)?,
        Command::Calibrate => calibrate_cmd(&cfg, seed)?,
        Command::DoubleSlit { mode } => double_slit_cmd(&cfg, *mode, seed)?,
        Command::Qkd { sub } => match sub {
            QkdCommand::Run { transcript } => {
                let outcome = qkd_run(&cfg, seed)?;
                if let Some(t_path) = transcript {
                    let text = format!(
                        "{}{}",
                        metadata("qkd run (transcript)", seed, &config_hash),
                        transcript_csv(&outcome)
                    );
                    fs::write(t_path, text).map_err(|e| {
                        CliError::Runtime(format!("cannot write {}: {e}", t_path.display()))
                    })?;
                }
                qkd_report_csv(&outcome)
            }
            QkdCommand::EveSweep => qkd_eve_sweep(&cfg, seed)?,
            QkdCommand::Ratio => qkd_ratio(&cfg, seed)?,
        },
    };

    let text = format!("{}{}", metadata(command_name(&cli.command), seed, &config_hash), body);
    match &cli.output {
        Some(out) => fs::write(out, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", out.display()))),
        None => {
            use std::io::Write;
            // A closed pipe downstream (e.g. `| head`) is not an error.
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Runtime(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::ChScan { .. } => "ch-scan",
        Command::ChOptimize => "ch-optimize",
        Command::LoopholeMap { .. } => "loophole-map",
        Command::Casado => "casado",
        Command::Calibrate => "calibrate",
        Command::DoubleSlit { mode: SlitMode::Sqm } => "double-slit sqm",
        Command::DoubleSlit { mode: SlitMode::Dbb } => "double-slit dbb",
        Command::DoubleSlit { mode: SlitMode::Chi2 } => "double-slit chi2",
        Command::Qkd { sub: QkdCommand::Run { .. } } => "qkd run",
        Command::Qkd { sub: QkdCommand::EveSweep } => "qkd eve-sweep",
        Command::Qkd { sub: QkdCommand::Ratio } => "qkd ratio",
    }
}

fn metadata(command: &str, seed: u64, config_hash: &str) -> String {
    format!(
        "# biphoton {}\n# command: {}\n# seed: {}\n# config-sha256: {}\n",
        env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config_hash
    )
}

/// Errors caused by values coming from the config file are config errors.
fn from_config<T>(r: std::result::Result<T, biphoton::Error>) -> Result<T> {
    r.map_err(|e| CliError::Config(e.to_string()))
}

fn state_from_config(cfg: &ExperimentConfig) -> Result<BiphotonState<f64>> {
    from_config(BiphotonState::real(cfg.source.f))
}

fn analyzer1(cfg: &ExperimentConfig, theta: f64) -> Result<AnalyzerSetting<f64>> {
    from_config(AnalyzerSetting::new(
        theta,
        cfg.analyzers.eps_par1,
        cfg.analyzers.eps_perp1,
    ))
}

fn analyzer2(cfg: &ExperimentConfig, theta: f64) -> Result<AnalyzerSetting<f64>> {
    from_config(AnalyzerSetting::new(
        theta,
        cfg.analyzers.eps_par2,
        cfg.analyzers.eps_perp2,
    ))
}

fn ch_scan(cfg: &ExperimentConfig, fixed_angle: Option<f64>, steps: usize) -> Result<String> {
    if steps < 4 {
        return Err(CliError::Config("ch-scan needs at least 4 steps".into()));
    }
    let state = state_from_config(cfg)?;
    let fixed = analyzer1(cfg, fixed_angle.unwrap_or(cfg.analyzers.angles[0]))?;
    let mut out = String::from("angle_deg,coincidence_probability\n");
    for k in 0..steps {
        let theta = 180.0 * k as f64 / steps as f64;
        let p = coincidence_prob(&state, &fixed, &analyzer2(cfg, theta)?)?;
        writeln!(out, "{theta},{p}").unwrap();
    }
    Ok(out)
}

fn ch_optimize_cmd(cfg: &ExperimentConfig) -> Result<String> {
    let state = state_from_config(cfg)?;
    // Validate the config transmittances up front.
    analyzer1(cfg, 0.0)?;
    analyzer2(cfg, 0.0)?;
    let (best, result) = ch_optimize(
        &state,
        (cfg.efficiencies.eta1, cfg.efficiencies.eta2),
        (cfg.analyzers.eps_par1, cfg.analyzers.eps_perp1),
        (cfg.analyzers.eps_par2, cfg.analyzers.eps_perp2),
        ChForm::Substituted,
    )?;
    let mut out = String::from("quantity,value\n");
    let [t1, t2, t1p, t2p] = best.angles;
    writeln!(out, "theta1_deg,{t1}").unwrap();
    writeln!(out, "theta2_deg,{t2}").unwrap();
    writeln!(out, "theta1_prime_deg,{t1p}").unwrap();
    writeln!(out, "theta2_prime_deg,{t2p}").unwrap();
    writeln!(out, "ch_per_pair,{}", result.value).unwrap();
    writeln!(
        out,
        "violation,{}",
        if result.value > 0.0 { "yes" } else { "no violation" }
    )
    .unwrap();
    Ok(out)
}

fn loophole_map_cmd(f_spec: (f64, f64, usize), eta_spec: (f64, f64, usize)) -> Result<String> {
    let grid = |(lo, hi, n): (f64, f64, usize), name: &str| -> Result<Vec<f64>> {
        if n < 2 || !(hi > lo) {
            return Err(CliError::Config(format!(
                "{name} grid must be strictly increasing with at least 2 points"
            )));
        }
        Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect())
    };
    let f_grid = grid(f_spec, "f")?;
    let eta_grid = grid(eta_spec, "eta")?;
    let map = loophole_map(&f_grid, &eta_grid)?;
    let mut out = String::from("f\\eta");
    for eta in &map.eta_axis {
        write!(out, ",{eta}").unwrap();
    }
    out.push('\n');
    for (f, row) in map.f_axis.iter().zip(&map.ch_over_n) {
        write!(out, "{f}").unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn casado_cmd(cfg: &ExperimentConfig) -> Result<String> {
    let c = &cfg.casado;
    let params = CasadoParameters {
        eta: c.eta,
        focal: c.focal,
        active_radius: c.active_radius,
        coherence_time: c.coherence_time,
        distance: c.distance,
        wavelength: c.wavelength,
        active_depth: c.active_depth,
        absorption_time: c.absorption_time,
    };
    from_config(params.validate())?;
    let bound = casado_rate_bound(&params)?;
    let record = exclusion_verdict(
        &params,
        c.observed_singles_rate,
        c.observed_visibility,
        c.observed_ch_positive,
        None,
        None,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = String::from("quantity,value\n");
    writeln!(out, "rate_bound_per_s,{bound}").unwrap();
    writeln!(out, "solved_absorption_time_s,{}", record.solved_t).unwrap();
    writeln!(out, "t_limit_s,{}", record.t_limit).unwrap();
    writeln!(out, "verdict,{:?}", record.verdict).unwrap();
    writeln!(out, "rationale,{}", record.rationale).unwrap();
    Ok(out)
}

fn calibrate_cmd(cfg: &ExperimentConfig, seed: u64) -> Result<String> {
    let c = &cfg.calibration;
    if c.seeds == 0 {
        return Err(CliError::Config("calibration.seeds must be positive".into()));
    }
    let mut out = String::from("replica,eta1_hat,stderr,n1,n2,nc,accidental_estimate\n");
    for k in 0..c.seeds {
        let scenario = CalibrationScenario {
            pair_rate: c.pair_rate,
            eta1: c.eta1,
            eta2: c.eta2,
            dark1: c.dark1,
            dark2: c.dark2,
            coincidence_window: c.coincidence_window,
            acquisition: c.acquisition,
            seed: seed.wrapping_add(k),
            dead_time: c.dead_time,
        };
        if k == 0 {
            from_config(scenario.validate())?;
        }
        let res = simulate_calibration(&scenario)?;
        writeln!(
            out,
            "{k},{},{},{},{},{},{}",
            res.eta1_hat, res.stderr, res.raw.n1, res.raw.n2, res.raw.nc, res.raw.accidental_estimate
        )
        .unwrap();
    }
    Ok(out)
}

fn slit_setup(cfg: &ExperimentConfig) -> Result<(SlitGeometry<f64>, DetectorPlane<f64>, DetectorPlane<f64>)> {
    let s = &cfg.slit;
    let geometry = from_config(SlitGeometry::new(s.separation, s.width, s.wavelength))?
        .with_relative_phase(s.relative_phase);
    let plane1 = from_config(DetectorPlane::scan(
        s.plane1_distance,
        s.aperture1,
        s.x_min,
        s.x_max,
        s.points,
    ))?;
    let plane2 = from_config(DetectorPlane::scan(
        s.plane2_distance,
        s.aperture2,
        s.x_min,
        s.x_max,
        s.points,
    ))?;
    Ok((geometry, plane1, plane2))
}

fn double_slit_cmd(cfg: &ExperimentConfig, mode: SlitMode, seed: u64) -> Result<String> {
    let (geometry, plane1, plane2) = slit_setup(cfg)?;
    match mode {
        SlitMode::Sqm | SlitMode::Dbb => {
            let pattern = match mode {
                SlitMode::Sqm => sqm_joint_pattern(&geometry, &plane1, &plane2)?,
                _ => dbb_joint_pattern(&geometry, &plane1, &plane2)?,
            };
            let mut out = String::from("x1\\x2");
            for x2 in &pattern.x2 {
                write!(out, ",{x2}").unwrap();
            }
            out.push('\n');
            for (x1, row) in pattern.x1.iter().zip(&pattern.density) {
                write!(out, "{x1}").unwrap();
                for v in row {
                    write!(out, ",{v}").unwrap();
                }
                out.push('\n');
            }
            Ok(out)
        }
        SlitMode::Chi2 => {
            let s = &cfg.slit;
            if s.chi2_seeds == 0 {
                return Err(CliError::Config("slit.chi2_seeds must be positive".into()));
            }
            // Point-like cut along x1 at the fixed partner position.
            let narrow1 = from_config(DetectorPlane::new(s.plane1_distance, s.aperture1, vec![]))?;
            let narrow2 = from_config(DetectorPlane::new(s.plane2_distance, s.aperture2, vec![]))?;
            let model: Vec<f64> = plane1
                .positions
                .iter()
                .map(|&x| sqm_joint_density(&geometry, &narrow1, &narrow2, x, s.fixed_x2))
                .collect::<std::result::Result<_, _>>()?;
            let peak = model.iter().cloned().fold(0.0, f64::max);
            if !(peak > 0.0) {
                return Err(CliError::Runtime("model pattern is identically zero".into()));
            }
            let amplitude = s.counts_scale / peak;
            let mut sqm_values = Vec::new();
            let mut linear_values = Vec::new();
            let mut out = String::from("replica,sqm_reduced_chi2,linear_reduced_chi2\n");
            for k in 0..s.chi2_seeds {
                let mut rng = RngStream::new(seed, k);
                let data: Vec<(f64, f64, f64)> = plane1
                    .positions
                    .iter()
                    .zip(&model)
                    .map(|(&x, &m)| {
                        let count = poisson_sample(&mut rng, amplitude * m)? as f64;
                        Ok((x, count, count.max(1.0).sqrt()))
                    })
                    .collect::<std::result::Result<_, biphoton::Error>>()?;
                let sqm = chi_square_compare(&data, FitModel::Scaled(&model), false)?
                    .reduced_chi_square;
                let linear = chi_square_compare(&data, FitModel::Linear, false)?
                    .reduced_chi_square;
                writeln!(out, "{k},{sqm},{linear}").unwrap();
                sqm_values.push(sqm);
                linear_values.push(linear);
            }
            let median = |v: &mut Vec<f64>| {
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v[v.len() / 2]
            };
            writeln!(
                out,
                "median,{},{}",
                median(&mut sqm_values),
                median(&mut linear_values)
            )
            .unwrap();
            Ok(out)
        }
    }
}

fn eve_strategy(cfg: &ExperimentConfig, fraction: f64) -> Result<EveStrategy> {
    let kind = match cfg.qkd.eve.as_str() {
        "none" => EveKind::None,
        "fixed-basis" => EveKind::FixedBasis,
        "breidbart" => EveKind::Breidbart,
        other => {
            return Err(CliError::Config(format!(
                "qkd.eve must be none, fixed-basis or breidbart, got {other:?}"
            )))
        }
    };
    from_config(EveStrategy::new(kind, fraction, EveTarget::Both))
}

fn qkd_state(cfg: &ExperimentConfig) -> Result<DoubleEntangledState> {
    from_config(DoubleEntangledState::new(
        cfg.qkd.phi,
        Complex64::new(cfg.qkd.f_pol_re, cfg.qkd.f_pol_im),
    ))
}

fn qkd_run(cfg: &ExperimentConfig, seed: u64) -> Result<ProtocolOutcome> {
    let eve = eve_strategy(cfg, cfg.qkd.intercept_fraction)?;
    Ok(run_protocol(
        &qkd_state(cfg)?,
        cfg.qkd.rounds,
        &ObserverPolicy::alice_default(),
        &ObserverPolicy::bob_default(),
        &eve,
        seed,
    )?)
}

fn report_rows(out: &mut String, report: &ChannelReport) {
    writeln!(out, "rounds,{},", report.rounds).unwrap();
    writeln!(out, "post_selected,{},", report.post_selected).unwrap();
    writeln!(out, "sifted,{},", report.sifted).unwrap();
    writeln!(out, "bits_per_symbol,{},", report.bits_per_symbol).unwrap();
    for (name, stat) in [
        ("sifted_rate", &report.sifted_rate),
        ("qber", &report.qber),
        ("symbol_error_rate", &report.symbol_error_rate),
        ("i_ae_mutual_bits", &report.i_ae_mutual),
        ("i_ae_per_qubit_bits", &report.i_ae_per_qubit),
        ("p_full_symbol", &report.p_full_symbol),
        ("eve_guess_excess", &report.eve_guess_excess),
    ] {
        writeln!(out, "{name},{},{}", stat.value, stat.stderr).unwrap();
    }
}

fn qkd_report_csv(outcome: &ProtocolOutcome) -> String {
    let mut out = String::from("quantity,value,stderr\n");
    report_rows(&mut out, &outcome.report);
    writeln!(
        out,
        "keys_identical,{},",
        if outcome.alice_key == outcome.bob_key { 1 } else { 0 }
    )
    .unwrap();
    out
}

fn transcript_csv(outcome: &ProtocolOutcome) -> String {
    let mut out = String::from(
        "round,kept,alice_pol_basis,alice_phase_setting,bob_pol_basis,bob_phase_setting,\
         alice_pol_bit,alice_phase_bit,bob_pol_bit,bob_phase_bit,intercepted,\
         eve_pol_basis,eve_pol_outcome,eve_phase_basis,eve_phase_outcome,sifted\n",
    );
    let opt = |r: Option<biphoton::qkd::EveRecord>| match r {
        Some(rec) => (rec.basis.to_string(), rec.outcome.to_string()),
        None => (String::from("-"), String::from("-")),
    };
    for rec in &outcome.transcript {
        let (epb, epo) = opt(rec.eve_pol);
        let (efb, efo) = opt(rec.eve_phase);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            rec.round,
            u8::from(rec.kept),
            rec.alice_bases.0,
            rec.alice_bases.1,
            rec.bob_bases.0,
            rec.bob_bases.1,
            rec.alice_bits.0,
            rec.alice_bits.1,
            rec.bob_bits.0,
            rec.bob_bits.1,
            u8::from(rec.intercepted),
            epb,
            epo,
            efb,
            efo,
            u8::from(rec.sifted),
        )
        .unwrap();
    }
    out
}

fn qkd_eve_sweep(cfg: &ExperimentConfig, seed: u64) -> Result<String> {
    if cfg.qkd.eve == "none" {
        return Err(CliError::Config(
            "qkd eve-sweep needs qkd.eve set to fixed-basis or breidbart".into(),
        ));
    }
    let state = qkd_state(cfg)?;
    let mut out = String::from(
        "intercept_fraction,qber,qber_stderr,symbol_error_rate,i_ae_per_qubit_bits,p_full_symbol\n",
    );
    for k in 0..5 {
        let fraction = k as f64 / 4.0;
        let eve = eve_strategy(cfg, fraction)?;
        let outcome = run_protocol(
            &state,
            cfg.qkd.rounds,
            &ObserverPolicy::alice_default(),
            &ObserverPolicy::bob_default(),
            &eve,
            seed,
        )?;
        let r = &outcome.report;
        writeln!(
            out,
            "{fraction},{},{},{},{},{}",
            r.qber.value,
            r.qber.stderr,
            r.symbol_error_rate.value,
            r.i_ae_per_qubit.value,
            r.p_full_symbol.value
        )
        .unwrap();
    }
    Ok(out)
}

fn qkd_ratio(cfg: &ExperimentConfig, seed: u64) -> Result<String> {
    let mut out = String::from(
        "strategy,metric,target_information,eta_double,eta_single,\
         double_disturbance,single_disturbance,ratio,ratio_stderr\n",
    );
    for kind in [EveKind::FixedBasis, EveKind::Breidbart] {
        for metric in [
            InformationMetric::PerQubitMutual,
            InformationMetric::FullSymbolGuessExcess,
        ] {
            let rec = disturbance_ratio(
                kind,
                metric,
                cfg.qkd.target_information,
                cfg.qkd.ratio_rounds,
                seed,
            )?;
            writeln!(
                out,
                "{kind:?},{metric:?},{},{},{},{},{},{},{}",
                rec.target_information,
                rec.eta_double,
                rec.eta_single,
                rec.double_disturbance.value,
                rec.single_disturbance.value,
                rec.ratio,
                rec.ratio_stderr
            )
            .unwrap();
        }
    }
    Ok(out)
}
