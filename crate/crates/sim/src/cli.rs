//! The `hcm` command-line tool.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hcm_core::aco_ofdm::AcoOfdm;
use hcm_core::analysis;
use hcm_core::channel::dbm_to_watts;
use hcm_core::hcm::{HcmCodec, HcmVariant, Interleaver};
use hcm_core::interleaver_opt::{isi_cost, optimize_interleaver, EXHAUSTIVE_MAX_N};
use hcm_core::link::{fill_bits, Scheme};
use hcm_core::transforms::BinaryHadamard;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Noise, RunConfig};
use crate::formats::{curve_to_csv, format_permutation, write_atomic, RunManifest};
use crate::presets::{self, NamedSpec};
use crate::sweep::{self, SweepSpec, DEFAULT_SEED};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 1,
    Spec = 2,
    StopRule = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

fn config_err(message: impl Into<String>) -> Failure {
    Failure {
        exit: Exit::Config,
        message: message.into(),
    }
}

fn spec_err(message: impl std::fmt::Display) -> Failure {
    Failure {
        exit: Exit::Spec,
        message: message.to_string(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "hcm", version, about = "Hadamard coded modulation and ACO-OFDM link simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run BER-versus-power sweeps and write CSV plus manifest files.
    Simulate(SimulateArgs),
    /// Evaluate closed-form link expressions; prints JSON.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Search for a chip interleaver for a dispersive channel.
    OptimizeInterleaver(OptimizeArgs),
    /// Peak-to-average power statistics of transmit waveforms; prints JSON.
    Papr(PaprArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sectioned TOML run configuration.
    #[arg(long, conflicts_with_all = ["preset", "manifest"])]
    pub config: Option<PathBuf>,
    /// Built-in experiment set: fig6 or fig7.
    #[arg(long, conflicts_with = "manifest")]
    pub preset: Option<String>,
    /// Rerun the sweep recorded in a manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub cp_len: Option<usize>,
    /// Channel impulse response, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub taps: Option<Vec<f64>>,
    /// Noise variance in dBm, or `off`.
    #[arg(long, value_parser = Noise::parse, allow_hyphen_values = true)]
    pub noise_dbm: Option<Noise>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// Average optical power grid in dBm: start:stop:step or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub power: Option<String>,
    #[arg(long)]
    pub min_errors: Option<u64>,
    #[arg(long)]
    pub max_bits: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Permutation file for interleaved HCM.
    #[arg(long)]
    pub interleaver: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file stem (single sweeps only).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Exit with the stop-rule code if any point ran out of bits.
    #[arg(long)]
    pub strict: bool,
}

impl SimulateArgs {
    fn has_sweep_overrides(&self) -> bool {
        self.scheme.is_some()
            || self.n.is_some()
            || self.m.is_some()
            || self.cp_len.is_some()
            || self.taps.is_some()
            || self.noise_dbm.is_some()
            || self.p0.is_some()
            || self.power.is_some()
            || self.interleaver.is_some()
            || self.name.is_some()
    }

    fn overrides(&self) -> RunConfig {
        let mut c = RunConfig::default();
        c.modem.scheme = self.scheme.clone();
        c.modem.n = self.n;
        c.modem.m = self.m;
        c.modem.cp_len = self.cp_len;
        c.channel.taps = self.taps.clone();
        c.channel.noise_dbm = self.noise_dbm;
        c.channel.p0 = self.p0;
        c.sweep.power = self.power.clone();
        c.sweep.min_errors = self.min_errors;
        c.sweep.max_bits = self.max_bits;
        c.sweep.seed = self.seed;
        c.sweep.interleaver = self.interleaver.clone();
        c.run.workers = self.workers;
        c.run.name = self.name.clone();
        c
    }

    fn apply_run_overrides(&self, spec: &mut SweepSpec) {
        if let Some(v) = self.min_errors {
            spec.stop.min_errors = v;
        }
        if let Some(v) = self.max_bits {
            spec.stop.max_bits = v;
        }
        if let Some(v) = self.seed {
            spec.base_seed = v;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    /// Gaussian tail probability.
    Q {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// ACO-OFDM average optical power from pre-clip sigma.
    AcoPower {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
    },
    /// ACO-OFDM upper-clipping noise variance.
    ClipVariance {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
    },
    /// ACO-OFDM data-carrier SNR.
    AcoSnr {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        #[arg(long, allow_hyphen_values = true)]
        noise_dbm: f64,
    },
    /// Pre-clip sigma giving an ACO-OFDM average power.
    AcoSigma {
        #[arg(long, allow_hyphen_values = true)]
        power_dbm: f64,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
    },
    /// Square M-QAM BER at a linear SNR.
    BerOfdm {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        snr: f64,
    },
    /// M-PAM HCM BER with sigma equal to the average optical power.
    BerHcm {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        noise_std: f64,
    },
    /// M-PAM HCM BER at the decoder output for a given average power.
    BerHcmDecoder {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        noise_std: f64,
    },
    /// Bits per chip.
    Rate {
        #[arg(long, default_value = "hcm")]
        scheme: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub taps: Vec<f64>,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Annealing moves (unused when the search is exhaustive).
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PaprArgs {
    #[arg(long, default_value = "hcm")]
    pub scheme: String,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub symbols: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Evaluate a given chip vector instead of a random ensemble.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub vector: Option<Vec<f64>>,
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Config as i32 } else { Exit::Ok as i32 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code as i32,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.exit as i32
        }
    }
}

pub fn run(cli: Cli) -> Result<Exit, Failure> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Analyze(a) => analyze(a),
        Command::OptimizeInterleaver(a) => optimize(&a),
        Command::Papr(a) => papr(&a),
    }
}

fn simulate(args: &SimulateArgs) -> Result<Exit, Failure> {
    let mut workers = args.workers;
    let specs: Vec<NamedSpec> = if let Some(path) = &args.manifest {
        if args.has_sweep_overrides() || args.min_errors.is_some() || args.max_bits.is_some() || args.seed.is_some() {
            return Err(config_err("--manifest reruns a recorded sweep and takes no sweep flags"));
        }
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let m = RunManifest::from_json(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        vec![NamedSpec {
            name: m.name,
            spec: m.spec,
        }]
    } else if let Some(name) = &args.preset {
        if args.has_sweep_overrides() {
            return Err(config_err("presets accept only --min-errors, --max-bits, --seed and --workers"));
        }
        let mut specs = presets::by_name(name).ok_or_else(|| config_err(format!("unknown preset `{name}`")))?;
        for s in &mut specs {
            args.apply_run_overrides(&mut s.spec);
        }
        specs
    } else {
        let mut cfg = match &args.config {
            Some(p) => RunConfig::load(p).map_err(config_err)?,
            None => RunConfig::default(),
        };
        cfg.overlay(args.overrides());
        let spec = cfg.resolve().map_err(config_err)?;
        workers = workers.or(cfg.run.workers);
        let name = cfg.run.name.clone().unwrap_or_else(|| spec.scheme.name().to_string());
        vec![NamedSpec { name, spec }]
    };

    for s in &specs {
        if s.spec.stop.unreachable() {
            return Err(Failure {
                exit: Exit::StopRule,
                message: format!(
                    "{}: stop rule can never be met (min_errors {} with max_bits {})",
                    s.name, s.spec.stop.min_errors, s.spec.stop.max_bits
                ),
            });
        }
        s.spec.validate().map_err(|e| spec_err(format!("{}: {e}", s.name)))?;
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| config_err(format!("{}: {e}", args.out_dir.display())))?;

    let pool = sweep::pool(workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())));
    let mut any_flagged = false;
    for s in &specs {
        let curve = sweep::run_sweep(&s.spec, &pool).map_err(spec_err)?;
        let csv_name = format!("{}.csv", s.name);
        let csv_path = args.out_dir.join(&csv_name);
        let manifest = RunManifest::new(&s.name, &csv_name, &s.spec, &curve);
        write_output(&csv_path, &curve_to_csv(&curve))?;
        write_output(&args.out_dir.join(format!("{}.manifest.json", s.name)), &manifest.to_json())?;
        let flagged = manifest.flagged.len();
        any_flagged |= flagged > 0;
        println!(
            "{}: {} points, {} flagged -> {}",
            s.name,
            curve.points.len(),
            flagged,
            csv_path.display()
        );
    }
    Ok(if args.strict && any_flagged { Exit::StopRule } else { Exit::Ok })
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn emit(value: serde_json::Value) {
    use std::io::Write;
    // a closed pipe on stdout is not an error for a report
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&value).expect("json"));
}

fn analyze(cmd: AnalyzeCmd) -> Result<Exit, Failure> {
    let value = match cmd {
        AnalyzeCmd::Q { x } => json!({"op": "q", "x": x, "value": analysis::q_function(x)}),
        AnalyzeCmd::AcoPower { sigma, p0 } => {
            let v = analysis::aco_average_power(sigma, p0).map_err(spec_err)?;
            json!({"op": "aco-power", "sigma": sigma, "p0": p0, "value": v})
        }
        AnalyzeCmd::ClipVariance { sigma, p0 } => {
            let v = analysis::aco_clip_variance(sigma, p0).map_err(spec_err)?;
            json!({"op": "clip-variance", "sigma": sigma, "p0": p0, "value": v})
        }
        AnalyzeCmd::AcoSnr { sigma, p0, noise_dbm } => {
            let v = analysis::aco_snr(sigma, p0, dbm_to_watts(noise_dbm)).map_err(spec_err)?;
            json!({"op": "aco-snr", "sigma": sigma, "p0": p0, "noise_dbm": noise_dbm, "value": v})
        }
        AnalyzeCmd::AcoSigma { power_dbm, p0 } => {
            let v = analysis::aco_sigma_for_power(dbm_to_watts(power_dbm), p0).map_err(spec_err)?;
            json!({"op": "aco-sigma", "power_dbm": power_dbm, "p0": p0, "value": v})
        }
        AnalyzeCmd::BerOfdm { m, snr } => {
            let v = analysis::ber_ofdm_analytic(m, snr).map_err(spec_err)?;
            json!({"op": "ber-ofdm", "m": m, "snr": snr, "value": v})
        }
        AnalyzeCmd::BerHcm { m, sigma, noise_std } => {
            let v = analysis::ber_hcm_analytic(m, sigma, noise_std).map_err(spec_err)?;
            json!({"op": "ber-hcm", "m": m, "sigma": sigma, "noise_std": noise_std, "value": v})
        }
        AnalyzeCmd::BerHcmDecoder { m, n, power, noise_std } => {
            let v = analysis::ber_hcm_decoder(m, n, power, noise_std).map_err(spec_err)?;
            json!({"op": "ber-hcm-decoder", "m": m, "n": n, "power": power, "noise_std": noise_std, "value": v})
        }
        AnalyzeCmd::Rate { scheme, n, m } => {
            let v = match Scheme::parse(&scheme) {
                Some(Scheme::AcoOfdm) => {
                    AcoOfdm::new(n, m).map_err(spec_err)?;
                    analysis::aco_rate(n, m)
                }
                Some(_) => {
                    HcmCodec::new(n, m).map_err(spec_err)?;
                    analysis::hcm_rate(n, m)
                }
                None => return Err(config_err(format!("unknown scheme `{scheme}`"))),
            };
            json!({"op": "rate", "scheme": scheme, "n": n, "m": m, "value": v})
        }
    };
    emit(value);
    Ok(Exit::Ok)
}

fn optimize(args: &OptimizeArgs) -> Result<Exit, Failure> {
    let report = optimize_interleaver(&args.taps, args.n, args.budget, args.seed).map_err(spec_err)?;
    let h = BinaryHadamard::new(args.n).map_err(spec_err)?;
    let identity_cost = isi_cost(&Interleaver::identity(args.n), &args.taps, &h).map_err(spec_err)?.cost;
    write_output(&args.out, &format_permutation(report.interleaver.perm()))?;
    let cost = report.cost;
    emit(json!({
        "n": args.n,
        "taps": args.taps,
        "method": if args.n <= EXHAUSTIVE_MAX_N { "exhaustive" } else { "annealing" },
        "budget": args.budget,
        "seed": args.seed,
        "cost": cost,
        "identity_cost": identity_cost,
        "out": args.out.display().to_string(),
    }));
    Ok(Exit::Ok)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn papr(args: &PaprArgs) -> Result<Exit, Failure> {
    if let Some(v) = &args.vector {
        let value = analysis::papr(v).map_err(spec_err)?;
        emit(json!({"scheme": "vector", "chips": v.len(), "max_papr": value}));
        return Ok(Exit::Ok);
    }
    let scheme = Scheme::parse(&args.scheme).ok_or_else(|| config_err(format!("unknown scheme `{}`", args.scheme)))?;
    if args.symbols == 0 {
        return Err(spec_err("need at least one symbol"));
    }
    let n = args.n;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut peaks = Vec::with_capacity(args.symbols);
    let mut sum = 0.0;
    match scheme {
        Scheme::AcoOfdm => {
            let aco = AcoOfdm::new(n, args.m.unwrap_or(16)).map_err(spec_err)?;
            let mut bits = vec![false; aco.bits_per_frame()];
            for _ in 0..args.symbols {
                fill_bits(&mut rng, &mut bits);
                let data = aco.qam().map(&bits).map_err(spec_err)?;
                let x = aco.modulate(&aco.aco_map(&data).map_err(spec_err)?, 1.0).map_err(spec_err)?;
                sum += x.iter().sum::<f64>();
                peaks.push(x.iter().copied().fold(0.0, f64::max));
            }
        }
        _ => {
            let codec = HcmCodec::new(n, args.m.unwrap_or(2)).map_err(spec_err)?;
            let variant = if scheme == Scheme::DcrHcm { HcmVariant::DcRemoved } else { HcmVariant::Plain };
            let mut bits = vec![false; codec.bits_per_symbol()];
            let mut u = vec![0.0; n];
            let mut x = vec![0.0; n];
            for _ in 0..args.symbols {
                fill_bits(&mut rng, &mut bits);
                codec.map_into(&bits, &mut u).map_err(spec_err)?;
                codec.encode_into(&u, variant, &mut x).map_err(spec_err)?;
                sum += x.iter().sum::<f64>();
                peaks.push(x.iter().copied().fold(0.0, f64::max));
            }
        }
    }
    let mean = sum / (args.symbols * n) as f64;
    if !(mean > 0.0) {
        return Err(spec_err("zero-mean ensemble"));
    }
    let mut per_symbol: Vec<f64> = peaks.iter().map(|p| p / mean).collect();
    per_symbol.sort_by(f64::total_cmp);
    let max_papr = *per_symbol.last().expect("nonempty");
    emit(json!({
        "scheme": scheme.name(),
        "n": n,
        "symbols": args.symbols,
        "seed": args.seed,
        "mean_chip": mean,
        "max_papr": max_papr,
        "percentiles": {
            "p50": percentile(&per_symbol, 0.5),
            "p90": percentile(&per_symbol, 0.9),
            "p99": percentile(&per_symbol, 0.99),
            "p999": percentile(&per_symbol, 0.999),
        },
    }));
    Ok(Exit::Ok)
}
