use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pmcw_core::codes::{
    format_code, generate_p3, periodic_autocorrelation, read_code_file, search_apas,
    verify_almost_perfect, CodeSequence,
};
use pmcw_core::compensation::{effective_bandwidth, write_attenuation_csv};
use pmcw_core::config::{parse_window, ExperimentConfig};
use pmcw_core::experiment::{self, diagnostics_json, exit_code, validate, EXIT_CONFIG};
use pmcw_core::phasenoise::{estimate_psd, synthesize, PsdMask, PsdWindow};
use pmcw_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pmcw",
    version,
    about = "PMCW radar network simulator with phase-noise compensation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts
    Run(RunArgs),
    /// Check a configuration without simulating; prints JSON diagnostics
    Validate { config: PathBuf },
    /// Code generation and verification
    #[command(subcommand)]
    Codes(CodesCommand),
    /// Phase-noise synthesis and analysis
    #[command(subcommand)]
    Pn(PnCommand),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Master seed; radar m uses seed ^ m
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    no_compensation: bool,
    #[arg(long)]
    no_pn: bool,
    /// Doppler window: none or hann
    #[arg(long)]
    window: Option<String>,
    /// Worker threads for the per-radar pipelines
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum CodesCommand {
    /// Exhaustive search for almost perfect binary sequences
    Search {
        #[arg(long)]
        length: usize,
        /// Write the first sequence to this file
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print every sequence instead of the count
        #[arg(long)]
        all: bool,
    },
    /// Check whether a code file holds an almost perfect sequence
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Generate a P3 polyphase code
    GenP3 {
        #[arg(long)]
        length: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PnCommand {
    /// Draw a realization and write `t_s,phi_rad` samples
    Synth {
        /// Mask file; the built-in PLL mask when omitted
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long)]
        duration_us: f64,
        #[arg(long, default_value_t = 100.0)]
        f_max_mhz: f64,
        #[arg(long, default_value_t = 1000.0)]
        fs_mhz: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the one-sided PSD of a `t_s,phi_rad` file
    Psd {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        segments: usize,
        /// rect or hann
        #[arg(long, default_value = "rect")]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual factor 2|sin(π f Δτ)| over a frequency sweep
    Attenuation {
        #[arg(long)]
        delta_tau_ns: f64,
        #[arg(long, default_value_t = 100.0)]
        f_max_mhz: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run(args) => run(args),
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let diags = validate(&cfg);
            println!("{}", diagnostics_json(&diags));
            let failed = diags
                .iter()
                .any(|d| d.severity == experiment::Severity::Error);
            Ok(if failed { EXIT_CONFIG } else { 0 })
        }
        Command::Codes(c) => codes(c),
        Command::Pn(c) => pn(c),
    }
}

fn run(args: RunArgs) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(dir) = args.out_dir {
        cfg.outputs.dir = dir;
    }
    if args.no_compensation {
        cfg.pipeline.compensation = false;
    }
    if args.no_pn {
        cfg.pn.enabled = false;
    }
    if let Some(w) = args.window {
        cfg.pipeline.window =
            parse_window(&w).ok_or_else(|| Error::Config(format!("unknown window {w}")))?;
    }
    for d in validate(&cfg) {
        if d.severity != experiment::Severity::Info {
            eprintln!("{:?} [{}]: {}", d.severity, d.code, d.message);
        }
    }
    let report = experiment::run(&cfg, args.threads)?;
    for rx in &report.receivers {
        println!("radar {}:", rx.rx_id);
        for (tx, bin) in &rx.los_bins {
            println!("  LOS from radar {tx} at bin {bin}");
        }
        println!("  noise floor pre  {:8.2} dB", rx.noise_floor_pre_db);
        if let Some(post) = rx.noise_floor_post_db {
            println!("  noise floor post {post:8.2} dB");
        }
        for p in &rx.paths {
            let post = p
                .ridge_post_db
                .map(|v| format!("{v:8.2}"))
                .unwrap_or_else(|| "       -".into());
            println!(
                "  {:<8} tx {} bin {:4}  ridge pre {:8.2} dB  post {post} dB",
                p.kind, p.tx_id, p.bin, p.ridge_pre_db
            );
        }
        if let Some(lb) = rx.link_budget_los_to_mono_db {
            println!("  LOS/mono link budget {lb:.2} dB");
        }
        if let Some(sim) = rx.simulated_los_to_mono_db {
            println!("  LOS/mono simulated   {sim:.2} dB");
        }
    }
    println!("artifacts in {}", cfg.outputs.dir.display());
    Ok(0)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn codes(command: CodesCommand) -> Result<i32> {
    match command {
        CodesCommand::Search { length, out, all } => {
            let found = search_apas(length)?;
            eprintln!(
                "{} almost perfect sequences of length {length} (up to rotation and negation)",
                found.len()
            );
            if all {
                for seq in &found {
                    println!("{}", signs(seq));
                }
            }
            if let (Some(path), Some(first)) = (out.as_deref(), found.first()) {
                emit(Some(path), &format_code(first))?;
            }
            Ok(if found.is_empty() { 1 } else { 0 })
        }
        CodesCommand::Verify { file, tolerance } => {
            let seq = read_code_file(&file)?;
            let report = verify_almost_perfect(&seq, tolerance)?;
            let acf: Vec<String> = periodic_autocorrelation(&seq)
                .iter()
                .map(|v| format!("{:.3}", v.re))
                .collect();
            println!("autocorrelation: {}", acf.join(" "));
            println!(
                "almost perfect: {} (peak {:.3}, lag L/2 {:.3}, max sidelobe {:.3e})",
                report.is_almost_perfect, report.peak.re, report.half_lag.re, report.max_sidelobe
            );
            Ok(if report.is_almost_perfect { 0 } else { 1 })
        }
        CodesCommand::GenP3 { length, out } => {
            if length == 0 {
                return Err(Error::BadCode("length must be positive".into()));
            }
            emit(out.as_deref(), &format_code(&generate_p3(length)))?;
            Ok(0)
        }
    }
}

fn signs(seq: &CodeSequence) -> String {
    seq.chips()
        .iter()
        .map(|c| if c.re > 0.0 { '+' } else { '-' })
        .collect()
}

fn pn(command: PnCommand) -> Result<i32> {
    match command {
        PnCommand::Synth {
            mask,
            duration_us,
            f_max_mhz,
            fs_mhz,
            seed,
            out,
        } => {
            let mask = match mask {
                Some(p) => PsdMask::read(&p)?,
                None => PsdMask::default_pll(),
            };
            let duration = duration_us * 1e-6;
            let process = synthesize(&mask, duration, f_max_mhz * 1e6, seed)?;
            let dt = 1.0 / (fs_mhz * 1e6);
            let n = (duration / dt).round() as usize;
            let phi = process.evaluate_uniform(0.0, dt, n);
            let mut text = String::with_capacity(32 * n);
            text.push_str("t_s,phi_rad\n");
            for (i, p) in phi.iter().enumerate() {
                use std::fmt::Write as _;
                let _ = writeln!(text, "{:.6e},{p:.12e}", i as f64 * dt);
            }
            emit(Some(&out), &text)?;
            eprintln!(
                "{} lines ({} pruned), rms {:.4e} rad",
                process.lines().len(),
                process.pruned(),
                process.variance().sqrt()
            );
            Ok(0)
        }
        PnCommand::Psd {
            input,
            segments,
            window,
            out,
        } => {
            let text = fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
            let (t, phi) = read_samples(&text)?;
            if t.len() < 2 {
                return Err(Error::TooFewSamples {
                    needed: 2,
                    got: t.len(),
                });
            }
            let fs = 1.0 / (t[1] - t[0]);
            let window = match window.as_str() {
                "rect" | "rectangular" | "none" => PsdWindow::Rectangular,
                "hann" => PsdWindow::Hann,
                other => return Err(Error::Config(format!("unknown window {other}"))),
            };
            let est = estimate_psd(&phi, fs, segments, window)?;
            emit(out.as_deref(), &est.format())?;
            Ok(0)
        }
        PnCommand::Attenuation {
            delta_tau_ns,
            f_max_mhz,
            points,
            out,
        } => {
            let delta_tau = delta_tau_ns * 1e-9;
            let f_max = f_max_mhz * 1e6;
            let n = points.max(2);
            let freqs: Vec<f64> = (0..n).map(|i| f_max * i as f64 / (n - 1) as f64).collect();
            let mut buf = Vec::new();
            write_attenuation_csv(&mut buf, &freqs, delta_tau)
                .map_err(|e| Error::io("<buffer>", e))?;
            emit(out.as_deref(), &String::from_utf8_lossy(&buf))?;
            let _ = writeln!(
                std::io::stderr(),
                "compensation effective up to {:.4e} Hz",
                effective_bandwidth(delta_tau)
            );
            Ok(0)
        }
    }
}

fn read_samples(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut t = Vec::new();
    let mut phi = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad = || Error::Config(format!("line {}: expected t_s,phi_rad", i + 1));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        t.push(a.trim().parse().map_err(|_| bad())?);
        phi.push(b.trim().parse().map_err(|_| bad())?);
    }
    Ok((t, phi))
}
