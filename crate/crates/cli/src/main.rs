use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use iris_core::io::{load_gray_frames, parse_dims, read_config, write_pgm};
use iris_core::stimulus::{generate, Region};
use iris_core::verify::{run_verify, VerifyPlan};
use iris_core::{build_layout, run_to_dir, Error, StimulusKind, StimulusSpec};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Mismatches printed before the rest are summarized.
const MAX_REPORTED: usize = 20;

#[derive(Parser, Debug)]
#[command(name = "iris", version, about = "Retina-inspired sensor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run frames through the frontend and both feature engines
    Run(RunArgs),
    /// Write a synthetic stimulus as a PGM sequence
    Synth(SynthArgs),
    /// Check digital and analog engine decisions against each other
    Verify,
    /// Print the receptive-field layout of a config
    Layout {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory, glob pattern, PGM file or headerless 8-bit file
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frame size of headerless input, e.g. 64x64
    #[arg(long, value_parser = parse_dims)]
    raw_dims: Option<(usize, usize)>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// global-pan, differential, loom-disc or translate-disc
    #[arg(long)]
    kind: StimulusKind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 50)]
    frames: usize,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    velocity: i64,
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    radius_growth: f64,
    #[arg(long, requires = "center_y")]
    center_x: Option<f64>,
    #[arg(long, requires = "center_x")]
    center_y: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    object: f64,
    #[arg(long, default_value_t = 0.8)]
    background: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Moving patch for differential stimuli as x,y,w,h
    #[arg(long, value_parser = parse_region)]
    region: Option<Region>,
}

impl SynthArgs {
    fn spec(&self) -> StimulusSpec {
        StimulusSpec {
            velocity: self.velocity,
            radius: self.radius,
            radius_growth: self.radius_growth,
            center: self.center_x.zip(self.center_y),
            object_level: self.object,
            background_level: self.background,
            seed: self.seed,
            region: self.region,
            ..StimulusSpec::new(self.kind, self.width, self.height, self.frames)
        }
    }
}

fn parse_region(s: &str) -> Result<Region, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad region component `{p}`")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, w, h] => Ok(Region { x, y, w, h }),
        _ => Err("expected x,y,w,h".into()),
    }
}

enum Failure {
    Usage(String),
    Data(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

fn load_config(path: &Path) -> Result<iris_core::PipelineConfig, Failure> {
    match read_config(path) {
        Err(e @ Error::Io { .. }) => Err(Failure::Usage(format!("cannot read config: {e}"))),
        other => Ok(other?),
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let mut cfg = load_config(&args.config)?;
    if args.raw_dims.is_some() {
        cfg.input.raw_dims = args.raw_dims;
    }
    let input = args
        .input
        .clone()
        .or_else(|| cfg.input.path.clone())
        .ok_or_else(|| Failure::Usage("no input: pass --input or set input.path".into()))?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Failure::Usage("no output directory: pass --out or set output.dir".into()))?;
    cfg.validate()?;

    let started = Instant::now();
    let frames = load_gray_frames(&input, cfg.input.raw_dims)?;
    let metrics = run_to_dir(&cfg, &frames, &out)?;
    eprintln!(
        "{} frames, {} events, {} OMS spikes, {} LD spikes, bandwidth ratio {:.4} ({:.2?})",
        metrics.frames,
        metrics.total_events,
        metrics.oms_spikes,
        metrics.ld_spikes,
        metrics.bandwidth_ratio,
        started.elapsed()
    );
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let frames = generate(&args.spec())?;
    fs::create_dir_all(&args.out).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    for (i, frame) in frames.iter().enumerate() {
        write_pgm(&args.out.join(format!("frame_{i:05}.pgm")), frame)?;
    }
    eprintln!("wrote {} frames to {}", frames.len(), args.out.display());
    Ok(())
}

fn cmd_verify() -> Result<(), Failure> {
    let started = Instant::now();
    let report = run_verify(&VerifyPlan::default());
    if report.is_ok() {
        println!(
            "OK {} cases ({} OMS over {} sets, {} LD over {} sets) in {:.2?}",
            report.total_cases(),
            report.oms_cases,
            report.oms_sets,
            report.ld_cases,
            report.ld_sets,
            started.elapsed()
        );
        return Ok(());
    }
    let mut stdout = std::io::stdout().lock();
    for m in report.mismatches.iter().take(MAX_REPORTED) {
        let _ = writeln!(stdout, "MISMATCH {m}");
    }
    if report.mismatches.len() > MAX_REPORTED {
        let _ = writeln!(stdout, "... {} more", report.mismatches.len() - MAX_REPORTED);
    }
    let _ = writeln!(
        stdout,
        "FAILED {} of {} cases",
        report.mismatches.len(),
        report.total_cases()
    );
    Err(Failure::Verify)
}

fn cmd_layout(config: &Path) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let layout = build_layout(&cfg.layout.explicit()?)?;
    // a closed pipe (e.g. `| head`) is not an error
    let _ = std::io::stdout().lock().write_all(layout.dump_string().as_bytes());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Verify => cmd_verify(),
        Command::Layout { config } => cmd_layout(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
    }
}
