//! Command-line front end.
//!
//! Exit status is 0 on success, 2 for flag and validation errors, and 1 for
//! failures during computation (range errors, I/O).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bounds::rule_of_thumb_r;
use crate::dyadic::DyadicValue;
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentKind, ExperimentSpec, InputSource};
use crate::fp_core::{self, FpFormat};
use crate::sr_engine::{make_stream, sr_round, RandomBits, SrConfig};

#[derive(Debug, Parser)]
#[command(name = "srlab", version, about = "Limited-precision stochastic rounding laboratory")]
pub struct Cli {
    /// Read default flag values from a file of `key = value` lines.
    /// Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Show both rounding candidates of a value and its round-up probability.
    Round(RoundArgs),
    /// Relative error of recursive summation (uniform(0,1) inputs by default).
    Sum(SumArgs),
    /// Relative error of inner products.
    Dot(SumArgs),
    /// Gradient descent on the Rosenbrock function.
    Rosenbrock(RosenbrockArgs),
    /// Deterministic and probabilistic summation error bounds.
    BoundsTable(BoundsArgs),
    /// Smallest r with 4^r >= n.
    SuggestR(SuggestArgs),
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub value: f64,
    #[arg(long)]
    pub p: u32,
    /// Random bits, or `ideal`.
    #[arg(long)]
    pub r: RandomBits,
    /// Number of stochastic roundings used for the empirical frequency.
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    #[arg(long, default_value_t = 11)]
    pub p: u32,
    /// Comma-separated random-bit counts; `ideal` is accepted.
    #[arg(long, value_delimiter = ',', default_value = "3,6,7,8,10")]
    pub r: Vec<RandomBits>,
    /// Skip the round-to-nearest runs.
    #[arg(long)]
    pub no_rn: bool,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; the output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Directory for the CSV files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n_max", "n_step"])]
    pub n_grid: Option<Vec<u64>>,
    /// Largest problem size of an evenly spaced grid.
    #[arg(long)]
    pub n_max: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub n_step: u64,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<u64>> {
        if let Some(g) = &self.n_grid {
            return Ok(g.clone());
        }
        let max = self
            .n_max
            .ok_or_else(|| Error::invalid("one of --n-grid or --n-max is required"))?;
        if self.n_step == 0 {
            return Err(Error::invalid("--n-step must be positive"));
        }
        let mut grid: Vec<u64> = (1..=max / self.n_step).map(|k| k * self.n_step).collect();
        if grid.last() != Some(&max) {
            grid.push(max);
        }
        Ok(grid)
    }
}

#[derive(Debug, Args)]
pub struct SumArgs {
    #[command(flatten)]
    pub modes: ModeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Fixed input vector instead of uniform(0,1) draws.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RosenbrockArgs {
    #[command(flatten)]
    pub modes: ModeArgs,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Learning rate.
    #[arg(long, default_value_t = 0.001)]
    pub t: f64,
    /// Starting point `x1,x2`; repeat for several.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub start: Vec<[f64; 2]>,
    /// Round `t * grad` as well as the update.
    #[arg(long)]
    pub round_step_product: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 11)]
    pub p: u32,
    #[arg(long, value_delimiter = ',', default_value = "3,6,7,8,10")]
    pub r: Vec<RandomBits>,
    /// Failure probability of the probabilistic bounds.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SuggestArgs {
    #[arg(long)]
    pub n: u64,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a: f64 = a.parse().map_err(|_| format!("`{a}` is not a number"))?;
            let b: f64 = b.parse().map_err(|_| format!("`{b}` is not a number"))?;
            Ok([a, b])
        }
        _ => Err(format!("expected `x1,x2`, got `{s}`")),
    }
}

/// Exit status for an error: 1 for runtime failures, 2 for bad input.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Range(_) | Error::Io { .. } | Error::Csv(_) => 1,
        Error::AtIndex { source, .. } => exit_code(source),
        Error::Domain(_) | Error::InvalidArgument(_) => 2,
    }
}

/// Parses a config file into `--key value` arguments.
pub fn config_args(text: &str) -> Result<Vec<(String, Option<String>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::invalid(format!("config line {}: empty key", i + 1)));
        }
        match value {
            "true" => out.push((key, None)),
            "false" => {}
            _ => out.push((key, Some(value.to_string()))),
        }
    }
    Ok(out)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(path) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(path));
        }
    }
    None
}

/// Inserts config-file values for every flag not already on the command
/// line, right after the subcommand name.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut extra = Vec::new();
    for (key, value) in config_args(&text)? {
        if key == "config" || given.contains(&key) {
            continue;
        }
        extra.push(OsString::from(format!("--{key}")));
        if let Some(v) = value {
            extra.push(OsString::from(v));
        }
    }
    let sub = args
        .iter()
        .enumerate()
        .skip(1)
        .scan(false, |skip_next, (i, a)| {
            let was_value = *skip_next;
            *skip_next = a == "--config";
            Some((i, a, was_value))
        })
        .find(|(_, a, was_value)| !was_value && !a.to_string_lossy().starts_with('-'))
        .map(|(i, _, _)| i + 1)
        .unwrap_or(args.len());
    let mut merged = args[..sub].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[sub..]);
    Ok(merged)
}

fn cmd_round(a: &RoundArgs, out: &mut dyn Write) -> Result<()> {
    let fmt = FpFormat::new(a.p)?;
    let cfg = SrConfig::stochastic(fmt, a.r)?;
    let r = cfg.random_bits().expect("stochastic");
    let down = fp_core::round_down(a.value, fmt)?;
    let up = fp_core::round_up(a.value, fmt)?;
    let ulp = if a.value == 0.0 {
        f64::NAN
    } else {
        fp_core::ulp(a.value, fmt)?
    };
    let truncated = fp_core::truncate(a.value, a.p + r)?;
    let q = DyadicValue::from_f64(a.value)?.q(a.p, Some(r));
    let w = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    writeln!(out, "x       = {}", a.value).map_err(w)?;
    writeln!(out, "p, r    = {}, {}", a.p, a.r).map_err(w)?;
    writeln!(out, "floor   = {down}").map_err(w)?;
    writeln!(out, "ceil    = {up}").map_err(w)?;
    writeln!(out, "ulp     = {ulp}").map_err(w)?;
    writeln!(out, "fl(p+r) = {truncated}").map_err(w)?;
    writeln!(out, "q_r     = {q}").map_err(w)?;
    if a.samples > 0 {
        let mut rng = make_stream(a.seed, 0);
        let mut ups = 0u64;
        for _ in 0..a.samples {
            if sr_round(a.value, &cfg, &mut rng)? != down {
                ups += 1;
            }
        }
        let freq = ups as f64 / a.samples as f64;
        writeln!(out, "up freq = {freq} ({ups}/{})", a.samples).map_err(w)?;
    }
    Ok(())
}

fn experiment_spec(kind: ExperimentKind, m: &ModeArgs) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(kind);
    spec.p = m.p;
    spec.r_list = m.r.clone();
    spec.include_rn = !m.no_rn;
    spec.trials = m.trials;
    spec.seed = m.seed;
    spec.threads = m.threads;
    spec
}

fn run_and_write(spec: &ExperimentSpec, dir: &Path, out: &mut dyn Write) -> Result<()> {
    spec.validate()?;
    let start = Instant::now();
    let table = experiments::run(spec)?;
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = experiments::write_table(&table, dir)?;
    let w = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    for (path, series) in paths.iter().zip(&table.series) {
        let flag = if series.diverged { " (diverged)" } else { "" };
        writeln!(out, "wrote {}{flag}", path.display()).map_err(w)?;
    }
    writeln!(out, "elapsed {:.3} s", start.elapsed().as_secs_f64()).map_err(w)?;
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Round(a) => cmd_round(a, out),
        Command::Sum(a) | Command::Dot(a) => {
            let kind = if matches!(cli.command, Command::Sum(_)) {
                ExperimentKind::Sum
            } else {
                ExperimentKind::Dot
            };
            let mut spec = experiment_spec(kind, &a.modes);
            spec.n_grid = a.grid.grid()?;
            if let Some(path) = &a.input {
                spec.input = InputSource::File(path.clone());
            }
            run_and_write(&spec, &a.modes.out, out)
        }
        Command::Rosenbrock(a) => {
            let mut spec = experiment_spec(ExperimentKind::Rosenbrock, &a.modes);
            spec.iters = a.iters;
            spec.t = a.t;
            spec.round_step_product = a.round_step_product;
            if !a.start.is_empty() {
                spec.starts = a.start.clone();
            }
            run_and_write(&spec, &a.modes.out, out)
        }
        Command::BoundsTable(a) => {
            let mut spec = ExperimentSpec::new(ExperimentKind::BoundsTable);
            spec.p = a.p;
            spec.r_list = a.r.clone();
            spec.lambda = a.lambda;
            spec.n_grid = a.grid.grid()?;
            spec.trials = 1;
            run_and_write(&spec, &a.out, out)
        }
        Command::SuggestR(a) => {
            let r = rule_of_thumb_r(a.n)?;
            writeln!(out, "{r}").map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
