//! Monte Carlo harness: repeated-trial runners for the summation,
//! inner-product and Rosenbrock experiments, bound tables, estimators and
//! CSV output.
//!
//! Trial `i` draws everything it needs (inputs and random bits) from the
//! stream `(seed, i)`, and results are aggregated in trial order, so the
//! output does not depend on how many worker threads ran the trials.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::bounds::{self, BoundQuery};
use crate::dyadic::{exact_dot, exact_sum};
use crate::error::{Error, Result};
use crate::fp_core::{self, FpFormat};
use crate::kernels::{self, GdOptions, GdTrajectory};
use crate::sr_engine::{make_stream, Mode, RandomBits, RngStream, SrConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sum,
    Dot,
    Rosenbrock,
    BoundsTable,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Sum => "sum",
            ExperimentKind::Dot => "dot",
            ExperimentKind::Rosenbrock => "rosenbrock",
            ExperimentKind::BoundsTable => "bounds-table",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(ExperimentKind::Sum),
            "dot" => Ok(ExperimentKind::Dot),
            "rosenbrock" => Ok(ExperimentKind::Rosenbrock),
            "bounds-table" => Ok(ExperimentKind::BoundsTable),
            _ => Err(Error::invalid(format!("unknown experiment kind `{s}`"))),
        }
    }
}

/// Where summation and inner-product inputs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    /// Fresh uniform(0, 1) draws per trial and per `n`, rounded to nearest
    /// at precision `p`.
    Uniform01,
    /// A fixed vector read from a text file: one value per line for sums,
    /// two per line (`a b` or `a,b`) for inner products. Every trial uses
    /// the first `n` entries.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub p: u32,
    pub r_list: Vec<RandomBits>,
    /// Also run round-to-nearest at precision `p`.
    pub include_rn: bool,
    pub n_grid: Vec<u64>,
    pub iters: usize,
    pub trials: usize,
    pub seed: u64,
    pub lambda: f64,
    pub input: InputSource,
    /// Learning rate for the Rosenbrock runs.
    pub t: f64,
    pub starts: Vec<[f64; 2]>,
    pub round_step_product: bool,
    pub threads: usize,
}

impl ExperimentSpec {
    /// Defaults sized for the full experiments: `p = 11`,
    /// `r ∈ {3, 6, 7, 8, 10}`, 500 trials, 5000 iterations at `t = 0.001`.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentSpec {
            kind,
            p: 11,
            r_list: [3, 6, 7, 8, 10].map(RandomBits::Bits).to_vec(),
            include_rn: true,
            n_grid: Vec::new(),
            iters: 5000,
            trials: 500,
            seed: 1,
            lambda: 0.1,
            input: InputSource::Uniform01,
            t: 0.001,
            starts: vec![[0.0, 0.0], [0.5, 0.5]],
            round_step_product: false,
            threads: 1,
        }
    }

    pub fn format(&self) -> Result<FpFormat> {
        FpFormat::new(self.p)
    }

    pub fn validate(&self) -> Result<()> {
        let fmt = self.format()?;
        for &r in &self.r_list {
            SrConfig::stochastic(fmt, r)?;
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.threads == 0 {
            return Err(Error::invalid("threads must be at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::invalid(format!("lambda = {} is outside (0, 1)", self.lambda)));
        }
        match self.kind {
            ExperimentKind::Sum | ExperimentKind::Dot | ExperimentKind::BoundsTable => {
                if self.n_grid.is_empty() {
                    return Err(Error::invalid("n grid is empty"));
                }
                if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("n grid must be positive and strictly increasing"));
                }
            }
            ExperimentKind::Rosenbrock => {
                if !(self.t > 0.0 && self.t.is_finite()) {
                    return Err(Error::invalid(format!("learning rate {} must be positive", self.t)));
                }
                if self.starts.is_empty() {
                    return Err(Error::invalid("no starting points"));
                }
            }
        }
        if self.kind == ExperimentKind::BoundsTable && self.r_list.is_empty() {
            return Err(Error::invalid("bounds table needs at least one r"));
        }
        Ok(())
    }

    /// Rounding configurations in output order: RN first (if enabled), then
    /// the `r` list as given.
    pub fn configs(&self) -> Result<Vec<SrConfig>> {
        let fmt = self.format()?;
        let mut out = Vec::new();
        if self.include_rn {
            out.push(SrConfig::nearest(fmt));
        }
        for &r in &self.r_list {
            out.push(SrConfig::stochastic(fmt, r)?);
        }
        Ok(out)
    }
}

/// One CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n_or_k: u64,
    pub mode: String,
    pub value: f64,
    pub stderr: f64,
}

/// Rows destined for a single CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// Relative path of the file inside the output directory.
    pub file: PathBuf,
    pub rows: Vec<Row>,
    /// Some trial left the representable range (Rosenbrock only).
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: ExperimentKind,
    pub series: Vec<Series>,
}

impl Table {
    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.series.iter().flat_map(|s| s.rows.iter())
    }
}

fn mode_file_label(cfg: &SrConfig) -> String {
    match cfg.mode() {
        Mode::Nearest => "rn".to_string(),
        Mode::Stochastic(RandomBits::Ideal) => "rideal".to_string(),
        Mode::Stochastic(RandomBits::Bits(r)) => format!("r{r}"),
    }
}

fn file_name(kind: ExperimentKind, p: u32, label: &str) -> PathBuf {
    PathBuf::from(format!("{}_p{p}_{label}.csv", kind.as_str()))
}

/// The stream for trial `trial`: stream id equals the trial index.
pub fn derive_trial_stream(seed: u64, trial: u64) -> RngStream {
    make_stream(seed, trial)
}

/// Sample mean and standard error `s / √T`; the error is 0 for one sample.
pub fn mean_stderr(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (t - 1.0) / t).sqrt()))
}

/// Fraction of entries with `|error| <= bound`.
pub fn estimate_coverage(errors: &[f64], bound: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::invalid("coverage of an empty sample"));
    }
    let hits = errors.iter().filter(|e| e.abs() <= bound).count();
    Ok(hits as f64 / errors.len() as f64)
}

/// Summary of repeated single roundings of one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingSample {
    pub trials: u64,
    pub ups: u64,
    pub down: f64,
    pub up: f64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub stderr: f64,
}

/// Rounds `x` `trials` times with the stream `(seed, 0)`.
///
/// Each sample is one of two values, so the moments are computed from the
/// round-up count rather than accumulated.
pub fn sample_rounding(x: f64, cfg: &SrConfig, trials: u64, seed: u64) -> Result<RoundingSample> {
    if trials < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let fmt = cfg.format();
    let down = fp_core::round_down(x, fmt)?;
    let up = fp_core::round_up(x, fmt)?;
    let mut rng = derive_trial_stream(seed, 0);
    let mut ups = 0u64;
    for _ in 0..trials {
        if crate::sr_engine::round(x, cfg, &mut rng)? != down {
            ups += 1;
        }
    }
    let t = trials as f64;
    let gap = up - down;
    let freq = ups as f64 / t;
    let mean = down + gap * freq;
    let variance = gap * gap * (ups as f64) * ((trials - ups) as f64) / (t * (t - 1.0));
    Ok(RoundingSample {
        trials,
        ups,
        down,
        up,
        mean,
        variance,
        stderr: (variance / t).sqrt(),
    })
}

/// Sample mean and standard error of `trials` stochastic roundings of `x`.
pub fn estimate_bias(x: f64, cfg: &SrConfig, trials: u64, seed: u64) -> Result<(f64, f64)> {
    let s = sample_rounding(x, cfg, trials, seed)?;
    Ok((s.mean, s.stderr))
}

/// Per-trial relative errors of a summation or inner-product experiment,
/// indexed `[n][mode][trial]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSamples {
    pub n_grid: Vec<u64>,
    pub modes: Vec<SrConfig>,
    pub errors: Vec<Vec<Vec<f64>>>,
}

impl ErrorSamples {
    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|c| c.label() == label)
    }
}

fn read_input_file(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cols = vec![Vec::new(); columns];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != columns {
            return Err(Error::invalid(format!(
                "{}:{}: expected {columns} value(s), found {}",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        for (col, f) in cols.iter_mut().zip(fields) {
            let v: f64 = f.parse().map_err(|_| {
                Error::invalid(format!("{}:{}: `{f}` is not a number", path.display(), lineno + 1))
            })?;
            col.push(v);
        }
    }
    Ok(cols)
}

fn uniform_vector(n: u64, fmt: FpFormat, rng: &mut RngStream) -> Result<Vec<f64>> {
    (0..n).map(|_| fp_core::round_nearest(rng.next_f64(), fmt)).collect()
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs `trial` for every index and returns the results in index order.
fn run_trials<T: Send>(spec: &ExperimentSpec, trial: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let trials = spec.trials as u64;
    if spec.threads == 1 {
        return (0..trials).map(&trial).collect();
    }
    with_pool(spec.threads, || (0..trials).into_par_iter().map(&trial).collect())?
}

/// Relative errors of every (n, mode, trial) for a `sum` or `dot` spec.
pub fn collect_errors(spec: &ExperimentSpec) -> Result<ErrorSamples> {
    spec.validate()?;
    let dot = match spec.kind {
        ExperimentKind::Sum => false,
        ExperimentKind::Dot => true,
        other => return Err(Error::invalid(format!("`{other}` is not a summation experiment"))),
    };
    let fmt = spec.format()?;
    let modes = spec.configs()?;
    let fixed = match &spec.input {
        InputSource::Uniform01 => None,
        InputSource::File(path) => {
            let mut cols = read_input_file(path, if dot { 2 } else { 1 })?;
            for col in &mut cols {
                for v in col.iter_mut() {
                    *v = fp_core::round_nearest(*v, fmt)?;
                }
            }
            let need = *spec.n_grid.last().expect("validated") as usize;
            if cols[0].len() < need {
                return Err(Error::invalid(format!(
                    "input file has {} entries, grid needs {need}",
                    cols[0].len()
                )));
            }
            Some(cols)
        }
    };

    let per_trial = run_trials(spec, |trial| {
        let mut rng = derive_trial_stream(spec.seed, trial);
        let mut out = Vec::with_capacity(spec.n_grid.len());
        for &n in &spec.n_grid {
            let (a, b) = match &fixed {
                Some(cols) => {
                    let n = n as usize;
                    (cols[0][..n].to_vec(), cols.get(1).map(|c| c[..n].to_vec()))
                }
                None => {
                    let a = uniform_vector(n, fmt, &mut rng)?;
                    let b = if dot { Some(uniform_vector(n, fmt, &mut rng)?) } else { None };
                    (a, b)
                }
            };
            let exact = match &b {
                Some(b) => exact_dot(&a, b)?,
                None => exact_sum(&a)?,
            };
            let mut errs = Vec::with_capacity(modes.len());
            for cfg in &modes {
                let value = match &b {
                    Some(b) => kernels::inner_product_value(&a, b, cfg, &mut rng)?,
                    None => kernels::recursive_sum_value(&a, cfg, &mut rng)?,
                };
                errs.push(kernels::relative_error(value, &exact)?);
            }
            out.push(errs);
        }
        Ok(out)
    })?;

    let mut errors = vec![vec![Vec::with_capacity(spec.trials); modes.len()]; spec.n_grid.len()];
    for trial in per_trial {
        for (i, row) in trial.into_iter().enumerate() {
            for (m, e) in row.into_iter().enumerate() {
                errors[i][m].push(e);
            }
        }
    }
    Ok(ErrorSamples {
        n_grid: spec.n_grid.clone(),
        modes,
        errors,
    })
}

fn error_table(spec: &ExperimentSpec, samples: &ErrorSamples) -> Result<Table> {
    let mut series = Vec::with_capacity(samples.modes.len());
    for (m, cfg) in samples.modes.iter().enumerate() {
        let mut rows = Vec::with_capacity(samples.n_grid.len());
        for (i, &n) in samples.n_grid.iter().enumerate() {
            let (value, stderr) = mean_stderr(&samples.errors[i][m])?;
            rows.push(Row {
                n_or_k: n,
                mode: cfg.label(),
                value,
                stderr,
            });
        }
        series.push(Series {
            file: file_name(spec.kind, spec.p, &mode_file_label(cfg)),
            rows,
            diverged: false,
        });
    }
    Ok(Table {
        kind: spec.kind,
        series,
    })
}

/// Mean relative error of recursive summation over the trials, per `n` and
/// mode.
pub fn run_sum_experiment(spec: &ExperimentSpec) -> Result<Table> {
    if spec.kind != ExperimentKind::Sum {
        return Err(Error::invalid("spec kind is not `sum`"));
    }
    error_table(spec, &collect_errors(spec)?)
}

/// Mean relative error of the inner product over the trials, per `n` and
/// mode.
pub fn run_dot_experiment(spec: &ExperimentSpec) -> Result<Table> {
    if spec.kind != ExperimentKind::Dot {
        return Err(Error::invalid("spec kind is not `dot`"));
    }
    error_table(spec, &collect_errors(spec)?)
}

/// Deterministic, bias, Azuma–Hoeffding and Bienaymé–Chebyshev summation
/// bounds with `κ = 1`, one file per `r`.
pub fn run_bounds_table(spec: &ExperimentSpec) -> Result<Table> {
    if spec.kind != ExperimentKind::BoundsTable {
        return Err(Error::invalid("spec kind is not `bounds-table`"));
    }
    spec.validate()?;
    let fmt = spec.format()?;
    let mut series = Vec::new();
    for &r in &spec.r_list {
        let cfg = SrConfig::stochastic(fmt, r)?;
        let mut rows = Vec::with_capacity(4 * spec.n_grid.len());
        for &n in &spec.n_grid {
            let q = BoundQuery::new(n, spec.p, r, spec.lambda, 1.0)?;
            let entries = [
                ("det", bounds::det_bound_sum(n, spec.p, 1.0)),
                ("bias", bounds::bias_bound_sum(&q)),
                ("ah", bounds::ah_bound_sum(&q)?),
                ("bc", bounds::bc_bound_sum(&q)?),
            ];
            rows.extend(entries.into_iter().map(|(mode, value)| Row {
                n_or_k: n,
                mode: mode.to_string(),
                value,
                stderr: 0.0,
            }));
        }
        series.push(Series {
            file: file_name(spec.kind, spec.p, &mode_file_label(&cfg)),
            rows,
            diverged: false,
        });
    }
    Ok(Table {
        kind: spec.kind,
        series,
    })
}

fn trajectory_rows(label: &str, traj: &GdTrajectory, iters: usize) -> Vec<Row> {
    (0..=iters)
        .map(|k| Row {
            n_or_k: k as u64,
            mode: label.to_string(),
            value: traj.loss_series.get(k).copied().unwrap_or(f64::INFINITY),
            stderr: 0.0,
        })
        .collect()
}

/// Losses of gradient descent on the Rosenbrock function.
///
/// Per starting point: the binary64 baseline and precision-`p` RN once
/// each (both deterministic), and every stochastic mode averaged over the
/// trials. A trial that diverges contributes `+∞` after its last iterate.
pub fn run_rosenbrock(spec: &ExperimentSpec) -> Result<Table> {
    if spec.kind != ExperimentKind::Rosenbrock {
        return Err(Error::invalid("spec kind is not `rosenbrock`"));
    }
    spec.validate()?;
    let fmt = spec.format()?;
    let opts = GdOptions {
        round_step_product: spec.round_step_product,
    };
    let baseline = SrConfig::nearest(FpFormat::BINARY64);
    let sr_modes: Vec<SrConfig> = spec
        .r_list
        .iter()
        .map(|&r| SrConfig::stochastic(fmt, r))
        .collect::<Result<_>>()?;
    let mut series = Vec::new();
    for &x0 in &spec.starts {
        let dir = if spec.starts.len() > 1 {
            PathBuf::from(format!("start_{}_{}", x0[0], x0[1]))
        } else {
            PathBuf::new()
        };
        let mut unused = derive_trial_stream(spec.seed, u64::MAX);
        let base = kernels::gd_rosenbrock_with(x0, spec.t, spec.iters, &baseline, &mut unused, opts)?;
        series.push(Series {
            file: dir.join(file_name(spec.kind, 53, "rn")),
            rows: trajectory_rows("binary64", &base, spec.iters),
            diverged: base.diverged,
        });
        if spec.include_rn {
            let rn = SrConfig::nearest(fmt);
            let traj = kernels::gd_rosenbrock_with(x0, spec.t, spec.iters, &rn, &mut unused, opts)?;
            series.push(Series {
                file: dir.join(file_name(spec.kind, spec.p, "rn")),
                rows: trajectory_rows(&rn.label(), &traj, spec.iters),
                diverged: traj.diverged,
            });
        }
        if sr_modes.is_empty() {
            continue;
        }
        let per_trial = run_trials(spec, |trial| {
            let mut rng = derive_trial_stream(spec.seed, trial);
            sr_modes
                .iter()
                .map(|cfg| kernels::gd_rosenbrock_with(x0, spec.t, spec.iters, cfg, &mut rng, opts))
                .collect::<Result<Vec<_>>>()
        })?;
        for (m, cfg) in sr_modes.iter().enumerate() {
            let diverged = per_trial.iter().any(|t| t[m].diverged);
            let mut rows = Vec::with_capacity(spec.iters + 1);
            let mut losses = Vec::with_capacity(spec.trials);
            for k in 0..=spec.iters {
                losses.clear();
                losses.extend(
                    per_trial
                        .iter()
                        .map(|t| t[m].loss_series.get(k).copied().unwrap_or(f64::INFINITY)),
                );
                let (value, stderr) = mean_stderr(&losses)?;
                rows.push(Row {
                    n_or_k: k as u64,
                    mode: cfg.label(),
                    value,
                    stderr: if stderr.is_nan() { f64::INFINITY } else { stderr },
                });
            }
            series.push(Series {
                file: dir.join(file_name(spec.kind, spec.p, &mode_file_label(cfg))),
                rows,
                diverged,
            });
        }
    }
    Ok(Table {
        kind: spec.kind,
        series,
    })
}

/// Dispatches on `spec.kind`.
pub fn run(spec: &ExperimentSpec) -> Result<Table> {
    match spec.kind {
        ExperimentKind::Sum => run_sum_experiment(spec),
        ExperimentKind::Dot => run_dot_experiment(spec),
        ExperimentKind::Rosenbrock => run_rosenbrock(spec),
        ExperimentKind::BoundsTable => run_bounds_table(spec),
    }
}

/// 17 significant digits, enough to round-trip any binary64 value.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn write_series(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n_or_k", "mode", "value", "stderr"])?;
    for row in rows {
        w.write_record([
            row.n_or_k.to_string(),
            row.mode.clone(),
            format_float(row.value),
            format_float(row.stderr),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes every series under `dir`. If any file fails, the files already
/// written are removed before the error is returned.
pub fn write_table(table: &Table, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for s in &table.series {
            let path = dir.join(&s.file);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|source| Error::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            written.push(path.clone());
            write_series(&path, &s.rows)?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for path in &written {
                let _ = fs::remove_file(path);
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(kind);
        spec.n_grid = vec![10, 50];
        spec.trials = 4;
        spec.iters = 20;
        spec
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(estimate_coverage(&[0.0; 5], 1e-3).unwrap(), 1.0);
        assert!(estimate_coverage(&[], 1.0).is_err());
        assert_eq!(estimate_coverage(&[0.1, 0.2, 0.3, 0.4], 0.25).unwrap(), 0.5);
    }

    #[test]
    fn bias_of_representable_value() {
        let cfg = SrConfig::stochastic(FpFormat::new(2).unwrap(), RandomBits::Bits(1)).unwrap();
        assert_eq!(estimate_bias(1.5, &cfg, 100, 3).unwrap(), (1.5, 0.0));
        assert!(estimate_bias(1.5, &cfg, 1, 3).is_err());
    }

    #[test]
    fn file_names() {
        let fmt = FpFormat::BINARY16;
        let name = |cfg: &SrConfig| file_name(ExperimentKind::Sum, 11, &mode_file_label(cfg));
        assert_eq!(name(&SrConfig::nearest(fmt)), PathBuf::from("sum_p11_rn.csv"));
        let sr7 = SrConfig::stochastic(fmt, RandomBits::Bits(7)).unwrap();
        assert_eq!(name(&sr7), PathBuf::from("sum_p11_r7.csv"));
        let ideal = SrConfig::stochastic(fmt, RandomBits::Ideal).unwrap();
        assert_eq!(name(&ideal), PathBuf::from("sum_p11_rideal.csv"));
    }

    #[test]
    fn sum_row_count() {
        let spec = small(ExperimentKind::Sum);
        let table = run_sum_experiment(&spec).unwrap();
        assert_eq!(table.rows().count(), spec.n_grid.len() * 6);
        assert!(table.rows().all(|r| r.value >= 0.0 && r.stderr >= 0.0));
    }

    #[test]
    fn rosenbrock_row_count() {
        let mut spec = small(ExperimentKind::Rosenbrock);
        spec.starts = vec![[0.0, 0.0]];
        let table = run_rosenbrock(&spec).unwrap();
        // baseline + RN + five SR modes
        assert_eq!(table.series.len(), 7);
        assert_eq!(table.rows().count(), (spec.iters + 1) * 7);
    }

    #[test]
    fn validation() {
        let mut spec = small(ExperimentKind::Sum);
        spec.trials = 0;
        assert!(spec.validate().is_err());
        let mut spec = small(ExperimentKind::Sum);
        spec.n_grid = vec![10, 10];
        assert!(spec.validate().is_err());
        let mut spec = small(ExperimentKind::Sum);
        spec.r_list = vec![RandomBits::Bits(43)];
        assert!(spec.validate().is_err());
        let mut spec = small(ExperimentKind::BoundsTable);
        spec.lambda = 1.0;
        assert!(run_bounds_table(&spec).is_err());
    }
}
