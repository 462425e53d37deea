//! Multi-seed experiment cells and cross-seed aggregation.
//!
//! Every (configuration, seed) cell runs on the same frozen problem with its
//! own solver, RNG and meter, so cells can execute concurrently.
//!
//! Aggregates put the cost column of the trace (`cum_evals` by default) on
//! the x-axis. Curves from different seeds are aligned on the union of their
//! cost values by carrying the last value forward; before its first record a
//! curve takes its initial value. A non-finite `f_full` ends a curve: later
//! cells are empty in per-run output and count as `+inf` in medians and means.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::csv::{fmt_f64, write_trace};
use super::instance::{load_instance, save_instance};
use super::write_atomic;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::problems::{
    generate_quadratic, load_dataset, DatasetFormat, FiniteSum, FiniteSumProblem, LogisticSum,
    QuadraticSum,
};
use crate::solvers::{run, RunTrace, SolverConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    /// Random quadratic generated in memory from `seed`.
    Quadratic { n: usize, count: usize, seed: u64 },
    /// Frozen quadratic instance file.
    Instance(PathBuf),
    /// Logistic regression on a dataset file.
    Dataset {
        path: PathBuf,
        format: DatasetFormat,
        lambda: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Aggregation {
    PerRun,
    #[default]
    Median,
    Mean,
}

/// Cost column used as the x-axis of aggregates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Axis {
    #[default]
    CumEvals,
    GradPassCost,
}

impl Axis {
    pub fn column(self) -> &'static str {
        match self {
            Axis::CumEvals => "cum_evals",
            Axis::GradPassCost => "grad_pass_cost",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledConfig {
    pub label: String,
    pub config: SolverConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub configs: Vec<LabeledConfig>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub aggregation: Aggregation,
    pub axis: Axis,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.configs.is_empty() {
            return Err(Error::config("at least one solver configuration is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        Ok(())
    }
}

/// One finished (configuration, seed) run.
#[derive(Clone, Debug)]
pub struct Cell {
    pub label: String,
    pub seed: u64,
    pub trace: RunTrace,
}

pub fn build_problem(spec: &ProblemSpec) -> Result<FiniteSumProblem> {
    Ok(match spec {
        ProblemSpec::Quadratic { n, count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            FiniteSumProblem::Quadratic(generate_quadratic(*n, *count, &mut rng)?.with_seed(*seed))
        }
        ProblemSpec::Instance(path) => FiniteSumProblem::Quadratic(load_instance(path)?),
        ProblemSpec::Dataset {
            path,
            format,
            lambda,
        } => {
            let data = load_dataset(path, *format)?;
            let name = path.file_name().map_or_else(
                || path.display().to_string(),
                |f| f.to_string_lossy().into_owned(),
            );
            let label = format!("logistic({name},lambda={})", fmt_f64(*lambda));
            FiniteSumProblem::Logistic(LogisticSum::with_label(&data, *lambda, label)?)
        }
    })
}

/// Generates a quadratic instance from `seed` and saves it to `path`.
pub fn generate_instance(n: usize, count: usize, seed: u64, path: &Path) -> Result<QuadraticSum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let problem = generate_quadratic(n, count, &mut rng)?.with_seed(seed);
    save_instance(&problem, path)?;
    Ok(problem)
}

/// File-name form of a label.
pub fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_=.@".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn trace_file_name(label: &str, seed: u64) -> String {
    format!("{}_seed{seed}.csv", file_label(label))
}

/// Runs every (configuration, seed) cell, configurations outermost.
pub fn run_cells<P: FiniteSum + ?Sized>(
    problem: &P,
    configs: &[LabeledConfig],
    seeds: &[u64],
) -> Result<Vec<Cell>> {
    run_cells_with(Execution::default(), problem, configs, seeds)
}

pub fn run_cells_with<P: FiniteSum + ?Sized>(
    exec: Execution,
    problem: &P,
    configs: &[LabeledConfig],
    seeds: &[u64],
) -> Result<Vec<Cell>> {
    let jobs: Vec<(&LabeledConfig, u64)> = configs
        .iter()
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    par::map_slice(exec, &jobs, |&(lc, seed)| {
        let config = SolverConfig {
            seed,
            ..lc.config.clone()
        };
        run(problem, &config).map(|trace| Cell {
            label: lc.label.clone(),
            seed,
            trace,
        })
    })
    .into_iter()
    .collect()
}

/// Runs one configuration for one seed and writes `<out>/<label>_seed<seed>.csv`.
pub fn run_single<P: FiniteSum + ?Sized>(
    problem: &P,
    config: &LabeledConfig,
    seed: u64,
    out: &Path,
) -> Result<PathBuf> {
    let cell = run_cells(problem, std::slice::from_ref(config), &[seed])?.remove(0);
    let path = out.join(trace_file_name(&cell.label, seed));
    write_atomic(&path, &write_trace(&cell.trace))?;
    Ok(path)
}

/// Runs every configuration for every seed, one trace file per cell.
pub fn run_all<P: FiniteSum + ?Sized>(problem: &P, spec: &ExperimentSpec) -> Result<Vec<PathBuf>> {
    spec.validate()?;
    let cells = run_cells(problem, &spec.configs, &spec.seeds)?;
    write_cells(&cells, &spec.out)
}

fn write_cells(cells: &[Cell], dir: &Path) -> Result<Vec<PathBuf>> {
    cells
        .iter()
        .map(|c| {
            let path = dir.join(trace_file_name(&c.label, c.seed));
            write_atomic(&path, &write_trace(&c.trace))?;
            Ok(path)
        })
        .collect()
}

/// Runs the single configuration of `spec` for each `m` and writes
/// `<out>/sweep_m.csv`, with traces under `<out>/traces/`.
pub fn sweep_m<P: FiniteSum + ?Sized>(problem: &P, spec: &ExperimentSpec, ms: &[usize]) -> Result<PathBuf> {
    spec.validate()?;
    let [base] = spec.configs.as_slice() else {
        return Err(Error::config("sweep-m takes exactly one method"));
    };
    if ms.is_empty() || ms.contains(&0) {
        return Err(Error::config("m values must be at least 1"));
    }
    let configs: Vec<LabeledConfig> = ms
        .iter()
        .map(|&m| LabeledConfig {
            label: format!("m={m}"),
            config: SolverConfig {
                m,
                ..base.config.clone()
            },
        })
        .collect();
    finish_comparison(problem, spec, &configs, "sweep_m.csv")
}

/// Runs every configuration of `spec` and writes `<out>/compare.csv`, with
/// traces under `<out>/traces/`.
pub fn compare_methods<P: FiniteSum + ?Sized>(problem: &P, spec: &ExperimentSpec) -> Result<PathBuf> {
    spec.validate()?;
    finish_comparison(problem, spec, &spec.configs, "compare.csv")
}

fn finish_comparison<P: FiniteSum + ?Sized>(
    problem: &P,
    spec: &ExperimentSpec,
    configs: &[LabeledConfig],
    name: &str,
) -> Result<PathBuf> {
    let cells = run_cells(problem, configs, &spec.seeds)?;
    write_cells(&cells, &spec.out.join("traces"))?;
    let path = spec.out.join(name);
    write_atomic(&path, &aggregate(&cells, spec.aggregation, spec.axis))?;
    Ok(path)
}

/// `(cost, f_full)` pairs of a trace.
pub fn curve(trace: &RunTrace, axis: Axis) -> Vec<(u64, f64)> {
    trace
        .records
        .iter()
        .map(|r| {
            let x = match axis {
                Axis::CumEvals => r.cum_evals,
                Axis::GradPassCost => r.grad_pass_cost,
            };
            (x, r.f_full)
        })
        .collect()
}

/// Last-value-carried-forward value of `points` at cost `x`; `None` once the
/// curve has hit a non-finite value.
pub fn value_at(points: &[(u64, f64)], x: u64) -> Option<f64> {
    let upto = points.partition_point(|p| p.0 <= x);
    let scanned = &points[..upto.max(1).min(points.len())];
    if scanned.iter().any(|p| !p.1.is_finite()) {
        return None;
    }
    scanned.last().map(|p| p.1)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Renders the aggregate CSV for `cells`, one column per label (or per
/// label and seed for [`Aggregation::PerRun`]), in first-appearance order.
pub fn aggregate(cells: &[Cell], aggregation: Aggregation, axis: Axis) -> String {
    let curves: Vec<Vec<(u64, f64)>> = cells.iter().map(|c| curve(&c.trace, axis)).collect();
    let mut grid: Vec<u64> = curves.iter().flatten().map(|p| p.0).collect();
    grid.sort_unstable();
    grid.dedup();

    let mut labels: Vec<&str> = Vec::new();
    for c in cells {
        if !labels.contains(&c.label.as_str()) {
            labels.push(&c.label);
        }
    }

    let mut s = String::from(axis.column());
    match aggregation {
        Aggregation::PerRun => {
            for c in cells {
                let _ = write!(s, ",{}/seed{}", c.label, c.seed);
            }
        }
        _ => {
            for l in &labels {
                let _ = write!(s, ",{l}");
            }
        }
    }
    s.push('\n');

    for &x in &grid {
        s.push_str(&x.to_string());
        match aggregation {
            Aggregation::PerRun => {
                for pts in &curves {
                    s.push(',');
                    if let Some(v) = value_at(pts, x) {
                        s.push_str(&fmt_f64(v));
                    }
                }
            }
            _ => {
                for l in &labels {
                    let vals: Vec<f64> = cells
                        .iter()
                        .zip(&curves)
                        .filter(|(c, _)| c.label == *l)
                        .map(|(_, pts)| value_at(pts, x).unwrap_or(f64::INFINITY))
                        .collect();
                    let v = match aggregation {
                        Aggregation::Mean => vals.iter().sum::<f64>() / vals.len() as f64,
                        _ => median(vals),
                    };
                    let _ = write!(s, ",{}", fmt_f64(v));
                }
            }
        }
        s.push('\n');
    }
    s
}
