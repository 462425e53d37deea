//! Iteration drivers.
//!
//! Every method implements [`Solver`], a single-iteration `step` that
//! appends one [`IterationRecord`]. [`run`] applies `maxiter + 1` steps
//! (iterations `k = 0..=maxiter`) and collects the trace.
//!
//! Record `k` logs the full objective and gradient norm at `x_k`, the
//! quantities used by iteration `k`, and the cumulative costs once that
//! iteration has finished.

mod baselines;
mod slises;

pub use baselines::{Sgd, SgdBb, SvrgBb};
pub use slises::{Slises, SlisesVariant};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problems::FiniteSum;
use crate::sampling::{AisState, Sampler};
use crate::steplength::{DEFAULT_GAMMA_MAX, DEFAULT_GAMMA_MIN};
use crate::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Slises,
    SlisesModified,
    SpectralFull,
    Sgd,
    SvrgBb,
    SgdBb,
    SgdBbSmooth,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Slises,
        Method::SlisesModified,
        Method::SpectralFull,
        Method::Sgd,
        Method::SvrgBb,
        Method::SgdBb,
        Method::SgdBbSmooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Slises => "slises",
            Method::SlisesModified => "slises-modified",
            Method::SpectralFull => "spectral-full",
            Method::Sgd => "sgd",
            Method::SvrgBb => "svrg-bb",
            Method::SgdBb => "sgd-bb",
            Method::SgdBbSmooth => "sgd-bb-smooth",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown method '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplerKind {
    Uniform,
    Ais { eps: f64, initial_score: f64 },
}

impl SamplerKind {
    pub const DEFAULT_EPS: f64 = 1.0;

    pub fn ais(eps: f64) -> Self {
        SamplerKind::Ais {
            eps,
            initial_score: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Ais { .. } => "ais",
        }
    }

    pub(crate) fn build(&self, n: usize) -> Result<Sampler> {
        Ok(match *self {
            SamplerKind::Uniform => Sampler::Uniform,
            SamplerKind::Ais { eps, initial_score } => Sampler::Ais(AisState::new(n, initial_score, eps)?),
        })
    }
}

/// Parameters of one run. Defaults follow the reference experiment setup:
/// `x_0 = 0`, `η = 1e-4`, `t_k = 2^{-k}`, `γ ∈ [1e-8, 1e8]`, `S = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Inner iterations per sample.
    pub m: usize,
    pub sample_size: usize,
    /// Armijo constant.
    pub eta: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Extra damping exponent of the modified variant.
    pub delta: f64,
    pub maxiter: usize,
    pub sampler: SamplerKind,
    pub seed: u64,
    /// Reuse the last accepted trial value as the next base value.
    pub reuse: bool,
    /// Divide the spectral coefficient by `k` (SLiSeS only).
    pub damping: bool,
    pub eta0: f64,
    pub eta1: f64,
    /// Gradient averaging weight of SGD-BB; defaults to `1/p`.
    pub beta: Option<f64>,
    /// Epoch length of the SVRG-BB family; defaults to `2n` (SVRG-BB) or `n`.
    pub p: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Slises,
            m: 3,
            sample_size: 1,
            eta: 1e-4,
            gamma_min: DEFAULT_GAMMA_MIN,
            gamma_max: DEFAULT_GAMMA_MAX,
            delta: 0.1,
            maxiter: 50,
            sampler: SamplerKind::Uniform,
            seed: 0,
            reuse: true,
            damping: true,
            eta0: 0.01,
            eta1: 0.01,
            beta: None,
            p: None,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        SolverConfig {
            method,
            ..Default::default()
        }
    }

    /// Epoch length for the SVRG-BB family on a problem of dimension `dim`.
    pub fn epoch_length(&self, dim: usize) -> usize {
        self.p.unwrap_or(match self.method {
            Method::SvrgBb => 2 * dim,
            _ => dim,
        })
    }

    pub fn averaging_weight(&self, dim: usize) -> f64 {
        self.beta.unwrap_or(1.0 / self.epoch_length(dim) as f64)
    }

    pub fn validate(&self, num_components: usize, dim: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return fail(format!("eta must lie in (0,1), got {}", self.eta));
        }
        if self.m == 0 {
            return fail("m must be at least 1".into());
        }
        if self.maxiter == 0 {
            return fail("maxiter must be at least 1".into());
        }
        if self.method != Method::SpectralFull
            && (self.sample_size == 0 || self.sample_size > num_components)
        {
            return fail(format!(
                "sample size {} must lie in 1..={num_components}",
                self.sample_size
            ));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min <= 1.0) {
            return fail(format!("gamma-min must lie in (0,1], got {}", self.gamma_min));
        }
        if !(self.gamma_max >= 1.0 && self.gamma_max.is_finite()) {
            return fail(format!("gamma-max must be finite and ≥ 1, got {}", self.gamma_max));
        }
        if self.method == Method::SlisesModified {
            if !(self.delta > 0.0) {
                return fail(format!("delta must be > 0, got {}", self.delta));
            }
            if self.m < 2 {
                return fail("the modified variant requires m > 1".into());
            }
        }
        if let SamplerKind::Ais { eps, initial_score } = self.sampler {
            if !(eps > 0.0) || !(initial_score > 0.0) {
                return fail("AIS needs eps > 0 and positive initial scores".into());
            }
        }
        if matches!(self.method, Method::SvrgBb | Method::SgdBb | Method::SgdBbSmooth) {
            if self.epoch_length(dim) == 0 {
                return fail("epoch length p must be at least 1".into());
            }
            if !(self.eta0 > 0.0 && self.eta1 > 0.0) {
                return fail("eta0 and eta1 must be positive".into());
            }
            let beta = self.averaging_weight(dim);
            if !(beta > 0.0 && beta <= 1.0) {
                return fail(format!("beta must lie in (0,1], got {beta}"));
            }
        }
        Ok(())
    }
}

/// Log of one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub resampled: bool,
    /// Raw coefficient; `NaN` when none was computed, `+∞` for an unbounded ratio.
    pub c: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub lsp_trials: usize,
    /// Cumulative batch-function evaluation units.
    pub cum_evals: u64,
    /// Cumulative component-gradient units (S per stochastic gradient, N per
    /// full gradient).
    pub grad_pass_cost: u64,
    pub f_full: f64,
    pub grad_norm_full: f64,
    /// Indices used at this iteration (empty for full-gradient methods).
    pub sample: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceHeader {
    pub config: SolverConfig,
    pub problem: String,
    pub num_components: usize,
    pub dim: usize,
    pub lipschitz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub records: Vec<IterationRecord>,
    pub final_x: Vector,
}

impl RunTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("traces are never empty")
    }
}

/// Single-iteration interface shared by every method.
pub trait Solver {
    /// Applies iteration `k` and returns its record.
    fn step(&mut self) -> Result<IterationRecord>;

    /// Current iterate.
    fn x(&self) -> &Vector;

    /// Index of the next iteration.
    fn k(&self) -> usize;
}

/// Builds the solver for `config.method`, seeded from `config.seed`.
pub fn build_solver<'a, P>(problem: &'a P, config: &SolverConfig) -> Result<Box<dyn Solver + 'a>>
where
    P: FiniteSum + ?Sized,
{
    let rng = ChaCha8Rng::seed_from_u64(config.seed);
    build_solver_with_rng(problem, config, rng)
}

pub fn build_solver_with_rng<'a, P>(
    problem: &'a P,
    config: &SolverConfig,
    rng: ChaCha8Rng,
) -> Result<Box<dyn Solver + 'a>>
where
    P: FiniteSum + ?Sized,
{
    config.validate(problem.num_components(), problem.dim())?;
    let x0 = Vector::zeros(problem.dim());
    Ok(match config.method {
        Method::Slises => Box::new(Slises::new(problem, config, SlisesVariant::Standard, x0, rng)?),
        Method::SlisesModified => Box::new(Slises::new(problem, config, SlisesVariant::Modified, x0, rng)?),
        Method::SpectralFull => Box::new(Slises::new(problem, config, SlisesVariant::Full, x0, rng)?),
        Method::Sgd => Box::new(Sgd::new(problem, config, x0, rng)),
        Method::SvrgBb => Box::new(SvrgBb::new(problem, config, x0, rng)),
        Method::SgdBb => Box::new(SgdBb::new(problem, config, false, x0, rng)),
        Method::SgdBbSmooth => Box::new(SgdBb::new(problem, config, true, x0, rng)),
    })
}

/// Runs iterations `0..=maxiter` from `x_0 = 0`.
pub fn run<P: FiniteSum + ?Sized>(problem: &P, config: &SolverConfig) -> Result<RunTrace> {
    let mut solver = build_solver(problem, config)?;
    drive(problem, config, solver.as_mut())
}

/// Drives an already built solver for `maxiter + 1` steps.
pub fn drive<P: FiniteSum + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    solver: &mut dyn Solver,
) -> Result<RunTrace> {
    let records = (0..=config.maxiter)
        .map(|_| solver.step())
        .collect::<Result<Vec<_>>>()?;
    Ok(RunTrace {
        header: TraceHeader {
            config: config.clone(),
            problem: problem.label().to_string(),
            num_components: problem.num_components(),
            dim: problem.dim(),
            lipschitz: problem.lipschitz(),
        },
        records,
        final_x: solver.x().clone(),
    })
}

/// Forcing term `t_k = 2^{-k}`.
pub fn forcing_term(k: usize) -> f64 {
    0.5f64.powi(k.min(i32::MAX as usize) as i32)
}
