use rand_chacha::ChaCha8Rng;

use super::{forcing_term, IterationRecord, SolverConfig, Solver};
use crate::error::Result;
use crate::linesearch::{lsp_search, ArmijoContext};
use crate::meter::EvalMeter;
use crate::problems::FiniteSum;
use crate::sampling::{should_resample, SampleBatch, Sampler};
use crate::steplength::{anchor_coefficient, damp, Coefficient, DampingPolicy, SpectralState};
use crate::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlisesVariant {
    /// Anchor coefficient at resample iterations, BB otherwise, `γ/k`.
    Standard,
    /// `γ = 1/k` and a unit step at resample iterations; BB with
    /// `γ/k^{1+δ}` and the line search otherwise.
    Modified,
    /// Deterministic full-sample spectral gradient with the line search and
    /// no damping.
    Full,
}

/// Subsampled line-search spectral gradient method and its variants.
pub struct Slises<'a, P: ?Sized> {
    problem: &'a P,
    variant: SlisesVariant,
    m: usize,
    sample_size: usize,
    eta: f64,
    reuse: bool,
    policy: DampingPolicy,
    sampler: Sampler,
    rng: ChaCha8Rng,
    k: usize,
    x: Vector,
    sample: Option<SampleBatch>,
    spectral: SpectralState,
    /// Component gradient norms of the previous sample at the previous iterate.
    prev_norms: Vec<f64>,
    /// Batch value at `x` for the current sample, when already known.
    cached_value: Option<f64>,
    meter: EvalMeter,
    grad_cost: u64,
}

impl<'a, P: FiniteSum + ?Sized> Slises<'a, P> {
    pub fn new(
        problem: &'a P,
        config: &SolverConfig,
        variant: SlisesVariant,
        x0: Vector,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let (g_min, g_max) = (config.gamma_min, config.gamma_max);
        let policy = match variant {
            SlisesVariant::Full => DampingPolicy::undamped(g_min, g_max),
            SlisesVariant::Modified => DampingPolicy::modified(g_min, g_max, config.delta),
            SlisesVariant::Standard if !config.damping => DampingPolicy::undamped(g_min, g_max),
            SlisesVariant::Standard => DampingPolicy::standard(g_min, g_max),
        };
        let sampler = match variant {
            SlisesVariant::Full => Sampler::Uniform,
            _ => config.sampler.build(problem.num_components())?,
        };
        Ok(Slises {
            problem,
            variant,
            m: config.m,
            sample_size: config.sample_size,
            eta: config.eta,
            reuse: config.reuse,
            policy,
            sampler,
            rng,
            k: 0,
            x: x0,
            sample: None,
            spectral: SpectralState::new(),
            prev_norms: Vec::new(),
            cached_value: None,
            meter: EvalMeter::new(),
            grad_cost: 0,
        })
    }

    pub fn meter(&self) -> &EvalMeter {
        &self.meter
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    fn resample_now(&self) -> bool {
        match self.variant {
            SlisesVariant::Full => self.k == 0,
            _ => should_resample(self.k, self.m),
        }
    }

    fn next_sample(&mut self, resample: bool) -> Result<SampleBatch> {
        if !resample {
            return Ok(self.sample.as_ref().expect("sample drawn at k = 0").carried());
        }
        let n = self.problem.num_components();
        if self.variant == SlisesVariant::Full {
            return Ok(SampleBatch::full(n, self.k));
        }
        if let (Sampler::Ais(state), Some(prev)) = (&mut self.sampler, &self.sample) {
            state.update_scores(&prev.indices, &self.prev_norms);
        }
        self.sampler.draw(n, self.sample_size, self.k, &mut self.rng)
    }
}

impl<P: FiniteSum + ?Sized> Solver for Slises<'_, P> {
    fn step(&mut self) -> Result<IterationRecord> {
        let k = self.k;
        let problem = self.problem;
        let (f_full, g_full) = problem.full_value_and_gradient(&self.x);

        // sampling
        let resample = self.resample_now();
        let sample = self.next_sample(resample)?;
        if resample {
            self.cached_value = None;
        }
        let batch = &sample.indices;

        let (g, norms) = problem.batch_gradient_with_norms(batch, &self.x);
        self.grad_cost += batch.len() as u64;

        // coefficient and step scale; None means γ = 1/k with a unit step
        let anchor_iteration = k == 0 || (resample && self.m > 1 && self.variant != SlisesVariant::Full);
        let coefficient = if self.variant == SlisesVariant::Modified && resample {
            None
        } else if anchor_iteration {
            Some(anchor_coefficient(&g))
        } else {
            Some(match self.spectral.coefficient(&self.x, &g) {
                Coefficient::Degenerate => anchor_coefficient(&g),
                c => c,
            })
        };
        let gamma = match coefficient {
            None => 1.0 / k.max(1) as f64,
            Some(Coefficient::Stationary) => f64::NAN,
            Some(c) => damp(c, k, &self.policy),
        };

        let stationary = coefficient == Some(Coefficient::Stationary);
        let d = if stationary { Vector::zeros(g.len()) } else { &g * -gamma };
        let dm = g.dot(&d);

        let (alpha, trials) = if coefficient.is_none() {
            self.cached_value = None;
            (1.0, 0)
        } else if dm == 0.0 {
            (1.0, 0)
        } else {
            let meter = &mut self.meter;
            let phi0 = match self.cached_value {
                Some(v) if self.reuse => v,
                _ => problem.batch_value(batch, &self.x, meter),
            };
            let ctx = ArmijoContext {
                phi0,
                dm,
                eta: self.eta,
                t: forcing_term(k),
            };
            let x = &self.x;
            let res = lsp_search(|a| problem.batch_value(batch, &(x + &d * a), meter), &ctx);
            self.cached_value = res.value.is_finite().then_some(res.value);
            (res.alpha, res.trials)
        };

        self.spectral.remember(&self.x, &g);
        self.x += &d * alpha;
        self.prev_norms = norms;
        self.k += 1;

        let record = IterationRecord {
            k,
            resampled: resample,
            c: coefficient.map_or(f64::NAN, Coefficient::as_f64),
            gamma,
            alpha,
            lsp_trials: trials,
            cum_evals: self.meter.count(),
            grad_pass_cost: self.grad_cost,
            f_full,
            grad_norm_full: g_full.norm(),
            sample: if self.variant == SlisesVariant::Full {
                Vec::new()
            } else {
                sample.indices.clone()
            },
        };
        self.sample = Some(sample);
        Ok(record)
    }

    fn x(&self) -> &Vector {
        &self.x
    }

    fn k(&self) -> usize {
        self.k
    }
}
