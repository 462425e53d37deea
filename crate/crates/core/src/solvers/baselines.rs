//! Gradient-only comparison methods: SGD with `1/k` steps and the SVRG-BB
//! family (SVRG-BB, SGD-BB, SGD-BB with step smoothing).
//!
//! None of these evaluate batch function values, so their `cum_evals`
//! column stays at zero; `grad_pass_cost` records their gradient work.
//! One record is one stochastic step; an epoch is `p` consecutive steps.

use rand_chacha::ChaCha8Rng;

use super::{IterationRecord, Solver, SolverConfig};
use crate::error::Result;
use crate::problems::FiniteSum;
use crate::sampling::uniform_draw;
use crate::Vector;

fn bb_ratio(dx: &Vector, dg: &Vector) -> f64 {
    dx.norm_squared() / dx.dot(dg)
}

/// `x_{k+1} = x_k − g_k / max(k,1)` with a fresh uniform sample each step.
pub struct Sgd<'a, P: ?Sized> {
    problem: &'a P,
    sample_size: usize,
    rng: ChaCha8Rng,
    k: usize,
    x: Vector,
    grad_cost: u64,
}

impl<'a, P: FiniteSum + ?Sized> Sgd<'a, P> {
    pub fn new(problem: &'a P, config: &SolverConfig, x0: Vector, rng: ChaCha8Rng) -> Self {
        Sgd {
            problem,
            sample_size: config.sample_size,
            rng,
            k: 0,
            x: x0,
            grad_cost: 0,
        }
    }
}

impl<P: FiniteSum + ?Sized> Solver for Sgd<'_, P> {
    fn step(&mut self) -> Result<IterationRecord> {
        let k = self.k;
        let (f_full, g_full) = self.problem.full_value_and_gradient(&self.x);
        let sample = uniform_draw(self.problem.num_components(), self.sample_size, k, &mut self.rng)?;
        let g = self.problem.batch_gradient(&sample.indices, &self.x);
        self.grad_cost += sample.len() as u64;
        let gamma = 1.0 / k.max(1) as f64;
        self.x -= g * gamma;
        self.k += 1;
        Ok(IterationRecord {
            k,
            resampled: true,
            c: f64::NAN,
            gamma,
            alpha: 1.0,
            lsp_trials: 0,
            cum_evals: 0,
            grad_pass_cost: self.grad_cost,
            f_full,
            grad_norm_full: g_full.norm(),
            sample: sample.indices,
        })
    }

    fn x(&self) -> &Vector {
        &self.x
    }

    fn k(&self) -> usize {
        self.k
    }
}

/// SVRG with a Barzilai-Borwein epoch step.
///
/// Each epoch takes a snapshot `x̃` with its full gradient `μ` and performs
/// `p` steps `x ← x − η (∇f_B(x) − ∇f_B(x̃) + μ)`. The first epoch uses
/// `η_0`; later epochs use `η = ‖Δx̃‖² / (p Δx̃ᵀΔμ)` from consecutive
/// snapshots. The last iterate of an epoch becomes the next snapshot.
pub struct SvrgBb<'a, P: ?Sized> {
    problem: &'a P,
    sample_size: usize,
    p: usize,
    rng: ChaCha8Rng,
    k: usize,
    x: Vector,
    snapshot: Option<(Vector, Vector)>,
    prev_snapshot: Option<(Vector, Vector)>,
    step: f64,
    grad_cost: u64,
}

impl<'a, P: FiniteSum + ?Sized> SvrgBb<'a, P> {
    pub fn new(problem: &'a P, config: &SolverConfig, x0: Vector, rng: ChaCha8Rng) -> Self {
        SvrgBb {
            problem,
            sample_size: config.sample_size,
            p: config.epoch_length(problem.dim()),
            rng,
            k: 0,
            x: x0,
            snapshot: None,
            prev_snapshot: None,
            step: config.eta0,
            grad_cost: 0,
        }
    }

    pub fn epoch_step(&self) -> f64 {
        self.step
    }
}

impl<P: FiniteSum + ?Sized> Solver for SvrgBb<'_, P> {
    fn step(&mut self) -> Result<IterationRecord> {
        let k = self.k;
        let problem = self.problem;
        let (f_full, g_full) = problem.full_value_and_gradient(&self.x);
        let n = problem.num_components();

        let mut c = f64::NAN;
        if k.is_multiple_of(self.p) {
            let mu = problem.full_gradient(&self.x);
            self.grad_cost += n as u64;
            self.prev_snapshot = self.snapshot.take();
            if let Some((px, pmu)) = &self.prev_snapshot {
                let ratio = bb_ratio(&(&self.x - px), &(&mu - pmu));
                // keep the previous step when the ratio is unusable
                if ratio.is_finite() && ratio > 0.0 {
                    c = ratio;
                    self.step = ratio / self.p as f64;
                }
            }
            self.snapshot = Some((self.x.clone(), mu));
        }
        let (snap_x, mu) = self.snapshot.as_ref().expect("snapshot taken at k = 0");

        let sample = uniform_draw(n, self.sample_size, k, &mut self.rng)?;
        let g_here = problem.batch_gradient(&sample.indices, &self.x);
        let g_snap = problem.batch_gradient(&sample.indices, snap_x);
        self.grad_cost += 2 * sample.len() as u64;
        let v = g_here - g_snap + mu;
        self.x -= v * self.step;
        self.k += 1;
        Ok(IterationRecord {
            k,
            resampled: true,
            c,
            gamma: self.step,
            alpha: 1.0,
            lsp_trials: 0,
            cum_evals: 0,
            grad_pass_cost: self.grad_cost,
            f_full,
            grad_norm_full: g_full.norm(),
            sample: sample.indices,
        })
    }

    fn x(&self) -> &Vector {
        &self.x
    }

    fn k(&self) -> usize {
        self.k
    }
}

/// Plain SGD with a Barzilai-Borwein epoch step and no full gradients.
///
/// During epoch `e` the stochastic gradients are averaged geometrically,
/// `ĝ ← β ∇f_B(x) + (1 − β) ĝ`. Epochs 0 and 1 use `η_0` and `η_1`; from
/// epoch 2 on the step is `‖Δx̃‖² / (p |Δx̃ᵀΔĝ|)` from the last two epoch
/// end points and averages. With smoothing, the step actually used at
/// epoch `e ≥ 1` is `(Π_{j<e} (j+1) η_j)^{1/e} / (e+1)`, the geometric mean
/// of the scaled raw steps with an explicit `1/(e+1)` decay.
pub struct SgdBb<'a, P: ?Sized> {
    problem: &'a P,
    sample_size: usize,
    p: usize,
    beta: f64,
    eta1: f64,
    smooth: bool,
    rng: ChaCha8Rng,
    k: usize,
    x: Vector,
    /// End points `x̃` of the last two epochs (oldest first).
    anchors: Vec<Vector>,
    /// Gradient averages of the last two completed epochs.
    averages: Vec<Vector>,
    running: Vector,
    raw_step: f64,
    step: f64,
    log_scaled_sum: f64,
    grad_cost: u64,
}

impl<'a, P: FiniteSum + ?Sized> SgdBb<'a, P> {
    pub fn new(problem: &'a P, config: &SolverConfig, smooth: bool, x0: Vector, rng: ChaCha8Rng) -> Self {
        let dim = problem.dim();
        SgdBb {
            problem,
            sample_size: config.sample_size,
            p: config.epoch_length(dim),
            beta: config.averaging_weight(dim),
            eta1: config.eta1,
            smooth,
            rng,
            k: 0,
            anchors: vec![x0.clone()],
            x: x0,
            averages: Vec::new(),
            running: Vector::zeros(dim),
            raw_step: config.eta0,
            step: config.eta0,
            log_scaled_sum: 0.0,
            grad_cost: 0,
        }
    }

    pub fn epoch_step(&self) -> f64 {
        self.step
    }

    /// Closes epoch `e − 1` and sets the step of epoch `e`.
    fn start_epoch(&mut self, e: usize) -> f64 {
        push_bounded(&mut self.anchors, self.x.clone());
        let avg = std::mem::replace(&mut self.running, Vector::zeros(self.x.len()));
        push_bounded(&mut self.averages, avg);

        // raw step of the epoch that just ended enters the smoothing product
        self.log_scaled_sum += (e as f64 * self.raw_step).ln();

        let mut c = f64::NAN;
        self.raw_step = if e == 1 {
            self.eta1
        } else {
            let dx = &self.anchors[1] - &self.anchors[0];
            let dg = &self.averages[1] - &self.averages[0];
            let ratio = dx.norm_squared() / dx.dot(&dg).abs();
            if ratio.is_finite() && ratio > 0.0 {
                c = ratio;
                ratio / self.p as f64
            } else {
                self.raw_step
            }
        };
        self.step = if self.smooth {
            (self.log_scaled_sum / e as f64).exp() / (e + 1) as f64
        } else {
            self.raw_step
        };
        c
    }
}

fn push_bounded(buf: &mut Vec<Vector>, v: Vector) {
    if buf.len() == 2 {
        buf.remove(0);
    }
    buf.push(v);
}

impl<P: FiniteSum + ?Sized> Solver for SgdBb<'_, P> {
    fn step(&mut self) -> Result<IterationRecord> {
        let k = self.k;
        let problem = self.problem;
        let (f_full, g_full) = problem.full_value_and_gradient(&self.x);

        let c = if k > 0 && k.is_multiple_of(self.p) {
            self.start_epoch(k / self.p)
        } else {
            f64::NAN
        };

        let sample = uniform_draw(problem.num_components(), self.sample_size, k, &mut self.rng)?;
        let g = problem.batch_gradient(&sample.indices, &self.x);
        self.grad_cost += sample.len() as u64;
        self.running = &g * self.beta + &self.running * (1.0 - self.beta);
        self.x -= g * self.step;
        self.k += 1;
        Ok(IterationRecord {
            k,
            resampled: true,
            c,
            gamma: self.step,
            alpha: 1.0,
            lsp_trials: 0,
            cum_evals: 0,
            grad_pass_cost: self.grad_cost,
            f_full,
            grad_norm_full: g_full.norm(),
            sample: sample.indices,
        })
    }

    fn x(&self) -> &Vector {
        &self.x
    }

    fn k(&self) -> usize {
        self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate_quadratic, QuadraticComponent, QuadraticSum};
    use crate::solvers::{run, Method, SolverConfig};
    use nalgebra::DMatrix;
    use rand::SeedableRng;

    #[test]
    fn sgd_closed_form_first_step() {
        let p = QuadraticSum::from_components(
            vec![QuadraticComponent {
                a: DMatrix::from_element(1, 1, 1.0),
                b: Vector::from_element(1, 2.0),
            }],
            "shifted",
        )
        .unwrap();
        let mut cfg = SolverConfig::with_method(Method::Sgd);
        cfg.maxiter = 4;
        let t = run(&p, &cfg).unwrap();
        // x_1 = 2 after the unit first step; it then stays there
        assert_eq!(t.final_x[0], 2.0);
        assert_eq!(t.records.len(), 5);
        for r in &t.records {
            assert_eq!(r.gamma, 1.0 / r.k.max(1) as f64);
            assert_eq!((r.alpha, r.lsp_trials, r.cum_evals), (1.0, 0, 0));
        }
        assert_eq!(t.records[1].f_full, 0.0);
    }

    fn problem() -> QuadraticSum {
        generate_quadratic(3, 30, &mut ChaCha8Rng::seed_from_u64(21)).unwrap()
    }

    #[test]
    fn svrg_bb_epoch_structure() {
        let p = problem();
        let mut cfg = SolverConfig::with_method(Method::SvrgBb);
        cfg.maxiter = 29;
        let t = run(&p, &cfg).unwrap();
        let period = 6; // 2n
        for r in &t.records {
            if r.k < period {
                assert_eq!(r.gamma, 0.01);
            }
            assert_eq!(r.cum_evals, 0);
            let epochs = (r.k / period + 1) as u64;
            assert_eq!(r.grad_pass_cost, epochs * 30 + 2 * (r.k as u64 + 1));
        }
        // later epochs use the BB ratio of the snapshots
        let r = &t.records[period];
        assert!(r.c.is_finite());
        assert_eq!(r.gamma, r.c / period as f64);
        assert_eq!(t.records[period + 1].gamma, r.gamma);
    }

    #[test]
    fn svrg_bb_converges_on_small_quadratic() {
        let p = problem();
        let mut cfg = SolverConfig::with_method(Method::SvrgBb);
        cfg.maxiter = 600;
        let t = run(&p, &cfg).unwrap();
        let fstar = p.minimizer().unwrap().value;
        let gap0 = t.records[0].f_full - fstar;
        let gap = t.last().f_full - fstar;
        assert!(gap < 1e-3 * gap0, "gap {gap} vs {gap0}");
    }

    #[test]
    fn sgd_bb_initial_steps_and_smoothing() {
        let p = problem();
        let mut cfg = SolverConfig::with_method(Method::SgdBb);
        cfg.eta0 = 0.01;
        cfg.eta1 = 0.02;
        cfg.maxiter = 20;
        let t = run(&p, &cfg).unwrap();
        // p = n = 3
        assert!(t.records[..3].iter().all(|r| r.gamma == 0.01));
        assert!(t.records[3..6].iter().all(|r| r.gamma == 0.02));
        let bb = &t.records[6];
        assert!(bb.c.is_finite() && bb.c > 0.0);
        assert_eq!(bb.gamma, bb.c / 3.0);

        cfg.method = Method::SgdBbSmooth;
        let s = run(&p, &cfg).unwrap();
        // epoch 1: (1·η0)^{1/1} / 2
        assert!((s.records[3].gamma - 0.005).abs() < 1e-15);
        // epoch 2: (1·η0 · 2·η1)^{1/2} / 3
        let expect = (0.01f64 * 2.0 * 0.02).sqrt() / 3.0;
        assert!((s.records[6].gamma - expect).abs() < 1e-15);
        assert!(s.records.iter().all(|r| r.cum_evals == 0));
    }
}
