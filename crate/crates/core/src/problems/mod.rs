//! Finite-sum problem oracles.
//!
//! A problem is the average `f(x) = (1/N) Σ f_i(x)` of `N` component
//! functions on `ℝ^n`. Component indices are zero-based in memory; files and
//! user-facing text use one-based indices.

mod dataset;
mod logistic;
mod quadratic;

pub use dataset::{load_dataset, parse_dataset, DataRow, DatasetFormat, DatasetRecords};
pub use logistic::{LogisticComponent, LogisticSum, DEFAULT_LAMBDA};
pub use quadratic::{generate_quadratic, QuadraticComponent, QuadraticSum};

use crate::meter::EvalMeter;
use crate::par::{self, Execution};
use crate::Vector;

/// A known solution of the full problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimizer {
    pub x: Vector,
    pub value: f64,
}

/// Oracle for a finite sum of smooth component functions.
///
/// Implementors supply the per-component oracles; the batch and full
/// estimators are provided. Only [`FiniteSum::batch_value`] is metered:
/// gradients are free, and full-problem evaluations exist for reporting.
pub trait FiniteSum: Send + Sync {
    fn num_components(&self) -> usize;

    fn dim(&self) -> usize;

    fn component_value(&self, i: usize, x: &Vector) -> f64;

    fn component_gradient(&self, i: usize, x: &Vector) -> Vector;

    fn component_value_and_gradient(&self, i: usize, x: &Vector) -> (f64, Vector) {
        (self.component_value(i, x), self.component_gradient(i, x))
    }

    /// Lipschitz constant of every component gradient, when known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    fn minimizer(&self) -> Option<&Minimizer> {
        None
    }

    fn label(&self) -> &str;

    /// Subsampled objective `(1/S) Σ_{i∈batch} f_i(x)`; charges `S` to the meter.
    fn batch_value(&self, batch: &[usize], x: &Vector, meter: &mut EvalMeter) -> f64 {
        meter.charge(batch.len());
        let sum: f64 = batch.iter().map(|&i| self.component_value(i, x)).sum();
        sum / batch.len() as f64
    }

    /// Subsampled gradient `(1/S) Σ_{i∈batch} ∇f_i(x)`.
    fn batch_gradient(&self, batch: &[usize], x: &Vector) -> Vector {
        self.batch_gradient_with_norms(batch, x).0
    }

    /// Subsampled gradient together with `‖∇f_i(x)‖` for each batch entry.
    fn batch_gradient_with_norms(&self, batch: &[usize], x: &Vector) -> (Vector, Vec<f64>) {
        let mut acc = Vector::zeros(self.dim());
        let mut norms = Vec::with_capacity(batch.len());
        for &i in batch {
            let g = self.component_gradient(i, x);
            norms.push(g.norm());
            acc += g;
        }
        acc /= batch.len() as f64;
        (acc, norms)
    }

    fn full_value(&self, x: &Vector) -> f64 {
        let n = self.num_components();
        let sum = par::chunked_reduce(
            Execution::default(),
            n,
            |r| r.map(|i| self.component_value(i, x)).sum::<f64>(),
            |a, b| a + b,
        )
        .unwrap_or(0.0);
        sum / n as f64
    }

    fn full_gradient(&self, x: &Vector) -> Vector {
        self.full_value_and_gradient(x).1
    }

    /// Full value and gradient in one pass over the components.
    fn full_value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        self.full_value_and_gradient_with(Execution::default(), x)
    }

    /// As [`FiniteSum::full_value_and_gradient`] with an explicit execution
    /// mode; both modes return identical bits.
    fn full_value_and_gradient_with(&self, exec: Execution, x: &Vector) -> (f64, Vector) {
        let n = self.num_components();
        let dim = self.dim();
        let (sum, mut grad) = par::chunked_reduce(
            exec,
            n,
            |r| {
                let mut v = 0.0;
                let mut g = Vector::zeros(dim);
                for i in r {
                    let (fi, gi) = self.component_value_and_gradient(i, x);
                    v += fi;
                    g += gi;
                }
                (v, g)
            },
            |(va, ga), (vb, gb)| (va + vb, ga + gb),
        )
        .unwrap_or_else(|| (0.0, Vector::zeros(dim)));
        grad /= n as f64;
        (sum / n as f64, grad)
    }
}

/// Concrete problem built by the harness.
#[derive(Clone, Debug)]
pub enum FiniteSumProblem {
    Quadratic(QuadraticSum),
    Logistic(LogisticSum),
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            FiniteSumProblem::Quadratic($p) => $e,
            FiniteSumProblem::Logistic($p) => $e,
        }
    };
}

impl FiniteSum for FiniteSumProblem {
    fn num_components(&self) -> usize {
        delegate!(self, p => p.num_components())
    }

    fn dim(&self) -> usize {
        delegate!(self, p => p.dim())
    }

    fn component_value(&self, i: usize, x: &Vector) -> f64 {
        delegate!(self, p => p.component_value(i, x))
    }

    fn component_gradient(&self, i: usize, x: &Vector) -> Vector {
        delegate!(self, p => p.component_gradient(i, x))
    }

    fn component_value_and_gradient(&self, i: usize, x: &Vector) -> (f64, Vector) {
        delegate!(self, p => p.component_value_and_gradient(i, x))
    }

    fn lipschitz(&self) -> Option<f64> {
        delegate!(self, p => p.lipschitz())
    }

    fn minimizer(&self) -> Option<&Minimizer> {
        delegate!(self, p => p.minimizer())
    }

    fn label(&self) -> &str {
        delegate!(self, p => p.label())
    }
}
