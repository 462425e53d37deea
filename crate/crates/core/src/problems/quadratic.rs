use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::{FiniteSum, Minimizer};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::Vector;

/// `f_i(x) = ½ (x − b)ᵀ A (x − b)` with `A` symmetric positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticComponent {
    pub a: DMatrix<f64>,
    pub b: Vector,
}

impl QuadraticComponent {
    pub fn value(&self, x: &Vector) -> f64 {
        let r = x - &self.b;
        0.5 * r.dot(&(&self.a * &r))
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        &self.a * (x - &self.b)
    }

    pub fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let r = x - &self.b;
        let g = &self.a * &r;
        (0.5 * r.dot(&g), g)
    }
}

/// Average of quadratic components, with the exact minimizer and gradient
/// Lipschitz constant.
#[derive(Clone, Debug)]
pub struct QuadraticSum {
    components: Vec<QuadraticComponent>,
    lipschitz: f64,
    minimizer: Minimizer,
    seed: Option<u64>,
    label: String,
}

impl QuadraticSum {
    /// Builds a problem from explicit components. The Lipschitz constant is
    /// the largest eigenvalue over all `A_i`; the minimizer solves
    /// `(Σ A_i) x = Σ A_i b_i`.
    pub fn from_components(components: Vec<QuadraticComponent>, label: impl Into<String>) -> Result<Self> {
        let lipschitz = components
            .iter()
            .map(|c| {
                SymmetricEigen::new(c.a.clone())
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Self::with_lipschitz(components, lipschitz, label)
    }

    fn with_lipschitz(
        components: Vec<QuadraticComponent>,
        lipschitz: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::config("quadratic problem needs at least one component"))?;
        let n = first.b.len();
        for (i, c) in components.iter().enumerate() {
            if c.b.len() != n || c.a.nrows() != n || c.a.ncols() != n {
                return Err(Error::config(format!(
                    "component {} has inconsistent dimensions",
                    i + 1
                )));
            }
        }
        let minimizer = solve_minimizer(&components)?;
        let mut problem = QuadraticSum {
            components,
            lipschitz,
            minimizer: Minimizer {
                x: Vector::zeros(n),
                value: 0.0,
            },
            seed: None,
            label: label.into(),
        };
        let value = problem.full_value(&minimizer);
        problem.minimizer = Minimizer { x: minimizer, value };
        Ok(problem)
    }

    /// Reassembles a problem from stored parts without recomputing anything.
    pub(crate) fn from_parts(
        components: Vec<QuadraticComponent>,
        lipschitz: f64,
        minimizer: Minimizer,
        seed: Option<u64>,
        label: String,
    ) -> Self {
        QuadraticSum {
            components,
            lipschitz,
            minimizer,
            seed,
            label,
        }
    }

    pub fn components(&self) -> &[QuadraticComponent] {
        &self.components
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Sub-sampled Hessian `(1/S) Σ_{i∈batch} A_i`.
    pub fn batch_hessian(&self, batch: &[usize]) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for &i in batch {
            h += &self.components[i].a;
        }
        h / batch.len() as f64
    }
}

fn solve_minimizer(components: &[QuadraticComponent]) -> Result<Vector> {
    let n = components[0].b.len();
    let mut h = DMatrix::zeros(n, n);
    let mut rhs = Vector::zeros(n);
    for c in components {
        h += &c.a;
        rhs += &c.a * &c.b;
    }
    let chol = h
        .cholesky()
        .ok_or_else(|| Error::Numerical("sum of component Hessians is not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

impl FiniteSum for QuadraticSum {
    fn num_components(&self) -> usize {
        self.components.len()
    }

    fn dim(&self) -> usize {
        self.minimizer.x.len()
    }

    fn component_value(&self, i: usize, x: &Vector) -> f64 {
        self.components[i].value(x)
    }

    fn component_gradient(&self, i: usize, x: &Vector) -> Vector {
        self.components[i].gradient(x)
    }

    fn component_value_and_gradient(&self, i: usize, x: &Vector) -> (f64, Vector) {
        self.components[i].value_and_gradient(x)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn minimizer(&self) -> Option<&Minimizer> {
        Some(&self.minimizer)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

const B_RANGE: (f64, f64) = (1.0, 31.0);
const EIG_RANGE: (f64, f64) = (1.0, 101.0);

/// Random strongly convex quadratic sum.
///
/// `b_i ~ U[1,31]^n`; `A_i = Q_i D_i Q_iᵀ` with `D_i` diagonal `U[1,101]`
/// and `Q_i` the eigenvectors of `½(C_i + C_iᵀ)`, `C_i` standard normal.
/// All random draws happen up front in a fixed order; only the
/// eigendecompositions run in parallel.
pub fn generate_quadratic<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Result<QuadraticSum> {
    if n == 0 || count == 0 {
        return Err(Error::config("quadratic generator needs n ≥ 1 and N ≥ 1"));
    }
    let b_dist = Uniform::new_inclusive(B_RANGE.0, B_RANGE.1).expect("valid range");
    let d_dist = Uniform::new_inclusive(EIG_RANGE.0, EIG_RANGE.1).expect("valid range");

    struct Draw {
        b: Vector,
        d: Vector,
        c: DMatrix<f64>,
    }
    let draws: Vec<Draw> = (0..count)
        .map(|_| {
            let b = Vector::from_fn(n, |_, _| b_dist.sample(rng));
            let d = Vector::from_fn(n, |_, _| d_dist.sample(rng));
            let c = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
            Draw { b, d, c }
        })
        .collect();

    let components = par::map_slice(Execution::default(), &draws, |draw| {
        let sym = (&draw.c + draw.c.transpose()) * 0.5;
        let q = SymmetricEigen::new(sym).eigenvectors;
        let mut a = &q * DMatrix::from_diagonal(&draw.d) * q.transpose();
        // exact symmetry
        a = (&a + a.transpose()) * 0.5;
        QuadraticComponent {
            a,
            b: draw.b.clone(),
        }
    });
    let lipschitz = draws
        .iter()
        .flat_map(|d| d.d.iter().cloned())
        .fold(f64::NEG_INFINITY, f64::max);
    let label = format!("quadratic(n={n},N={count})");
    QuadraticSum::with_lipschitz(components, lipschitz, label)
}
