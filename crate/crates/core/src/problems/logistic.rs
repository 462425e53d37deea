use super::{DatasetRecords, FiniteSum};
use crate::error::{Error, Result};
use crate::Vector;

pub const DEFAULT_LAMBDA: f64 = 1e-4;

/// `f_i(x) = log(1 + exp(−b aᵀx)) + (λ/2)‖x‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticComponent {
    /// Sparse features `(zero-based index, value)`.
    pub features: Vec<(usize, f64)>,
    pub label: f64,
}

impl LogisticComponent {
    fn margin(&self, x: &Vector) -> f64 {
        self.label * self.features.iter().map(|&(j, v)| v * x[j]).sum::<f64>()
    }

    fn norm_sq(&self) -> f64 {
        self.features.iter().map(|&(_, v)| v * v).sum()
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug)]
pub struct LogisticSum {
    components: Vec<LogisticComponent>,
    dim: usize,
    lambda: f64,
    lipschitz: f64,
    label: String,
}

impl LogisticSum {
    pub fn new(data: &DatasetRecords, lambda: f64) -> Result<Self> {
        Self::with_label(data, lambda, "logistic")
    }

    pub fn with_label(data: &DatasetRecords, lambda: f64, label: impl Into<String>) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::config(format!("lambda must be ≥ 0, got {lambda}")));
        }
        if data.is_empty() {
            return Err(Error::config("logistic problem needs a nonempty dataset"));
        }
        let components: Vec<LogisticComponent> = data
            .rows
            .iter()
            .map(|r| {
                if r.label != 1.0 && r.label != -1.0 {
                    return Err(Error::config(format!("label {} is not ±1", r.raw_label)));
                }
                Ok(LogisticComponent {
                    features: r.features.clone(),
                    label: r.label,
                })
            })
            .collect::<Result<_>>()?;
        let max_sq = components.iter().map(LogisticComponent::norm_sq).fold(0.0, f64::max);
        Ok(LogisticSum {
            components,
            dim: data.dim,
            lambda,
            lipschitz: lambda + max_sq / 4.0,
            label: label.into(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn components(&self) -> &[LogisticComponent] {
        &self.components
    }
}

impl FiniteSum for LogisticSum {
    fn num_components(&self) -> usize {
        self.components.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn component_value(&self, i: usize, x: &Vector) -> f64 {
        let c = &self.components[i];
        softplus(-c.margin(x)) + 0.5 * self.lambda * x.norm_squared()
    }

    fn component_gradient(&self, i: usize, x: &Vector) -> Vector {
        let c = &self.components[i];
        let w = -c.label * sigmoid(-c.margin(x));
        let mut g = x * self.lambda;
        for &(j, v) in &c.features {
            g[j] += w * v;
        }
        g
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{parse_dataset, DatasetFormat};

    fn single(text: &str, lambda: f64) -> LogisticSum {
        let d = parse_dataset(text, DatasetFormat::Sparse, "t").unwrap();
        LogisticSum::new(&d, lambda).unwrap()
    }

    #[test]
    fn value_at_origin_is_log2() {
        let p = single("1 1:3 2:-1\n-1 2:5\n", 0.0);
        let x = Vector::zeros(2);
        for i in 0..2 {
            assert!((p.component_value(i, &x) - 2f64.ln()).abs() < 1e-15);
        }
        assert!((p.full_value(&x) - 2f64.ln()).abs() < 1e-15);
        let p = single("1 1:3 2:-1\n", DEFAULT_LAMBDA);
        assert!((p.full_value(&x) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gradient_hand_value() {
        let d = parse_dataset("1 1:1\n", DatasetFormat::Sparse, "t").unwrap();
        let d = DatasetRecords { dim: 2, ..d };
        let p = LogisticSum::new(&d, 0.0).unwrap();
        let g = p.component_gradient(0, &Vector::zeros(2));
        assert_eq!(g.as_slice(), &[-0.5, 0.0]);
    }

    #[test]
    fn lipschitz_bound() {
        let p = single("1 1:3 2:4\n-1 2:1\n", 0.5);
        assert_eq!(p.lipschitz(), Some(0.5 + 25.0 / 4.0));
    }

    #[test]
    fn extreme_margins_are_finite() {
        let p = single("1 1:1\n", 0.0);
        let x = Vector::from_element(1, -1e4);
        assert!((p.component_value(0, &x) - 1e4).abs() < 1e-9);
        assert!((p.component_gradient(0, &x)[0] + 1.0).abs() < 1e-12);
        let x = Vector::from_element(1, 1e4);
        assert!(p.component_value(0, &x) >= 0.0);
        assert!(p.component_gradient(0, &x)[0].abs() < 1e-300);
    }

    #[test]
    fn rejects_negative_lambda() {
        let d = parse_dataset("1 1:1\n", DatasetFormat::Sparse, "t").unwrap();
        assert!(LogisticSum::new(&d, -1.0).is_err());
    }
}
