//! Nonmonotone Armijo line search along a fixed direction.
//!
//! Starting from `α = 1`, a trial is accepted when
//! `φ(α) ≤ φ(0) + η α dm + t`. While `α > 0.1` a rejected trial is replaced by
//! the minimizer of the quadratic interpolating `φ(0)`, `φ'(0) = dm` and
//! `φ(α)`, safeguarded to `[0.1α, 0.9α]` (otherwise `α/2`). Once `α ≤ 0.1`
//! the search only halves.

/// Upper bound on the number of trials in one search.
pub const MAX_TRIALS: usize = 60;

/// Threshold separating the interpolation and halving phases.
pub const INTERP_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmijoContext {
    /// `φ(0)`, the batch value at the current iterate.
    pub phi0: f64,
    /// Directional derivative `gᵀd`.
    pub dm: f64,
    pub eta: f64,
    /// Forcing term `t ≥ 0`.
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LspStatus {
    Accepted,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LspResult {
    pub alpha: f64,
    /// `φ(alpha)`; `NaN` when no trial was needed.
    pub value: f64,
    pub trials: usize,
    /// Batch evaluations consumed by this search (the trials, plus the base
    /// value when the caller had to compute it).
    pub evals_charged: usize,
    pub status: LspStatus,
}

/// Nonmonotone Armijo test (non-strict inequality).
pub fn armijo_holds(phi_alpha: f64, ctx: &ArmijoContext, alpha: f64) -> bool {
    phi_alpha <= ctx.phi0 + ctx.eta * alpha * ctx.dm + ctx.t
}

/// Safeguarded quadratic-interpolation candidate after a failed trial at
/// `alpha`.
pub fn interp_candidate(dm: f64, alpha: f64, phi_alpha: f64, phi0: f64) -> f64 {
    let denom = 2.0 * (phi_alpha - phi0 - alpha * dm);
    let raw = -dm * alpha * alpha / denom;
    if !raw.is_finite() || raw <= 0.0 || raw < 0.1 * alpha || raw > 0.9 * alpha {
        alpha / 2.0
    } else {
        raw
    }
}

/// Runs the search on the one-dimensional oracle `phi(α) = f_batch(x + αd)`.
///
/// The oracle is responsible for metering its own evaluations. A
/// non-finite trial value counts as a failed trial. With `dm = 0` (zero
/// direction) the unit step is returned without evaluating anything.
pub fn lsp_search<F>(mut phi: F, ctx: &ArmijoContext) -> LspResult
where
    F: FnMut(f64) -> f64,
{
    if ctx.dm == 0.0 {
        return LspResult {
            alpha: 1.0,
            value: f64::NAN,
            trials: 0,
            evals_charged: 0,
            status: LspStatus::Accepted,
        };
    }
    let mut alpha = 1.0;
    let mut trials = 0;
    loop {
        let value = phi(alpha);
        trials += 1;
        if value.is_finite() && armijo_holds(value, ctx, alpha) {
            return LspResult {
                alpha,
                value,
                trials,
                evals_charged: trials,
                status: LspStatus::Accepted,
            };
        }
        if trials == MAX_TRIALS {
            return LspResult {
                alpha,
                value,
                trials,
                evals_charged: trials,
                status: LspStatus::BudgetExhausted,
            };
        }
        alpha = if alpha > INTERP_THRESHOLD {
            interp_candidate(ctx.dm, alpha, value, ctx.phi0)
        } else {
            alpha / 2.0
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn armijo_cases() {
        let ctx = ArmijoContext {
            phi0: 0.5,
            dm: -1.0,
            eta: 1e-4,
            t: 1.0,
        };
        assert!(armijo_holds(0.0, &ctx, 1.0));
        let strict = ArmijoContext { t: 0.0, ..ctx };
        assert!(!armijo_holds(0.5, &strict, 1.0));
        let edge = 0.5 + 1e-4 * 0.25 * -1.0 + 1.0;
        assert!(armijo_holds(edge, &ctx, 0.25));
    }

    #[test]
    fn interpolation_cases() {
        assert_eq!(interp_candidate(-4.0, 1.0, 1.0, 1.0), 0.5);
        // raw 4/48 falls below 0.1α and is replaced by halving
        assert_eq!(interp_candidate(-4.0, 1.0, 21.0, 1.0), 0.5);
        // raw above 0.9α
        assert_eq!(interp_candidate(-4.0, 1.0, -1.5, 1.0), 0.5);
        // nonpositive denominator
        assert_eq!(interp_candidate(-4.0, 0.8, -4.0, 1.0), 0.4);
        assert_eq!(interp_candidate(-4.0, 0.8, f64::NAN, 1.0), 0.4);
        assert_eq!(interp_candidate(-4.0, 0.8, f64::INFINITY, 1.0), 0.4);
    }

    // φ(α) = (1 − 2α)², i.e. x² from x = 1 along d = −2
    fn parabola(alpha: f64) -> f64 {
        (1.0 - 2.0 * alpha).powi(2)
    }

    #[test]
    fn hand_trace_on_parabola() {
        let ctx = ArmijoContext {
            phi0: 1.0,
            dm: -4.0,
            eta: 1e-4,
            t: 0.0,
        };
        let mut tried = Vec::new();
        let r = lsp_search(
            |a| {
                tried.push(a);
                parabola(a)
            },
            &ctx,
        );
        assert_eq!(r.status, LspStatus::Accepted);
        assert_eq!(r.alpha, 0.5);
        assert_eq!(r.trials, 2);
        assert_eq!(tried, vec![1.0, 0.5]);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn forcing_term_accepts_unit_step() {
        let ctx = ArmijoContext {
            phi0: 1.0,
            dm: -4.0,
            eta: 1e-4,
            t: 1.0,
        };
        let r = lsp_search(parabola, &ctx);
        assert_eq!((r.alpha, r.trials), (1.0, 1));
    }

    #[test]
    fn zero_direction_needs_no_trials() {
        let ctx = ArmijoContext {
            phi0: 1.0,
            dm: 0.0,
            eta: 1e-4,
            t: 0.0,
        };
        let r = lsp_search(|_| panic!("no evaluation expected"), &ctx);
        assert_eq!((r.alpha, r.trials, r.evals_charged), (1.0, 0, 0));
    }

    #[test]
    fn non_finite_values_shrink_the_step() {
        let ctx = ArmijoContext {
            phi0: 1.0,
            dm: -1.0,
            eta: 1e-4,
            t: 0.0,
        };
        let r = lsp_search(|a| if a > 0.05 { f64::INFINITY } else { 1.0 - a }, &ctx);
        assert_eq!(r.status, LspStatus::Accepted);
        assert!(r.alpha <= 0.05);
    }

    #[test]
    fn budget_cap() {
        let ctx = ArmijoContext {
            phi0: 0.0,
            dm: -1.0,
            eta: 1e-4,
            t: 0.0,
        };
        let r = lsp_search(|_| 1.0, &ctx);
        assert_eq!(r.status, LspStatus::BudgetExhausted);
        assert_eq!(r.trials, MAX_TRIALS);
        assert!(r.alpha > 0.0);
    }

    proptest! {
        // random convex-ish 1-D functions φ(α) = φ0 + dm α + c α² + w sin(ωα)
        #[test]
        fn trial_sequence_shape(
            dm in -100.0f64..-1e-3,
            c in 0.0f64..1e4,
            w in 0.0f64..10.0,
            om in 0.0f64..50.0,
            t in 0.0f64..1.0,
        ) {
            let phi0 = 3.0;
            let ctx = ArmijoContext { phi0, dm, eta: 1e-4, t };
            let mut tried = Vec::new();
            let r = lsp_search(|a| {
                tried.push(a);
                phi0 + dm * a + c * a * a + w * (om * a).sin() * a
            }, &ctx);
            prop_assert_eq!(tried.len(), r.trials);
            prop_assert_eq!(tried[0], 1.0);
            for pair in tried.windows(2) {
                prop_assert!(pair[1] < pair[0]);
                prop_assert!(pair[1] > 0.0);
                if pair[0] <= INTERP_THRESHOLD {
                    prop_assert_eq!(pair[1], pair[0] / 2.0);
                }
            }
            if r.status == LspStatus::Accepted {
                prop_assert!(armijo_holds(r.value, &ctx, r.alpha));
                prop_assert!(r.alpha > 0.0 && r.alpha <= 1.0);
            }
        }
    }
}
