use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slises::problems::{generate_quadratic, FiniteSum, QuadraticSum};
use slises::solvers::{run, IterationRecord, Method, RunTrace, SamplerKind, SolverConfig};
use slises::Vector;

fn problem(seed: u64, n: usize, big_n: usize) -> QuadraticSum {
    generate_quadratic(n, big_n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn config_strategy() -> impl Strategy<Value = SolverConfig> {
    (1usize..=5, 1usize..=3, 5usize..=40, any::<bool>(), any::<u64>()).prop_map(|(m, s, maxiter, ais, seed)| {
        SolverConfig {
            m,
            sample_size: s,
            maxiter,
            sampler: if ais { SamplerKind::ais(1.0) } else { SamplerKind::Uniform },
            seed,
            ..SolverConfig::default()
        }
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Recomputes every iterate from the logged samples, coefficients and steps.
fn replay(p: &QuadraticSum, cfg: &SolverConfig, t: &RunTrace) -> Result<(), TestCaseError> {
    let mut x = Vector::zeros(p.dim());
    let mut prev: Option<(Vector, Vector)> = None;
    for r in &t.records {
        let (f, g_full) = p.full_value_and_gradient(&x);
        prop_assert_eq!(f.to_bits(), r.f_full.to_bits());
        prop_assert_eq!(g_full.norm().to_bits(), r.grad_norm_full.to_bits());
        let g = p.batch_gradient(&r.sample, &x);
        let anchor = 1.0 / g.norm();
        let same_sample = !r.resampled;
        let expect_c = match &prev {
            Some((px, pg)) if r.k > 0 && (cfg.m == 1 || same_sample) => {
                let s = &x - px;
                let y = &g - pg;
                if s.norm() == 0.0 { anchor } else { s.norm_squared() / s.dot(&y) }
            }
            _ => anchor,
        };
        prop_assert!(rel(r.c, expect_c) <= 1e-9, "k={} c={} expected {}", r.k, r.c, expect_c);
        if same_sample && r.c.is_finite() && r.c > 0.0 {
            // same sample on a quadratic: 1/c lies in the subsample spectrum, so c ≥ 1/101
            prop_assert!(r.c >= 1.0 / 101.0 * (1.0 - 1e-9));
        }
        let expect_gamma = r.c.clamp(cfg.gamma_min, cfg.gamma_max) / r.k.max(1) as f64;
        prop_assert!(rel(r.gamma, expect_gamma) <= 1e-15);
        prev = Some((x.clone(), g.clone()));
        let d = &g * -r.gamma;
        x += &d * r.alpha;
    }
    prop_assert_eq!(&x, &t.final_x);
    Ok(())
}

fn eval_increments(records: &[IterationRecord]) -> Vec<u64> {
    let mut last = 0;
    records
        .iter()
        .map(|r| {
            let inc = r.cum_evals - last;
            last = r.cum_evals;
            inc
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn samples_persist_for_m_iterations(cfg in config_strategy(), pseed in any::<u64>()) {
        let p = problem(pseed, 3, 12);
        let t = run(&p, &cfg).unwrap();
        prop_assert_eq!(t.records.len(), cfg.maxiter + 1);
        for r in &t.records {
            prop_assert_eq!(r.resampled, r.k % cfg.m == 0);
            prop_assert_eq!(r.sample.len(), cfg.sample_size);
            prop_assert!(r.sample.iter().all(|&i| i < 12));
            let block = &t.records[r.k - r.k % cfg.m];
            prop_assert_eq!(&r.sample, &block.sample);
            if cfg.sampler == SamplerKind::Uniform {
                prop_assert!(r.sample.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn trajectory_replays_from_the_trace(cfg in config_strategy(), pseed in any::<u64>()) {
        let p = problem(pseed, 4, 15);
        let t = run(&p, &cfg).unwrap();
        replay(&p, &cfg, &t)?;
    }

    #[test]
    fn base_value_reuse_changes_only_the_count(cfg in config_strategy(), pseed in any::<u64>()) {
        let p = problem(pseed, 3, 10);
        let reuse = run(&p, &cfg).unwrap();
        let fresh = run(&p, &SolverConfig { reuse: false, ..cfg.clone() }).unwrap();
        let s = cfg.sample_size as u64;
        let inc_reuse = eval_increments(&reuse.records);
        let inc_fresh = eval_increments(&fresh.records);
        for (i, (a, b)) in reuse.records.iter().zip(&fresh.records).enumerate() {
            prop_assert_eq!(
                IterationRecord { cum_evals: 0, ..a.clone() },
                IterationRecord { cum_evals: 0, ..b.clone() }
            );
            let trials = a.lsp_trials as u64;
            let base = u64::from(trials > 0);
            prop_assert_eq!(inc_fresh[i], s * (trials + base));
            let reused = u64::from(trials > 0 && a.resampled);
            prop_assert_eq!(inc_reuse[i], s * (trials + reused));
        }
    }
}

#[test]
fn modified_variant_skips_the_search_at_resamples() {
    let p = problem(5, 5, 30);
    let cfg = SolverConfig {
        m: 4,
        maxiter: 60,
        ..SolverConfig::with_method(Method::SlisesModified)
    };
    let t = run(&p, &cfg).unwrap();
    for r in &t.records {
        let k = r.k.max(1) as f64;
        if r.resampled {
            assert_eq!((r.alpha, r.lsp_trials, r.gamma), (1.0, 0, 1.0 / k));
            assert!(r.c.is_nan());
        } else {
            assert!(r.gamma <= r.c.clamp(cfg.gamma_min, cfg.gamma_max) / k.powf(1.1) * (1.0 + 1e-15));
        }
    }
    let bad = SolverConfig { m: 1, ..cfg.clone() };
    assert!(run(&p, &bad).is_err());
}

#[test]
fn spectral_full_counts_whole_passes() {
    let p = problem(6, 4, 25);
    let t = run(
        &p,
        &SolverConfig {
            maxiter: 30,
            ..SolverConfig::with_method(Method::SpectralFull)
        },
    )
    .unwrap();
    assert!(t.records.iter().all(|r| r.cum_evals % 25 == 0 && r.sample.is_empty()));
    assert!(t.records.iter().skip(1).all(|r| !r.resampled));
    assert_eq!(t.records[0].grad_pass_cost, 25);
    // undamped: γ is the clipped coefficient itself
    assert!(t.records.iter().all(|r| r.gamma == r.c.clamp(1e-8, 1e8)));
}

#[test]
fn gradient_methods_charge_no_function_evaluations() {
    let p = problem(7, 3, 20);
    for method in [Method::Sgd, Method::SvrgBb, Method::SgdBb, Method::SgdBbSmooth] {
        let cfg = SolverConfig {
            maxiter: 25,
            sample_size: 2,
            ..SolverConfig::with_method(method)
        };
        let t = run(&p, &cfg).unwrap();
        assert!(t.records.iter().all(|r| r.cum_evals == 0), "{method}");
        assert!(t.records.windows(2).all(|w| w[1].grad_pass_cost > w[0].grad_pass_cost), "{method}");
        if method == Method::Sgd {
            assert!(t.records.iter().all(|r| r.grad_pass_cost == 2 * (r.k as u64 + 1)));
        }
    }
}

#[test]
fn undamped_option_removes_the_divisor() {
    let p = problem(8, 3, 20);
    let cfg = SolverConfig {
        damping: false,
        maxiter: 20,
        ..SolverConfig::default()
    };
    let t = run(&p, &cfg).unwrap();
    assert!(t.records.iter().all(|r| r.gamma == r.c.clamp(1e-8, 1e8)));
}
