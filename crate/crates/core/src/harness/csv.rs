//! CSV serialisation of traces and aggregates.
//!
//! Floats are written in Rust's shortest round-trip form; non-finite values
//! become `nan`, `inf` or `-inf`. Header lines start with `#` and hold
//! `key = value` metadata.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::solvers::{IterationRecord, RunTrace, SamplerKind, SolverConfig};

pub const TRACE_COLUMNS: &str =
    "k,resampled,c_k,gamma_k,alpha_k,lsp_trials,cum_evals,grad_pass_cost,f_full,grad_norm_full";

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "nan" | "NaN" => Some(f64::NAN),
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

/// `key = value` pairs describing a run configuration.
pub fn config_pairs(config: &SolverConfig) -> Vec<(&'static str, String)> {
    let mut out = vec![
        ("method", config.method.to_string()),
        ("sampler", config.sampler.name().to_string()),
    ];
    if let SamplerKind::Ais { eps, initial_score } = config.sampler {
        out.push(("eps", fmt_f64(eps)));
        out.push(("initial-score", fmt_f64(initial_score)));
    }
    out.extend([
        ("m", config.m.to_string()),
        ("S", config.sample_size.to_string()),
        ("eta", fmt_f64(config.eta)),
        ("gamma-min", fmt_f64(config.gamma_min)),
        ("gamma-max", fmt_f64(config.gamma_max)),
        ("delta", fmt_f64(config.delta)),
        ("maxiter", config.maxiter.to_string()),
        ("seed", config.seed.to_string()),
        ("reuse", config.reuse.to_string()),
        ("damping", config.damping.to_string()),
        ("eta0", fmt_f64(config.eta0)),
        ("eta1", fmt_f64(config.eta1)),
        ("beta", config.beta.map_or("default".into(), fmt_f64)),
        ("p", config.p.map_or("default".into(), |p| p.to_string())),
    ]);
    out
}

pub fn write_trace(trace: &RunTrace) -> String {
    let mut s = String::from("# slises trace v1\n");
    for (k, v) in config_pairs(&trace.header.config) {
        let _ = writeln!(s, "# {k} = {v}");
    }
    let h = &trace.header;
    let _ = writeln!(s, "# problem = {}", h.problem);
    let _ = writeln!(s, "# N = {}", h.num_components);
    let _ = writeln!(s, "# n = {}", h.dim);
    let _ = writeln!(s, "# L = {}", h.lipschitz.map_or("unknown".into(), fmt_f64));
    s.push_str(TRACE_COLUMNS);
    s.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            u8::from(r.resampled),
            fmt_f64(r.c),
            fmt_f64(r.gamma),
            fmt_f64(r.alpha),
            r.lsp_trials,
            r.cum_evals,
            r.grad_pass_cost,
            fmt_f64(r.f_full),
            fmt_f64(r.grad_norm_full),
        );
    }
    s
}

/// Parsed trace file: header metadata and records (without sample indices).
#[derive(Clone, Debug, PartialEq)]
pub struct TraceFile {
    pub header: Vec<(String, String)>,
    pub records: Vec<IterationRecord>,
}

impl TraceFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_trace(text: &str, origin: &str) -> Result<TraceFile> {
    let err = |line: usize, msg: &str| Error::Parse {
        path: origin.to_string(),
        line,
        msg: msg.to_string(),
    };
    let mut header = Vec::new();
    let mut records = Vec::new();
    let mut seen_columns = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                header.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !seen_columns {
            if line != TRACE_COLUMNS {
                return Err(err(lineno, "unexpected column header"));
            }
            seen_columns = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(err(lineno, "expected 10 fields"));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| err(lineno, "bad integer"));
        let float = |s: &str| parse_f64(s).ok_or_else(|| err(lineno, "bad float"));
        records.push(IterationRecord {
            k: int(f[0])? as usize,
            resampled: int(f[1])? == 1,
            c: float(f[2])?,
            gamma: float(f[3])?,
            alpha: float(f[4])?,
            lsp_trials: int(f[5])? as usize,
            cum_evals: int(f[6])?,
            grad_pass_cost: int(f[7])?,
            f_full: float(f[8])?,
            grad_norm_full: float(f[9])?,
            sample: Vec::new(),
        });
    }
    if !seen_columns {
        return Err(Error::EmptyInput(origin.to_string()));
    }
    Ok(TraceFile { header, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn special_values() {
        assert_eq!(fmt_f64(1e-8), "1e-8");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert!(parse_f64("nan").unwrap().is_nan());
        assert_eq!(parse_f64("inf"), Some(f64::INFINITY));
        assert_eq!(parse_f64("x"), None);
    }

    proptest! {
        #[test]
        fn floats_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            let back = parse_f64(&fmt_f64(v)).unwrap();
            if v.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), v.to_bits());
            }
        }
    }
}
