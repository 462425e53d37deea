//! Layered experiment settings.
//!
//! Settings are flat `key = value` pairs whose keys are the long CLI flag
//! names. Built-in defaults are overridden by a config file, which is in
//! turn overridden by command-line flags.
//!
//! ```text
//! # m sweep on a small quadratic
//! n = 10
//! N = 1000
//! m = 1,3,5,10
//! sampler = ais
//! seeds = 0..19
//! ```
//!
//! `method` takes a comma-separated list of tokens of the form
//! `name[@ais|@uni][:key=value...]`, e.g. `slises@ais:m=3,sgd`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::experiment::{Aggregation, Axis, ExperimentSpec, LabeledConfig, ProblemSpec};
use crate::error::{Error, Result};
use crate::problems::{DatasetFormat, DEFAULT_LAMBDA};
use crate::solvers::{Method, SamplerKind, SolverConfig};

/// Keys that describe a single solver configuration.
pub const SOLVER_KEYS: &[&str] = &[
    "m",
    "S",
    "eta",
    "gamma-min",
    "gamma-max",
    "delta",
    "maxiter",
    "sampler",
    "eps",
    "initial-score",
    "no-reuse",
    "no-damping",
    "eta0",
    "eta1",
    "beta",
    "p",
];

/// Keys that describe the experiment around the solvers.
pub const EXPERIMENT_KEYS: &[&str] = &[
    "method",
    "seed",
    "dataset",
    "format",
    "lambda",
    "out",
    "family",
    "n",
    "N",
    "instance",
    "instance-seed",
    "aggregate",
    "axis",
];

pub const DEFAULT_N: usize = 10;
pub const DEFAULT_COUNT: usize = 100;
pub const DEFAULT_OUT: &str = "out";

fn known(key: &str) -> bool {
    SOLVER_KEYS.contains(&key) || EXPERIMENT_KEYS.contains(&key)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut s = Settings::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: "expected 'key = value'".into(),
            })?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Sets `key`; `seeds` is accepted as a synonym of `seed`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = if key == "seeds" { "seed" } else { key };
        if !known(key) {
            return Err(Error::config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    /// Overrides `self` with every key present in `other`.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::config(format!("bad value '{v}' for '{key}'")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(Error::config(format!("'{key}' expects true or false, got '{v}'"))),
        }
    }

    pub fn seeds(&self) -> Result<Vec<u64>> {
        self.get("seed").map_or(Ok(vec![0]), parse_seeds)
    }

    pub fn m_values(&self) -> Result<Vec<usize>> {
        match self.get("m") {
            None => Ok(vec![SolverConfig::default().m]),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::config(format!("bad m value '{t}'")))
                })
                .collect(),
        }
    }

    /// Solver configuration described by the solver keys and a single `method`.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut c = SolverConfig::default();
        if let Some(m) = self.get("method") {
            c.method = m.parse()?;
        }
        match self.m_values()?.as_slice() {
            [m] => c.m = *m,
            _ => return Err(Error::config("m takes a single value outside sweep-m")),
        }
        macro_rules! take {
            ($key:literal => $field:expr) => {
                if let Some(v) = self.parsed($key)? {
                    $field = v;
                }
            };
        }
        take!("S" => c.sample_size);
        take!("eta" => c.eta);
        take!("gamma-min" => c.gamma_min);
        take!("gamma-max" => c.gamma_max);
        take!("delta" => c.delta);
        take!("maxiter" => c.maxiter);
        take!("eta0" => c.eta0);
        take!("eta1" => c.eta1);
        c.beta = self.parsed("beta")?;
        c.p = self.parsed("p")?;
        c.reuse = !self.flag("no-reuse")?;
        c.damping = !self.flag("no-damping")?;
        c.sampler = match self.get("sampler").unwrap_or("uniform") {
            "uniform" | "uni" => SamplerKind::Uniform,
            "ais" => SamplerKind::Ais {
                eps: self.parsed("eps")?.unwrap_or(SamplerKind::DEFAULT_EPS),
                initial_score: self.parsed("initial-score")?.unwrap_or(1.0),
            },
            other => return Err(Error::config(format!("unknown sampler '{other}'"))),
        };
        Ok(c)
    }

    pub fn method_tokens(&self) -> Vec<String> {
        self.get("method")
            .unwrap_or(Method::Slises.name())
            .split(',')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect()
    }

    /// One labelled configuration per method token.
    pub fn configs(&self) -> Result<Vec<LabeledConfig>> {
        let configs = self
            .method_tokens()
            .iter()
            .map(|t| parse_method_token(t, self))
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in configs.iter().enumerate() {
            if configs[..i].iter().any(|b| b.label == a.label) {
                return Err(Error::config(format!("duplicate method '{}'", a.label)));
            }
        }
        Ok(configs)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        if let Some(path) = self.get("instance") {
            return Ok(ProblemSpec::Instance(PathBuf::from(path)));
        }
        let family = self.get("family").unwrap_or(if self.get("dataset").is_some() {
            "logistic"
        } else {
            "quadratic"
        });
        match family {
            "quadratic" => {
                if self.get("dataset").is_some() {
                    return Err(Error::config("datasets define logistic problems"));
                }
                Ok(ProblemSpec::Quadratic {
                    n: self.parsed("n")?.unwrap_or(DEFAULT_N),
                    count: self.parsed("N")?.unwrap_or(DEFAULT_COUNT),
                    seed: self.parsed("instance-seed")?.unwrap_or(0),
                })
            }
            "logistic" => {
                let path = self
                    .get("dataset")
                    .ok_or_else(|| Error::config("logistic problems need --dataset"))?;
                Ok(ProblemSpec::Dataset {
                    path: PathBuf::from(path),
                    format: self.parsed::<DatasetFormat>("format")?.unwrap_or(DatasetFormat::Sparse),
                    lambda: self.parsed("lambda")?.unwrap_or(DEFAULT_LAMBDA),
                })
            }
            other => Err(Error::config(format!("unknown family '{other}'"))),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out").unwrap_or(DEFAULT_OUT))
    }

    pub fn experiment(&self) -> Result<ExperimentSpec> {
        Ok(ExperimentSpec {
            problem: self.problem()?,
            configs: self.configs()?,
            seeds: self.seeds()?,
            out: self.out_dir(),
            aggregation: self.parsed("aggregate")?.unwrap_or_default(),
            axis: self.parsed::<Axis>("axis")?.unwrap_or_default(),
        })
    }
}

/// Parses `1,2,3`, `0..9` (inclusive) or a mix such as `1,5..7`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::config(format!("bad seed list '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Resolves `name[@ais|@uni][:key=value...]` on top of `base`.
///
/// `slises-undamped` is shorthand for `slises` with `no-damping = true`.
pub fn parse_method_token(token: &str, base: &Settings) -> Result<LabeledConfig> {
    let mut parts = token.split(':');
    let head = parts.next().unwrap_or_default();
    let (name, sampler) = match head.split_once('@') {
        Some((n, s)) => (n, Some(s)),
        None => (head, None),
    };
    let mut s = base.clone();
    match name {
        "slises-undamped" => {
            s.set("method", Method::Slises.name())?;
            s.set("no-damping", "true")?;
        }
        _ => s.set("method", name)?,
    }
    if let Some(sampler) = sampler {
        s.set("sampler", sampler)?;
    }
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config(format!("expected key=value in '{token}'")))?;
        if !SOLVER_KEYS.contains(&k) {
            return Err(Error::config(format!("'{k}' cannot be set per method")));
        }
        s.set(k, v)?;
    }
    Ok(LabeledConfig {
        label: token.to_string(),
        config: s.solver_config()?,
    })
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-run" => Ok(Aggregation::PerRun),
            "median" => Ok(Aggregation::Median),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(Error::config(format!("unknown aggregation '{s}'"))),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cum-evals" => Ok(Axis::CumEvals),
            "grad-pass-cost" => Ok(Axis::GradPassCost),
            _ => Err(Error::config(format!("unknown axis '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = Settings::parse("# comment\nm = 5\neta = 0.001\n\nsampler = ais\n", "cfg").unwrap();
        let mut flags = Settings::new();
        flags.set("m", "7").unwrap();
        let mut s = Settings::new();
        s.overlay(&file);
        s.overlay(&flags);
        let c = s.solver_config().unwrap();
        assert_eq!(c.m, 7);
        assert_eq!(c.eta, 0.001);
        assert_eq!(c.sampler, SamplerKind::ais(1.0));
        assert_eq!(c.gamma_min, 1e-8);
    }

    #[test]
    fn unknown_key_and_bad_line() {
        assert!(matches!(
            Settings::parse("colour = red", "cfg"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            Settings::parse("m 3", "cfg"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1,2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seeds("9, 2..3").unwrap(), vec![9, 2, 3]);
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn method_tokens() {
        let mut base = Settings::new();
        base.set("maxiter", "20").unwrap();
        base.set("method", "slises@ais:m=3, sgd, slises-undamped:S=2").unwrap();
        let cs = base.configs().unwrap();
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[0].label, "slises@ais:m=3");
        assert_eq!(cs[0].config.sampler, SamplerKind::ais(1.0));
        assert_eq!(cs[0].config.m, 3);
        assert_eq!(cs[1].config.method, Method::Sgd);
        assert_eq!(cs[1].config.maxiter, 20);
        assert!(!cs[2].config.damping);
        assert_eq!(cs[2].config.sample_size, 2);

        base.set("method", "sgd,sgd").unwrap();
        assert!(base.configs().is_err());
        base.set("method", "slises:seed=3").unwrap();
        assert!(base.configs().is_err());
    }

    #[test]
    fn problem_selection() {
        let mut s = Settings::new();
        assert_eq!(
            s.problem().unwrap(),
            ProblemSpec::Quadratic { n: DEFAULT_N, count: DEFAULT_COUNT, seed: 0 }
        );
        s.set("dataset", "d.txt").unwrap();
        assert!(matches!(s.problem().unwrap(), ProblemSpec::Dataset { .. }));
        s.set("family", "quadratic").unwrap();
        assert!(s.problem().is_err());
        s.set("instance", "i.txt").unwrap();
        assert_eq!(s.problem().unwrap(), ProblemSpec::Instance("i.txt".into()));
    }

    #[test]
    fn sweep_lists_rejected_for_single_runs() {
        let mut s = Settings::new();
        s.set("m", "1,3").unwrap();
        assert_eq!(s.m_values().unwrap(), vec![1, 3]);
        assert!(s.solver_config().is_err());
    }
}
