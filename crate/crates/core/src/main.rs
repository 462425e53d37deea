use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slises::harness::config::Settings;
use slises::harness::csv::fmt_f64;
use slises::harness::experiment::{
    build_problem, compare_methods, generate_instance, run_all, sweep_m,
};
use slises::problems::FiniteSum;
use slises::Error;

/// Subsampled line-search spectral gradient experiments.
#[derive(Parser, Debug)]
#[command(name = "slises", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random quadratic instance and save it to --out.
    Generate(Overrides),
    /// Run each method for each seed, one trace per run under --out.
    Run(Overrides),
    /// Sweep the inner iteration count m (e.g. --m 1,3,5,10).
    SweepM(Overrides),
    /// Compare several methods (e.g. --method slises@ais,sgd).
    Compare(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// `key = value` settings file; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Method tokens: name[@ais|@uni][:key=value...], comma separated
    #[arg(long)]
    method: Option<String>,
    /// Inner iterations per sample (a list for sweep-m)
    #[arg(long)]
    m: Option<String>,
    /// Sample size
    #[arg(long = "S")]
    sample_size: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long = "gamma-min")]
    gamma_min: Option<String>,
    #[arg(long = "gamma-max")]
    gamma_max: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    maxiter: Option<String>,
    /// uniform | ais
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "initial-score")]
    initial_score: Option<String>,
    /// Seed list such as 3, 1,2,3 or 0..19
    #[arg(long, visible_alias = "seeds")]
    seed: Option<String>,
    /// Evaluate the base value afresh at every line search
    #[arg(long = "no-reuse")]
    no_reuse: bool,
    /// Do not divide the spectral step by k
    #[arg(long = "no-damping")]
    no_damping: bool,
    #[arg(long)]
    dataset: Option<String>,
    /// sparse | dense
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Output directory (instance file for generate)
    #[arg(long)]
    out: Option<String>,
    /// quadratic | logistic
    #[arg(long)]
    family: Option<String>,
    /// Dimension of generated quadratics
    #[arg(long)]
    n: Option<String>,
    /// Number of components of generated quadratics
    #[arg(long = "N")]
    count: Option<String>,
    /// Frozen quadratic instance file
    #[arg(long)]
    instance: Option<String>,
    #[arg(long = "instance-seed")]
    instance_seed: Option<String>,
    #[arg(long)]
    eta0: Option<String>,
    #[arg(long)]
    eta1: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// per-run | median | mean
    #[arg(long)]
    aggregate: Option<String>,
    /// cum-evals | grad-pass-cost
    #[arg(long)]
    axis: Option<String>,
}

impl Overrides {
    fn settings(&self) -> slises::Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        let pairs = [
            ("method", &self.method),
            ("m", &self.m),
            ("S", &self.sample_size),
            ("eta", &self.eta),
            ("gamma-min", &self.gamma_min),
            ("gamma-max", &self.gamma_max),
            ("delta", &self.delta),
            ("maxiter", &self.maxiter),
            ("sampler", &self.sampler),
            ("eps", &self.eps),
            ("initial-score", &self.initial_score),
            ("seed", &self.seed),
            ("dataset", &self.dataset),
            ("format", &self.format),
            ("lambda", &self.lambda),
            ("out", &self.out),
            ("family", &self.family),
            ("n", &self.n),
            ("N", &self.count),
            ("instance", &self.instance),
            ("instance-seed", &self.instance_seed),
            ("eta0", &self.eta0),
            ("eta1", &self.eta1),
            ("beta", &self.beta),
            ("p", &self.p),
            ("aggregate", &self.aggregate),
            ("axis", &self.axis),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, v)?;
            }
        }
        if self.no_reuse {
            flags.set("no-reuse", "true")?;
        }
        if self.no_damping {
            flags.set("no-damping", "true")?;
        }
        s.overlay(&flags);
        Ok(s)
    }
}

fn execute(command: Command) -> slises::Result<()> {
    match command {
        Command::Generate(o) => {
            let s = o.settings()?;
            let out = s
                .get("out")
                .ok_or_else(|| Error::InvalidConfig("generate needs --out <file>".into()))?;
            let parse = |key: &str, default: u64| -> slises::Result<u64> {
                s.get(key).map_or(Ok(default), |v| {
                    v.parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad value '{v}' for '{key}'")))
                })
            };
            let n = parse("n", slises::harness::config::DEFAULT_N as u64)? as usize;
            let count = parse("N", slises::harness::config::DEFAULT_COUNT as u64)? as usize;
            let seed = parse("instance-seed", 0)?;
            let p = generate_instance(n, count, seed, out.as_ref())?;
            println!("{out}: n={n} N={count} seed={seed} L={}", fmt_f64(p.lipschitz().unwrap_or(f64::NAN)));
        }
        Command::Run(o) => {
            let spec = o.settings()?.experiment()?;
            let problem = build_problem(&spec.problem)?;
            for path in run_all(&problem, &spec)? {
                println!("{}", path.display());
            }
        }
        Command::SweepM(o) => {
            let mut s = o.settings()?;
            let ms = s.m_values()?;
            s.remove("m");
            let spec = s.experiment()?;
            let problem = build_problem(&spec.problem)?;
            println!("{}", sweep_m(&problem, &spec, &ms)?.display());
        }
        Command::Compare(o) => {
            let spec = o.settings()?.experiment()?;
            let problem = build_problem(&spec.problem)?;
            println!("{}", compare_methods(&problem, &spec)?.display());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => 1,
        Error::Io { .. } | Error::Parse { .. } | Error::EmptyInput(_) => 2,
        Error::Numerical(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
