//! Subcommand execution and artifact output.

use std::fmt;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use covert_core::bounds::{asymptotic_sweep, ThroughputBounds, CSV_HEADER, SWEEP_POINTS_PER_DECADE};
use covert_core::divergences::{isotropic_report, DivergenceReport, IsotropicGaussianPair};
use covert_core::planner::{psi_suf, CovertParams, PowerPlan};
use covert_core::simkit::{simulate, SimConfig};
use covert_core::truncgauss::{RadialOutputDensity, TruncatedGaussianSpec};
use covert_core::verify::Suite;
use covert_core::Error;

use crate::args::{parse_list, parse_n_grid, Cli, Command, Format};

const DEFAULT_SEED: u64 = 20_240_601;
const DEFAULT_PER_DECADE: usize = 10;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Gate(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Gate(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(s) => write!(f, "configuration error: {s}"),
            Failure::Numeric(s) => write!(f, "{s}"),
            Failure::Gate(s) => write!(f, "verification failed: {s}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

/// Everything a run depends on, after defaults are filled in. Echoed into
/// every artifact.
#[derive(Debug, Clone, Serialize)]
struct Resolved {
    command: Command,
    n: Vec<usize>,
    delta: Option<f64>,
    epsilon: f64,
    mu: Option<f64>,
    nu2: Option<f64>,
    eta: Option<f64>,
    psi: Option<f64>,
    tau: Vec<f64>,
    c: f64,
    m: usize,
    trials: usize,
    per_decade: usize,
    seed: u64,
    workers: usize,
    format: Format,
}

impl Resolved {
    fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let command = cli.command;
        let per_decade = cli.per_decade.unwrap_or(match command {
            Command::Sweep => SWEEP_POINTS_PER_DECADE,
            _ => DEFAULT_PER_DECADE,
        });
        let n = match (&cli.n, command) {
            (Some(s), _) => parse_n_grid(s, per_decade).map_err(Failure::Config)?,
            (None, Command::Sweep) => parse_n_grid("1e2..1e8", per_decade).map_err(Failure::Config)?,
            (None, Command::Verify) => Vec::new(),
            (None, _) => return Err(Failure::Config(format!("{} needs --n", command.name()))),
        };
        let needs_delta = matches!(command, Command::Plan | Command::Divergence | Command::Bounds | Command::Simulate);
        if needs_delta && cli.delta.is_none() {
            return Err(Failure::Config(format!("{} needs --delta", command.name())));
        }
        let tau = match &cli.tau {
            Some(s) => parse_list(s).map_err(Failure::Config)?,
            None if command == Command::Sweep => vec![0.25, 0.5, 0.75],
            None => Vec::new(),
        };
        let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |w| w.get()));
        if workers == 0 {
            return Err(Failure::Config("--workers must be positive".into()));
        }
        Ok(Resolved {
            command,
            n,
            delta: cli.delta,
            epsilon: cli.epsilon.unwrap_or(0.1),
            mu: cli.mu,
            nu2: cli.nu2,
            eta: cli.eta,
            psi: cli.psi,
            tau,
            c: cli.c.unwrap_or(1.0),
            m: cli.m.unwrap_or(16),
            trials: cli.trials.unwrap_or(100_000),
            per_decade,
            seed: cli.seed.unwrap_or(DEFAULT_SEED),
            workers,
            format: cli.format.unwrap_or(match command {
                Command::Bounds | Command::Sweep => Format::Csv,
                _ => Format::Json,
            }),
        })
    }

    fn params(&self, n: usize) -> Result<CovertParams, Failure> {
        let delta = self.delta.ok_or_else(|| Failure::Config("missing --delta".into()))?;
        let mut p = CovertParams::with_defaults(n, delta, self.epsilon)?;
        if let Some(mu) = self.mu {
            p.mu = mu;
        }
        if let Some(nu2) = self.nu2 {
            p.nu = nu2.sqrt();
        }
        if let Some(eta) = self.eta {
            p.eta = eta;
        }
        p.validate()?;
        Ok(p)
    }

    fn spec(&self, n: usize) -> Result<TruncatedGaussianSpec, Failure> {
        let p = self.params(n)?;
        let psi = match self.psi {
            Some(psi) => psi,
            None => psi_suf(&p)?,
        };
        Ok(TruncatedGaussianSpec::new(n, psi, p.mu)?)
    }
}

/// Table in both output shapes.
struct Artifact {
    header: String,
    rows: Vec<String>,
    /// Extra `#` lines for CSV.
    notes: Vec<String>,
    json: Value,
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = Resolved::from_cli(cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .map_err(|e| Failure::Config(format!("worker pool: {e}")))?;
    let (artifact, gate_failure) = match cfg.command {
        Command::Plan => (plan(&cfg)?, None),
        Command::Divergence => (divergence(&cfg)?, None),
        Command::Bounds => (bounds(&cfg)?, None),
        Command::Sweep => (sweep(&cfg)?, None),
        Command::Simulate => (simulation(&cfg)?, None),
        Command::Verify => verify(&cfg, cli.only.as_deref())?,
    };
    emit(&cfg, cli, &artifact)?;
    match gate_failure {
        Some(msg) => Err(Failure::Gate(msg)),
        None => Ok(()),
    }
}

fn emit(cfg: &Resolved, cli: &Cli, a: &Artifact) -> Result<(), Failure> {
    let config = serde_json::to_value(cfg).map_err(|e| Failure::Config(e.to_string()))?;
    let text = match cfg.format {
        Format::Json => {
            let doc = json!({ "command": cfg.command, "seed": cfg.seed, "config": config, "results": a.json });
            serde_json::to_string_pretty(&doc).map_err(|e| Failure::Config(e.to_string()))? + "\n"
        }
        Format::Csv => {
            let mut s = String::new();
            if let Value::Object(map) = &config {
                for (k, v) in map {
                    s += &format!("# {k}={v}\n");
                }
            }
            for note in &a.notes {
                s += &format!("# {note}\n");
            }
            s += &a.header;
            s.push('\n');
            for r in &a.rows {
                s += r;
                s.push('\n');
            }
            s
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Config(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Config(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn plan(cfg: &Resolved) -> Result<Artifact, Failure> {
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for &n in &cfg.n {
        let p = cfg.params(n)?;
        let plan = PowerPlan::new(&p)?;
        rows.push(format!(
            "{n},{},{},{},{},{},{},{},{},{}",
            p.delta,
            p.mu,
            p.eta,
            plan.psi_suf,
            plan.psi_nec,
            plan.psi_exact,
            plan.bracket_valid_below,
            plan.flags.bracket_valid,
            plan.flags.ordering_holds
        ));
        let mut v = to_json(&plan);
        v["n"] = json!(n);
        v["params"] = to_json(&p);
        items.push(v);
    }
    Ok(Artifact {
        header: "n,delta,mu,eta,psi_suf,psi_nec,psi_exact,bracket_valid_below,bracket_valid,ordering_holds".into(),
        rows,
        notes: Vec::new(),
        json: Value::Array(items),
    })
}

fn report_row(n: usize, spec: &TruncatedGaussianSpec, model: &str, r: &DivergenceReport) -> String {
    format!(
        "{n},{},{},{model},{},{},{},{},{}",
        spec.psi,
        spec.mu,
        to_json(&r.method).as_str().unwrap_or_default(),
        r.kl_bits,
        r.tvd.get(),
        r.hellinger_sq.get(),
        r.chi_sq.map_or(String::new(), |c| c.to_string())
    )
}

fn divergence(cfg: &Resolved) -> Result<Artifact, Failure> {
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for &n in &cfg.n {
        let spec = cfg.spec(n)?;
        let gaussian = isotropic_report(&IsotropicGaussianPair::from_power(n, spec.variance)?)?;
        let truncated = RadialOutputDensity::new(spec)?.divergences()?;
        rows.push(report_row(n, &spec, "gaussian", &gaussian));
        rows.push(report_row(n, &spec, "truncated", &truncated));
        items.push(json!({ "n": n, "spec": spec, "gaussian": gaussian, "truncated": truncated }));
    }
    Ok(Artifact {
        header: "n,psi,mu,model,method,kl_bits,tvd,hellinger_sq,chi_sq".into(),
        rows,
        notes: Vec::new(),
        json: Value::Array(items),
    })
}

fn bounds(cfg: &Resolved) -> Result<Artifact, Failure> {
    let rows = covert_core::bounds::bounds_over(&cfg.n, |n| cfg.params(n).map_err(|e| Error::Input(e.to_string())))?;
    Ok(Artifact {
        header: CSV_HEADER.into(),
        rows: rows.iter().map(ThroughputBounds::csv_row).collect(),
        notes: vec!["bounds omit their O(1) remainders".into()],
        json: to_json(&rows),
    })
}

fn sweep(cfg: &Resolved) -> Result<Artifact, Failure> {
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut items = Vec::new();
    for &tau in &cfg.tau {
        let s = asymptotic_sweep(cfg.c, tau, &cfg.n)?;
        let regime = to_json(&s.regime).as_str().unwrap_or_default().to_string();
        notes.push(format!("tau={tau} regime={regime}"));
        for p in &s.trajectories {
            rows.push(format!(
                "{tau},{},{regime},{},{},{},{},{}",
                cfg.c, p.n, p.theta, p.kl_bits, p.tvd, p.hellinger_sq
            ));
        }
        items.push(to_json(&s));
    }
    Ok(Artifact {
        header: "tau,c,regime,n,theta,kl_bits,tvd,hellinger_sq".into(),
        rows,
        notes,
        json: Value::Array(items),
    })
}

fn simulation(cfg: &Resolved) -> Result<Artifact, Failure> {
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for &n in &cfg.n {
        let spec = cfg.spec(n)?;
        let mut sc = SimConfig::new(n, cfg.delta.unwrap_or_default(), cfg.epsilon, cfg.seed);
        sc.m = cfg.m;
        sc.mu = Some(spec.mu);
        sc.psi = Some(spec.psi);
        sc.willie_trials = cfg.trials;
        sc.decode_trials = cfg.trials;
        sc.divergence_samples = cfg.trials;
        let r = simulate(&sc)?;
        let d = &r.detection;
        let (kl, tv, hel) = match &r.divergences {
            Some(e) => (e.kl_bits.value, e.tvd_mixture.value, e.hellinger_sq.value),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        rows.push(format!(
            "{n},{},{},{},{},{},{},{},{},{},{kl},{tv},{hel}",
            sc.m,
            spec.psi,
            spec.mu,
            r.decode_error_rate.value,
            r.decode_error_rate.std_err,
            d.alpha.get(),
            d.beta.get(),
            d.advantage(),
            d.std_err
        ));
        items.push(to_json(&r));
    }
    Ok(Artifact {
        header: "n,m,psi,mu,decode_error,decode_std_err,alpha,beta,advantage,advantage_std_err,kl_bits,tvd,hellinger_sq"
            .into(),
        rows,
        notes: Vec::new(),
        json: Value::Array(items),
    })
}

fn verify(cfg: &Resolved, only: Option<&str>) -> Result<(Artifact, Option<String>), Failure> {
    let mut suite = Suite::new(cfg.seed);
    let outcomes = match only {
        None => suite.run_all(),
        Some(list) => {
            let ids = list
                .split(',')
                .map(|t| t.trim().parse::<u8>().map_err(|_| Failure::Config(format!("bad gate id {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            suite.run_selected(&ids)?
        }
    };
    for o in &outcomes {
        eprintln!("{}", o.line());
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    eprintln!("{} of {} gates passed", outcomes.len() - failed.len(), outcomes.len());
    let rows = outcomes
        .iter()
        .map(|o| {
            format!(
                "{},{},{:.3},{},\"{}\"",
                o.id,
                o.passed,
                o.elapsed_secs,
                o.budget_secs,
                o.detail.replace('"', "'")
            )
        })
        .collect();
    let artifact = Artifact {
        header: "id,passed,elapsed_secs,budget_secs,detail".into(),
        rows,
        notes: Vec::new(),
        json: to_json(&outcomes),
    };
    let gate = (!failed.is_empty()).then(|| format!("gates {} failed", failed.join(",")));
    Ok((artifact, gate))
}
