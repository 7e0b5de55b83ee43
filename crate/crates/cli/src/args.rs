//! Flag definitions and the key=value config file.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "covert", version, about = "Covert communication over AWGN: power planning, bounds and simulation")]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Blocklength: one value, a comma list, or a log range `lo..hi`.
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// KL budget in bits.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Target decoding error.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Inner shell radius factor μ (default 1 − 1/(n+1)).
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Slack ν² (default 1 + 1/n).
    #[arg(long, global = true)]
    pub nu2: Option<f64>,
    /// Slack η (default 1 + 1/n).
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Per-coordinate power Ψ (default Ψ_SUF).
    #[arg(long, global = true)]
    pub psi: Option<f64>,
    /// Sweep exponents, comma separated.
    #[arg(long, global = true)]
    pub tau: Option<String>,
    /// Sweep scale c in θ = c·n^−τ.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Codebook size.
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    /// Monte-Carlo trials per estimate.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Grid density for `lo..hi` ranges.
    #[arg(long, global = true)]
    pub per_decade: Option<usize>,
    #[arg(long, global = true, env = "COVERT_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Acceptance gates to run with `verify`, comma separated.
    #[arg(long, global = true)]
    pub only: Option<String>,
    /// key=value file with defaults for any flag above; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Sufficient, necessary and exact covert power.
    #[command(allow_negative_numbers = true)]
    Plan,
    /// Divergences of the truncated-Gaussian output and its Gaussian counterpart.
    #[command(allow_negative_numbers = true)]
    Divergence,
    /// Achievability and converse throughput bounds.
    #[command(allow_negative_numbers = true)]
    Bounds,
    /// Divergence trajectories along θ = c·n^−τ.
    #[command(allow_negative_numbers = true)]
    Sweep,
    /// Codebook, Bob's decoder and Willie's detector by Monte Carlo.
    #[command(allow_negative_numbers = true)]
    Simulate,
    /// Run the acceptance gates.
    #[command(allow_negative_numbers = true)]
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Plan => "plan",
            Command::Divergence => "divergence",
            Command::Bounds => "bounds",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Locate `--config` in the raw arguments.
fn config_path(args: &[OsString]) -> Result<Option<PathBuf>, String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it
                .next()
                .map(|p| Some(PathBuf::from(p)))
                .ok_or_else(|| "--config needs a path".to_string());
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(PathBuf::from(p)));
        }
    }
    Ok(None)
}

/// Turn `key = value` lines into flags. Blank lines and `#` comments are
/// skipped.
pub fn config_flags(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got {line:?}", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k == "config" {
            return Err(format!("config line {}: bad key {k:?}", i + 1));
        }
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    Ok(out)
}

/// Full argument list with config-file flags placed first, so anything on
/// the command line overrides them.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let mut out = vec![args[0].clone()];
    out.extend(config_flags(&text)?);
    out.extend(args.into_iter().skip(1));
    Ok(out)
}

/// Parse `400`, `100,400,1e4` or `1e3..1e8`.
pub fn parse_n_grid(s: &str, per_decade: usize) -> Result<Vec<usize>, String> {
    let count = |t: &str| -> Result<f64, String> {
        let v: f64 = t.trim().parse().map_err(|_| format!("not a number: {t:?}"))?;
        if !(v >= 1.0 && v.fract() == 0.0 && v < 9.0e15) {
            return Err(format!("blocklength must be a positive integer, got {t:?}"));
        }
        Ok(v)
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (count(lo)?, count(hi)?);
        return covert_core::bounds::log_grid(lo, hi, per_decade).map_err(|e| e.to_string());
    }
    let mut grid = s.split(',').map(|t| count(t).map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
    grid.sort_unstable();
    grid.dedup();
    Ok(grid)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_n_grid("400", 10).unwrap(), vec![400]);
        assert_eq!(parse_n_grid("1e3,100, 1e3", 10).unwrap(), vec![100, 1000]);
        let g = parse_n_grid("1e3..1e5", 10).unwrap();
        assert_eq!((g[0], g[g.len() - 1], g.len()), (1000, 100_000, 21));
        assert!(parse_n_grid("0", 10).is_err());
        assert!(parse_n_grid("2.5", 10).is_err());
        assert!(parse_n_grid("abc", 10).is_err());
    }

    #[test]
    fn config_lines() {
        let flags = config_flags("# comment\n\ndelta = 0.01\nn=400\n").unwrap();
        assert_eq!(flags, vec!["--delta", "0.01", "--n", "400"]);
        assert!(config_flags("delta 0.01").is_err());
        assert!(config_flags("config=x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let args: Vec<OsString> = ["covert", "--delta", "0.01", "plan", "--delta", "0.02"]
            .iter()
            .map(OsString::from)
            .collect();
        let cli = Cli::try_parse_from(args).unwrap();
        assert_eq!(cli.delta, Some(0.02));
    }
}
