use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nw", version, about = "Delayed blowflies model: series, heteroclinics, regions and fronts")]
pub struct Cli {
    /// Worker threads for sweeps and simulations (`NW_THREADS` wins).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic roots, series data, overshoot criterion and region membership.
    Analyze(Analyze),
    /// Dirichlet coefficients and the series profile against its bounds.
    Series(Series),
    /// Integrate the heteroclinic connection and report its crossings of ln p.
    Heteroclinic(Heteroclinic),
    /// Overshoot-region map on a (tau, ln ln p) grid.
    Atlas(Atlas),
    /// Boundary curves T(c), tau(c) and their large-c limits.
    Boundaries(Boundaries),
    /// Run the delayed reaction-diffusion equation.
    Simulate(Simulate),
    /// Front speed and profile shape from a snapshot file.
    Diagnose(Diagnose),
    /// Numerical verification suites.
    Verify(Verify),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Params {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct Analyze {
    #[command(flatten)]
    pub params: Params,
    /// Wave speed for the tail and membership checks.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Series {
    #[command(flatten)]
    pub params: Params,
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Series parameter; optimised when omitted.
    #[arg(long)]
    pub eps: Option<f64>,
    /// coeffs.csv,profile.csv
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Heteroclinic {
    #[command(flatten)]
    pub params: Params,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Steps per delay interval.
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    /// traj.csv,crossings.json
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Atlas {
    /// LO:HI:N
    #[arg(long)]
    pub tau: Range,
    /// LO:HI:N in p (sampled evenly in ln ln p)
    #[arg(long)]
    pub p: Range,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Boundaries {
    /// P = ln p - 1
    #[arg(long = "P")]
    pub big_p: f64,
    /// LO:HI:N, log-spaced
    #[arg(long)]
    pub c: Range,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
pub struct Simulate {
    #[arg(long, value_parser = ["fig3", "fig4"])]
    pub preset: Option<String>,
    /// JSON with the simulation config fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// snaps.csv,front.csv,meta.json
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Diagnose {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub params: Params,
    /// Tracked level; ln p / 2 when omitted.
    #[arg(long)]
    pub level: Option<f64>,
    /// diag.json[,profile.csv]
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub out: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Appendix,
    Series,
    Model,
}

#[derive(Debug, Args)]
pub struct Verify {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Points per grid axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// margins.csv; printed to stdout when omitted.
    #[arg(long, value_delimiter = ',')]
    pub out: Vec<PathBuf>,
}

/// `LO:HI:N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected LO:HI:N, got `{s}`"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("bad bound `{v}`: {e}"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n = n.trim().parse::<usize>().map_err(|e| format!("bad count `{n}`: {e}"))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n == 0 {
            return Err(format!("need finite LO <= HI and N >= 1, got `{s}`"));
        }
        Ok(Range { lo, hi, n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("0.01:0.3:40".parse::<Range>().unwrap(), Range { lo: 0.01, hi: 0.3, n: 40 });
        assert!("1:0:3".parse::<Range>().is_err());
        assert!("1:2".parse::<Range>().is_err());
        assert!("1:2:0".parse::<Range>().is_err());
    }

    #[test]
    fn definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
