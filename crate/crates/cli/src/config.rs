use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything needed to reproduce a run. Written by `--emit-config`, read by `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub resolution: Option<f64>,
    pub format: Format,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Exact minimax regret of a finite class by backward induction
    Minimax(MinimaxArgs),
    /// Value of dual strategies: random starts, optional local search
    Dual(DualArgs),
    /// Sequential covering numbers and entropy curves
    Cover(CoverArgs),
    /// Regret bound sweeps, rate fits and the rate table
    Bounds(BoundsArgs),
    /// Numerical certification of the analytic inequalities
    Verify(VerifyArgs),
    /// Lower-bound construction and simulations
    #[command(subcommand)]
    Assouad(AssouadCommand),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameArgs {
    /// Expert class JSON: {"contexts": [...], "experts": [[...], ...]}
    #[arg(long)]
    pub class: PathBuf,
    /// Horizon
    #[arg(long)]
    pub n: usize,
    /// Context availability: `all`, `previous-outcomes` or `static:0,2`
    #[arg(long, default_value = "all")]
    pub rule: String,
    /// Memoize on (context, outcome) counts
    #[arg(long)]
    #[serde(default)]
    pub collapse: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimaxArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Include the adversary's context tree and the optimal prediction tree
    #[arg(long)]
    #[serde(default)]
    pub dump_strategy: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Dual strategy JSON to evaluate instead of random starts
    #[arg(long)]
    #[serde(default)]
    pub strategy: Option<PathBuf>,
    /// Number of random starting strategies
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    /// Local search sweeps per start
    #[arg(long, default_value_t = 0)]
    pub sweeps: usize,
    /// Also solve the primal game and report the gap
    #[arg(long)]
    #[serde(default)]
    pub primal: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverArgs {
    /// Expert class JSON
    #[arg(long, conflicts_with = "lipschitz", required_unless_present = "lipschitz")]
    #[serde(default)]
    pub class: Option<PathBuf>,
    /// Use the Lipschitz grid class on [0,1]^DIM instead of a class file
    #[arg(long, value_name = "DIM")]
    #[serde(default)]
    pub lipschitz: Option<usize>,
    /// Value levels per grid step of the Lipschitz grid
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// Scales, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub gammas: Vec<f64>,
    /// Tree depth
    #[arg(long)]
    pub n: usize,
    /// Also run the exact cover search when the instance is small enough
    #[arg(long)]
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    /// Entropy curve: `pow:p=2,C=1`, `log:d=1` or `zero`
    #[arg(long)]
    pub entropy: String,
    /// Values of n: `2^10..2^20`, `2^10..2^20:2` or a comma list
    #[arg(long, default_value = "2^10..2^20")]
    pub n_grid: String,
    /// Fit log-log slopes of both bounds
    #[arg(long)]
    #[serde(default)]
    pub fit: bool,
    /// Include the rate-exponent table (power curves only)
    #[arg(long)]
    #[serde(default)]
    pub rates: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// Run every check
    #[arg(long, conflicts_with = "checks")]
    #[serde(default)]
    pub all: bool,
    /// Checks to run, e.g. PHI_LIPSCHITZ kl-eps
    #[arg(value_name = "CHECK")]
    #[serde(default)]
    pub checks: Vec<String>,
    /// Also evaluate sup psi at lambda* and scan for the threshold
    #[arg(long)]
    #[serde(default)]
    pub threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssouadCommand {
    /// Describe the bin construction
    Build(AssouadClassArgs),
    /// Draw a data set under random signs
    Sample(SampleArgs),
    /// Online-to-batch risk of a learner
    Risk(RiskArgs),
    /// Median regret of a learner across n
    Scaling(ScalingArgs),
    /// Explicit lower-bound values across n
    LowerBound(LowerBoundArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssouadClassArgs {
    /// Dimension of the domain
    #[arg(long)]
    pub dim: usize,
    /// Bump height; defaults to n^(-1/(dim+1))/8 when --n is given
    #[arg(long)]
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Number of samples
    #[arg(long)]
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleArgs {
    #[command(flatten)]
    pub class: AssouadClassArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskArgs {
    #[command(flatten)]
    pub class: AssouadClassArgs,
    /// `bayes`, `bayes-enumerated`, `laplace`, `singleton` or `constant:x`
    #[arg(long, default_value = "bayes")]
    pub learner: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value = "2^8..2^14")]
    pub n_grid: String,
    #[arg(long, default_value = "bayes")]
    pub learner: String,
    #[arg(long, default_value_t = 11)]
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value = "2^8..2^14")]
    pub n_grid: String,
}

/// Parses `2^10..2^20`, `2^10..2^20:2`, `1000..8000` (doubling) or `100,200,400`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let bad = || format!("cannot parse n grid `{s}`");
    if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((h, st)) => (h, st.trim().parse::<u32>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        if step == 0 {
            return Err(bad());
        }
        let power = |t: &str| -> Result<(f64, i32), String> {
            match t.trim().split_once('^') {
                Some((b, e)) => Ok((b.trim().parse().map_err(|_| bad())?, e.trim().parse().map_err(|_| bad())?)),
                None => Ok((t.trim().parse().map_err(|_| bad())?, 1)),
            }
        };
        let (b0, e0) = power(lo)?;
        let (b1, e1) = power(hi)?;
        if rest.contains('^') != lo.contains('^') {
            return Err(bad());
        }
        if lo.contains('^') {
            if b0 != b1 || !(b0 > 1.0) || e1 < e0 {
                return Err(bad());
            }
            return Ok((e0..=e1).step_by(step as usize).map(|e| b0.powi(e)).collect());
        }
        // plain numbers: double from lo up to hi
        if !(b0 > 0.0) || b1 < b0 {
            return Err(bad());
        }
        let mut v = Vec::new();
        let mut x = b0;
        while x <= b1 * (1.0 + 1e-12) {
            v.push(x);
            x *= 2f64.powi(step as i32);
        }
        return Ok(v);
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect()
}
