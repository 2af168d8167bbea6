use clap::{Args, Parser, Subcommand, ValueEnum};
use parrondo::{FamilyParams, PatternSpec, Rational};

use crate::output::{Backend, Failure, Format};

#[derive(Parser, Debug)]
#[command(name = "parrondo", version, about = "Mean and variance of Parrondo games, exact or in floating point")]
pub struct Cli {
    /// Number backend for analytic commands. Spectral commands always use float.
    #[arg(long, global = true, value_enum, default_value = "exact")]
    pub backend: Backend,

    /// Output format (default json; csv for region and sweep-k).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for parallel commands.
    #[arg(long, global = true, env = "PARRONDO_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mean and variance of game A, game B or the random mixture.
    Analyze(AnalyzeArgs),
    /// Mean and variance of a periodic pattern by both methods.
    Pattern(PatternArgs),
    /// Eigenvalues of game B, discriminant and region label.
    Spectrum(FamilyArgs),
    /// Sign-certifying pattern lengths s0 and s1 for the history family.
    Bounds(PointArgs),
    /// Exact sign checks below s0 and s1 at one (kappa, lambda).
    VerifyPoint(PointArgs),
    /// The full K x K sign sweep, streamed as CSV.
    SweepK(SweepArgs),
    /// Sign of mu(0) on a parameter grid.
    Region(RegionArgs),
    /// lim (r+s) mu_[r,s](0) as s grows, with its closed form.
    Limit(LimitArgs),
    /// Largest bias keeping a mixture or pattern winning.
    Epsilon0(TargetArgs),
    /// Monte Carlo run with SLLN and CLT checks.
    Simulate(SimulateArgs),
    /// Published constants next to computed values.
    PaperTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Capital,
    History,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Defaults to history when --kappa or --lambda is given.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub rho: Option<Rational>,
    #[arg(long)]
    pub kappa: Option<Rational>,
    #[arg(long)]
    pub lambda: Option<Rational>,
    /// Bias parameter.
    #[arg(long, default_value = "0")]
    pub eps: Rational,
}

impl FamilyArgs {
    pub fn family(&self) -> FamilyArg {
        self.family.unwrap_or(if self.kappa.is_some() || self.lambda.is_some() {
            FamilyArg::History
        } else {
            FamilyArg::Capital
        })
    }

    pub fn params(&self) -> Result<FamilyParams<Rational>, Failure> {
        let params = match self.family() {
            FamilyArg::Capital => {
                if self.kappa.is_some() || self.lambda.is_some() {
                    return Err(Failure::Usage("--kappa/--lambda do not apply to the capital family".into()));
                }
                let rho = self.rho.clone().ok_or_else(|| Failure::Usage("capital family needs --rho".into()))?;
                FamilyParams::Capital { rho }
            }
            FamilyArg::History => {
                if self.rho.is_some() {
                    return Err(Failure::Usage("--rho does not apply to the history family".into()));
                }
                match (&self.kappa, &self.lambda) {
                    (Some(k), Some(l)) => FamilyParams::History { kappa: k.clone(), lambda: l.clone() },
                    _ => return Err(Failure::Usage("history family needs --kappa and --lambda".into())),
                }
            }
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GameArg {
    A,
    B,
    Mixture,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value = "mixture")]
    pub game: GameArg,
    /// Probability of playing A in the mixture.
    #[arg(long, default_value = "1/2")]
    pub gamma: Rational,
}

#[derive(Args, Debug, Clone)]
pub struct WordArgs {
    #[arg(long, requires = "s", conflicts_with = "word")]
    pub r: Option<usize>,
    #[arg(long, requires = "r", conflicts_with = "word")]
    pub s: Option<usize>,
    /// Arbitrary word over {A, B}, e.g. ABB.
    #[arg(long)]
    pub word: Option<PatternSpec>,
}

impl WordArgs {
    pub fn spec(&self) -> Result<Option<PatternSpec>, Failure> {
        match (&self.word, self.r, self.s) {
            (Some(w), _, _) => Ok(Some(w.clone())),
            (None, Some(r), Some(s)) => PatternSpec::rs(r, s).map(Some).map_err(|e| Failure::Usage(e.to_string())),
            _ => Ok(None),
        }
    }

    pub fn required(&self) -> Result<PatternSpec, Failure> {
        self.spec()?.ok_or_else(|| Failure::Usage("give --r and --s, or --word".into()))
    }
}

#[derive(Args, Debug)]
pub struct PatternArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub word: WordArgs,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[arg(long)]
    pub kappa: Rational,
    #[arg(long)]
    pub lambda: Rational,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// First point index (inclusive).
    #[arg(long, default_value_t = 0)]
    pub from: usize,
    /// Last point index (exclusive); defaults to the end.
    #[arg(long)]
    pub to: Option<usize>,
    /// Omit the CSV header, for appending to a partial run.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[arg(long, value_enum, default_value = "history")]
    pub family: FamilyArg,
    #[arg(long, default_value = "0")]
    pub rho_min: Rational,
    #[arg(long, default_value = "3")]
    pub rho_max: Rational,
    #[arg(long, default_value = "0")]
    pub kappa_min: Rational,
    #[arg(long, default_value = "5")]
    pub kappa_max: Rational,
    #[arg(long, default_value = "0")]
    pub lambda_min: Rational,
    #[arg(long, default_value = "5")]
    pub lambda_max: Rational,
    /// Interior points per axis.
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
    /// Mixture probability (ignored when a pattern is given).
    #[arg(long, default_value = "1/2")]
    pub gamma: Rational,
    #[arg(long, requires = "s")]
    pub r: Option<usize>,
    #[arg(long, requires = "r")]
    pub s: Option<usize>,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub r: usize,
}

#[derive(Args, Debug)]
pub struct TargetArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Mixture probability; used when no pattern is given.
    #[arg(long, default_value = "1/2")]
    pub gamma: Rational,
    #[command(flatten)]
    pub word: WordArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimGameArg {
    A,
    B,
    Mixture,
    Pattern,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value = "mixture")]
    pub game: SimGameArg,
    #[arg(long, default_value = "1/2")]
    pub gamma: Rational,
    #[command(flatten)]
    pub word: WordArgs,
    /// Games per replication.
    #[arg(long, default_value_t = 100_000)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub replications: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// A state index or "stationary".
    #[arg(long, default_value = "0")]
    pub initial: String,
    /// Include every replication's final profit.
    #[arg(long)]
    pub finals: bool,
}
