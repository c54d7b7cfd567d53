//! Command-line front end for the rotational-analysis toolkit.

pub mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use chacha_rot::arx::{QuarterRoundParams, RotAmount};
use chacha_rot::bounds::{
    chain_prob_k, daum_prob, expected_collisions, fixed_string_count, multi_add_rot_prob,
    multi_round_bounds, qr_bounds, triple_prob_p, BoundVariant,
};
use chacha_rot::distinguisher::{default_budget, run_trials, OracleSpec, TrialConfig};
use chacha_rot::exact::RenderedValue;
use chacha_rot::search::{
    addition_census, chain_census, condition_census, default_workers, qr_census,
    random_perm_collision_mc, sampled_round_census, CensusResult, SearchOptions,
};
use chacha_rot::tables::{census_table, census_table_golden, round_bound_table, TABLE1_ROWS};
use chacha_rot::{Error, ExactProb};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "chacha-rot",
    version,
    about = "Rotational analysis of the ChaCha permutation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Chain,
    Corrected,
}

impl From<VariantArg> for BoundVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Chain => BoundVariant::Chain,
            VariantArg::Corrected => BoundVariant::Corrected,
        }
    }
}

/// `r1,r2,r3,r4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rots(pub [u32; 4]);

impl FromStr for Rots {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<u32> = s
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let rots: [u32; 4] = parts
            .try_into()
            .map_err(|_| "expected four comma-separated rotation amounts".to_string())?;
        Ok(Rots(rots))
    }
}

/// A single round count `i` or an inclusive range `a-b` / `a..b` / `a..=b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRange {
    pub first: u32,
    pub last: u32,
}

impl FromStr for RoundRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |p: &str| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}"));
        let (first, last) = if let Some((a, b)) = s.split_once("..=") {
            (num(a)?, num(b)?)
        } else if let Some((a, b)) = s.split_once("..") {
            (num(a)?, num(b)?)
        } else if let Some((a, b)) = s.split_once('-') {
            (num(a)?, num(b)?)
        } else {
            let i = num(s)?;
            (i, i)
        };
        if first > last {
            return Err(format!("empty round range {first}..{last}"));
        }
        Ok(RoundRange { first, last })
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("{s:?}: {e}"))
}

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run searches past the size guard.
    #[arg(long)]
    pub force: bool,
}

impl Common {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            workers: self
                .threads
                .filter(|&t| t > 0)
                .unwrap_or_else(default_workers),
            force: self.force,
            ..SearchOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RotArgs {
    #[arg(long, default_value_t = 32)]
    pub word_bits: u32,
    #[arg(long, default_value_t = 1)]
    pub rot: u32,
}

impl RotArgs {
    fn amount(&self) -> Result<RotAmount, Error> {
        RotAmount::of(self.word_bits, self.rot)
    }
}

#[derive(Debug, Clone, Args)]
pub struct QrArgs {
    #[arg(long, default_value_t = 4)]
    pub word_bits: u32,
    /// Quarter-round rotation constants `r1,r2,r3,r4`; defaults to the
    /// standard toy constants for 4-6 bit words and to (16,12,8,7) for 32.
    #[arg(long)]
    pub rots: Option<Rots>,
    #[arg(long, default_value_t = 1)]
    pub rot: u32,
}

impl QrArgs {
    fn resolve(&self) -> Result<(QuarterRoundParams, RotAmount), CliError> {
        let params = quarter_round_params(self.word_bits, self.rots)?;
        Ok((params, RotAmount::of(self.word_bits, self.rot)?))
    }
}

fn quarter_round_params(w: u32, rots: Option<Rots>) -> Result<QuarterRoundParams, CliError> {
    if let Some(Rots(r)) = rots {
        return Ok(QuarterRoundParams::toy(w, r)?);
    }
    if w == 32 {
        return Ok(QuarterRoundParams::CHACHA);
    }
    match TABLE1_ROWS.iter().find(|row| row.word_bits == w) {
        Some(row) => Ok(row.params()),
        None => Err(CliError::Usage(format!(
            "no default rotation constants for {w}-bit words; pass --rots r1,r2,r3,r4"
        ))),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quarter-round collision probability bounds.
    QrBounds {
        #[command(flatten)]
        rot: RotArgs,
        #[arg(long, value_enum, default_value = "chain")]
        variant: VariantArg,
        #[command(flatten)]
        common: Common,
    },
    /// Heuristic bounds for several rounds of the permutation.
    PermBounds {
        #[command(flatten)]
        rot: RotArgs,
        #[arg(long, default_value = "1-20")]
        rounds: RoundRange,
        #[arg(long, value_enum, default_value = "corrected")]
        variant: VariantArg,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive quarter-round rotational-collision count.
    QrCensus {
        #[command(flatten)]
        qr: QrArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive count of inputs meeting all four addition conditions.
    CondCensus {
        #[command(flatten)]
        qr: QrArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Checks the k-addend probability formula against exhaustive counting.
    VerifyAdd {
        #[arg(long, default_value_t = 4)]
        word_bits: u32,
        #[arg(long, default_value_t = 1)]
        rot: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive count for the chained two- and three-addend condition.
    ChainCensus {
        #[arg(long, default_value_t = 4)]
        word_bits: u32,
        #[arg(long, default_value_t = 1)]
        rot: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled collision rate of several full rounds.
    RoundSample {
        #[command(flatten)]
        qr: QrArgs,
        #[arg(long, default_value_t = 1)]
        rounds: u32,
        #[arg(long, default_value_t = 1 << 20)]
        samples: u64,
        #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Number of k-word strings fixed by the rotation.
    FixedCount {
        #[command(flatten)]
        rot: RotArgs,
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Expected rotational collisions of a uniform random permutation.
    ExpectedCollisions {
        #[command(flatten)]
        rot: RotArgs,
        #[arg(long, default_value_t = 4)]
        k: u32,
        /// Also estimate by sampling this many random permutations.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Rotational distinguisher against a matching random permutation.
    Distinguish {
        #[command(flatten)]
        qr: QrArgs,
        /// Attack this many full rounds instead of one quarter round.
        #[arg(long)]
        rounds: Option<u32>,
        /// Query budget (default: ceil(c / upper bound)).
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 5)]
        budget_factor: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write one JSON line per game to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Toy-size census table with bounds.
    Table1 {
        #[arg(long, value_enum, default_value = "chain")]
        variant: VariantArg,
        /// Print stored counts instead of running the census.
        #[arg(long)]
        fast: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Full-size multi-round bound table.
    Table2 {
        #[command(flatten)]
        rot: RotArgs,
        #[arg(long, default_value = "1-20")]
        rounds: RoundRange,
        #[arg(long, value_enum, default_value = "corrected")]
        variant: VariantArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Infeasible { .. }) => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        // downstream closed the pipe (`| head`); nothing left to report
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    value: &T,
    text: impl FnOnce() -> String,
    csv: impl FnOnce() -> String,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let s = serde_json::to_string_pretty(value).expect("report serializes");
            writeln!(out, "{s}")?;
        }
        Format::Text => write!(out, "{}", text())?,
        Format::Csv => write!(out, "{}", csv())?,
    }
    Ok(())
}

fn census_report(result: CensusResult, formula: Option<ExactProb>) -> CensusReport {
    let matches_formula = formula.as_ref().map(|f| *f == result.probability);
    CensusReport {
        schema: schema("census"),
        result,
        formula: formula.map(|f| f.render()),
        matches_formula,
    }
}

fn emit_census(out: &mut dyn Write, format: Format, report: &CensusReport) -> Result<(), CliError> {
    emit(
        out,
        format,
        report,
        || census_text(report),
        || census_csv(report),
    )
}

fn round_entries(
    rot: RotAmount,
    range: RoundRange,
    variant: BoundVariant,
) -> Result<Vec<RoundBoundEntry>, CliError> {
    if range.first == 0 {
        return Err(CliError::Usage("rounds start at 1".into()));
    }
    Ok(round_bound_table(rot, range.first, range.last, variant)?
        .iter()
        .map(RoundBoundEntry::from_row)
        .collect())
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::QrBounds {
            rot,
            variant,
            common,
        } => {
            let amount = rot.amount()?;
            let variant = BoundVariant::from(variant);
            let bounds = qr_bounds(amount, variant);
            let report = BoundsReport {
                schema: schema("qr-bounds"),
                word_bits: rot.word_bits,
                rot: rot.rot,
                variant: variant.name().into(),
                daum: daum_prob(amount).render(),
                chain: chain_prob_k(amount).render(),
                triple: triple_prob_p(amount).render(),
                lower: bounds.lower.render(),
                upper: bounds.upper.render(),
                ordered: bounds.is_ordered(),
            };
            emit(
                out,
                common.format,
                &report,
                || {
                    let mut s = format!(
                        "quarter round, w = {}, r = {}, {} variant\n",
                        report.word_bits, report.rot, report.variant
                    );
                    s.push_str(&format!("D      {}\n", report.daum));
                    s.push_str(&format!("K      {}\n", report.chain));
                    s.push_str(&format!("P      {}\n", report.triple));
                    s.push_str(&bounds_pair_text(&bounds));
                    s.push('\n');
                    if !report.ordered {
                        s.push_str("note: lower bound exceeds upper bound\n");
                    }
                    s
                },
                || {
                    format!(
                        "word_bits,rot,variant,lower,upper,lower_log2,upper_log2,ordered\n{},{},{},{},{},{},{},{}\n",
                        report.word_bits,
                        report.rot,
                        report.variant,
                        report.lower.decimal,
                        report.upper.decimal,
                        bare_log2(&report.lower),
                        bare_log2(&report.upper),
                        report.ordered
                    )
                },
            )
        }
        Command::PermBounds {
            rot,
            rounds,
            variant,
            common,
        }
        | Command::Table2 {
            rot,
            rounds,
            variant,
            common,
        } => {
            let amount = rot.amount()?;
            let variant = BoundVariant::from(variant);
            let report = PermBoundsReport {
                schema: schema("perm-bounds"),
                word_bits: rot.word_bits,
                rot: rot.rot,
                variant: variant.name().into(),
                heuristic: true,
                rows: round_entries(amount, rounds, variant)?,
            };
            emit(
                out,
                common.format,
                &report,
                || {
                    format!(
                        "w = {}, r = {}, {} variant (rounds treated as independent)\n{}",
                        report.word_bits,
                        report.rot,
                        report.variant,
                        round_rows_text(&report.rows)
                    )
                },
                || round_rows_csv(&report.rows),
            )
        }
        Command::QrCensus { qr, common } => {
            let (params, rot) = qr.resolve()?;
            let result = qr_census(&params, rot, &common.options())?;
            emit_census(out, common.format, &census_report(result, None))
        }
        Command::CondCensus { qr, common } => {
            let (params, rot) = qr.resolve()?;
            let result = condition_census(&params, rot, &common.options())?;
            emit_census(out, common.format, &census_report(result, None))
        }
        Command::VerifyAdd {
            word_bits,
            rot,
            k,
            common,
        } => {
            let rot = RotAmount::of(word_bits, rot)?;
            let result = addition_census(rot, k, &common.options())?;
            let formula = multi_add_rot_prob(rot, k)?;
            emit_census(out, common.format, &census_report(result, Some(formula)))
        }
        Command::ChainCensus {
            word_bits,
            rot,
            common,
        } => {
            let rot = RotAmount::of(word_bits, rot)?;
            let result = chain_census(rot, &common.options())?;
            emit_census(
                out,
                common.format,
                &census_report(result, Some(chain_prob_k(rot))),
            )
        }
        Command::RoundSample {
            qr,
            rounds,
            samples,
            seed,
            common,
        } => {
            let (params, rot) = qr.resolve()?;
            if rounds == 0 {
                return Err(CliError::Usage("rounds must be at least 1".into()));
            }
            let estimate =
                sampled_round_census(&params, rot, rounds, samples, seed, &common.options())?;
            let heuristic = multi_round_bounds(rot, rounds, BoundVariant::Chain)?;
            let report = SampleReport {
                schema: schema("round-sample"),
                estimate,
                heuristic_lower: heuristic.lower.render(),
                heuristic_upper: heuristic.upper.render(),
            };
            let e = &report.estimate;
            emit(
                out,
                common.format,
                &report,
                || {
                    format!(
                        "{} rounds, w = {}, r = {}, seed {}\nhits      {} of {}\nestimate  {:.6e}\n95% CI    [{:.6e}, {:.6e}]\nheuristic [{}, {}]\n",
                        rounds,
                        e.config.word_bits,
                        e.config.rot,
                        e.seed,
                        e.hits,
                        e.samples,
                        e.estimate,
                        e.lower,
                        e.upper,
                        report.heuristic_lower.log2,
                        report.heuristic_upper.log2
                    )
                },
                || {
                    format!(
                        "word_bits,rots,r,rounds,hits,samples,estimate,lower,upper,seed\n{},{},{},{},{},{},{:e},{:e},{:e},{}\n",
                        e.config.word_bits,
                        rots_field(params.rots()),
                        e.config.rot,
                        rounds,
                        e.hits,
                        e.samples,
                        e.estimate,
                        e.lower,
                        e.upper,
                        e.seed
                    )
                },
            )
        }
        Command::FixedCount { rot, k, common } => {
            let amount = rot.amount()?;
            let report = FixedCountReport {
                schema: schema("fixed-count"),
                word_bits: rot.word_bits,
                k,
                rot: rot.rot,
                count: fixed_string_count(amount, k)?.to_string(),
            };
            emit(
                out,
                common.format,
                &report,
                || format!("{}\n", report.count),
                || {
                    format!(
                        "word_bits,k,r,count\n{},{},{},{}\n",
                        report.word_bits, k, report.rot, report.count
                    )
                },
            )
        }
        Command::ExpectedCollisions {
            rot,
            k,
            trials,
            seed,
            common,
        } => {
            let amount = rot.amount()?;
            let expected = RenderedValue::of(&expected_collisions(amount, k)?);
            let monte_carlo = match trials {
                Some(t) => Some(random_perm_collision_mc(
                    amount,
                    k,
                    t,
                    seed,
                    &common.options(),
                )?),
                None => None,
            };
            let report = ExpectationReport {
                schema: schema("expected-collisions"),
                word_bits: rot.word_bits,
                k,
                rot: rot.rot,
                expected,
                monte_carlo,
            };
            emit(
                out,
                common.format,
                &report,
                || {
                    let mut s = format!("expected {}\n", report.expected);
                    if let Some(mc) = &report.monte_carlo {
                        s.push_str(&format!(
                            "sampled  {:.4} +- {:.4} over {} permutations (95% CI [{:.4}, {:.4}])\n",
                            mc.mean, mc.std_error, mc.trials, mc.lower, mc.upper
                        ));
                    }
                    s
                },
                || {
                    let mut header = String::from("word_bits,k,r,expected");
                    let mut line = format!(
                        "{},{},{},{}",
                        report.word_bits, k, report.rot, report.expected.decimal
                    );
                    if let Some(mc) = &report.monte_carlo {
                        header.push_str(",trials,mean,std_error");
                        line.push_str(&format!(",{},{},{}", mc.trials, mc.mean, mc.std_error));
                    }
                    format!("{header}\n{line}\n")
                },
            )
        }
        Command::Distinguish {
            qr,
            rounds,
            budget,
            budget_factor,
            trials,
            seed,
            log,
            common,
        } => {
            let (params, rot) = qr.resolve()?;
            let (oracle, upper) = match rounds {
                Some(0) => return Err(CliError::Usage("rounds must be at least 1".into())),
                Some(i) => (
                    OracleSpec::chacha(params, i),
                    multi_round_bounds(rot, i, BoundVariant::Chain)?.upper,
                ),
                None => (
                    OracleSpec::quarter_round(params),
                    qr_bounds(rot, BoundVariant::Chain).upper,
                ),
            };
            let budget = match budget {
                Some(b) => b,
                None => default_budget(&upper, budget_factor)?,
            };
            let config = TrialConfig {
                oracle,
                rot: rot.get(),
                budget,
                trials,
                master_seed: seed,
            };
            let outcome = run_trials(&config, common.options().workers)?;
            if let Some(path) = log {
                let mut file = BufWriter::new(File::create(path)?);
                for record in &outcome.records {
                    serde_json::to_writer(&mut file, record).expect("record serializes");
                    writeln!(file)?;
                }
                file.flush()?;
            }
            let s = &outcome.stats;
            let report = DistinguishReport {
                schema: schema("distinguish"),
                oracle: oracle.kind.name().into(),
                word_bits: qr.word_bits,
                rots: params.rots(),
                rot: rot.get(),
                rounds,
                budget: s.budget,
                trials: s.trials,
                seed: s.master_seed,
                true_positives: s.true_positives,
                false_positives: s.false_positives,
                tpr: s.tpr,
                fpr: s.fpr,
                advantage: s.advantage,
                tpr_interval: s.tpr_interval,
                fpr_interval: s.fpr_interval,
            };
            emit(
                out,
                common.format,
                &report,
                || {
                    format!(
                        "{} vs random permutation, w = {}, r = {}\nbudget    {} queries, {} trials, seed {:#x}\nTPR       {:.4}  [{:.4}, {:.4}]\nFPR       {:.4}  [{:.4}, {:.4}]\nadvantage {:.4}\n",
                        report.oracle,
                        report.word_bits,
                        report.rot,
                        report.budget,
                        report.trials,
                        report.seed,
                        report.tpr,
                        report.tpr_interval.0,
                        report.tpr_interval.1,
                        report.fpr,
                        report.fpr_interval.0,
                        report.fpr_interval.1,
                        report.advantage
                    )
                },
                || {
                    format!(
                        "oracle,word_bits,r,budget,trials,seed,tp,fp,tpr,fpr,advantage\n{},{},{},{},{},{},{},{},{},{},{}\n",
                        report.oracle,
                        report.word_bits,
                        report.rot,
                        report.budget,
                        report.trials,
                        report.seed,
                        report.true_positives,
                        report.false_positives,
                        report.tpr,
                        report.fpr,
                        report.advantage
                    )
                },
            )
        }
        Command::Table1 {
            variant,
            fast,
            common,
        } => {
            let variant = BoundVariant::from(variant);
            let rows = if fast {
                census_table_golden(variant)
            } else {
                census_table(&common.options(), variant)?
            };
            let report = Table1Report {
                schema: schema("table1"),
                variant: variant.name().into(),
                source: if fast { "stored" } else { "census" }.into(),
                rows: rows.iter().map(Table1Entry::from_row).collect(),
            };
            emit(
                out,
                common.format,
                &report,
                || table1_text(&report),
                || table1_csv(&report),
            )
        }
    }
}
