//! `qsdc` — run QSDC sessions, dump exact outcome tables, sweep attack
//! parameters.
//!
//! Exit codes: 0 for a delivered message, 1 for usage or configuration
//! errors, 2 when the session aborted because the eavesdropping check
//! tripped. Detection is a protocol outcome, not a failure.

mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsdc_core::analysis::{
    build_report, cell_label, exact_episode_distribution, oracle_vs_monte_carlo,
};
use qsdc_core::protocol::{run_session, Bits, ProtocolParams};
use qsdc_core::{AttackAction, AttackModel, BasisPolicy};

use output::{
    bits_to_hex, hex_to_bits, transcript_lines, MetaDoc, OracleCellDoc, OracleDocument, ReportDoc,
    ReportDocument, SweepDocument,
};

const EXIT_DELIVERED: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_ABORTED: i32 = 2;

// Dedicated randomness streams; episodes use streams 1..=N and planning
// uses stream 0, so auxiliary draws stay clear of both.
const STREAM_MESSAGE: u64 = u64::MAX;
const STREAM_ORACLE_SAMPLES: u64 = u64::MAX - 1;

#[derive(Parser)]
#[command(
    name = "qsdc",
    version,
    about = "Simulator for an EPR-pair quantum secure direct communication protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session end to end and write a report (and optionally the
    /// announcement transcript).
    Run(RunArgs),
    /// Write the exact episode outcome distribution for selected
    /// configurations, optionally checked against Monte Carlo sampling.
    Oracle(OracleArgs),
    /// Run one session per attack-probability grid point and report how the
    /// check error rate scales.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AttackKind {
    None,
    IrZ,
    IrX,
    IrRandom,
    Collective,
    CollectiveH,
}

impl AttackKind {
    fn to_model(self) -> AttackModel {
        match self {
            AttackKind::None => AttackModel::None,
            AttackKind::IrZ => AttackModel::InterceptResend {
                policy: BasisPolicy::AlwaysZ,
            },
            AttackKind::IrX => AttackModel::InterceptResend {
                policy: BasisPolicy::AlwaysX,
            },
            AttackKind::IrRandom => AttackModel::InterceptResend {
                policy: BasisPolicy::UniformRandom,
            },
            AttackKind::Collective => AttackModel::CollectiveCnot {
                pre_hadamard: false,
            },
            AttackKind::CollectiveH => AttackModel::CollectiveCnot { pre_hadamard: true },
        }
    }
}

#[derive(Args)]
struct SessionFlags {
    /// Number of EPR pairs in the session.
    #[arg(long)]
    pairs: usize,

    /// Fraction of positions that receive the Hadamard layer.
    #[arg(long, default_value_t = 0.5)]
    hadamard_fraction: f64,

    /// Fraction of positions sacrificed for the eavesdropping check.
    #[arg(long, default_value_t = 0.5)]
    check_fraction: f64,

    /// Abort when the check error rate exceeds this threshold.
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,

    /// Eve's strategy.
    #[arg(long, value_enum, default_value_t = AttackKind::None)]
    attack: AttackKind,

    /// Per-episode probability that Eve acts.
    #[arg(long, default_value_t = 1.0)]
    attack_probability: f64,

    /// Master seed. Omit to draw one from the OS; the drawn seed is printed
    /// so the run stays reproducible.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    session: SessionFlags,

    /// Message as hex digits (four bits per digit).
    #[arg(long, conflicts_with = "message_bits")]
    message_hex: Option<String>,

    /// Message as an explicit bit string, e.g. 10110.
    #[arg(long)]
    message_bits: Option<String>,

    /// Where to write the report JSON; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Where to write the announcement transcript (one JSON object per line).
    #[arg(long)]
    transcript: Option<PathBuf>,

    /// Also measure exact-vs-sampled total-variation distance with this many
    /// samples per episode configuration.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BitChoice {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum HadamardChoice {
    On,
    Off,
    Both,
}

#[derive(Args)]
struct OracleArgs {
    /// Episode attack action. `ir-random` is a session-level policy, not a
    /// single configuration, and is rejected here.
    #[arg(long, value_enum, default_value_t = AttackKind::None)]
    attack: AttackKind,

    /// Encoded bit to tabulate.
    #[arg(long, value_enum, default_value_t = BitChoice::Both)]
    alice_bit: BitChoice,

    /// Hadamard flag of the position.
    #[arg(long, value_enum, default_value_t = HadamardChoice::Both)]
    hadamard: HadamardChoice,

    /// Additionally sample each cell this many times and report the
    /// total-variation distance to the exact table (minimum 1000).
    #[arg(long)]
    samples: Option<usize>,

    /// Seed for the sampling check.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Where to write the oracle JSON; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    session: SessionFlags,

    /// Comma-separated attack probabilities, e.g. 0,0.25,0.5,1.
    #[arg(long)]
    grid: String,

    /// Where to write the sweep JSON; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() {
    std::process::exit(run_cli());
}

fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_DELIVERED
                }
                _ => {
                    let line = e.to_string();
                    eprintln!("{}", line.lines().next().unwrap_or("invalid arguments"));
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let drawn = rand::rng().random();
        eprintln!("seed drawn from OS entropy: {drawn} (pass --seed {drawn} to reproduce)");
        drawn
    })
}

/// Deterministic filler message: fills the whole encoding capacity from a
/// dedicated stream of the master seed.
fn random_message(capacity: usize, seed: u64) -> Bits {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_MESSAGE);
    Bits::random(capacity, &mut rng)
}

fn build_params(flags: &SessionFlags, message: Bits, seed: u64) -> Result<ProtocolParams> {
    let params = ProtocolParams {
        n_pairs: flags.pairs,
        hadamard_fraction: flags.hadamard_fraction,
        check_fraction: flags.check_fraction,
        abort_threshold: flags.threshold,
        master_seed: seed,
        message,
    };
    params.validate()?;
    Ok(params)
}

/// The concrete per-episode actions a session-level strategy can produce.
fn concrete_actions(model: &AttackModel) -> Vec<AttackAction> {
    match model {
        AttackModel::None => vec![AttackAction::None],
        AttackModel::InterceptResend { policy } => match policy {
            BasisPolicy::AlwaysZ => vec![AttackAction::from_kind("ir-z").unwrap()],
            BasisPolicy::AlwaysX => vec![AttackAction::from_kind("ir-x").unwrap()],
            BasisPolicy::UniformRandom => vec![
                AttackAction::from_kind("ir-z").unwrap(),
                AttackAction::from_kind("ir-x").unwrap(),
            ],
        },
        AttackModel::CollectiveCnot { pre_hadamard } => vec![AttackAction::CollectiveCnot {
            pre_hadamard: *pre_hadamard,
        }],
    }
}

fn tv_distances(model: &AttackModel, samples: usize, seed: u64) -> Result<BTreeMap<String, f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_ORACLE_SAMPLES);
    let mut map = BTreeMap::new();
    for action in concrete_actions(model) {
        for alice_bit in 0..2u8 {
            for hadamard in [false, true] {
                let tv = oracle_vs_monte_carlo(alice_bit, hadamard, action, samples, &mut rng)?;
                map.insert(cell_label(alice_bit, hadamard, action), tv);
            }
        }
    }
    Ok(map)
}

fn write_or_print(path: &Option<PathBuf>, contents: &str, label: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, contents).with_context(|| format!("writing {label} to {p:?}"))?;
            eprintln!("{label} written to {}", p.display());
        }
        None => println!("{contents}"),
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let seed = resolve_seed(args.session.seed);
    let message = match (&args.message_hex, &args.message_bits) {
        (Some(hex), _) => hex_to_bits(hex)?,
        (None, Some(bits)) => bits.parse::<Bits>()?,
        (None, None) => {
            // No message given: fill the encoding capacity with seeded
            // random bits so throughput and delivery are still exercised.
            let tentative = build_params(&args.session, Bits::empty(), seed)?;
            random_message(tentative.message_capacity(), seed)
        }
    };
    let params = build_params(&args.session, message, seed)?;
    let attack = args.session.attack.to_model();

    let started = Instant::now();
    let result = run_session(&params, &attack, args.session.attack_probability)?;
    let elapsed = started.elapsed().as_secs_f64();
    let episodes_per_second = params.n_pairs as f64 / elapsed.max(1e-9);

    let mut report = build_report(
        &params,
        &attack,
        args.session.attack_probability,
        &result,
        episodes_per_second,
    )?;
    if let Some(samples) = args.samples {
        report.oracle_tv_distances = tv_distances(&attack, samples, seed)?;
    }

    let doc = ReportDocument {
        report: ReportDoc::from_report(&report),
        meta: MetaDoc::now(Some(episodes_per_second)),
    };
    write_or_print(&args.report, &serde_json::to_string_pretty(&doc)?, "report")?;

    if let Some(path) = &args.transcript {
        let mut lines = transcript_lines(&result.transcript).join("\n");
        lines.push('\n');
        fs::write(path, lines).with_context(|| format!("writing transcript to {path:?}"))?;
        eprintln!("transcript written to {}", path.display());
    }

    if result.aborted {
        eprintln!(
            "aborted: check error rate {:.4} exceeded threshold {}",
            result.check_error_rate, params.abort_threshold
        );
        Ok(EXIT_ABORTED)
    } else {
        if let Some(recovered) = &result.recovered_message {
            eprintln!(
                "delivered {} message bits (hex {})",
                recovered.len(),
                bits_to_hex(recovered)
            );
        }
        Ok(EXIT_DELIVERED)
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<i32> {
    if args.attack == AttackKind::IrRandom {
        bail!("ir-random is a session policy; pick ir-z or ir-x for a single oracle cell");
    }
    let action =
        AttackAction::from_kind(args.attack.to_model().kind()).map_err(|e| anyhow!("{e}"))?;
    let bits: &[u8] = match args.alice_bit {
        BitChoice::Zero => &[0],
        BitChoice::One => &[1],
        BitChoice::Both => &[0, 1],
    };
    let flags: &[bool] = match args.hadamard {
        HadamardChoice::Off => &[false],
        HadamardChoice::On => &[true],
        HadamardChoice::Both => &[false, true],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(STREAM_ORACLE_SAMPLES);
    let mut cells = Vec::new();
    for &alice_bit in bits {
        for &hadamard in flags {
            let exact = exact_episode_distribution(alice_bit, hadamard, action)?;
            let tv = match args.samples {
                Some(samples) => Some(oracle_vs_monte_carlo(
                    alice_bit, hadamard, action, samples, &mut rng,
                )?),
                None => None,
            };
            cells.push(OracleCellDoc {
                attack: action.kind().to_string(),
                alice_bit,
                hadamard,
                variables: exact.variables.iter().map(|v| v.to_string()).collect(),
                table: exact.table(),
                exact_check_error_rate: exact.check_error_rate(),
                samples: args.samples,
                tv_distance: tv,
            });
        }
    }

    let doc = OracleDocument {
        cells,
        meta: MetaDoc::now(None),
    };
    write_or_print(
        &args.report,
        &serde_json::to_string_pretty(&doc)?,
        "oracle tables",
    )?;
    Ok(EXIT_DELIVERED)
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let grid: Vec<f64> = args
        .grid
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid grid value {s:?}"))
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        bail!("grid is empty");
    }
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        bail!("grid values must lie in [0, 1]");
    }

    let base_seed = resolve_seed(args.session.seed);
    let attack = args.session.attack.to_model();
    let mut reports = Vec::with_capacity(grid.len());
    for (i, &probability) in grid.iter().enumerate() {
        let seed = base_seed.wrapping_add(i as u64);
        let tentative = build_params(&args.session, Bits::empty(), seed)?;
        let message = random_message(tentative.message_capacity(), seed);
        let params = build_params(&args.session, message, seed)?;

        let started = Instant::now();
        let result = run_session(&params, &attack, probability)?;
        let elapsed = started.elapsed().as_secs_f64();
        let report = build_report(
            &params,
            &attack,
            probability,
            &result,
            params.n_pairs as f64 / elapsed.max(1e-9),
        )?;
        reports.push(ReportDoc::from_report(&report));
    }

    let doc = SweepDocument {
        grid,
        reports,
        meta: MetaDoc::now(None),
    };
    write_or_print(&args.report, &serde_json::to_string_pretty(&doc)?, "sweep")?;
    Ok(EXIT_DELIVERED)
}
