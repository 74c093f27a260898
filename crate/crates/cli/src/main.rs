//! `qkdaudit`: key-rate audits, reconciliation simulations and guessing-probability
//! counterexamples for BB84-style key distribution, printed as JSON or CSV.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CliError, RateArg, RatesArgs};
use output::Format;
use qkdaudit::entropy_rates::{Qber, DEFAULT_F_FACTOR};
use qkdaudit::gf2::{BitWord, CodeSpec};
use qkdaudit::pipeline::{AttackModel, CodeChoice, EccMode, ProtocolConfig, SweepGrid, DEFAULT_CHECK_FRACTION};

#[derive(Parser, Debug)]
#[command(name = "qkdaudit", version, about = "Finite-key audits for BB84-style QKD")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "QKDAUDIT_FORMAT", default_value = "json")]
    format: Format,
    /// Significant digits for floating-point output (17 is lossless).
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Padded,
    Syndrome,
}

impl From<ModeArg> for EccMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Padded => EccMode::PaddedParity,
            ModeArg::Syndrome => EccMode::Syndrome,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AttackArg {
    Collective,
    Joint,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Raw bits sent before sifting.
    #[arg(long, default_value_t = 1 << 16)]
    raw_len: usize,
    /// Fraction of sifted bits disclosed for QBER estimation.
    #[arg(long, default_value_t = DEFAULT_CHECK_FRACTION)]
    check_fraction: f64,
    /// Finite-size correction added to the QBER in the min-entropy bound.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "collective")]
    attack: AttackArg,
}

impl RunArgs {
    fn config(&self, qber: f64, code: CodeChoice, mode: ModeArg) -> Result<ProtocolConfig, CliError> {
        let mut cfg =
            ProtocolConfig::new(self.raw_len, Qber::new(qber)?, code).with_mode(mode.into()).with_seed(self.seed);
        cfg.check_fraction = self.check_fraction;
        cfg.mu = self.mu;
        cfg.attack = match self.attack {
            AttackArg::Collective => AttackModel::Collective,
            AttackArg::Joint => AttackModel::Joint,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Largest QBER with a positive net key at a given code rate.
    Threshold {
        /// Code rate in (0, 1], or `shannon` for r = 1 - h(Q).
        #[arg(long, value_parser = commands::parse_rate)]
        rate: RateArg,
    },
    /// Leak, key length and net key over a QBER grid.
    Rates {
        #[arg(long, default_value_t = 10_000)]
        sifted_len: u64,
        #[arg(long, default_value_t = 0.0)]
        qber_start: f64,
        #[arg(long, default_value_t = 0.1)]
        qber_end: f64,
        #[arg(long, default_value_t = 0.005)]
        qber_step: f64,
        /// Code rate in (0, 1], or `shannon` for r = 1 - h(Q) at each row.
        #[arg(long, value_parser = commands::parse_rate, default_value = "shannon")]
        rate: RateArg,
        /// Reconciliation inefficiency factor.
        #[arg(long, default_value_t = DEFAULT_F_FACTOR)]
        f: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
    },
    /// Feasibility verdict for an (n_total, k_info) code at an operating QBER.
    AuditCode {
        /// Block length.
        #[arg(long)]
        n_total: usize,
        /// Information bits per block.
        #[arg(long)]
        k_info: usize,
        #[arg(long)]
        operating_qber: f64,
    },
    /// One seeded protocol run with a full key ledger.
    Simulate {
        #[arg(long)]
        qber: f64,
        /// `hamming74`, `repetitionN`, `identityN`, `random(n,k,seed)` or `ideal`.
        #[arg(long, value_parser = commands::parse_code_choice, default_value = "hamming74")]
        code: CodeChoice,
        #[arg(long, value_enum, default_value = "padded")]
        mode: ModeArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Grid of seeded protocol runs, one row each.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        qbers: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = commands::parse_code_choice, default_value = "hamming74,ideal")]
        codes: Vec<CodeChoice>,
        #[arg(long, value_delimiter = ',', value_enum, default_value = "padded")]
        modes: Vec<ModeArg>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Guessing probabilities when the decoding region is public.
    Counterexample {
        #[arg(long, value_parser = commands::parse_code_spec, default_value = "repetition3")]
        code: CodeSpec,
        /// Toeplitz seed bits; output length is `len - k_info + 1`. Identity if absent.
        #[arg(long, value_parser = commands::parse_bits)]
        toeplitz_seed: Option<BitWord>,
    },
    /// Optimal Markov-layer thresholds for an averaged bound `epsilon`.
    Markov {
        #[arg(long)]
        epsilon: f64,
        /// Two layers instead of one.
        #[arg(long)]
        double: bool,
    },
    /// Distance and guessing probability of the two-level skewed distribution.
    Distance {
        /// Alphabet size (even).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
    },
}

fn dispatch(command: &Command) -> commands::CmdResult {
    match command {
        Command::Threshold { rate } => commands::threshold(*rate),
        Command::Rates { sifted_len, qber_start, qber_end, qber_step, rate, f, mu } => commands::rates(&RatesArgs {
            sifted_len: *sifted_len,
            qber_start: *qber_start,
            qber_end: *qber_end,
            qber_step: *qber_step,
            rate: *rate,
            f: *f,
            mu: *mu,
        }),
        Command::AuditCode { n_total, k_info, operating_qber } => {
            commands::audit_code(*n_total, *k_info, *operating_qber)
        }
        Command::Simulate { qber, code, mode, run } => commands::simulate(&run.config(*qber, *code, *mode)?),
        Command::Sweep { qbers, codes, modes, run } => {
            let base = run.config(qbers[0], codes[0], modes[0])?;
            let grid = SweepGrid {
                base,
                qbers: qbers.iter().map(|&q| Qber::new(q)).collect::<Result<_, _>>()?,
                codes: codes.clone(),
                modes: modes.iter().map(|&m| m.into()).collect(),
            };
            commands::sweep_table(&grid)
        }
        Command::Counterexample { code, toeplitz_seed } => commands::counterexample(*code, toeplitz_seed.as_ref()),
        Command::Markov { epsilon, double } => commands::markov(*epsilon, *double),
        Command::Distance { n, epsilon } => commands::distance(*n, *epsilon),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let value = dispatch(&cli.command)?;
    let text = output::render(value, cli.format, cli.precision as usize).map_err(CliError::Io)?;
    output::emit(&text, cli.output.as_deref()).map_err(|e| CliError::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qkdaudit: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
