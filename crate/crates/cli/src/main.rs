//! Command-line front end: run any cataloged protocol with explicit seeds,
//! store and verify transcript logs, and measure empirical rates.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use twoparty::catalog::{
    all_specs, run_configured, verify_transcript_text, CatalogError, RunConfig, RunOutput,
    VerifyError,
};
use twoparty::session::{write_log, InProcTransport, LoopbackTransport, SessionError};
use twoparty::stats::success_rate;

/// Clean completion.
const EXIT_OK: u8 = 0;
/// Usage error: unknown protocol or bad parameters.
const EXIT_USAGE: u8 = 2;
/// A verification step failed (session abort or transcript check).
const EXIT_CHECK: u8 = 3;
/// Framing, transport, or log-integrity failure.
const EXIT_FRAMING: u8 = 4;

#[derive(Parser)]
#[command(name = "twoparty", version, about = "two-party protocol runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one session and write its transcript log.
    Run(RunArgs),
    /// Run many sessions over fresh seed pairs and report empirical rates.
    Stats(StatsArgs),
    /// Replay the verification steps of a stored transcript log.
    VerifyTranscript {
        /// Path to a transcript log.
        path: PathBuf,
    },
    /// List every shipped protocol identifier.
    Catalog,
}

#[derive(Args)]
struct ProtoArgs {
    /// Protocol identifier (see `catalog`).
    protocol: String,
    /// Modulus or field size in bits.
    #[arg(long, default_value_t = 32)]
    bits: u64,
    /// Graph order, string length, or comparison bit width.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Secret or mask width in bits.
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Round count (proof rounds, exchange rounds, signing-cycle budget).
    #[arg(long, default_value_t = 4)]
    m: u32,
    /// Stock size for the secret sale.
    #[arg(long, default_value_t = 3)]
    count: usize,
    /// Receiver's choice index where one applies.
    #[arg(long, default_value_t = 0)]
    choice: u64,
    #[arg(long, default_value_t = 5)]
    wealth_a: u64,
    #[arg(long, default_value_t = 3)]
    wealth_b: u64,
    /// A's bit-string input, e.g. 10101010.
    #[arg(long)]
    secret_a: Option<String>,
    /// B's bit-string input.
    #[arg(long)]
    secret_b: Option<String>,
}

impl ProtoArgs {
    fn to_config(&self, seed_a: u64, seed_b: u64) -> RunConfig {
        let mut cfg = RunConfig::new(&self.protocol, seed_a, seed_b);
        cfg.bits = self.bits;
        cfg.n = self.n;
        cfg.k = self.k;
        cfg.m = self.m;
        cfg.count = self.count;
        cfg.choice = self.choice;
        cfg.wealth_a = self.wealth_a;
        cfg.wealth_b = self.wealth_b;
        cfg.secret_a = self.secret_a.clone();
        cfg.secret_b = self.secret_b.clone();
        cfg
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum TransportKind {
    Inproc,
    Loopback,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    proto: ProtoArgs,
    /// A's randomness seed. Mandatory so every run is replayable.
    #[arg(long, required_unless_present = "seed_from_entropy")]
    seed_a: Option<u64>,
    /// B's randomness seed.
    #[arg(long, required_unless_present = "seed_from_entropy")]
    seed_b: Option<u64>,
    /// Draw both seeds from the operating system and print them.
    #[arg(long)]
    seed_from_entropy: bool,
    #[arg(long, value_enum, default_value_t = TransportKind::Inproc)]
    transport: TransportKind,
    /// Transcript output path; defaults to <protocol>-<seed_a>-<seed_b>.log.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    proto: ProtoArgs,
    /// Number of sessions, each over a fresh seed pair.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Base value the per-trial seed pairs are derived from.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Stats(args) => cmd_stats(args),
        Cmd::VerifyTranscript { path } => cmd_verify(&path),
        Cmd::Catalog => cmd_catalog(),
    };
    ExitCode::from(code)
}

fn catalog_exit(e: &CatalogError) -> u8 {
    match e {
        CatalogError::UnknownProtocol(_) | CatalogError::BadParameter(_) => EXIT_USAGE,
        CatalogError::Session(SessionError::Abort { .. }) => EXIT_CHECK,
        CatalogError::Session(_) => EXIT_FRAMING,
    }
}

fn cmd_run(args: RunArgs) -> u8 {
    let (seed_a, seed_b) = if args.seed_from_entropy {
        let (a, b) = (rand::random::<u64>(), rand::random::<u64>());
        println!("seed_a={a}");
        println!("seed_b={b}");
        (a, b)
    } else {
        (args.seed_a.expect("required by clap"), args.seed_b.expect("required by clap"))
    };
    let cfg = args.proto.to_config(seed_a, seed_b);

    let outcome = match args.transport {
        TransportKind::Inproc => {
            let mut t = InProcTransport::new();
            run_configured(&cfg, &mut t)
        }
        TransportKind::Loopback => match LoopbackTransport::new() {
            Ok(mut t) => run_configured(&cfg, &mut t),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_FRAMING;
            }
        },
    };
    let out = match outcome {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return catalog_exit(&e);
        }
    };

    let path = args.out.unwrap_or_else(|| {
        PathBuf::from(format!("{}-{}-{}.log", cfg.protocol, seed_a, seed_b))
    });
    if let Err(e) = std::fs::write(&path, write_log(&out.result.transcript)) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return EXIT_FRAMING;
    }
    println!("protocol={} seed_a={seed_a} seed_b={seed_b}", cfg.protocol);
    println!("a: {}", out.summary_a);
    println!("b: {}", out.summary_b);
    println!("transcript={}", path.display());
    EXIT_OK
}

/// The reported rate for each protocol: a key name and the per-run success
/// predicate behind it.
fn rate_metric(protocol: &str) -> Option<(&'static str, fn(&RunOutput) -> bool)> {
    let metric: (&'static str, fn(&RunOutput) -> bool) = match protocol {
        "rabin-ot" => ("success_rate", |o| o.summary_b.starts_with("outcome=factors")),
        "graph-ot" => ("obtained_rate", |o| o.summary_b.contains("isomorphism")),
        "composed-ot" => ("delivered_rate", |o| {
            o.summary_b.contains("delivered=isomorphism")
        }),
        "dlp-1of2-ot" | "graph-1of2-ot" | "secret-sale" => ("completion_rate", |_| true),
        "zkp-qrp" | "zkp-graph" | "zkp-qrp-cheat" | "zkp-graph-cheat" | "zkp-nonresidue" => {
            ("accept_rate", |o| o.summary_a.contains("accepted=true"))
        }
        "coin-flip-qrp" | "coin-flip-general" => {
            ("b_win_rate", |o| o.summary_a.contains("winner=B"))
        }
        "secret-exchange-graph" => ("both_obtained_rate", |o| {
            o.summary_a.contains("obtained") && o.summary_b.contains("obtained")
        }),
        "contract-sign" => ("signed_rate", |o| o.summary_a.contains("signed=true")),
        "tscp" | "byzantine-agreement" | "string-verification" => {
            ("equal_verdict_rate", |o| o.summary_a.contains("possibly-equal"))
        }
        "millionaires" => ("a_richer_rate", |o| o.summary_a.contains("a-richer")),
        _ => return None,
    };
    Some(metric)
}

fn cmd_stats(args: StatsArgs) -> u8 {
    if args.trials < 100 {
        eprintln!("error: at least 100 trials are needed for a meaningful rate");
        return EXIT_USAGE;
    }
    let Some((key, predicate)) = rate_metric(&args.proto.protocol) else {
        eprintln!("error: unknown protocol {:?}", args.proto.protocol);
        return EXIT_USAGE;
    };
    let base = args.seed_base;
    let cfg = args.proto.to_config(0, 0);

    // dry run so parameter errors surface before the batch
    {
        let mut probe = cfg.clone();
        probe.seed_a = base;
        probe.seed_b = base.wrapping_add(1);
        let mut t = InProcTransport::new();
        if let Err(e) = run_configured(&probe, &mut t) {
            eprintln!("error: {e}");
            return catalog_exit(&e);
        }
    }

    let est = success_rate(args.trials, |i| {
        let mut trial_cfg = cfg.clone();
        trial_cfg.seed_a = base.wrapping_add(2 * i);
        trial_cfg.seed_b = base.wrapping_add(2 * i + 1);
        let mut t = InProcTransport::new();
        match run_configured(&trial_cfg, &mut t) {
            Ok(out) => predicate(&out),
            Err(_) => false,
        }
    });

    println!("protocol={}", cfg.protocol);
    println!("trials={}", est.trials);
    println!("successes={}", est.successes);
    println!("{key}={:.6}", est.rate);
    println!("ci_low={:.6}", est.ci_low);
    println!("ci_high={:.6}", est.ci_high);
    println!();
    println!(
        "{} over {} sessions: {key} = {:.4}  (95% CI {:.4}..{:.4})",
        cfg.protocol, est.trials, est.rate, est.ci_low, est.ci_high
    );
    EXIT_OK
}

fn cmd_verify(path: &PathBuf) -> u8 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_FRAMING;
        }
    };
    match verify_transcript_text(&text) {
        Ok(()) => {
            println!("ok: every recorded check replays cleanly");
            EXIT_OK
        }
        Err(VerifyError::Log(e)) => {
            eprintln!("error: {e}");
            EXIT_FRAMING
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK
        }
    }
}

fn cmd_catalog() -> u8 {
    for spec in all_specs() {
        println!("{:24} {:48} stages: {}", spec.id, spec.name, spec.stages.join(", "));
    }
    EXIT_OK
}
