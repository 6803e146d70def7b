use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use livetl::cli::{self, CliError, GateSpec, GeneratorSpec, Overrides, RunManifest};
use livetl::generators::{BridgeConfig, BurstGateConfig, OracleConfig};
use livetl::stub_peer::{self, ServeEnd, StubBehavior};
use livetl::{ContextSource, MatchMode, TokenizerMode, Variant};

#[derive(Parser)]
#[command(
    name = "livetl",
    version,
    about = "Live commentary generation and evaluation from tweet streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate matches; print one JSON summary per match.
    Ingest(Common),
    /// Generate a timeline for every accepted match.
    Run(RunArgs),
    /// Aligned n-gram precision, recall and F1.
    Eval(EvalArgs),
    /// Key-event detection scores.
    Events(EventsArgs),
    /// Serve the bridge protocol with a canned behavior.
    #[command(hide = true)]
    StubPeer {
        #[arg(long, value_enum, default_value = "echo-first-tweet")]
        behavior: StubBehavior,
        /// Listen on this TCP address instead of stdio.
        #[arg(long)]
        listen: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Run manifest or single match manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Tweet-volume threshold; matches with at most this many tweets are dropped.
    #[arg(long)]
    min_tweets: Option<usize>,
    /// Worker threads for per-match work.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    Echo,
    Oracle,
    Bridge,
}

#[derive(Clone, Copy, ValueEnum)]
enum GateKind {
    Reference,
    Burst,
    Bridge,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// base, clf, cxt or clf_cxt.
    #[arg(long, value_parser = parse_serde::<Variant>)]
    variant: Option<Variant>,
    /// Minutes of tweets after the target minute included in a request.
    #[arg(long)]
    lookahead: Option<u32>,
    /// Minutes of earlier updates passed as context.
    #[arg(long)]
    lookback: Option<u32>,
    /// generated or reference.
    #[arg(long, value_parser = parse_serde::<ContextSource>)]
    context_source: Option<ContextSource>,
    #[arg(long, value_enum)]
    generator: Option<GeneratorKind>,
    #[arg(long, value_enum)]
    gate: Option<GateKind>,
    /// Bridge peer command line, split on whitespace.
    #[arg(long, conflicts_with = "bridge_addr")]
    bridge_cmd: Option<String>,
    /// Bridge peer TCP address.
    #[arg(long)]
    bridge_addr: Option<String>,
    /// Per-request bridge timeout.
    #[arg(long)]
    bridge_timeout_ms: Option<u64>,
    /// Directory for generated timelines and provenance.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    /// Directory of generated timelines; defaults to the manifest's `out`.
    #[arg(long)]
    gen: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    score: ScoreArgs,
    /// char or word.
    #[arg(long, value_parser = parse_serde::<TokenizerMode>)]
    tokenizer: Option<TokenizerMode>,
    /// n-gram order.
    #[arg(long)]
    ngram: Option<usize>,
}

#[derive(Args)]
struct EventsArgs {
    #[command(flatten)]
    score: ScoreArgs,
    /// Event pattern file; built-in patterns when omitted.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Which table to print; the JSON report always has both.
    #[arg(long, value_parser = parse_serde::<MatchMode>, default_value = "lenient")]
    mode: MatchMode,
    /// Matching window in minutes.
    #[arg(long)]
    window: Option<i64>,
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    let s = s.trim().to_ascii_lowercase().replace(['+', '-'], "_");
    serde_json::from_value(serde_json::Value::String(s)).map_err(|e| e.to_string())
}

fn load(common: &Common, overrides: Overrides) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::load(&common.manifest)?;
    Overrides {
        min_tweets: common.min_tweets,
        jobs: common.jobs,
        ..overrides
    }
    .apply(&mut m);
    Ok(m)
}

fn bridge_config(
    args: &RunArgs,
    existing: Option<&BridgeConfig>,
) -> Result<BridgeConfig, CliError> {
    let mut cfg = match (&args.bridge_cmd, &args.bridge_addr, existing) {
        (Some(cmd), _, _) => BridgeConfig::subprocess(cmd.split_whitespace()),
        (_, Some(addr), _) => BridgeConfig::tcp(addr.clone()),
        (_, _, Some(cfg)) => cfg.clone(),
        _ => {
            return Err(CliError::Usage(
                "bridge needs --bridge-cmd or --bridge-addr".into(),
            ))
        }
    };
    if let Some(ms) = args.bridge_timeout_ms {
        cfg = cfg.with_timeout_ms(ms);
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let mut m = load(&args.common, Overrides::default())?;
    let existing_bridge = match &m.generator {
        GeneratorSpec::Bridge { bridge } => Some(bridge.clone()),
        _ => None,
    };
    let bridge_flags =
        args.bridge_cmd.is_some() || args.bridge_addr.is_some() || args.bridge_timeout_ms.is_some();
    let generator = match args.generator {
        Some(GeneratorKind::Echo) => Some(GeneratorSpec::Echo),
        Some(GeneratorKind::Oracle) => Some(GeneratorSpec::Oracle {
            oracle: OracleConfig::default(),
        }),
        Some(GeneratorKind::Bridge) => Some(GeneratorSpec::Bridge {
            bridge: bridge_config(&args, existing_bridge.as_ref())?,
        }),
        None if bridge_flags && existing_bridge.is_some() => Some(GeneratorSpec::Bridge {
            bridge: bridge_config(&args, existing_bridge.as_ref())?,
        }),
        None => None,
    };
    let gate = match args.gate {
        Some(GateKind::Reference) => Some(GateSpec::Reference),
        Some(GateKind::Burst) => Some(GateSpec::Burst {
            burst: BurstGateConfig::default(),
        }),
        Some(GateKind::Bridge) => Some(GateSpec::Bridge {
            bridge: bridge_config(&args, existing_bridge.as_ref())?,
        }),
        None => None,
    };
    Overrides {
        variant: args.variant,
        lookahead: args.lookahead,
        lookback: args.lookback,
        context_source: args.context_source,
        generator,
        gate,
        out: args.out.clone(),
        ..Default::default()
    }
    .apply(&mut m);
    let summary = cli::cmd_run(&m)?;
    let mut stdout = io::stdout().lock();
    writeln!(
        stdout,
        "{}",
        serde_json::to_string(&summary).expect("summary serializes")
    )
    .map_err(|e| CliError::Io {
        path: "<stdout>".into(),
        source: e,
    })
}

fn gen_dir(score: &ScoreArgs, m: &RunManifest) -> Result<PathBuf, CliError> {
    match &score.gen {
        Some(p) => Ok(p.clone()),
        None => cli::default_gen_dir(m),
    }
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    let m = load(
        &args.score.common,
        Overrides {
            tokenizer: args.tokenizer,
            ngram: args.ngram,
            ..Default::default()
        },
    )?;
    let gen = gen_dir(&args.score, &m)?;
    cli::cmd_eval(
        &m,
        &gen,
        args.score.out.as_deref(),
        &mut io::stdout().lock(),
    )
    .map(drop)
}

fn events(args: EventsArgs) -> Result<(), CliError> {
    let mut m = load(
        &args.score.common,
        Overrides {
            patterns: args.patterns,
            ..Default::default()
        },
    )?;
    if args.window.is_some() {
        m.event_window = args.window;
    }
    let gen = gen_dir(&args.score, &m)?;
    cli::cmd_events(
        &m,
        &gen,
        args.mode,
        args.score.out.as_deref(),
        &mut io::stdout().lock(),
    )
    .map(drop)
}

fn stub_peer(behavior: StubBehavior, listen: Option<&str>) -> io::Result<ServeEnd> {
    match listen {
        Some(addr) => stub_peer::serve_tcp(behavior, addr, |bound| {
            println!("{bound}");
            let _ = io::stdout().flush();
        }),
        None => stub_peer::serve(behavior, io::stdin().lock(), io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LIVETL_LOG", "warn")).init();
    let result = match Cli::parse().command {
        Command::Ingest(common) => load(&common, Overrides::default())
            .and_then(|m| cli::cmd_ingest(&m, &mut io::stdout().lock()).map(drop)),
        Command::Run(args) => run(args),
        Command::Eval(args) => eval(args),
        Command::Events(args) => events(args),
        Command::StubPeer { behavior, listen } => {
            return match stub_peer(behavior, listen.as_deref()) {
                Ok(ServeEnd::Eof) => ExitCode::SUCCESS,
                Ok(ServeEnd::Exit(code)) => ExitCode::from(code as u8),
                Err(e) => {
                    eprintln!("livetl: {e}");
                    ExitCode::from(cli::EXIT_USAGE as u8)
                }
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("livetl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
