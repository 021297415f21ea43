//! `waterbid`: run, replay and analyze water auction experiments, or host
//! live sessions.

mod plot;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use waterbid_core::agents::{bundled_personas, load_persona_dir, LlmSettings};
use waterbid_core::analysis::{aggregate, export};
use waterbid_core::engine::replay;
use waterbid_core::harness::{
    default_out_root, load_results, run_experiment, AgentKind, ExperimentSetting, RunOptions,
    StandardFactory, DEFAULT_LLM_PARALLELISM,
};
use waterbid_core::record::{read_jsonl, write_jsonl};
use waterbid_gateway::{DiskCache, Gateway, HttpTransport, Mode, ProviderConfig};

#[derive(Debug, Parser)]
#[command(name = "waterbid", version, about = "Sealed-bid water auction survival game")]
struct Cli {
    /// Log filter, e.g. `debug` or `waterbid_core=trace`.
    #[arg(long, global = true, default_value = "info")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run repeated games for one or more of the six standard settings.
    Run(RunArgs),
    /// Re-simulate recorded games from their bids and check they match.
    Replay(ReplayArgs),
    /// Compute survival, satisfaction and bid statistics from records.
    Analyze(AnalyzeArgs),
    /// Render SVG charts from an `analyze` plot-data file.
    Plot(PlotArgs),
    /// Host live sessions over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct GatewayArgs {
    /// `live`, `record` or `replay`.
    #[arg(long, default_value = "record")]
    gateway_mode: Mode,
    /// Response cache; defaults to `<out>/cache`.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Chat model name sent to the provider.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 0.7)]
    temperature: f64,
    #[arg(long, default_value_t = 1024)]
    max_tokens: u32,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Setting ids 1-6, comma separated, or `all`.
    #[arg(long, required = true, value_delimiter = ',')]
    setting: Vec<String>,
    #[arg(long, default_value_t = 10)]
    reps: u32,
    /// Base seed; repetition r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `llm`, `scripted:<strategy>` or `mixed:<seat>,<seat>,...`.
    #[arg(long, default_value = "llm")]
    agents: AgentKind,
    /// Output root; defaults to $WATERBID_OUT, then `runs`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent games; 0 picks a default for the agent kind.
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// Directory of persona files replacing the bundled ones.
    #[arg(long)]
    personas: Option<PathBuf>,
    #[command(flatten)]
    gateway: GatewayArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// JSON Lines file of game records.
    file: PathBuf,
    /// Also write the re-simulated records here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// A records file, a setting directory, or an output root.
    input: PathBuf,
    /// Report directory; defaults to `<input>/reports`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// `plot_data.json` written by `analyze`.
    input: PathBuf,
    /// Defaults to the input's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Seconds each bidding window stays open.
    #[arg(long, default_value_t = 120)]
    bid_window: u64,
    /// Seconds between an announcement and the next day.
    #[arg(long, default_value_t = 5)]
    announce_pause: u64,
    /// Append finished games to this JSON Lines file.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Enable LLM seats through the gateway.
    #[arg(long)]
    llm: bool,
    #[command(flatten)]
    gateway: GatewayArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::new(&cli.log))
        .with_writer(std::io::stderr)
        .init();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn parse_settings(raw: &[String]) -> Result<Vec<u32>> {
    if raw.iter().any(|s| s == "all") {
        return Ok((1..=6).collect());
    }
    let mut ids = Vec::new();
    for s in raw {
        let id: u32 = s.parse().with_context(|| format!("bad setting id `{s}`"))?;
        if !(1..=6).contains(&id) {
            bail!("setting ids run from 1 to 6, got {id}");
        }
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    Ok(ids)
}

fn build_gateway(args: &GatewayArgs, default_cache: &Path) -> Result<(Arc<Gateway>, LlmSettings)> {
    let provider = match args.gateway_mode {
        Mode::Replay => ProviderConfig::from_env().ok(),
        _ => Some(ProviderConfig::from_env().context("configuring the chat provider")?),
    };
    let model = args
        .model
        .clone()
        .or_else(|| provider.as_ref().and_then(|p| p.model.clone()));
    let transport = match provider {
        Some(p) => Some(Arc::new(HttpTransport::new(p)?) as _),
        None => None,
    };
    let cache = match args.gateway_mode {
        Mode::Live => None,
        _ => {
            let dir = args.cache_dir.clone().unwrap_or_else(|| default_cache.to_path_buf());
            Some(DiskCache::open(&dir).with_context(|| format!("opening cache {}", dir.display()))?)
        }
    };
    let gateway = Gateway::new(args.gateway_mode, cache, transport)?;
    let mut settings = LlmSettings {
        temperature: args.temperature,
        max_tokens: args.max_tokens,
        ..LlmSettings::default()
    };
    if let Some(m) = model {
        settings.model = m;
    }
    Ok((Arc::new(gateway), settings))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let ids = parse_settings(&args.setting)?;
    let out = args.out.clone().unwrap_or_else(default_out_root);
    let factory = if args.agents.uses_llm() {
        let (gw, llm) = build_gateway(&args.gateway, &out.join("cache"))?;
        StandardFactory::with_llm(gw, llm)
    } else {
        StandardFactory::scripted_only()
    };
    let personas = match &args.personas {
        Some(dir) => load_persona_dir(dir)?,
        None => bundled_personas(),
    };
    let parallelism = match (args.parallelism, args.agents.uses_llm()) {
        (0, true) => DEFAULT_LLM_PARALLELISM,
        (n, _) => n,
    };
    let options = RunOptions {
        parallelism,
        personas,
        ..RunOptions::default()
    };
    let mut failed = 0;
    for id in ids {
        let setting = ExperimentSetting::standard(id, args.reps, args.agents.clone(), args.seed)?;
        let outcome = run_experiment(&setting, &out, &factory, &options)
            .with_context(|| format!("setting {id}"))?;
        println!(
            "setting {id}: {} games in {} ({} already done, {} failed)",
            outcome.records.len(),
            outcome.dir.display(),
            outcome.resumed,
            outcome.failed.len()
        );
        for (rep, err) in &outcome.failed {
            eprintln!("  repetition {rep} failed: {err}");
        }
        failed += outcome.failed.len();
    }
    if failed > 0 {
        bail!("{failed} games failed; run the same command again to retry them");
    }
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let records = read_jsonl(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let mut replayed = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let again = replay(rec).with_context(|| format!("record {} does not replay", i + 1))?;
        if &again != rec {
            let day = rec
                .rounds
                .iter()
                .zip(&again.rounds)
                .find(|(a, b)| a != b)
                .map(|(a, _)| a.day);
            match day {
                Some(d) => bail!("record {} diverges on day {d}", i + 1),
                None => bail!("record {} diverges in its final state", i + 1),
            }
        }
        replayed.push(again);
    }
    if let Some(path) = &args.output {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_jsonl(std::io::BufWriter::new(file), &replayed)?;
    }
    println!("{} records replayed identically", records.len());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let (records, failed) = load_results(&args.input)?;
    if records.is_empty() {
        bail!("no game records under {}", args.input.display());
    }
    let summaries = aggregate(&records, &failed)?;
    let dir = args.out.unwrap_or_else(|| {
        if args.input.is_dir() {
            args.input.join("reports")
        } else {
            args.input.parent().unwrap_or(Path::new(".")).join("reports")
        }
    });
    let written = export::write_reports(&summaries, &dir)?;
    print!("{}", export::summary_table(&summaries));
    let excluded: u64 = failed.values().sum();
    if excluded > 0 {
        println!("{excluded} failed runs excluded");
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let data: serde_json::Value = serde_json::from_str(&text)?;
    let dir = args
        .out
        .unwrap_or_else(|| args.input.parent().unwrap_or(Path::new(".")).to_path_buf());
    std::fs::create_dir_all(&dir)?;
    let charts = plot::render_all(&data)?;
    for (name, svg) in charts {
        let path = dir.join(name);
        std::fs::write(&path, svg)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let mut state = waterbid_server::AppState::default().with_timing(waterbid_server::Timing {
        bid_window: Duration::from_secs(args.bid_window.max(1)),
        announce_pause: Duration::from_secs(args.announce_pause),
    });
    if let Some(path) = args.records {
        state = state.with_records_file(path);
    }
    if args.llm {
        let (gw, llm) = build_gateway(&args.gateway, &default_out_root().join("cache"))?;
        state = state.with_llm(gw, llm);
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(waterbid_server::serve(args.addr, state))?;
    Ok(())
}
