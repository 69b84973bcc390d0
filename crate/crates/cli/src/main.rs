mod play;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use aiaudit_client::{GameClient, ServiceClient};
use aiaudit_core::bots::Strategy;
use aiaudit_core::catalog::export::{export_print_sheets, StyleOptions};
use aiaudit_core::catalog::{load_catalog, validate, ValidationReport};
use aiaudit_core::engine::{format_digest, verify_record, GameRecord};
use aiaudit_core::sim::{self, emit_report, ReportFormat, SimPlan};
use aiaudit_core::{default_catalog, Catalog, GameConfig};
use aiaudit_server::ServerOptions;
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aiaudit", version, about = "Tools for the AI Audit card game")]
struct Cli {
    /// Catalog TOML to use instead of the built-in one.
    #[arg(long, global = true, env = "AIAUDIT_CATALOG", value_name = "FILE")]
    catalog: Option<PathBuf>,
    /// Run against a game server (http://HOST:PORT) instead of locally.
    #[arg(long, global = true, value_name = "URL")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a catalog and list its findings.
    Validate {
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write printable card sheets.
    Export {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Style options as TOML.
        #[arg(long, value_name = "FILE")]
        style: Option<PathBuf>,
    },
    /// Play many bot games and write a report.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Game config TOML. player_count follows the number of bots.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Report file; .csv selects CSV. Standard output when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the same seeds under two configs and report the differences.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "FILE")]
        config_a: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        config_b: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run the game server.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080", value_name = "HOST:PORT")]
        addr: String,
        /// Seconds before an unanswered ballot counts as a rejection.
        #[arg(long, default_value_t = 120)]
        vote_timeout: u64,
        /// Seconds of inactivity before a session closes.
        #[arg(long, default_value_t = 1800)]
        session_ttl: u64,
        /// Start games with the seed in the client's config.
        #[arg(long)]
        honor_client_seeds: bool,
    },
    /// Play in the terminal as seat 1 against bots.
    Play {
        /// Bot strategies for seats 2 and up.
        #[arg(long, value_name = "LIST")]
        bots: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        #[arg(long, default_value = "you")]
        name: String,
        /// Where to save the game record. Standard output when omitted.
        #[arg(long, value_name = "FILE")]
        record: Option<PathBuf>,
    },
    /// Replay a recorded game and check its digest.
    Replay {
        #[arg(long, value_name = "FILE")]
        log: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1000)]
    games: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated strategies, one per seat, e.g. random,mimic:approve=0.3
    #[arg(long, value_name = "LIST")]
    bots: String,
    /// Keep every strategy in the same seat for all games.
    #[arg(long)]
    no_rotate: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A failure that maps to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(text: impl Into<String>) -> anyhow::Error {
    Usage(text.into()).into()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?;
            eprintln!("wrote {}", p.display());
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn load(cli_catalog: Option<&Path>) -> Result<Catalog> {
    match cli_catalog {
        Some(p) => Ok(load_catalog(&read(p)?)?),
        None => Ok(default_catalog()),
    }
}

fn game_config(path: Option<&Path>) -> Result<GameConfig> {
    match path {
        Some(p) => toml::from_str(&read(p)?).with_context(|| format!("bad game config in {}", p.display())),
        None => Ok(GameConfig::default()),
    }
}

fn plan(run: &RunArgs, mut config: GameConfig) -> Result<SimPlan> {
    let lineup = Strategy::parse_list(&run.bots).map_err(|e| usage(e.to_string()))?;
    config.player_count = u8::try_from(lineup.len()).map_err(|_| usage("too many bots"))?;
    let mut plan = SimPlan::new(run.games, run.seed, config, lineup);
    plan.rotate_seats = !run.no_rotate;
    plan.validate().map_err(|e| usage(e.to_string()))?;
    Ok(plan)
}

fn print_findings(report: &ValidationReport) {
    for f in &report.errors {
        println!("error {f}");
    }
    for f in &report.warnings {
        println!("warning {f}");
    }
    eprintln!("{} errors, {} warnings", report.errors.len(), report.warnings.len());
}

fn ws_url(http: &str) -> String {
    let base = http.trim_end_matches('/');
    let base = base.replacen("https://", "wss://", 1).replacen("http://", "ws://", 1);
    format!("{base}/ws")
}

async fn run(cli: Cli) -> Result<ExitCode> {
    let remote = cli.server.as_deref().map(ServiceClient::new);
    if remote.is_some() && cli.catalog.is_some() && !matches!(cli.command, Command::Validate { .. }) {
        return Err(usage("--catalog only applies to validate when --server is given"));
    }
    match cli.command {
        Command::Validate { json } => {
            let report = match &remote {
                Some(api) => {
                    let text = match &cli.catalog {
                        Some(p) => read(p)?,
                        None => default_catalog().to_toml()?,
                    };
                    api.validate(&text).await?
                }
                None => validate(&load(cli.catalog.as_deref())?),
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print_findings(&report);
            }
            Ok(if report.is_playable() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Export { out, style } => {
            let style: StyleOptions = match style {
                Some(p) => toml::from_str(&read(&p)?).with_context(|| format!("bad style options in {}", p.display()))?,
                None => StyleOptions::default(),
            };
            let docs = export_print_sheets(&load(cli.catalog.as_deref())?, &style)?;
            for path in docs.write_to(&out)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { run, config, out, format } => {
            let plan = plan(&run, game_config(config.as_deref())?)?;
            let format = match (format, &out) {
                (Some(Format::Csv), _) => ReportFormat::Csv,
                (Some(Format::Json), _) => ReportFormat::Json,
                (None, Some(p)) => ReportFormat::from_path(p),
                (None, None) => ReportFormat::Json,
            };
            eprintln!("simulating {} games", plan.games);
            let text = match &remote {
                Some(api) => api.simulate(&plan, format == ReportFormat::Csv, None).await?,
                None => {
                    let catalog = Arc::new(load(cli.catalog.as_deref())?);
                    let report = tokio::task::spawn_blocking(move || sim::run(&plan, catalog)).await??;
                    emit_report(&report, format)
                }
            };
            write_output(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { run, config_a, config_b, out } => {
            let a = plan(&run, game_config(config_a.as_deref())?)?;
            let b = plan(&run, game_config(config_b.as_deref())?)?;
            eprintln!("comparing {} paired games", a.games);
            let text = match &remote {
                Some(api) => api.compare(&a, &b, None).await?,
                None => {
                    let catalog = Arc::new(load(cli.catalog.as_deref())?);
                    tokio::task::spawn_blocking(move || sim::compare(&a, &b, catalog)).await??.to_json()
                }
            };
            write_output(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { addr, vote_timeout, session_ttl, honor_client_seeds } => {
            let options = ServerOptions {
                vote_timeout: Duration::from_secs(vote_timeout),
                session_ttl: Duration::from_secs(session_ttl),
                honor_client_seeds,
                ..ServerOptions::default()
            }
            .with_catalog("default", load(cli.catalog.as_deref())?);
            let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("cannot bind {addr}"))?;
            eprintln!("listening on http://{}", listener.local_addr()?);
            aiaudit_server::serve(listener, options).await?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Play { bots, seed, config, name, record } => {
            let lineup = Strategy::parse_list(&bots).map_err(|e| usage(e.to_string()))?;
            let mut config = game_config(config.as_deref())?;
            config.player_count = u8::try_from(lineup.len() + 1).map_err(|_| usage("too many bots"))?;
            config.validate().map_err(|e| usage(e.to_string()))?;
            if let Some(s) = seed {
                config.seed = s;
            }
            let (embedded, url, catalog) = match &cli.server {
                Some(url) => {
                    let catalog = remote.as_ref().expect("remote").catalog("default").await?;
                    (None, ws_url(url), catalog)
                }
                None => {
                    let catalog = load(cli.catalog.as_deref())?;
                    let options = ServerOptions { honor_client_seeds: seed.is_some(), ..ServerOptions::default() }
                        .with_catalog("default", catalog.clone());
                    let server = aiaudit_server::spawn("127.0.0.1:0", options).await?;
                    let url = server.ws_url();
                    (Some(server), url, catalog)
                }
            };
            let mut client = GameClient::connect(&url).await?;
            client.set_timeout(Duration::from_secs(24 * 3600));
            client.hello(&name).await?;
            let game_id = client.create(config, "default", true).await?;
            for strategy in lineup {
                client.add_bot(&game_id, strategy).await?;
            }
            client.start(&game_id).await?;
            let mut input = tokio::io::BufReader::new(tokio::io::stdin());
            let mut screen = std::io::stderr();
            let log = play::play(&mut client, &game_id, &catalog, &mut input, &mut screen).await?;
            write_output(record.as_deref(), &log.to_toml()?)?;
            if let Some(server) = embedded {
                server.shutdown();
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { log } => {
            let record = GameRecord::from_toml(&read(&log)?)?;
            let digest = match &remote {
                Some(api) => api.replay(&record, None).await?.digest,
                None => {
                    let catalog = Arc::new(load(cli.catalog.as_deref())?);
                    format_digest(verify_record(&record, catalog)?.digest())
                }
            };
            eprintln!("replayed {} actions, digest matches", record.records.len());
            println!("{digest}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::Serve { .. }) {
        tracing_subscriber::fmt()
            .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
            .with_writer(std::io::stderr)
            .init();
    }
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(code) => code,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
