use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use vibrogrid_cli::commands::{self, AnalyzeFailure, EXIT_INCOMPLETE};
use vibrogrid_cli::server::{router, AppState};
use vibrogrid_core::device::{mock_device, open_serial, Clock, Device, MonotonicClock};

#[derive(Parser)]
#[command(
    name = "vibrogrid",
    version,
    about = "Vibrotactile target encoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Serial port path, or `mock` for a recording stand-in.
        #[arg(long, default_value = "mock")]
        device: String,
        /// Directory for per-participant trial logs.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
    /// Generate counterbalanced session plans.
    Plan {
        #[arg(long, default_value_t = 12)]
        participants: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Allow a cohort that is not a multiple of 12.
        #[arg(long)]
        pad: bool,
    },
    /// Run plans through a simulated participant.
    Simulate {
        #[arg(long)]
        plans: PathBuf,
        /// Noise profile JSON.
        #[arg(long)]
        noise: PathBuf,
        /// Encoding parameters JSON; defaults when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summaries and hypothesis tests over a trial log.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        /// Results JSON; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cell summary CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        allow_incomplete: bool,
    },
}

fn open_device(spec: &str, clock: Arc<dyn Clock>) -> Result<Box<dyn Device>> {
    if spec == "mock" {
        return Ok(Box::new(mock_device(clock)));
    }
    Ok(Box::new(
        open_serial(spec).with_context(|| format!("opening serial port {spec}"))?,
    ))
}

async fn serve(port: u16, bind: String, device: String, log_dir: Option<PathBuf>) -> Result<()> {
    let clock: Arc<dyn Clock> = Arc::new(MonotonicClock::new());
    let dev = open_device(&device, clock.clone())?;
    let mut state = AppState::new(dev, clock);
    if let Some(dir) = log_dir {
        state = state.with_log_dir(dir);
    }
    let addr: SocketAddr = format!("{bind}:{port}").parse().context("bind address")?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve {
            port,
            bind,
            device,
            log_dir,
        } => tokio::runtime::Runtime::new()
            .context("starting runtime")
            .and_then(|rt| rt.block_on(serve(port, bind, device, log_dir))),
        Command::Plan {
            participants,
            seed,
            out,
            pad,
        } => commands::plan(participants, seed, pad, &out).map(|plans| {
            let trials: usize = plans.iter().map(|p| p.trial_count()).sum();
            log::info!(
                "{} plans, {trials} trials -> {}",
                plans.len(),
                out.display()
            );
        }),
        Command::Simulate {
            plans,
            noise,
            params,
            out,
        } => commands::simulate(&plans, &noise, params.as_deref(), &out)
            .map(|t| log::info!("{} trials -> {}", t.len(), out.display())),
        Command::Analyze {
            input,
            out,
            csv,
            allow_incomplete,
        } => {
            match commands::analyze_log(&input, out.as_deref(), csv.as_deref(), allow_incomplete) {
                Ok(_) => Ok(()),
                Err(AnalyzeFailure::Incomplete(m)) => {
                    eprintln!("error: incomplete design: {m} (pass --allow-incomplete to analyse what is complete)");
                    std::process::exit(EXIT_INCOMPLETE);
                }
                Err(AnalyzeFailure::Other(e)) => Err(e),
            }
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
