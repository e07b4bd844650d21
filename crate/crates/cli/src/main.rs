use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use alia_cli::commands::{self, RunArgs, EXIT_USAGE};
use alia_cli::server::{self, AppState, DEFAULT_MAX_CONCURRENT_RUNS};
use alia_cli::{load_profile_dir, load_sim_file, RunOptions};
use alia_core::executor::{DEFAULT_LOOP_CAP, DEFAULT_TIMEOUT_MS};
use alia_core::ClockMode;

#[derive(Parser)]
#[command(name = "alia", version, about = "Check, compile and run attack descriptions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print diagnostics for a script.
    Check {
        file: PathBuf,
        /// Check system variables against this profile.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Compile a script to its JSON command list.
    Compile {
        file: PathBuf,
        /// Tool-mapping catalog; the built-in catalog when omitted.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        pretty: bool,
    },
    /// Run a compiled script against the simulator.
    Run {
        script: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        sim: Option<PathBuf>,
        /// Write the report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the Time | Status | Debug message table.
        #[arg(long)]
        table: bool,
        /// Exit 0 even when entries FAILED.
        #[arg(long)]
        no_fail_on_failed: bool,
        #[arg(long, default_value = "simulated")]
        clock: ClockMode,
        #[arg(long, default_value_t = DEFAULT_LOOP_CAP)]
        loop_cap: u64,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_MS)]
        timeout_ms: u64,
    },
    /// Serve POST /execute over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, env = "ALIA_PROFILE_DIR")]
        profiles: PathBuf,
        #[arg(long)]
        sim: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_CONCURRENT_RUNS)]
        max_concurrent: usize,
    },
    /// Verify the corpus goldens, or rewrite them with --update.
    Corpus {
        #[arg(long, default_value = "corpus")]
        root: PathBuf,
        #[arg(long)]
        update: bool,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let mut err = io::stderr();
    let result = match &cli.command {
        Command::Check { file, profile } => commands::check_cmd(file, profile.as_deref(), &mut out),
        Command::Compile {
            file,
            mapping,
            output,
            pretty,
        } => commands::compile_cmd(
            file,
            mapping.as_deref(),
            output.as_deref(),
            *pretty,
            &mut out,
            &mut err,
        ),
        Command::Run {
            script,
            profile,
            sim,
            report,
            table,
            no_fail_on_failed,
            clock,
            loop_cap,
            timeout_ms,
        } => commands::run_cmd(
            &RunArgs {
                script,
                profile,
                sim: sim.as_deref(),
                report: report.as_deref(),
                table: *table,
                fail_on_failed: !no_fail_on_failed,
                options: RunOptions {
                    clock: *clock,
                    loop_cap: *loop_cap,
                    default_timeout_ms: *timeout_ms,
                },
            },
            &mut out,
            &mut err,
        ),
        Command::Serve {
            port,
            bind,
            profiles,
            sim,
            max_concurrent,
        } => serve(SocketAddr::new(*bind, *port), profiles, sim.as_deref(), *max_concurrent),
        Command::Corpus { root, update } => commands::corpus_cmd(root, *update, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn serve(
    addr: SocketAddr,
    profiles: &std::path::Path,
    sim: Option<&std::path::Path>,
    max_concurrent: usize,
) -> anyhow::Result<u8> {
    let state = AppState::new(load_profile_dir(profiles)?, load_sim_file(sim)?, max_concurrent);
    tokio::runtime::Runtime::new()?.block_on(server::serve(addr, state))?;
    Ok(0)
}
