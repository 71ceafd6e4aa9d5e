use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hagv_sim::{builtin, energy_report, run_all, run_scenario, write_csv, Scenario, BUILTIN};
use hagv_teleop::{Server, ServerConfig, DEFAULT_PORT, PORT_ENV};

#[derive(Parser)]
#[command(
    name = "hagv",
    version,
    about = "Hybrid aerial-ground vehicle simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a built-in scenario by name, and write telemetry CSV.
    Run {
        scenario: String,
        /// Telemetry output path. Defaults to `<scenario name>.csv`; `-` writes to stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Print the per-mode energy report.
        #[arg(long)]
        report: bool,
    },
    /// Run the acceptance checks.
    Verify,
    /// List the built-in scenarios.
    List,
    /// Print the default vehicle parameters and gains as TOML.
    Config,
    /// Serve the teleoperation bridge over WebSocket.
    Serve {
        #[arg(long, short, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Bind address.
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            report,
        } => run(&scenario, out, report),
        Command::Verify => verify(),
        Command::List => {
            for (name, _) in BUILTIN {
                println!("{name}");
            }
            Ok(())
        }
        Command::Config => toml::to_string(&hagv_core::Config::default())
            .map(|text| print!("{text}"))
            .map_err(|e| e.to_string()),
        Command::Serve { port, host } => serve(port, host),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hagv: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load(arg: &str) -> Result<Scenario, String> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        return Scenario::from_toml_str(&text).map_err(|e| format!("{}: {e}", path.display()));
    }
    if BUILTIN.iter().any(|(n, _)| *n == arg) {
        return builtin(arg).map_err(|e| e.to_string());
    }
    Err(format!("{arg}: no such file or built-in scenario"))
}

fn run(arg: &str, out: Option<PathBuf>, report: bool) -> Result<(), String> {
    let sc = load(arg)?;
    let log = run_scenario(&sc).map_err(|e| e.to_string())?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", sc.name)));
    let to_stdout = out.as_os_str() == "-";
    let written = if to_stdout {
        write_csv(io::stdout().lock(), &log.records, &log.params)
    } else {
        let file = File::create(&out).map_err(|e| format!("{}: {e}", out.display()))?;
        write_csv(BufWriter::new(file), &log.records, &log.params)
    };
    written.map_err(|e| format!("{}: {e}", out.display()))?;
    // Keep stdout clean for CSV when it carries the telemetry.
    let mut info: Box<dyn Write> = if to_stdout {
        Box::new(io::stderr())
    } else {
        Box::new(io::stdout())
    };
    let last = log.records.last().map_or(0.0, |r| r.t);
    if !to_stdout {
        let _ = writeln!(
            info,
            "{}: {} records to {:.3} s, written to {}",
            sc.name,
            log.records.len(),
            last,
            out.display()
        );
    }
    if report {
        let _ = writeln!(info, "{}", energy_report(&log.records));
    }
    match log.error {
        Some(e) => Err(format!("{}: run stopped early: {e}", sc.name)),
        None => Ok(()),
    }
}

fn verify() -> Result<(), String> {
    let checks = run_all();
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<_> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(format!("failed: {}", failed.join(", ")))
    }
}

fn serve(port: u16, host: String) -> Result<(), String> {
    let server = Server::start(ServerConfig {
        port,
        host,
        ..ServerConfig::default()
    })
    .map_err(|e| format!("cannot start server: {e}"))?;
    println!("teleop bridge on {}", server.url());
    server.wait();
    Ok(())
}
