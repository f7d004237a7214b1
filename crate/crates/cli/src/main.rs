use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vll_cli::{execute, report, tools, CliError, Mode, RunConfig, EXIT_ERROR, EXIT_FAIL};

#[derive(Parser)]
#[command(name = "vll", version, about = "Vanishing-viscosity experiments on the 2-D torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve every viscosity in the config and tabulate certificates.
    Run { config: PathBuf },
    /// `run` plus trend tests, fitted-constant drift and the rate certificate.
    Sweep { config: PathBuf },
    /// Certificates of stored snapshots of one run.
    Diagnose {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        delta: f64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form example fields.
    Gallery {
        #[command(subcommand)]
        action: GalleryCommand,
    },
    /// Pass/fail matrix of an output directory or table CSV.
    Report { path: PathBuf },
}

#[derive(Subcommand)]
enum GalleryCommand {
    List,
    Emit {
        name: String,
        #[arg(allow_negative_numbers = true)]
        params: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
}

fn experiment(path: &PathBuf, mode: Mode) -> Result<i32, CliError> {
    let cfg = RunConfig::load(path)?;
    let dir = cfg.output.dir.clone();
    let rep = execute(&cfg, mode, Some(&dir))?;
    let rendered = report::render(&dir)?;
    print!("{}", rendered.text);
    println!("wrote {}", dir.display());
    Ok(rep.exit_code())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config } => experiment(&config, Mode::Run),
        Command::Sweep { config } => experiment(&config, Mode::Sweep),
        Command::Diagnose { snapshots, ell, delta, out } => {
            let table = tools::diagnose(&snapshots, ell, delta)?;
            match out {
                Some(p) => table.write_csv(std::fs::File::create(p)?)?,
                None => table.write_csv(std::io::stdout().lock())?,
            }
            let failed = table.rows.iter().flat_map(|r| &r.certificates).any(|c| c.constant_free && !c.pass);
            Ok(if failed { EXIT_FAIL } else { 0 })
        }
        Command::Gallery { action: GalleryCommand::List } => {
            print!("{}", tools::gallery_list());
            Ok(0)
        }
        Command::Gallery { action: GalleryCommand::Emit { name, params, out, n } } => {
            let item = tools::gallery_emit(&name, &params, &out, n)?;
            let mut so = std::io::stdout().lock();
            for f in &item.facts {
                let mark = if f.pass { "ok" } else if f.attainable { "FAIL" } else { "n/a" };
                writeln!(so, "{mark:>4}  {:<32} measured {:.6e}  expected {:.6e}", f.quantity, f.measured, f.expected)?;
            }
            Ok(if item.violations().is_empty() { 0 } else { EXIT_FAIL })
        }
        Command::Report { path } => {
            let r = report::render(&path)?;
            print!("{}", r.text);
            Ok(r.exit_code())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
