use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use jmatrix_dirac::cli::run;
use jmatrix_dirac::config::RunConfig;

/// Dirac scattering amplitudes with the J-matrix method.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Configuration file (key = value lines); omit to use defaults.
    config: Option<PathBuf>,
    /// Output CSV; overrides `output` in the configuration. `-` for stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set basis.N=60`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn key_of(line: &str) -> Option<&str> {
    let content = line.split('#').next()?.trim();
    content.split_once('=').map(|(k, _)| k.trim())
}

fn load(args: &Args) -> jmatrix_dirac::Result<RunConfig> {
    let (text, base) = match &args.config {
        Some(p) => (
            std::fs::read_to_string(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (String::new(), PathBuf::from(".")),
    };
    let set_keys: Vec<&str> = args.overrides.iter().filter_map(|s| key_of(s)).collect();
    let mut merged: String = text
        .lines()
        .map(|l| match key_of(l) {
            Some(k) if set_keys.contains(&k) => "",
            _ => l,
        })
        .map(|l| format!("{l}\n"))
        .collect();
    for s in &args.overrides {
        merged.push_str(s);
        merged.push('\n');
    }
    RunConfig::parse(&merged, &base)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    if args.print_config {
        print!("{}", config.to_text());
        return ExitCode::SUCCESS;
    }
    let target = args.output.clone().or_else(|| config.output.clone());
    let mut out: Box<dyn Write> = match &target {
        Some(p) if p.as_os_str() != "-" => match File::create(p) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("cannot create {}: {e}", p.display());
                return ExitCode::from(1);
            }
        },
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let summary = run(&config, out.as_mut()).and_then(|s| {
        out.flush()?;
        Ok(s)
    });
    match summary {
        Ok(s) => {
            if s.failed > 0 {
                eprintln!("{} of {} points failed", s.failed, s.points);
            }
            if let Some(d) = s.max_deviation {
                eprintln!("max |T - T_oracle| = {d:.3e}");
            }
            for (n, w) in &s.plateau_widths {
                eprintln!("N = {n}: plateau width {w:.4}");
            }
            ExitCode::from(s.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
