use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use latmag::config::{ConfigOverrides, SweepConfig};
use latmag::output::{self, OutputError};
use latmag::sweep::{lattice_hamiltonian, run_gradient_family, run_sweep_with, SweepTolerances};

/// Sweep the central field B0 and report quantum and position-measurement
/// Fisher information of the lattice ground state.
#[derive(Parser)]
#[command(name = "latmag", version)]
struct Cli {
    /// Flat `key = value` file supplying any flag; flags given here win
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    values: ConfigOverrides,
}

/// Points computed but at least one is not "ok".
const EXIT_POINT_FAILURE: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_POINT_FAILURE),
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let file = match &cli.config {
        Some(path) => ConfigOverrides::from_file(path)?,
        None => ConfigOverrides::default(),
    };
    let values = cli.values.or(file);
    let (gradients, config) = values.resolve();

    if gradients.len() > 1 {
        let family = run_gradient_family(&config, &gradients)?;
        if let Some(path) = &values.dump_matrix {
            let first = &family.members[0];
            dump_matrix(path, &first.config, first.records[0].b0)?;
        }
        for s in &family.skipped {
            log::warn!("m_x = {} skipped: {}", s.m_x, s.reason);
        }
        match &config.output_path {
            Some(base) => {
                for p in output::write_family(base, config.format, &family)? {
                    log::info!("wrote {}", p.display());
                }
            }
            None => output::write_summary(&family, io::stdout().lock())?,
        }
        return Ok(family.members.iter().all(|m| m.all_ok()));
    }

    if let Some(path) = &values.dump_matrix {
        dump_matrix(path, &config, config.grid()?[0])?;
    }
    let tol = SweepTolerances::for_config(&config);
    if let Some(path) = &config.output_path {
        output::mark_incomplete(path, config.format, &config, &tol)?;
    }
    let result = run_sweep_with(&config, &tol)?;
    match &config.output_path {
        Some(path) => {
            output::write_result(path, config.format, &result)?;
            log::info!("wrote {} records to {}", result.records.len(), path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            match config.format {
                latmag::OutputFormat::Csv => output::write_csv(&result, &mut out)?,
                latmag::OutputFormat::Json => {
                    output::write_json(&result, &output::Metadata::new(&result, true), &mut out)?
                }
            }
            out.flush().map_err(|source| OutputError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(result.all_ok())
}

fn dump_matrix(path: &Path, config: &SweepConfig, b0: f64) -> Result<(), Box<dyn std::error::Error>> {
    let h = lattice_hamiltonian(&config.lattice()?, b0, config.m_x)?;
    h.write_triplets(BufWriter::new(File::create(path)?))?;
    log::info!("wrote H(b0 = {b0}, m_x = {}) to {}", config.m_x, path.display());
    Ok(())
}
