use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod commands;
mod settings;

use settings::{parse_profile, RunConfig};
use vcluster::energy::EnergyProfile;
use vcluster::kernels::KernelKind;

/// Cycle-level simulator and energy model of a shared-L1 vector cluster.
#[derive(Debug, Parser)]
#[command(name = "vcluster", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Cluster parameters shared by every subcommand.
#[derive(Debug, Args)]
struct MachineFlags {
    /// `key = value` settings file, applied before the flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Processing elements.
    #[arg(long)]
    pes: Option<usize>,
    /// FPUs per PE.
    #[arg(long)]
    fpus: Option<usize>,
    /// Vector register width in bytes.
    #[arg(long)]
    vlen: Option<usize>,
    /// 64-bit VLSU ports per PE.
    #[arg(long)]
    vlsu_ports: Option<usize>,
    /// L1 banks.
    #[arg(long)]
    banks: Option<usize>,
    /// FPU energy figure: `model` or `measured`.
    #[arg(long, value_parser = parse_profile)]
    profile: Option<EnergyProfile>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one kernel on the timed model, check it and print the report.
    Simulate {
        #[command(flatten)]
        machine: MachineFlags,
        /// matmul, wid-matmul16, wid-matmul8, conv2d, dotp or fft.
        #[arg(long)]
        kernel: Option<KernelKind>,
        /// Problem dimension.
        #[arg(long)]
        n: Option<usize>,
        /// Seed of the input data.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV file with one report row.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Event trace as CSV.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Energy efficiency as a function of the vector length.
    EnergySweep {
        #[command(flatten)]
        machine: MachineFlags,
        /// Smallest vector length in bytes.
        #[arg(long, default_value_t = 8)]
        from: usize,
        /// Largest vector length in bytes.
        #[arg(long, default_value_t = 256)]
        to: usize,
        /// Matrix dimension of the modelled matmul.
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Write the curve here instead of standard output.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Most energy-efficient vector length, dense and restricted to powers of two.
    Optimize {
        #[command(flatten)]
        machine: MachineFlags,
        #[arg(long, default_value_t = 8)]
        from: usize,
        #[arg(long, default_value_t = 256)]
        to: usize,
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Least-squares fit of SCM access-energy coefficients.
    Fit {
        /// CSV rows `width,capacity,energy_fj`, optionally preceded by a `read`/`write` column.
        samples: PathBuf,
    },
    /// Run kernels against their oracles; exits nonzero on any mismatch.
    Validate {
        #[command(flatten)]
        machine: MachineFlags,
        /// Only this kernel; all kernels otherwise.
        #[arg(long)]
        kernel: Option<KernelKind>,
        /// Only this size; a small and a full-scale size otherwise.
        #[arg(long)]
        n: Option<usize>,
    },
}

impl MachineFlags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut rc = RunConfig::default();
        if let Some(path) = &self.config {
            rc.apply_file(path)?;
        }
        let m = &mut rc.machine;
        if let Some(v) = self.pes {
            m.pes = v;
        }
        if let Some(v) = self.fpus {
            m.fpus = v;
        }
        if let Some(v) = self.vlen {
            m.vlen_bytes = v;
        }
        if let Some(v) = self.vlsu_ports {
            m.vlsu_ports = v;
        }
        if let Some(v) = self.banks {
            m.l1_banks = v;
        }
        if let Some(v) = self.profile {
            rc.profile = v;
        }
        rc.machine.validate()?;
        Ok(rc)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            machine,
            kernel,
            n,
            seed,
            csv,
            trace,
        } => {
            let mut rc = machine.resolve()?;
            rc.kernel = kernel.unwrap_or(rc.kernel);
            rc.n = n.unwrap_or(rc.n);
            rc.seed = seed.unwrap_or(rc.seed);
            commands::simulate(&rc, csv.as_deref(), trace.as_deref())
        }
        Command::EnergySweep {
            machine,
            from,
            to,
            n,
            csv,
        } => commands::energy_sweep(&machine.resolve()?, from..=to, n, csv.as_deref()).map(|()| true),
        Command::Optimize { machine, from, to, n } => {
            commands::optimize(&machine.resolve()?, from..=to, n).map(|()| true)
        }
        Command::Fit { samples } => commands::fit(&samples).map(|()| true),
        Command::Validate { machine, kernel, n } => commands::validate(&machine.resolve()?, kernel, n),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
