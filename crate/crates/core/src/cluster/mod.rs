//! Shared-L1 cluster: PEs stepped in lockstep around a banked scratchpad.
//!
//! Each cycle every PE advances one step and leaves at most one word request on each
//! of its ports. The arbiter then grants one request per bank; granted requests are
//! served by the SRAM and answered on the next cycle. Losers keep their request and
//! retry.

mod image;
mod spm;

use thiserror::Error;

pub use image::MemoryImage;
pub use spm::{BankAddress, L1Arbiter, Spm, SpmConfig};

use crate::config::MachineConfig;
use crate::isa::{Program, XReg};
use crate::sim::{Pe, SimError, SimOptions, SimReport, Trace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClusterError {
    #[error("address {addr:#x} is outside the {size}-byte L1")]
    OutOfRange { addr: u64, size: usize },
    #[error("word access at {addr:#x} is not 8-byte aligned")]
    Misaligned { addr: u64 },
    #[error("hex image line {line}: {detail}")]
    HexSyntax { line: usize, detail: String },
}

/// Result of a completed simulation.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub report: SimReport,
    /// Final L1 contents from address 0.
    pub memory: Vec<u8>,
    pub trace: Trace,
    /// Final integer registers of each PE.
    pub x: Vec<[u64; 32]>,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    cfg: MachineConfig,
    opts: SimOptions,
    pes: Vec<Pe>,
    spm: Spm,
    arbiter: L1Arbiter,
    /// Responses due next cycle: (pe, port, data), in grant order.
    due: Vec<(usize, usize, u64)>,
    cycle: u64,
    idle: u64,
    trace: Trace,
}

impl Cluster {
    pub fn new(program: &Program, cfg: &MachineConfig, opts: &SimOptions) -> Result<Self, SimError> {
        cfg.validate()?;
        program.validate(cfg)?;
        let spm = Spm::new(SpmConfig::new(cfg), &program.image).map_err(|_| {
            SimError::Program(crate::isa::ProgramError::ImageTooLarge {
                size: program.image.len(),
                capacity: cfg.l1_bytes(),
            })
        })?;
        let pes = (0..cfg.pes)
            .map(|i| Pe::new(i, cfg, program.code(i).to_vec(), opts.trace))
            .collect();
        Ok(Self {
            cfg: cfg.clone(),
            opts: opts.clone(),
            pes,
            spm,
            arbiter: L1Arbiter::new(cfg.l1_banks, cfg.pes * cfg.initiators_per_pe()),
            due: Vec::new(),
            cycle: 0,
            idle: 0,
            trace: Trace::new(opts.trace),
        })
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn pes(&self) -> &[Pe] {
        &self.pes
    }

    pub fn pes_mut(&mut self) -> &mut [Pe] {
        &mut self.pes
    }

    pub fn memory(&self) -> &[u8] {
        self.spm.bytes()
    }

    pub fn is_done(&self) -> bool {
        self.due.is_empty() && self.pes.iter().all(Pe::is_done)
    }

    /// Advances the whole cluster by one cycle.
    pub fn step(&mut self) -> Result<(), SimError> {
        let cycle = self.cycle;
        let mut progress = !self.due.is_empty();
        let mut responses: Vec<Vec<(usize, u64)>> = vec![Vec::new(); self.pes.len()];
        for (pe, port, data) in self.due.drain(..) {
            responses[pe].push((port, data));
        }
        for (pe, resp) in self.pes.iter_mut().zip(&responses) {
            progress |= pe.step(cycle, resp)?;
        }

        let per_pe = self.cfg.initiators_per_pe();
        let geometry = self.spm.geometry();
        let mut requests = Vec::with_capacity(self.pes.len() * per_pe);
        for pe in &self.pes {
            for port in 0..per_pe {
                let bank = pe.request(port).map(|r| {
                    geometry
                        .map_address(r.addr, true)
                        .expect("units check addresses before requesting")
                        .bank
                });
                requests.push(bank);
            }
        }
        let before = self.arbiter.conflicts;
        let granted = self.arbiter.arbitrate(&requests);
        for (i, ok) in granted.iter().enumerate() {
            let (pe, port) = (i / per_pe, i % per_pe);
            if *ok {
                let req = self.pes[pe].request(port).expect("granted a pending request");
                self.pes[pe].grant(port);
                let data = self.spm.access(req).expect("units check addresses before requesting");
                self.due.push((pe, port, data));
                progress = true;
            } else if let Some(bank) = requests[i] {
                self.trace
                    .log(cycle, "l1", "conflict", format!("pe{pe} port {port} bank {bank}"));
            }
        }
        debug_assert!(self.arbiter.conflicts >= before);

        self.cycle += 1;
        self.idle = if progress { 0 } else { self.idle + 1 };
        if self.idle >= self.opts.idle_limit {
            return Err(SimError::Deadlock {
                cycle: self.cycle,
                idle: self.idle,
            });
        }
        Ok(())
    }

    pub fn report(&self) -> SimReport {
        SimReport {
            cycles: self.cycle,
            pes: self.cfg.pes,
            fpus: self.cfg.fpus,
            vlen_bytes: self.cfg.vlen_bytes,
            per_pe: self.pes.iter().map(Pe::stats).collect(),
            l1_reads: self.spm.reads,
            l1_writes: self.spm.writes,
            l1_conflicts: self.arbiter.conflicts,
            chaining_violations: self.pes.iter().map(Pe::chaining_violations).sum(),
        }
    }

    /// Runs until every PE has finished and all memory traffic has drained.
    pub fn run(mut self) -> Result<SimOutcome, SimError> {
        while !self.is_done() {
            if self.cycle >= self.opts.max_cycles {
                return Err(SimError::CycleLimit {
                    limit: self.opts.max_cycles,
                });
            }
            self.step()?;
        }
        let report = self.report();
        let x = self
            .pes
            .iter()
            .map(|pe| std::array::from_fn(|r| pe.x(XReg(r as u8))))
            .collect();
        let mut trace = std::mem::take(&mut self.trace);
        for (i, pe) in self.pes.iter_mut().enumerate() {
            trace.append_tagged(pe.take_trace(), &format!("pe{i}."));
        }
        trace.sort_by_cycle();
        Ok(SimOutcome {
            report,
            memory: self.spm.into_bytes(),
            trace,
            x,
        })
    }
}

/// Simulates `program` on a fresh cluster.
pub fn simulate(program: &Program, cfg: &MachineConfig, opts: &SimOptions) -> Result<SimOutcome, SimError> {
    Cluster::new(program, cfg, opts)?.run()
}
