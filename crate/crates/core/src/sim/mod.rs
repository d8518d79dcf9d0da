//! Cycle-level model of one vector processing element.
//!
//! A PE is a scalar core that executes bookkeeping instructions and forwards vector
//! instructions to a controller. The controller tracks every in-flight vector
//! instruction at the granularity of one VRF port word ("chunk") and lets a consumer
//! start on a chunk as soon as its producer has written it. Three units execute
//! vector instructions: the arithmetic unit (VAU), the slide unit (VSLDU) and the
//! load/store unit (VLSU) with one 64-bit L1 port per lane.
//!
//! Phases of one cycle: memory responses are delivered, the units run in priority
//! order (VAU, VSLDU, VLSU) sharing the VRF port budget, staged VRF writes land and
//! finished instructions retire, then the scalar core dispatches. The cluster
//! arbitrates the requests the PE left on its ports at the end of the cycle.

pub mod exec;
mod pe;
pub mod reference;
mod report;
mod scalar;
mod scoreboard;
mod trace;
mod vau;
mod vlsu;
mod vsldu;

use thiserror::Error;

use crate::config::ConfigError;
use crate::isa::{CsrState, IsaError, ProgramError, VectorInstr};

pub use exec::{execute_arith, ArithInputs, ExecError, Source};
pub use pe::Pe;
pub use report::{EnergyEstimate, PeStats, SimReport};
pub use scoreboard::Scoreboard;
pub use trace::Trace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("PE {pe}, instruction {pc}: {source}")]
    Register {
        pe: usize,
        pc: usize,
        source: IsaError,
    },
    #[error("PE {pe}, instruction {pc}: register group at v{base} spans past v31")]
    GroupOverflow { pe: usize, pc: usize, base: u8 },
    #[error("PE {pe}, instruction {pc}: address {addr:#x} (+{len} B) is outside the {size}-byte L1")]
    AddressOutOfRange {
        pe: usize,
        pc: usize,
        addr: u64,
        len: usize,
        size: usize,
    },
    #[error("PE {pe}, instruction {pc}: {len}-byte access at {addr:#x} is misaligned")]
    Misaligned {
        pe: usize,
        pc: usize,
        addr: u64,
        len: usize,
    },
    #[error("PE {pe}, instruction {pc}: {source}")]
    Exec {
        pe: usize,
        pc: usize,
        source: ExecError,
    },
    #[error("no progress for {idle} cycles at cycle {cycle}")]
    Deadlock { cycle: u64, idle: u64 },
    #[error("cycle limit of {limit} reached")]
    CycleLimit { limit: u64 },
}

/// Run-time knobs that do not change the modelled machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOptions {
    pub max_cycles: u64,
    /// Cycles without any forward progress before the run is declared deadlocked.
    pub idle_limit: u64,
    pub trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            max_cycles: 50_000_000,
            idle_limit: 10_000,
            trace: false,
        }
    }
}

/// One 64-bit L1 access as presented on an initiator port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemRequest {
    /// Word-aligned byte address.
    pub addr: u64,
    pub write: Option<WordWrite>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordWrite {
    pub data: u64,
    /// Byte enables, bit `i` for byte `i` of the word.
    pub mask: u8,
}

/// A vector instruction accepted by the controller, with everything read at dispatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Issued {
    pub id: u64,
    pub pc: usize,
    pub instr: VectorInstr,
    pub csr: CsrState,
    /// Floating-point scalar operand bits for `.vf` forms.
    pub scalar: u64,
    /// Base address for memory instructions.
    pub base: u64,
    /// Byte stride for strided memory instructions.
    pub stride: u64,
    /// First cycle a unit may start it.
    pub ready: u64,
}

/// Index of chunk `chunk` of the group based at `base` in the flat chunk space of the VRF.
pub(crate) fn slot_of(base: u8, chunk: usize, chunks_per_reg: usize) -> usize {
    base as usize * chunks_per_reg + chunk
}

pub(crate) fn div_ceil(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}
