//! Dual-bank 3R1W vector register file.
//!
//! Every architectural register owns one row in each bank, `VLEN/2` bytes wide.
//! A register group is streamed in chunks of one port word (8·F bytes); chunk `c`
//! of a group lives in bank `c % 2`, so consecutive chunks alternate banks.

use thiserror::Error;

use crate::config::MachineConfig;
use crate::isa::VReg;

pub use crate::energy::{access_energy, AccessKind};

pub const VRF_BANKS: usize = 2;
pub const VRF_ROWS: usize = 32;
pub const READ_PORTS: usize = 3;
pub const WRITE_PORTS: usize = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VrfError {
    #[error("chunk {chunk} of a group at v{reg} lies beyond v31")]
    ChunkOutOfRange { reg: u8, chunk: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChunkLocation {
    pub bank: usize,
    pub row: usize,
    /// Byte offset within the row.
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VrfLayout {
    pub vlen_bytes: usize,
    pub chunk_bytes: usize,
}

impl VrfLayout {
    pub fn new(cfg: &MachineConfig) -> Self {
        Self {
            vlen_bytes: cfg.vlen_bytes,
            chunk_bytes: cfg.chunk_bytes(),
        }
    }

    pub fn row_bytes(&self) -> usize {
        self.vlen_bytes / VRF_BANKS
    }

    /// Capacity of one bank, 16·VLEN bytes.
    pub fn bank_bytes(&self) -> usize {
        self.row_bytes() * VRF_ROWS
    }

    pub fn chunks_per_reg(&self) -> usize {
        self.vlen_bytes / self.chunk_bytes
    }

    pub fn locate_chunk(&self, reg: VReg, chunk: usize) -> Result<ChunkLocation, VrfError> {
        let cpr = self.chunks_per_reg();
        let row = reg.0 as usize + chunk / cpr;
        if row >= VRF_ROWS {
            return Err(VrfError::ChunkOutOfRange { reg: reg.0, chunk });
        }
        let within = chunk % cpr;
        Ok(ChunkLocation {
            bank: within % VRF_BANKS,
            row,
            offset: (within / VRF_BANKS) * self.chunk_bytes,
        })
    }
}

/// Units that access the register file, highest priority first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Requester {
    Vau,
    Vsldu,
    Vlsu,
    Sequencer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortKind {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VrfPortRequest {
    pub kind: PortKind,
    pub bank: usize,
    pub row: usize,
    /// Byte-enable mask over the port word; bit `i` enables byte `i`. Ignored for reads.
    pub strobe: u64,
    pub requester: Requester,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Arbitration {
    /// Indices into the request slice.
    pub granted: Vec<usize>,
    pub stalled: Vec<usize>,
}

/// Remaining port capacity of both banks within one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortBudget {
    reads: [usize; VRF_BANKS],
    writes: [usize; VRF_BANKS],
}

impl Default for PortBudget {
    fn default() -> Self {
        Self {
            reads: [READ_PORTS; VRF_BANKS],
            writes: [WRITE_PORTS; VRF_BANKS],
        }
    }
}

impl PortBudget {
    /// Claims `n` read ports on `bank` only if all are free.
    pub fn try_reads(&mut self, bank: usize, n: usize) -> bool {
        if self.reads[bank] >= n {
            self.reads[bank] -= n;
            true
        } else {
            false
        }
    }

    pub fn try_write(&mut self, bank: usize) -> bool {
        if self.writes[bank] > 0 {
            self.writes[bank] -= 1;
            true
        } else {
            false
        }
    }

    pub fn reads_left(&self, bank: usize) -> usize {
        self.reads[bank]
    }

    pub fn writes_left(&self, bank: usize) -> usize {
        self.writes[bank]
    }

    fn take(&mut self, req: &VrfPortRequest) -> bool {
        match req.kind {
            PortKind::Read => self.try_reads(req.bank, 1),
            PortKind::Write => self.try_write(req.bank),
        }
    }
}

/// Grants at most 3 reads and 1 write per bank, by unit priority and then request order.
pub fn arbitrate(requests: &[VrfPortRequest]) -> Arbitration {
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by_key(|&i| requests[i].requester);
    let mut budget = PortBudget::default();
    let mut out = Arbitration::default();
    for i in order {
        if budget.take(&requests[i]) {
            out.granted.push(i);
        } else {
            out.stalled.push(i);
        }
    }
    out.granted.sort_unstable();
    out.stalled.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PendingWrite {
    loc: ChunkLocation,
    data: Vec<u8>,
    strobe: u64,
}

/// Register-file contents. Writes staged during a cycle become visible after `end_cycle`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrfState {
    layout: VrfLayout,
    banks: [Vec<u8>; VRF_BANKS],
    pending: Vec<PendingWrite>,
    pub reads: u64,
    pub writes: u64,
}

impl VrfState {
    pub fn new(layout: VrfLayout) -> Self {
        let bytes = layout.bank_bytes();
        Self {
            layout,
            banks: [vec![0; bytes], vec![0; bytes]],
            pending: Vec::new(),
            reads: 0,
            writes: 0,
        }
    }

    pub fn layout(&self) -> &VrfLayout {
        &self.layout
    }

    fn span(&self, loc: ChunkLocation) -> std::ops::Range<usize> {
        let start = loc.row * self.layout.row_bytes() + loc.offset;
        start..start + self.layout.chunk_bytes
    }

    /// Port read of one chunk; counted as one access.
    pub fn read(&mut self, loc: ChunkLocation) -> Vec<u8> {
        self.reads += 1;
        self.peek(loc).to_vec()
    }

    /// Inspection without touching the access counters.
    pub fn peek(&self, loc: ChunkLocation) -> &[u8] {
        &self.banks[loc.bank][self.span(loc)]
    }

    /// Stages a strobed write that lands at the end of the cycle.
    pub fn write(&mut self, loc: ChunkLocation, data: Vec<u8>, strobe: u64) {
        debug_assert_eq!(data.len(), self.layout.chunk_bytes);
        self.writes += 1;
        self.pending.push(PendingWrite { loc, data, strobe });
    }

    pub fn end_cycle(&mut self) {
        for w in std::mem::take(&mut self.pending) {
            let span = self.span(w.loc);
            let row = &mut self.banks[w.loc.bank][span];
            for (i, byte) in w.data.iter().enumerate() {
                if w.strobe >> i & 1 == 1 {
                    row[i] = *byte;
                }
            }
        }
    }

    /// The `chunks` chunks of a group based at `reg`, concatenated in element order.
    pub fn peek_group(&self, reg: VReg, chunks: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(chunks * self.layout.chunk_bytes);
        for c in 0..chunks {
            let loc = self.layout.locate_chunk(reg, c).expect("group inside the file");
            out.extend_from_slice(self.peek(loc));
        }
        out
    }

    /// Direct store used to preload registers in tests; bypasses timing.
    pub fn poke_group(&mut self, reg: VReg, bytes: &[u8]) {
        for (c, part) in bytes.chunks(self.layout.chunk_bytes).enumerate() {
            let loc = self.layout.locate_chunk(reg, c).expect("group inside the file");
            let span = self.span(loc);
            self.banks[loc.bank][span][..part.len()].copy_from_slice(part);
        }
    }
}

/// Full-width strobe for a chunk of `bytes` bytes.
pub fn full_strobe(bytes: usize) -> u64 {
    if bytes >= 64 {
        u64::MAX
    } else {
        (1u64 << bytes) - 1
    }
}
