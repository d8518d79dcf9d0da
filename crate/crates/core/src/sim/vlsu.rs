use std::collections::VecDeque;

use super::pe::{Ctx, Queue};
use super::{div_ceil, slot_of, Issued, MemRequest, SimError, WordWrite};
use crate::config::WORD_BYTES;
use crate::isa::{AddrMode, Unit, VectorInstr};
use crate::vrf::full_strobe;

/// Widths and extents of a vector memory instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct MemGeom {
    pub store: bool,
    pub mode: AddrMode,
    /// Data element bytes.
    pub width: usize,
    /// Index element bytes, 0 unless indexed.
    pub index_width: usize,
    pub vl: usize,
    /// Whole-word requests instead of one request per element.
    pub words: bool,
    pub slots: usize,
    pub data_chunks: usize,
    pub index_chunks: usize,
    pub data_reg: u8,
    pub index_reg: u8,
}

impl MemGeom {
    pub fn new(is: &Issued, chunk_bytes: usize) -> Self {
        let (store, reg, eew, mode) = match is.instr {
            VectorInstr::Load { vd, eew, mode, .. } => (false, vd, eew, mode),
            VectorInstr::Store { vs3, eew, mode, .. } => (true, vs3, eew, mode),
            _ => unreachable!("VLSU only receives memory instructions"),
        };
        let (width, index_width, index_reg) = match mode {
            AddrMode::Indexed(v) => (is.csr.sew.bytes(), eew.bytes(), v.0),
            _ => (eew.bytes(), 0, 0),
        };
        let vl = is.csr.vl;
        let words = mode == AddrMode::UnitStride && is.base.is_multiple_of(WORD_BYTES as u64);
        Self {
            store,
            mode,
            width,
            index_width,
            vl,
            words,
            slots: if words {
                div_ceil(vl * width, WORD_BYTES)
            } else {
                vl
            },
            data_chunks: div_ceil(vl * width, chunk_bytes),
            index_chunks: div_ceil(vl * index_width, chunk_bytes),
            data_reg: reg.0,
            index_reg,
        }
    }

    /// Offset of slot `k` within the data group, and its length in bytes.
    fn slot_span(&self, k: usize) -> (usize, usize) {
        if self.words {
            let at = k * WORD_BYTES;
            (at, WORD_BYTES.min(self.vl * self.width - at))
        } else {
            (k * self.width, self.width)
        }
    }

    fn slot_chunk(&self, k: usize, chunk_bytes: usize) -> usize {
        self.slot_span(k).0 / chunk_bytes
    }

    fn index_chunk(&self, k: usize, chunk_bytes: usize) -> usize {
        k * self.index_width / chunk_bytes
    }

    /// Slots whose data lies in chunk `c`.
    fn chunk_slots(&self, c: usize, chunk_bytes: usize) -> std::ops::Range<usize> {
        let unit = if self.words { WORD_BYTES } else { self.width };
        let lo = c * chunk_bytes / unit;
        let hi = ((c + 1) * chunk_bytes / unit).min(self.slots);
        lo..hi
    }
}

pub(super) fn footprint(is: &Issued, chunk_bytes: usize, cpr: usize) -> (Vec<usize>, Vec<usize>) {
    let g = MemGeom::new(is, chunk_bytes);
    let mut reads: Vec<usize> = (0..g.index_chunks)
        .map(|c| slot_of(g.index_reg, c, cpr))
        .collect();
    let data = (0..g.data_chunks).map(|c| slot_of(g.data_reg, c, cpr));
    if g.store {
        reads.extend(data);
        (reads, Vec::new())
    } else {
        (reads, data.collect())
    }
}

/// One VLSU-side L1 port.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(super) struct Port {
    pub pending: Option<MemRequest>,
    /// Requests awaiting a response, oldest first: (instruction, slot).
    outstanding: VecDeque<(u64, usize)>,
    /// Reorder-buffer entries held: requests not yet answered, plus answered loads
    /// whose chunk has not been written back.
    rob_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Job {
    is: Issued,
    geom: MemGeom,
    /// Next slot of each port.
    cursors: Vec<usize>,
    buf: Vec<u8>,
    data_read: usize,
    index_buf: Vec<u8>,
    index_read: usize,
    /// Load slots of each chunk still waiting for data.
    missing: Vec<usize>,
    commit_next: usize,
    unacked: usize,
}

impl Job {
    fn issue_complete(&self) -> bool {
        self.cursors.iter().all(|c| *c >= self.geom.slots)
    }

    fn finished(&self) -> bool {
        self.issue_complete()
            && if self.geom.store {
                self.unacked == 0
            } else {
                self.commit_next == self.geom.data_chunks
            }
    }

    /// Smallest data chunk still to be requested.
    fn frontier(&self, cb: usize) -> Option<usize> {
        self.cursors
            .iter()
            .filter(|c| **c < self.geom.slots)
            .map(|c| self.geom.slot_chunk(*c, cb))
            .min()
    }

    fn index_frontier(&self, cb: usize) -> Option<usize> {
        self.cursors
            .iter()
            .filter(|c| **c < self.geom.slots)
            .map(|c| self.geom.index_chunk(*c, cb))
            .min()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Vlsu {
    jobs: VecDeque<Job>,
    pub ports: Vec<Port>,
    rob_depth: usize,
}

impl Vlsu {
    pub fn new(ports: usize, rob_depth: usize) -> Self {
        Self {
            jobs: VecDeque::new(),
            ports: vec![Port::default(); ports],
            rob_depth,
        }
    }

    pub fn idle(&self) -> bool {
        self.jobs.is_empty()
            && self
                .ports
                .iter()
                .all(|p| p.pending.is_none() && p.outstanding.is_empty())
    }

    /// Delivers the data (or store acknowledgement) for the oldest request on `port`.
    pub fn respond(&mut self, port: usize, data: u64, chunk_bytes: usize) {
        let (id, k) = self.ports[port]
            .outstanding
            .pop_front()
            .expect("response matches an outstanding request");
        let job = self
            .jobs
            .iter_mut()
            .find(|j| j.is.id == id)
            .expect("request belongs to an active instruction");
        if job.geom.store {
            job.unacked -= 1;
            self.ports[port].rob_used -= 1;
        } else {
            let (at, len) = job.geom.slot_span(k);
            let off = request_address(job, k).map_or(0, |a| (a % WORD_BYTES as u64) as usize);
            let bytes = data.to_le_bytes();
            job.buf[at..at + len].copy_from_slice(&bytes[off..off + len]);
            job.missing[job.geom.slot_chunk(k, chunk_bytes)] -= 1;
        }
    }

    pub fn step(&mut self, ctx: &mut Ctx<'_>, queue: &mut Queue) -> Result<(), SimError> {
        let mut busy = self.commit(ctx);
        let issuing = self.jobs.iter().any(|j| !j.issue_complete());
        if !issuing {
            if let Some(is) = queue.take(Unit::Vlsu, ctx.cycle) {
                let geom = MemGeom::new(&is, ctx.chunk_bytes());
                let cb = ctx.chunk_bytes();
                ctx.trace.log(ctx.cycle, "vlsu", "start", format!("#{} {}", is.id, is.instr));
                self.jobs.push_back(Job {
                    is,
                    geom,
                    cursors: (0..self.ports.len()).collect(),
                    buf: vec![0; geom.data_chunks * cb],
                    data_read: 0,
                    index_buf: vec![0; geom.index_chunks * cb],
                    index_read: 0,
                    missing: (0..geom.data_chunks)
                        .map(|c| if geom.store { 0 } else { geom.chunk_slots(c, cb).len() })
                        .collect(),
                    commit_next: 0,
                    unacked: 0,
                });
            }
        }
        busy |= self.issue(ctx)?;
        let mut i = 0;
        while i < self.jobs.len() {
            if self.jobs[i].finished() {
                let job = self.jobs.remove(i).expect("index in range");
                ctx.board.set_issue_done(job.is.id);
                ctx.trace.log(ctx.cycle, "vlsu", "done", format!("#{}", job.is.id));
            } else {
                i += 1;
            }
        }
        if busy {
            ctx.stats.vlsu_busy += 1;
            ctx.progress = true;
        }
        Ok(())
    }

    /// Writes completed load chunks back in order, one per free bank write port.
    fn commit(&mut self, ctx: &mut Ctx<'_>) -> bool {
        let (cb, cpr) = (ctx.chunk_bytes(), ctx.cpr());
        let mut any = false;
        for job in self.jobs.iter_mut().filter(|j| !j.geom.store) {
            while job.commit_next < job.geom.data_chunks {
                let c = job.commit_next;
                if job.missing[c] > 0 {
                    break;
                }
                let slot = slot_of(job.geom.data_reg, c, cpr);
                if !ctx.board.can_write(job.is.id, slot) {
                    break;
                }
                let loc = ctx.loc(slot);
                if !ctx.budget.try_write(loc.bank) {
                    break;
                }
                let valid = (job.geom.vl * job.geom.width).min((c + 1) * cb) - c * cb;
                ctx.vrf.write(loc, job.buf[c * cb..(c + 1) * cb].to_vec(), full_strobe(valid));
                ctx.board.mark_written(job.is.id, slot);
                let nports = self.ports.len();
                for k in job.geom.chunk_slots(c, cb) {
                    self.ports[k % nports].rob_used -= 1;
                }
                ctx.trace.log(ctx.cycle, "vlsu", "commit", format!("#{} chunk {c}", job.is.id));
                job.commit_next += 1;
                any = true;
            }
        }
        any
    }

    fn issue(&mut self, ctx: &mut Ctx<'_>) -> Result<bool, SimError> {
        let (cb, cpr) = (ctx.chunk_bytes(), ctx.cpr());
        let Some(pos) = self.jobs.iter().position(|j| !j.issue_complete()) else {
            return Ok(false);
        };
        // Loads and stores do not overtake each other in memory.
        let kind = self.jobs[pos].geom.store;
        if self.jobs.iter().take(pos).any(|j| j.geom.store != kind) {
            return Ok(false);
        }
        let nports = self.ports.len();
        let job = &mut self.jobs[pos];
        let mut any = false;
        // Entries are freed only when a whole chunk commits, so every port must be
        // able to hold its share of one chunk even when requests are per element.
        let unit = if job.geom.words { WORD_BYTES } else { job.geom.width };
        let rob_depth = self.rob_depth.max(div_ceil(cb / unit, nports));

        // Operand reads: one data chunk and one index chunk per cycle, one chunk ahead.
        if job.geom.store && job.data_read < job.geom.data_chunks {
            let front = job.frontier(cb).unwrap_or(job.geom.data_chunks);
            let slot = slot_of(job.geom.data_reg, job.data_read, cpr);
            if job.data_read <= front + 1
                && ctx.board.can_read(job.is.id, slot)
                && ctx.budget.try_reads(ctx.loc(slot).bank, 1)
            {
                let data = ctx.read(job.is.id, slot);
                let at = job.data_read * cb;
                job.buf[at..at + cb].copy_from_slice(&data);
                job.data_read += 1;
                any = true;
            }
        }
        if job.index_read < job.geom.index_chunks {
            let front = job.index_frontier(cb).unwrap_or(job.geom.index_chunks);
            let slot = slot_of(job.geom.index_reg, job.index_read, cpr);
            if job.index_read <= front + 1
                && ctx.board.can_read(job.is.id, slot)
                && ctx.budget.try_reads(ctx.loc(slot).bank, 1)
            {
                let data = ctx.read(job.is.id, slot);
                let at = job.index_read * cb;
                job.index_buf[at..at + cb].copy_from_slice(&data);
                job.index_read += 1;
                any = true;
            }
        }

        for p in 0..nports {
            let k = job.cursors[p];
            let port = &mut self.ports[p];
            if k >= job.geom.slots || port.pending.is_some() || port.rob_used >= rob_depth {
                continue;
            }
            if job.geom.store && job.geom.slot_chunk(k, cb) >= job.data_read {
                continue;
            }
            if job.geom.index_width > 0 && job.geom.index_chunk(k, cb) >= job.index_read {
                continue;
            }
            let addr = request_address(job, k).expect("operands are buffered");
            let (at, len) = job.geom.slot_span(k);
            let fault_at = |addr| (ctx.pe, job.is.pc, addr, len);
            let crosses_word = addr % WORD_BYTES as u64 + len as u64 > WORD_BYTES as u64;
            if crosses_word || (!job.geom.words && !addr.is_multiple_of(len as u64)) {
                let (pe, pc, addr, len) = fault_at(addr);
                return Err(SimError::Misaligned { pe, pc, addr, len });
            }
            if addr.checked_add(len as u64).is_none_or(|end| end > ctx.l1_bytes as u64) {
                let (pe, pc, addr, len) = fault_at(addr);
                return Err(SimError::AddressOutOfRange {
                    pe,
                    pc,
                    addr,
                    len,
                    size: ctx.l1_bytes,
                });
            }
            let off = (addr % WORD_BYTES as u64) as usize;
            let write = job.geom.store.then(|| {
                let mut word = [0u8; WORD_BYTES];
                word[off..off + len].copy_from_slice(&job.buf[at..at + len]);
                WordWrite {
                    data: u64::from_le_bytes(word),
                    mask: (full_strobe(len) << off) as u8,
                }
            });
            port.pending = Some(MemRequest {
                addr: addr - off as u64,
                write,
            });
            port.outstanding.push_back((job.is.id, k));
            port.rob_used += 1;
            if job.geom.store {
                job.unacked += 1;
            }
            job.cursors[p] += nports;
            any = true;
        }
        if any {
            ctx.trace.log(ctx.cycle, "vlsu", "request", format!("#{}", job.is.id));
        }
        Ok(any)
    }
}

/// Byte address of slot `k`; `None` while its index is not yet buffered.
fn request_address(job: &Job, k: usize) -> Option<u64> {
    let g = &job.geom;
    let base = job.is.base;
    Some(match g.mode {
        AddrMode::UnitStride => base.wrapping_add(g.slot_span(k).0 as u64),
        AddrMode::Strided(_) => base.wrapping_add((k as u64).wrapping_mul(job.is.stride)),
        AddrMode::Indexed(_) => {
            let at = k * g.index_width;
            let bytes = job.index_buf.get(at..at + g.index_width)?;
            let mut word = [0u8; 8];
            word[..g.index_width].copy_from_slice(bytes);
            base.wrapping_add(u64::from_le_bytes(word))
        }
    })
}
