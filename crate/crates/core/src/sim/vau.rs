use std::collections::VecDeque;

use super::exec::{element_flops, element_weight, execute_arith, reduce_sum, ArithInputs, Source};
use super::pe::{Ctx, Queue};
use super::{div_ceil, slot_of, Issued, SimError};
use crate::isa::{Operand, Sew, Unit, VectorInstr};
use crate::numeric::{read_elem, write_elem};
use crate::vrf::full_strobe;

/// A result travelling down the FPU pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) struct PipeWrite {
    pub land: u64,
    pub id: u64,
    pub slot: usize,
    pub data: Vec<u8>,
    pub strobe: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct Job {
    is: Issued,
    chunks: usize,
    next: usize,
    partial: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(super) struct Vau {
    job: Option<Job>,
    pipe: VecDeque<PipeWrite>,
}

/// Elements of `sew` per chunk.
fn per_chunk(chunk_bytes: usize, sew: Sew) -> usize {
    chunk_bytes / sew.bytes()
}

/// Chunks the VAU streams for `is`, and the slots it reads and writes.
pub(super) fn footprint(is: &Issued, chunk_bytes: usize, cpr: usize) -> (Vec<usize>, Vec<usize>) {
    let sew = is.csr.sew;
    let chunks = div_ceil(is.csr.vl, per_chunk(chunk_bytes, sew));
    let mut reads = Vec::new();
    let mut writes = Vec::new();
    match is.instr {
        VectorInstr::RedSum { vd, vs2, vs1 } => {
            if chunks > 0 {
                reads.extend((0..chunks).map(|c| slot_of(vs2.0, c, cpr)));
                reads.push(slot_of(vs1.0, 0, cpr));
                writes.push(slot_of(vd.0, 0, cpr));
            }
        }
        _ => {
            for c in 0..chunks {
                for v in is.instr.vector_sources() {
                    reads.push(slot_of(v.0, c, cpr));
                }
                if let Some(vd) = is.instr.dest() {
                    writes.push(slot_of(vd.0, c, cpr));
                }
            }
        }
    }
    (reads, writes)
}

fn reduction_latency(fpu_latency: u64, lanes: usize) -> u64 {
    fpu_latency * (1 + lanes.max(1).ilog2() as u64)
}

impl Vau {
    pub fn idle(&self) -> bool {
        self.job.is_none() && self.pipe.is_empty()
    }

    pub fn step(&mut self, ctx: &mut Ctx<'_>, queue: &mut Queue) -> Result<(), SimError> {
        self.land(ctx);
        if self.job.is_none() {
            if let Some(is) = queue.take(Unit::Vau, ctx.cycle) {
                let chunks = div_ceil(is.csr.vl, per_chunk(ctx.chunk_bytes(), is.csr.sew));
                ctx.trace.log(ctx.cycle, "vau", "start", format!("#{} {}", is.id, is.instr));
                self.job = Some(Job {
                    is,
                    chunks,
                    next: 0,
                    partial: 0.0,
                });
            }
        }
        let Some(job) = self.job.as_mut() else {
            return Ok(());
        };
        if job.next < job.chunks {
            let issued = match job.is.instr {
                VectorInstr::RedSum { .. } => issue_reduction(job, ctx),
                _ => issue_chunk(job, ctx)?,
            };
            if let Some(w) = issued {
                self.pipe.push_back(w);
            }
        }
        if job.next == job.chunks {
            ctx.board.set_issue_done(job.is.id);
            self.job = None;
        }
        Ok(())
    }

    fn land(&mut self, ctx: &mut Ctx<'_>) {
        let mut i = 0;
        while i < self.pipe.len() {
            if self.pipe[i].land <= ctx.cycle {
                let loc = ctx.loc(self.pipe[i].slot);
                if ctx.budget.try_write(loc.bank) {
                    let w = self.pipe.remove(i).expect("index in range");
                    ctx.vrf.write(loc, w.data, w.strobe);
                    ctx.board.mark_written(w.id, w.slot);
                    ctx.progress = true;
                    ctx.trace.log(ctx.cycle, "vau", "write", format!("#{} slot {}", w.id, w.slot));
                    continue;
                }
            }
            i += 1;
        }
    }
}

fn issue_chunk(job: &mut Job, ctx: &mut Ctx<'_>) -> Result<Option<PipeWrite>, SimError> {
    let is = job.is;
    let cpr = ctx.cpr();
    let cb = ctx.chunk_bytes();
    let sew = is.csr.sew;
    let e = per_chunk(cb, sew);
    let c = job.next;
    let narrow = e.min(is.csr.vl - c * e);
    let (src, vs2, acc, vd) = match is.instr {
        VectorInstr::Arith { vd, vs2, src, .. } => (src, vs2, false, vd),
        VectorInstr::Fma { vd, src, vs2 } | VectorInstr::Sdotp { vd, src, vs2 } => (src, vs2, true, vd),
        _ => unreachable!("VAU only receives arithmetic instructions"),
    };
    let mut slots = Vec::with_capacity(3);
    if let Operand::Vector(v) = src {
        slots.push(slot_of(v.0, c, cpr));
    }
    slots.push(slot_of(vs2.0, c, cpr));
    if acc {
        slots.push(slot_of(vd.0, c, cpr));
    }
    let dest = slot_of(vd.0, c, cpr);
    if !slots.iter().all(|s| ctx.board.can_read(is.id, *s)) || !ctx.board.can_write(is.id, dest) {
        return Ok(None);
    }
    let bank = ctx.loc(dest).bank;
    if !ctx.budget.try_reads(bank, slots.len()) {
        return Ok(None);
    }
    let data: Vec<Vec<u8>> = slots.iter().map(|s| ctx.read(is.id, *s)).collect();
    let mut it = data.iter();
    let src_bytes = match src {
        Operand::Vector(_) => it.next().map(Vec::as_slice).unwrap_or(&[]),
        Operand::Scalar(_) => &[],
    };
    let vs2_bytes = it.next().expect("vs2 operand");
    let zeros = vec![0u8; cb];
    let acc_bytes = if acc { it.next().expect("accumulator") } else { &zeros };
    let elems = match is.instr {
        VectorInstr::Sdotp { .. } => narrow / 2,
        _ => narrow,
    };
    let inputs = ArithInputs {
        src: Source::for_operand(src, src_bytes, is.scalar),
        vs2: vs2_bytes,
        acc: acc_bytes,
    };
    let out = execute_arith(&is.instr, sew, inputs, elems).map_err(|source| SimError::Exec {
        pe: ctx.pe,
        pc: is.pc,
        source,
    })?;
    let written = match is.instr {
        VectorInstr::Sdotp { .. } => elems * 2 * sew.bytes(),
        _ => elems * sew.bytes(),
    };
    ctx.stats.vau_busy += 1;
    ctx.stats.flops += element_flops(&is.instr) * elems as u64;
    ctx.stats.weighted_flops += element_weight(&is.instr, sew) * elems as f64;
    ctx.progress = true;
    ctx.trace.log(ctx.cycle, "vau", "issue", format!("#{} chunk {c}", is.id));
    job.next += 1;
    Ok(Some(PipeWrite {
        land: ctx.cycle + ctx.cfg.fpu_latency,
        id: is.id,
        slot: dest,
        data: out,
        strobe: full_strobe(written),
    }))
}

fn issue_reduction(job: &mut Job, ctx: &mut Ctx<'_>) -> Option<PipeWrite> {
    let is = job.is;
    let VectorInstr::RedSum { vd, vs2, vs1 } = is.instr else {
        unreachable!()
    };
    let cpr = ctx.cpr();
    let cb = ctx.chunk_bytes();
    let sew = is.csr.sew;
    let e = per_chunk(cb, sew);
    let c = job.next;
    let last = c + 1 == job.chunks;
    let mut slots = vec![slot_of(vs2.0, c, cpr)];
    if c == 0 {
        slots.push(slot_of(vs1.0, 0, cpr));
    }
    let dest = slot_of(vd.0, 0, cpr);
    if !slots.iter().all(|s| ctx.board.can_read(is.id, *s)) || (last && !ctx.board.can_write(is.id, dest)) {
        return None;
    }
    let bank = ctx.loc(slots[0]).bank;
    if !ctx.budget.try_reads(bank, slots.len()) {
        return None;
    }
    let chunk = ctx.read(is.id, slots[0]);
    if c == 0 {
        let init = ctx.read(is.id, slots[1]);
        job.partial = read_elem(&init, sew, 0);
    }
    let elems = e.min(is.csr.vl - c * e);
    job.partial = reduce_sum(job.partial, &chunk, sew, elems);
    ctx.stats.vau_busy += 1;
    ctx.stats.flops += element_flops(&is.instr) * elems as u64;
    ctx.stats.weighted_flops += element_weight(&is.instr, sew) * elems as f64;
    ctx.progress = true;
    ctx.trace.log(ctx.cycle, "vau", "issue", format!("#{} chunk {c}", is.id));
    job.next += 1;
    if !last {
        return None;
    }
    let mut data = vec![0u8; cb];
    write_elem(&mut data, sew, 0, job.partial);
    Some(PipeWrite {
        land: ctx.cycle + reduction_latency(ctx.cfg.fpu_latency, e),
        id: is.id,
        slot: dest,
        data,
        strobe: full_strobe(sew.bytes()),
    })
}
