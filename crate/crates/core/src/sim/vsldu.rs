use super::exec::{slide_source_index, SlideSource};
use super::pe::{Ctx, Queue};
use super::vau::PipeWrite;
use super::{div_ceil, slot_of, Issued};
use crate::isa::{vlmax, SlideDir, Unit, VectorInstr};
use crate::vrf::full_strobe;

/// Source/destination geometry of a slide, in chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct SlideGeom {
    pub up: bool,
    pub shamt: usize,
    pub vl: usize,
    pub vlmax: usize,
    /// Elements per chunk.
    pub per_chunk: usize,
    pub out_chunks: usize,
    /// Source chunks `src_first..src_chunks` are read.
    pub src_first: usize,
    pub src_chunks: usize,
}

impl SlideGeom {
    pub fn new(is: &Issued, vlen_bytes: usize, chunk_bytes: usize) -> Self {
        let VectorInstr::Slide { dir, shamt, .. } = is.instr else {
            unreachable!("VSLDU only receives slides")
        };
        let vl = is.csr.vl;
        let per_chunk = chunk_bytes / is.csr.sew.bytes();
        let vlmax = vlmax(is.csr.sew, is.csr.lmul, vlen_bytes);
        let mut g = Self {
            up: dir == SlideDir::Up,
            shamt: shamt as usize,
            vl,
            vlmax,
            per_chunk,
            out_chunks: div_ceil(vl, per_chunk),
            src_first: 0,
            src_chunks: 0,
        };
        if !g.up && g.out_chunks > 0 && g.shamt < vlmax {
            g.src_first = g.shamt / per_chunk;
        }
        g.src_chunks = (0..g.out_chunks)
            .filter_map(|k| g.needs(k))
            .max()
            .map_or(0, |m| m + 1);
        g
    }

    /// Highest source chunk read by output chunk `k`.
    pub fn needs(&self, k: usize) -> Option<usize> {
        let lo = k * self.per_chunk;
        let hi = ((k + 1) * self.per_chunk).min(self.vl).checked_sub(1)?;
        let j = if self.up {
            hi.checked_sub(self.shamt)?
        } else {
            if lo + self.shamt >= self.vlmax {
                return None;
            }
            (hi + self.shamt).min(self.vlmax - 1)
        };
        Some(j / self.per_chunk)
    }
}

pub(super) fn footprint(is: &Issued, vlen_bytes: usize, chunk_bytes: usize, cpr: usize) -> (Vec<usize>, Vec<usize>) {
    let g = SlideGeom::new(is, vlen_bytes, chunk_bytes);
    let VectorInstr::Slide { vd, vs2, .. } = is.instr else {
        unreachable!()
    };
    (
        (g.src_first..g.src_chunks).map(|c| slot_of(vs2.0, c, cpr)).collect(),
        (0..g.out_chunks).map(|c| slot_of(vd.0, c, cpr)).collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
struct Job {
    is: Issued,
    geom: SlideGeom,
    buf: Vec<u8>,
    read_next: usize,
    out_next: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(super) struct Vsldu {
    job: Option<Job>,
    pending: Option<PipeWrite>,
}

impl Vsldu {
    pub fn idle(&self) -> bool {
        self.job.is_none() && self.pending.is_none()
    }

    pub fn step(&mut self, ctx: &mut Ctx<'_>, queue: &mut Queue) {
        if let Some(w) = &self.pending {
            if w.land <= ctx.cycle {
                let loc = ctx.loc(w.slot);
                if !ctx.budget.try_write(loc.bank) {
                    return;
                }
                let w = self.pending.take().expect("checked above");
                ctx.vrf.write(loc, w.data, w.strobe);
                ctx.board.mark_written(w.id, w.slot);
                ctx.progress = true;
                ctx.trace.log(ctx.cycle, "vsldu", "write", format!("#{} slot {}", w.id, w.slot));
            }
        }
        if self.job.is_none() {
            if let Some(is) = queue.take(Unit::Vsldu, ctx.cycle) {
                let geom = SlideGeom::new(&is, ctx.cfg.vlen_bytes, ctx.chunk_bytes());
                ctx.trace.log(ctx.cycle, "vsldu", "start", format!("#{} {}", is.id, is.instr));
                self.job = Some(Job {
                    is,
                    geom,
                    buf: vec![0; geom.src_chunks.max(1) * ctx.chunk_bytes()],
                    read_next: geom.src_first,
                    out_next: 0,
                });
            }
        }
        let Some(job) = self.job.as_mut() else {
            return;
        };
        let VectorInstr::Slide { vd, vs2, .. } = job.is.instr else {
            unreachable!()
        };
        let (cpr, cb) = (ctx.cpr(), ctx.chunk_bytes());
        let g = job.geom;
        let mut busy = false;

        // Read at most one source chunk, staying at most one chunk ahead of the output.
        let horizon = (job.out_next < g.out_chunks)
            .then(|| g.needs(job.out_next))
            .flatten()
            .map_or(0, |n| n + 1);
        if job.read_next < g.src_chunks && job.read_next <= horizon {
            let slot = slot_of(vs2.0, job.read_next, cpr);
            if ctx.board.can_read(job.is.id, slot) && ctx.budget.try_reads(ctx.loc(slot).bank, 1) {
                let data = ctx.read(job.is.id, slot);
                let at = job.read_next * cb;
                job.buf[at..at + cb].copy_from_slice(&data);
                job.read_next += 1;
                busy = true;
            }
        }

        if self.pending.is_none() && job.out_next < g.out_chunks {
            let k = job.out_next;
            let ready = g.needs(k).is_none_or(|n| n < job.read_next);
            let slot = slot_of(vd.0, k, cpr);
            if ready && ctx.board.can_write(job.is.id, slot) {
                let eb = job.is.csr.sew.bytes();
                let mut data = vec![0u8; cb];
                let mut strobe = 0u64;
                let first = k * g.per_chunk;
                for i in first..(first + g.per_chunk).min(g.vl) {
                    let at = (i - first) * eb;
                    match slide_source_index(g.up, g.shamt, i, g.vlmax) {
                        None => continue,
                        Some(SlideSource::Zero) => {}
                        Some(SlideSource::Element(j)) => {
                            data[at..at + eb].copy_from_slice(&job.buf[j * eb..(j + 1) * eb]);
                        }
                    }
                    strobe |= full_strobe(eb) << at;
                }
                self.pending = Some(PipeWrite {
                    land: ctx.cycle + 1,
                    id: job.is.id,
                    slot,
                    data,
                    strobe,
                });
                job.out_next += 1;
                busy = true;
                ctx.trace.log(ctx.cycle, "vsldu", "issue", format!("#{} chunk {k}", job.is.id));
            }
        }

        if busy {
            ctx.stats.vsldu_busy += 1;
            ctx.progress = true;
        }
        if job.out_next == g.out_chunks && job.read_next == g.src_chunks {
            ctx.board.set_issue_done(job.is.id);
            self.job = None;
        }
    }
}
