use std::collections::VecDeque;

use super::report::PeStats;
use super::scalar::{Pending, ScalarCore};
use super::scoreboard::Scoreboard;
use super::trace::Trace;
use super::vau::{self, Vau};
use super::vlsu::{self, Vlsu};
use super::vsldu::{self, Vsldu};
use super::{Issued, MemRequest, SimError, WordWrite};
use crate::config::{MachineConfig, WORD_BYTES};
use crate::isa::{
    AddrMode, CsrState, FReg, Instr, Operand, ScalarInstr, SlideDir, Unit, VReg, VectorInstr, XReg,
};
use crate::vrf::{ChunkLocation, PortBudget, VrfLayout, VrfState, VRF_ROWS};

/// Vector instructions accepted by the controller and not yet started by their unit.
#[derive(Debug, Clone, Default, PartialEq)]
pub(super) struct Queue {
    items: VecDeque<Issued>,
}

impl Queue {
    /// Removes the oldest instruction for `unit` if it may start this cycle.
    pub fn take(&mut self, unit: Unit, cycle: u64) -> Option<Issued> {
        let pos = self
            .items
            .iter()
            .position(|i| i.instr.unit() == Some(unit))?;
        if self.items[pos].ready > cycle {
            return None;
        }
        self.items.remove(pos)
    }

    fn has(&self, unit: Unit) -> bool {
        self.items.iter().any(|i| i.instr.unit() == Some(unit))
    }
}

/// State shared by the units during one cycle.
pub(super) struct Ctx<'a> {
    pub cycle: u64,
    pub pe: usize,
    pub cfg: &'a MachineConfig,
    pub layout: VrfLayout,
    pub l1_bytes: usize,
    pub vrf: &'a mut VrfState,
    pub budget: PortBudget,
    pub board: &'a mut Scoreboard,
    pub trace: &'a mut Trace,
    pub stats: &'a mut PeStats,
    pub progress: bool,
}

impl Ctx<'_> {
    pub fn cpr(&self) -> usize {
        self.layout.chunks_per_reg()
    }

    pub fn chunk_bytes(&self) -> usize {
        self.layout.chunk_bytes
    }

    pub fn loc(&self, slot: usize) -> ChunkLocation {
        let cpr = self.cpr();
        self.layout
            .locate_chunk(VReg((slot / cpr) as u8), slot % cpr)
            .expect("slots are validated at dispatch")
    }

    /// Port read of a slot on behalf of instruction `id`.
    pub fn read(&mut self, id: u64, slot: usize) -> Vec<u8> {
        let loc = self.loc(slot);
        self.board.mark_read(id, slot);
        self.vrf.read(loc)
    }
}

/// One processing element: scalar core, vector controller and the three vector units.
#[derive(Debug, Clone, PartialEq)]
pub struct Pe {
    index: usize,
    cfg: MachineConfig,
    layout: VrfLayout,
    code: Vec<Instr>,
    scalar: ScalarCore,
    csr: CsrState,
    vrf: VrfState,
    board: Scoreboard,
    queue: Queue,
    vau: Vau,
    vsldu: Vsldu,
    vlsu: Vlsu,
    next_id: u64,
    stats: PeStats,
    trace: Trace,
}

impl Pe {
    pub fn new(index: usize, cfg: &MachineConfig, code: Vec<Instr>, trace: bool) -> Self {
        let layout = VrfLayout::new(cfg);
        Self {
            index,
            cfg: cfg.clone(),
            layout,
            code,
            scalar: ScalarCore::default(),
            csr: CsrState::default(),
            vrf: VrfState::new(layout),
            board: Scoreboard::new(VRF_ROWS * layout.chunks_per_reg()),
            queue: Queue::default(),
            vau: Vau::default(),
            vsldu: Vsldu::default(),
            vlsu: Vlsu::new(cfg.vlsu_ports, cfg.rob_depth),
            next_id: 0,
            stats: PeStats::default(),
            trace: Trace::new(trace),
        }
    }

    /// L1 ports of this PE: the VLSU ports followed by the scalar port.
    pub fn port_count(&self) -> usize {
        self.cfg.vlsu_ports + 1
    }

    pub fn request(&self, port: usize) -> Option<MemRequest> {
        if port < self.cfg.vlsu_ports {
            self.vlsu.ports[port].pending
        } else {
            self.scalar.port
        }
    }

    /// The cluster accepted the request on `port`; its response follows later.
    pub fn grant(&mut self, port: usize) {
        if port < self.cfg.vlsu_ports {
            self.vlsu.ports[port].pending = None;
        } else {
            self.scalar.port = None;
        }
    }

    pub fn is_done(&self) -> bool {
        self.scalar.pc >= self.code.len()
            && self.scalar.memory_in_flight() == 0
            && self.queue.items.is_empty()
            && self.vau.idle()
            && self.vsldu.idle()
            && self.vlsu.idle()
            && self.board.in_flight() == 0
    }

    pub fn pc(&self) -> usize {
        self.scalar.pc
    }

    pub fn x(&self, r: XReg) -> u64 {
        self.scalar.x(r)
    }

    pub fn f(&self, r: FReg) -> u64 {
        self.scalar.f[r.0 as usize]
    }

    pub fn csr(&self) -> CsrState {
        self.csr
    }

    pub fn vrf(&self) -> &VrfState {
        &self.vrf
    }

    pub fn vrf_mut(&mut self) -> &mut VrfState {
        &mut self.vrf
    }

    pub fn stats(&self) -> PeStats {
        PeStats {
            vrf_reads: self.vrf.reads,
            vrf_writes: self.vrf.writes,
            ..self.stats
        }
    }

    pub fn chaining_violations(&self) -> u64 {
        self.board.violations()
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Trace {
        let fresh = Trace::new(self.trace.enabled());
        std::mem::replace(&mut self.trace, fresh)
    }

    /// Advances one cycle. `responses` are `(port, data)` pairs due this cycle, in port
    /// order. Returns whether anything moved.
    pub fn step(&mut self, cycle: u64, responses: &[(usize, u64)]) -> Result<bool, SimError> {
        let cb = self.layout.chunk_bytes;
        for &(port, data) in responses {
            if port < self.cfg.vlsu_ports {
                self.vlsu.respond(port, data, cb);
            } else {
                self.scalar.respond(data);
            }
        }
        let mut ctx = Ctx {
            cycle,
            pe: self.index,
            cfg: &self.cfg,
            layout: self.layout,
            l1_bytes: self.cfg.l1_bytes(),
            vrf: &mut self.vrf,
            budget: PortBudget::default(),
            board: &mut self.board,
            trace: &mut self.trace,
            stats: &mut self.stats,
            progress: !responses.is_empty(),
        };
        self.vau.step(&mut ctx, &mut self.queue)?;
        self.vsldu.step(&mut ctx, &mut self.queue);
        self.vlsu.step(&mut ctx, &mut self.queue)?;
        let mut progress = ctx.progress;

        self.vrf.end_cycle();
        for (id, unit) in self.board.end_cycle() {
            self.trace.log(cycle, unit_name(unit), "retire", format!("#{id}"));
        }
        progress |= self.dispatch(cycle)?;
        Ok(progress)
    }

    fn dispatch(&mut self, cycle: u64) -> Result<bool, SimError> {
        let Some(instr) = self.code.get(self.scalar.pc).copied() else {
            return Ok(false);
        };
        let pc = self.scalar.pc;
        let done = match instr {
            Instr::Scalar(s) => self.scalar_op(s, cycle)?,
            Instr::Vector(v) => self.vector_op(v, cycle)?,
        };
        if done {
            self.trace.log(cycle, "scalar", "dispatch", format!("{pc}: {instr}"));
        }
        Ok(done)
    }

    fn scalar_op(&mut self, s: ScalarInstr, cycle: u64) -> Result<bool, SimError> {
        let sc = &mut self.scalar;
        let pc = sc.pc;
        let ready = |regs: &[XReg]| regs.iter().all(|r| sc.x_ready(*r));
        match s {
            ScalarInstr::Li { rd, imm } => {
                if !ready(&[rd]) {
                    return Ok(false);
                }
                sc.set_x(rd, imm as u64);
                sc.pc += 1;
            }
            ScalarInstr::Add { rd, rs1, rs2 } | ScalarInstr::Mul { rd, rs1, rs2 } => {
                if !ready(&[rd, rs1, rs2]) {
                    return Ok(false);
                }
                let (a, b) = (sc.x(rs1), sc.x(rs2));
                let v = if matches!(s, ScalarInstr::Add { .. }) {
                    a.wrapping_add(b)
                } else {
                    a.wrapping_mul(b)
                };
                sc.set_x(rd, v);
                sc.pc += 1;
            }
            ScalarInstr::Addi { rd, rs1, imm } => {
                if !ready(&[rd, rs1]) {
                    return Ok(false);
                }
                let v = sc.x(rs1).wrapping_add(imm as u64);
                sc.set_x(rd, v);
                sc.pc += 1;
            }
            ScalarInstr::Bnez { rs, target } => {
                if !ready(&[rs]) {
                    return Ok(false);
                }
                sc.pc = if sc.x(rs) != 0 { target } else { pc + 1 };
            }
            ScalarInstr::Blt { rs1, rs2, target } => {
                if !ready(&[rs1, rs2]) {
                    return Ok(false);
                }
                let taken = (sc.x(rs1) as i64) < (sc.x(rs2) as i64);
                sc.pc = if taken { target } else { pc + 1 };
            }
            ScalarInstr::J { target } => sc.pc = target,
            ScalarInstr::Ld { .. } | ScalarInstr::Sd { .. } | ScalarInstr::Fl { .. } => {
                return self.scalar_memory(s, cycle);
            }
        }
        self.stats.scalar_retired += 1;
        Ok(true)
    }

    fn scalar_memory(&mut self, s: ScalarInstr, _cycle: u64) -> Result<bool, SimError> {
        // Scalar and vector memory accesses are kept in order by stalling the scalar side.
        if !self.vlsu.idle() || self.queue.has(Unit::Vlsu) {
            return Ok(false);
        }
        let sc = &mut self.scalar;
        if sc.port.is_some() || sc.memory_in_flight() >= self.cfg.scalar_lsu_depth {
            return Ok(false);
        }
        let (base, offset, len, pending, data) = match s {
            ScalarInstr::Ld { rd, base, offset } => {
                if !sc.x_ready(rd) || !sc.x_ready(base) {
                    return Ok(false);
                }
                (base, offset, WORD_BYTES, Pending::Int { rd, offset: 0 }, None)
            }
            ScalarInstr::Sd { rs2, base, offset } => {
                if !sc.x_ready(rs2) || !sc.x_ready(base) {
                    return Ok(false);
                }
                (base, offset, WORD_BYTES, Pending::Store, Some(sc.x(rs2)))
            }
            ScalarInstr::Fl {
                width,
                fd,
                base,
                offset,
            } => {
                if !sc.f_ready(fd) || !sc.x_ready(base) {
                    return Ok(false);
                }
                let pending = Pending::Float {
                    fd,
                    width,
                    offset: 0,
                };
                (base, offset, width.bytes(), pending, None)
            }
            _ => unreachable!("only memory instructions reach here"),
        };
        let addr = sc.x(base).wrapping_add(offset as u64);
        let pc = sc.pc;
        if !addr.is_multiple_of(len as u64) {
            return Err(SimError::Misaligned {
                pe: self.index,
                pc,
                addr,
                len,
            });
        }
        let size = self.cfg.l1_bytes();
        if addr.checked_add(len as u64).is_none_or(|e| e > size as u64) {
            return Err(SimError::AddressOutOfRange {
                pe: self.index,
                pc,
                addr,
                len,
                size,
            });
        }
        let off = (addr % WORD_BYTES as u64) as usize;
        let pending = match pending {
            Pending::Float { fd, width, .. } => Pending::Float {
                fd,
                width,
                offset: off,
            },
            p => p,
        };
        let req = MemRequest {
            addr: addr - off as u64,
            write: data.map(|d| WordWrite { data: d, mask: 0xFF }),
        };
        sc.request(req, pending);
        sc.pc += 1;
        self.stats.scalar_retired += 1;
        Ok(true)
    }

    fn vector_op(&mut self, v: VectorInstr, cycle: u64) -> Result<bool, SimError> {
        let pc = self.scalar.pc;
        if let VectorInstr::Vsetvli { rd, rs1, sew, lmul } = v {
            let sc = &self.scalar;
            if !sc.x_ready(rd) || !sc.x_ready(rs1) {
                return Ok(false);
            }
            let avl = if rs1 != XReg::ZERO {
                sc.x(rs1)
            } else if rd != XReg::ZERO {
                u64::MAX
            } else {
                self.csr.vl as u64
            };
            let vl = self.csr.set(avl, sew, lmul, &self.cfg);
            self.scalar.set_x(rd, vl as u64);
            self.scalar.pc += 1;
            self.stats.vector_issued += 1;
            return Ok(true);
        }

        if self.queue.items.len() >= self.cfg.ctrl_queue {
            return Ok(false);
        }
        if v.is_memory() && (self.scalar.memory_in_flight() > 0 || self.scalar.port.is_some()) {
            return Ok(false);
        }
        let sc = &self.scalar;
        let (base, stride) = match v {
            VectorInstr::Load { base, mode, .. } | VectorInstr::Store { base, mode, .. } => {
                let stride_reg = match mode {
                    AddrMode::Strided(r) => Some(r),
                    _ => None,
                };
                if !sc.x_ready(base) || !stride_reg.is_none_or(|r| sc.x_ready(r)) {
                    return Ok(false);
                }
                (sc.x(base), stride_reg.map_or(0, |r| sc.x(r)))
            }
            _ => (0, 0),
        };
        let scalar = match v {
            VectorInstr::Arith {
                src: Operand::Scalar(f),
                ..
            }
            | VectorInstr::Fma {
                src: Operand::Scalar(f),
                ..
            }
            | VectorInstr::Sdotp {
                src: Operand::Scalar(f),
                ..
            } => {
                if !sc.f_ready(f) {
                    return Ok(false);
                }
                sc.f[f.0 as usize]
            }
            _ => 0,
        };
        let is = Issued {
            id: self.next_id,
            pc,
            instr: v,
            csr: self.csr,
            scalar,
            base,
            stride,
            ready: cycle + 1,
        };
        let unit = v.unit().expect("vsetvli handled above");
        let (cb, cpr) = (self.layout.chunk_bytes, self.layout.chunks_per_reg());
        let (reads, writes) = match unit {
            Unit::Vau => vau::footprint(&is, cb, cpr),
            Unit::Vsldu => vsldu::footprint(&is, self.cfg.vlen_bytes, cb, cpr),
            Unit::Vlsu => vlsu::footprint(&is, cb, cpr),
        };
        if let Some(&slot) = reads.iter().chain(&writes).find(|s| **s >= self.board.slots()) {
            let _ = slot;
            let base = v
                .dest()
                .into_iter()
                .chain(v.vector_sources())
                .map(|r| r.0)
                .max()
                .unwrap_or(0);
            return Err(SimError::GroupOverflow {
                pe: self.index,
                pc,
                base,
            });
        }
        if let (Unit::Vlsu, VectorInstr::Load { vd, mode: AddrMode::Indexed(ix), .. }) = (unit, v) {
            if writes.iter().any(|w| reads.iter().any(|r| w / cpr == r / cpr)) {
                return Err(SimError::Register {
                    pe: self.index,
                    pc,
                    source: crate::isa::IsaError::OverlappingGroups { vd: vd.0, vs: ix.0 },
                });
            }
        }
        if let VectorInstr::Slide {
            dir: SlideDir::Up,
            vd,
            vs2,
            ..
        } = v
        {
            let span = self.csr.lmul.value() as u8;
            if vd.0 < vs2.0 + span && vs2.0 < vd.0 + span {
                return Err(SimError::Register {
                    pe: self.index,
                    pc,
                    source: crate::isa::IsaError::OverlappingGroups { vd: vd.0, vs: vs2.0 },
                });
            }
        }
        self.board.dispatch(is.id, unit, reads, writes);
        self.queue.items.push_back(is);
        self.next_id += 1;
        self.scalar.pc += 1;
        self.stats.vector_issued += 1;
        Ok(true)
    }
}

fn unit_name(unit: Unit) -> &'static str {
    match unit {
        Unit::Vau => "vau",
        Unit::Vsldu => "vsldu",
        Unit::Vlsu => "vlsu",
    }
}
