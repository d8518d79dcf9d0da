//! Untimed interpreter: every instruction completes before the next one starts.
//!
//! PEs take turns executing one instruction each, so flag-based synchronisation
//! between PEs works as in the timed model. The results serve as the functional
//! oracle for the pipelined PE.

use super::exec::{execute_arith, reduce_sum, slide_source_index, ArithInputs, SlideSource, Source};
use super::SimError;
use crate::config::{MachineConfig, WORD_BYTES};
use crate::isa::{vlmax, AddrMode, CsrState, Instr, IsaError, Operand, Program, ScalarInstr, SlideDir, VectorInstr, XReg};
use crate::numeric::{read_elem, write_elem};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePe {
    pub x: [u64; 32],
    pub f: [u64; 32],
    pub pc: usize,
    pub csr: CsrState,
    /// Architectural vector registers, register `r` at bytes `r*VLEN..(r+1)*VLEN`.
    pub vrf: Vec<u8>,
}

impl ReferencePe {
    fn new(vlen: usize) -> Self {
        Self {
            x: [0; 32],
            f: [0; 32],
            pc: 0,
            csr: CsrState::default(),
            vrf: vec![0; 32 * vlen],
        }
    }

    fn set_x(&mut self, r: XReg, v: u64) {
        if r != XReg::ZERO {
            self.x[r.0 as usize] = v;
        }
    }

    /// Bytes of `regs` registers starting at `base`.
    pub fn group(&self, base: u8, regs: usize, vlen: usize) -> &[u8] {
        let lo = base as usize * vlen;
        &self.vrf[lo..(lo + regs * vlen).min(self.vrf.len())]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOutcome {
    pub memory: Vec<u8>,
    pub pes: Vec<ReferencePe>,
    /// Instructions executed across all PEs.
    pub steps: u64,
}

/// Runs `program` to completion or until `max_steps` instructions have executed.
pub fn run_reference(program: &Program, cfg: &MachineConfig, max_steps: u64) -> Result<ReferenceOutcome, SimError> {
    cfg.validate()?;
    program.validate(cfg)?;
    let mut memory = program.image.clone();
    memory.resize(cfg.l1_bytes(), 0);
    let mut pes: Vec<ReferencePe> = (0..cfg.pes).map(|_| ReferencePe::new(cfg.vlen_bytes)).collect();
    let mut steps = 0u64;
    loop {
        let mut active = false;
        for (i, pe) in pes.iter_mut().enumerate() {
            let code = program.code(i);
            let Some(instr) = code.get(pe.pc).copied() else {
                continue;
            };
            active = true;
            if steps >= max_steps {
                return Err(SimError::CycleLimit { limit: max_steps });
            }
            let mut m = Machine {
                pe,
                memory: &mut memory,
                cfg,
                index: i,
            };
            m.execute(instr)?;
            steps += 1;
        }
        if !active {
            return Ok(ReferenceOutcome { memory, pes, steps });
        }
    }
}

struct Machine<'a> {
    pe: &'a mut ReferencePe,
    memory: &'a mut [u8],
    cfg: &'a MachineConfig,
    index: usize,
}

impl Machine<'_> {
    fn execute(&mut self, instr: Instr) -> Result<(), SimError> {
        let pc = self.pe.pc;
        self.pe.pc += 1;
        match instr {
            Instr::Scalar(s) => self.scalar(s, pc),
            Instr::Vector(v) => self.vector(v, pc),
        }
    }

    fn check(&self, pc: usize, addr: u64, len: usize) -> Result<usize, SimError> {
        if !addr.is_multiple_of(len as u64) {
            return Err(SimError::Misaligned {
                pe: self.index,
                pc,
                addr,
                len,
            });
        }
        let size = self.memory.len();
        match addr.checked_add(len as u64) {
            Some(end) if end <= size as u64 => Ok(addr as usize),
            _ => Err(SimError::AddressOutOfRange {
                pe: self.index,
                pc,
                addr,
                len,
                size,
            }),
        }
    }

    fn load(&self, pc: usize, addr: u64, len: usize) -> Result<u64, SimError> {
        let at = self.check(pc, addr, len)?;
        let mut word = [0u8; WORD_BYTES];
        word[..len].copy_from_slice(&self.memory[at..at + len]);
        Ok(u64::from_le_bytes(word))
    }

    fn scalar(&mut self, s: ScalarInstr, pc: usize) -> Result<(), SimError> {
        let pe = &mut *self.pe;
        let x = |r: XReg| pe.x[r.0 as usize];
        match s {
            ScalarInstr::Li { rd, imm } => pe.set_x(rd, imm as u64),
            ScalarInstr::Add { rd, rs1, rs2 } => {
                let v = x(rs1).wrapping_add(x(rs2));
                pe.set_x(rd, v);
            }
            ScalarInstr::Mul { rd, rs1, rs2 } => {
                let v = x(rs1).wrapping_mul(x(rs2));
                pe.set_x(rd, v);
            }
            ScalarInstr::Addi { rd, rs1, imm } => {
                let v = x(rs1).wrapping_add(imm as u64);
                pe.set_x(rd, v);
            }
            ScalarInstr::Bnez { rs, target } => {
                if x(rs) != 0 {
                    pe.pc = target;
                }
            }
            ScalarInstr::Blt { rs1, rs2, target } => {
                if (x(rs1) as i64) < (x(rs2) as i64) {
                    pe.pc = target;
                }
            }
            ScalarInstr::J { target } => pe.pc = target,
            ScalarInstr::Ld { rd, base, offset } => {
                let addr = x(base).wrapping_add(offset as u64);
                let v = self.load(pc, addr, WORD_BYTES)?;
                self.pe.set_x(rd, v);
            }
            ScalarInstr::Sd { rs2, base, offset } => {
                let addr = x(base).wrapping_add(offset as u64);
                let v = x(rs2);
                let at = self.check(pc, addr, WORD_BYTES)?;
                self.memory[at..at + WORD_BYTES].copy_from_slice(&v.to_le_bytes());
            }
            ScalarInstr::Fl {
                width,
                fd,
                base,
                offset,
            } => {
                let addr = x(base).wrapping_add(offset as u64);
                let v = self.load(pc, addr, width.bytes())?;
                self.pe.f[fd.0 as usize] = v;
            }
        }
        Ok(())
    }

    fn vector(&mut self, v: VectorInstr, pc: usize) -> Result<(), SimError> {
        let vlen = self.cfg.vlen_bytes;
        let csr = self.pe.csr;
        let (sew, vl) = (csr.sew, csr.vl);
        let overflow = |base: u8, bytes: usize| {
            if base as usize * vlen + bytes > 32 * vlen {
                Err(SimError::GroupOverflow {
                    pe: self.index,
                    pc,
                    base,
                })
            } else {
                Ok(())
            }
        };
        match v {
            VectorInstr::Vsetvli { rd, rs1, sew, lmul } => {
                let pe = &mut *self.pe;
                let avl = if rs1 != XReg::ZERO {
                    pe.x[rs1.0 as usize]
                } else if rd != XReg::ZERO {
                    u64::MAX
                } else {
                    pe.csr.vl as u64
                };
                let vl = pe.csr.set(avl, sew, lmul, self.cfg);
                pe.set_x(rd, vl as u64);
            }
            VectorInstr::Load { vd, base, eew, mode } | VectorInstr::Store { vs3: vd, base, eew, mode } => {
                let store = matches!(v, VectorInstr::Store { .. });
                let (width, index_width) = match mode {
                    AddrMode::Indexed(_) => (sew.bytes(), eew.bytes()),
                    _ => (eew.bytes(), 0),
                };
                overflow(vd.0, vl * width)?;
                if let AddrMode::Indexed(ix) = mode {
                    overflow(ix.0, vl * index_width)?;
                    let (data_end, index_end) = (
                        vd.0 as usize + (vl * width).div_ceil(vlen),
                        ix.0 as usize + (vl * index_width).div_ceil(vlen),
                    );
                    if !store && (vd.0 as usize) < index_end && (ix.0 as usize) < data_end {
                        return Err(SimError::Register {
                            pe: self.index,
                            pc,
                            source: IsaError::OverlappingGroups { vd: vd.0, vs: ix.0 },
                        });
                    }
                }
                let base_addr = self.pe.x[base.0 as usize];
                let mut data = self.pe.vrf[vd.0 as usize * vlen..][..vl * width].to_vec();
                let index = match mode {
                    AddrMode::Indexed(ix) => self.pe.vrf[ix.0 as usize * vlen..][..vl * index_width].to_vec(),
                    _ => Vec::new(),
                };
                for i in 0..vl {
                    let addr = match mode {
                        AddrMode::UnitStride => base_addr.wrapping_add((i * width) as u64),
                        AddrMode::Strided(r) => {
                            base_addr.wrapping_add((i as u64).wrapping_mul(self.pe.x[r.0 as usize]))
                        }
                        AddrMode::Indexed(_) => {
                            let mut w = [0u8; 8];
                            w[..index_width].copy_from_slice(&index[i * index_width..(i + 1) * index_width]);
                            base_addr.wrapping_add(u64::from_le_bytes(w))
                        }
                    };
                    let at = self.check(pc, addr, width)?;
                    let elem = &mut data[i * width..(i + 1) * width];
                    if store {
                        self.memory[at..at + width].copy_from_slice(elem);
                    } else {
                        elem.copy_from_slice(&self.memory[at..at + width]);
                    }
                }
                if !store {
                    self.pe.vrf[vd.0 as usize * vlen..][..vl * width].copy_from_slice(&data);
                }
            }
            VectorInstr::Arith { vd, vs2, src, .. }
            | VectorInstr::Fma { vd, src, vs2 }
            | VectorInstr::Sdotp { vd, src, vs2 } => {
                let bytes = vl * sew.bytes();
                let srcv = match src {
                    Operand::Vector(r) => Some(r),
                    Operand::Scalar(_) => None,
                };
                for r in [Some(vd), Some(vs2), srcv].into_iter().flatten() {
                    overflow(r.0, bytes)?;
                }
                let pe = &*self.pe;
                let grp = |r: u8| pe.vrf[r as usize * vlen..][..bytes].to_vec();
                let (vs2b, accb) = (grp(vs2.0), grp(vd.0));
                let srcb = srcv.map(|r| grp(r.0)).unwrap_or_default();
                let scalar = match src {
                    Operand::Scalar(f) => pe.f[f.0 as usize],
                    Operand::Vector(_) => 0,
                };
                let elems = if matches!(v, VectorInstr::Sdotp { .. }) { vl / 2 } else { vl };
                let inputs = ArithInputs {
                    src: Source::for_operand(src, &srcb, scalar),
                    vs2: &vs2b,
                    acc: &accb,
                };
                let out = execute_arith(&v, sew, inputs, elems).map_err(|source| SimError::Exec {
                    pe: self.index,
                    pc,
                    source,
                })?;
                self.pe.vrf[vd.0 as usize * vlen..][..out.len()].copy_from_slice(&out);
            }
            VectorInstr::Slide { dir, vd, vs2, shamt } => {
                let regs = csr.lmul.value() as u8;
                if dir == SlideDir::Up && vd.0 < vs2.0 + regs && vs2.0 < vd.0 + regs {
                    return Err(SimError::Register {
                        pe: self.index,
                        pc,
                        source: IsaError::OverlappingGroups { vd: vd.0, vs: vs2.0 },
                    });
                }
                let max = vlmax(sew, csr.lmul, vlen);
                let eb = sew.bytes();
                let read_len = match dir {
                    SlideDir::Up => vl,
                    SlideDir::Down => (vl + shamt as usize).min(max),
                };
                overflow(vd.0, vl * eb)?;
                overflow(vs2.0, read_len * eb)?;
                let src = self.pe.vrf[vs2.0 as usize * vlen..][..read_len * eb].to_vec();
                let dst = &mut self.pe.vrf[vd.0 as usize * vlen..][..vl * eb];
                for i in 0..vl {
                    match slide_source_index(dir == SlideDir::Up, shamt as usize, i, max) {
                        None => {}
                        Some(SlideSource::Zero) => dst[i * eb..(i + 1) * eb].fill(0),
                        Some(SlideSource::Element(j)) => {
                            dst[i * eb..(i + 1) * eb].copy_from_slice(&src[j * eb..(j + 1) * eb]);
                        }
                    }
                }
            }
            VectorInstr::RedSum { vd, vs2, vs1 } => {
                if vl == 0 {
                    return Ok(());
                }
                overflow(vs2.0, vl * sew.bytes())?;
                let pe = &mut *self.pe;
                let init = read_elem(&pe.vrf[vs1.0 as usize * vlen..], sew, 0);
                let sum = reduce_sum(init, &pe.vrf[vs2.0 as usize * vlen..], sew, vl);
                write_elem(&mut pe.vrf[vd.0 as usize * vlen..], sew, 0, sum);
            }
        }
        Ok(())
    }
}
