use std::collections::BTreeSet;
use std::fmt;

use super::types::*;
use super::Program;

fn mem_suffix(eew: Sew) -> usize {
    eew.bits()
}

impl fmt::Display for VectorInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VectorInstr::Vsetvli { rd, rs1, sew, lmul } => write!(
                f,
                "vsetvli {rd}, {rs1}, e{}, m{}",
                sew.bits(),
                lmul.value()
            ),
            VectorInstr::Load {
                vd,
                base,
                eew,
                mode,
            } => match mode {
                AddrMode::UnitStride => write!(f, "vle{}.v {vd}, ({base})", mem_suffix(eew)),
                AddrMode::Strided(rs2) => {
                    write!(f, "vlse{}.v {vd}, ({base}), {rs2}", mem_suffix(eew))
                }
                AddrMode::Indexed(vs2) => {
                    write!(f, "vluxei{}.v {vd}, ({base}), {vs2}", mem_suffix(eew))
                }
            },
            VectorInstr::Store {
                vs3,
                base,
                eew,
                mode,
            } => match mode {
                AddrMode::UnitStride => write!(f, "vse{}.v {vs3}, ({base})", mem_suffix(eew)),
                AddrMode::Strided(rs2) => {
                    write!(f, "vsse{}.v {vs3}, ({base}), {rs2}", mem_suffix(eew))
                }
                AddrMode::Indexed(vs2) => {
                    write!(f, "vsuxei{}.v {vs3}, ({base}), {vs2}", mem_suffix(eew))
                }
            },
            VectorInstr::Arith { op, vd, vs2, src } => {
                let name = match op {
                    ArithOp::Add => "vfadd",
                    ArithOp::Sub => "vfsub",
                    ArithOp::Mul => "vfmul",
                };
                match src {
                    Operand::Vector(v) => write!(f, "{name}.vv {vd}, {vs2}, {v}"),
                    Operand::Scalar(r) => write!(f, "{name}.vf {vd}, {vs2}, {r}"),
                }
            }
            VectorInstr::Fma { vd, src, vs2 } => match src {
                Operand::Vector(v) => write!(f, "vfmacc.vv {vd}, {v}, {vs2}"),
                Operand::Scalar(r) => write!(f, "vfmacc.vf {vd}, {r}, {vs2}"),
            },
            VectorInstr::Sdotp { vd, src, vs2 } => match src {
                Operand::Vector(v) => write!(f, "vfwmacc-sdotp {vd}, {v}, {vs2}"),
                Operand::Scalar(r) => write!(f, "vfwmacc-sdotp {vd}, {r}, {vs2}"),
            },
            VectorInstr::Slide {
                dir,
                vd,
                vs2,
                shamt,
            } => {
                let name = match dir {
                    SlideDir::Up => "vslideup.vi",
                    SlideDir::Down => "vslidedown.vi",
                };
                write!(f, "{name} {vd}, {vs2}, {shamt}")
            }
            VectorInstr::RedSum { vd, vs2, vs1 } => write!(f, "vfredsum.vs {vd}, {vs2}, {vs1}"),
        }
    }
}

impl fmt::Display for ScalarInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScalarInstr::Li { rd, imm } => write!(f, "li {rd}, {imm}"),
            ScalarInstr::Add { rd, rs1, rs2 } => write!(f, "add {rd}, {rs1}, {rs2}"),
            ScalarInstr::Addi { rd, rs1, imm } => write!(f, "addi {rd}, {rs1}, {imm}"),
            ScalarInstr::Mul { rd, rs1, rs2 } => write!(f, "mul {rd}, {rs1}, {rs2}"),
            ScalarInstr::Bnez { rs, target } => write!(f, "bnez {rs}, .L{target}"),
            ScalarInstr::Blt { rs1, rs2, target } => write!(f, "blt {rs1}, {rs2}, .L{target}"),
            ScalarInstr::J { target } => write!(f, "j .L{target}"),
            ScalarInstr::Ld { rd, base, offset } => write!(f, "ld {rd}, {offset}({base})"),
            ScalarInstr::Sd { rs2, base, offset } => write!(f, "sd {rs2}, {offset}({base})"),
            ScalarInstr::Fl {
                width,
                fd,
                base,
                offset,
            } => {
                let name = match width {
                    Sew::E16 => "flh",
                    Sew::E32 => "flw",
                    _ => "fld",
                };
                write!(f, "{name} {fd}, {offset}({base})")
            }
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Scalar(s) => s.fmt(f),
            Instr::Vector(v) => v.fmt(f),
        }
    }
}

fn write_bytes(f: &mut fmt::Formatter<'_>, bytes: &[u8], start: usize) -> fmt::Result {
    let zero_run = |pos: usize| bytes[pos..].iter().take_while(|b| **b == 0).count();
    let mut pos = 0;
    while pos < bytes.len() {
        let zeros = zero_run(pos);
        if zeros >= 16 || (zeros > 0 && pos + zeros == bytes.len()) {
            writeln!(f, "    .zero {zeros}")?;
            pos += zeros;
        } else if (start + pos).is_multiple_of(8) && pos + 8 <= bytes.len() {
            let mut words = Vec::new();
            while words.len() < 4 && pos + 8 <= bytes.len() && (words.is_empty() || zero_run(pos) < 16) {
                let word = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
                words.push(format!("0x{word:016x}"));
                pos += 8;
            }
            writeln!(f, "    .dword {}", words.join(", "))?;
        } else {
            writeln!(f, "    .byte {}", bytes[pos])?;
            pos += 1;
        }
    }
    Ok(())
}

/// Emits assembly that parses back to an equal program.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.image.is_empty() || !self.symbols.is_empty() {
            writeln!(f, ".data")?;
            let mut by_addr: Vec<(u64, &str)> = self
                .symbols
                .iter()
                .map(|(name, addr)| (*addr, name.as_str()))
                .collect();
            by_addr.sort();
            let mut cursor = 0usize;
            for (addr, name) in by_addr {
                let addr = addr as usize;
                if addr > cursor && cursor < self.image.len() {
                    let end = addr.min(self.image.len());
                    write_bytes(f, &self.image[cursor..end], cursor)?;
                    cursor = end;
                }
                writeln!(f, "{name}:")?;
            }
            if cursor < self.image.len() {
                write_bytes(f, &self.image[cursor..], cursor)?;
            }
        }
        for (pe, code) in self.pes.iter().enumerate() {
            writeln!(f, ".pe {pe}")?;
            let targets: BTreeSet<usize> = code
                .iter()
                .filter_map(|i| match i {
                    Instr::Scalar(s) => s.branch_target(),
                    Instr::Vector(_) => None,
                })
                .collect();
            for (idx, instr) in code.iter().enumerate() {
                if targets.contains(&idx) {
                    writeln!(f, ".L{idx}:")?;
                }
                writeln!(f, "    {instr}")?;
            }
            if targets.contains(&code.len()) {
                writeln!(f, ".L{}:", code.len())?;
            }
        }
        Ok(())
    }
}
