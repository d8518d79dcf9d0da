use std::fmt;

/// Selected element width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sew {
    E8,
    E16,
    E32,
    E64,
}

impl Sew {
    pub const ALL: [Sew; 4] = [Sew::E8, Sew::E16, Sew::E32, Sew::E64];

    pub fn bits(self) -> usize {
        match self {
            Sew::E8 => 8,
            Sew::E16 => 16,
            Sew::E32 => 32,
            Sew::E64 => 64,
        }
    }

    pub fn bytes(self) -> usize {
        self.bits() / 8
    }

    pub fn from_bits(bits: usize) -> Option<Sew> {
        match bits {
            8 => Some(Sew::E8),
            16 => Some(Sew::E16),
            32 => Some(Sew::E32),
            64 => Some(Sew::E64),
            _ => None,
        }
    }

    /// The element width twice as wide, if any.
    pub fn widened(self) -> Option<Sew> {
        Sew::from_bits(self.bits() * 2)
    }
}

/// Register-group multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lmul {
    M1,
    M2,
    M4,
    M8,
}

impl Lmul {
    pub const ALL: [Lmul; 4] = [Lmul::M1, Lmul::M2, Lmul::M4, Lmul::M8];

    pub fn value(self) -> usize {
        match self {
            Lmul::M1 => 1,
            Lmul::M2 => 2,
            Lmul::M4 => 4,
            Lmul::M8 => 8,
        }
    }

    pub fn from_value(v: usize) -> Option<Lmul> {
        match v {
            1 => Some(Lmul::M1),
            2 => Some(Lmul::M2),
            4 => Some(Lmul::M4),
            8 => Some(Lmul::M8),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VReg(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XReg(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FReg(pub u8);

impl XReg {
    pub const ZERO: XReg = XReg(0);
}

const X_ABI: [&str; 32] = [
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4",
    "a5", "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4",
    "t5", "t6",
];

const F_ABI: [&str; 32] = [
    "ft0", "ft1", "ft2", "ft3", "ft4", "ft5", "ft6", "ft7", "fs0", "fs1", "fa0", "fa1", "fa2",
    "fa3", "fa4", "fa5", "fa6", "fa7", "fs2", "fs3", "fs4", "fs5", "fs6", "fs7", "fs8", "fs9",
    "fs10", "fs11", "ft8", "ft9", "ft10", "ft11",
];

impl XReg {
    pub fn parse(s: &str) -> Option<XReg> {
        if s == "fp" {
            return Some(XReg(8));
        }
        if let Some(i) = X_ABI.iter().position(|n| *n == s) {
            return Some(XReg(i as u8));
        }
        numbered(s, 'x').map(XReg)
    }
}

impl FReg {
    pub fn parse(s: &str) -> Option<FReg> {
        if let Some(i) = F_ABI.iter().position(|n| *n == s) {
            return Some(FReg(i as u8));
        }
        numbered(s, 'f').map(FReg)
    }
}

impl VReg {
    /// Parses `v<n>`; returns the raw index so callers can report indices above 31.
    pub fn parse_index(s: &str) -> Option<u32> {
        let digits = s.strip_prefix('v')?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()
    }
}

fn numbered(s: &str, prefix: char) -> Option<u8> {
    let digits = s.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n: u32 = digits.parse().ok()?;
    (n < 32).then_some(n as u8)
}

impl fmt::Display for XReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(X_ABI[self.0 as usize])
    }
}

impl fmt::Display for FReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(F_ABI[self.0 as usize])
    }
}

impl fmt::Display for VReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Second operand of a vector arithmetic instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Vector(VReg),
    Scalar(FReg),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddrMode {
    UnitStride,
    /// Byte stride held in a scalar register.
    Strided(XReg),
    /// Unordered indexed: byte offsets held in a vector register group.
    Indexed(VReg),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlideDir {
    Up,
    Down,
}

/// Coarse class of a vector instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrClass {
    ArithVv,
    ArithVf,
    Fma,
    WideningSdotp,
    Load,
    Store,
    Slide,
    Reduction,
    Vsetvli,
}

/// Functional unit a vector instruction executes on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unit {
    Vau,
    Vsldu,
    Vlsu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorInstr {
    Vsetvli {
        rd: XReg,
        rs1: XReg,
        sew: Sew,
        lmul: Lmul,
    },
    Load {
        vd: VReg,
        base: XReg,
        eew: Sew,
        mode: AddrMode,
    },
    Store {
        vs3: VReg,
        base: XReg,
        eew: Sew,
        mode: AddrMode,
    },
    /// `vd[i] = vs2[i] op src[i]`.
    Arith {
        op: ArithOp,
        vd: VReg,
        vs2: VReg,
        src: Operand,
    },
    /// `vd[i] += src[i] * vs2[i]`.
    Fma { vd: VReg, src: Operand, vs2: VReg },
    /// Widening sum of dot products over element pairs:
    /// `vd[i] += src[2i]*vs2[2i] + src[2i+1]*vs2[2i+1]`, with `vd` at twice SEW.
    Sdotp { vd: VReg, src: Operand, vs2: VReg },
    Slide {
        dir: SlideDir,
        vd: VReg,
        vs2: VReg,
        shamt: u32,
    },
    /// `vd[0] = vs1[0] + sum(vs2[0..vl])`.
    RedSum { vd: VReg, vs2: VReg, vs1: VReg },
}

impl VectorInstr {
    pub fn class(&self) -> InstrClass {
        match self {
            VectorInstr::Vsetvli { .. } => InstrClass::Vsetvli,
            VectorInstr::Load { .. } => InstrClass::Load,
            VectorInstr::Store { .. } => InstrClass::Store,
            VectorInstr::Arith {
                src: Operand::Vector(_),
                ..
            } => InstrClass::ArithVv,
            VectorInstr::Arith { .. } => InstrClass::ArithVf,
            VectorInstr::Fma { .. } => InstrClass::Fma,
            VectorInstr::Sdotp { .. } => InstrClass::WideningSdotp,
            VectorInstr::Slide { .. } => InstrClass::Slide,
            VectorInstr::RedSum { .. } => InstrClass::Reduction,
        }
    }

    /// The executing unit; `None` for configuration instructions handled by the controller.
    pub fn unit(&self) -> Option<Unit> {
        match self.class() {
            InstrClass::Vsetvli => None,
            InstrClass::Load | InstrClass::Store => Some(Unit::Vlsu),
            InstrClass::Slide => Some(Unit::Vsldu),
            _ => Some(Unit::Vau),
        }
    }

    pub fn is_memory(&self) -> bool {
        matches!(self, VectorInstr::Load { .. } | VectorInstr::Store { .. })
    }

    /// Destination vector register, if the instruction writes one.
    pub fn dest(&self) -> Option<VReg> {
        match *self {
            VectorInstr::Load { vd, .. }
            | VectorInstr::Arith { vd, .. }
            | VectorInstr::Fma { vd, .. }
            | VectorInstr::Sdotp { vd, .. }
            | VectorInstr::Slide { vd, .. }
            | VectorInstr::RedSum { vd, .. } => Some(vd),
            VectorInstr::Vsetvli { .. } | VectorInstr::Store { .. } => None,
        }
    }

    /// Vector source registers, in operand order. Accumulating forms list `vd` last.
    pub fn vector_sources(&self) -> Vec<VReg> {
        let mut out = Vec::new();
        match *self {
            VectorInstr::Vsetvli { .. } => {}
            VectorInstr::Load { mode, .. } => {
                if let AddrMode::Indexed(v) = mode {
                    out.push(v);
                }
            }
            VectorInstr::Store { vs3, mode, .. } => {
                out.push(vs3);
                if let AddrMode::Indexed(v) = mode {
                    out.push(v);
                }
            }
            VectorInstr::Arith { vs2, src, .. } => {
                out.push(vs2);
                if let Operand::Vector(v) = src {
                    out.push(v);
                }
            }
            VectorInstr::Fma { vd, src, vs2 } | VectorInstr::Sdotp { vd, src, vs2 } => {
                if let Operand::Vector(v) = src {
                    out.push(v);
                }
                out.push(vs2);
                out.push(vd);
            }
            VectorInstr::Slide { vs2, .. } => out.push(vs2),
            VectorInstr::RedSum { vs2, vs1, .. } => {
                out.push(vs2);
                out.push(vs1);
            }
        }
        out
    }
}

/// Scalar bookkeeping instructions. Branch targets are instruction indices within the PE's code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarInstr {
    Li { rd: XReg, imm: i64 },
    Add { rd: XReg, rs1: XReg, rs2: XReg },
    Addi { rd: XReg, rs1: XReg, imm: i64 },
    Mul { rd: XReg, rs1: XReg, rs2: XReg },
    Bnez { rs: XReg, target: usize },
    Blt { rs1: XReg, rs2: XReg, target: usize },
    J { target: usize },
    Ld { rd: XReg, base: XReg, offset: i64 },
    Sd { rs2: XReg, base: XReg, offset: i64 },
    /// Floating-point load of `width` bits into the low bits of `fd` (`flh`, `flw`, `fld`).
    Fl {
        width: Sew,
        fd: FReg,
        base: XReg,
        offset: i64,
    },
}

impl ScalarInstr {
    pub fn branch_target(&self) -> Option<usize> {
        match *self {
            ScalarInstr::Bnez { target, .. }
            | ScalarInstr::Blt { target, .. }
            | ScalarInstr::J { target } => Some(target),
            _ => None,
        }
    }

    pub fn is_memory(&self) -> bool {
        matches!(
            self,
            ScalarInstr::Ld { .. } | ScalarInstr::Sd { .. } | ScalarInstr::Fl { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    Scalar(ScalarInstr),
    Vector(VectorInstr),
}
