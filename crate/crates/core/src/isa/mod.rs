//! Vector instruction subset, CSR semantics and the textual assembly format.
//!
//! Programs are written as assembly text: one instruction or directive per
//! line, `#` starts a comment. Vector mnemonics follow RVV 1.0 operand order.
//!
//! | mnemonic | operands |
//! |----------|----------|
//! | `vsetvli` | `rd, rs1, e{8,16,32,64}, m{1,2,4,8}` (trailing `ta`/`ma` ignored) |
//! | `vle<w>.v` / `vse<w>.v` | `vd, (rs1)` |
//! | `vlse<w>.v` / `vsse<w>.v` | `vd, (rs1), rs2` |
//! | `vluxei<w>.v` / `vsuxei<w>.v` | `vd, (rs1), vs2` (index width `w`, data width SEW) |
//! | `vfadd`, `vfsub`, `vfmul` `.vv`/`.vf` | `vd, vs2, vs1\|fs1` |
//! | `vfmacc.vv` / `.vf` | `vd, vs1\|fs1, vs2` |
//! | `vfwmacc-sdotp` | `vd, vs1\|fs1, vs2` |
//! | `vslideup.vi` / `vslidedown.vi` | `vd, vs2, uimm` |
//! | `vfredsum.vs` | `vd, vs2, vs1` |
//! | scalar | `li`, `add`, `addi`, `mul`, `bnez`, `blt`, `j`, `ld`, `sd`, `flh`, `flw`, `fld` |
//!
//! Directives: `.data`, `.text`, `.pe N` (start the code of PE `N`),
//! `.dword`, `.byte`, `.zero N`, `.align N`.

mod csr;
mod parse;
mod print;
mod types;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::MachineConfig;

pub use csr::{apply_vsetvli, register_group, vlmax, CsrState};
pub use parse::parse_program;
pub use types::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsaError {
    #[error("register index {0} exceeds 31")]
    RegisterIndex(u32),
    #[error("register group base v{base} is not a multiple of LMUL {lmul}")]
    MisalignedGroup { base: u8, lmul: u8 },
    #[error("destination group v{vd} overlaps source group v{vs}, which the instruction reads after writing")]
    OverlappingGroups { vd: u8, vs: u8 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error(transparent)]
    Register(#[from] IsaError),
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("label `{0}` defined twice")]
    DuplicateLabel(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("memory image of {size} bytes exceeds the {capacity}-byte L1")]
    ImageTooLarge { size: usize, capacity: usize },
    #[error("program has code for {pes} PEs but the cluster has {available}")]
    TooManyPes { pes: usize, available: usize },
}

/// An executable cluster program.
#[derive(Debug, Clone, Default)]
pub struct Program {
    /// Instruction list per PE; PEs without code stay idle.
    pub pes: Vec<Vec<Instr>>,
    /// Initial L1 contents starting at address 0.
    pub image: Vec<u8>,
    /// Data labels and their byte addresses.
    pub symbols: BTreeMap<String, u64>,
    /// Source line of each instruction, for diagnostics.
    pub lines: Vec<Vec<usize>>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.pes == other.pes && self.image == other.image && self.symbols == other.symbols
    }
}

impl Program {
    pub fn code(&self, pe: usize) -> &[Instr] {
        self.pes.get(pe).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn symbol(&self, name: &str) -> Option<u64> {
        self.symbols.get(name).copied()
    }

    pub fn source_line(&self, pe: usize, index: usize) -> Option<usize> {
        self.lines.get(pe)?.get(index).copied()
    }

    pub fn instruction_count(&self) -> usize {
        self.pes.iter().map(Vec::len).sum()
    }

    pub fn validate(&self, cfg: &MachineConfig) -> Result<(), ProgramError> {
        if self.image.len() > cfg.l1_bytes() {
            return Err(ProgramError::ImageTooLarge {
                size: self.image.len(),
                capacity: cfg.l1_bytes(),
            });
        }
        let used = self
            .pes
            .iter()
            .rposition(|code| !code.is_empty())
            .map_or(0, |i| i + 1);
        if used > cfg.pes {
            return Err(ProgramError::TooManyPes {
                pes: used,
                available: cfg.pes,
            });
        }
        Ok(())
    }
}
