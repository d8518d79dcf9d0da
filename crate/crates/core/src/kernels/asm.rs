//! Small builder for generated assembly text.

use std::fmt::{self, Write as _};

use crate::config::WORD_BYTES;
use crate::isa::Sew;
use crate::numeric::write_elem;

/// Appends one instruction line: `emit!(code, "vle64.v v{}, (a1)", reg)`.
macro_rules! emit {
    ($code:expr, $($arg:tt)*) => {
        $code.line(format_args!($($arg)*))
    };
}
pub(super) use emit;

#[derive(Debug, Default)]
pub(super) struct Code {
    text: String,
    next_label: usize,
}

impl Code {
    pub fn line(&mut self, args: fmt::Arguments<'_>) {
        let _ = writeln!(self.text, "    {args}");
    }

    /// A label name unique within this PE.
    pub fn fresh(&mut self, stem: &str) -> String {
        self.next_label += 1;
        format!("{stem}{}", self.next_label)
    }

    pub fn place(&mut self, label: &str) {
        let _ = writeln!(self.text, "{label}:");
    }

    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.text, "    # {text}");
    }
}

/// Whole-cluster program under construction.
#[derive(Debug)]
pub(super) struct Asm {
    data: String,
    len: usize,
    pub pes: Vec<Code>,
}

impl Asm {
    pub fn new(pes: usize) -> Self {
        Self {
            data: String::new(),
            len: 0,
            pes: (0..pes).map(|_| Code::default()).collect(),
        }
    }

    pub fn bytes(&mut self, name: &str, bytes: &[u8]) -> u64 {
        let at = self.len as u64;
        let _ = writeln!(self.data, "{name}:");
        for row in bytes.chunks(4 * WORD_BYTES) {
            let words: Vec<String> = row
                .chunks(WORD_BYTES)
                .map(|w| {
                    let mut b = [0u8; WORD_BYTES];
                    b[..w.len()].copy_from_slice(w);
                    format!("{:#018x}", u64::from_le_bytes(b))
                })
                .collect();
            let _ = writeln!(self.data, "    .dword {}", words.join(", "));
        }
        self.len += bytes.len().div_ceil(WORD_BYTES) * WORD_BYTES;
        at
    }

    pub fn values(&mut self, name: &str, values: &[f64], format: Sew) -> u64 {
        let mut bytes = vec![0u8; values.len() * format.bytes()];
        for (i, v) in values.iter().enumerate() {
            write_elem(&mut bytes, format, i, *v);
        }
        self.bytes(name, &bytes)
    }

    pub fn words(&mut self, name: &str, words: &[u64]) -> u64 {
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        self.bytes(name, &bytes)
    }

    pub fn zeros(&mut self, name: &str, len: usize) -> u64 {
        let at = self.len as u64;
        let len = len.div_ceil(WORD_BYTES) * WORD_BYTES;
        let _ = writeln!(self.data, "{name}:");
        if len > 0 {
            let _ = writeln!(self.data, "    .zero {len}");
        }
        self.len += len;
        at
    }

    pub fn finish(self) -> String {
        let mut out = String::from(".data\n");
        out += &self.data;
        for (i, pe) in self.pes.iter().enumerate() {
            if pe.text.is_empty() {
                continue;
            }
            let _ = writeln!(out, ".pe {i}");
            out += &pe.text;
        }
        out
    }
}

/// Emits a barrier: publish `stage` in this PE's flag word, then wait until every
/// other PE's flag has reached it. Uses `t0`-`t2`.
pub(super) fn barrier(code: &mut Code, flags: u64, pe: usize, pes: usize, stage: usize) {
    if pes < 2 {
        return;
    }
    emit!(code, "li t0, {}", flags + (pe * WORD_BYTES) as u64);
    emit!(code, "li t1, {stage}");
    emit!(code, "sd t1, 0(t0)");
    for q in (0..pes).filter(|q| *q != pe) {
        let wait = code.fresh("wait");
        emit!(code, "li t0, {}", flags + (q * WORD_BYTES) as u64);
        code.place(&wait);
        emit!(code, "ld t2, 0(t0)");
        emit!(code, "blt t2, t1, {wait}");
    }
}
