//! Vectorized workload generators with scalar oracles.
//!
//! Each generator emits assembly text for the whole cluster: a `.data` section with
//! the inputs, the output buffers and any lookup tables, followed by one `.pe N`
//! section per processing element. Work is split row-wise (or range-wise) across
//! PEs. The oracle recomputes the expected outputs from the same seeded inputs.

mod asm;
mod conv2d;
mod data;
mod dotp;
mod fft;
mod matmul;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cluster::simulate;
use crate::config::MachineConfig;
use crate::isa::{parse_program, ParseError, Program, Sew};
use crate::numeric::read_elem;
use crate::sim::{SimError, SimOptions, SimReport};

pub use data::{random_values, DEFAULT_SEED};

/// Input format of the widening matrix multiplication; results use twice the width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NarrowFormat {
    Fp16,
    Fp8,
}

impl NarrowFormat {
    pub fn sew(self) -> Sew {
        match self {
            NarrowFormat::Fp16 => Sew::E16,
            NarrowFormat::Fp8 => Sew::E8,
        }
    }

    pub fn wide(self) -> Sew {
        self.sew().widened().expect("narrow formats widen")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Matmul,
    WidMatmul(NarrowFormat),
    Conv2d,
    Dotp,
    Fft,
}

impl KernelKind {
    pub const ALL: [KernelKind; 6] = [
        KernelKind::Matmul,
        KernelKind::WidMatmul(NarrowFormat::Fp16),
        KernelKind::WidMatmul(NarrowFormat::Fp8),
        KernelKind::Conv2d,
        KernelKind::Dotp,
        KernelKind::Fft,
    ];
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Matmul => "matmul",
            KernelKind::WidMatmul(NarrowFormat::Fp16) => "wid-matmul16",
            KernelKind::WidMatmul(NarrowFormat::Fp8) => "wid-matmul8",
            KernelKind::Conv2d => "conv2d",
            KernelKind::Dotp => "dotp",
            KernelKind::Fft => "fft",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown kernel `{0}` (expected matmul, wid-matmul16, wid-matmul8, conv2d, dotp or fft)")]
pub struct UnknownKernel(pub String);

impl FromStr for KernelKind {
    type Err = UnknownKernel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| UnknownKernel(s.to_string()))
    }
}

/// A workload instance: kernel, problem dimension and data seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub n: usize,
    pub seed: u64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, n: usize) -> Self {
        Self {
            kind,
            n,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("{kind} with n = {n}: {reason}")]
    InvalidSize {
        kind: KernelKind,
        n: usize,
        reason: &'static str,
    },
    #[error("{kind} with n = {n} needs {bytes} bytes of L1 but only {capacity} are available")]
    TooLarge {
        kind: KernelKind,
        n: usize,
        bytes: usize,
        capacity: usize,
    },
    #[error("generated program does not assemble: {0}")]
    Assembly(#[from] ParseError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A generated program together with its assembly text.
#[derive(Debug, Clone)]
pub struct GeneratedKernel {
    pub spec: KernelSpec,
    pub program: Program,
    pub source: String,
}

/// One output buffer the oracle predicts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedArray {
    /// Data label of the buffer in the generated program.
    pub symbol: &'static str,
    pub format: Sew,
    pub values: Vec<f64>,
    /// Largest accepted `|actual - expected| / max(|expected|, scale)`.
    pub tolerance: f64,
    /// Magnitude below which errors are measured in absolute terms.
    pub scale: f64,
}

/// Emits the program for `spec` on `cfg`.
pub fn gen_kernel(spec: &KernelSpec, cfg: &MachineConfig) -> Result<GeneratedKernel, KernelError> {
    cfg.validate().map_err(SimError::from)?;
    let source = match spec.kind {
        KernelKind::Matmul => matmul::generate(spec, None, cfg)?,
        KernelKind::WidMatmul(w) => matmul::generate(spec, Some(w), cfg)?,
        KernelKind::Conv2d => conv2d::generate(spec, cfg)?,
        KernelKind::Dotp => dotp::generate(spec, cfg)?,
        KernelKind::Fft => fft::generate(spec, cfg)?,
    };
    let program = parse_program(&source)?;
    if program.image.len() > cfg.l1_bytes() {
        return Err(KernelError::TooLarge {
            kind: spec.kind,
            n: spec.n,
            bytes: program.image.len(),
            capacity: cfg.l1_bytes(),
        });
    }
    Ok(GeneratedKernel {
        spec: *spec,
        program,
        source,
    })
}

/// Expected contents of every output buffer.
pub fn oracle_eval(spec: &KernelSpec) -> Vec<ExpectedArray> {
    match spec.kind {
        KernelKind::Matmul => matmul::oracle(spec, None),
        KernelKind::WidMatmul(w) => matmul::oracle(spec, Some(w)),
        KernelKind::Conv2d => conv2d::oracle(spec),
        KernelKind::Dotp => dotp::oracle(spec),
        KernelKind::Fft => fft::oracle(spec),
    }
}

/// First element outside tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub symbol: &'static str,
    pub index: usize,
    pub expected: f64,
    pub actual: f64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}] = {:e}, expected {:e}",
            self.symbol, self.index, self.actual, self.expected
        )
    }
}

#[derive(Debug, Clone)]
pub struct Validation {
    pub report: SimReport,
    /// Largest normalized error over all checked elements.
    pub max_error: f64,
    pub mismatch: Option<Mismatch>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Compares `memory` against the oracle arrays, whose addresses come from `program`.
pub fn check_outputs(program: &Program, memory: &[u8], expected: &[ExpectedArray]) -> (f64, Option<Mismatch>) {
    let mut worst = 0.0f64;
    let mut first = None;
    for arr in expected {
        let Some(base) = program.symbol(arr.symbol) else {
            if !arr.values.is_empty() && first.is_none() {
                first = Some(Mismatch {
                    symbol: arr.symbol,
                    index: 0,
                    expected: arr.values[0],
                    actual: f64::NAN,
                });
            }
            continue;
        };
        let bytes = &memory[base as usize..];
        for (i, &e) in arr.values.iter().enumerate() {
            let a = read_elem(bytes, arr.format, i);
            let err = (a - e).abs() / e.abs().max(arr.scale).max(f64::MIN_POSITIVE);
            let err = if err.is_nan() { f64::INFINITY } else { err };
            worst = worst.max(err);
            if err > arr.tolerance && first.is_none() {
                first = Some(Mismatch {
                    symbol: arr.symbol,
                    index: i,
                    expected: e,
                    actual: a,
                });
            }
        }
    }
    (worst, first)
}

/// Generates, simulates and checks one kernel.
pub fn run_and_validate(spec: &KernelSpec, cfg: &MachineConfig, opts: &SimOptions) -> Result<Validation, KernelError> {
    let kernel = gen_kernel(spec, cfg)?;
    let outcome = simulate(&kernel.program, cfg, opts)?;
    let (max_error, mismatch) = check_outputs(&kernel.program, &outcome.memory, &oracle_eval(spec));
    Ok(Validation {
        report: outcome.report,
        max_error,
        mismatch,
    })
}

/// Contiguous share `[lo, hi)` of `total` items for worker `index` of `workers`.
pub(crate) fn share(total: usize, workers: usize, index: usize) -> (usize, usize) {
    let base = total / workers;
    let extra = total % workers;
    let lo = index * base + index.min(extra);
    let hi = lo + base + usize::from(index < extra);
    (lo, hi)
}

/// Splits `rows` into consecutive blocks of at most `max` rows, as evenly as possible.
pub(crate) fn blocks(lo: usize, hi: usize, max: usize) -> Vec<(usize, usize)> {
    let rows = hi - lo;
    if rows == 0 {
        return Vec::new();
    }
    let count = rows.div_ceil(max);
    (0..count)
        .map(|b| {
            let (a, z) = share(rows, count, b);
            (lo + a, z - a)
        })
        .collect()
}
