//! `C = A·B` for square row-major matrices.
//!
//! Each PE owns a band of rows of `C`, processed in blocks of two rows and tiles of
//! one LMUL=4 register group of columns. The accumulators stay in the VRF for the
//! whole reduction; per step of `k` one row segment of `B` is loaded and multiplied
//! by a broadcast element of `A` into every accumulator of the block.
//!
//! The widening variant keeps `B` packed by row pairs, so that narrow elements
//! `2j` and `2j+1` of packed row `k/2` hold `B[k][j]` and `B[k+1][j]`, and feeds a
//! packed pair of `A` elements as the scalar operand of the dot-product FMA.

use super::asm::{emit, Asm, Code};
use super::data::random_values;
use super::{blocks, share, ExpectedArray, KernelError, KernelSpec, NarrowFormat};
use crate::config::MachineConfig;
use crate::isa::Sew;
use crate::numeric::quantize;

const ROWS_PER_BLOCK: usize = 2;

struct Shape {
    n: usize,
    /// Element format of `A` and `B`.
    input: Sew,
    /// Element format of `C`.
    output: Sew,
    widening: bool,
}

impl Shape {
    fn new(n: usize, wid: Option<NarrowFormat>) -> Self {
        match wid {
            None => Self {
                n,
                input: Sew::E64,
                output: Sew::E64,
                widening: false,
            },
            Some(w) => Self {
                n,
                input: w.sew(),
                output: w.wide(),
                widening: true,
            },
        }
    }

    /// Input elements consumed per reduction step.
    fn kstep(&self) -> usize {
        if self.widening {
            2
        } else {
            1
        }
    }
}

fn inputs(spec: &KernelSpec, s: &Shape) -> (Vec<f64>, Vec<f64>) {
    let nn = s.n * s.n;
    (
        random_values(spec.seed, 0, nn, s.input),
        random_values(spec.seed, 1, nn, s.input),
    )
}

/// `B` with row pairs interleaved element-wise.
fn pack_pairs(b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            out[(k / 2) * 2 * n + 2 * j + k % 2] = b[k * n + j];
        }
    }
    out
}

pub(super) fn generate(spec: &KernelSpec, wid: Option<NarrowFormat>, cfg: &MachineConfig) -> Result<String, KernelError> {
    let s = Shape::new(spec.n, wid);
    let n = s.n;
    let mut asm = Asm::new(cfg.pes);
    if n == 0 {
        return Ok(asm.finish());
    }
    if s.widening && !n.is_multiple_of(2) {
        return Err(KernelError::InvalidSize {
            kind: spec.kind,
            n,
            reason: "the widening kernel pairs rows of B, so n must be even",
        });
    }
    let (ib, ob) = (s.input.bytes(), s.output.bytes());
    let need = n * n * (2 * ib + ob);
    if need > cfg.l1_bytes() {
        return Err(KernelError::TooLarge {
            kind: spec.kind,
            n,
            bytes: need,
            capacity: cfg.l1_bytes(),
        });
    }
    let (a, b) = inputs(spec, &s);
    let a_at = asm.values("a", &a, s.input);
    let b_at = if s.widening {
        asm.values("b", &pack_pairs(&b, n), s.input)
    } else {
        asm.values("b", &b, s.input)
    };
    let c_at = asm.zeros("c", n * n * ob);

    // Output columns per tile: one LMUL=4 group of accumulators.
    let tile = 4 * cfg.vlen_bytes / ob;
    for p in 0..cfg.pes {
        let (lo, hi) = share(n, cfg.pes, p);
        let code = &mut asm.pes[p];
        for (r0, rows) in blocks(lo, hi, ROWS_PER_BLOCK) {
            for j0 in (0..n).step_by(tile) {
                let w = tile.min(n - j0);
                block(code, &s, rows, w, a_at + (r0 * n * ib) as u64, b_at, c_at, r0, j0);
            }
        }
    }
    Ok(asm.finish())
}

#[allow(clippy::too_many_arguments)]
fn block(code: &mut Code, s: &Shape, rows: usize, w: usize, a_row: u64, b_at: u64, c_at: u64, r0: usize, j0: usize) {
    let n = s.n;
    let (ib, ob) = (s.input.bytes(), s.output.bytes());
    let (isew, osew) = (s.input.bits(), s.output.bits());
    let c_tile = c_at + ((r0 * n + j0) * ob) as u64;
    let (b_tile, b_row) = if s.widening {
        (b_at + (2 * j0 * ib) as u64, 2 * n * ib)
    } else {
        (b_at + (j0 * ib) as u64, n * ib)
    };
    let steps = n / s.kstep();
    let fl = match ib * s.kstep() {
        8 => "fld",
        4 => "flw",
        _ => "flh",
    };
    let fma = if s.widening { "vfwmacc-sdotp.vf" } else { "vfmacc.vf" };

    code.comment(&format!("rows {r0}..{}, columns {j0}..{}", r0 + rows, j0 + w));
    emit!(code, "li a0, {w}");
    emit!(code, "vsetvli zero, a0, e{osew}, m4");
    emit!(code, "li a2, {c_tile}");
    for r in 0..rows {
        emit!(code, "vle{osew}.v v{}, (a2)", 4 * r);
        if r + 1 < rows {
            emit!(code, "addi a2, a2, {}", n * ob);
        }
    }
    emit!(code, "li a0, {}", w * s.kstep());
    emit!(code, "vsetvli zero, a0, e{isew}, m4");
    emit!(code, "li a1, {a_row}");
    emit!(code, "li a3, {b_tile}");

    let step = |code: &mut Code, half: usize| {
        for r in 0..rows {
            emit!(code, "{fl} f{}, {}(a1)", 4 * half + r, (r * n + half * s.kstep()) * ib);
        }
        emit!(code, "vle{isew}.v v{}, (a3)", 16 + 4 * half);
        emit!(code, "addi a3, a3, {b_row}");
        for r in 0..rows {
            emit!(code, "{fma} v{}, f{}, v{}", 4 * r, 4 * half + r, 16 + 4 * half);
        }
    };
    if steps % 2 == 1 {
        step(code, 0);
        emit!(code, "addi a1, a1, {}", s.kstep() * ib);
    }
    if steps >= 2 {
        let top = code.fresh("k");
        emit!(code, "li a4, {}", steps / 2);
        code.place(&top);
        step(code, 0);
        step(code, 1);
        emit!(code, "addi a1, a1, {}", 2 * s.kstep() * ib);
        emit!(code, "addi a4, a4, -1");
        emit!(code, "bnez a4, {top}");
    }

    emit!(code, "li a0, {w}");
    emit!(code, "vsetvli zero, a0, e{osew}, m4");
    emit!(code, "li a2, {c_tile}");
    for r in 0..rows {
        emit!(code, "vse{osew}.v v{}, (a2)", 4 * r);
        if r + 1 < rows {
            emit!(code, "addi a2, a2, {}", n * ob);
        }
    }
}

pub(super) fn oracle(spec: &KernelSpec, wid: Option<NarrowFormat>) -> Vec<ExpectedArray> {
    let s = Shape::new(spec.n, wid);
    let (a, b) = inputs(spec, &s);
    let c = product(&a, &b, &s);
    let tolerance = match s.output {
        Sew::E64 => 1e-10,
        Sew::E32 => 1e-6,
        _ => 1e-2,
    };
    vec![ExpectedArray {
        symbol: "c",
        format: s.output,
        values: c,
        tolerance,
        scale: 0.0,
    }]
}

/// Reference product with the accumulation order and rounding of the kernel.
fn product(a: &[f64], b: &[f64], s: &Shape) -> Vec<f64> {
    let n = s.n;
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0f64;
            if s.widening {
                for k in (0..n).step_by(2) {
                    let (a0, a1) = (a[i * n + k], a[i * n + k + 1]);
                    let (b0, b1) = (b[k * n + j], b[(k + 1) * n + j]);
                    acc = quantize(a0.mul_add(b0, a1 * b1) + acc, s.output);
                }
            } else {
                for k in 0..n {
                    acc = a[i * n + k].mul_add(b[k * n + j], acc);
                }
            }
            c[i * n + j] = acc;
        }
    }
    c
}
