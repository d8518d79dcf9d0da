//! Valid-region 2D convolution of an `n x n` image with a 7x7 filter.
//!
//! Output rows are split across PEs and processed in blocks of up to four rows and
//! full LMUL=4 groups of columns plus a narrower last tile. For each filter column the seven
//! weights are broadcast from scalar registers; every input row touched by the block
//! is loaded once and accumulated into each output row it contributes to.

use super::asm::{emit, Asm, Code};
use super::data::random_values;
use super::{blocks, share, ExpectedArray, KernelError, KernelSpec};
use crate::config::{MachineConfig, WORD_BYTES};
use crate::isa::Sew;

/// Filter side length.
pub const TAPS: usize = 7;
const ROWS_PER_BLOCK: usize = 4;
const WORD: usize = WORD_BYTES;

fn inputs(spec: &KernelSpec) -> (Vec<f64>, Vec<f64>) {
    (
        random_values(spec.seed, 0, spec.n * spec.n, Sew::E64),
        random_values(spec.seed, 1, TAPS * TAPS, Sew::E64),
    )
}

fn out_side(n: usize) -> usize {
    n.saturating_sub(TAPS - 1)
}

pub(super) fn generate(spec: &KernelSpec, cfg: &MachineConfig) -> Result<String, KernelError> {
    let n = spec.n;
    let mut asm = Asm::new(cfg.pes);
    if n == 0 {
        return Ok(asm.finish());
    }
    if n < TAPS {
        return Err(KernelError::InvalidSize {
            kind: spec.kind,
            n,
            reason: "the image must be at least as large as the 7x7 filter",
        });
    }
    let m = out_side(n);
    let need = (n * n + m * m + TAPS * TAPS) * WORD;
    if need > cfg.l1_bytes() {
        return Err(KernelError::TooLarge {
            kind: spec.kind,
            n,
            bytes: need,
            capacity: cfg.l1_bytes(),
        });
    }
    let (img, w) = inputs(spec);
    let img_at = asm.values("img", &img, Sew::E64);
    let w_at = asm.values("w", &w, Sew::E64);
    let out_at = asm.zeros("out", m * m * WORD);

    let vlmax = 4 * cfg.vlen_bytes / WORD;
    let geo = Geometry {
        n,
        m,
        img_at,
        w_at,
        out_at,
    };
    for p in 0..cfg.pes {
        let (lo, hi) = share(m, cfg.pes, p);
        let code = &mut asm.pes[p];
        for (o0, rows) in blocks(lo, hi, ROWS_PER_BLOCK) {
            for j0 in (0..m).step_by(vlmax) {
                block(code, &geo, o0, rows, j0, vlmax.min(m - j0));
            }
        }
    }
    Ok(asm.finish())
}

struct Geometry {
    n: usize,
    m: usize,
    img_at: u64,
    w_at: u64,
    out_at: u64,
}

fn block(code: &mut Code, g: &Geometry, o0: usize, rows: usize, j0: usize, width: usize) {
    let out_tile = g.out_at + ((o0 * g.m + j0) * WORD) as u64;
    code.comment(&format!("rows {o0}..{}, columns {j0}..{}", o0 + rows, j0 + width));
    emit!(code, "li a0, {width}");
    emit!(code, "vsetvli zero, a0, e64, m4");
    emit!(code, "li a2, {out_tile}");
    for a in 0..rows {
        emit!(code, "vle64.v v{}, (a2)", 4 * a);
        if a + 1 < rows {
            emit!(code, "addi a2, a2, {}", g.m * WORD);
        }
    }
    let mut buffer = 0;
    for c in 0..TAPS {
        emit!(code, "li a1, {}", g.w_at + (c * WORD) as u64);
        for r in 0..TAPS {
            emit!(code, "fld f{r}, {}(a1)", r * TAPS * WORD);
        }
        emit!(code, "li a3, {}", g.img_at + ((o0 * g.n + j0 + c) * WORD) as u64);
        for q in 0..rows + TAPS - 1 {
            let vb = 16 + 4 * buffer;
            buffer = (buffer + 1) % 4;
            emit!(code, "vle64.v v{vb}, (a3)");
            emit!(code, "addi a3, a3, {}", g.n * WORD);
            // Output row `a` takes input row `q` through filter row `q - a`.
            for a in q.saturating_sub(TAPS - 1)..rows.min(q + 1) {
                emit!(code, "vfmacc.vf v{}, f{}, v{vb}", 4 * a, q - a);
            }
        }
    }
    emit!(code, "li a2, {out_tile}");
    for a in 0..rows {
        emit!(code, "vse64.v v{}, (a2)", 4 * a);
        if a + 1 < rows {
            emit!(code, "addi a2, a2, {}", g.m * WORD);
        }
    }
}

pub(super) fn oracle(spec: &KernelSpec) -> Vec<ExpectedArray> {
    let (img, w) = inputs(spec);
    vec![ExpectedArray {
        symbol: "out",
        format: Sew::E64,
        values: convolve(&img, &w, spec.n),
        tolerance: 1e-10,
        scale: 0.0,
    }]
}

/// Direct convolution, summing filter columns in the outer loop as the kernel does.
fn convolve(img: &[f64], w: &[f64], n: usize) -> Vec<f64> {
    let m = out_side(n);
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = 0.0f64;
            for c in 0..TAPS {
                for r in 0..TAPS {
                    acc = img[(i + r) * n + j + c].mul_add(w[r * TAPS + c], acc);
                }
            }
            out[i * m + j] = acc;
        }
    }
    out
}
