//! Radix-2 decimation-in-time FFT on `n` complex points.
//!
//! Real and imaginary parts live in separate arrays. A permutation pass gathers the
//! input in bit-reversed order with indexed loads; each of the `log2 n` stages then
//! splits the `n/2` butterflies across PEs. A group of butterflies gathers its top
//! and bottom operands with one indexed load per component, separates the halves
//! with a slide, computes the butterflies and recombines them with a slide before
//! one indexed store per component. PEs synchronize through flag barriers between
//! passes.

use std::f64::consts::PI;

use super::asm::{barrier, emit, Asm, Code};
use super::data::random_values;
use super::{share, ExpectedArray, KernelError, KernelSpec};
use crate::config::{MachineConfig, WORD_BYTES};
use crate::isa::Sew;

const WORD: usize = WORD_BYTES;

fn inputs(spec: &KernelSpec) -> (Vec<f64>, Vec<f64>) {
    (
        random_values(spec.seed, 0, spec.n, Sew::E64),
        random_values(spec.seed, 1, spec.n, Sew::E64),
    )
}

fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Top element index of butterfly `b` in a stage of half-span `h`.
fn top(b: usize, h: usize) -> usize {
    (b / h) * 2 * h + b % h
}

/// Byte offsets that a group of butterflies gathers: all tops, then all bottoms.
fn group_offsets(b0: usize, count: usize, h: usize) -> Vec<u64> {
    let tops = (b0..b0 + count).map(|b| top(b, h));
    let bottoms = (b0..b0 + count).map(|b| top(b, h) + h);
    tops.chain(bottoms).map(|e| (e * WORD) as u64).collect()
}

/// Groups `(first, count)` of butterflies handled by one PE in one stage.
fn groups(n: usize, pes: usize, pe: usize, per_group: usize) -> Vec<(usize, usize)> {
    let (lo, hi) = share(n / 2, pes, pe);
    (lo..hi)
        .step_by(per_group)
        .map(|b| (b, per_group.min(hi - b)))
        .collect()
}

pub(super) fn generate(spec: &KernelSpec, cfg: &MachineConfig) -> Result<String, KernelError> {
    let n = spec.n;
    let mut asm = Asm::new(cfg.pes);
    if n == 0 {
        return Ok(asm.finish());
    }
    if !n.is_power_of_two() {
        return Err(KernelError::InvalidSize {
            kind: spec.kind,
            n,
            reason: "the radix-2 FFT needs a power-of-two length",
        });
    }
    let bits = n.trailing_zeros();
    let stages = bits as usize;
    // Data, permutation table, per-stage offset and twiddle tables, flags.
    let need = (5 * n + stages * 2 * n + cfg.pes) * WORD;
    if need > cfg.l1_bytes() {
        return Err(KernelError::TooLarge {
            kind: spec.kind,
            n,
            bytes: need,
            capacity: cfg.l1_bytes(),
        });
    }

    let (xr, xi) = inputs(spec);
    let x_re = asm.values("x_re", &xr, Sew::E64);
    let x_im = asm.values("x_im", &xi, Sew::E64);
    let y_re = asm.zeros("y_re", n * WORD);
    let y_im = asm.zeros("y_im", n * WORD);
    let perm: Vec<u64> = (0..n).map(|j| (bit_reverse(j, bits) * WORD) as u64).collect();
    let perm_at = asm.words("perm", &perm);

    let vlmax = 4 * cfg.vlen_bytes / WORD;
    let per_group = vlmax / 2;
    let mut tables = Vec::with_capacity(stages);
    for s in 0..stages {
        let h = 1 << s;
        // Laid out so that a group starting at butterfly `b0` finds its offsets at
        // entry `2 * b0` and its twiddles at entry `b0`.
        let mut offsets = Vec::with_capacity(n);
        for p in 0..cfg.pes {
            for (b0, count) in groups(n, cfg.pes, p, per_group) {
                debug_assert_eq!(offsets.len(), 2 * b0);
                offsets.extend(group_offsets(b0, count, h));
            }
        }
        let angle = |b: usize| -PI * (b % h) as f64 / h as f64;
        let wr: Vec<f64> = (0..n / 2).map(|b| angle(b).cos()).collect();
        let wi: Vec<f64> = (0..n / 2).map(|b| angle(b).sin()).collect();
        tables.push(StageTables {
            h,
            offsets: asm.words(&format!("offsets{s}"), &offsets),
            wr: asm.values(&format!("wr{s}"), &wr, Sew::E64),
            wi: asm.values(&format!("wi{s}"), &wi, Sew::E64),
        });
    }
    let flags = asm.zeros("flags", cfg.pes * WORD);

    for p in 0..cfg.pes {
        let code = &mut asm.pes[p];
        let (lo, hi) = share(n, cfg.pes, p);
        code.comment("bit-reversal permutation");
        for j0 in (lo..hi).step_by(vlmax) {
            let vl = vlmax.min(hi - j0);
            emit!(code, "li a0, {vl}");
            emit!(code, "vsetvli zero, a0, e64, m4");
            emit!(code, "li a1, {}", perm_at + (j0 * WORD) as u64);
            emit!(code, "vle64.v v8, (a1)");
            for (src, dst) in [(x_re, y_re), (x_im, y_im)] {
                emit!(code, "li a2, {src}");
                emit!(code, "vluxei64.v v0, (a2), v8");
                emit!(code, "li a3, {}", dst + (j0 * WORD) as u64);
                emit!(code, "vse64.v v0, (a3)");
            }
        }
        barrier(code, flags, p, cfg.pes, 1);
        emit!(code, "li a2, {y_re}");
        emit!(code, "li a3, {y_im}");
        for (s, t) in tables.iter().enumerate() {
            code.comment(&format!("stage {s}, span {}", 2 * t.h));
            for (b0, count) in groups(n, cfg.pes, p, per_group) {
                butterflies(code, t, b0, count);
            }
            if s + 1 < stages {
                barrier(code, flags, p, cfg.pes, s + 2);
            }
        }
    }
    Ok(asm.finish())
}

struct StageTables {
    h: usize,
    offsets: u64,
    wr: u64,
    wi: u64,
}

/// `count` butterflies starting at `b0`; `a2`/`a3` hold the real/imaginary bases.
fn butterflies(code: &mut Code, t: &StageTables, b0: usize, count: usize) {
    emit!(code, "li a0, {}", 2 * count);
    emit!(code, "vsetvli zero, a0, e64, m4");
    emit!(code, "li a1, {}", t.offsets + (2 * b0 * WORD) as u64);
    emit!(code, "vle64.v v8, (a1)");
    emit!(code, "vluxei64.v v0, (a2), v8");
    emit!(code, "vluxei64.v v4, (a3), v8");
    emit!(code, "li a0, {count}");
    emit!(code, "vsetvli zero, a0, e64, m4");
    emit!(code, "vslidedown.vi v12, v0, {count}");
    emit!(code, "vslidedown.vi v16, v4, {count}");
    emit!(code, "vsetvli zero, a0, e64, m2");
    emit!(code, "li a1, {}", t.wr + (b0 * WORD) as u64);
    emit!(code, "vle64.v v18, (a1)");
    emit!(code, "li a1, {}", t.wi + (b0 * WORD) as u64);
    emit!(code, "vle64.v v20, (a1)");
    // Twiddled bottom: (br + i bi)(wr + i wi).
    emit!(code, "vfmul.vv v22, v12, v18");
    emit!(code, "vfmul.vv v14, v16, v20");
    emit!(code, "vfsub.vv v22, v22, v14");
    emit!(code, "vfmul.vv v14, v12, v20");
    emit!(code, "vfmacc.vv v14, v16, v18");
    emit!(code, "vfadd.vv v24, v0, v22");
    emit!(code, "vfsub.vv v12, v0, v22");
    emit!(code, "vfadd.vv v28, v4, v14");
    emit!(code, "vfsub.vv v16, v4, v14");
    emit!(code, "li a0, {}", 2 * count);
    emit!(code, "vsetvli zero, a0, e64, m4");
    emit!(code, "vslideup.vi v24, v12, {count}");
    emit!(code, "vslideup.vi v28, v16, {count}");
    emit!(code, "vsuxei64.v v24, (a2), v8");
    emit!(code, "vsuxei64.v v28, (a3), v8");
}

pub(super) fn oracle(spec: &KernelSpec) -> Vec<ExpectedArray> {
    if spec.n == 0 {
        return Vec::new();
    }
    let (xr, xi) = inputs(spec);
    let (re, im) = dft(&xr, &xi);
    let scale = re
        .iter()
        .zip(&im)
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max);
    ["y_re", "y_im"]
        .into_iter()
        .zip([re, im])
        .map(|(symbol, values)| ExpectedArray {
            symbol,
            format: Sew::E64,
            values,
            tolerance: 1e-9,
            scale,
        })
        .collect()
}

/// Direct evaluation of the discrete Fourier transform.
fn dft(re: &[f64], im: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = re.len();
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    for k in 0..n {
        for j in 0..n {
            let angle = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
            let (s, c) = angle.sin_cos();
            out_re[k] += re[j] * c - im[j] * s;
            out_im[k] += re[j] * s + im[j] * c;
        }
    }
    (out_re, out_im)
}
