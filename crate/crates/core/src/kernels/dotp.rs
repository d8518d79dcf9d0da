//! Dot product of two length-`n` vectors.
//!
//! Each PE accumulates its contiguous share element-wise in one LMUL=4 group, folds
//! it with a vector reduction and stores the partial sum. After a flag barrier PE 0
//! loads the partials, reduces them and stores the result.

use super::asm::{barrier, emit, Asm};
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

pub(super) fn generate(spec: &KernelSpec, cfg: &MachineConfig) -> Result<String, KernelError> {
    let n = spec.n;
    let mut asm = Asm::new(cfg.pes);
    if n == 0 {
        return Ok(asm.finish());
    }
    let vlmax = 4 * cfg.vlen_bytes / WORD;
    let need = (2 * n + vlmax + 2 * cfg.pes + 1) * WORD;
    if need > cfg.l1_bytes() {
        return Err(KernelError::TooLarge {
            kind: spec.kind,
            n,
            bytes: need,
            capacity: cfg.l1_bytes(),
        });
    }
    let (x, y) = inputs(spec);
    let x_at = asm.values("x", &x, Sew::E64);
    let y_at = asm.values("y", &y, Sew::E64);
    let zero_at = asm.zeros("zero", vlmax * WORD);
    let partials_at = asm.zeros("partials", cfg.pes * WORD);
    let flags_at = asm.zeros("flags", cfg.pes * WORD);
    let result_at = asm.zeros("result", WORD);

    for p in 0..cfg.pes {
        let (lo, hi) = share(n, cfg.pes, p);
        let len = hi - lo;
        let code = &mut asm.pes[p];
        emit!(code, "li a0, {vlmax}");
        emit!(code, "vsetvli zero, a0, e64, m4");
        emit!(code, "li a1, {zero_at}");
        emit!(code, "vle64.v v16, (a1)");
        emit!(code, "vle64.v v24, (a1)");
        emit!(code, "li a1, {}", x_at + (lo * WORD) as u64);
        emit!(code, "li a2, {}", y_at + (lo * WORD) as u64);

        let pairs = len / (2 * vlmax);
        if pairs > 0 {
            let top = code.fresh("strip");
            emit!(code, "li a4, {pairs}");
            code.place(&top);
            for (vx, vy) in [(0, 4), (8, 12)] {
                emit!(code, "vle64.v v{vx}, (a1)");
                emit!(code, "vle64.v v{vy}, (a2)");
                emit!(code, "addi a1, a1, {}", vlmax * WORD);
                emit!(code, "addi a2, a2, {}", vlmax * WORD);
                emit!(code, "vfmacc.vv v16, v{vx}, v{vy}");
            }
            emit!(code, "addi a4, a4, -1");
            emit!(code, "bnez a4, {top}");
        }
        let mut rest = len - pairs * 2 * vlmax;
        while rest > 0 {
            let vl = rest.min(vlmax);
            emit!(code, "li a0, {vl}");
            emit!(code, "vsetvli zero, a0, e64, m4");
            emit!(code, "vle64.v v0, (a1)");
            emit!(code, "vle64.v v4, (a2)");
            emit!(code, "addi a1, a1, {}", vl * WORD);
            emit!(code, "addi a2, a2, {}", vl * WORD);
            emit!(code, "vfmacc.vv v16, v0, v4");
            rest -= vl;
        }

        emit!(code, "li a0, {vlmax}");
        emit!(code, "vsetvli zero, a0, e64, m4");
        emit!(code, "vfredsum.vs v20, v16, v24");
        emit!(code, "li a0, 1");
        emit!(code, "vsetvli zero, a0, e64, m1");
        emit!(code, "li a1, {}", partials_at + (p * WORD) as u64);
        emit!(code, "vse64.v v20, (a1)");
        barrier(code, flags_at, p, cfg.pes, 1);
        if p == 0 {
            emit!(code, "li a0, {}", cfg.pes);
            emit!(code, "vsetvli zero, a0, e64, m4");
            emit!(code, "li a1, {partials_at}");
            emit!(code, "vle64.v v0, (a1)");
            emit!(code, "vfredsum.vs v20, v0, v24");
            emit!(code, "li a0, 1");
            emit!(code, "vsetvli zero, a0, e64, m1");
            emit!(code, "li a1, {result_at}");
            emit!(code, "vse64.v v20, (a1)");
        }
    }
    Ok(asm.finish())
}

pub(super) fn oracle(spec: &KernelSpec) -> Vec<ExpectedArray> {
    if spec.n == 0 {
        return Vec::new();
    }
    let (x, y) = inputs(spec);
    let (sum, magnitude) = x
        .iter()
        .zip(&y)
        .fold((0.0, 0.0), |(s, m), (a, b)| (s + a * b, m + (a * b).abs()));
    vec![ExpectedArray {
        symbol: "result",
        format: Sew::E64,
        values: vec![sum],
        tolerance: 1e-10,
        scale: magnitude,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;

    #[test]
    fn oracle_scale_bounds_cancellation() {
        let spec = KernelSpec::new(KernelKind::Dotp, 100);
        let e = &oracle(&spec)[0];
        assert!(e.scale >= e.values[0].abs());
        assert!(oracle(&KernelSpec::new(KernelKind::Dotp, 0)).is_empty());
    }
}
