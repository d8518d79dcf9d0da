use super::types::{Lmul, Sew, VReg};
use super::IsaError;
use crate::config::MachineConfig;

/// Vector CSR state: the active vector length and `vtype`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsrState {
    pub vl: usize,
    pub sew: Sew,
    pub lmul: Lmul,
}

impl Default for CsrState {
    fn default() -> Self {
        Self {
            vl: 0,
            sew: Sew::E64,
            lmul: Lmul::M1,
        }
    }
}

/// Elements in one register group: ℓ·VLEN / (SEW/8).
pub fn vlmax(sew: Sew, lmul: Lmul, vlen_bytes: usize) -> usize {
    lmul.value() * vlen_bytes / sew.bytes()
}

/// Clamps the requested length to VLMAX.
pub fn apply_vsetvli(avl: u64, sew: Sew, lmul: Lmul, cfg: &MachineConfig) -> usize {
    let max = vlmax(sew, lmul, cfg.vlen_bytes);
    avl.min(max as u64) as usize
}

impl CsrState {
    /// Executes `vsetvli` against this state and returns the granted `vl`.
    pub fn set(&mut self, avl: u64, sew: Sew, lmul: Lmul, cfg: &MachineConfig) -> usize {
        self.vl = apply_vsetvli(avl, sew, lmul, cfg);
        self.sew = sew;
        self.lmul = lmul;
        self.vl
    }
}

/// Physical registers forming the group that starts at `base`.
pub fn register_group(base: VReg, lmul: Lmul) -> Result<Vec<u8>, IsaError> {
    let ell = lmul.value() as u8;
    if base.0 >= 32 {
        return Err(IsaError::RegisterIndex(base.0 as u32));
    }
    if !base.0.is_multiple_of(ell) {
        return Err(IsaError::MisalignedGroup {
            base: base.0,
            lmul: ell,
        });
    }
    Ok((base.0..base.0 + ell).collect())
}
