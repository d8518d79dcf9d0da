//! Analytic energy model of the cluster: standard-cell-memory access costs,
//! per-cycle energy breakdown while running matmul, vector-length sweeps and the
//! Kung balance condition.
//!
//! Units: SCM coefficients produce femtojoules, everything per cycle is in
//! picojoules, efficiency is GFLOPS/W at 1 GHz.

mod fit;

use std::io::{self, Write};
use std::ops::RangeInclusive;

use thiserror::Error;

pub use fit::{fit_scm_coefficients, residual_norm_sq, FitError, ScmSample};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("SCM access needs positive dimensions, got width {width} B and capacity {capacity} B")]
    NonPositiveDimension { width: f64, capacity: f64 },
    #[error("port width {width} B exceeds capacity {capacity} B")]
    WidthExceedsCapacity { width: f64, capacity: f64 },
    #[error("vector length range {start}..={end} is empty or outside 8..=1024 bytes")]
    BadRange { start: usize, end: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
}

/// `energy = a·W + b·W·K + c·K` in fJ, for width `W` and capacity `K` in bytes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ScmCoefficients {
    pub fn eval(&self, width: f64, capacity: f64) -> f64 {
        self.a * width + self.b * width * capacity + self.c * capacity
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a: self.a * factor,
            b: self.b * factor,
            c: self.c * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmEnergyModel {
    pub read: ScmCoefficients,
    pub write: ScmCoefficients,
}

impl ScmEnergyModel {
    /// Read coefficients that reproduce the reference L0 energy of 22.7 pJ/cycle (b = 0.001792 fJ).
    pub fn reconciled() -> Self {
        Self {
            read: ScmCoefficients {
                a: 47.7588,
                b: 0.001792,
                c: 0.27497,
            },
            write: ScmCoefficients {
                a: 72.0772,
                b: 0.005721,
                c: 3.11102,
            },
        }
    }

    /// Alternative read constant b = 0.018 fJ. It overshoots the reference L0 energy
    /// (25.8 pJ/cycle) and is kept for comparison.
    pub fn alternative_read() -> Self {
        let mut m = Self::reconciled();
        m.read.b = 0.018;
        m
    }

    pub fn coefficients(&self, kind: AccessKind) -> &ScmCoefficients {
        match kind {
            AccessKind::Read => &self.read,
            AccessKind::Write => &self.write,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            read: self.read.scaled(factor),
            write: self.write.scaled(factor),
        }
    }

    /// Read energy in fJ without argument checks.
    pub fn read_fj(&self, width: f64, capacity: f64) -> f64 {
        self.read.eval(width, capacity)
    }

    pub fn write_fj(&self, width: f64, capacity: f64) -> f64 {
        self.write.eval(width, capacity)
    }
}

impl Default for ScmEnergyModel {
    fn default() -> Self {
        Self::reconciled()
    }
}

/// Energy in fJ to move `width` bytes through a port of an SCM holding `capacity` bytes.
pub fn access_energy(
    kind: AccessKind,
    width: f64,
    capacity: f64,
    model: &ScmEnergyModel,
) -> Result<f64, EnergyError> {
    if !(width > 0.0 && capacity > 0.0) {
        return Err(EnergyError::NonPositiveDimension { width, capacity });
    }
    if capacity < width {
        return Err(EnergyError::WidthExceedsCapacity { width, capacity });
    }
    Ok(model.coefficients(kind).eval(width, capacity))
}

/// Per-access energy of the L1 SRAM, pJ per 64-bit word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1EnergyModel {
    pub read_pj: f64,
    pub write_pj: f64,
}

impl Default for L1EnergyModel {
    fn default() -> Self {
        Self {
            read_pj: 4.63,
            write_pj: 5.77,
        }
    }
}

/// Which per-FMA energy to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyProfile {
    /// Pre-implementation model value, 13.31 pJ per FMA.
    #[default]
    Model,
    /// Post-layout figure, 18.1 pJ per FMA.
    Measured,
}

impl EnergyProfile {
    pub fn fpu_pj(self) -> f64 {
        match self {
            EnergyProfile::Model => 13.31,
            EnergyProfile::Measured => 18.1,
        }
    }
}

/// Inputs of the per-cycle energy model for a cluster running matmul.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterEnergyParams {
    pub pes: f64,
    pub fpus: f64,
    pub vlen_bytes: f64,
    /// Matrix dimension.
    pub n: f64,
    /// Energy per FMA, pJ.
    pub fpu_pj: f64,
    /// Energy to fetch, decode and dispatch one instruction, pJ.
    pub pe_pj: f64,
    /// Instructions in the hot loop.
    pub loop_len: f64,
    pub lmul: f64,
    pub l1: L1EnergyModel,
}

impl Default for ClusterEnergyParams {
    fn default() -> Self {
        Self {
            pes: 2.0,
            fpus: 4.0,
            vlen_bytes: 64.0,
            n: 256.0,
            fpu_pj: EnergyProfile::Model.fpu_pj(),
            pe_pj: 3.1,
            loop_len: 4.0,
            lmul: 4.0,
            l1: L1EnergyModel::default(),
        }
    }
}

impl ClusterEnergyParams {
    pub fn with_profile(profile: EnergyProfile) -> Self {
        Self {
            fpu_pj: profile.fpu_pj(),
            ..Self::default()
        }
    }

    pub fn with_vlen(&self, vlen_bytes: f64) -> Self {
        Self { vlen_bytes, ..*self }
    }

    /// Multiplies every energy constant by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            fpu_pj: self.fpu_pj * factor,
            pe_pj: self.pe_pj * factor,
            l1: L1EnergyModel {
                read_pj: self.l1.read_pj * factor,
                write_pj: self.l1.write_pj * factor,
            },
            ..*self
        }
    }

    fn port_bytes(&self) -> f64 {
        8.0 * self.fpus
    }

    fn bank_bytes(&self) -> f64 {
        16.0 * self.vlen_bytes
    }
}

pub fn fpu_energy(p: &ClusterEnergyParams) -> f64 {
    p.pes * p.fpus * p.fpu_pj
}

/// Instruction overhead per cycle. One vector instruction keeps the F FPUs busy for
/// ℓ·VLEN/(8F) cycles, and the hot-loop length cancels out.
pub fn pe_energy(p: &ClusterEnergyParams) -> f64 {
    p.pe_pj * (p.loop_len * p.pes * p.fpus * 8.0) / (p.loop_len * p.lmul * p.vlen_bytes)
}

/// Three operand reads and one result write per FMA lane group.
pub fn l0_energy(p: &ClusterEnergyParams, scm: &ScmEnergyModel) -> f64 {
    let (w, k) = (p.port_bytes(), p.bank_bytes());
    p.pes * (3.0 * scm.read_fj(w, k) + scm.write_fj(w, k)) / 1000.0
}

/// Result write-back to L1, amortized over the `n`-long dot product.
pub fn l0_to_l1_energy(p: &ClusterEnergyParams, scm: &ScmEnergyModel) -> f64 {
    let (w, k) = (p.port_bytes(), p.bank_bytes());
    (p.pes * scm.read_fj(w, k) / 1000.0 + p.pes * p.fpus * p.l1.write_pj) / p.n
}

/// Operand refills from L1, shrinking with the square root of the register capacity.
pub fn l1_to_l0_energy(p: &ClusterEnergyParams, scm: &ScmEnergyModel) -> f64 {
    let (w, k) = (p.port_bytes(), p.bank_bytes());
    let per_cycle = 2.0 * p.fpus * p.l1.read_pj + 2.0 * scm.write_fj(w, k) / 1000.0;
    p.pes * per_cycle * (64.0 / (32.0 * p.vlen_bytes)).sqrt()
}

pub fn l1_energy(p: &ClusterEnergyParams, scm: &ScmEnergyModel) -> f64 {
    l0_to_l1_energy(p, scm) + l1_to_l0_energy(p, scm)
}

/// Energy per cycle by component, pJ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub vlen_bytes: f64,
    pub fpu: f64,
    pub pe: f64,
    pub l0: f64,
    pub l1: f64,
    pub total: f64,
    /// GFLOPS/W at 1 GHz.
    pub efficiency: f64,
}

pub fn breakdown(p: &ClusterEnergyParams, scm: &ScmEnergyModel) -> EnergyBreakdown {
    let fpu = fpu_energy(p);
    let pe = pe_energy(p);
    let l0 = l0_energy(p, scm);
    let l1 = l1_energy(p, scm);
    let total = fpu + pe + l0 + l1;
    let flops = 2.0 * p.pes * p.fpus;
    EnergyBreakdown {
        vlen_bytes: p.vlen_bytes,
        fpu,
        pe,
        l0,
        l1,
        total,
        efficiency: if total > 0.0 {
            flops * 1000.0 / total
        } else {
            0.0
        },
    }
}

fn check_range(range: &RangeInclusive<usize>) -> Result<(), EnergyError> {
    let (start, end) = (*range.start(), *range.end());
    if start > end || start < 8 || end > 1024 {
        return Err(EnergyError::BadRange { start, end });
    }
    Ok(())
}

/// Breakdown at every integer vector length in `range`.
pub fn efficiency_curve(
    p: &ClusterEnergyParams,
    scm: &ScmEnergyModel,
    range: RangeInclusive<usize>,
) -> Result<Vec<EnergyBreakdown>, EnergyError> {
    check_range(&range)?;
    Ok(range
        .map(|v| breakdown(&p.with_vlen(v as f64), scm))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VlenSearch {
    /// Every byte in the range.
    #[default]
    Dense,
    /// Only powers of two in the range.
    PowersOfTwo,
}

/// Best vector length and its efficiency. Ties go to the shorter length.
pub fn optimize_vlen(
    p: &ClusterEnergyParams,
    scm: &ScmEnergyModel,
    range: RangeInclusive<usize>,
    search: VlenSearch,
) -> Result<(usize, f64), EnergyError> {
    check_range(&range)?;
    let (start, end) = (*range.start(), *range.end());
    let mut best: Option<(usize, f64)> = None;
    for v in range {
        if search == VlenSearch::PowersOfTwo && !v.is_power_of_two() {
            continue;
        }
        let eff = breakdown(&p.with_vlen(v as f64), scm).efficiency;
        if best.is_none_or(|(_, e)| eff > e) {
            best = Some((v, eff));
        }
    }
    best.ok_or(EnergyError::BadRange { start, end })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceCheck {
    pub satisfied: bool,
    /// Smallest L1 bandwidth, in words per cycle, that keeps the FPUs busy.
    pub beta_min: f64,
}

/// Kung balance for matmul with `l0_bytes` of registers per PE. With the minimal
/// 64-byte register set every FPU streams two words per cycle from L1; that demand
/// shrinks with the square root of the capacity, as in the refill energy term.
pub fn balance_check(pes: f64, fpus: f64, beta: f64, l0_bytes: f64) -> BalanceCheck {
    let beta_min = 2.0 * pes * fpus / (l0_bytes / 64.0).sqrt();
    BalanceCheck {
        satisfied: beta >= beta_min,
        beta_min,
    }
}

pub const CURVE_CSV_HEADER: &str = "vlen,e_fpu,e_pe,e_l0,e_l1,total,gflops_per_watt";

pub fn write_curve_csv<W: Write>(out: &mut W, curve: &[EnergyBreakdown]) -> io::Result<()> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for row in curve {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            row.vlen_bytes, row.fpu, row.pe, row.l0, row.l1, row.total, row.efficiency
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn scm_hand_values() {
        let m = ScmEnergyModel::reconciled();
        let r = access_energy(AccessKind::Read, 32.0, 1024.0, &m).unwrap();
        let w = access_energy(AccessKind::Write, 32.0, 1024.0, &m).unwrap();
        // 47.7588·32 + 0.001792·32·1024 + 0.27497·1024
        assert!(close(r, 1528.2816 + 58.720256 + 281.56928, 1e-9));
        assert!(close(w, 2306.4704 + 187.465728 + 3185.68448, 1e-9));
        assert!(access_energy(AccessKind::Read, 0.0, 1024.0, &m).is_err());
        assert!(access_energy(AccessKind::Read, 64.0, 32.0, &m).is_err());
    }

    #[test]
    fn reference_breakdown() {
        let p = ClusterEnergyParams::default();
        let b = breakdown(&p, &ScmEnergyModel::reconciled());
        assert!(close(b.fpu, 106.48, 1e-9));
        assert!(close(b.pe, 0.775, 1e-12));
        assert!(close(b.l0, 22.57, 0.01));
        assert!(close(b.l1, 17.31, 0.01));
        assert!(close(b.efficiency, 108.75, 0.05));
        let printed = breakdown(&p, &ScmEnergyModel::alternative_read());
        assert!(close(printed.l0, 25.76, 0.01));
    }

    #[test]
    fn pe_energy_limits() {
        let p = ClusterEnergyParams::default().with_vlen(16.0);
        assert!(close(pe_energy(&p), 3.1, 1e-12));
    }

    #[test]
    fn degenerate_cluster_has_no_efficiency() {
        let p = ClusterEnergyParams {
            pes: 0.0,
            ..Default::default()
        };
        let b = breakdown(&p, &ScmEnergyModel::reconciled());
        assert_eq!(b.total, 0.0);
        assert_eq!(b.efficiency, 0.0);
    }

    #[test]
    fn optimum() {
        let p = ClusterEnergyParams::default();
        let m = ScmEnergyModel::reconciled();
        let (v, e) = optimize_vlen(&p, &m, 8..=256, VlenSearch::Dense).unwrap();
        assert!((56..=60).contains(&v), "{v}");
        assert!(close(e, 108.8, 0.5));
        let (v, _) = optimize_vlen(&p, &m, 8..=256, VlenSearch::PowersOfTwo).unwrap();
        assert_eq!(v, 64);
        assert!(optimize_vlen(&p, &m, 9..=15, VlenSearch::PowersOfTwo).is_err());
        assert!(optimize_vlen(&p, &m, 4..=8, VlenSearch::Dense).is_err());
    }

    #[test]
    fn balance() {
        let b = balance_check(2.0, 4.0, 3.0, 2048.0);
        assert!(close(b.beta_min, 16.0 / 32f64.sqrt(), 1e-12));
        assert!(b.satisfied);
        assert!(!balance_check(2.0, 4.0, 2.5, 2048.0).satisfied);
        // Minimal register set: two words per FPU per cycle.
        assert!(close(balance_check(2.0, 4.0, 1.0, 64.0).beta_min, 16.0, 1e-12));
        assert!(close(balance_check(2.0, 4.0, 1.0, 8192.0).beta_min, b.beta_min / 2.0, 1e-12));
    }

    #[test]
    fn refill_term_turns_around_past_the_sweep() {
        let p = ClusterEnergyParams::default();
        let m = ScmEnergyModel::reconciled();
        let at = |v: f64| l1_to_l0_energy(&p.with_vlen(v), &m);
        // (A + B·V)/sqrt(V) bottoms out at V = A/B.
        let w = 32.0;
        let a = 2.0 * p.fpus * p.l1.read_pj + 2.0 * (m.write.a * w) / 1000.0;
        let b = 2.0 * 16.0 * (m.write.b * w + m.write.c) / 1000.0;
        let turn = a / b;
        assert!((390.0..400.0).contains(&turn), "{turn}");
        assert!(at(256.0) < at(200.0));
        assert!(at(turn) < at(turn - 8.0) && at(turn) < at(turn + 8.0));
        assert!(at(1024.0) > at(512.0));
    }

    #[test]
    fn csv_rows() {
        let p = ClusterEnergyParams::default();
        let curve = efficiency_curve(&p, &ScmEnergyModel::reconciled(), 64..=64).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CURVE_CSV_HEADER);
        assert!(lines[1].starts_with("64,106.480000,0.775000,"));
    }
}
