use std::fmt;

use crate::energy::{AccessKind, EnergyProfile, L1EnergyModel, ScmEnergyModel};

/// Activity counters of one PE.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PeStats {
    /// Cycles in which the VAU issued a chunk.
    pub vau_busy: u64,
    pub vsldu_busy: u64,
    /// Cycles in which the VLSU issued at least one request or committed a chunk.
    pub vlsu_busy: u64,
    /// Floating-point operations, one per add or multiply.
    pub flops: u64,
    /// Work normalised to the 64-bit datapath: a 64-bit FMA counts 2, narrower
    /// elements count proportionally less.
    pub weighted_flops: f64,
    pub scalar_retired: u64,
    pub vector_issued: u64,
    pub vrf_reads: u64,
    pub vrf_writes: u64,
}

impl PeStats {
    pub fn accumulate(&mut self, o: &PeStats) {
        self.vau_busy += o.vau_busy;
        self.vsldu_busy += o.vsldu_busy;
        self.vlsu_busy += o.vlsu_busy;
        self.flops += o.flops;
        self.weighted_flops += o.weighted_flops;
        self.scalar_retired += o.scalar_retired;
        self.vector_issued += o.vector_issued;
        self.vrf_reads += o.vrf_reads;
        self.vrf_writes += o.vrf_writes;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub cycles: u64,
    pub pes: usize,
    pub fpus: usize,
    pub vlen_bytes: usize,
    pub per_pe: Vec<PeStats>,
    pub l1_reads: u64,
    pub l1_writes: u64,
    /// Requests that lost L1 bank arbitration, counted once per losing cycle.
    pub l1_conflicts: u64,
    pub chaining_violations: u64,
}

/// Tally-based energy estimate, pJ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub fpu: f64,
    pub pe: f64,
    pub vrf: f64,
    pub l1: f64,
    pub total: f64,
    pub gflops_per_watt: f64,
}

impl SimReport {
    pub fn total(&self) -> PeStats {
        let mut t = PeStats::default();
        for s in &self.per_pe {
            t.accumulate(s);
        }
        t
    }

    pub fn flops_per_cycle(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.total().flops as f64 / self.cycles as f64
        }
    }

    /// Fraction of the cluster's peak 64-bit FMA throughput that was used.
    pub fn utilization(&self) -> f64 {
        if self.cycles == 0 {
            return 0.0;
        }
        let peak = 2.0 * (self.pes * self.fpus) as f64 * self.cycles as f64;
        self.total().weighted_flops / peak
    }

    /// Per-access estimate: FMA-equivalents at the profile's FPU energy, issued
    /// instructions at `pe_pj`, VRF chunk accesses through the SCM model and L1 words.
    pub fn energy(&self, profile: EnergyProfile, pe_pj: f64, scm: &ScmEnergyModel) -> EnergyEstimate {
        let t = self.total();
        let w = (8 * self.fpus) as f64;
        let k = (16 * self.vlen_bytes) as f64;
        let l1m = L1EnergyModel::default();
        let fpu = t.weighted_flops / 2.0 * profile.fpu_pj();
        let pe = (t.scalar_retired + t.vector_issued) as f64 * pe_pj;
        let vrf = (t.vrf_reads as f64 * scm.coefficients(AccessKind::Read).eval(w, k)
            + t.vrf_writes as f64 * scm.coefficients(AccessKind::Write).eval(w, k))
            / 1000.0;
        let l1 = self.l1_reads as f64 * l1m.read_pj + self.l1_writes as f64 * l1m.write_pj;
        let total = fpu + pe + vrf + l1;
        EnergyEstimate {
            fpu,
            pe,
            vrf,
            l1,
            total,
            gflops_per_watt: if total > 0.0 {
                t.flops as f64 / total * 1000.0
            } else {
                0.0
            },
        }
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.total();
        writeln!(f, "cycles            {}", self.cycles)?;
        writeln!(f, "flop/cycle        {:.3}", self.flops_per_cycle())?;
        writeln!(f, "utilization       {:.2} %", 100.0 * self.utilization())?;
        writeln!(f, "l1 reads/writes   {} / {}", self.l1_reads, self.l1_writes)?;
        writeln!(f, "l1 conflicts      {}", self.l1_conflicts)?;
        writeln!(f, "vrf reads/writes  {} / {}", t.vrf_reads, t.vrf_writes)?;
        writeln!(f, "instructions      {} scalar, {} vector", t.scalar_retired, t.vector_issued)?;
        for (i, s) in self.per_pe.iter().enumerate() {
            writeln!(
                f,
                "pe{i}: vau {} vsldu {} vlsu {} busy cycles",
                s.vau_busy, s.vsldu_busy, s.vlsu_busy
            )?;
        }
        write!(f, "chaining violations {}", self.chaining_violations)
    }
}
