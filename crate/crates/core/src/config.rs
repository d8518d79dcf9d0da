//! Architectural parameters of the cluster.

use thiserror::Error;

/// Bytes in one L1 word and in one VLSU/scalar memory port transfer.
pub const WORD_BYTES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{field} = {value} is out of range: {hint}")]
    OutOfRange {
        field: &'static str,
        value: usize,
        hint: &'static str,
    },
}

/// Single source of architectural truth for one simulated cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineConfig {
    /// Processing elements in the cluster (C).
    pub pes: usize,
    /// Double-precision FPUs per PE (F).
    pub fpus: usize,
    /// Integer units per PE (G).
    pub ipus: usize,
    /// Vector register width in bytes.
    pub vlen_bytes: usize,
    /// 64-bit VLSU ports per PE. Defaults to F.
    pub vlsu_ports: usize,
    /// L1 SRAM banks (M).
    pub l1_banks: usize,
    /// Capacity of one L1 bank in bytes.
    pub bank_bytes: usize,
    /// FPU pipeline depth.
    pub fpu_latency: u64,
    /// Outstanding VLSU responses tracked per port.
    pub rob_depth: usize,
    /// Vector instructions the controller holds before they start executing.
    pub ctrl_queue: usize,
    /// Outstanding requests of the scalar load/store unit.
    pub scalar_lsu_depth: usize,
}

impl Default for MachineConfig {
    fn default() -> Self {
        Self {
            pes: 2,
            fpus: 4,
            ipus: 1,
            vlen_bytes: 64,
            vlsu_ports: 4,
            l1_banks: 16,
            bank_bytes: 8 * 1024,
            fpu_latency: 4,
            rob_depth: 4,
            ctrl_queue: 4,
            scalar_lsu_depth: 2,
        }
    }
}

impl MachineConfig {
    /// The default cluster with a custom FPU count; ports follow F.
    pub fn with_fpus(fpus: usize) -> Self {
        Self {
            fpus,
            vlsu_ports: fpus,
            ..Self::default()
        }
    }

    /// Width of one VRF port word (64·F bits).
    pub fn chunk_bytes(&self) -> usize {
        WORD_BYTES * self.fpus
    }

    /// VRF port words per architectural register.
    pub fn chunks_per_reg(&self) -> usize {
        self.vlen_bytes / self.chunk_bytes()
    }

    pub fn l1_bytes(&self) -> usize {
        self.l1_banks * self.bank_bytes
    }

    /// L1 initiators contributed by one PE: its VLSU ports plus the scalar port.
    pub fn initiators_per_pe(&self) -> usize {
        self.vlsu_ports + 1
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, field, value, hint| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { field, value, hint })
            }
        };
        check((1..=16).contains(&self.pes), "pes", self.pes, "expected 1..=16")?;
        check(
            matches!(self.fpus, 1 | 2 | 4 | 8),
            "fpus",
            self.fpus,
            "expected one of 1, 2, 4, 8",
        )?;
        check(self.ipus == 1, "ipus", self.ipus, "only G = 1 is modelled")?;
        check(
            self.vlen_bytes.is_power_of_two() && (8..=1024).contains(&self.vlen_bytes),
            "vlen",
            self.vlen_bytes,
            "expected a power of two in 8..=1024 bytes",
        )?;
        check(
            self.vlen_bytes.is_multiple_of(2 * self.chunk_bytes()),
            "vlen",
            self.vlen_bytes,
            "each register must span at least one 64F-bit word in both VRF banks (VLEN >= 16F bytes)",
        )?;
        check(
            (1..=32).contains(&self.vlsu_ports),
            "vlsu_ports",
            self.vlsu_ports,
            "expected 1..=32",
        )?;
        check(
            self.l1_banks.is_power_of_two() && (1..=64).contains(&self.l1_banks),
            "banks",
            self.l1_banks,
            "expected a power of two in 1..=64",
        )?;
        check(
            self.bank_bytes.is_multiple_of(WORD_BYTES) && self.bank_bytes > 0,
            "bank_bytes",
            self.bank_bytes,
            "expected a positive multiple of 8",
        )?;
        check(
            self.fpu_latency >= 1,
            "fpu_latency",
            self.fpu_latency as usize,
            "expected at least one stage",
        )?;
        check(self.rob_depth >= 1, "rob_depth", self.rob_depth, "expected >= 1")?;
        check(self.ctrl_queue >= 1, "ctrl_queue", self.ctrl_queue, "expected >= 1")?;
        check(
            self.scalar_lsu_depth >= 1,
            "scalar_lsu_depth",
            self.scalar_lsu_depth,
            "expected >= 1",
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_the_reference_cluster() {
        let cfg = MachineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.chunk_bytes(), 32);
        assert_eq!(cfg.chunks_per_reg(), 2);
        assert_eq!(cfg.l1_bytes(), 128 * 1024);
        assert_eq!(cfg.initiators_per_pe(), 5);
    }

    #[test]
    fn rejects_narrow_registers() {
        let cfg = MachineConfig {
            vlen_bytes: 32,
            ..MachineConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = MachineConfig {
            pes: 0,
            ..MachineConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
