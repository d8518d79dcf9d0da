use super::ClusterError;
use crate::config::{MachineConfig, WORD_BYTES};
use crate::energy::L1EnergyModel;
use crate::sim::MemRequest;

/// Physical location of a byte in the word-interleaved scratchpad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BankAddress {
    pub bank: usize,
    pub row: usize,
    pub offset: usize,
}

/// Bank geometry of the shared L1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpmConfig {
    pub banks: usize,
    pub bank_bytes: usize,
}

impl SpmConfig {
    pub fn new(cfg: &MachineConfig) -> Self {
        Self {
            banks: cfg.l1_banks,
            bank_bytes: cfg.bank_bytes,
        }
    }

    pub fn bytes(&self) -> usize {
        self.banks * self.bank_bytes
    }

    /// Maps a byte address; word accesses must be 8-byte aligned.
    pub fn map_address(&self, addr: u64, word_access: bool) -> Result<BankAddress, ClusterError> {
        if addr >= self.bytes() as u64 {
            return Err(ClusterError::OutOfRange {
                addr,
                size: self.bytes(),
            });
        }
        let addr = addr as usize;
        let offset = addr % WORD_BYTES;
        if word_access && offset != 0 {
            return Err(ClusterError::Misaligned { addr: addr as u64 });
        }
        let word = addr / WORD_BYTES;
        Ok(BankAddress {
            bank: word % self.banks,
            row: word / self.banks,
            offset,
        })
    }

    /// Inverse of [`SpmConfig::map_address`].
    pub fn address_of(&self, at: BankAddress) -> u64 {
        ((at.row * self.banks + at.bank) * WORD_BYTES + at.offset) as u64
    }
}

/// Per-bank round-robin arbiter over all L1 initiators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L1Arbiter {
    initiators: usize,
    /// Last initiator granted by each bank.
    last: Vec<Option<usize>>,
    pub conflicts: u64,
}

impl L1Arbiter {
    pub fn new(banks: usize, initiators: usize) -> Self {
        Self {
            initiators,
            last: vec![None; banks],
            conflicts: 0,
        }
    }

    /// `requests[i]` is the bank initiator `i` wants this cycle. Returns, per initiator,
    /// whether it was granted. Every request that loses counts as one conflict.
    pub fn arbitrate(&mut self, requests: &[Option<usize>]) -> Vec<bool> {
        debug_assert_eq!(requests.len(), self.initiators);
        let mut granted = vec![false; requests.len()];
        let n = self.initiators;
        for (bank, last) in self.last.iter_mut().enumerate() {
            let start = last.map_or(0, |l| (l + 1) % n);
            let winner = (0..n).map(|k| (start + k) % n).find(|&i| requests[i] == Some(bank));
            if let Some(w) = winner {
                granted[w] = true;
                *last = Some(w);
            }
        }
        self.conflicts += requests
            .iter()
            .zip(&granted)
            .filter(|(r, g)| r.is_some() && !**g)
            .count() as u64;
        granted
    }
}

/// Banked scratchpad contents with access and energy tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct Spm {
    geometry: SpmConfig,
    data: Vec<u8>,
    pub reads: u64,
    pub writes: u64,
    energy: L1EnergyModel,
}

impl Spm {
    pub fn new(geometry: SpmConfig, image: &[u8]) -> Result<Self, ClusterError> {
        if image.len() > geometry.bytes() {
            return Err(ClusterError::OutOfRange {
                addr: image.len() as u64,
                size: geometry.bytes(),
            });
        }
        let mut data = image.to_vec();
        data.resize(geometry.bytes(), 0);
        Ok(Self {
            geometry,
            data,
            reads: 0,
            writes: 0,
            energy: L1EnergyModel::default(),
        })
    }

    pub fn geometry(&self) -> SpmConfig {
        self.geometry
    }

    /// Serves one granted word request; writes return 0.
    pub fn access(&mut self, req: MemRequest) -> Result<u64, ClusterError> {
        self.geometry.map_address(req.addr, true)?;
        let at = req.addr as usize;
        let word = &mut self.data[at..at + WORD_BYTES];
        match req.write {
            None => {
                self.reads += 1;
                Ok(u64::from_le_bytes(word.try_into().expect("word slice")))
            }
            Some(w) => {
                self.writes += 1;
                for (i, b) in w.data.to_le_bytes().into_iter().enumerate() {
                    if w.mask >> i & 1 == 1 {
                        word[i] = b;
                    }
                }
                Ok(0)
            }
        }
    }

    pub fn energy_pj(&self) -> f64 {
        self.energy.read_pj * self.reads as f64 + self.energy.write_pj * self.writes as f64
    }

    pub fn bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::WordWrite;

    fn geometry() -> SpmConfig {
        SpmConfig::new(&MachineConfig::default())
    }

    #[test]
    fn address_mapping() {
        let g = geometry();
        let at = |a| g.map_address(a, true).unwrap();
        assert_eq!(at(0), BankAddress { bank: 0, row: 0, offset: 0 });
        assert_eq!(at(8), BankAddress { bank: 1, row: 0, offset: 0 });
        assert_eq!(at(128), BankAddress { bank: 0, row: 1, offset: 0 });
        assert_eq!(g.map_address(12, true), Err(ClusterError::Misaligned { addr: 12 }));
        assert!(g.map_address(128 * 1024, false).is_err());
        assert_eq!(g.address_of(g.map_address(1234, false).unwrap()), 1234);
    }

    #[test]
    fn distinct_banks_do_not_conflict() {
        let mut arb = L1Arbiter::new(16, 8);
        let req: Vec<_> = (0..8).map(Some).collect();
        assert!(arb.arbitrate(&req).iter().all(|g| *g));
        assert_eq!(arb.conflicts, 0);
    }

    #[test]
    fn conflicting_requests_alternate() {
        let mut arb = L1Arbiter::new(16, 2);
        let both = [Some(3), Some(3)];
        assert_eq!(arb.arbitrate(&both), vec![true, false]);
        assert_eq!(arb.conflicts, 1);
        assert_eq!(arb.arbitrate(&[None, Some(3)]), vec![false, true]);
        assert_eq!(arb.arbitrate(&both), vec![true, false]);
        assert_eq!(arb.arbitrate(&both), vec![false, true]);
        assert_eq!(arb.conflicts, 3);
    }

    #[test]
    fn access_and_energy() {
        let mut spm = Spm::new(geometry(), &[]).unwrap();
        let write = MemRequest {
            addr: 64,
            write: Some(WordWrite {
                data: 0x1122_3344_5566_7788,
                mask: 0x0F,
            }),
        };
        spm.access(write).unwrap();
        let read = MemRequest { addr: 64, write: None };
        assert_eq!(spm.access(read).unwrap(), 0x5566_7788);
        for _ in 0..999 {
            spm.access(read).unwrap();
        }
        assert!((spm.energy_pj() - (4630.0 + 5.77)).abs() < 1e-9);
    }
}
