//! Chunk-granular dependency tracking between in-flight vector instructions.
//!
//! A "slot" is one chunk of one architectural register. Each in-flight instruction
//! lists the slots it reads and writes; a read waits for every older writer of the slot
//! (RAW), a write waits for older writers (WAW) and older readers (WAR).
//!
//! Independently of those rules, a shadow record notes which instruction last wrote
//! each slot. Every read compares it against the writer expected in program order and
//! counts mismatches as chaining violations.

use crate::isa::Unit;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    id: u64,
    unit: Unit,
    writes: Vec<usize>,
    produced: Vec<bool>,
    reads: Vec<usize>,
    consumed: Vec<bool>,
    /// Program-order writer of each read slot, fixed at dispatch.
    expected: Vec<Option<u64>>,
    issue_done: bool,
}

impl Entry {
    fn writes_pending(&self, slot: usize) -> bool {
        self.writes
            .iter()
            .zip(&self.produced)
            .any(|(s, p)| *s == slot && !p)
    }

    fn reads_pending(&self, slot: usize) -> bool {
        self.reads
            .iter()
            .zip(&self.consumed)
            .any(|(s, c)| *s == slot && !c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scoreboard {
    entries: Vec<Entry>,
    /// Youngest dispatched writer of each slot.
    latest_writer: Vec<Option<u64>>,
    /// Instruction whose write to each slot landed last.
    last_written: Vec<Option<u64>>,
    landing: Vec<(u64, usize)>,
    violations: u64,
}

impl Scoreboard {
    pub fn new(slots: usize) -> Self {
        Self {
            entries: Vec::new(),
            latest_writer: vec![None; slots],
            last_written: vec![None; slots],
            landing: Vec::new(),
            violations: 0,
        }
    }

    pub fn slots(&self) -> usize {
        self.latest_writer.len()
    }

    pub fn dispatch(&mut self, id: u64, unit: Unit, mut reads: Vec<usize>, mut writes: Vec<usize>) {
        reads.sort_unstable();
        reads.dedup();
        writes.sort_unstable();
        writes.dedup();
        let expected = reads.iter().map(|s| self.latest_writer[*s]).collect();
        for s in &writes {
            self.latest_writer[*s] = Some(id);
        }
        self.entries.push(Entry {
            id,
            unit,
            produced: vec![false; writes.len()],
            consumed: vec![false; reads.len()],
            writes,
            reads,
            expected,
            issue_done: false,
        });
    }

    fn older(&self, id: u64) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(move |e| e.id < id)
    }

    /// True when every older writer of `slot` has produced it.
    pub fn can_read(&self, id: u64, slot: usize) -> bool {
        !self.older(id).any(|e| e.writes_pending(slot))
    }

    /// True when older writers have produced `slot` and older readers have consumed it.
    pub fn can_write(&self, id: u64, slot: usize) -> bool {
        !self
            .older(id)
            .any(|e| e.writes_pending(slot) || e.reads_pending(slot))
    }

    fn entry_mut(&mut self, id: u64) -> &mut Entry {
        self.entries
            .iter_mut()
            .find(|e| e.id == id)
            .expect("instruction is in flight")
    }

    /// Records a port read of `slot` and audits it against the shadow record.
    pub fn mark_read(&mut self, id: u64, slot: usize) {
        let seen = self.last_written[slot];
        let entry = self.entry_mut(id);
        let mut bad = false;
        for i in 0..entry.reads.len() {
            if entry.reads[i] == slot {
                entry.consumed[i] = true;
                bad |= entry.expected[i] != seen;
            }
        }
        if bad {
            self.violations += 1;
        }
    }

    /// Records a write staged this cycle; it becomes visible after `end_cycle`.
    pub fn mark_written(&mut self, id: u64, slot: usize) {
        self.landing.push((id, slot));
    }

    pub fn set_issue_done(&mut self, id: u64) {
        self.entry_mut(id).issue_done = true;
    }

    /// Applies this cycle's writes and removes finished instructions, returning their ids.
    pub fn end_cycle(&mut self) -> Vec<(u64, Unit)> {
        for (id, slot) in std::mem::take(&mut self.landing) {
            self.last_written[slot] = Some(id);
            let entry = self.entry_mut(id);
            for i in 0..entry.writes.len() {
                if entry.writes[i] == slot {
                    entry.produced[i] = true;
                }
            }
        }
        let mut retired = Vec::new();
        self.entries.retain(|e| {
            let done = e.issue_done
                && e.produced.iter().all(|p| *p)
                && e.consumed.iter().all(|c| *c);
            if done {
                retired.push((e.id, e.unit));
            }
            !done
        });
        retired
    }

    pub fn in_flight(&self) -> usize {
        self.entries.len()
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_waits_for_the_producer() {
        let mut sb = Scoreboard::new(64);
        sb.dispatch(1, Unit::Vlsu, vec![], vec![0, 1]);
        sb.dispatch(2, Unit::Vau, vec![0, 1], vec![16, 17]);
        assert!(!sb.can_read(2, 0));
        sb.mark_written(1, 0);
        assert!(!sb.can_read(2, 0));
        sb.end_cycle();
        assert!(sb.can_read(2, 0));
        assert!(!sb.can_read(2, 1));
        sb.mark_read(2, 0);
        assert_eq!(sb.violations(), 0);
    }

    #[test]
    fn war_and_waw() {
        let mut sb = Scoreboard::new(64);
        sb.dispatch(1, Unit::Vau, vec![4], vec![8]);
        sb.dispatch(2, Unit::Vlsu, vec![], vec![4, 8]);
        assert!(!sb.can_write(2, 4));
        assert!(!sb.can_write(2, 8));
        sb.mark_read(1, 4);
        assert!(sb.can_write(2, 4));
        sb.mark_written(1, 8);
        sb.set_issue_done(1);
        assert_eq!(sb.end_cycle(), vec![(1, Unit::Vau)]);
        assert!(sb.can_write(2, 8));
    }

    #[test]
    fn early_read_is_a_violation() {
        let mut sb = Scoreboard::new(8);
        sb.dispatch(1, Unit::Vlsu, vec![], vec![3]);
        sb.dispatch(2, Unit::Vau, vec![3], vec![]);
        sb.mark_read(2, 3);
        assert_eq!(sb.violations(), 1);
    }
}
