use std::collections::VecDeque;

use super::MemRequest;
use crate::isa::{FReg, Sew, XReg};

/// Register destination of an outstanding scalar memory access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Pending {
    Int { rd: XReg, offset: usize },
    Float { fd: FReg, width: Sew, offset: usize },
    Store,
}

/// Architectural state of the in-order scalar core and its single L1 port.
#[derive(Debug, Clone, PartialEq, Eq)]
#[derive(Default)]
pub(super) struct ScalarCore {
    pub x: [u64; 32],
    pub f: [u64; 32],
    pub pc: usize,
    x_busy: u32,
    f_busy: u32,
    pub port: Option<MemRequest>,
    outstanding: VecDeque<Pending>,
}


impl ScalarCore {
    pub fn x(&self, r: XReg) -> u64 {
        self.x[r.0 as usize]
    }

    pub fn set_x(&mut self, r: XReg, v: u64) {
        if r != XReg::ZERO {
            self.x[r.0 as usize] = v;
        }
    }

    pub fn x_ready(&self, r: XReg) -> bool {
        self.x_busy >> r.0 & 1 == 0
    }

    pub fn f_ready(&self, r: FReg) -> bool {
        self.f_busy >> r.0 & 1 == 0
    }

    pub fn memory_in_flight(&self) -> usize {
        self.outstanding.len()
    }

    /// Places a request on the port and records where its response goes.
    pub fn request(&mut self, req: MemRequest, pending: Pending) {
        match pending {
            Pending::Int { rd, .. } if rd != XReg::ZERO => self.x_busy |= 1 << rd.0,
            Pending::Float { fd, .. } => self.f_busy |= 1 << fd.0,
            _ => {}
        }
        self.port = Some(req);
        self.outstanding.push_back(pending);
    }

    pub fn respond(&mut self, data: u64) {
        match self.outstanding.pop_front().expect("response matches a request") {
            Pending::Int { rd, offset } => {
                debug_assert_eq!(offset, 0);
                self.set_x(rd, data);
                self.x_busy &= !(1 << rd.0);
            }
            Pending::Float { fd, width, offset } => {
                let bits = data >> (8 * offset);
                let mask = if width == Sew::E64 {
                    u64::MAX
                } else {
                    (1u64 << width.bits()) - 1
                };
                self.f[fd.0 as usize] = bits & mask;
                self.f_busy &= !(1 << fd.0);
            }
            Pending::Store => {}
        }
    }
}
