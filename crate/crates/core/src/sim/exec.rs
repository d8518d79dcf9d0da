//! Element-wise semantics of the vector arithmetic instructions, on raw register bytes.

use thiserror::Error;

use crate::isa::{ArithOp, Operand, Sew, VectorInstr};
use crate::numeric::{read_elem, scalar_elem, write_elem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("{what} is not defined for {sew}-bit elements")]
    UnsupportedWidth { what: &'static str, sew: usize },
    #[error("instruction is not executed by the arithmetic unit")]
    NotArithmetic,
}

/// First source of an arithmetic instruction: a vector operand or a broadcast scalar.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Vector(&'a [u8]),
    Scalar(u64),
}

impl<'a> Source<'a> {
    pub fn for_operand(op: Operand, vector: &'a [u8], scalar: u64) -> Self {
        match op {
            Operand::Vector(_) => Source::Vector(vector),
            Operand::Scalar(_) => Source::Scalar(scalar),
        }
    }
}

/// Operand bytes for one slice of elements (a chunk, or a whole group).
#[derive(Debug, Clone, Copy)]
pub struct ArithInputs<'a> {
    pub src: Source<'a>,
    pub vs2: &'a [u8],
    /// Old destination bytes; read by the accumulating forms.
    pub acc: &'a [u8],
}

/// Computes `elems` result elements. For `Sdotp`, `elems` counts destination (wide)
/// elements. Output has the length of `acc`; bytes past the active elements are copied
/// from it.
pub fn execute_arith(
    instr: &VectorInstr,
    sew: Sew,
    inputs: ArithInputs<'_>,
    elems: usize,
) -> Result<Vec<u8>, ExecError> {
    let mut out = inputs.acc.to_vec();
    match *instr {
        VectorInstr::Arith { op, .. } => {
            for i in 0..elems {
                let a = read_elem(inputs.vs2, sew, i);
                let b = src_elem(inputs.src, sew, i);
                let r = match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                };
                write_elem(&mut out, sew, i, r);
            }
        }
        VectorInstr::Fma { .. } => {
            for i in 0..elems {
                let a = src_elem(inputs.src, sew, i);
                let b = read_elem(inputs.vs2, sew, i);
                let d = read_elem(inputs.acc, sew, i);
                write_elem(&mut out, sew, i, a.mul_add(b, d));
            }
        }
        VectorInstr::Sdotp { .. } => {
            let wide = sew.widened().ok_or(ExecError::UnsupportedWidth {
                what: "widening sum of dot products",
                sew: sew.bits(),
            })?;
            for i in 0..elems {
                let (a0, a1) = match inputs.src {
                    Source::Vector(v) => (read_elem(v, sew, 2 * i), read_elem(v, sew, 2 * i + 1)),
                    Source::Scalar(bits) => (
                        scalar_elem(bits, sew),
                        scalar_elem(bits >> sew.bits(), sew),
                    ),
                };
                let b0 = read_elem(inputs.vs2, sew, 2 * i);
                let b1 = read_elem(inputs.vs2, sew, 2 * i + 1);
                let e = read_elem(inputs.acc, wide, i);
                write_elem(&mut out, wide, i, a0.mul_add(b0, a1 * b1) + e);
            }
        }
        _ => return Err(ExecError::NotArithmetic),
    }
    Ok(out)
}

fn src_elem(src: Source<'_>, sew: Sew, i: usize) -> f64 {
    match src {
        Source::Vector(v) => read_elem(v, sew, i),
        Source::Scalar(bits) => scalar_elem(bits, sew),
    }
}

/// Adds `elems` elements of `bytes` to `acc`, in element order.
pub fn reduce_sum(acc: f64, bytes: &[u8], sew: Sew, elems: usize) -> f64 {
    (0..elems).fold(acc, |s, i| s + read_elem(bytes, sew, i))
}

/// Element `i` of a slide result, given the source group and its element capacity.
/// `None` leaves the destination element unchanged.
pub fn slide_source_index(up: bool, shamt: usize, i: usize, vlmax: usize) -> Option<SlideSource> {
    if up {
        if i < shamt {
            None
        } else {
            Some(SlideSource::Element(i - shamt))
        }
    } else {
        match i.checked_add(shamt) {
            Some(j) if j < vlmax => Some(SlideSource::Element(j)),
            _ => Some(SlideSource::Zero),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlideSource {
    Element(usize),
    Zero,
}

/// Weighted work of one element, in units where one 64-bit FMA counts 2.
pub fn element_weight(instr: &VectorInstr, sew: Sew) -> f64 {
    let scale = sew.bits() as f64 / 64.0;
    match instr {
        VectorInstr::Fma { .. } => 2.0 * scale,
        // Two products and two sums per destination element, i.e. per pair of narrow elements.
        VectorInstr::Sdotp { .. } => 4.0 * scale,
        VectorInstr::Arith { .. } | VectorInstr::RedSum { .. } => scale,
        _ => 0.0,
    }
}

/// Raw floating-point operations of one element.
pub fn element_flops(instr: &VectorInstr) -> u64 {
    match instr {
        VectorInstr::Fma { .. } => 2,
        VectorInstr::Sdotp { .. } => 4,
        VectorInstr::Arith { .. } | VectorInstr::RedSum { .. } => 1,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{FReg, VReg};

    fn f64s(v: &[f64]) -> Vec<u8> {
        v.iter().flat_map(|x| x.to_le_bytes()).collect()
    }

    fn as_f64(b: &[u8]) -> Vec<f64> {
        b.chunks(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    }

    #[test]
    fn fma_example() {
        let fma = VectorInstr::Fma {
            vd: VReg(8),
            src: Operand::Vector(VReg(4)),
            vs2: VReg(0),
        };
        let (a, b, d) = (f64s(&[1.0, 2.0]), f64s(&[3.0, 4.0]), f64s(&[10.0, 10.0]));
        let inputs = ArithInputs {
            src: Source::Vector(&a),
            vs2: &b,
            acc: &d,
        };
        let out = execute_arith(&fma, Sew::E64, inputs, 2).unwrap();
        assert_eq!(as_f64(&out), vec![13.0, 18.0]);
    }

    #[test]
    fn sdotp_example() {
        let sdotp = VectorInstr::Sdotp {
            vd: VReg(8),
            src: Operand::Vector(VReg(4)),
            vs2: VReg(0),
        };
        let ones: Vec<u8> = [half::f16::ONE; 2].iter().flat_map(|h| h.to_le_bytes()).collect();
        let e = 2.0f32.to_le_bytes();
        let inputs = ArithInputs {
            src: Source::Vector(&ones),
            vs2: &ones,
            acc: &e,
        };
        let out = execute_arith(&sdotp, Sew::E16, inputs, 1).unwrap();
        assert_eq!(f32::from_le_bytes(out[..4].try_into().unwrap()), 4.0);

        let packed = u64::from(half::f16::ONE.to_bits()) * 0x1_0001;
        let inputs = ArithInputs {
            src: Source::Scalar(packed),
            vs2: &ones,
            acc: &e,
        };
        let out = execute_arith(&sdotp, Sew::E16, inputs, 1).unwrap();
        assert_eq!(f32::from_le_bytes(out[..4].try_into().unwrap()), 4.0);
        assert!(execute_arith(&sdotp, Sew::E64, inputs, 1).is_err());
    }

    #[test]
    fn scalar_operand_and_tail() {
        let mul = VectorInstr::Arith {
            op: ArithOp::Mul,
            vd: VReg(1),
            vs2: VReg(2),
            src: Operand::Scalar(FReg(0)),
        };
        let v = f64s(&[1.0, 2.0, 3.0]);
        let old = f64s(&[7.0, 7.0, 7.0]);
        let inputs = ArithInputs {
            src: Source::Scalar(3.0f64.to_bits()),
            vs2: &v,
            acc: &old,
        };
        let out = execute_arith(&mul, Sew::E64, inputs, 2).unwrap();
        assert_eq!(as_f64(&out), vec![3.0, 6.0, 7.0]);
    }

    #[test]
    fn reduction_and_slides() {
        assert_eq!(reduce_sum(0.0, &f64s(&[1.0, 2.0, 3.0, 4.0]), Sew::E64, 4), 10.0);
        assert_eq!(slide_source_index(false, 1, 3, 4), Some(SlideSource::Zero));
        assert_eq!(slide_source_index(false, 1, 2, 4), Some(SlideSource::Element(3)));
        assert_eq!(slide_source_index(true, 2, 1, 4), None);
        assert_eq!(slide_source_index(true, 2, 3, 4), Some(SlideSource::Element(1)));
    }
}
