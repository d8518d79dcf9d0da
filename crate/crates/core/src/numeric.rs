//! Floating-point element formats held in vector registers.
//!
//! Arithmetic is carried out in `f64` and rounded to the element format when a
//! result is stored. The 8-bit format is E5M2: the upper byte of an IEEE binary16.

use half::f16;

use crate::isa::Sew;

/// Rounds an `f64` to E5M2, round-to-nearest-even, and returns its encoding.
pub fn fp8_from_f64(x: f64) -> u8 {
    let h = f16::from_f64(x).to_bits();
    if f16::from_bits(h).is_nan() {
        return ((h >> 8) as u8) | 0x02;
    }
    let low = h & 0xFF;
    let mut hi = h >> 8;
    let up = if low == 0x80 {
        // A halfway binary16 value may itself be rounded; break the tie on `x`.
        let mid = f16::from_bits(h).to_f64();
        if mid == x {
            hi & 1 == 1
        } else {
            x.abs() > mid.abs()
        }
    } else {
        low > 0x80
    };
    if up {
        hi += 1;
    }
    hi as u8
}

pub fn fp8_to_f64(bits: u8) -> f64 {
    f16::from_bits((bits as u16) << 8).to_f64()
}

/// Decodes element `index` of width `sew` from little-endian `bytes`.
pub fn read_elem(bytes: &[u8], sew: Sew, index: usize) -> f64 {
    let at = index * sew.bytes();
    let b = &bytes[at..at + sew.bytes()];
    match sew {
        Sew::E64 => f64::from_le_bytes(b.try_into().unwrap()),
        Sew::E32 => f32::from_le_bytes(b.try_into().unwrap()) as f64,
        Sew::E16 => f16::from_le_bytes(b.try_into().unwrap()).to_f64(),
        Sew::E8 => fp8_to_f64(b[0]),
    }
}

/// Rounds `value` to the format of `sew` and stores it as element `index`.
pub fn write_elem(bytes: &mut [u8], sew: Sew, index: usize, value: f64) {
    let at = index * sew.bytes();
    let dst = &mut bytes[at..at + sew.bytes()];
    match sew {
        Sew::E64 => dst.copy_from_slice(&value.to_le_bytes()),
        Sew::E32 => dst.copy_from_slice(&(value as f32).to_le_bytes()),
        Sew::E16 => dst.copy_from_slice(&f16::from_f64(value).to_le_bytes()),
        Sew::E8 => dst[0] = fp8_from_f64(value),
    }
}

/// Interprets the low `sew` bits of a scalar register as one element.
pub fn scalar_elem(bits: u64, sew: Sew) -> f64 {
    read_elem(&bits.to_le_bytes(), sew, 0)
}

/// Encodes `value` in `sew` and returns it zero-extended, as a scalar load would leave it.
pub fn encode_scalar(value: f64, sew: Sew) -> u64 {
    let mut b = [0u8; 8];
    write_elem(&mut b, sew, 0, value);
    u64::from_le_bytes(b)
}

/// Rounds `value` through the element format.
pub fn quantize(value: f64, sew: Sew) -> f64 {
    scalar_elem(encode_scalar(value, sew), sew)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp8_round_trip_of_representable_values() {
        for bits in 0u8..=255 {
            let v = fp8_to_f64(bits);
            if v.is_nan() {
                assert!(fp8_to_f64(fp8_from_f64(v)).is_nan());
            } else {
                assert_eq!(fp8_from_f64(v), bits, "{bits:#x}");
            }
        }
    }

    #[test]
    fn fp8_rounds_to_nearest_even() {
        // 1.0, 1.25 are neighbours; 1.125 is the tie and goes to the even 1.0.
        assert_eq!(fp8_to_f64(fp8_from_f64(1.125)), 1.0);
        assert_eq!(fp8_to_f64(fp8_from_f64(1.125 + 1e-6)), 1.25);
        assert_eq!(fp8_to_f64(fp8_from_f64(-(1.125 + 1e-6))), -1.25);
        assert_eq!(fp8_to_f64(fp8_from_f64(1.125 - 1e-6)), 1.0);
        assert_eq!(fp8_to_f64(fp8_from_f64(1.13)), 1.25);
        assert_eq!(fp8_to_f64(fp8_from_f64(1.375)), 1.5);
    }

    #[test]
    fn element_access() {
        let mut buf = vec![0u8; 16];
        for sew in Sew::ALL {
            write_elem(&mut buf, sew, 1, -0.75);
            assert_eq!(read_elem(&buf, sew, 1), -0.75);
        }
        assert_eq!(quantize(0.1, Sew::E16), f16::from_f64(0.1).to_f64());
        assert_eq!(scalar_elem(encode_scalar(2.5, Sew::E32), Sew::E32), 2.5);
    }
}
