use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::isa::Sew;
use crate::numeric::quantize;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_C1A5_7E20_2024;

/// `count` values uniform in [-1, 1], rounded to `format`. Stream `stream` of the
/// seed gives independent arrays for the same seed.
pub fn random_values(seed: u64, stream: u64, count: usize, format: Sew) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count)
        .map(|_| quantize(rng.gen_range(-1.0..=1.0), format))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_bounded() {
        let a = random_values(7, 0, 100, Sew::E64);
        assert_eq!(a, random_values(7, 0, 100, Sew::E64));
        assert_ne!(a, random_values(7, 1, 100, Sew::E64));
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        let h = random_values(7, 0, 100, Sew::E16);
        assert!(h.iter().all(|v| quantize(*v, Sew::E16) == *v));
    }
}
