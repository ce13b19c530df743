//! Deterministic endpoint perturbations.

use crate::coord::{self, Coord};

/// Retry budget for moving an endpoint off an excluded point.
pub const MAX_RETRIES: u32 = 64;

/// Fraction in `[0, 1)` for retry `t`, taken from the golden-ratio sequence
/// and truncated to a multiple of `2^-20` so coordinates stay short.
pub fn fraction(t: u32) -> Coord {
    let golden = 0.618_033_988_749_894_9_f64;
    let f = ((t as f64 + 1.0) * golden).fract();
    let k = (f * (1u64 << 20) as f64).floor() as i64;
    coord::ratio(k, 1 << 20)
}

/// Fraction in `[-1/2, 1/2)`.
pub fn signed_fraction(t: u32) -> Coord {
    fraction(t) - coord::ratio(1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{One, Zero};

    #[test]
    fn fractions_are_distinct_and_in_range() {
        let v: Vec<Coord> = (0..MAX_RETRIES).map(fraction).collect();
        for (i, a) in v.iter().enumerate() {
            assert!(a >= &Coord::zero() && a < &Coord::one());
            for b in &v[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}
