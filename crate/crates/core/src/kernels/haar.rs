//! Haar partial-sum kernels on `[0, 1)`.
//!
//! `S_1 f = E_0 f` and, for `n = 2^j + m` with `0 ≤ m < 2^j`, `S_n f(x)` is
//! the average of `f` over the level-`(j+1)` dyadic cell of `x` when `x`
//! lies in one of the first `m` level-`j` cells, and over its level-`j`
//! cell otherwise. All evaluations are exact in rational arithmetic.

use num::bigint::{BigInt, BigUint};
use num::{Integer, One, ToPrimitive, Zero};

use crate::coord::{self, Coord, Index};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

use super::{Domain, KernelFamily, Shape};

/// Cap on breakpoints enumerated for one window.
pub const MAX_BREAKPOINTS: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct HaarDyadic {
    domain: Domain,
}

impl Default for HaarDyadic {
    fn default() -> Self {
        Self::new()
    }
}

/// `n = 2^j + m`.
fn decompose(n: &Index) -> (u64, BigUint) {
    let j = n.log2().expect("haar index is positive");
    let m = &n.0 - (BigUint::one() << j as usize);
    (j, m)
}

/// `floor(x * 2^level)`.
fn scaled_floor(x: &Coord, level: u64) -> BigInt {
    (x.numer() << level as usize).div_floor(x.denom())
}

fn grid_point(k: &BigInt, level: u64) -> Coord {
    Coord::new(k.clone(), BigInt::one() << level as usize)
}

impl HaarDyadic {
    pub fn new() -> Self {
        HaarDyadic {
            domain: Domain::unit(),
        }
    }

    /// Cell index of `x` at `level`, with `x = 1` folded into the last cell.
    fn cell_index(x: &Coord, level: u64) -> BigInt {
        let c = scaled_floor(x, level);
        let top = BigInt::one() << level as usize;
        if c >= top {
            top - 1
        } else {
            c
        }
    }

    /// Averaging level used at `x` by `S_n`.
    pub fn level_at(&self, n: &Index, x: &Coord) -> u64 {
        let (j, m) = decompose(n);
        let c = Self::cell_index(x, j);
        if c < BigInt::from(m) {
            j + 1
        } else {
            j
        }
    }

    /// Dyadic cell of `x` at `level`.
    pub fn cell(x: &Coord, level: u64) -> Interval {
        let c = Self::cell_index(x, level);
        Interval::new(grid_point(&c, level), grid_point(&(c + 1), level))
            .expect("dyadic cell")
    }

    pub fn apply_indicator_exact(&self, n: &Index, s: &IntervalSet, x: &Coord) -> Result<Coord> {
        self.check_index(n)?;
        self.check_point(x)?;
        let level = self.level_at(n, x);
        let cell = Self::cell(x, level);
        Ok(s.intersect_interval(&cell).measure_exact() * coord::pow2(level as i64))
    }

    fn check_point(&self, x: &Coord) -> Result<()> {
        if x < &self.domain.lo || x > &self.domain.hi {
            Err(Error::Precondition(format!(
                "point {} outside [0, 1]",
                coord::to_f64(x)
            )))
        } else {
            Ok(())
        }
    }
}

impl KernelFamily for HaarDyadic {
    fn name(&self) -> &str {
        "haar_dyadic"
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn first_index(&self) -> Index {
        Index::new(1)
    }

    fn shape(&self) -> Shape {
        Shape::PiecewiseConstant
    }

    fn eval_kernel(&self, n: &Index, x: f64, t: f64) -> Result<f64> {
        self.check_index(n)?;
        let (x, t) = (coord::from_f64(x), coord::from_f64(t));
        self.check_point(&x)?;
        if t < self.domain.lo || t >= self.domain.hi {
            return Ok(0.0);
        }
        let level = self.level_at(n, &x);
        Ok(if Self::cell(&x, level).contains(&t) {
            (level as f64).exp2()
        } else {
            0.0
        })
    }

    fn bound(&self, n: &Index) -> Result<f64> {
        self.check_index(n)?;
        let (j, m) = decompose(n);
        let level = if m.is_zero() { j } else { j + 1 };
        Ok((level as f64).exp2())
    }

    fn apply_indicator(&self, n: &Index, s: &IntervalSet, x: &Coord) -> Result<f64> {
        Ok(coord::to_f64(&self.apply_indicator_exact(n, s, x)?))
    }

    fn analytic_phi(&self, u: f64) -> Option<f64> {
        // K_n(x,t) = 2^i forces |x - t| < 2^-i
        let i = if u >= 1.0 { 0.0 } else { (-u.log2()).ceil() };
        Some((i - 1.0).exp2())
    }

    fn breakpoints(&self, n: &Index, window: &Interval) -> Result<Vec<Coord>> {
        self.check_index(n)?;
        let (j, m) = decompose(n);
        let split = grid_point(&BigInt::from(m), j);
        let mut out = Vec::new();
        let mut push_range = |level: u64, from: &Coord, to: &Coord| -> Result<()> {
            // multiples of 2^-level in (from, to]
            let mut k = scaled_floor(from, level) + 1;
            let last = scaled_floor(to, level);
            if last >= k {
                let count = (&last - &k + 1u32).to_usize().unwrap_or(usize::MAX);
                if count.saturating_add(out.len()) > MAX_BREAKPOINTS {
                    return Err(Error::TooManyBreakpoints(MAX_BREAKPOINTS));
                }
            }
            while k <= last {
                out.push(grid_point(&k, level));
                k += 1;
            }
            Ok(())
        };
        let (lo, hi) = (window.lo(), window.hi());
        if lo < &split {
            push_range(j + 1, lo, (&split).min(hi))?;
        }
        if hi > &split {
            push_range(j, (&split).max(lo), hi)?;
        }
        out.dedup();
        Ok(out)
    }

    fn next_candidate(&self, n: &Index, window: &Interval) -> Index {
        let (j, m) = decompose(n);
        let top = BigUint::one() << j as usize;
        let to_u = |c: BigInt| c.to_biguint().unwrap_or_default();
        let c_lo = to_u(Self::cell_index(window.lo(), j));
        let c_hi = to_u(Self::cell_index(window.hi(), j));
        let next_power = Index(&top << 1usize);
        if m <= c_lo {
            let m2 = c_lo + 1u32;
            if m2 < top {
                Index(top + m2)
            } else {
                next_power
            }
        } else if m <= c_hi {
            n.succ()
        } else {
            next_power
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::{int, ratio};

    fn haar() -> HaarDyadic {
        HaarDyadic::new()
    }

    #[test]
    fn different_cells_give_zero() {
        let k = haar().eval_kernel(&Index::new(4), 0.1, 0.3).unwrap();
        assert_eq!(k, 0.0);
        let k = haar().eval_kernel(&Index::new(4), 0.1, 0.2).unwrap();
        assert_eq!(k, 4.0);
    }

    #[test]
    fn bounds() {
        assert_eq!(haar().bound(&Index::new(8)).unwrap(), 8.0);
        assert_eq!(haar().bound(&Index::new(9)).unwrap(), 16.0);
        assert_eq!(haar().bound(&Index::new(1)).unwrap(), 1.0);
    }

    #[test]
    fn dyadic_power_is_conditional_expectation() {
        let h = haar();
        let s = IntervalSet::from_intervals([
            Interval::new(ratio(1, 10), ratio(3, 10)).unwrap(),
            Interval::new(ratio(5, 8), ratio(2, 3)).unwrap(),
        ]);
        for j in 0..6u64 {
            let n = Index::pow2(j);
            for x in [ratio(1, 7), ratio(1, 3), ratio(5, 8), ratio(9, 10)] {
                let cell = HaarDyadic::cell(&x, j);
                let expect = s.intersect_interval(&cell).measure_exact() * coord::pow2(j as i64);
                assert_eq!(h.apply_indicator_exact(&n, &s, &x).unwrap(), expect);
            }
        }
    }

    #[test]
    fn intermediate_index_refines_first_cells() {
        let h = haar();
        // n = 5 = 4 + 1: the first level-2 cell uses level 3
        let n = Index::new(5);
        assert_eq!(h.level_at(&n, &ratio(1, 10)), 3);
        assert_eq!(h.level_at(&n, &ratio(3, 10)), 2);
        // S_n integrates the kernel to one on the full domain
        let full = h.domain().full_set();
        for n in 1..40u64 {
            for x in [ratio(1, 10), ratio(1, 3), ratio(7, 8)] {
                assert_eq!(
                    h.apply_indicator_exact(&Index::new(n), &full, &x).unwrap(),
                    int(1)
                );
            }
        }
    }

    #[test]
    fn breakpoints_cover_level_changes() {
        let h = haar();
        let w = Interval::new(int(0), int(1)).unwrap();
        // n = 5: level 3 on [0, 1/4), level 2 on [1/4, 1)
        let b = h.breakpoints(&Index::new(5), &w).unwrap();
        let expect: Vec<Coord> = vec![ratio(1, 8), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)];
        assert_eq!(b, expect);
    }

    #[test]
    fn next_candidate_skips_constant_runs() {
        let h = haar();
        // window inside level-3 cell 2: [1/4, 3/8)
        let w = Interval::new(ratio(9, 32), ratio(10, 32)).unwrap();
        assert_eq!(h.next_candidate(&Index::new(8), &w), Index::new(11));
        assert_eq!(h.next_candidate(&Index::new(11), &w), Index::new(16));
        // the skipped indices agree with their run start on the window
        let s = IntervalSet::single(Interval::new(ratio(1, 5), ratio(3, 5)).unwrap());
        let x = ratio(19, 64);
        let v8 = h.apply_indicator_exact(&Index::new(8), &s, &x).unwrap();
        for n in 9..11 {
            assert_eq!(h.apply_indicator_exact(&Index::new(n), &s, &x).unwrap(), v8);
        }
    }

    #[test]
    fn analytic_phi_dominates() {
        let h = haar();
        // pairs at distance u share a level-i cell only if 2^-i > u
        assert_eq!(h.analytic_phi(0.5), Some(1.0));
        assert_eq!(h.analytic_phi(0.3), Some(2.0));
        assert_eq!(h.analytic_phi(0.25), Some(2.0));
        assert_eq!(h.analytic_phi(0.2), Some(4.0));
    }
}
