//! Certified suprema of `|U_n 𝕀_S(x) - target|` over an interval.

use crate::coord::{self, Coord, Index};
use crate::error::Result;
use crate::interval::{Interval, IntervalSet};

use super::{KernelFamily, Shape};

/// Largest grid used for one certification.
pub const MAX_GRID: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub enum LipschitzInfo {
    /// `|d/dx U_n 𝕀_S(x)| ≤ L`.
    Constant(f64),
    /// Piecewise constant in `x`; evaluate at breakpoints instead.
    PiecewiseConstant,
}

/// Global bound `2 J M_n` for a set with `J` components.
pub fn lipschitz_bound(f: &dyn KernelFamily, n: &Index, components: usize) -> Result<LipschitzInfo> {
    match f.shape() {
        Shape::PiecewiseConstant => Ok(LipschitzInfo::PiecewiseConstant),
        Shape::Convolution => {
            if components == 0 {
                return Ok(LipschitzInfo::Constant(0.0));
            }
            Ok(LipschitzInfo::Constant(
                2.0 * components as f64 * f.bound(n)?,
            ))
        }
    }
}

/// Lipschitz bound on `iv` for a convolution family: each endpoint `e` of
/// `S` contributes `min(M_n, φ(dist(iv, e)))`.
pub fn local_lipschitz(
    f: &dyn KernelFamily,
    n: &Index,
    s: &IntervalSet,
    iv: &Interval,
) -> Result<f64> {
    let m = f.bound(n)?;
    let dom = f.domain();
    let (dlo, dhi) = dom.bounds_f64();
    // on a circle a set touching both ends of the period has no jump there
    let wraps = matches!(dom.metric, super::Metric::Circular { .. })
        && s.intervals().first().is_some_and(|c| c.lo() == &dom.lo)
        && s.intervals().last().is_some_and(|c| c.hi() == &dom.hi);
    Ok(s.approx()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|&e| !(wraps && (e == dlo || e == dhi)))
        .map(|e| {
            let d = dom.dist_to_interval(iv, e);
            if d > 0.0 {
                f.analytic_phi(d).map_or(m, |p| p.min(m))
            } else {
                m
            }
        })
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    /// Certified upper bound on the supremum (when `pass` or exhaustive).
    pub bound: f64,
    pub pass: bool,
    pub points: usize,
    pub exact: bool,
}

fn piecewise_points(
    f: &dyn KernelFamily,
    n: &Index,
    iv: &Interval,
    closed: bool,
) -> Result<Vec<Coord>> {
    let mut pts = vec![iv.lo().clone()];
    pts.extend(
        f.breakpoints(n, iv)?
            .into_iter()
            .filter(|b| b < iv.hi()),
    );
    if closed {
        pts.push(iv.hi().clone());
    }
    Ok(pts)
}

fn grid_points(iv: &Interval, g: usize) -> Vec<f64> {
    let (lo, hi) = iv.to_f64();
    let h = (hi - lo) / g as f64;
    // ends first so that failing candidates are rejected early
    let mut order: Vec<usize> = vec![0];
    if g > 1 {
        order.push(g - 1);
    }
    order.extend(1..g.saturating_sub(1));
    order
        .into_iter()
        .map(|i| lo + (i as f64 + 0.5) * h)
        .collect()
}

/// Upper bound on `sup_{x ∈ iv} |U_n 𝕀_S(x) - target|`: grid maximum plus
/// `L h / 2`, or exact breakpoint evaluation for piecewise-constant families.
pub fn sup_deviation_on_interval(
    f: &dyn KernelFamily,
    n: &Index,
    s: &IntervalSet,
    iv: &Interval,
    target: f64,
    grid: usize,
) -> Result<f64> {
    Ok(certify(f, n, s, iv, target, f64::INFINITY, grid.max(2), false)?.bound)
}

/// Certifies `sup_{x ∈ iv} |U_n 𝕀_S(x) - target| < threshold`, refining the
/// grid so the Lipschitz margin stays below half the threshold and stopping
/// at the first sample that rules it out.
pub fn certify_below(
    f: &dyn KernelFamily,
    n: &Index,
    s: &IntervalSet,
    iv: &Interval,
    target: f64,
    threshold: f64,
    min_grid: usize,
) -> Result<Certification> {
    certify(f, n, s, iv, target, threshold, min_grid.max(2), false)
}

/// As [`sup_deviation_on_interval`] over the closed interval.
pub fn sup_deviation_closed(
    f: &dyn KernelFamily,
    n: &Index,
    s: &IntervalSet,
    iv: &Interval,
    target: f64,
    grid: usize,
) -> Result<f64> {
    Ok(certify(f, n, s, iv, target, f64::INFINITY, grid.max(2), true)?.bound)
}

#[allow(clippy::too_many_arguments)]
fn certify(
    f: &dyn KernelFamily,
    n: &Index,
    s: &IntervalSet,
    iv: &Interval,
    target: f64,
    threshold: f64,
    grid: usize,
    closed: bool,
) -> Result<Certification> {
    match f.shape() {
        Shape::PiecewiseConstant => {
            let pts = piecewise_points(f, n, iv, closed)?;
            let mut worst: f64 = 0.0;
            for (i, x) in pts.iter().enumerate() {
                worst = worst.max((f.apply_indicator(n, s, x)? - target).abs());
                if worst >= threshold {
                    return Ok(Certification {
                        bound: worst,
                        pass: false,
                        points: i + 1,
                        exact: true,
                    });
                }
            }
            Ok(Certification {
                bound: worst,
                pass: worst < threshold,
                points: pts.len(),
                exact: true,
            })
        }
        Shape::Convolution => {
            let lip = local_lipschitz(f, n, s, iv)?;
            let len = iv.len_f64();
            let g = if threshold.is_finite() {
                let needed = (lip * len / threshold).ceil();
                if needed.is_finite() {
                    (needed as usize).clamp(grid, MAX_GRID)
                } else {
                    MAX_GRID
                }
            } else {
                grid
            };
            let margin = lip * len / g as f64 / 2.0;
            let mut worst: f64 = 0.0;
            for (i, x) in grid_points(iv, g).into_iter().enumerate() {
                worst = worst.max((f.apply_indicator_f64(n, s, x)? - target).abs());
                if worst + margin >= threshold {
                    return Ok(Certification {
                        bound: worst + margin,
                        pass: false,
                        points: i + 1,
                        exact: false,
                    });
                }
            }
            let bound = worst + margin;
            Ok(Certification {
                bound,
                pass: bound < threshold,
                points: g,
                exact: false,
            })
        }
    }
}

/// Exact value when available, as a double.
pub fn value_at(f: &dyn KernelFamily, n: &Index, s: &IntervalSet, x: &Coord) -> Result<f64> {
    match f.shape() {
        Shape::PiecewiseConstant => f.apply_indicator(n, s, x),
        Shape::Convolution => f.apply_indicator_f64(n, s, coord::to_f64(x)),
    }
}
