//! Adaptive Simpson quadrature, used as an independent check on the
//! closed-form indicator integrals.

use crate::coord::Index;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

use super::KernelFamily;

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// Absolute tolerance for the whole integral.
    pub tol: f64,
    pub max_panels: usize,
    /// Uniform panels per piece before adaptation starts.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-10,
            max_panels: 1 << 20,
            initial_panels: 16,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// `∫_a^b f` with forced subdivision at `splits`.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    splits: &[f64],
    opts: &QuadOptions,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    cuts.extend(splits.iter().copied().filter(|&s| s > a && s < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let width = b - a;
    let mut stack = Vec::new();
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / opts.initial_panels as f64;
        for i in 0..opts.initial_panels {
            let pa = w[0] + h * i as f64;
            let pb = if i + 1 == opts.initial_panels {
                w[1]
            } else {
                pa + h
            };
            let (fa, fm, fb) = (f(pa), f(0.5 * (pa + pb)), f(pb));
            stack.push(Panel {
                a: pa,
                b: pb,
                fa,
                fm,
                fb,
                whole: simpson(pa, pb, fa, fm, fb),
                tol: opts.tol * (pb - pa) / width,
            });
        }
    }

    let mut total = 0.0;
    let mut panels = stack.len();
    let mut worst: f64 = 0.0;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let diff = left + right - p.whole;
        if diff.abs() <= 15.0 * p.tol || m <= p.a || m >= p.b {
            total += left + right + diff / 15.0;
            continue;
        }
        panels += 1;
        if panels > opts.max_panels {
            worst = worst.max(diff.abs());
            return Err(Error::QuadratureBudget {
                panels: opts.max_panels,
                estimate: worst,
            });
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
        });
    }
    Ok(total)
}

/// `∫_S K_n(x,t) dt` by quadrature of the kernel itself, split at `t = x`.
pub fn apply_indicator_quad(
    f: &dyn KernelFamily,
    n: &Index,
    s: &IntervalSet,
    x: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    // surfaces index and domain errors before the integrand swallows them
    f.eval_kernel(n, x, x)?;
    let total_len: f64 = s.approx().iter().map(|(a, b)| b - a).sum();
    let g = |t: f64| f.eval_kernel(n, x, t).unwrap_or(0.0);
    let mut acc = 0.0;
    for &(a, b) in s.approx() {
        let piece = QuadOptions {
            tol: opts.tol * (b - a) / total_len,
            ..*opts
        };
        acc += adaptive_simpson(&g, a, b, &[x], &piece)?;
    }
    Ok(acc)
}
