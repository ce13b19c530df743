//! Dirichlet and Fejér kernels on `[-π, π)`.

use std::f64::consts::PI;

use crate::coord::{self, Coord, Index};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

use super::{Domain, KernelFamily, Shape};

/// Largest trigonometric index accepted; beyond it the `O(n)` series
/// evaluation stops being a desk-scale computation.
pub const MAX_TRIG_INDEX: u64 = 1 << 24;

const TWO_PI: f64 = 2.0 * PI;

/// Cosine coefficients of a trigonometric-polynomial kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum TrigCoeffs {
    /// `c_k = alpha + beta * k` for `k < len`.
    Affine { len: usize, alpha: f64, beta: f64 },
    Dense(Vec<f64>),
}

impl TrigCoeffs {
    pub fn len(&self) -> usize {
        match self {
            TrigCoeffs::Affine { len, .. } => *len,
            TrigCoeffs::Dense(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> f64 {
        match self {
            TrigCoeffs::Affine { len, alpha, beta } => {
                if k < *len {
                    alpha + beta * k as f64
                } else {
                    0.0
                }
            }
            TrigCoeffs::Dense(v) => v.get(k).copied().unwrap_or(0.0),
        }
    }

    /// `(c_0 + 2 Σ c_k cos kv) / 2π`.
    pub fn kernel(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        let mut rot = Rotor::new(v);
        for k in 1..self.len() {
            let (_, c) = rot.next(k);
            acc += self.get(k) * c;
        }
        (self.get(0) + 2.0 * acc) / TWO_PI
    }

    /// Antiderivative `(c_0 v + 2 Σ c_k sin(kv)/k) / 2π` of [`Self::kernel`].
    pub fn antiderivative(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        let mut rot = Rotor::new(v);
        for k in 1..self.len() {
            let (s, _) = rot.next(k);
            acc += self.get(k) * s / k as f64;
        }
        (self.get(0) * v + 2.0 * acc) / TWO_PI
    }

    /// `∫_S K(x - t) dt` for a set given by double endpoints.
    pub fn integrate(&self, pieces: &[(f64, f64)], x: f64) -> f64 {
        pieces
            .iter()
            .map(|&(lo, hi)| self.antiderivative(x - lo) - self.antiderivative(x - hi))
            .sum()
    }
}

/// Successive `(sin kv, cos kv)` by complex rotation, re-anchored every 64
/// steps to keep the drift near machine precision.
struct Rotor {
    v: f64,
    step: (f64, f64),
    cur: (f64, f64),
}

impl Rotor {
    fn new(v: f64) -> Self {
        let step = v.sin_cos();
        Rotor {
            v,
            step,
            cur: (0.0, 1.0),
        }
    }

    fn next(&mut self, k: usize) -> (f64, f64) {
        if k.is_multiple_of(64) {
            self.cur = (k as f64 * self.v).sin_cos();
        } else {
            let (s, c) = self.cur;
            let (ss, cs) = self.step;
            self.cur = (s * cs + c * ss, c * cs - s * ss);
        }
        self.cur
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigKind {
    /// `D_n`, `n ≥ 0`.
    Dirichlet,
    /// `F_n = (D_0 + … + D_{n-1}) / n`, `n ≥ 1`.
    Fejer,
}

#[derive(Clone, Debug)]
pub struct TrigFamily {
    kind: TrigKind,
    name: String,
    domain: Domain,
}

impl TrigFamily {
    pub fn dirichlet() -> Self {
        TrigFamily {
            kind: TrigKind::Dirichlet,
            name: "dirichlet".into(),
            domain: Domain::periodic_pi(),
        }
    }

    pub fn fejer() -> Self {
        TrigFamily {
            kind: TrigKind::Fejer,
            name: "fejer".into(),
            domain: Domain::periodic_pi(),
        }
    }

    pub fn kind(&self) -> TrigKind {
        self.kind
    }

    fn small_index(&self, n: &Index) -> Result<u64> {
        self.check_index(n)?;
        n.to_u64()
            .filter(|&v| v <= MAX_TRIG_INDEX)
            .ok_or_else(|| Error::IndexOutOfRange {
                family: self.name.clone(),
                index: n.to_string(),
            })
    }

    pub fn coeffs(&self, n: &Index) -> Result<TrigCoeffs> {
        let n = self.small_index(n)?;
        Ok(match self.kind {
            TrigKind::Dirichlet => TrigCoeffs::Affine {
                len: n as usize + 1,
                alpha: 1.0,
                beta: 0.0,
            },
            TrigKind::Fejer => TrigCoeffs::Affine {
                len: n as usize,
                alpha: 1.0,
                beta: -1.0 / n as f64,
            },
        })
    }
}

impl KernelFamily for TrigFamily {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn first_index(&self) -> Index {
        match self.kind {
            TrigKind::Dirichlet => Index::new(0),
            TrigKind::Fejer => Index::new(1),
        }
    }

    fn shape(&self) -> Shape {
        Shape::Convolution
    }

    fn eval_kernel(&self, n: &Index, x: f64, t: f64) -> Result<f64> {
        Ok(self.coeffs(n)?.kernel(x - t))
    }

    fn bound(&self, n: &Index) -> Result<f64> {
        let m = self.small_index(n)? as f64;
        Ok(match self.kind {
            TrigKind::Dirichlet => (2.0 * m + 1.0) / TWO_PI,
            TrigKind::Fejer => m / TWO_PI,
        })
    }

    fn apply_indicator(&self, n: &Index, s: &IntervalSet, x: &Coord) -> Result<f64> {
        self.apply_indicator_f64(n, s, coord::to_f64(x))
    }

    fn apply_indicator_f64(&self, n: &Index, s: &IntervalSet, x: f64) -> Result<f64> {
        Ok(self.coeffs(n)?.integrate(s.approx(), x))
    }

    fn analytic_phi(&self, u: f64) -> Option<f64> {
        let s = (u.min(PI) / 2.0).sin();
        Some(match self.kind {
            TrigKind::Dirichlet => 1.0 / (TWO_PI * s),
            TrigKind::Fejer => 1.0 / (TWO_PI * s * s),
        })
    }

    fn trig_coefficients(&self, n: &Index) -> Option<TrigCoeffs> {
        self.coeffs(n).ok()
    }
}
