//! Integral operator families `U_n f(x) = ∫ K_n(x,t) f(t) dt`.

mod haar;
mod quad;
mod summation;
mod sup;
mod trig;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coord::{self, Coord, Index};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

pub use haar::HaarDyadic;
pub use quad::{adaptive_simpson, apply_indicator_quad, QuadOptions};
pub use summation::{MatrixSpec, RegularityReport, SummationFamily, SummationMatrix};
pub use sup::{
    certify_below, lipschitz_bound, local_lipschitz, sup_deviation_closed, sup_deviation_on_interval,
    value_at, Certification,
    LipschitzInfo,
};
pub use trig::{TrigCoeffs, TrigFamily, TrigKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Linear,
    Circular { period: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub lo: Coord,
    pub hi: Coord,
    pub metric: Metric,
}

impl Domain {
    pub fn periodic_pi() -> Self {
        Domain {
            lo: coord::from_f64(-PI),
            hi: coord::from_f64(PI),
            metric: Metric::Circular { period: 2.0 * PI },
        }
    }

    pub fn unit() -> Self {
        Domain {
            lo: coord::int(0),
            hi: coord::int(1),
            metric: Metric::Linear,
        }
    }

    pub fn as_interval(&self) -> Interval {
        Interval::new(self.lo.clone(), self.hi.clone()).expect("non-degenerate domain")
    }

    pub fn full_set(&self) -> IntervalSet {
        IntervalSet::single(self.as_interval())
    }

    pub fn bounds_f64(&self) -> (f64, f64) {
        (coord::to_f64(&self.lo), coord::to_f64(&self.hi))
    }

    /// Distance in the family metric.
    pub fn dist(&self, x: f64, t: f64) -> f64 {
        let d = (x - t).abs();
        match self.metric {
            Metric::Linear => d,
            Metric::Circular { period } => {
                let d = d.rem_euclid(period);
                d.min(period - d)
            }
        }
    }

    /// Smallest distance from `e` to a point of `iv`.
    pub fn dist_to_interval(&self, iv: &Interval, e: f64) -> f64 {
        let (lo, hi) = iv.to_f64();
        if lo <= e && e <= hi {
            return 0.0;
        }
        let d = self.dist(e, lo).min(self.dist(e, hi));
        if let Metric::Circular { period } = self.metric {
            // the interval may contain a shifted copy of e
            for shift in [-period, period] {
                let s = e + shift;
                if lo <= s && s <= hi {
                    return 0.0;
                }
            }
        }
        d
    }
}

/// How `x ↦ U_n 𝕀_S(x)` can be bounded between samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `K_n(x,t) = k_n(x - t)`; the derivative in `x` telescopes to kernel
    /// values at the endpoints of `S`.
    Convolution,
    /// Constant between the points reported by [`KernelFamily::breakpoints`].
    PiecewiseConstant,
}

pub trait KernelFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn domain(&self) -> &Domain;

    fn first_index(&self) -> Index;

    fn shape(&self) -> Shape;

    fn eval_kernel(&self, n: &Index, x: f64, t: f64) -> Result<f64>;

    /// `M_n` with `|K_n(x,t)| ≤ M_n`.
    fn bound(&self, n: &Index) -> Result<f64>;

    /// `U_n 𝕀_S(x)` through the closed-form antiderivative.
    fn apply_indicator(&self, n: &Index, s: &IntervalSet, x: &Coord) -> Result<f64>;

    fn apply_indicator_f64(&self, n: &Index, s: &IntervalSet, x: f64) -> Result<f64> {
        self.apply_indicator(n, s, &coord::from_f64(x))
    }

    /// Closed-form decreasing majorant of `|K_n(x,t)|` in the family metric.
    fn analytic_phi(&self, _u: f64) -> Option<f64> {
        None
    }

    /// Points of `window` (excluding its left end) where `x ↦ U_n f(x)` may
    /// change, for piecewise-constant families.
    fn breakpoints(&self, _n: &Index, _window: &Interval) -> Result<Vec<Coord>> {
        Err(Error::Unsupported {
            family: self.name().to_string(),
            what: "breakpoints".into(),
        })
    }

    /// Next index after `n` at which `U_n` restricted to `window` can differ.
    fn next_candidate(&self, n: &Index, _window: &Interval) -> Index {
        n.succ()
    }

    /// Cosine coefficients `c_k` with `K_n = (c_0 + 2 Σ c_k cos k(x-t)) / 2π`.
    fn trig_coefficients(&self, _n: &Index) -> Option<TrigCoeffs> {
        None
    }

    fn check_index(&self, n: &Index) -> Result<()> {
        if n < &self.first_index() {
            Err(Error::IndexOutOfRange {
                family: self.name().to_string(),
                index: n.to_string(),
            })
        } else {
            Ok(())
        }
    }
}

pub type Family = Arc<dyn KernelFamily>;

/// Family selection as it appears in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilySpec {
    Dirichlet,
    Fejer,
    HaarDyadic,
    Summation {
        base: Box<FamilySpec>,
        matrix: MatrixSpec,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Family> {
        Ok(match self {
            FamilySpec::Dirichlet => Arc::new(TrigFamily::dirichlet()),
            FamilySpec::Fejer => Arc::new(TrigFamily::fejer()),
            FamilySpec::HaarDyadic => Arc::new(HaarDyadic::new()),
            FamilySpec::Summation { base, matrix } => {
                Arc::new(summation_family(base.build()?, matrix.build()?)?)
            }
        })
    }
}

/// Kernel `K^T_n = Σ_j a_nj K_j` of a summation method applied to `base`.
pub fn summation_family(base: Family, matrix: SummationMatrix) -> Result<SummationFamily> {
    SummationFamily::new(base, matrix)
}

pub fn eval_kernel(f: &dyn KernelFamily, n: &Index, x: f64, t: f64) -> Result<f64> {
    f.eval_kernel(n, x, t)
}

pub fn bound_mn(f: &dyn KernelFamily, n: &Index) -> Result<f64> {
    f.bound(n)
}

pub fn apply_indicator(f: &dyn KernelFamily, n: &Index, s: &IntervalSet, x: &Coord) -> Result<f64> {
    f.apply_indicator(n, s, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_distance_wraps() {
        let d = Domain::periodic_pi();
        assert!((d.dist(-3.0, 3.0) - (2.0 * PI - 6.0)).abs() < 1e-15);
        assert!((d.dist(0.0, PI) - PI).abs() < 1e-15);
        let u = Domain::unit();
        assert_eq!(u.dist(0.1, 0.9), 0.8);
    }

    #[test]
    fn family_spec_json() {
        let s: FamilySpec = serde_json::from_str(
            r#"{"name":"summation","base":{"name":"dirichlet"},"matrix":"cesaro"}"#,
        )
        .unwrap();
        let f = s.build().unwrap();
        assert_eq!(f.first_index(), Index::new(1));
        let h: FamilySpec = serde_json::from_str(r#"{"name":"haar_dyadic"}"#).unwrap();
        assert_eq!(h, FamilySpec::HaarDyadic);
        assert!(serde_json::from_str::<FamilySpec>(r#"{"name":"franklin"}"#).is_err());
    }
}
