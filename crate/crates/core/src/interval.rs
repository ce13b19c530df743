//! Half-open intervals `[lo, hi)` and canonical finite unions of them.

use std::fmt;

use num::Zero;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::coord::{self, Coord};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Coord,
    hi: Coord,
}

impl Interval {
    pub fn new(lo: Coord, hi: Coord) -> Result<Self> {
        if lo < hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval {
                lo: coord::to_f64(&lo),
                hi: coord::to_f64(&hi),
            })
        }
    }

    pub fn from_f64(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Interval::new(coord::from_f64(lo), coord::from_f64(hi))
    }

    pub fn lo(&self) -> &Coord {
        &self.lo
    }

    pub fn hi(&self) -> &Coord {
        &self.hi
    }

    pub fn len(&self) -> Coord {
        &self.hi - &self.lo
    }

    pub fn len_f64(&self) -> f64 {
        coord::to_f64(&self.len())
    }

    pub fn center(&self) -> Coord {
        coord::half(&(&self.lo + &self.hi))
    }

    pub fn contains(&self, x: &Coord) -> bool {
        &self.lo <= x && x < &self.hi
    }

    /// `x` strictly between the endpoints.
    pub fn contains_interior(&self, x: &Coord) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        Interval::new(lo, hi).ok()
    }

    /// Same center, twice the length, without clipping.
    pub fn doubled(&self) -> Interval {
        let h = coord::half(&self.len());
        Interval {
            lo: &self.lo - &h,
            hi: &self.hi + &h,
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (coord::to_f64(&self.lo), coord::to_f64(&self.hi))
    }

    /// Distance from `x` to the nearer endpoint, zero outside.
    pub fn depth_of(&self, x: &Coord) -> Coord {
        if !self.contains(x) {
            return Coord::zero();
        }
        (x - &self.lo).min(&self.hi - x)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_f64();
        write!(f, "[{lo}, {hi})")
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [coord::to_json_value(&self.lo), coord::to_json_value(&self.hi)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[serde_json::Value; 2]>::deserialize(d)?;
        let lo = coord::from_json_value(&lo).map_err(de::Error::custom)?;
        let hi = coord::from_json_value(&hi).map_err(de::Error::custom)?;
        Interval::new(lo, hi).map_err(de::Error::custom)
    }
}

/// Same center as `iv`, twice the length, clipped to `[domain_lo, domain_hi)`.
pub fn double_interval(iv: &Interval, domain_lo: &Coord, domain_hi: &Coord) -> Interval {
    let d = iv.doubled();
    Interval {
        lo: d.lo.max(domain_lo.clone()),
        hi: d.hi.min(domain_hi.clone()),
    }
}

/// Finite union of disjoint, non-adjacent half-open intervals sorted by `lo`.
#[derive(Clone, Default)]
pub struct IntervalSet {
    ivs: Vec<Interval>,
    approx: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(iv: Interval) -> Self {
        Self::from_sorted(vec![iv])
    }

    /// Canonical form of an arbitrary collection of intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(ivs: I) -> Self {
        let mut v: Vec<Interval> = ivs.into_iter().collect();
        v.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        Self::from_sorted(out)
    }

    pub fn from_f64_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let ivs = pairs
            .iter()
            .map(|&(a, b)| Interval::from_f64(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(ivs))
    }

    fn from_sorted(ivs: Vec<Interval>) -> Self {
        let approx = ivs.iter().map(Interval::to_f64).collect();
        IntervalSet { ivs, approx }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.ivs
    }

    /// Endpoints rounded to doubles, for kernel evaluation.
    pub fn approx(&self) -> &[(f64, f64)] {
        &self.approx
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ivs.len()
    }

    pub fn measure_exact(&self) -> Coord {
        self.ivs.iter().fold(Coord::zero(), |acc, iv| acc + iv.len())
    }

    pub fn measure(&self) -> f64 {
        coord::to_f64(&self.measure_exact())
    }

    pub fn contains(&self, x: &Coord) -> bool {
        self.component_index(x).is_some()
    }

    pub fn component_index(&self, x: &Coord) -> Option<usize> {
        let i = self.ivs.partition_point(|iv| &iv.lo <= x);
        (i > 0 && x < &self.ivs[i - 1].hi).then(|| i - 1)
    }

    pub fn component(&self, x: &Coord) -> Option<&Interval> {
        self.component_index(x).map(|i| &self.ivs[i])
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        Self::from_intervals(self.ivs.iter().chain(other.ivs.iter()).cloned())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.ivs.len() && j < other.ivs.len() {
            let (a, b) = (&self.ivs[i], &other.ivs[j]);
            if let Some(c) = a.intersection(b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    pub fn intersect_interval(&self, iv: &Interval) -> IntervalSet {
        self.intersect(&IntervalSet::single(iv.clone()))
    }

    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let mut j = 0;
        for a in &self.ivs {
            let mut cur = a.lo.clone();
            while j < other.ivs.len() && other.ivs[j].hi <= a.lo {
                j += 1;
            }
            let mut k = j;
            while k < other.ivs.len() && other.ivs[k].lo < a.hi {
                let b = &other.ivs[k];
                if b.lo > cur {
                    out.push(Interval {
                        lo: cur.clone(),
                        hi: b.lo.clone(),
                    });
                }
                if b.hi > cur {
                    cur = b.hi.clone();
                }
                k += 1;
            }
            if cur < a.hi {
                out.push(Interval {
                    lo: cur,
                    hi: a.hi.clone(),
                });
            }
        }
        Self::from_intervals(out)
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.subtract(other).is_empty()
    }

    /// All component endpoints in increasing order.
    pub fn endpoints(&self) -> impl Iterator<Item = &Coord> {
        self.ivs.iter().flat_map(|iv| [&iv.lo, &iv.hi])
    }

    pub fn hull(&self) -> Option<Interval> {
        match (self.ivs.first(), self.ivs.last()) {
            (Some(a), Some(b)) => Some(Interval {
                lo: a.lo.clone(),
                hi: b.hi.clone(),
            }),
            _ => None,
        }
    }
}

impl PartialEq for IntervalSet {
    fn eq(&self, other: &Self) -> bool {
        self.ivs == other.ivs
    }
}

impl Eq for IntervalSet {}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.ivs.iter()).finish()
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.ivs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ivs = Vec::<Interval>::deserialize(d)?;
        Ok(IntervalSet::from_intervals(ivs))
    }
}
