//! Measure-zero target sets: membership oracle, witnesses, small open covers.

use num::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::coord::{self, serde_coord, serde_coords, Coord};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::nudge;

/// Largest number of cover components materialized for a Cantor set.
pub const MAX_COVER_COMPONENTS: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullSetSpec {
    Finite {
        #[serde(with = "serde_coords")]
        points: Vec<Coord>,
    },
    Cantor {
        #[serde(with = "serde_coord")]
        lo: Coord,
        #[serde(with = "serde_coord")]
        hi: Coord,
        /// Length ratio of each retained piece; `1/3` is the middle-thirds set.
        #[serde(with = "serde_coord")]
        ratio: Coord,
        level_cap: u32,
    },
}

/// A null set `E` inside a domain `[a, b]`.
#[derive(Clone, Debug)]
pub struct NullSet {
    spec: NullSetSpec,
    domain_lo: Coord,
    domain_hi: Coord,
}

impl NullSet {
    pub fn new(spec: NullSetSpec, domain_lo: Coord, domain_hi: Coord) -> Result<Self> {
        match &spec {
            NullSetSpec::Finite { points } => {
                if points.is_empty() {
                    return Err(Error::Precondition("finite null set has no points".into()));
                }
                let mut sorted = points.clone();
                sorted.sort();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Precondition("finite points must be distinct".into()));
                }
                if sorted.iter().any(|p| p <= &domain_lo || p >= &domain_hi) {
                    return Err(Error::Precondition(
                        "finite points must lie strictly inside the domain".into(),
                    ));
                }
            }
            NullSetSpec::Cantor {
                lo, hi, ratio, ..
            } => {
                if !(lo < hi) {
                    return Err(Error::Precondition("cantor requires lo < hi".into()));
                }
                if !(ratio.is_positive() && ratio < &coord::ratio(1, 2)) {
                    return Err(Error::Precondition("cantor ratio must lie in (0, 1/2)".into()));
                }
                if lo < &domain_lo || hi > &domain_hi {
                    return Err(Error::Precondition("cantor interval outside domain".into()));
                }
            }
        }
        Ok(NullSet {
            spec,
            domain_lo,
            domain_hi,
        })
    }

    pub fn spec(&self) -> &NullSetSpec {
        &self.spec
    }

    pub fn domain(&self) -> (&Coord, &Coord) {
        (&self.domain_lo, &self.domain_hi)
    }

    /// Membership test. Cantor sets are tested digit by digit up to
    /// `level_cap` and answer `true` when still undecided.
    pub fn member(&self, x: &Coord) -> bool {
        match &self.spec {
            NullSetSpec::Finite { points } => points.contains(x),
            NullSetSpec::Cantor {
                lo,
                hi,
                ratio,
                level_cap,
            } => {
                if x < lo || x > hi {
                    return false;
                }
                let mut y = (x - lo) / (hi - lo);
                let upper = Coord::one() - ratio;
                for _ in 0..*level_cap {
                    if &y <= ratio {
                        y /= ratio;
                    } else if y >= upper {
                        y = (y - &upper) / ratio;
                    } else {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// `m` distinct points of `E`. Cantor witnesses are piece endpoints,
    /// enumerated level by level.
    pub fn witnesses(&self, m: usize) -> Result<Vec<Coord>> {
        if m == 0 {
            return Err(Error::Precondition("at least one witness required".into()));
        }
        match &self.spec {
            NullSetSpec::Finite { points } => {
                if points.len() < m {
                    return Err(Error::NotEnoughPoints {
                        available: points.len(),
                        requested: m,
                    });
                }
                Ok(points[..m].to_vec())
            }
            NullSetSpec::Cantor { lo, hi, ratio, .. } => {
                let mut out = vec![lo.clone(), hi.clone()];
                let mut pieces = vec![(lo.clone(), hi.clone())];
                while out.len() < m {
                    let mut next = Vec::with_capacity(pieces.len() * 2);
                    for (a, b) in &pieces {
                        let w = (b - a) * ratio;
                        let (l_hi, r_lo) = (a + &w, b - &w);
                        out.push(l_hi.clone());
                        out.push(r_lo.clone());
                        next.push((a.clone(), l_hi));
                        next.push((r_lo, b.clone()));
                    }
                    pieces = next;
                }
                out.truncate(m);
                debug_assert!(out.iter().all(|w| self.member(w)));
                Ok(out)
            }
        }
    }

    /// Open cover of `E` with measure `< eps` whose component endpoints are
    /// neither in `E` nor accepted by `exclude`.
    pub fn cover(&self, eps: &Coord, exclude: &dyn Fn(&Coord) -> bool) -> Result<IntervalSet> {
        if !eps.is_positive() {
            return Err(Error::Precondition("cover requires eps > 0".into()));
        }
        // domain boundaries are fixed by clipping, not chosen
        let ok = |s: &IntervalSet| {
            s.endpoints().all(|e| {
                e == &self.domain_lo || e == &self.domain_hi || (!self.member(e) && !exclude(e))
            })
        };
        match &self.spec {
            NullSetSpec::Finite { points } => {
                let count = coord::int(points.len() as i64);
                let base = coord::pow2(coord::floor_log2(&(eps / (coord::int(2) * count))));
                for t in 0..nudge::MAX_RETRIES {
                    let rho = &base * (coord::int(7) - nudge::fraction(t)) / coord::int(8);
                    let s = self.clip(points.iter().map(|p| (p - &rho, p + &rho)));
                    if ok(&s) {
                        return Ok(s);
                    }
                }
                Err(Error::NudgeExhausted {
                    retries: nudge::MAX_RETRIES,
                    context: "finite cover".into(),
                })
            }
            NullSetSpec::Cantor { lo, hi, ratio, .. } => {
                let len = hi - lo;
                let two_r = coord::int(2) * ratio;
                let mut level = 0u32;
                let mut base_measure = len.clone();
                while &base_measure >= eps {
                    level += 1;
                    base_measure *= &two_r;
                    if (1usize << level.min(63)) > MAX_COVER_COMPONENTS {
                        return Err(Error::Precondition(format!(
                            "cantor cover at eps {} needs more than {MAX_COVER_COMPONENTS} components",
                            coord::to_f64(eps)
                        )));
                    }
                }
                let mut pieces = vec![(lo.clone(), hi.clone())];
                for _ in 0..level {
                    pieces = pieces
                        .iter()
                        .flat_map(|(a, b)| {
                            let w = (b - a) * ratio;
                            [(a.clone(), a + &w), (b - &w, b.clone())]
                        })
                        .collect();
                }
                let count = coord::int(pieces.len() as i64);
                let slack = (eps - &base_measure) / (coord::int(4) * &count);
                let eta_base = if level == 0 {
                    slack
                } else {
                    let gap = &len * num::pow(ratio.clone(), (level - 1) as usize)
                        * (Coord::one() - &two_r);
                    slack.min(gap / coord::int(4))
                };
                for t in 0..nudge::MAX_RETRIES {
                    let eta = &eta_base * (coord::int(7) - nudge::fraction(t)) / coord::int(8);
                    let s = self.clip(pieces.iter().map(|(a, b)| (a - &eta, b + &eta)));
                    if ok(&s) {
                        return Ok(s);
                    }
                }
                Err(Error::NudgeExhausted {
                    retries: nudge::MAX_RETRIES,
                    context: "cantor cover".into(),
                })
            }
        }
    }

    fn clip(&self, pairs: impl Iterator<Item = (Coord, Coord)>) -> IntervalSet {
        IntervalSet::from_intervals(pairs.filter_map(|(a, b)| {
            Interval::new(a.max(self.domain_lo.clone()), b.min(self.domain_hi.clone())).ok()
        }))
    }

    /// True when every point of `E` lies in `lo..hi` of some component; for
    /// finite sets this is exact, for Cantor sets the retained pieces at
    /// `level` are checked.
    pub fn covered_by(&self, s: &IntervalSet) -> bool {
        // the closed right end of the domain counts as covered when a
        // component reaches it
        let has = |p: &Coord| {
            s.contains(p)
                || (p == &self.domain_hi && s.intervals().last().is_some_and(|c| c.hi() == p))
        };
        match &self.spec {
            NullSetSpec::Finite { points } => points.iter().all(has),
            NullSetSpec::Cantor { .. } => self
                .witnesses(64)
                .map(|w| w.iter().all(has))
                .unwrap_or(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::{int, ratio};

    fn middle_thirds() -> NullSet {
        NullSet::new(
            NullSetSpec::Cantor {
                lo: int(0),
                hi: int(1),
                ratio: ratio(1, 3),
                level_cap: 40,
            },
            int(0),
            int(1),
        )
        .unwrap()
    }

    fn finite(points: &[Coord]) -> NullSet {
        NullSet::new(
            NullSetSpec::Finite {
                points: points.to_vec(),
            },
            int(0),
            int(1),
        )
        .unwrap()
    }

    #[test]
    fn finite_membership() {
        let e = finite(&[ratio(3, 10), ratio(7, 10)]);
        assert!(e.member(&ratio(3, 10)));
        assert!(!e.member(&ratio(1, 2)));
    }

    #[test]
    fn cantor_membership() {
        let c = middle_thirds();
        // 1/4 = 0.020202... in base 3
        assert!(c.member(&ratio(1, 4)));
        assert!(!c.member(&ratio(1, 2)));
        assert!(c.member(&ratio(2, 3)));
        assert!(!c.member(&(ratio(1, 2) + ratio(1, 1000))));
    }

    #[test]
    fn witnesses_cases() {
        let e = finite(&[ratio(3, 10), ratio(7, 10)]);
        assert_eq!(e.witnesses(2).unwrap(), vec![ratio(3, 10), ratio(7, 10)]);
        assert_eq!(
            middle_thirds().witnesses(4).unwrap(),
            vec![int(0), int(1), ratio(1, 3), ratio(2, 3)]
        );
        let single = finite(&[ratio(1, 2)]);
        assert!(matches!(
            single.witnesses(2),
            Err(Error::NotEnoughPoints { .. })
        ));
    }

    #[test]
    fn finite_cover_is_small_and_off_set() {
        let e = finite(&[ratio(3, 10), ratio(7, 10)]);
        let eps = ratio(1, 100);
        let c = e.cover(&eps, &|_| false).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.measure_exact() < eps);
        for iv in c.intervals() {
            assert!(iv.len() < ratio(5, 1000));
            assert!(!e.member(iv.lo()) && !e.member(iv.hi()));
        }
        assert!(c.component(&ratio(3, 10)).unwrap().contains_interior(&ratio(3, 10)));
    }

    #[test]
    fn cantor_cover_level_two() {
        let c = middle_thirds();
        let eps = ratio(1, 2);
        let s = c.cover(&eps, &|_| false).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.measure_exact() < eps);
        assert!(s.measure_exact() > ratio(4, 9));
        for e in s.endpoints() {
            if e != &int(0) && e != &int(1) {
                assert!(!c.member(e));
            }
        }
    }

    #[test]
    fn cover_rejects_zero_eps() {
        let e = finite(&[ratio(1, 2)]);
        assert!(e.cover(&int(0), &|_| false).is_err());
    }

    #[test]
    fn cover_respects_exclusion() {
        let e = finite(&[ratio(1, 2)]);
        let first = e.cover(&ratio(1, 10), &|_| false).unwrap();
        let banned = first.intervals()[0].lo().clone();
        let second = e.cover(&ratio(1, 10), &|x| x == &banned).unwrap();
        assert_ne!(second.intervals()[0].lo(), &banned);
    }
}
