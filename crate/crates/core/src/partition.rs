//! Lazily generated regular partitions of open sets.
//!
//! Each component `(L, R)` is split around a (possibly nudged) split point
//! `m` into a central block `[m - r_L/8, m + r_R/8)`, first side blocks
//! reaching to `m ± r/2`, and then blocks halving in length toward each
//! endpoint. Only the blocks containing requested points and their two
//! neighbors are materialized.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coord::{self, Coord};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::nudge;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularPartition {
    pub members: Vec<Interval>,
    /// `(left, right)` neighbor member indices.
    pub neighbors: Vec<(Option<usize>, Option<usize>)>,
    /// Members that contain a requested point; only these are guaranteed to
    /// carry both neighbors.
    pub core: Vec<bool>,
    pub covered: IntervalSet,
}

impl RegularPartition {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_containing(&self, x: &Coord) -> Option<usize> {
        self.members.iter().position(|m| m.contains(x))
    }
}

struct Split {
    mid: Coord,
    r_left: Coord,
    r_right: Coord,
}

impl Split {
    fn new(component: &Interval, theta: Coord) -> Self {
        let r = coord::half(&component.len());
        let mid = component.center() + theta * &r;
        let r_left = &mid - component.lo();
        let r_right = component.hi() - &mid;
        Split {
            mid,
            r_left,
            r_right,
        }
    }

    fn block(&self, b: i64) -> Interval {
        let eighth = coord::ratio(1, 8);
        let halfc = coord::ratio(1, 2);
        let one = coord::int(1);
        let (lo, hi) = match b {
            0 => (
                &self.mid - &self.r_left * &eighth,
                &self.mid + &self.r_right * &eighth,
            ),
            1 => (
                &self.mid + &self.r_right * &eighth,
                &self.mid + &self.r_right * &halfc,
            ),
            -1 => (
                &self.mid - &self.r_left * &halfc,
                &self.mid - &self.r_left * &eighth,
            ),
            j if j >= 2 => (
                &self.mid + &self.r_right * (&one - coord::pow2(1 - j)),
                &self.mid + &self.r_right * (&one - coord::pow2(-j)),
            ),
            j => {
                let j = -j;
                (
                    &self.mid - &self.r_left * (&one - coord::pow2(-j)),
                    &self.mid - &self.r_left * (&one - coord::pow2(1 - j)),
                )
            }
        };
        Interval::new(lo, hi).expect("block has positive length")
    }

    /// Block index of `y`, or `None` if it lies beyond `budget` halvings.
    fn locate(&self, y: &Coord, budget: u32) -> Option<i64> {
        let eighth = coord::ratio(1, 8);
        let halfc = coord::ratio(1, 2);
        let one = coord::int(1);
        if y >= &(&self.mid + &self.r_right * &eighth) {
            if y < &(&self.mid + &self.r_right * &halfc) {
                return Some(1);
            }
            (2..=budget as i64 + 1)
                .find(|&j| y < &(&self.mid + &self.r_right * (&one - coord::pow2(-j))))
                .filter(|&j| j <= budget as i64)
        } else if y < &(&self.mid - &self.r_left * &eighth) {
            if y >= &(&self.mid - &self.r_left * &halfc) {
                return Some(-1);
            }
            (2..=budget as i64 + 1)
                .find(|&j| y >= &(&self.mid - &self.r_left * (&one - coord::pow2(-j))))
                .filter(|&j| j <= budget as i64)
                .map(|j| -j)
        } else {
            Some(0)
        }
    }
}

/// Members of a regular partition of `cover` that contain a point of
/// `around`, together with their neighbors. Every member endpoint is
/// rejected by `exclude`.
pub fn lazy_regular_partition(
    cover: &IntervalSet,
    around: &[Coord],
    depth_budget: u32,
    exclude: &dyn Fn(&Coord) -> bool,
) -> Result<RegularPartition> {
    let mut by_component: BTreeMap<usize, Vec<&Coord>> = BTreeMap::new();
    for y in around {
        let ci = cover
            .component_index(y)
            .filter(|&ci| cover.intervals()[ci].contains_interior(y))
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "point {} is not interior to the cover",
                    coord::to_f64(y)
                ))
            })?;
        by_component.entry(ci).or_default().push(y);
    }

    // (member, is_core, component, block)
    let mut blocks: Vec<(Interval, bool, usize, i64)> = Vec::new();
    for (&ci, points) in &by_component {
        let component = &cover.intervals()[ci];
        let mut placed = None;
        for t in 0..=nudge::MAX_RETRIES {
            let theta = if t == 0 {
                coord::int(0)
            } else {
                nudge::signed_fraction(t - 1) / coord::int(16)
            };
            let split = Split::new(component, theta);
            let mut core = BTreeMap::new();
            for y in points {
                let b = split.locate(y, depth_budget).ok_or(Error::DepthBudget {
                    budget: depth_budget,
                    point: coord::to_f64(y),
                })?;
                core.insert(b, ());
            }
            let mut wanted: BTreeMap<i64, bool> = BTreeMap::new();
            for &b in core.keys() {
                wanted.entry(b - 1).or_insert(false);
                wanted.entry(b + 1).or_insert(false);
                wanted.insert(b, true);
            }
            let cand: Vec<(Interval, bool, usize, i64)> = wanted
                .iter()
                .map(|(&b, &is_core)| (split.block(b), is_core, ci, b))
                .collect();
            if cand
                .iter()
                .all(|(iv, ..)| !exclude(iv.lo()) && !exclude(iv.hi()))
            {
                placed = Some(cand);
                break;
            }
        }
        let cand = placed.ok_or_else(|| Error::NudgeExhausted {
            retries: nudge::MAX_RETRIES,
            context: format!("partition of component {:?}", component),
        })?;
        blocks.extend(cand);
    }

    blocks.sort_by(|a, b| a.0.lo().cmp(b.0.lo()));
    let position: BTreeMap<(usize, i64), usize> = blocks
        .iter()
        .enumerate()
        .map(|(i, (_, _, ci, b))| ((*ci, *b), i))
        .collect();
    let neighbors = blocks
        .iter()
        .map(|(_, _, ci, b)| {
            (
                position.get(&(*ci, b - 1)).copied(),
                position.get(&(*ci, b + 1)).copied(),
            )
        })
        .collect();
    Ok(RegularPartition {
        core: blocks.iter().map(|b| b.1).collect(),
        members: blocks.into_iter().map(|b| b.0).collect(),
        neighbors,
        covered: cover.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberCheck {
    pub index: usize,
    pub core: bool,
    pub disjoint: bool,
    pub inside_cover: bool,
    /// `None` for non-core members, whose neighbors are not materialized.
    pub adjacency: Option<bool>,
    pub doubling: Option<bool>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub members: Vec<MemberCheck>,
    pub pass: bool,
}

/// Per-member disjointness, adjacency and `2I ⊂ I⁻ ∪ I ∪ I⁺` checks.
pub fn check_regular(p: &RegularPartition) -> RegularityReport {
    let n = p.members.len();
    let members: Vec<MemberCheck> = (0..n)
        .map(|i| {
            let iv = &p.members[i];
            let disjoint = (0..n).all(|j| j == i || !iv.intersects(&p.members[j]));
            let inside_cover = IntervalSet::single(iv.clone()).is_subset_of(&p.covered);
            let core = p.core.get(i).copied().unwrap_or(false);
            let (adjacency, doubling) = if core {
                match p.neighbors.get(i).copied().unwrap_or((None, None)) {
                    (Some(l), Some(r)) => {
                        let (left, right) = (&p.members[l], &p.members[r]);
                        let adj = left.hi() == iv.lo() && iv.hi() == right.lo();
                        let d = iv.doubled();
                        let dbl = adj && left.lo() <= d.lo() && d.hi() <= right.hi();
                        (Some(adj), Some(dbl))
                    }
                    _ => (Some(false), Some(false)),
                }
            } else {
                (None, None)
            };
            let pass = disjoint
                && inside_cover
                && adjacency.unwrap_or(true)
                && doubling.unwrap_or(true);
            MemberCheck {
                index: i,
                core,
                disjoint,
                inside_cover,
                adjacency,
                doubling,
                pass,
            }
        })
        .collect();
    let pass = members.iter().all(|m| m.pass);
    RegularityReport { members, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::{int, ratio};

    fn unit_cover() -> IntervalSet {
        IntervalSet::single(Interval::new(int(0), int(1)).unwrap())
    }

    #[test]
    fn centered_point_in_unit_interval() {
        let p = lazy_regular_partition(&unit_cover(), &[ratio(1, 2)], 20, &|_| false).unwrap();
        let i = p.member_containing(&ratio(1, 2)).unwrap();
        assert_eq!(p.members[i], Interval::new(ratio(7, 16), ratio(9, 16)).unwrap());
        let (l, r) = p.neighbors[i];
        assert_eq!(
            p.members[l.unwrap()],
            Interval::new(ratio(1, 4), ratio(7, 16)).unwrap()
        );
        assert_eq!(
            p.members[r.unwrap()],
            Interval::new(ratio(9, 16), ratio(3, 4)).unwrap()
        );
        let d = p.members[i].doubled();
        assert_eq!(d, Interval::new(ratio(3, 8), ratio(5, 8)).unwrap());
        assert!(check_regular(&p).pass);
    }

    #[test]
    fn two_components_are_independent() {
        let cover = IntervalSet::from_intervals([
            Interval::new(int(0), int(1)).unwrap(),
            Interval::new(int(2), int(3)).unwrap(),
        ]);
        let p = lazy_regular_partition(&cover, &[ratio(1, 2), ratio(5, 2)], 20, &|_| false)
            .unwrap();
        assert_eq!(p.len(), 6);
        assert!(check_regular(&p).pass);
        let a = p.member_containing(&ratio(1, 2)).unwrap();
        let b = p.member_containing(&ratio(5, 2)).unwrap();
        assert!(p.members[a].hi() <= &int(1));
        assert!(p.members[b].lo() >= &int(2));
    }

    #[test]
    fn budget_exhaustion_near_endpoint() {
        let y = coord::pow2(-12);
        let r = lazy_regular_partition(&unit_cover(), &[y], 8, &|_| false);
        assert!(matches!(r, Err(Error::DepthBudget { .. })));
        assert!(lazy_regular_partition(&unit_cover(), &[coord::pow2(-12)], 16, &|_| false).is_ok());
    }

    #[test]
    fn excluded_endpoint_forces_nudge() {
        let banned = ratio(7, 16);
        let p = lazy_regular_partition(&unit_cover(), &[ratio(1, 2)], 20, &|x| x == &banned)
            .unwrap();
        assert!(p.members.iter().all(|m| m.lo() != &banned && m.hi() != &banned));
        assert!(check_regular(&p).pass);
    }

    #[test]
    fn check_regular_flags_short_neighbors() {
        let iv = |a: f64, b: f64| Interval::from_f64(a, b).unwrap();
        let p = RegularPartition {
            members: vec![iv(0.38, 0.4), iv(0.4, 0.5), iv(0.5, 0.52)],
            neighbors: vec![(None, Some(1)), (Some(0), Some(2)), (Some(1), None)],
            core: vec![false, true, false],
            covered: IntervalSet::single(iv(0.0, 1.0)),
        };
        let rep = check_regular(&p);
        assert!(!rep.pass);
        assert_eq!(rep.members[1].adjacency, Some(true));
        assert_eq!(rep.members[1].doubling, Some(false));
    }

    #[test]
    fn check_regular_flags_missing_neighbors() {
        let p = RegularPartition {
            members: vec![Interval::from_f64(0.4, 0.5).unwrap()],
            neighbors: vec![(None, None)],
            core: vec![true],
            covered: unit_cover(),
        };
        assert!(!check_regular(&p).pass);
    }

    #[test]
    fn point_outside_cover_is_rejected() {
        let r = lazy_regular_partition(&unit_cover(), &[int(2)], 10, &|_| false);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
