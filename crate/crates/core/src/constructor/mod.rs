//! Level-by-level construction of the nested sets `G_1 ⊃ G_2 ⊃ …`, their
//! regular partitions, operator indices `ν(I)` and shrink bounds `δ(I)`.

mod check;
pub mod faults;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coord::{self, Coord, Index};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::kernels::{certify_below, Family, FamilySpec};
use crate::majorant::{phi_at, MajorantTable};
use crate::nudge;
use crate::nullset::{NullSet, NullSetSpec};
use crate::partition::{lazy_regular_partition, RegularPartition};

pub use check::{check_conditions, ConditionReport, ConditionSummary, Failure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionConfig {
    /// Number of levels `K`.
    pub depth: usize,
    /// Number of witness points of `E` followed through the construction.
    pub witnesses: usize,
    /// Candidate indices examined per `ν` search.
    pub nu_search_cap: u64,
    /// Minimum sample count for certified suprema (multiplied by `safety`).
    pub grid: usize,
    /// Divides `δ` and multiplies the grid.
    pub safety: f64,
    /// Halvings allowed when placing a partition member.
    pub depth_budget: u32,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            depth: 4,
            witnesses: 1,
            nu_search_cap: 4096,
            grid: 64,
            safety: 2.0,
            depth_budget: 64,
        }
    }
}

impl ConstructionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Precondition(m.to_string()));
        if self.depth < 2 {
            return bad("depth K must be at least 2");
        }
        if self.witnesses < 1 {
            return bad("at least one witness is required");
        }
        if self.nu_search_cap < 1 {
            return bad("nu_search_cap must be positive");
        }
        if self.grid < 2 {
            return bad("grid must be at least 2");
        }
        if !(self.safety >= 1.0 && self.safety.is_finite()) {
            return bad("safety must be a finite number ≥ 1");
        }
        Ok(())
    }

    pub fn effective_grid(&self) -> usize {
        (self.grid as f64 * self.safety).ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub interval: Interval,
    /// Contains a witness; only core members are guaranteed both neighbors.
    pub core: bool,
    pub left: Option<usize>,
    pub right: Option<usize>,
    /// Member of the previous level containing this one.
    pub parent: Option<usize>,
    pub nu: Index,
    /// Candidates examined by the `ν` search.
    pub nu_steps: u64,
    /// `δ(I)` computed when the next level was built.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub g: IntervalSet,
    /// Cover budget used for this level (`None` at level 1).
    #[serde(with = "coord::serde_coord_opt")]
    pub eps: Option<Coord>,
    /// Smallest `δ` over all members of earlier levels.
    pub delta_min: Option<f64>,
    pub members: Vec<MemberRecord>,
    /// Member index containing each witness.
    pub witness_members: Vec<usize>,
}

impl LevelRecord {
    pub fn fragment(&self) -> RegularPartition {
        RegularPartition {
            members: self.members.iter().map(|m| m.interval.clone()).collect(),
            neighbors: self.members.iter().map(|m| (m.left, m.right)).collect(),
            core: self.members.iter().map(|m| m.core).collect(),
            covered: self.g.clone(),
        }
    }
}

/// Resumable checkpoint of a construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionState {
    pub family: FamilySpec,
    pub nullset: NullSetSpec,
    pub config: ConstructionConfig,
    #[serde(with = "coord::serde_coords")]
    pub witnesses: Vec<Coord>,
    pub levels: Vec<LevelRecord>,
}

impl ConstructionState {
    pub fn new(family: FamilySpec, nullset: NullSetSpec, config: ConstructionConfig) -> Self {
        ConstructionState { family, nullset, config, witnesses: Vec::new(), levels: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn sets(&self) -> Vec<IntervalSet> {
        self.levels.iter().map(|l| l.g.clone()).collect()
    }
}

/// Source of `φ` for the shrink bound.
#[derive(Clone, Debug)]
pub enum PhiSource {
    Analytic,
    /// Estimated table, used with a factor 2.
    Table(MajorantTable),
}

/// Objects rebuilt from a state's specs.
#[derive(Clone, Debug)]
pub struct Context {
    pub family: Family,
    pub nullset: NullSet,
    pub phi: PhiSource,
}

impl Context {
    pub fn new(state: &ConstructionState) -> Result<Context> {
        let family = state.family.build()?;
        let dom = family.domain().clone();
        let nullset = NullSet::new(state.nullset.clone(), dom.lo.clone(), dom.hi.clone())?;
        let phi = if family.analytic_phi(1.0).is_some() {
            PhiSource::Analytic
        } else {
            return Err(Error::Unsupported {
                family: family.name().to_string(),
                what: "analytic majorant (supply an estimated table)".into(),
            });
        };
        Ok(Context { family, nullset, phi })
    }

    pub fn with_table(state: &ConstructionState, table: MajorantTable) -> Result<Context> {
        let family = state.family.build()?;
        let dom = family.domain().clone();
        let nullset = NullSet::new(state.nullset.clone(), dom.lo.clone(), dom.hi.clone())?;
        Ok(Context { family, nullset, phi: PhiSource::Table(table) })
    }

    pub fn phi(&self, u: f64) -> f64 {
        match &self.phi {
            PhiSource::Analytic => self.family.analytic_phi(u).unwrap_or(f64::INFINITY),
            PhiSource::Table(t) => 2.0 * phi_at(t, u),
        }
    }
}

/// `1 / (6 (p+1)^2 max{M…, φ(|I|/2)/|I|}) / safety`.
pub fn delta_formula(p: usize, m_values: &[f64], phi_ratio: f64, safety: f64) -> f64 {
    let q = (p + 1) as f64;
    let max = m_values.iter().copied().fold(phi_ratio, f64::max);
    1.0 / (6.0 * q * q * max) / safety
}

/// `δ(I)` for member `member` of level `level` (1-based) at stage `p`.
/// Absent neighbors are skipped; a neighbor without an index is an error.
pub fn delta(
    ctx: &Context,
    state: &ConstructionState,
    level: usize,
    member: usize,
    p: usize,
) -> Result<f64> {
    let rec = &state.levels[level - 1];
    let m = &rec.members[member];
    let mut ms = vec![ctx.family.bound(&m.nu)?];
    for nb in [m.left, m.right].into_iter().flatten() {
        let other = rec
            .members
            .get(nb)
            .ok_or(Error::MissingNeighbor { level, member })?;
        ms.push(ctx.family.bound(&other.nu)?);
    }
    let len = m.interval.len_f64();
    Ok(delta_formula(p, &ms, ctx.phi(len / 2.0) / len, state.config.safety))
}

/// Smallest `n ≥ lower` (in candidate order) with
/// `sup_{x∈I} |U_n 𝕀_{G_l}(x) - 1| < 1/k^2` certified for every set.
#[allow(clippy::too_many_arguments)]
pub fn find_nu(
    ctx: &Context,
    sets: &[IntervalSet],
    iv: &Interval,
    k: usize,
    lower: &Index,
    cap: u64,
    grid: usize,
    member: usize,
) -> Result<(Index, u64)> {
    let f = ctx.family.as_ref();
    let threshold = 1.0 / (k * k) as f64;
    let mut n = lower.clone().max(f.first_index());
    for step in 1..=cap {
        let mut ok = true;
        // deepest set first: it is the one most likely to fail
        for s in sets.iter().rev() {
            if !certify_below(f, &n, s, iv, 1.0, threshold, grid)?.pass {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok((n, step));
        }
        n = f.next_candidate(&n, iv);
    }
    Err(Error::NuSearchExhausted { level: k, member, steps: cap })
}

fn assign_nu(
    ctx: &Context,
    state: &ConstructionState,
    sets: &[IntervalSet],
    part: &RegularPartition,
    parents: &[Option<usize>],
    k: usize,
) -> Result<Vec<MemberRecord>> {
    let first = ctx.family.first_index();
    let results: Vec<Result<(Index, u64)>> = part
        .members
        .par_iter()
        .enumerate()
        .map(|(i, iv)| {
            let lower = match parents[i] {
                Some(pi) => state.levels[k - 2].members[pi].nu.clone(),
                None => first.clone(),
            };
            find_nu(
                ctx,
                sets,
                iv,
                k,
                &lower,
                state.config.nu_search_cap,
                state.config.effective_grid(),
                i,
            )
        })
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let (nu, steps) = r?;
            Ok(MemberRecord {
                interval: part.members[i].clone(),
                core: part.core[i],
                left: part.neighbors[i].0,
                right: part.neighbors[i].1,
                parent: parents[i],
                nu,
                nu_steps: steps,
                delta: None,
            })
        })
        .collect()
}

fn witness_members(part: &RegularPartition, witnesses: &[Coord], level: usize) -> Result<Vec<usize>> {
    witnesses
        .iter()
        .map(|w| {
            part.member_containing(w).ok_or(Error::WitnessNotCovered {
                witness: coord::to_f64(w),
                level,
            })
        })
        .collect()
}

/// Chooses witnesses and builds level 1 on the whole domain.
pub fn build_level1(ctx: &Context, state: &mut ConstructionState) -> Result<()> {
    state.config.validate()?;
    if !state.levels.is_empty() {
        return Err(Error::Precondition("level 1 already built".into()));
    }
    let dom = ctx.family.domain();
    // boundary points of E cannot be interior to a partition member
    let pool = ctx.nullset.witnesses(state.config.witnesses.max(64)).or_else(|_| {
        ctx.nullset.witnesses(state.config.witnesses)
    })?;
    let interior: Vec<Coord> = pool
        .into_iter()
        .filter(|w| w > &dom.lo && w < &dom.hi)
        .take(state.config.witnesses)
        .collect();
    if interior.len() < state.config.witnesses {
        return Err(Error::NotEnoughPoints {
            available: interior.len(),
            requested: state.config.witnesses,
        });
    }
    let g1 = dom.full_set();
    let e = &ctx.nullset;
    let part =
        lazy_regular_partition(&g1, &interior, state.config.depth_budget, &|y| e.member(y))?;
    let parents = vec![None; part.len()];
    let wm = witness_members(&part, &interior, 1)?;
    state.witnesses = interior;
    let members = assign_nu(ctx, state, std::slice::from_ref(&g1), &part, &parents, 1)?;
    state.levels.push(LevelRecord {
        level: 1,
        g: g1,
        eps: None,
        delta_min: None,
        members,
        witness_members: wm,
    });
    Ok(())
}

/// Adds level `p + 1`.
pub fn refine(ctx: &Context, state: &mut ConstructionState) -> Result<()> {
    let p = state.levels.len();
    if p == 0 {
        return Err(Error::Precondition("refine requires level 1".into()));
    }
    let mut deltas: Vec<Vec<f64>> = Vec::with_capacity(p);
    for l in 1..=p {
        let ds = (0..state.levels[l - 1].members.len())
            .map(|i| delta(ctx, state, l, i, p))
            .collect::<Result<Vec<_>>>()?;
        deltas.push(ds);
    }
    let delta_min = deltas.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    if !(delta_min > 0.0 && delta_min.is_finite()) {
        return Err(Error::Precondition(format!("non-positive shrink bound {delta_min}")));
    }
    for (m, &d) in state.levels[p - 1].members.iter_mut().zip(&deltas[p - 1]) {
        m.delta = Some(d);
    }

    let prev = &state.levels[p - 1];
    let mut eps = coord::from_f64(delta_min);
    let mut placed = None;
    for _ in 0..=nudge::MAX_RETRIES {
        let cover = ctx.nullset.cover(&eps, &|_| false)?;
        let g = cover.intersect(&prev.g);
        let nested = state.witnesses.iter().zip(&prev.witness_members).all(|(w, &wi)| {
            g.component(w)
                .is_some_and(|c| c.contains_interior(w) && prev.members[wi].interval.contains_interval(c))
        });
        if nested {
            placed = Some(g);
            break;
        }
        eps /= coord::int(4);
    }
    let g = placed.ok_or_else(|| Error::NudgeExhausted {
        retries: nudge::MAX_RETRIES,
        context: format!("aligning level {} components inside level {p} members", p + 1),
    })?;

    let e = &ctx.nullset;
    let part = lazy_regular_partition(&g, &state.witnesses, state.config.depth_budget, &|y| {
        e.member(y)
    })?;
    let parents = part
        .members
        .iter()
        .map(|iv| {
            prev.members
                .iter()
                .position(|m| m.interval.contains_interval(iv))
                .map(Some)
                .ok_or_else(|| {
                    Error::Precondition(format!("level {} member {:?} has no parent", p + 1, iv.to_f64()))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let wm = witness_members(&part, &state.witnesses, p + 1)?;
    let mut sets = state.sets();
    sets.push(g.clone());
    let members = assign_nu(ctx, state, &sets, &part, &parents, p + 1)?;
    state.levels.push(LevelRecord {
        level: p + 1,
        g,
        eps: Some(eps),
        delta_min: Some(delta_min),
        members,
        witness_members: wm,
    });
    Ok(())
}

/// Result of [`construct`]: the state reached and the abort diagnostic, if any.
#[derive(Debug)]
pub struct Outcome {
    pub state: ConstructionState,
    pub aborted: Option<Error>,
}

/// Builds (or resumes) levels up to `config.depth`. Failures after level 1
/// keep the partial state.
pub fn construct(ctx: &Context, mut state: ConstructionState) -> Result<Outcome> {
    state.config.validate()?;
    if state.levels.is_empty() {
        if let Err(e) = build_level1(ctx, &mut state) {
            return match e {
                Error::NuSearchExhausted { .. } => Ok(Outcome { state, aborted: Some(e) }),
                other => Err(other),
            };
        }
    }
    while state.levels.len() < state.config.depth {
        if let Err(e) = refine(ctx, &mut state) {
            return Ok(Outcome { state, aborted: Some(e) });
        }
    }
    Ok(Outcome { state, aborted: None })
}

/// `⋃ (G_{2i-1} \ G_{2i})`, plus `G_K` when `K` is odd.
pub fn assemble_g(state: &ConstructionState) -> IntervalSet {
    let mut out = IntervalSet::empty();
    for pair in state.levels.chunks(2) {
        let piece = match pair {
            [odd, even] => odd.g.subtract(&even.g),
            [odd] => odd.g.clone(),
            _ => unreachable!(),
        };
        out = out.union(&piece);
    }
    out
}
