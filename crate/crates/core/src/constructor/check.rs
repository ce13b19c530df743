//! Verification of the construction invariants on a stored state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coord;
use crate::error::Result;
use crate::interval::{Interval, IntervalSet};
use crate::kernels::{certify_below, Domain, Metric};
use crate::partition::check_regular;

use super::{delta, Context, ConstructionState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub condition: String,
    pub level: usize,
    pub member: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub name: String,
    pub checks: usize,
    pub failed: usize,
    /// No instance exists at this depth.
    pub vacuous: bool,
    /// Smallest `threshold - value` over quantitative checks.
    pub min_slack: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub levels: usize,
    pub conditions: Vec<ConditionSummary>,
    pub failures: Vec<Failure>,
    pub pass: bool,
}

impl ConditionReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

struct Tally {
    name: &'static str,
    checks: usize,
    failed: usize,
    vacuous: bool,
    min_slack: Option<f64>,
    failures: Vec<Failure>,
}

impl Tally {
    fn new(name: &'static str, vacuous: bool) -> Self {
        Tally { name, checks: 0, failed: 0, vacuous, min_slack: None, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, level: usize, member: Option<usize>, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            self.failures.push(Failure {
                condition: self.name.to_string(),
                level,
                member,
                detail: detail(),
            });
        }
    }

    fn slack(&mut self, s: f64) {
        self.min_slack = Some(self.min_slack.map_or(s, |m| m.min(s)));
    }

    fn finish(self, out: &mut ConditionReport) {
        out.conditions.push(ConditionSummary {
            name: self.name.to_string(),
            checks: self.checks,
            failed: self.failed,
            vacuous: self.vacuous,
            min_slack: self.min_slack,
            pass: self.failed == 0,
        });
        out.failures.extend(self.failures);
    }
}

/// Points within `r` of `iv` in the family metric.
fn neighborhood(dom: &Domain, iv: &Interval, r: f64) -> IntervalSet {
    let (lo, hi) = iv.to_f64();
    let (dlo, dhi) = dom.bounds_f64();
    let mut pieces = vec![(lo - r, hi + r)];
    if let Metric::Circular { period } = dom.metric {
        pieces.push((lo - r + period, hi + r + period));
        pieces.push((lo - r - period, hi + r - period));
    }
    IntervalSet::from_intervals(pieces.into_iter().filter_map(|(a, b)| {
        let a = a.max(dlo);
        let b = b.min(dhi);
        (a < b).then(|| Interval::from_f64(a, b).ok()).flatten()
    }))
}

/// Conditions 1)–6) of the construction, the shrink bound
/// `|G_{p+1} ∩ I| < δ(I)`, partition regularity and witness chains.
pub fn check_conditions(ctx: &Context, state: &ConstructionState) -> Result<ConditionReport> {
    let f = ctx.family.as_ref();
    let levels = &state.levels;
    let depth = levels.len();
    let grid = state.config.effective_grid();
    let single = depth <= 1;
    let mut report = ConditionReport { levels: depth, conditions: Vec::new(), failures: Vec::new(), pass: true };

    // 1) endpoints avoid E
    let mut t = Tally::new("1_endpoints", depth == 0);
    for lv in levels {
        for (i, m) in lv.members.iter().enumerate() {
            for e in [m.interval.lo(), m.interval.hi()] {
                let bad = ctx.nullset.member(e);
                t.record(!bad, lv.level, Some(i), || format!("endpoint {} lies in E", coord::to_f64(e)));
            }
        }
    }
    t.finish(&mut report);

    // 2) members of different levels nest or are disjoint
    let mut t = Tally::new("2_nesting", single);
    for (a, la) in levels.iter().enumerate() {
        for lb in &levels[a + 1..] {
            for (j, mb) in lb.members.iter().enumerate() {
                for (i, ma) in la.members.iter().enumerate() {
                    let ok = !ma.interval.intersects(&mb.interval)
                        || ma.interval.contains_interval(&mb.interval);
                    t.record(ok, lb.level, Some(j), || {
                        format!("overlaps level {} member {i} without nesting", la.level)
                    });
                }
            }
        }
        if a > 0 {
            let prev = &levels[a - 1];
            for (i, m) in la.members.iter().enumerate() {
                let ok = m
                    .parent
                    .and_then(|p| prev.members.get(p))
                    .is_some_and(|p| p.interval.contains_interval(&m.interval));
                t.record(ok, la.level, Some(i), || "parent missing or not containing".into());
            }
        }
    }
    t.finish(&mut report);

    // 3) E ⊂ G_k ⊂ G_{k-1}
    let mut t = Tally::new("3_nested_sets", depth == 0);
    for (a, lv) in levels.iter().enumerate() {
        t.record(ctx.nullset.covered_by(&lv.g), lv.level, None, || "E not covered".into());
        if a > 0 {
            t.record(lv.g.is_subset_of(&levels[a - 1].g), lv.level, None, || {
                "G_k not inside G_{k-1}".into()
            });
        }
    }
    t.finish(&mut report);

    // partition members regular and inside G_k
    let mut t = Tally::new("regular_partition", depth == 0);
    for lv in levels {
        let reg = check_regular(&lv.fragment());
        for mc in &reg.members {
            t.record(mc.pass, lv.level, Some(mc.index), || format!("{mc:?}"));
        }
    }
    t.finish(&mut report);

    // 4) ν non-decreasing along nested members
    let mut t = Tally::new("4_nu_monotone", single);
    for (a, lv) in levels.iter().enumerate().skip(1) {
        for (i, m) in lv.members.iter().enumerate() {
            for anc in &levels[..a] {
                for am in anc.members.iter().filter(|am| am.interval.contains_interval(&m.interval)) {
                    t.record(m.nu >= am.nu, lv.level, Some(i), || {
                        format!("ν = {} below ancestor ν = {} at level {}", m.nu, am.nu, anc.level)
                    });
                }
            }
        }
    }
    t.finish(&mut report);

    // 5) sup_I |U_ν 𝕀_{G_l} - 1| < 1/k^2 for I at level k, l ≤ k
    let mut t = Tally::new("5_near_one", single);
    let jobs: Vec<(usize, usize, usize)> = levels
        .iter()
        .flat_map(|lv| {
            (0..lv.members.len()).flat_map(move |i| (1..=lv.level).map(move |l| (lv.level, i, l)))
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(k, i, l)| {
            let m = &levels[k - 1].members[i];
            let th = 1.0 / (k * k) as f64;
            certify_below(f, &m.nu, &levels[l - 1].g, &m.interval, 1.0, th, grid).map(|c| (th, c))
        })
        .collect::<Result<Vec<_>>>()?;
    for (&(k, i, l), (th, c)) in jobs.iter().zip(results) {
        if c.pass {
            t.slack(th - c.bound);
        }
        t.record(c.pass, k, Some(i), || format!("sup |U 𝕀_G{l} - 1| ≥ {} (bound {th})", c.bound));
    }
    t.finish(&mut report);

    // 6) sup_I |U_ν 𝕀_{G_k}| < 1/k^2 for I at level l < k, certified directly
    // and through near/far estimates
    let mut t = Tally::new("6_far_small", single);
    let mut chain = Tally::new("6_chain", single);
    let jobs: Vec<(usize, usize, usize)> = levels
        .iter()
        .flat_map(|lv| {
            (0..lv.members.len())
                .flat_map(move |i| (lv.level + 1..=depth).map(move |k| (lv.level, i, k)))
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(l, i, k)| -> Result<_> {
            let m = &levels[l - 1].members[i];
            let gk = &levels[k - 1].g;
            let th = 1.0 / (k * k) as f64;
            let c = certify_below(f, &m.nu, gk, &m.interval, 0.0, th, grid)?;
            let r = m.interval.len_f64() / 2.0;
            let near_set = neighborhood(f.domain(), &m.interval, r);
            let near = f.bound(&m.nu)? * gk.intersect(&near_set).measure();
            let far = ctx.phi(r) * gk.subtract(&near_set).measure();
            Ok((th, c, near + far))
        })
        .collect::<Result<Vec<_>>>()?;
    for (&(l, i, k), (th, c, est)) in jobs.iter().zip(results) {
        if c.pass {
            t.slack(th - c.bound);
        }
        t.record(c.pass, l, Some(i), || format!("sup |U 𝕀_G{k}| ≥ {} (bound {th})", c.bound));
        chain.slack(th - est);
        chain.record(est < th, l, Some(i), || format!("near + far = {est} for G{k} (bound {th})"));
    }
    t.finish(&mut report);
    chain.finish(&mut report);

    // |G_{p+1} ∩ I| < δ(I) with δ recomputed from the stored indices
    let mut t = Tally::new("shrink", single);
    for p in 1..depth {
        let next = &levels[p].g;
        for l in 1..=p {
            for (i, m) in levels[l - 1].members.iter().enumerate() {
                let d = delta(ctx, state, l, i, p)?;
                let got = next.intersect_interval(&m.interval).measure();
                t.slack(d - got);
                t.record(got < d, l, Some(i), || format!("|G{} ∩ I| = {got} ≥ δ = {d}", p + 1));
            }
        }
        if let Some(eps) = &levels[p].eps {
            let ok = next.measure_exact() < *eps;
            t.record(ok, p + 1, None, || format!("|G{}| exceeds its cover budget", p + 1));
        }
    }
    t.finish(&mut report);

    // witness chains I_1 ⊃ … ⊃ I_K with non-decreasing ν
    let mut t = Tally::new("witness_chain", depth == 0);
    for (w, x) in state.witnesses.iter().enumerate() {
        let mut last: Option<(&Interval, &crate::coord::Index)> = None;
        for lv in levels {
            let hits: Vec<usize> = lv
                .members
                .iter()
                .enumerate()
                .filter(|(_, m)| m.interval.contains(x))
                .map(|(i, _)| i)
                .collect();
            let ok = hits.len() == 1 && lv.witness_members.get(w) == hits.first();
            t.record(ok, lv.level, hits.first().copied(), || format!("witness {w} not uniquely placed"));
            if let Some(&i) = hits.first() {
                let m = &lv.members[i];
                if let Some((iv, nu)) = last {
                    let ok = iv.contains_interval(&m.interval) && &m.nu >= nu;
                    t.record(ok, lv.level, Some(i), || format!("witness {w} chain broken"));
                }
                last = Some((&m.interval, &m.nu));
            }
        }
    }
    t.finish(&mut report);

    report.pass = report.conditions.iter().all(|c| c.pass);
    Ok(report)
}
