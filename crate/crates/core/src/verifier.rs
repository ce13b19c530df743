//! Divergence certificates on witness points and L-property audits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constructor::{ConstructionState, Context};
use crate::coord::{self, Coord, Index};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::kernels::{local_lipschitz, sup_deviation_closed, value_at, KernelFamily, TrigCoeffs};

/// Thresholds `10^-1 … 10^-6` reported by the audit.
pub const DECADES: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// 1 for odd `k`, 0 for even `k`.
pub fn parity_target(k: usize) -> u8 {
    (k % 2) as u8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub witness: usize,
    #[serde(with = "coord::serde_coord")]
    pub x: Coord,
    pub k: usize,
    pub member: usize,
    pub nu: Index,
    pub value: f64,
    pub target: u8,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
    /// `2/k ≥ 1`: the row cannot fail.
    pub weak_bound: bool,
    /// `Σ_l (-1)^{l+1} U_ν 𝕀_{G_l}(x)`.
    pub telescoped: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub depth: usize,
    pub rows: Vec<DivergenceRow>,
    /// All rows with `2/k < 1` pass.
    pub pass: bool,
    pub max_telescoping_error: f64,
}

impl DivergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("witness,x,k,nu,value,target,deviation,bound,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.witness,
                coord::to_f64(&r.x),
                r.k,
                r.nu,
                r.value,
                r.target,
                r.deviation,
                r.bound,
                r.pass
            ));
        }
        out
    }
}

/// `|U_{ν(I_k)} 𝕀_G(x) - parity(k)| < 2/k` along every witness chain.
pub fn alternation_check(ctx: &Context, state: &ConstructionState, g: &IntervalSet) -> Result<DivergenceReport> {
    let f = ctx.family.as_ref();
    let mut rows = Vec::new();
    let mut max_tel: f64 = 0.0;
    for (w, x) in state.witnesses.iter().enumerate() {
        for lv in &state.levels {
            let k = lv.level;
            let member = lv
                .witness_members
                .get(w)
                .copied()
                .filter(|&i| lv.members.get(i).is_some_and(|m| m.interval.contains(x)))
                .ok_or(Error::WitnessNotCovered { witness: coord::to_f64(x), level: k })?;
            let nu = lv.members[member].nu.clone();
            let value = value_at(f, &nu, g, x)?;
            let mut telescoped = 0.0;
            for (l, other) in state.levels.iter().enumerate() {
                let v = value_at(f, &nu, &other.g, x)?;
                telescoped += if l % 2 == 0 { v } else { -v };
            }
            max_tel = max_tel.max((value - telescoped).abs());
            let target = parity_target(k);
            let deviation = (value - target as f64).abs();
            let bound = 2.0 / k as f64;
            rows.push(DivergenceRow {
                witness: w,
                x: x.clone(),
                k,
                member,
                nu,
                value,
                target,
                deviation,
                bound,
                pass: deviation < bound,
                weak_bound: bound >= 1.0,
                telescoped,
            });
        }
    }
    let pass = rows.iter().all(|r| r.weak_bound || r.pass);
    Ok(DivergenceReport { depth: state.levels.len(), rows, pass, max_telescoping_error: max_tel })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub witness: usize,
    /// `(k, value)` minimizing the value over even `k`.
    pub min_even: Option<(usize, f64)>,
    pub max_odd: Option<(usize, f64)>,
    /// `1 - 2/k_even - 2/k_odd` for the two largest indices.
    pub certified_gap: f64,
    pub vacuous: bool,
}

pub fn oscillation_summary(report: &DivergenceReport) -> Result<Vec<Oscillation>> {
    if report.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut witnesses: Vec<usize> = report.rows.iter().map(|r| r.witness).collect();
    witnesses.dedup();
    Ok(witnesses
        .into_iter()
        .map(|w| {
            let rows: Vec<&DivergenceRow> = report.rows.iter().filter(|r| r.witness == w).collect();
            let pick = |even: bool| rows.iter().filter(move |r| (r.k % 2 == 0) == even);
            let min_even = pick(true)
                .map(|r| (r.k, r.value))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let max_odd = pick(false)
                .map(|r| (r.k, r.value))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            let ke = pick(true).map(|r| r.k).max();
            let ko = pick(false).map(|r| r.k).max();
            let certified_gap = match (ke, ko) {
                (Some(e), Some(o)) => 1.0 - 2.0 / e as f64 - 2.0 / o as f64,
                _ => f64::NEG_INFINITY,
            };
            Oscillation { witness: w, min_even, max_odd, certified_gap, vacuous: certified_gap <= 0.0 }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub n: u64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LAudit {
    pub family: String,
    pub i: Interval,
    pub a: Interval,
    pub rows: Vec<AuditRow>,
    pub min_n: u64,
    pub min_sup: f64,
    /// First `n` with `sup < threshold`, per threshold of [`DECADES`].
    pub first_below: Vec<(f64, Option<u64>)>,
}

impl LAudit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,sup\n");
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", r.n, r.sup));
        }
        out
    }
}

/// Certified `s_n = sup_{x ∈ A} |U_n 𝕀_I(x) - 1|` over closed `A` for every
/// index up to `n_max`.
pub fn lproperty_audit(
    f: &dyn KernelFamily,
    i: &Interval,
    a: &Interval,
    n_max: u64,
    grid: usize,
) -> Result<LAudit> {
    if !(a.lo() > i.lo() && a.hi() < i.hi()) {
        return Err(Error::Precondition("closure of A must lie inside the interior of I".into()));
    }
    let first = f.first_index().to_u64().unwrap_or(u64::MAX);
    if n_max < first {
        return Err(Error::Precondition(format!("n_max {n_max} below first index {first}")));
    }
    let s = IntervalSet::single(i.clone());
    let affine = (first..=n_max).all(|n| {
        matches!(f.trig_coefficients(&Index::new(n)), Some(TrigCoeffs::Affine { .. }))
    });
    let sups = if affine {
        affine_sweep(f, &s, a, first, n_max, grid.max(2))?
    } else {
        (first..=n_max)
            .map(|n| sup_deviation_closed(f, &Index::new(n), &s, a, 1.0, grid.max(2)))
            .collect::<Result<Vec<_>>>()?
    };
    let rows: Vec<AuditRow> = (first..=n_max).zip(sups).map(|(n, sup)| AuditRow { n, sup }).collect();
    let (min_n, min_sup) = rows
        .iter()
        .min_by(|x, y| x.sup.total_cmp(&y.sup))
        .map(|r| (r.n, r.sup))
        .expect("at least one index");
    let first_below = DECADES
        .iter()
        .map(|&th| (th, rows.iter().find(|r| r.sup < th).map(|r| r.n)))
        .collect();
    Ok(LAudit {
        family: f.name().to_string(),
        i: i.clone(),
        a: a.clone(),
        rows,
        min_n,
        min_sup,
        first_below,
    })
}

/// For `c_k = α + β k`, `U_n 𝕀_S(x) = (α P_0 + β P_1) / 2π` with prefix sums
/// `P_j = Σ_{k<len} k^j t_k(x)`, so all indices share one pass per point.
fn affine_sweep(
    f: &dyn KernelFamily,
    s: &IntervalSet,
    a: &Interval,
    first: u64,
    n_max: u64,
    grid: usize,
) -> Result<Vec<f64>> {
    let coeffs: Vec<(usize, f64, f64)> = (first..=n_max)
        .map(|n| match f.trig_coefficients(&Index::new(n)) {
            Some(TrigCoeffs::Affine { len, alpha, beta }) => (len, alpha, beta),
            _ => unreachable!(),
        })
        .collect();
    let max_len = coeffs.iter().map(|c| c.0).max().unwrap_or(0);
    let (lo, hi) = a.to_f64();
    let h = (hi - lo) / grid as f64;
    let measure = s.measure();
    let mut worst = vec![0.0f64; coeffs.len()];
    let mut p0 = vec![0.0f64; max_len + 1];
    let mut p1 = vec![0.0f64; max_len + 1];
    for gi in 0..grid {
        let x = lo + (gi as f64 + 0.5) * h;
        let mut acc0 = 0.0;
        let mut acc1 = 0.0;
        for k in 0..max_len {
            let t = if k == 0 {
                measure
            } else {
                let kf = k as f64;
                2.0 * s
                    .approx()
                    .iter()
                    .map(|&(u, v)| ((kf * (x - u)).sin() - (kf * (x - v)).sin()) / kf)
                    .sum::<f64>()
            };
            acc0 += t;
            acc1 += k as f64 * t;
            p0[k + 1] = acc0;
            p1[k + 1] = acc1;
        }
        for (w, &(len, alpha, beta)) in worst.iter_mut().zip(&coeffs) {
            let v = (alpha * p0[len] + beta * p1[len]) / (2.0 * PI);
            *w = w.max((v - 1.0).abs());
        }
    }
    (first..=n_max)
        .zip(worst)
        .map(|(n, w)| Ok(w + local_lipschitz(f, &Index::new(n), s, a)? * h / 2.0))
        .collect()
}

/// `(n, U_n 𝕀_G(x))` over the given indices.
pub fn plot_series(ctx: &Context, g: &IntervalSet, x: &Coord, indices: &[Index]) -> Result<Vec<(Index, f64)>> {
    indices
        .iter()
        .map(|n| Ok((n.clone(), value_at(ctx.family.as_ref(), n, g, x)?)))
        .collect()
}
