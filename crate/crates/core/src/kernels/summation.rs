//! Linear means `Σ_j a_nj U_j` of a base operator sequence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coord::{Coord, Index};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

use super::{Domain, Family, KernelFamily, Shape, TrigCoeffs};

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum SummationMatrix {
    /// `a_nj = 1/n` for `0 ≤ j < n`, `n ≥ 1`.
    Cesaro,
    Identity,
    /// Explicit sparse rows `n → [(j, a_nj)]`.
    Rows(BTreeMap<u64, Vec<(u64, f64)>>),
}

/// JSON form: a preset name or `{"rows": {"n": [[j, a], ...]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Preset(String),
    Rows { rows: BTreeMap<String, Vec<(u64, f64)>> },
}

impl MatrixSpec {
    pub fn build(&self) -> Result<SummationMatrix> {
        match self {
            MatrixSpec::Preset(name) => match name.as_str() {
                "cesaro" => Ok(SummationMatrix::Cesaro),
                "identity" => Ok(SummationMatrix::Identity),
                other => Err(Error::Parse(format!("unknown summation preset `{other}`"))),
            },
            MatrixSpec::Rows { rows } => {
                let mut out = BTreeMap::new();
                for (k, row) in rows {
                    let n: u64 = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("row key `{k}` is not an index")))?;
                    out.insert(n, row.clone());
                }
                Ok(SummationMatrix::Rows(out))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowCheck {
    pub n: u64,
    pub row_sum: f64,
    pub max_abs_entry: f64,
    pub abs_sum: f64,
    pub sum_is_one: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub rows: Vec<RowCheck>,
    /// Largest absolute row sum over the checked rows.
    pub abs_row_sup: f64,
    /// `|row sum - 1|` of the last checked row.
    pub last_row_sum_error: f64,
    /// Largest entry of the last checked row.
    pub last_row_max_entry: f64,
    pub flagged_rows: Vec<u64>,
}

impl SummationMatrix {
    pub fn row(&self, n: &Index) -> Result<Vec<(Index, f64)>> {
        match self {
            SummationMatrix::Cesaro => {
                let m = n
                    .to_u64()
                    .filter(|m| (1..=super::trig::MAX_TRIG_INDEX).contains(m))
                    .ok_or_else(|| Error::IndexOutOfRange {
                        family: "cesaro".into(),
                        index: n.to_string(),
                    })?;
                let a = 1.0 / m as f64;
                Ok((0..m).map(|j| (Index::new(j), a)).collect())
            }
            SummationMatrix::Identity => Ok(vec![(n.clone(), 1.0)]),
            SummationMatrix::Rows(rows) => n
                .to_u64()
                .and_then(|k| rows.get(&k))
                .map(|r| r.iter().map(|&(j, a)| (Index::new(j), a)).collect())
                .ok_or_else(|| Error::IndexOutOfRange {
                    family: "summation rows".into(),
                    index: n.to_string(),
                }),
        }
    }

    /// Row sums, entry sizes and absolute row sums of stored rows; `Cesaro`
    /// is checked on rows `1..=max_rows`.
    pub fn regularity(&self, max_rows: u64) -> RegularityReport {
        let ns: Vec<u64> = match self {
            SummationMatrix::Cesaro => (1..=max_rows).collect(),
            SummationMatrix::Identity => (0..max_rows).collect(),
            SummationMatrix::Rows(rows) => rows.keys().copied().collect(),
        };
        let rows: Vec<RowCheck> = ns
            .iter()
            .filter_map(|&n| {
                let row = self.row(&Index::new(n)).ok()?;
                let row_sum: f64 = row.iter().map(|r| r.1).sum();
                let abs_sum: f64 = row.iter().map(|r| r.1.abs()).sum();
                let max_abs_entry = row.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
                Some(RowCheck {
                    n,
                    row_sum,
                    max_abs_entry,
                    abs_sum,
                    sum_is_one: (row_sum - 1.0).abs() <= ROW_SUM_TOL * row.len().max(1) as f64,
                })
            })
            .collect();
        let last = rows.last();
        RegularityReport {
            abs_row_sup: rows.iter().map(|r| r.abs_sum).fold(0.0, f64::max),
            last_row_sum_error: last.map_or(f64::NAN, |r| (r.row_sum - 1.0).abs()),
            last_row_max_entry: last.map_or(f64::NAN, |r| r.max_abs_entry),
            flagged_rows: rows.iter().filter(|r| !r.sum_is_one).map(|r| r.n).collect(),
            rows,
        }
    }

    fn abs_row_sup(&self) -> f64 {
        match self {
            SummationMatrix::Cesaro | SummationMatrix::Identity => 1.0,
            SummationMatrix::Rows(_) => self.regularity(0).abs_row_sup,
        }
    }
}

#[derive(Debug)]
pub struct SummationFamily {
    base: Family,
    matrix: SummationMatrix,
    name: String,
    abs_row_sup: f64,
}

impl SummationFamily {
    pub fn new(base: Family, matrix: SummationMatrix) -> Result<Self> {
        let start = base.first_index();
        match &matrix {
            SummationMatrix::Cesaro if start > Index::new(0) => {
                return Err(Error::Precondition(format!(
                    "cesaro rows start at index 0, `{}` starts at {start}",
                    base.name()
                )))
            }
            SummationMatrix::Rows(rows) => {
                if rows.is_empty() {
                    return Err(Error::Precondition("summation matrix has no rows".into()));
                }
                for (n, row) in rows {
                    if row.iter().any(|(_, a)| !a.is_finite()) {
                        return Err(Error::NonFiniteRow(n.to_string()));
                    }
                    if row.iter().any(|(j, _)| Index::new(*j) < start) {
                        return Err(Error::Precondition(format!(
                            "row {n} references an index below {start}"
                        )));
                    }
                }
            }
            _ => {}
        }
        let label = match &matrix {
            SummationMatrix::Cesaro => "cesaro",
            SummationMatrix::Identity => "identity",
            SummationMatrix::Rows(_) => "rows",
        };
        Ok(SummationFamily {
            name: format!("{}[{}]", label, base.name()),
            abs_row_sup: matrix.abs_row_sup(),
            base,
            matrix,
        })
    }

    pub fn matrix(&self) -> &SummationMatrix {
        &self.matrix
    }

    pub fn base(&self) -> &Family {
        &self.base
    }
}

impl KernelFamily for SummationFamily {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain(&self) -> &Domain {
        self.base.domain()
    }

    fn first_index(&self) -> Index {
        match &self.matrix {
            SummationMatrix::Cesaro => Index::new(1),
            SummationMatrix::Identity => self.base.first_index(),
            SummationMatrix::Rows(rows) => Index::new(*rows.keys().next().expect("non-empty")),
        }
    }

    fn shape(&self) -> Shape {
        self.base.shape()
    }

    fn eval_kernel(&self, n: &Index, x: f64, t: f64) -> Result<f64> {
        if let Some(c) = self.trig_coefficients(n) {
            return Ok(c.kernel(x - t));
        }
        self.matrix
            .row(n)?
            .iter()
            .map(|(j, a)| Ok(a * self.base.eval_kernel(j, x, t)?))
            .sum()
    }

    fn bound(&self, n: &Index) -> Result<f64> {
        self.matrix
            .row(n)?
            .iter()
            .map(|(j, a)| Ok(a.abs() * self.base.bound(j)?))
            .sum()
    }

    fn apply_indicator(&self, n: &Index, s: &IntervalSet, x: &Coord) -> Result<f64> {
        if let Some(c) = self.trig_coefficients(n) {
            return Ok(c.integrate(s.approx(), crate::coord::to_f64(x)));
        }
        self.matrix
            .row(n)?
            .iter()
            .map(|(j, a)| Ok(a * self.base.apply_indicator(j, s, x)?))
            .sum()
    }

    fn apply_indicator_f64(&self, n: &Index, s: &IntervalSet, x: f64) -> Result<f64> {
        if let Some(c) = self.trig_coefficients(n) {
            return Ok(c.integrate(s.approx(), x));
        }
        self.apply_indicator(n, s, &crate::coord::from_f64(x))
    }

    fn analytic_phi(&self, u: f64) -> Option<f64> {
        // |Σ a_nj K_j| ≤ Σ |a_nj| φ_base
        self.base.analytic_phi(u).map(|p| self.abs_row_sup * p)
    }

    fn breakpoints(&self, n: &Index, window: &Interval) -> Result<Vec<Coord>> {
        let mut out = Vec::new();
        for (j, _) in self.matrix.row(n)? {
            out.extend(self.base.breakpoints(&j, window)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn trig_coefficients(&self, n: &Index) -> Option<TrigCoeffs> {
        let row = self.matrix.row(n).ok()?;
        let parts: Vec<(f64, TrigCoeffs)> = row
            .iter()
            .map(|(j, a)| Some((*a, self.base.trig_coefficients(j)?)))
            .collect::<Option<_>>()?;
        let len = parts.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
        // difference arrays for the affine pieces
        let mut d_alpha = vec![0.0; len + 1];
        let mut d_beta = vec![0.0; len + 1];
        let mut dense = vec![0.0; len];
        for (a, c) in &parts {
            match c {
                TrigCoeffs::Affine {
                    len: l,
                    alpha,
                    beta,
                } => {
                    d_alpha[0] += a * alpha;
                    d_alpha[*l] -= a * alpha;
                    d_beta[0] += a * beta;
                    d_beta[*l] -= a * beta;
                }
                TrigCoeffs::Dense(v) => {
                    for (k, ck) in v.iter().enumerate() {
                        dense[k] += a * ck;
                    }
                }
            }
        }
        let (mut alpha, mut beta) = (0.0, 0.0);
        for k in 0..len {
            alpha += d_alpha[k];
            beta += d_beta[k];
            dense[k] += alpha + beta * k as f64;
        }
        Some(TrigCoeffs::Dense(dense))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{HaarDyadic, TrigFamily};
    use std::sync::Arc;

    #[test]
    fn cesaro_over_dirichlet_is_fejer() {
        let t = SummationFamily::new(Arc::new(TrigFamily::dirichlet()), SummationMatrix::Cesaro)
            .unwrap();
        let f = TrigFamily::fejer();
        for n in [1u64, 2, 5, 33] {
            let n = Index::new(n);
            assert!((t.bound(&n).unwrap() - f.bound(&n).unwrap()).abs() < 1e-12);
            for i in 0..40 {
                let v = -3.0 + 6.0 * i as f64 / 40.0;
                let a = t.eval_kernel(&n, v, 0.1).unwrap();
                let b = f.eval_kernel(&n, v, 0.1).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_leaves_base_unchanged() {
        let base: Family = Arc::new(HaarDyadic::new());
        let t = SummationFamily::new(base.clone(), SummationMatrix::Identity).unwrap();
        for n in 1..20u64 {
            let n = Index::new(n);
            for (x, y) in [(0.1, 0.12), (0.3, 0.9), (0.55, 0.6)] {
                assert_eq!(
                    t.eval_kernel(&n, x, y).unwrap(),
                    base.eval_kernel(&n, x, y).unwrap()
                );
            }
        }
    }

    #[test]
    fn bad_row_sums_flagged() {
        let mut rows = BTreeMap::new();
        rows.insert(1, vec![(0, 0.5), (1, 0.5)]);
        rows.insert(2, vec![(0, 0.5), (2, 0.6)]);
        let m = SummationMatrix::Rows(rows);
        assert_eq!(m.regularity(0).flagged_rows, vec![2]);
        let rep = SummationMatrix::Cesaro.regularity(50);
        assert!(rep.flagged_rows.is_empty());
        assert!((rep.last_row_max_entry - 0.02).abs() < 1e-15);
    }

    #[test]
    fn non_finite_row_rejected() {
        let mut rows = BTreeMap::new();
        rows.insert(1, vec![(0, f64::NAN)]);
        let r = SummationFamily::new(
            Arc::new(TrigFamily::dirichlet()),
            SummationMatrix::Rows(rows),
        );
        assert!(matches!(r, Err(Error::NonFiniteRow(_))));
    }

    #[test]
    fn summation_bound_is_weighted_sum() {
        let mut rows = BTreeMap::new();
        rows.insert(3, vec![(1, 0.25), (3, -0.75)]);
        let t = SummationFamily::new(
            Arc::new(TrigFamily::dirichlet()),
            SummationMatrix::Rows(rows),
        )
        .unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let expect = 0.25 * 3.0 / two_pi + 0.75 * 7.0 / two_pi;
        assert!((t.bound(&Index::new(3)).unwrap() - expect).abs() < 1e-15);
    }
}
