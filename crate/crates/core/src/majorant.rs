//! Decreasing majorant `φ(u) ≥ sup_n sup_{dist(x,t) ≥ u} |K_n(x,t)|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coord::Index;
use crate::error::{Error, Result};
use crate::kernels::KernelFamily;

/// Factor applied to the first stored value for queries below the grid.
pub const EXTRAPOLATION_FACTOR: f64 = 10.0;
/// Tolerance used when counting violations.
pub const VIOLATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MajorantSource {
    Analytic,
    Estimated { n_max: u64, x_grid: usize, t_grid: usize },
    /// Grid estimate over an explicit list of indices.
    Indices { indices: Vec<Index>, x_grid: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantTable {
    pub u_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub source: MajorantSource,
}

impl MajorantTable {
    pub fn is_monotone(&self) -> bool {
        self.phi.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,phi\n");
        for (u, p) in self.u_grid.iter().zip(&self.phi) {
            out.push_str(&format!("{u},{p}\n"));
        }
        out
    }

    /// Copy with every value multiplied by `c` (fault injection, safety margins).
    pub fn scaled(&self, c: f64) -> MajorantTable {
        MajorantTable {
            u_grid: self.u_grid.clone(),
            phi: self.phi.iter().map(|p| p * c).collect(),
            source: self.source.clone(),
        }
    }
}

/// `count` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(0.0 < lo && lo < hi && count >= 2);
    let r = (hi / lo).powf(1.0 / (count - 1) as f64);
    let mut g: Vec<f64> = (0..count).map(|i| lo * r.powi(i as i32)).collect();
    g[count - 1] = hi;
    g
}

fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() {
        return Err(Error::Precondition("empty u grid".into()));
    }
    if u_grid[0] <= 0.0 || !u_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Precondition(
            "u grid must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn sweep(f: &dyn KernelFamily, indices: &[Index], x_grid: usize, u_grid: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = f.domain().bounds_f64();
    let h = (hi - lo) / x_grid as f64;
    let xs: Vec<f64> = (0..x_grid).map(|i| lo + (i as f64 + 0.5) * h).collect();
    let dom = f.domain();
    let buckets = indices
        .par_iter()
        .map(|n| -> Result<Vec<f64>> {
            let mut b = vec![0.0f64; u_grid.len()];
            for &x in &xs {
                for &t in &xs {
                    let d = dom.dist(x, t);
                    // largest grid u with u ≤ d
                    let k = u_grid.partition_point(|&u| u <= d);
                    if k == 0 {
                        continue;
                    }
                    let v = f.eval_kernel(n, x, t)?.abs();
                    if v > b[k - 1] {
                        b[k - 1] = v;
                    }
                }
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut phi = vec![0.0f64; u_grid.len()];
    for b in buckets {
        for (p, v) in phi.iter_mut().zip(b) {
            *p = p.max(v);
        }
    }
    // running max from the right: value at u covers every d ≥ u
    for i in (0..phi.len().saturating_sub(1)).rev() {
        phi[i] = phi[i].max(phi[i + 1]);
    }
    Ok(phi)
}

/// Grid supremum over all `first_index ≤ n ≤ n_max` and pairs of an
/// `x_grid`-point grid (used for both `x` and `t`).
pub fn estimate_phi(
    f: &dyn KernelFamily,
    n_max: u64,
    x_grid: usize,
    u_grid: &[f64],
) -> Result<MajorantTable> {
    check_grid(u_grid)?;
    if n_max < 1 || x_grid == 0 {
        return Err(Error::Precondition("n_max ≥ 1 and x_grid ≥ 1 required".into()));
    }
    let first = f.first_index().to_u64().unwrap_or(u64::MAX);
    let indices: Vec<Index> = (first..=n_max).map(Index::new).collect();
    Ok(MajorantTable {
        u_grid: u_grid.to_vec(),
        phi: sweep(f, &indices, x_grid, u_grid)?,
        source: MajorantSource::Estimated { n_max, x_grid, t_grid: x_grid },
    })
}

/// As [`estimate_phi`] over an explicit set of indices.
pub fn estimate_phi_indices(
    f: &dyn KernelFamily,
    indices: &[Index],
    x_grid: usize,
    u_grid: &[f64],
) -> Result<MajorantTable> {
    check_grid(u_grid)?;
    for n in indices {
        f.check_index(n)?;
    }
    Ok(MajorantTable {
        u_grid: u_grid.to_vec(),
        phi: sweep(f, indices, x_grid, u_grid)?,
        source: MajorantSource::Indices { indices: indices.to_vec(), x_grid },
    })
}

/// Closed-form majorant tabulated on `u_grid`.
pub fn analytic_phi(f: &dyn KernelFamily, u_grid: &[f64]) -> Result<MajorantTable> {
    check_grid(u_grid)?;
    let phi = u_grid
        .iter()
        .map(|&u| {
            f.analytic_phi(u).ok_or_else(|| Error::Unsupported {
                family: f.name().to_string(),
                what: "analytic majorant".into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MajorantTable { u_grid: u_grid.to_vec(), phi, source: MajorantSource::Analytic })
}

/// Value at the largest grid point `≤ u`; below the grid, the first value
/// times [`EXTRAPOLATION_FACTOR`].
pub fn phi_at(tbl: &MajorantTable, u: f64) -> f64 {
    let k = tbl.u_grid.partition_point(|&g| g <= u);
    if k == 0 {
        tbl.phi[0] * EXTRAPOLATION_FACTOR
    } else {
        tbl.phi[k - 1]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MajorantValidation {
    pub samples: usize,
    /// Samples closer than the first grid point, where the table claims nothing.
    pub skipped: usize,
    pub violations: usize,
    pub max_excess: f64,
    /// `(n, x, t)` of the largest excess.
    pub worst: Option<(Index, f64, f64)>,
}

/// Counts `|K_n(x,t)| > phi_at(dist(x,t)) + 1e-12` over random triples with
/// `first_index ≤ n ≤ n_max`.
pub fn validate_majorant(
    f: &dyn KernelFamily,
    tbl: &MajorantTable,
    n_max: u64,
    samples: usize,
    seed: u64,
) -> Result<MajorantValidation> {
    let mut report = MajorantValidation::default();
    if samples == 0 {
        return Ok(report);
    }
    let first = f.first_index().to_u64().unwrap_or(u64::MAX);
    if n_max < first {
        return Err(Error::Precondition(format!("n_max {n_max} below first index {first}")));
    }
    let (lo, hi) = f.domain().bounds_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = tbl.u_grid[0];
    report.samples = samples;
    for _ in 0..samples {
        let n = Index::new(rng.gen_range(first..=n_max));
        let x = rng.gen_range(lo..hi);
        let t = rng.gen_range(lo..hi);
        let d = f.domain().dist(x, t);
        if d < u0 {
            report.skipped += 1;
            continue;
        }
        let excess = f.eval_kernel(&n, x, t)?.abs() - phi_at(tbl, d);
        if excess > VIOLATION_TOL {
            report.violations += 1;
        }
        if report.worst.is_none() || excess > report.max_excess {
            report.max_excess = excess;
            report.worst = Some((n, x, t));
        }
    }
    Ok(report)
}

/// Largest pointwise ratio `fine / coarse`; growth with `n_max` hints that
/// the family has no finite majorant.
pub fn growth_ratio(coarse: &MajorantTable, fine: &MajorantTable) -> f64 {
    coarse
        .phi
        .iter()
        .zip(&fine.phi)
        .map(|(&c, &f)| if c > 0.0 { f / c } else if f > 0.0 { f64::INFINITY } else { 1.0 })
        .fold(1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{HaarDyadic, TrigFamily};
    use std::f64::consts::PI;

    fn table() -> MajorantTable {
        MajorantTable {
            u_grid: vec![0.1, 0.2, 0.4],
            phi: vec![5.0, 3.0, 1.0],
            source: MajorantSource::Analytic,
        }
    }

    #[test]
    fn phi_at_lookup() {
        let t = table();
        assert_eq!(phi_at(&t, 0.2), 3.0);
        assert_eq!(phi_at(&t, 0.3), 3.0);
        assert_eq!(phi_at(&t, 0.9), 1.0);
        assert_eq!(phi_at(&t, 0.05), 50.0);
    }

    #[test]
    fn dirichlet_antipodal_estimate() {
        let d = TrigFamily::dirichlet();
        let grid = [0.5, 1.0, PI * (1.0 - 1e-12)];
        let t = estimate_phi(&d, 16, 64, &grid).unwrap();
        assert!(t.is_monotone());
        assert!((t.phi[2] - 1.0 / (2.0 * PI)).abs() < 1e-6, "{}", t.phi[2]);
        assert!((t.phi[2] - 0.159155).abs() < 1e-6);
    }

    #[test]
    fn estimate_below_analytic() {
        let grid = geometric_grid(0.05, 3.0, 12);
        for f in [TrigFamily::dirichlet(), TrigFamily::fejer()] {
            let est = estimate_phi(&f, 24, 96, &grid).unwrap();
            let an = analytic_phi(&f, &grid).unwrap();
            for (e, a) in est.phi.iter().zip(&an.phi) {
                assert!(e <= &(a + 1e-12), "{} {e} {a}", f.name());
            }
        }
    }

    #[test]
    fn haar_single_index_support() {
        let h = HaarDyadic::new();
        let grid = [1.0 / 64.0, 1.0 / 16.0, 1.0 / 8.0, 0.5];
        let t = estimate_phi_indices(&h, &[Index::new(16)], 64, &grid).unwrap();
        assert_eq!(t.phi, vec![16.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn validation_detects_halving() {
        let d = TrigFamily::dirichlet();
        let grid = geometric_grid(0.01, PI, 40);
        let an = analytic_phi(&d, &grid).unwrap();
        let ok = validate_majorant(&d, &an, 64, 5000, 7).unwrap();
        assert_eq!(ok.violations, 0);
        let bad = validate_majorant(&d, &an.scaled(0.5), 64, 5000, 7).unwrap();
        assert!(bad.violations > 0);
        assert_eq!(validate_majorant(&d, &an, 64, 0, 7).unwrap(), MajorantValidation::default());
    }

    #[test]
    fn rejects_bad_grid() {
        let d = TrigFamily::dirichlet();
        assert!(analytic_phi(&d, &[0.2, 0.1]).is_err());
        assert!(analytic_phi(&d, &[]).is_err());
    }
}
