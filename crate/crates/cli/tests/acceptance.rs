//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locdiv_core::constructor::{faults, Outcome};
use locdiv_core::coord::{self, ratio, Index};
use locdiv_core::kernels::{apply_indicator_quad, Family, MatrixSpec, QuadOptions};
use locdiv_core::majorant::{analytic_phi, geometric_grid, validate_majorant};
use locdiv_core::{
    alternation_check, assemble_g, check_conditions, construct, lproperty_audit, ConstructionConfig,
    ConstructionState, Context, DivergenceReport, FamilySpec, Interval, IntervalSet, NullSetSpec,
};

const HAAR_RUNTIME: Duration = Duration::from_secs(10);
const DIRICHLET_RUNTIME: Duration = Duration::from_secs(60);
const NU_CAP: u64 = 4096;
const KERNEL_AGREEMENT: f64 = 1e-12;
const KERNEL_SAMPLES: usize = 1000;
const MAJORANT_N_MAX: u64 = 128;
const MAJORANT_SAMPLES: usize = 100_000;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_CASES: usize = 100;
const ORACLE_N_MAX: u64 = 64;
const ORACLE_COMPONENTS: usize = 8;
const TELESCOPING_TOL: f64 = 1e-12;
const TELESCOPING_SAMPLES: usize = 1000;
const AUDIT_TARGET: f64 = 1e-2;
const AUDIT_N_MAX: u64 = 4096;
const SEED: u64 = 20_240_601;

fn report(id: u32, pass: bool, detail: &str) {
    println!("criterion {id}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn run(family: FamilySpec, points: Vec<coord::Coord>, depth: usize) -> (Context, Outcome, Duration) {
    let m = points.len();
    let st = ConstructionState::new(
        family,
        NullSetSpec::Finite { points },
        ConstructionConfig { depth, witnesses: m, nu_search_cap: NU_CAP, ..Default::default() },
    );
    let ctx = Context::new(&st).unwrap();
    let t = Instant::now();
    let out = construct(&ctx, st).unwrap();
    (ctx, out, t.elapsed())
}

/// Pass rule shared by criteria 1–3; `strict` adds the one-sided bounds for k ≥ 3.
fn end_to_end(id: u32, ctx: &Context, out: &Outcome, elapsed: Duration, limit: Duration, strict: bool) -> bool {
    if let Some(e) = &out.aborted {
        report(id, false, &format!("aborted after {} levels: {e}", out.state.levels.len()));
        return false;
    }
    let cond = check_conditions(ctx, &out.state).unwrap();
    let div = alternation_check(ctx, &out.state, &assemble_g(&out.state)).unwrap();
    let sided = !strict || one_sided(&div);
    let pass = cond.pass && div.pass && sided && elapsed < limit;
    let worst = div
        .rows
        .iter()
        .filter(|r| !r.weak_bound)
        .map(|r| r.deviation * r.k as f64 / 2.0)
        .fold(0.0, f64::max);
    report(
        id,
        pass,
        &format!(
            "conditions {}, rows {}, one-sided {sided}, worst deviation/bound {worst:.3e}, {elapsed:.2?} < {limit:?}",
            cond.pass, div.pass
        ),
    );
    pass
}

fn one_sided(div: &DivergenceReport) -> bool {
    div.rows.iter().filter(|r| r.k >= 3).all(|r| {
        let b = 2.0 / r.k as f64;
        if r.k % 2 == 1 {
            r.value >= 1.0 - b
        } else {
            r.value <= b
        }
    })
}

#[test]
fn criterion_1_haar_end_to_end() {
    let (ctx, out, t) = run(FamilySpec::HaarDyadic, vec![ratio(1, 3), ratio(2, 3)], 6);
    assert!(end_to_end(1, &ctx, &out, t, HAAR_RUNTIME, false));
}

#[test]
fn criterion_2_dirichlet_end_to_end() {
    let points = (1..=5).map(|i| coord::from_f64(-PI + 2.0 * PI * i as f64 / 6.0)).collect();
    let (ctx, out, t) = run(FamilySpec::Dirichlet, points, 5);
    assert!(end_to_end(2, &ctx, &out, t, DIRICHLET_RUNTIME, true));
}

fn cesaro() -> FamilySpec {
    FamilySpec::Summation {
        base: Box::new(FamilySpec::Dirichlet),
        matrix: MatrixSpec::Preset("cesaro".into()),
    }
}

#[test]
fn criterion_3_cesaro_matches_fejer_and_runs() {
    let t: Family = cesaro().build().unwrap();
    let f: Family = FamilySpec::Fejer.build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_diff: f64 = 0.0;
    for _ in 0..KERNEL_SAMPLES {
        let n = Index::new(rng.gen_range(1..=MAJORANT_N_MAX));
        let x = rng.gen_range(-PI..PI);
        let y = rng.gen_range(-PI..PI);
        let d = t.eval_kernel(&n, x, y).unwrap() - f.eval_kernel(&n, x, y).unwrap();
        max_diff = max_diff.max(d.abs());
    }
    let kernels = max_diff <= KERNEL_AGREEMENT;
    report(3, kernels, &format!("kernel identity: max |T - F| = {max_diff:.2e} over {KERNEL_SAMPLES} samples"));
    let (ctx, out, el) = run(cesaro(), vec![coord::from_f64(PI / 10f64.sqrt())], 4);
    let e2e = end_to_end(3, &ctx, &out, el, DIRICHLET_RUNTIME, true);
    assert!(kernels && e2e);
}

#[test]
fn criterion_4_majorant_validity() {
    let mut all = true;
    for spec in [FamilySpec::Dirichlet, FamilySpec::Fejer, FamilySpec::HaarDyadic] {
        let f = spec.build().unwrap();
        let (lo, hi) = f.domain().bounds_f64();
        let u_max = match f.domain().metric {
            locdiv_core::kernels::Metric::Circular { period } => period / 2.0,
            locdiv_core::kernels::Metric::Linear => (hi - lo) * 0.999,
        };
        let grid = geometric_grid(1e-3, u_max, 64);
        let tbl = analytic_phi(f.as_ref(), &grid).unwrap();
        let v = validate_majorant(f.as_ref(), &tbl, MAJORANT_N_MAX, MAJORANT_SAMPLES, SEED).unwrap();
        let ok = v.violations == 0 && tbl.is_monotone();
        all &= ok;
        report(
            4,
            ok,
            &format!(
                "{}: {} violations in {} samples ({} below grid), max excess {:.2e}",
                f.name(),
                v.violations,
                v.samples,
                v.skipped,
                v.max_excess
            ),
        );
    }
    assert!(all);
}

fn random_set(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> IntervalSet {
    let k = rng.gen_range(1..=ORACLE_COMPONENTS);
    let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.gen_range(lo..hi)).collect();
    cuts.sort_by(f64::total_cmp);
    let pairs: Vec<(f64, f64)> = cuts.chunks(2).filter(|c| c[0] < c[1]).map(|c| (c[0], c[1])).collect();
    IntervalSet::from_f64_pairs(&pairs).unwrap()
}

#[test]
fn criterion_5_oracle_equivalence() {
    let mut all = true;
    let opts = QuadOptions::default();
    for spec in [FamilySpec::Dirichlet, FamilySpec::Fejer, FamilySpec::HaarDyadic, cesaro()] {
        let f = spec.build().unwrap();
        let (lo, hi) = f.domain().bounds_f64();
        let first = f.first_index().to_u64().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut worst: f64 = 0.0;
        for _ in 0..ORACLE_CASES {
            let n = Index::new(rng.gen_range(first..=ORACLE_N_MAX));
            let s = random_set(&mut rng, lo, hi);
            let x = rng.gen_range(lo..hi);
            let exact = f.apply_indicator_f64(&n, &s, x).unwrap();
            let quad = apply_indicator_quad(f.as_ref(), &n, &s, x, &opts).unwrap();
            worst = worst.max((exact - quad).abs());
        }
        let ok = worst <= ORACLE_TOL;
        all &= ok;
        report(5, ok, &format!("{}: max |Δ| = {worst:.2e} over {ORACLE_CASES} cases", f.name()));
    }
    assert!(all);
}

#[test]
fn criterion_6_telescoping() {
    let mut all = true;
    let builds = [
        (FamilySpec::HaarDyadic, vec![ratio(1, 3), ratio(2, 3)], 6usize),
        (FamilySpec::Dirichlet, vec![coord::from_f64(0.5)], 2),
    ];
    for (spec, pts, depth) in builds {
        let (ctx, out, _) = run(spec, pts, depth);
        assert!(out.aborted.is_none());
        let st = &out.state;
        let g = assemble_g(st);
        let f = ctx.family.as_ref();
        let (lo, hi) = f.domain().bounds_f64();
        let first = f.first_index().to_u64().unwrap();
        let max_log = st
            .levels
            .iter()
            .flat_map(|l| l.members.iter().filter_map(|m| m.nu.log2()))
            .max()
            .unwrap_or(12)
            .max(12);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut worst: f64 = 0.0;
        for _ in 0..TELESCOPING_SAMPLES {
            // piecewise families are exact at any index; series cost grows with n
            let n = match f.shape() {
                locdiv_core::kernels::Shape::PiecewiseConstant => {
                    let e = rng.gen_range(0..=max_log);
                    Index(Index::pow2(e).0 + rng.gen_range(0..1u64 << e.min(62)))
                }
                locdiv_core::kernels::Shape::Convolution => Index::new(rng.gen_range(first..=4096)),
            };
            let x = coord::from_f64(rng.gen_range(lo..hi));
            let direct = locdiv_core::kernels::value_at(f, &n, &g, &x).unwrap();
            let signed: f64 = st
                .levels
                .iter()
                .enumerate()
                .map(|(l, lv)| {
                    let v = locdiv_core::kernels::value_at(f, &n, &lv.g, &x).unwrap();
                    if l % 2 == 0 { v } else { -v }
                })
                .sum();
            worst = worst.max((direct - signed).abs());
        }
        let ok = worst <= TELESCOPING_TOL;
        all &= ok;
        report(6, ok, &format!("{} K = {depth}: max error {worst:.2e} at {TELESCOPING_SAMPLES} points", f.name()));
    }
    assert!(all);
}

#[test]
fn criterion_7_lproperty_audit() {
    let d = FamilySpec::Dirichlet.build().unwrap();
    let i = Interval::from_f64(-1.0, 1.0).unwrap();
    let a = Interval::from_f64(-0.5, 0.5).unwrap();
    let audit = lproperty_audit(d.as_ref(), &i, &a, AUDIT_N_MAX, 256).unwrap();
    let hit = audit.rows.iter().find(|r| r.sup < AUDIT_TARGET).map(|r| r.n);
    report(7, hit.is_some(), &format!("dirichlet: first n with sup < {AUDIT_TARGET} is {hit:?}, min {:.2e}", audit.min_sup));

    let h = FamilySpec::HaarDyadic.build().unwrap();
    let hi_ = Interval::new(ratio(1, 4), ratio(3, 4)).unwrap();
    let ha = Interval::new(ratio(5, 16), ratio(11, 16)).unwrap();
    let haudit = lproperty_audit(h.as_ref(), &hi_, &ha, 64, 8).unwrap();
    // dist(A, ∂I) = 1/16, so every 2^j with j ≥ 4 must give exactly 0
    let zeros = [16u64, 32, 64]
        .iter()
        .all(|&n| haudit.rows.iter().any(|r| r.n == n && r.sup == 0.0));
    report(7, zeros, "haar_dyadic: s_n = 0 at n = 16, 32, 64");
    assert!(hit.is_some() && zeros);
}

#[test]
fn criterion_8_fault_detection() {
    let (ctx, out, _) = run(FamilySpec::HaarDyadic, vec![ratio(1, 3), ratio(2, 3)], 6);
    let base = out.state;
    let detected = |st: &ConstructionState| -> bool {
        let cond = check_conditions(&ctx, st).map(|r| r.pass).unwrap_or(false);
        let div = alternation_check(&ctx, st, &assemble_g(st)).map(|r| r.pass).unwrap_or(false);
        !(cond && div)
    };
    assert!(!detected(&base), "clean build must pass");
    let wm = |st: &ConstructionState, level: usize| st.levels[level - 1].witness_members[0];
    let neighbor = |st: &ConstructionState, level: usize| {
        let lv = &st.levels[level - 1];
        lv.members[lv.witness_members[1]].left.unwrap()
    };
    let mut faults_run: Vec<(String, bool)> = Vec::new();
    for (level, member) in [(2usize, wm(&base, 1)), (5, wm(&base, 4))] {
        let mut st = base.clone();
        faults::enlarge_level(&mut st, level, member).unwrap();
        faults_run.push((format!("enlarge G_{level}"), detected(&st)));
    }
    for (level, member) in [(2usize, wm(&base, 2)), (4, wm(&base, 4)), (3, neighbor(&base, 3))] {
        let mut st = base.clone();
        faults::decrement_nu(&mut st, level, member).unwrap();
        faults_run.push((format!("decrement ν at level {level} member {member}"), detected(&st)));
    }
    let caught = faults_run.iter().filter(|f| f.1).count();
    let names: Vec<String> = faults_run.iter().map(|(n, d)| format!("{n}: {d}")).collect();
    report(8, caught == 5, &format!("{caught}/5 detected [{}]", names.join("; ")));
    assert_eq!(caught, 5);
}

#[test]
fn criterion_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(
        &cfg,
        r#"{
          "family": { "name": "haar_dyadic" },
          "nullset": { "kind": "finite", "points": ["1/3", "2/3"] },
          "construction": { "depth": 6, "witnesses": 2 },
          "seed": 7
        }"#,
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_locdiv");
    let mut reports = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "4")] {
        let out = dir.path().join(run);
        let o = out.to_str().unwrap();
        let c = cfg.to_str().unwrap();
        let ok = Command::new(bin)
            .args(["construct", "--config", c, "--out", o])
            .env("LOCDIV_THREADS", threads)
            .status()
            .unwrap()
            .success();
        assert!(ok);
        let cp = out.join("checkpoint.json");
        let ok = Command::new(bin)
            .args(["verify", "--checkpoint", cp.to_str().unwrap(), "--out", o])
            .status()
            .unwrap()
            .success();
        assert!(ok);
        reports.push((fs::read(out.join("report.json")).unwrap(), fs::read(cp).unwrap()));
    }
    let same = reports[0] == reports[1];
    report(9, same, &format!("report.json {} bytes, checkpoint identical: {}", reports[0].0.len(), reports[0].1 == reports[1].1));
    assert!(same);
}
