//! Acceptance suites. Each criterion reports the measured value next to its
//! tolerance; a criterion that cannot be met at desk scale fails honestly.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::lattice::contact;
use crate::reconstruct::oracle::{
    node_locations, oracle_boundary_neighborhood, oracle_local_subspace, Location, INNER, OUTER,
};
use crate::reconstruct::truth::{compare_geometry, oracle_trajectory, travel_time_matrix, GroundTruth};
use crate::reconstruct::{embed_mds, reconstruct_pipeline, PipelineConfig};
use crate::spectral_forward::krein::{krein_probe, tan_roots};
use crate::spectral_forward::{
    analytic_constant_string, assemble_kappa, harmonic_basis, krein_spectrum_string, solve_polygon_eigs,
    solve_string_eigs, string_nu, EigenSystem, PolygonDomain, SpectralData, StringProblem,
};
use crate::subspace::{
    approx_eq, complement, containment_angle, join, leq, matched_angle, meet, orthonormalize_cut, Subspace,
    ToleranceConfig,
};
use crate::wave_dynamics::{build_wave_nest, DictionaryConfig, Isotony, IsotonyMethod, PropagatorTable, TimeGrid};

pub const SUITES: [&str; 10] = [
    "string-identity",
    "boundary-control",
    "saturation",
    "isotony",
    "oracle-metric",
    "reconstruction",
    "lattice-algebra",
    "basis-invariance",
    "krein",
    "determinism",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Set from the run's top-level seed.
    #[serde(skip)]
    pub seed: u64,
    /// Largest matched principal angle allowed in the controllability checks.
    pub match_angle: f64,
    /// Largest angle by which a reachable set may stick out of its oracle.
    pub containment_angle: f64,
    /// Time-grid spacing shared by the metric criteria.
    pub dt: f64,
    pub lattice_instances: usize,
    pub basis_trials: usize,
    pub metric_pairs_1d: usize,
    pub metric_pairs_2d: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            match_angle: 0.1,
            containment_angle: 1e-3,
            dt: 0.02,
            lattice_instances: 1000,
            basis_trials: 10,
            metric_pairs_1d: 20,
            metric_pairs_2d: 10,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.match_angle) && pos(self.containment_angle)) {
            return input("verify: angle thresholds must be positive");
        }
        if !(pos(self.dt) && self.dt <= 0.1) {
            return input("verify: dt must lie in (0, 0.1]");
        }
        if self.lattice_instances == 0 || self.basis_trials == 0 || self.metric_pairs_1d == 0 || self.metric_pairs_2d == 0 {
            return input("verify: trial counts must be ≥ 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: String,
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub note: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:<4} {:<52} measured={:.4e} tol={:.4e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.note
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub config: VerifyConfig,
    pub suites: Vec<String>,
    pub results: Vec<CriterionResult>,
    pub all_passed: bool,
}

pub fn run_verify(cfg: &VerifyConfig, only: Option<&str>) -> Result<VerifyReport> {
    cfg.validate()?;
    let suites: Vec<&str> = match only {
        Some(s) if SUITES.contains(&s) => vec![s],
        Some(s) => return input(format!("unknown suite '{s}'; expected one of {}", SUITES.join(", "))),
        None => SUITES.to_vec(),
    };
    let mut results = Vec::new();
    for s in &suites {
        results.extend(run_suite(s, cfg)?);
    }
    let all_passed = results.iter().all(|r| r.passed);
    Ok(VerifyReport { seed: cfg.seed, config: cfg.clone(), suites: suites.iter().map(|s| s.to_string()).collect(), results, all_passed })
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    match name {
        "string-identity" => string_identity(),
        "boundary-control" => boundary_control(cfg),
        "saturation" => saturation(cfg),
        "isotony" => isotony(cfg),
        "oracle-metric" => oracle_metric(cfg),
        "reconstruction" => reconstruction(cfg),
        "lattice-algebra" => lattice_algebra(cfg),
        "basis-invariance" => basis_invariance(cfg),
        "krein" => krein(),
        "determinism" => determinism(cfg),
        _ => input(format!("unknown suite '{name}'")),
    }
}

// per-suite stream so `--only` reproduces the full run
fn rng_for(cfg: &VerifyConfig, suite: &str) -> ChaCha8Rng {
    let salt = suite.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt)
}

fn result(id: &str, suite: &str, name: &str, measured: f64, tolerance: f64, passed: bool, note: String) -> CriterionResult {
    CriterionResult { id: id.into(), suite: suite.into(), name: name.into(), passed, measured, tolerance, note }
}

fn affine_string(b: f64, n_grid: usize) -> Result<StringProblem> {
    StringProblem::from_fn(1.0, n_grid, |x| 1.0 + b * x)
}

fn spectral(es: &EigenSystem, m: usize) -> Result<SpectralData> {
    assemble_kappa(es, &harmonic_basis(&es.geometry, m)?)
}

fn nu_identity_error(es: &EigenSystem) -> Result<f64> {
    let nu = string_nu(es)?;
    let sd = spectral(es, 1)?;
    Ok((0..es.k()).map(|k| (nu[k] - sd.lambda[k] * sd.kappa[0][k]).abs() / nu[k].abs()).fold(0.0, f64::max))
}

fn string_identity() -> Result<Vec<CriterionResult>> {
    let s = "string-identity";
    let a = nu_identity_error(&analytic_constant_string(20, 4000)?)?;
    let b = nu_identity_error(&solve_string_eigs(&affine_string(0.8, 2000)?, 20)?)?;
    Ok(vec![
        result("1a", s, "ν_k = λ_k κ_1k, ρ≡1 analytic, K=20", a, 1e-6, a <= 1e-6, "max relative error".into()),
        result("1b", s, "ν_k = λ_k κ_1k, ρ=1+0.8x, n=2000, K=20", b, 1e-3, b <= 1e-3, "max relative error".into()),
    ])
}

fn nest_for(sd: &SpectralData, dt: f64, t_max: f64) -> Result<(TimeGrid, crate::wave_dynamics::Nest)> {
    let grid = TimeGrid::uniform(dt, t_max)?;
    let table = PropagatorTable::build(sd, &grid, &DictionaryConfig::default())?;
    let nest = build_wave_nest(sd, &table)?;
    Ok((grid, nest))
}

fn grid_index(grid: &TimeGrid, t: f64) -> Result<usize> {
    grid.times.iter().position(|&x| (x - t).abs() < 1e-9).map_or_else(|| input(format!("t={t} not on the grid")), Ok)
}

fn unit_square(k: usize) -> Result<EigenSystem> {
    solve_polygon_eigs(&PolygonDomain::rectangle(1.0, 1.0, 0.03), k)
}

fn boundary_control(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let s = "boundary-control";
    let mut out = Vec::new();

    let es = solve_string_eigs(&StringProblem::constant(1.0, 3000)?, 60)?;
    let sd = spectral(&es, 2)?;
    let (grid, nest) = nest_for(&sd, cfg.dt, 0.6)?;
    let (mut worst_m, mut worst_c) = (0.0f64, 0.0f64);
    for t in [0.1, 0.2, 0.3, 0.4] {
        let r = &nest.elements[grid_index(&grid, t)?];
        let o = oracle_boundary_neighborhood(&es, 2, t, OUTER)?;
        worst_m = worst_m.max(matched_angle(r, &o));
        worst_c = worst_c.max(containment_angle(r, &o));
    }
    out.push(result(
        "2a",
        s,
        "reachable ≈ H⟨Γ^t⟩, 1D ρ≡1, K=60, q=12",
        worst_m,
        cfg.match_angle,
        worst_m < cfg.match_angle && worst_c <= cfg.containment_angle,
        format!("matched {worst_m:.2e} rad (< {:.0e}), containment {worst_c:.2e} rad (≤ {:.0e}), t=0.1..0.4", cfg.match_angle, cfg.containment_angle),
    ));

    let es = unit_square(80)?;
    let m = 40;
    let sd = spectral(&es, m)?;
    let (grid, nest) = nest_for(&sd, cfg.dt, 0.3)?;
    let (mut worst_m, mut worst_c, mut worst_in) = (0.0f64, 0.0f64, 0.0f64);
    let mut ranks = Vec::new();
    for t in [0.1, 0.2] {
        let r = &nest.elements[grid_index(&grid, t)?];
        let o = oracle_boundary_neighborhood(&es, m, t, OUTER)?;
        let oi = oracle_boundary_neighborhood(&es, m, t, INNER)?;
        ranks.push(o.dim());
        worst_m = worst_m.max(matched_angle(r, &o));
        worst_c = worst_c.max(containment_angle(r, &o));
        worst_in = worst_in.max(containment_angle(&oi, r));
    }
    let vacuous = ranks.iter().all(|&r| r == es.k());
    out.push(result(
        "2b",
        s,
        "reachable ≈ H⟨Γ^t⟩, unit square, K=80, M=40",
        worst_m.max(worst_in),
        cfg.match_angle,
        worst_m < cfg.match_angle && worst_c <= cfg.containment_angle && worst_in <= cfg.containment_angle,
        format!(
            "matched {worst_m:.2e}, containment {worst_c:.2e}; outer oracle ranks {ranks:?} of K={}{}; inner oracle ⊆ nest within {worst_in:.2e} rad",
            es.k(),
            if vacuous { " (vacuous: oracle is the full space)" } else { "" }
        ),
    ));
    Ok(out)
}

fn saturation(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let es = solve_string_eigs(&StringProblem::constant(1.0, 3000)?, 60)?;
    let sd = spectral(&es, 2)?;
    let (_, nest) = nest_for(&sd, cfg.dt, 0.8)?;
    let limit = 0.5 + cfg.dt;
    let t = nest.saturation_time().unwrap_or(f64::INFINITY);
    Ok(vec![result(
        "3",
        "saturation",
        "nest dim ≥ 0.95·K by t = 0.5 + Δt, 1D ρ≡1",
        t,
        limit,
        t <= limit + 1e-12,
        format!("dims {:?}", nest.dims()),
    )])
}

fn isotony(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let s = "isotony";
    let mut out = Vec::new();
    let cases: Vec<(&str, &str, EigenSystem, usize)> = vec![
        ("4a", "i^t(H⟨G⟩) ≈ H⟨G^t⟩, G=(0.3,0.5), 1D ρ≡1, K=60", solve_string_eigs(&StringProblem::constant(1.0, 2000)?, 60)?, 2),
        ("4b", "i^t(H⟨G⟩) ≈ H⟨G^t⟩, disk r=0.2 in unit square, K=80", unit_square(80)?, 40),
    ];
    for (id, name, es, m) in cases {
        let sd = spectral(&es, m)?;
        let locs = node_locations(&es);
        let dist_g = |i: usize| -> f64 {
            match locs[i] {
                Location::X(x) => (0.3 - x).max(x - 0.5).max(0.0),
                Location::P(q) => (((q[0] - 0.5).powi(2) + (q[1] - 0.5).powi(2)).sqrt() - 0.2).max(0.0),
            }
        };
        let iso = Isotony::new(&sd, &DictionaryConfig::default(), IsotonyMethod::Dictionary)?;
        let g = oracle_local_subspace(&es, |i| dist_g(i) == 0.0, INNER)?;
        let mut worst: f64 = 0.0;
        let mut ranks = Vec::new();
        for t in [0.1, 0.2] {
            let r = iso.apply(&g, t)?;
            let o = oracle_local_subspace(&es, |i| dist_g(i) < t, OUTER)?;
            ranks.push(o.dim());
            worst = worst.max(matched_angle(&r, &o));
        }
        let vacuous = ranks.iter().all(|&r| r == es.k());
        out.push(result(
            id,
            s,
            name,
            worst,
            cfg.match_angle,
            worst < cfg.match_angle,
            format!(
                "input dim {}, oracle ranks {ranks:?} of K={}{}",
                g.dim(),
                es.k(),
                if vacuous { " (vacuous: oracle is the full space)" } else { "" }
            ),
        ));
    }
    Ok(out)
}

fn oracle_metric(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let s = "oracle-metric";
    let tol_d = 2.0 * cfg.dt + 0.02;
    let tol = ToleranceConfig::default();
    let mut rng = rng_for(cfg, s);
    let mut out = Vec::new();

    let es = solve_string_eigs(&affine_string(0.8, 2000)?, 100)?;
    let gt = GroundTruth::new(es.clone(), 1)?;
    let pts: Vec<(Location, Location)> = (0..cfg.metric_pairs_1d)
        .map(|_| (Location::X(rng.gen_range(0.05..0.95)), Location::X(rng.gen_range(0.05..0.95))))
        .collect();
    let (worst, note) = oracle_pairs(&es, &gt, &pts, cfg.dt, &tol)?;
    out.push(result("5a", s, "|d* − d| on oracle atoms, 1D ρ=1+0.8x, K=100", worst, tol_d, worst <= tol_d, note));

    let es = solve_polygon_eigs(&PolygonDomain::rectangle(1.0, 2.0, 0.03), 200)?;
    let gt = GroundTruth::new(es.clone(), 1)?;
    let pts: Vec<(Location, Location)> = (0..cfg.metric_pairs_2d)
        .map(|_| {
            let mut p = || Location::P([rng.gen_range(0.1..0.9), rng.gen_range(0.1..1.9)]);
            (p(), p())
        })
        .collect();
    let (worst, note) = oracle_pairs(&es, &gt, &pts, cfg.dt, &tol)?;
    out.push(result("5b", s, "|d* − d| on oracle atoms, rectangle (0,1)×(0,2), K=200", worst, tol_d, worst <= tol_d, note));
    Ok(out)
}

fn oracle_pairs(
    es: &EigenSystem,
    gt: &GroundTruth,
    pairs: &[(Location, Location)],
    dt: f64,
    tol: &ToleranceConfig,
) -> Result<(f64, String)> {
    use rayon::prelude::*;
    let grid = TimeGrid::uniform(dt, 0.5 * gt.diameter() + 0.1)?;
    let errs = pairs
        .par_iter()
        .map(|&(x, y)| {
            let a = oracle_trajectory(es, x, &grid, INNER)?;
            let b = oracle_trajectory(es, y, &grid, INNER)?;
            let c = contact(&a, &b, &grid, tol)?;
            let d_star = c.time.map_or(f64::INFINITY, |t| 2.0 * t);
            Ok((d_star - gt.distance(x, y)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    Ok((worst, format!("{} pairs, mean |d*−d| {mean:.3}, inner oracle atoms", errs.len())))
}

/// ρ = 1 + b·x, one- or two-endpoint harmonic basis.
pub fn pipeline_case(b: f64, m: usize, k: usize) -> Result<(EigenSystem, SpectralData)> {
    let es = solve_string_eigs(&affine_string(b, 2000)?, k)?;
    let sd = spectral(&es, m)?;
    Ok((es, sd))
}

fn reconstruction(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let s = "reconstruction";
    let mut out = Vec::new();

    let (es, sd) = pipeline_case(0.8, 1, 40)?;
    let pc = PipelineConfig { dt: cfg.dt, t_max: 1.6, ..Default::default() };
    let rec = reconstruct_pipeline(&sd, &pc)?;
    let gt = GroundTruth::new(es, 1)?;
    let (dist, truth, dim) = seed_distortion(&rec, &gt, false)?;
    let n = truth.len();
    // The line check: distortion of the best 1D embedding against the truth.
    let line = embed_mds(rec.report.distances.as_ref().expect("checked above"), Some(1))?;
    let line_dm: Vec<Vec<f64>> =
        line.coords.iter().map(|a| line.coords.iter().map(|b| (a[0] - b[0]).abs()).collect()).collect();
    let line_dist = compare_geometry(&line_dm, &truth)?;
    let d = dist.max_diameter_normalized.max(line_dist.max_diameter_normalized);
    out.push(result(
        "6a",
        s,
        "blind reconstruction, ρ=1+0.8x, K=40: line, distortion",
        d,
        0.05,
        d <= 0.05,
        format!(
            "{n} atoms; d* distortion {:.3}, 1D embedding distortion {:.3}, auto embed dim {dim:?}; diameter {:.3}; diagnostics {:?}",
            dist.max_diameter_normalized, line_dist.max_diameter_normalized, dist.diameter_true, rec.report.diagnostics
        ),
    ));

    let (es, sd) = pipeline_case(0.0, 2, 40)?;
    let pc = PipelineConfig { dt: cfg.dt, t_max: 1.0, ..Default::default() };
    let rec = reconstruct_pipeline(&sd, &pc)?;
    let gt = GroundTruth::new(es, 2)?;
    let half = 0.5 * gt.diameter();
    let diam = rec.report.distances.as_ref().map_or(0.0, |d| d.max_finite());
    let rel = (diam / half - 1.0).abs();
    let n = rec.atoms.len();
    let dim = rec.report.embedding.as_ref().map(|e| e.dim);
    let c = &rec.report.collapse;
    out.push(result(
        "6b",
        s,
        "blind reconstruction, ρ≡1 two ends: collapse, diameter T/2",
        rel,
        0.05,
        c.fired && rel <= 0.05,
        format!(
            "collapse fired={} classes {:?}; diameter {diam:.3} vs T/2={half:.3}; {n} atoms, embed dim {dim:?}",
            c.fired, c.class_sizes
        ),
    ));
    Ok(out)
}

/// Distortion of the blind metric against the travel-time positions of the
/// atom seeds (forward-side knowledge).
fn seed_distortion(
    rec: &crate::reconstruct::Reconstruction,
    gt: &GroundTruth,
    fold: bool,
) -> Result<(crate::reconstruct::truth::Distortion, Vec<Vec<f64>>, Option<usize>)> {
    let Some(dm) = rec.report.distances.as_ref() else {
        return input("reconstruction produced no distance matrix");
    };
    let loc = rec
        .atoms
        .iter()
        .map(|a| match gt.seed_location(&a.trajectory.seed, fold)? {
            Location::X(x) => Ok(x),
            Location::P(_) => input("expected a string geometry"),
        })
        .collect::<Result<Vec<f64>>>()?;
    let truth = travel_time_matrix(&loc);
    let d = compare_geometry(&dm.values, &truth)?;
    Ok((d, truth, rec.report.embedding.as_ref().map(|e| e.dim)))
}

fn random_frame(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0))
}

/// One randomized instance: A, B as spans of random column subsets of a random
/// orthonormal basis (so meets and joins are known exactly), or generic spans.
fn lattice_instance(rng: &mut ChaCha8Rng, tol: &ToleranceConfig) -> Result<Vec<String>> {
    let n = rng.gen_range(2..=50);
    let q = orthonormalize_cut(&random_frame(rng, n, n), 1e-12)?;
    let structured = rng.gen_bool(0.5);
    let pick = |rng: &mut ChaCha8Rng| -> (Vec<bool>, Subspace) {
        let mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let cols: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        let f = DMatrix::from_fn(n, cols.len(), |i, j| q.frame()[(i, cols[j])]);
        (mask, Subspace::from_orthonormal(f))
    };
    let ((ma, a), (mb, b)) = if structured {
        (pick(rng), pick(rng))
    } else {
        let ra = rng.gen_range(0..=n);
        let rb = rng.gen_range(0..=n);
        let a = orthonormalize_cut(&random_frame(rng, n, ra), 1e-10)?;
        let b = orthonormalize_cut(&random_frame(rng, n, rb), 1e-10)?;
        ((vec![], a), (vec![], b))
    };
    let mut bad = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            bad.push(format!("n={n} {what}"));
        }
    };
    let full = Subspace::full(n);
    let zero = Subspace::zero(n);
    let ca = complement(&a);
    check(approx_eq(&meet(&a, &ca, tol)?, &zero, tol), "A∧A⊥ ≠ 0");
    check(approx_eq(&join(&a, &ca, tol)?, &full, tol), "A∨A⊥ ≠ 1");
    check(approx_eq(&complement(&ca), &a, tol), "A⊥⊥ ≠ A");
    let ab_join = join(&a, &b, tol)?;
    let ab_meet = meet(&a, &b, tol)?;
    check(approx_eq(&meet(&a, &ab_join, tol)?, &a, tol), "A∧(A∨B) ≠ A");
    check(approx_eq(&join(&a, &ab_meet, tol)?, &a, tol), "A∨(A∧B) ≠ A");
    check(leq(&a, &ab_join, tol)? && leq(&b, &ab_join, tol)?, "A,B ≰ A∨B");
    check(leq(&ab_meet, &a, tol)? && leq(&ab_meet, &b, tol)?, "A∧B ≰ A,B");
    let le = leq(&a, &b, tol)?;
    check(le == approx_eq(&ab_meet, &a, tol), "A≤B ⇎ A∧B=A");
    check(le == approx_eq(&ab_join, &b, tol), "A≤B ⇎ A∨B=B");
    if le {
        check(leq(&complement(&b), &ca, tol)?, "A≤B but B⊥ ≰ A⊥");
    }
    let c = join(&a, &ab_meet, tol)?;
    check(leq(&a, &c, tol)? && leq(&c, &a, tol)?, "order not antisymmetric");
    if structured {
        let both = (0..n).filter(|&i| ma[i] && mb[i]).count();
        let either = (0..n).filter(|&i| ma[i] || mb[i]).count();
        check(ab_meet.dim() == both, "dim(A∧B) ≠ |S_A∩S_B|");
        check(ab_join.dim() == either, "dim(A∨B) ≠ |S_A∪S_B|");
    }
    Ok(bad)
}

/// A = span e₁, B = span e₂, C = span(e₁+e₂) in ℝ²: A∧(B∨C) = A but
/// (A∧B)∨(A∧C) = 0. Returns the two dimensions.
pub fn non_distributive_witness(tol: &ToleranceConfig) -> Result<(usize, usize)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = Subspace::span_of(2, &[&[1.0, 0.0]], tol)?;
    let b = Subspace::span_of(2, &[&[0.0, 1.0]], tol)?;
    let c = Subspace::span_of(2, &[&[s, s]], tol)?;
    let lhs = meet(&a, &join(&b, &c, tol)?, tol)?;
    let rhs = join(&meet(&a, &b, tol)?, &meet(&a, &c, tol)?, tol)?;
    Ok((lhs.dim(), rhs.dim()))
}

fn lattice_algebra(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let s = "lattice-algebra";
    let tol = ToleranceConfig::default();
    let mut rng = rng_for(cfg, s);
    let mut failures = Vec::new();
    for _ in 0..cfg.lattice_instances {
        failures.extend(lattice_instance(&mut rng, &tol)?);
    }
    let (lhs, rhs) = non_distributive_witness(&tol)?;
    let witness = lhs == 1 && rhs == 0;
    let mut note = format!(
        "{} instances, N ≤ 50; witness A∧(B∨C) dim {lhs} vs (A∧B)∨(A∧C) dim {rhs}",
        cfg.lattice_instances
    );
    if let Some(f) = failures.first() {
        note.push_str(&format!("; first failure: {f}"));
    }
    Ok(vec![result(
        "7",
        s,
        "complement/absorption/order invariants + non-distributivity",
        failures.len() as f64,
        0.0,
        failures.is_empty() && witness,
        note,
    )])
}

fn basis_invariance(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let s = "basis-invariance";
    let mut rng = rng_for(cfg, s);
    let (_, sd) = pipeline_case(0.8, 2, 24)?;
    let pc = PipelineConfig { dt: cfg.dt, t_max: 1.0, ..Default::default() };
    let base = reconstruct_pipeline(&sd, &pc)?.report;
    let Some(d0) = base.distances.as_ref() else {
        return input("basis-invariance case produced no distance matrix");
    };
    let mut worst: f64 = 0.0;
    let mut mismatched = 0;
    for _ in 0..cfg.basis_trials {
        let r = loop {
            let r = DMatrix::<f64>::from_fn(sd.m, sd.m, |_, _| rng.gen_range(-1.0..1.0));
            if r.determinant().abs() > 0.1 {
                break r;
            }
        };
        let rep = reconstruct_pipeline(&sd.recombined(&r), &pc)?.report;
        match rep.distances.as_ref() {
            Some(d) if d.ids == d0.ids => {
                for (a, b) in d.values.iter().flatten().zip(d0.values.iter().flatten()) {
                    let e = if a == b { 0.0 } else { (a - b).abs() };
                    worst = worst.max(e);
                }
            }
            _ => {
                mismatched += 1;
                worst = f64::INFINITY;
            }
        }
    }
    let limit = 2.0 * cfg.dt;
    Ok(vec![result(
        "8",
        s,
        "random M×M recombination of κ rows, distance matrix",
        worst,
        limit,
        worst <= limit,
        format!(
            "{} trials, ρ=1+0.8x two ends, K=24, {} atoms; {mismatched} trials changed the atom set",
            cfg.basis_trials,
            d0.len()
        ),
    )])
}

fn krein() -> Result<Vec<CriterionResult>> {
    let s = "krein";
    let ev = krein_spectrum_string(&StringProblem::constant(1.0, 4000)?, 3)?;
    let roots = tan_roots(3);
    let err = ev.iter().zip(&roots).map(|(e, r)| (e - r * r).abs() / (r * r)).fold(0.0, f64::max);
    let mu: Vec<String> = ev.iter().map(|e| format!("{:.5}", e.sqrt())).collect();
    let probe = krein_probe(&affine_string(0.8, 1000)?, 10, 0.1)?;
    let ratio = probe.separation / probe.discretization_error;
    Ok(vec![
        result(
            "9a",
            s,
            "σ(L_M), ρ≡1, n=4000 vs roots of tan μ = μ",
            err,
            1e-4,
            err <= 1e-4,
            format!("μ = [{}]", mu.join(", ")),
        ),
        result(
            "9b",
            s,
            "ρ vs ρ(1+0.1 sin πx): spectral pairs separate",
            ratio,
            3.0,
            probe.separated,
            format!(
                "separation {:.2e} vs discretization error {:.2e} (n vs 2n), ρ=1+0.8x, K=10; evidence, not proof",
                probe.separation, probe.discretization_error
            ),
        ),
    ])
}

fn determinism(cfg: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let run = || -> Result<String> {
        let (_, sd) = pipeline_case(0.8, 1, 20)?;
        let pc = PipelineConfig { dt: cfg.dt, t_max: 1.4, ..Default::default() };
        let rep = reconstruct_pipeline(&sd, &pc)?.report;
        let csv = rep.distances.as_ref().map(|d| d.to_csv()).unwrap_or_default();
        let json = serde_json::to_string(&rep).map_err(|e| crate::Error::Numerical(e.to_string()))?;
        Ok(format!("{}\n{json}\n{csv}", serde_json::to_string(&sd).unwrap_or_default()))
    };
    let a = run()?;
    let b = run()?;
    let differ = a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    Ok(vec![result(
        "10",
        "determinism",
        "repeated runs are byte-identical",
        differ as f64,
        0.0,
        differ == 0,
        format!("{} bytes of spectral data, report and CSV compared", a.len()),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_is_non_distributive() {
        assert_eq!(non_distributive_witness(&ToleranceConfig::default()).unwrap(), (1, 0));
    }

    #[test]
    fn unknown_suite_is_an_input_error() {
        assert!(run_verify(&VerifyConfig::default(), Some("nope")).is_err());
    }

    #[test]
    fn lattice_suite_small() {
        let cfg = VerifyConfig { lattice_instances: 50, ..Default::default() };
        let r = run_suite("lattice-algebra", &cfg).unwrap();
        assert!(r[0].passed, "{}", r[0].line());
    }
}
