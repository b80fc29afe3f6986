//! Run configuration and the command bodies shared by the CLI and the C ABI.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::reconstruct::oracle::{Location, INNER};
use crate::reconstruct::truth::{
    compare_geometry, euclidean_matrix, oracle_distance_matrix, travel_time_matrix, GroundTruth, GroundTruthSummary,
    Problem,
};
use crate::reconstruct::{embed_mds, reconstruct_pipeline, Embedding, PipelineConfig, ReconstructionReport};
use crate::spectral_forward::krein::{krein_probe, KreinProbe};
use crate::spectral_forward::{angular_spectrum, assemble_kappa, harmonic_basis, Geometry, SpectralData};
use crate::verify::{run_verify, VerifyConfig, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FLAGGED: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KreinConfig {
    pub k: usize,
    pub perturbation: f64,
}

impl Default for KreinConfig {
    fn default() -> Self {
        Self { k: 10, perturbation: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: Option<Problem>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub pipeline: PipelineConfig,
    /// Points per axis for oracle-atom mode.
    pub oracle_points: usize,
    pub output_dir: Option<String>,
    pub seed: u64,
    pub verify: VerifyConfig,
    pub krein: KreinConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: None,
            k: 40,
            m: 1,
            pipeline: PipelineConfig::default(),
            oracle_points: 12,
            output_dir: None,
            seed: 0,
            verify: VerifyConfig::default(),
            krein: KreinConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2000).contains(&self.k) {
            return input("K must lie in 1..=2000");
        }
        if self.m == 0 || self.m > self.k {
            return input("M must lie in 1..=K");
        }
        if !(2..=200).contains(&self.oracle_points) {
            return input("oracle_points must lie in 2..=200");
        }
        if !(self.krein.k >= 1 && self.krein.perturbation.abs() > 0.0 && self.krein.perturbation.abs() < 1.0) {
            return input("krein: k ≥ 1 and 0 < |perturbation| < 1");
        }
        self.pipeline.validate()?;
        self.verify.validate()
    }

    pub fn problem(&self) -> Result<&Problem> {
        self.problem.as_ref().map_or_else(|| input("config has no problem section"), Ok)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::Resolution(_) => EXIT_VERIFY_FAILED,
        _ => EXIT_INPUT,
    }
}

pub fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::Input(_) => "input",
        Error::AmbientMismatch(..) => "ambient_mismatch",
        Error::ZeroSubspace => "zero_subspace",
        Error::Resolution(_) => "resolution",
        Error::Mesh(_) => "mesh",
        Error::Contract(_) => "contract",
        Error::DegenerateBasis(_) => "degenerate_basis",
        Error::Numerical(_) => "numerical",
    };
    serde_json::json!({ "error": { "kind": kind, "message": e.to_string(), "exit_code": exit_code(e) } }).to_string()
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Numerical(format!("serialization: {e}")))
}

pub struct ForwardOutput {
    pub spectral: SpectralData,
    pub truth: GroundTruthSummary,
    pub alpha: Vec<f64>,
}

fn string_ends(problem: &Problem, m: usize) -> usize {
    match problem {
        Problem::String { .. } => m.min(2),
        Problem::Polygon { .. } => 1,
    }
}

fn ground_truth(problem: &Problem, k: usize, m: usize) -> Result<GroundTruth> {
    GroundTruth::new(problem.solve(k)?, string_ends(problem, m))
}

pub fn forward(cfg: &RunConfig) -> Result<ForwardOutput> {
    let problem = cfg.problem()?;
    let gt = ground_truth(problem, cfg.k, cfg.m)?;
    let hb = harmonic_basis(&gt.eigen.geometry, cfg.m)?;
    let spectral = assemble_kappa(&gt.eigen, &hb)?;
    let alpha = angular_spectrum(&spectral)?;
    let truth = GroundTruthSummary {
        problem: problem.clone(),
        t_star: gt.t_star(),
        diameter: gt.diameter(),
        string_ends: gt.string_ends,
    };
    Ok(ForwardOutput { spectral, truth, alpha })
}

pub struct ReconstructOutput {
    pub report: ReconstructionReport,
    pub csv: Option<String>,
    pub embedding: Option<Embedding>,
}

impl ReconstructOutput {
    pub fn exit_code(&self) -> i32 {
        if self.report.flagged() {
            EXIT_FLAGGED
        } else {
            EXIT_OK
        }
    }
}

/// Blind reconstruction. With `truth` (test mode) the report also carries
/// the distortion of the blind metric against the atoms' true positions;
/// with `oracle_atoms` the metric is built from oracle atoms instead.
pub fn reconstruct(
    sd: &SpectralData,
    cfg: &RunConfig,
    truth: Option<&GroundTruthSummary>,
    oracle_atoms: bool,
) -> Result<ReconstructOutput> {
    if oracle_atoms {
        let Some(t) = truth else {
            return input("oracle-atom mode needs ground_truth.json");
        };
        return reconstruct_oracle(sd, cfg, t);
    }
    let rec = reconstruct_pipeline(sd, &cfg.pipeline)?;
    let mut report = rec.report;
    if let (Some(t), Some(dm)) = (truth, report.distances.as_ref()) {
        let gt = ground_truth(&t.problem, sd.k, sd.m)?;
        check_truth_matches(&gt, sd)?;
        let fold = gt.string_ends == 2;
        let locs = rec
            .atoms
            .iter()
            .map(|a| gt.seed_location(&a.trajectory.seed, fold))
            .collect::<Result<Vec<_>>>()?;
        report.distortion = Some(compare_geometry(&dm.values, &true_matrix(&locs)?)?);
    }
    let csv = report.distances.as_ref().map(|d| d.to_csv());
    let embedding = report.embedding.clone();
    Ok(ReconstructOutput { report, csv, embedding })
}

fn true_matrix(locs: &[Location]) -> Result<Vec<Vec<f64>>> {
    if locs.iter().all(|l| matches!(l, Location::X(_))) {
        let x: Vec<f64> = locs.iter().map(|l| if let Location::X(x) = l { *x } else { 0.0 }).collect();
        Ok(travel_time_matrix(&x))
    } else if locs.iter().all(|l| matches!(l, Location::P(_))) {
        let p: Vec<[f64; 2]> = locs.iter().map(|l| if let Location::P(p) = l { *p } else { [0.0; 2] }).collect();
        Ok(euclidean_matrix(&p))
    } else {
        input("mixed locations")
    }
}

// the regenerated eigen system must reproduce the data it claims to explain
fn check_truth_matches(gt: &GroundTruth, sd: &SpectralData) -> Result<()> {
    let worst = gt.eigen.lambda.iter().zip(&sd.lambda).map(|(a, b)| (a - b).abs() / a).fold(0.0, f64::max);
    if gt.eigen.k() != sd.k || worst > 1e-8 {
        return input("ground_truth.json does not match the spectral data");
    }
    Ok(())
}

fn reconstruct_oracle(sd: &SpectralData, cfg: &RunConfig, t: &GroundTruthSummary) -> Result<ReconstructOutput> {
    let gt = ground_truth(&t.problem, sd.k, sd.m)?;
    check_truth_matches(&gt, sd)?;
    let n = cfg.oracle_points;
    let points: Vec<Location> = match &gt.eigen.geometry {
        Geometry::String(p) => (0..n).map(|i| Location::X(p.length * (i as f64 + 0.5) / n as f64)).collect(),
        Geometry::Polygon(mesh) => {
            let d = &mesh.domain;
            let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for v in &d.vertices {
                x0 = x0.min(v[0]);
                x1 = x1.max(v[0]);
                y0 = y0.min(v[1]);
                y1 = y1.max(v[1]);
            }
            let mut pts = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let p = [x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64, y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64];
                    if d.contains(p) {
                        pts.push(Location::P(p));
                    }
                }
            }
            pts
        }
    };
    let grid = cfg.pipeline.grid()?;
    let dm = oracle_distance_matrix(&gt.eigen, &points, &grid, INNER, &cfg.pipeline.tolerances)?;
    let mut diagnostics = Vec::new();
    let embedding = if dm.incomplete {
        diagnostics.push("metric incomplete: some trajectories never meet by t_max; increase t_max".into());
        None
    } else {
        Some(embed_mds(&dm, cfg.pipeline.embed_dim)?)
    };
    let truth_m = points
        .iter()
        .map(|&a| points.iter().map(|&b| gt.distance(a, b)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let distortion = Some(compare_geometry(&dm.values, &truth_m)?);
    let report = ReconstructionReport {
        k: sd.k,
        m: sd.m,
        config: cfg.pipeline.clone(),
        nest_times: grid.times.clone(),
        nest_dims: vec![],
        saturation_time: None,
        family_size: 0,
        family_rounds: 0,
        family_fixpoint: false,
        family_capped: false,
        atoms: vec![],
        distances: Some(dm.clone()),
        embedding: embedding.clone(),
        collapse: crate::reconstruct::CollapseDiagnostic {
            fired: false,
            symmetry_classes: 0,
            class_sizes: vec![],
            invisible_modes: 0,
            diameter_over_twice_saturation: None,
        },
        diagnostics,
        distortion,
    };
    Ok(ReconstructOutput { report, csv: Some(dm.to_csv()), embedding })
}

pub fn probe_krein(cfg: &RunConfig) -> Result<KreinProbe> {
    let p = cfg.problem()?.string_problem().map_err(|_| Error::Input("probe-krein needs a string problem".into()))?;
    krein_probe(&p, cfg.krein.k, cfg.krein.perturbation)
}

pub fn verify(cfg: &RunConfig, only: Option<&str>) -> Result<VerifyReport> {
    let v = VerifyConfig { seed: cfg.seed, ..cfg.verify.clone() };
    run_verify(&v, only)
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Input(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}
