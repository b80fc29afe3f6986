//! The blind pipeline (λ, κ) → nest → lattice family → atoms → d* → point
//! cloud, plus the forward-side oracles and comparison tools used to judge it.

pub mod mds;
pub mod oracle;
pub mod truth;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::lattice::{
    distance_matrix, find_atoms, generate_family, AtomCandidate, AtomConfig, Caps, ClosureIsotony, DistanceMatrix,
};
use crate::spectral_forward::SpectralData;
use crate::subspace::ToleranceConfig;
use crate::wave_dynamics::{build_wave_nest, DictionaryConfig, Isotony, IsotonyMethod, PropagatorTable, TimeGrid};
pub use mds::{embed_mds, Embedding};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymmetryConfig {
    /// |P_jk| ≤ entry_tol·max|P| counts as a structural zero.
    pub entry_tol: f64,
    /// Relative eigenvalue gap below which modes are treated as one cluster.
    pub cluster_tol: f64,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        Self { entry_tol: 1e-6, cluster_tol: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub dt: f64,
    pub t_max: f64,
    pub dictionary: DictionaryConfig,
    pub tolerances: ToleranceConfig,
    pub caps: Caps,
    pub atoms: AtomConfig,
    pub isotony: IsotonyMethod,
    /// 1–3, or None to choose from the MDS spectrum.
    pub embed_dim: Option<usize>,
    pub symmetry: SymmetryConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            t_max: 2.0,
            dictionary: DictionaryConfig::default(),
            tolerances: ToleranceConfig::default(),
            caps: Caps::default(),
            atoms: AtomConfig::default(),
            isotony: IsotonyMethod::Gramian,
            embed_dim: None,
            symmetry: SymmetryConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_max > 0.0 && self.dt.is_finite() && self.t_max.is_finite()) {
            return input("dt and t_max must be positive");
        }
        if self.t_max / self.dt < 4.0 || self.t_max / self.dt > 10_000.0 {
            return input("time grid must have between 4 and 10000 steps");
        }
        self.dictionary.validate()?;
        self.tolerances.validate()?;
        if self.caps.max_elements < 2 || self.caps.max_depth == 0 {
            return input("caps: max_elements ≥ 2 and max_depth ≥ 1");
        }
        if self.atoms.min_dim == 0 || self.atoms.d_max < self.atoms.min_dim {
            return input("atoms: need 1 ≤ min_dim ≤ d_max");
        }
        if let Some(d) = self.embed_dim {
            if !(1..=3).contains(&d) {
                return input("embed_dim must be 1, 2 or 3");
            }
        }
        if !(self.symmetry.entry_tol > 0.0 && self.symmetry.cluster_tol >= 0.0) {
            return input("symmetry tolerances must be positive");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.dt, self.t_max)
    }
}

/// Detects sign symmetries S = diag(±1) with S·K̃ = K̃: such an S commutes
/// with the operator and preserves the data, so the lattice cannot separate
/// points it exchanges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseDiagnostic {
    pub fired: bool,
    /// Connected components of the mode-coupling graph of P_K̃.
    pub symmetry_classes: usize,
    pub class_sizes: Vec<usize>,
    /// Modes orthogonal to K̃ (invisible to the boundary data).
    pub invisible_modes: usize,
    /// Reconstructed diameter / (2 · nest saturation time).
    pub diameter_over_twice_saturation: Option<f64>,
}

pub fn spectral_symmetry(sd: &SpectralData, cfg: &SymmetryConfig) -> Result<(Vec<usize>, usize)> {
    let q = sd.harmonic_frame()?;
    let p = q.projector();
    let k = sd.k;
    let mx = p.abs().max();
    let thr = cfg.entry_tol * mx;
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let unite = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra.max(rb)] = ra.min(rb);
        }
    };
    for j in 1..k {
        if sd.lambda[j] - sd.lambda[j - 1] <= cfg.cluster_tol * sd.lambda[j] {
            unite(&mut parent, j - 1, j);
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if p[(i, j)].abs() > thr {
                unite(&mut parent, i, j);
            }
        }
    }
    let visible: Vec<bool> = (0..k).map(|i| p[(i, i)] > thr).collect();
    let mut sizes = std::collections::BTreeMap::new();
    let mut invisible = 0;
    for i in 0..k {
        let r = find(&mut parent, i);
        if visible[i] {
            *sizes.entry(r).or_insert(0usize) += 1;
        } else if !(0..k).any(|j| visible[j] && find(&mut parent, j) == r) {
            invisible += 1;
        }
    }
    Ok((sizes.into_values().collect(), invisible))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSummary {
    pub id: String,
    pub provenance: String,
    pub seed_dim: usize,
    pub first_nonzero_time: Option<f64>,
    pub dims: Vec<usize>,
    pub monotonicity_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub config: PipelineConfig,
    pub nest_times: Vec<f64>,
    pub nest_dims: Vec<usize>,
    pub saturation_time: Option<f64>,
    pub family_size: usize,
    pub family_rounds: usize,
    pub family_fixpoint: bool,
    pub family_capped: bool,
    pub atoms: Vec<AtomSummary>,
    pub distances: Option<DistanceMatrix>,
    pub embedding: Option<Embedding>,
    pub collapse: CollapseDiagnostic,
    /// Flagged conditions; non-empty means a partial result.
    pub diagnostics: Vec<String>,
    /// Present only when a ground truth was supplied by the caller.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distortion: Option<truth::Distortion>,
}

impl ReconstructionReport {
    pub fn flagged(&self) -> bool {
        !self.diagnostics.is_empty()
    }
}

pub struct Reconstruction {
    pub report: ReconstructionReport,
    pub atoms: Vec<AtomCandidate>,
}

/// Steps 1–3 on spectral data alone.
pub fn reconstruct_pipeline(sd: &SpectralData, cfg: &PipelineConfig) -> Result<Reconstruction> {
    sd.validate()?;
    cfg.validate()?;
    let tol = &cfg.tolerances;
    let grid = cfg.grid()?;
    let mut diagnostics = Vec::new();

    let table = PropagatorTable::build(sd, &grid, &cfg.dictionary)?;
    let nest = build_wave_nest(sd, &table)?;
    if !nest.saturated() {
        diagnostics.push(format!(
            "nest did not saturate: final dimension {} < 0.95·K = {:.1}; increase t_max",
            nest.elements.last().map_or(0, |e| e.dim()),
            0.95 * sd.k as f64
        ));
    }

    let iso = Isotony::new(sd, &cfg.dictionary, cfg.isotony)?;
    let family = generate_family(&nest.elements, Some(ClosureIsotony { iso: &iso, grid: &grid }), tol, &cfg.caps)?;
    if family.capped {
        diagnostics.push(format!("lattice family capped at {} elements before a fixpoint", family.elements.len()));
    }
    let atoms = find_atoms(&family, &iso, &grid, tol, &cfg.atoms)?;
    let summaries: Vec<AtomSummary> = atoms
        .iter()
        .map(|a| AtomSummary {
            id: a.id.clone(),
            provenance: a.provenance.clone(),
            seed_dim: a.trajectory.seed.dim(),
            first_nonzero_time: a.first_nonzero_time,
            dims: a.trajectory.dims(),
            monotonicity_defect: a.trajectory.monotonicity_defect,
        })
        .collect();

    let mut distances = None;
    let mut embedding = None;
    if atoms.len() < 2 {
        diagnostics.push(format!("only {} atom candidates found; no metric", atoms.len()));
    } else {
        let dm = distance_matrix(&atoms, tol)?;
        if dm.incomplete {
            diagnostics.push("metric incomplete: some trajectories never meet by t_max; increase t_max".into());
        } else {
            embedding = Some(embed_mds(&dm, cfg.embed_dim)?);
        }
        distances = Some(dm);
    }

    let (classes, invisible) = spectral_symmetry(sd, &cfg.symmetry)?;
    let diam = distances.as_ref().map(|d| d.max_finite());
    let collapse = CollapseDiagnostic {
        fired: classes.len() > 1,
        symmetry_classes: classes.len(),
        class_sizes: classes,
        invisible_modes: invisible,
        diameter_over_twice_saturation: match (diam, nest.saturation_time()) {
            (Some(d), Some(t)) => Some(d / (2.0 * t)),
            _ => None,
        },
    };

    let report = ReconstructionReport {
        k: sd.k,
        m: sd.m,
        config: cfg.clone(),
        nest_times: grid.times.clone(),
        nest_dims: nest.dims(),
        saturation_time: nest.saturation_time(),
        family_size: family.elements.len(),
        family_rounds: family.rounds,
        family_fixpoint: family.fixpoint,
        family_capped: family.capped,
        atoms: summaries,
        distances,
        embedding,
        collapse,
        diagnostics,
        distortion: None,
    };
    Ok(Reconstruction { report, atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_forward::{assemble_kappa, harmonic_basis, solve_string_eigs, StringProblem};

    #[test]
    fn symmetric_string_has_parity_classes() {
        let es = solve_string_eigs(&StringProblem::constant(1.0, 1000).unwrap(), 20).unwrap();
        let sd = assemble_kappa(&es, &harmonic_basis(&es.geometry, 2).unwrap()).unwrap();
        let (classes, invisible) = spectral_symmetry(&sd, &SymmetryConfig::default()).unwrap();
        assert_eq!(classes, vec![10, 10]);
        assert_eq!(invisible, 0);
        let sd1 = assemble_kappa(&es, &harmonic_basis(&es.geometry, 1).unwrap()).unwrap();
        assert_eq!(spectral_symmetry(&sd1, &SymmetryConfig::default()).unwrap().0.len(), 1);
    }

    #[test]
    fn config_rejects_bad_grid() {
        let cfg = PipelineConfig { dt: 0.5, t_max: 1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        assert!(PipelineConfig::default().validate().is_ok());
    }
}
