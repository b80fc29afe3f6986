//! Forward-side ground truth: problem descriptions, true distances, atom
//! locations and distortion metrics. Never used by the blind pipeline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::{distances_from, node_locations, oracle_atom, Location, OracleCut};
use crate::error::{input, Result};
use crate::lattice::{contact, DistanceMatrix};
use crate::spectral_forward::{solve_polygon_eigs, solve_string_eigs, EigenSystem, Geometry, PolygonDomain, StringProblem};
use crate::subspace::{Subspace, ToleranceConfig};
use crate::wave_dynamics::TimeGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineDensity {
    pub n_grid: usize,
    /// ρ(x) = a + b·x/length
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    /// ρ at the n_grid+1 uniform nodes.
    Samples(Vec<f64>),
    Affine(AffineDensity),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Problem {
    String { length: f64, density: DensitySpec },
    Polygon { vertices: Vec<[f64; 2]>, mesh_h: f64 },
}

impl Problem {
    pub fn string_problem(&self) -> Result<StringProblem> {
        match self {
            Problem::String { length, density: DensitySpec::Samples(s) } => StringProblem::new(*length, s.clone()),
            Problem::String { length, density: DensitySpec::Affine(d) } => {
                let l = *length;
                StringProblem::from_fn(l, d.n_grid, |x| d.a + d.b * x / l)
            }
            Problem::Polygon { .. } => input("not a string problem"),
        }
    }

    pub fn solve(&self, k: usize) -> Result<EigenSystem> {
        match self {
            Problem::String { .. } => solve_string_eigs(&self.string_problem()?, k),
            Problem::Polygon { vertices, mesh_h } => {
                solve_polygon_eigs(&PolygonDomain { vertices: vertices.clone(), mesh_h: *mesh_h }, k)
            }
        }
    }
}

/// True geometry of a forward-solved case.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub eigen: EigenSystem,
    /// Boundary endpoints of a string seen by the harmonic basis (1 or 2).
    pub string_ends: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSummary {
    pub problem: Problem,
    pub t_star: f64,
    pub diameter: f64,
    pub string_ends: usize,
}

impl GroundTruth {
    pub fn new(eigen: EigenSystem, string_ends: usize) -> Result<Self> {
        if matches!(eigen.geometry, Geometry::String(_)) && !(1..=2).contains(&string_ends) {
            return input("string ground truth needs 1 or 2 boundary ends");
        }
        Ok(Self { eigen, string_ends })
    }

    pub fn distance(&self, a: Location, b: Location) -> Result<f64> {
        match (&self.eigen.geometry, a, b) {
            (Geometry::String(p), Location::X(x), Location::X(y)) => Ok((tau_at(p, y) - tau_at(p, x)).abs()),
            (Geometry::Polygon(_), Location::P(x), Location::P(y)) => Ok(((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()),
            _ => input("location does not match the geometry"),
        }
    }

    /// Fill-up time T*: largest distance from the controlled boundary.
    pub fn t_star(&self) -> f64 {
        match &self.eigen.geometry {
            Geometry::String(p) => {
                let t = *p.travel_time().last().unwrap();
                if self.string_ends == 2 {
                    t / 2.0
                } else {
                    t
                }
            }
            Geometry::Polygon(m) => m.points.iter().map(|&p| m.domain.boundary_distance(p)).fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.eigen.geometry {
            Geometry::String(p) => *p.travel_time().last().unwrap(),
            Geometry::Polygon(m) => m.domain.diameter(),
        }
    }

    /// Energy-density centroid of a seed subspace: travel time τ for
    /// strings (folded to min(τ, T−τ) when `fold`), (x, y) for meshes.
    pub fn seed_location(&self, seed: &Subspace, fold: bool) -> Result<Location> {
        let es = &self.eigen;
        if seed.ambient_dim() != es.k() || seed.is_zero() {
            return input("seed does not live in the eigen system's span");
        }
        let field = &es.phi * seed.frame();
        let dens: Vec<f64> = (0..es.n_nodes()).map(|i| es.mass[i] * field.row(i).norm_squared()).collect();
        let total: f64 = dens.iter().sum();
        match &es.geometry {
            Geometry::String(p) => {
                let tau = p.travel_time();
                let tt = *tau.last().unwrap();
                let c = dens.iter().zip(&tau).map(|(w, t)| w * if fold { t.min(tt - t) } else { *t }).sum::<f64>() / total;
                Ok(Location::X(c))
            }
            Geometry::Polygon(_) => {
                let locs = node_locations(es);
                let mut c = [0.0; 2];
                for (w, l) in dens.iter().zip(locs) {
                    if let Location::P(p) = l {
                        c[0] += w * p[0];
                        c[1] += w * p[1];
                    }
                }
                Ok(Location::P([c[0] / total, c[1] / total]))
            }
        }
    }
}

/// Travel time from x=0 by linear interpolation of the nodal table.
pub fn tau_at(p: &StringProblem, x: f64) -> f64 {
    let tau = p.travel_time();
    let h = p.h();
    let i = ((x / h).floor().max(0.0) as usize).min(p.n_grid() - 1);
    let f = (x - i as f64 * h) / h;
    tau[i] + f * (tau[i + 1] - tau[i])
}

/// Distance matrix between locations given as travel times (1D) —
/// used for centroids already expressed in τ.
pub fn travel_time_matrix(tau: &[f64]) -> Vec<Vec<f64>> {
    tau.iter().map(|a| tau.iter().map(|b| (a - b).abs()).collect()).collect()
}

pub fn euclidean_matrix(p: &[[f64; 2]]) -> Vec<Vec<f64>> {
    p.iter().map(|a| p.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    pub pairs: usize,
    /// max |d̃ − d| / d over pairs with d > 0.
    pub max_relative: f64,
    pub mean_relative: f64,
    pub max_absolute: f64,
    /// max |d̃ − d| / diam(d).
    pub max_diameter_normalized: f64,
    pub diameter_true: f64,
    pub diameter_reconstructed: f64,
}

/// Distortion of a reconstructed metric against the true one, pairs matched
/// by index.
pub fn compare_geometry(reconstructed: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<Distortion> {
    let n = truth.len();
    if reconstructed.len() != n || reconstructed.iter().chain(truth).any(|r| r.len() != n) {
        return input("distance matrices differ in size");
    }
    if n < 2 {
        return input("need at least 2 points");
    }
    let mut out = Distortion {
        pairs: 0,
        max_relative: 0.0,
        mean_relative: 0.0,
        max_absolute: 0.0,
        max_diameter_normalized: 0.0,
        diameter_true: 0.0,
        diameter_reconstructed: 0.0,
    };
    let mut rel_sum = 0.0;
    let mut rel_n = 0;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (reconstructed[i][j], truth[i][j]);
            out.pairs += 1;
            out.diameter_true = out.diameter_true.max(b);
            out.diameter_reconstructed = out.diameter_reconstructed.max(a);
            let e = (a - b).abs();
            out.max_absolute = out.max_absolute.max(e);
            if b > 0.0 {
                out.max_relative = out.max_relative.max(e / b);
                rel_sum += e / b;
                rel_n += 1;
            }
        }
    }
    out.mean_relative = if rel_n > 0 { rel_sum / rel_n as f64 } else { 0.0 };
    out.max_diameter_normalized = if out.diameter_true > 0.0 { out.max_absolute / out.diameter_true } else { 0.0 };
    Ok(out)
}

/// Distortion of a uniformly random symmetric matrix on [0, diam] against
/// `truth`: the sanity floor any real reconstruction must beat.
pub fn random_baseline(truth: &[Vec<f64>], rng: &mut impl Rng) -> Result<Distortion> {
    let n = truth.len();
    let diam = truth.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen::<f64>() * diam;
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    compare_geometry(&r, truth)
}

/// Oracle atom trajectory t_j ↦ H⟨x^{t_j}⟩.
pub fn oracle_trajectory(es: &EigenSystem, x: Location, grid: &TimeGrid, cut: OracleCut) -> Result<Vec<Subspace>> {
    let d = distances_from(es, x)?;
    grid.times
        .iter()
        .map(|&t| {
            if d.iter().zip(es.mass.iter()).any(|(v, m)| *v < t && *m > 0.0) {
                oracle_atom(es, x, t, cut)
            } else {
                Ok(Subspace::zero(es.k()))
            }
        })
        .collect()
}

/// d* on oracle atoms at the given points.
pub fn oracle_distance_matrix(
    es: &EigenSystem,
    points: &[Location],
    grid: &TimeGrid,
    cut: OracleCut,
    tol: &ToleranceConfig,
) -> Result<DistanceMatrix> {
    use rayon::prelude::*;
    if points.len() < 2 {
        return input("need at least 2 oracle points");
    }
    let trajs = points.par_iter().map(|&p| oracle_trajectory(es, p, grid, cut)).collect::<Result<Vec<_>>>()?;
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let d = pairs
        .par_iter()
        .map(|&(i, j)| contact(&trajs[i], &trajs[j], grid, tol).map(|c| c.time.map_or(f64::INFINITY, |t| 2.0 * t)))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(d) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(DistanceMatrix::from_values((0..n).map(|i| format!("x{i}")).collect(), values))
}
