//! Forward-side oracles: local subspaces H⟨ω⟩ in spectral coordinates and the
//! ball atoms H⟨x^t⟩.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::linalg::sym_eigen_desc;
use crate::spectral_forward::{EigenSystem, Geometry};
use crate::subspace::Subspace;

/// How much of the compressed concentration operator counts as "inside".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCut {
    /// Eigenvalues ≥ c·λ_max: everything the truncation can see in the region.
    Outer(f64),
    /// Eigenvalues ≥ c: directions with at least a fraction c of their energy inside.
    Inner(f64),
}

pub const OUTER: OracleCut = OracleCut::Outer(1e-12);
pub const INNER: OracleCut = OracleCut::Inner(0.5);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Location {
    X(f64),
    P([f64; 2]),
}

/// Coordinates of every node: x for strings, (x, y) for meshes.
pub fn node_locations(es: &EigenSystem) -> Vec<Location> {
    match &es.geometry {
        Geometry::String(p) => p.nodes().into_iter().map(Location::X).collect(),
        Geometry::Polygon(m) => m.points.iter().map(|&p| Location::P(p)).collect(),
    }
}

/// Compressed concentration operator C_jk = (χ φ_j, φ_k).
pub fn concentration(es: &EigenSystem, chi: &[bool]) -> DMatrix<f64> {
    let w: Vec<f64> = es.mass.iter().zip(chi).map(|(m, &c)| if c { *m } else { 0.0 }).collect();
    let k = es.k();
    let n = es.n_nodes();
    let mut c = DMatrix::zeros(k, k);
    for i in 0..n {
        if w[i] == 0.0 {
            continue;
        }
        let row = es.phi.row(i);
        for a in 0..k {
            let va = w[i] * row[a];
            for b in a..k {
                c[(a, b)] += va * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            c[(a, b)] = c[(b, a)];
        }
    }
    c
}

pub fn oracle_local_subspace(es: &EigenSystem, region: impl Fn(usize) -> bool, cut: OracleCut) -> Result<Subspace> {
    let chi: Vec<bool> = (0..es.n_nodes()).map(|i| region(i) && es.mass[i] > 0.0).collect();
    if !chi.iter().any(|&c| c) {
        return input("oracle region contains no mesh nodes");
    }
    let (vals, vecs) = sym_eigen_desc(concentration(es, &chi));
    let thr = match cut {
        OracleCut::Outer(c) => c * vals[0].max(0.0),
        OracleCut::Inner(c) => c,
    };
    let r = vals.iter().take_while(|&&v| v >= thr && v > 0.0).count();
    Ok(Subspace::from_orthonormal(vecs.columns(0, r).into_owned()))
}

/// Travel-time coordinate per node (strings) or None (meshes).
pub fn travel_time(es: &EigenSystem) -> Option<Vec<f64>> {
    match &es.geometry {
        Geometry::String(p) => Some(p.travel_time()),
        Geometry::Polygon(_) => None,
    }
}

/// Distance from `x` to every node: travel time for strings, Euclidean in 2D.
pub fn distances_from(es: &EigenSystem, x: Location) -> Result<Vec<f64>> {
    match (&es.geometry, x) {
        (Geometry::String(p), Location::X(x0)) => {
            let tau = p.travel_time();
            let nodes = p.nodes();
            // travel time of x0 by linear interpolation
            let h = p.h();
            let i = ((x0 / h).floor() as usize).min(p.n_grid() - 1);
            let f = (x0 - nodes[i]) / h;
            let t0 = tau[i] + f * (tau[i + 1] - tau[i]);
            Ok(tau.iter().map(|t| (t - t0).abs()).collect())
        }
        (Geometry::Polygon(m), Location::P(c)) => {
            Ok(m.points.iter().map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()).collect())
        }
        _ => input("oracle point does not match the geometry"),
    }
}

/// H⟨x^t⟩: the local subspace of the metric ball of radius t about x.
pub fn oracle_atom(es: &EigenSystem, x: Location, t: f64, cut: OracleCut) -> Result<Subspace> {
    if !(t > 0.0) {
        return input("oracle_atom needs t > 0");
    }
    let d = distances_from(es, x)?;
    oracle_local_subspace(es, |i| d[i] < t, cut)
}

/// H⟨Γ^t⟩ for the boundary used by the harmonic basis: for strings, `m`
/// endpoints (1: x=0 only, 2: both); for meshes, the whole polygon boundary.
pub fn oracle_boundary_neighborhood(es: &EigenSystem, m: usize, t: f64, cut: OracleCut) -> Result<Subspace> {
    match &es.geometry {
        Geometry::String(p) => {
            let tau = p.travel_time();
            let total = *tau.last().unwrap();
            oracle_local_subspace(es, |i| tau[i] < t || (m >= 2 && total - tau[i] < t), cut)
        }
        Geometry::Polygon(mesh) => {
            let d = &mesh.domain;
            let pts = &mesh.points;
            oracle_local_subspace(es, |i| d.boundary_distance(pts[i]) < t, cut)
        }
    }
}
