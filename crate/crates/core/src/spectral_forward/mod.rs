//! Forward solvers producing the augmented spectral data (λ, κ). This is the
//! only module that knows the true geometry.

pub mod fem;
pub mod krein;
pub mod mesh;
pub mod string;
pub mod tridiag;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::subspace::{orthonormalize_cut, Subspace};
pub use krein::{krein_probe, KreinProbe, SpectralPair};
pub use mesh::{build_mesh, Mesh, PolygonDomain};
pub use string::{analytic_constant_string, krein_spectrum_string, solve_string_eigs, StringProblem};

#[derive(Clone, Debug)]
pub enum Geometry {
    String(StringProblem),
    Polygon(Box<Mesh>),
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub lambda: Vec<f64>,
    /// Nodal eigenvectors as columns (nodes × K).
    pub phi: DMatrix<f64>,
    /// Diagonal mass (quadrature weights) per node.
    pub mass: DVector<f64>,
    pub geometry: Geometry,
}

impl EigenSystem {
    pub fn k(&self) -> usize {
        self.lambda.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.phi.nrows()
    }

    /// Mass inner product (u, v).
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.iter().zip(u).zip(v).map(|((m, a), b)| m * a * b).sum()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let w = DMatrix::from_diagonal(&self.mass);
        let g = self.phi.transpose() * w * &self.phi;
        let k = self.k();
        (g - DMatrix::identity(k, k)).abs().max()
    }

    /// Restrict to the first `k` modes.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            lambda: self.lambda[..k].to_vec(),
            phi: self.phi.columns(0, k).into_owned(),
            mass: self.mass.clone(),
            geometry: self.geometry.clone(),
        }
    }
}

/// Make the first clearly nonzero nodal entry of every column positive.
pub(crate) fn fix_first_nonzero_positive(phi: &mut DMatrix<f64>) {
    for mut col in phi.column_iter_mut() {
        let mx = col.amax();
        if let Some(v) = col.iter().find(|v| v.abs() > 1e-8 * mx) {
            if *v < 0.0 {
                col.neg_mut();
            }
        }
    }
}

pub fn solve_polygon_eigs(domain: &PolygonDomain, k: usize) -> Result<EigenSystem> {
    let mesh = build_mesh(domain)?;
    eigs_on_mesh(mesh, k)
}

pub fn eigs_on_mesh(mesh: Mesh, k: usize) -> Result<EigenSystem> {
    let fem = fem::assemble(&mesh)?;
    if k == 0 || 10 * k > fem.n_unknowns() {
        return Err(Error::Resolution(format!(
            "K={k} needs at least 10K interior nodes (have {})",
            fem.n_unknowns()
        )));
    }
    let (lambda, y) = fem.lowest_eigenpairs(k)?;
    let np = mesh.points.len();
    let mut phi = DMatrix::zeros(np, k);
    for (u, &i) in fem.interior.iter().enumerate() {
        let s = fem.node_mass[i].sqrt();
        for j in 0..k {
            phi[(i, j)] = y[(u, j)] / s;
        }
    }
    fix_first_nonzero_positive(&mut phi);
    let mut mass = DVector::from_vec(fem.node_mass.clone());
    for (i, b) in mesh.is_boundary.iter().enumerate() {
        if *b {
            mass[i] = 0.0;
        }
    }
    Ok(EigenSystem { lambda, phi, mass, geometry: Geometry::Polygon(Box::new(mesh)) })
}

#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    /// Nodal values, one column per harmonic function.
    pub h: DMatrix<f64>,
    pub boundary_modes: Vec<String>,
    /// Largest interior residual of the discrete equation.
    pub residual: f64,
}

/// 1D: M = 1 gives the single function 1 − x/l (Γ = {0}); M = 2 gives
/// {1 − x/l, x/l} (Γ = {0, l}). 2D: harmonic extensions of the first M
/// arclength Fourier modes of the boundary.
pub fn harmonic_basis(geometry: &Geometry, m: usize) -> Result<HarmonicBasis> {
    if m == 0 {
        return input("harmonic basis size M must be ≥ 1");
    }
    match geometry {
        Geometry::String(p) => {
            if m > 2 {
                return Err(Error::Input(format!("string admits at most 2 harmonic functions, M={m}")));
            }
            let x = p.nodes();
            let l = p.length;
            let n = x.len();
            let mut h = DMatrix::zeros(n, m);
            let mut modes = vec!["1-x/l".to_string()];
            for i in 0..n {
                h[(i, 0)] = 1.0 - x[i] / l;
                if m == 2 {
                    h[(i, 1)] = x[i] / l;
                }
            }
            if m == 2 {
                modes.push("x/l".into());
            }
            // y'' = 0 holds exactly for nodal linear functions
            let residual = (0..m)
                .map(|j| (1..n - 1).map(|i| (h[(i - 1, j)] - 2.0 * h[(i, j)] + h[(i + 1, j)]).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            Ok(HarmonicBasis { h, boundary_modes: modes, residual })
        }
        Geometry::Polygon(mesh) => {
            let fem = fem::assemble(mesh)?;
            let nb = mesh.boundary_loop.len();
            if m > nb {
                return Err(Error::Input(format!("M={m} exceeds the {nb} boundary nodes")));
            }
            let np = mesh.points.len();
            let mut h = DMatrix::zeros(np, m);
            let mut modes = Vec::with_capacity(m);
            let mut residual: f64 = 0.0;
            for j in 0..m {
                let freq = (j + 1) / 2;
                let mut g = vec![0.0; np];
                for (b, &node) in mesh.boundary_loop.iter().enumerate() {
                    let s = 2.0 * std::f64::consts::PI * freq as f64 * mesh.boundary_arclength[b] / mesh.perimeter;
                    g[node] = if j == 0 {
                        1.0
                    } else if j % 2 == 1 {
                        s.cos()
                    } else {
                        s.sin()
                    };
                }
                modes.push(match j {
                    0 => "1".to_string(),
                    _ if j % 2 == 1 => format!("cos(2π·{freq}s/P)"),
                    _ => format!("sin(2π·{freq}s/P)"),
                });
                let hv = fem.harmonic_extension(&g);
                residual = residual.max(fem.interior_residual(&hv));
                h.set_column(j, &DVector::from_vec(hv));
            }
            Ok(HarmonicBasis { h, boundary_modes: modes, residual })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda: Vec<f64>,
    pub kappa: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl SpectralData {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.lambda.len() != self.k {
            return input("spectral data: lambda must have K entries");
        }
        if self.m == 0 || self.m > self.k || self.kappa.len() != self.m {
            return input("spectral data: kappa must have M rows with 1 ≤ M ≤ K");
        }
        if self.kappa.iter().any(|r| r.len() != self.k) {
            return input("spectral data: each kappa row must have K entries");
        }
        if self.lambda.iter().chain(self.kappa.iter().flatten()).any(|v| !v.is_finite()) {
            return input("spectral data: non-finite entries");
        }
        if self.lambda.iter().any(|&l| l <= 0.0) || self.lambda.windows(2).any(|w| w[1] < w[0]) {
            return input("spectral data: lambda must be positive and nondecreasing");
        }
        if self.kappa.iter().any(|r| r.iter().all(|&v| v == 0.0)) {
            return input("spectral data: kappa rows must be nonzero");
        }
        Ok(())
    }

    pub fn omega(&self) -> Vec<f64> {
        self.lambda.iter().map(|l| l.sqrt()).collect()
    }

    /// κ as a K×M matrix (columns = rows of κ in ℓ₂ coordinates).
    pub fn kappa_columns(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.m, |k, i| self.kappa[i][k])
    }

    /// Orthonormal frame of K̃ (span of the κ rows).
    pub fn harmonic_frame(&self) -> Result<Subspace> {
        let s = orthonormalize_cut(&self.kappa_columns(), 1e-10)?;
        if s.dim() < self.m {
            return Err(Error::DegenerateBasis(format!("rank of κ is {} < M={}", s.dim(), self.m)));
        }
        Ok(s)
    }

    /// κ rows recombined by an invertible M×M matrix (row i ← Σ_j r_ij κ_j).
    pub fn recombined(&self, r: &DMatrix<f64>) -> Self {
        let kappa = (0..self.m)
            .map(|i| (0..self.k).map(|k| (0..self.m).map(|j| r[(i, j)] * self.kappa[j][k]).sum()).collect())
            .collect();
        Self { kappa, ..self.clone() }
    }
}

pub fn assemble_kappa(es: &EigenSystem, hb: &HarmonicBasis) -> Result<SpectralData> {
    if hb.h.nrows() != es.n_nodes() {
        return Err(Error::Input(format!(
            "harmonic basis has {} nodes, eigen system {}",
            hb.h.nrows(),
            es.n_nodes()
        )));
    }
    let w = DMatrix::from_diagonal(&es.mass);
    let kap = hb.h.transpose() * w * &es.phi;
    let kappa = (0..kap.nrows()).map(|i| kap.row(i).iter().copied().collect()).collect();
    let mut meta = BTreeMap::new();
    meta.insert("harmonic_modes".into(), serde_json::json!(hb.boundary_modes));
    meta.insert("nodes".into(), serde_json::json!(es.n_nodes()));
    Ok(SpectralData { lambda: es.lambda.clone(), kappa, k: es.k(), m: hb.h.ncols(), meta })
}

/// ν_k = φ'_k(0) by the 7-point one-sided stencil (sixth order).
pub fn string_nu(es: &EigenSystem) -> Result<Vec<f64>> {
    let Geometry::String(p) = &es.geometry else {
        return input("string_nu needs a string geometry");
    };
    const C: [f64; 7] = [-49.0 / 20.0, 6.0, -7.5, 20.0 / 3.0, -3.75, 1.2, -1.0 / 6.0];
    let h = p.h();
    Ok((0..es.k()).map(|k| (0..7).map(|i| C[i] * es.phi[(i, k)]).sum::<f64>() / h).collect())
}

/// α_k = ‖P_K̃ e_k‖.
pub fn angular_spectrum(sd: &SpectralData) -> Result<Vec<f64>> {
    let q = sd.harmonic_frame()?;
    let f = q.frame();
    Ok((0..sd.k).map(|k| f.row(k).norm()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kappa_constant_string() {
        let es = solve_string_eigs(&StringProblem::constant(1.0, 4000).unwrap(), 10).unwrap();
        let hb = harmonic_basis(&es.geometry, 1).unwrap();
        let sd = assemble_kappa(&es, &hb).unwrap();
        assert!((sd.kappa[0][0] - 2f64.sqrt() / PI).abs() < 1e-5);
        assert!((sd.kappa[0][0] - 0.45016).abs() < 1e-5);
        for k in 0..10 {
            let exact = 2f64.sqrt() / ((k + 1) as f64 * PI);
            assert!((sd.kappa[0][k] - exact).abs() < 1e-4 * exact.max(1e-2));
        }
    }

    #[test]
    fn nu_identity_analytic() {
        let es = analytic_constant_string(20, 4000).unwrap();
        let nu = string_nu(&es).unwrap();
        assert!((nu[0] - 2f64.sqrt() * PI).abs() < 1e-8);
        let sd = assemble_kappa(&es, &harmonic_basis(&es.geometry, 1).unwrap()).unwrap();
        for k in 0..20 {
            let rel = (nu[k] - sd.lambda[k] * sd.kappa[0][k]).abs() / nu[k].abs();
            assert!(rel < 1e-6, "k={k} rel={rel}");
        }
    }

    #[test]
    fn angular_spectrum_rank_one_and_trace() {
        let es = solve_string_eigs(&StringProblem::from_fn(1.0, 800, |x| 1.0 + 0.8 * x).unwrap(), 12).unwrap();
        let sd1 = assemble_kappa(&es, &harmonic_basis(&es.geometry, 1).unwrap()).unwrap();
        let a = angular_spectrum(&sd1).unwrap();
        let nrm: f64 = sd1.kappa[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..12 {
            assert!((a[k] - sd1.kappa[0][k].abs() / nrm).abs() < 1e-12);
        }
        let sd2 = assemble_kappa(&es, &harmonic_basis(&es.geometry, 2).unwrap()).unwrap();
        let tr: f64 = angular_spectrum(&sd2).unwrap().iter().map(|v| v * v).sum();
        assert!((tr - 2.0).abs() < 1e-12);
    }

    #[test]
    fn square_lowest_eigenvalue_and_ground_state() {
        let es = solve_polygon_eigs(&PolygonDomain::rectangle(1.0, 1.0, 0.05), 6).unwrap();
        assert!((es.lambda[0] - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 0.02, "{}", es.lambda[0]);
        assert!(es.orthonormality_defect() < 1e-8);
        let g = es.phi.column(0);
        let Geometry::Polygon(mesh) = &es.geometry else { unreachable!() };
        for (i, b) in mesh.is_boundary.iter().enumerate() {
            if !b {
                assert!(g[i] > 0.0);
            }
        }
    }

    #[test]
    fn square_constant_trace_is_constant() {
        let mesh = build_mesh(&PolygonDomain::rectangle(1.0, 1.0, 0.1)).unwrap();
        let hb = harmonic_basis(&Geometry::Polygon(Box::new(mesh)), 3).unwrap();
        assert!(hb.h.column(0).iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!(hb.residual < 1e-10);
    }
}
