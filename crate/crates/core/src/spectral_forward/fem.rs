//! P1 finite elements with lumped mass on a triangulated polygon.
//!
//! Interior unknowns are ordered along the longer axis of the domain so the
//! stiffness matrix is banded; the symmetrized operator M^{-1/2} K M^{-1/2}
//! is factored once (banded Cholesky) and its lowest eigenpairs come from a
//! shift-invert block Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, DVector};

use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen_desc;

/// Symmetric sparse matrix in row-list form.
#[derive(Clone, Debug)]
pub struct SparseSym {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            y[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }
}

pub struct FemSystem {
    /// Mesh node index of each interior unknown.
    pub interior: Vec<usize>,
    /// Unknown index of each mesh node (None on the boundary).
    pub unknown_of: Vec<Option<usize>>,
    /// Lumped mass at every mesh node.
    pub node_mass: Vec<f64>,
    /// Stiffness rows over all mesh nodes.
    pub stiffness: Vec<Vec<(usize, f64)>>,
    /// A = M^{-1/2} K_II M^{-1/2} over interior unknowns.
    pub a: SparseSym,
    chol: BandedCholesky,
}

struct BandedCholesky {
    n: usize,
    bw: usize,
    /// l[i][k] = L[i][i - bw + k]
    l: Vec<Vec<f64>>,
}

impl BandedCholesky {
    fn factor(a: &SparseSym) -> Result<Self> {
        let n = a.rows.len();
        let bw = a
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0);
        let mut l = vec![vec![0.0; bw + 1]; n];
        for (i, row) in a.rows.iter().enumerate() {
            for &(j, v) in row {
                if j <= i {
                    l[i][bw - (i - j)] += v;
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = l[i][bw - (i - j)];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i][bw - (i - k)] * l[j][bw - (j - k)];
                }
                if j == i {
                    if s <= 0.0 {
                        return Err(Error::Numerical("stiffness not positive definite".into()));
                    }
                    l[i][bw] = s.sqrt();
                } else {
                    l[i][bw - (i - j)] = s / l[j][bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i][bw - (i - k)] * b[k];
            }
            b[i] = s / self.l[i][bw];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n.min(i + bw + 1) {
                s -= self.l[k][bw - (k - i)] * b[k];
            }
            b[i] = s / self.l[i][bw];
        }
    }
}

pub fn assemble(mesh: &Mesh) -> Result<FemSystem> {
    let np = mesh.points.len();
    let mut stiff: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); np];
    let mut node_mass = vec![0.0; np];
    for t in &mesh.triangles {
        let p = [mesh.points[t[0]], mesh.points[t[1]], mesh.points[t[2]]];
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        // gradients of barycentric coordinates
        let mut g = [[0.0; 2]; 3];
        for k in 0..3 {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            g[k] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
        }
        for a in 0..3 {
            node_mass[t[a]] += area / 3.0;
            for b in 0..3 {
                let v = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                *stiff[t[a]].entry(t[b]).or_insert(0.0) += v;
            }
        }
    }
    let axis = {
        let d = &mesh.domain;
        let ext = |k: usize| {
            let (lo, hi) = d.vertices.iter().fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v[k]), hi.max(v[k])));
            hi - lo
        };
        if ext(1) > ext(0) { 1 } else { 0 }
    };
    let mut interior: Vec<usize> = (0..np).filter(|&i| !mesh.is_boundary[i]).collect();
    interior.sort_by(|&a, &b| {
        let (pa, pb) = (mesh.points[a], mesh.points[b]);
        pa[axis].total_cmp(&pb[axis]).then(pa[1 - axis].total_cmp(&pb[1 - axis])).then(a.cmp(&b))
    });
    let mut unknown_of = vec![None; np];
    for (u, &i) in interior.iter().enumerate() {
        unknown_of[i] = Some(u);
    }
    let mut rows = Vec::with_capacity(interior.len());
    for &i in &interior {
        let mut r = Vec::new();
        for (&j, &v) in &stiff[i] {
            if let Some(uj) = unknown_of[j] {
                r.push((uj, v / (node_mass[i] * node_mass[j]).sqrt()));
            }
        }
        r.sort_by_key(|e| e.0);
        rows.push(r);
    }
    let a = SparseSym { rows };
    let chol = BandedCholesky::factor(&a)?;
    let stiffness = stiff.into_iter().map(|m| m.into_iter().collect()).collect();
    Ok(FemSystem { interior, unknown_of, node_mass, stiffness, a, chol })
}

impl FemSystem {
    pub fn n_unknowns(&self) -> usize {
        self.interior.len()
    }

    /// Solve A x = b in place.
    pub fn solve_a(&self, b: &mut [f64]) {
        self.chol.solve(b)
    }

    /// Discrete harmonic extension of boundary values `g` (per mesh node; interior entries ignored).
    pub fn harmonic_extension(&self, g: &[f64]) -> Vec<f64> {
        let np = g.len();
        let mut out = g.to_vec();
        // r_I = −K_IB g_B, then K_II h_I = r_I with K = M^{1/2} A M^{1/2}
        let mut r = vec![0.0; self.n_unknowns()];
        for (u, &i) in self.interior.iter().enumerate() {
            out[i] = 0.0;
            let mut s = 0.0;
            for &(j, v) in &self.stiffness[i] {
                if self.unknown_of[j].is_none() {
                    s -= v * g[j];
                }
            }
            r[u] = s / self.node_mass[i].sqrt();
        }
        self.solve_a(&mut r);
        for (u, &i) in self.interior.iter().enumerate() {
            out[i] = r[u] / self.node_mass[i].sqrt();
        }
        debug_assert_eq!(out.len(), np);
        out
    }

    /// max |(K h)_i| over interior nodes.
    pub fn interior_residual(&self, h: &[f64]) -> f64 {
        self.interior
            .iter()
            .map(|&i| self.stiffness[i].iter().map(|&(j, v)| v * h[j]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Lowest `k` eigenpairs of A (ascending), unit vectors as columns.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.n_unknowns();
        if k == 0 || k > n {
            return Err(Error::Resolution(format!("cannot extract {k} eigenpairs from {n} unknowns")));
        }
        let block = 6.min(n);
        let mut target = (3 * k).max(k + 40).min(n);
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let mut rng_state = 0x9E3779B97F4A7C15u64;
        let mut next = || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut current: Vec<DVector<f64>> = (0..block).map(|_| DVector::from_fn(n, |_, _| next())).collect();
        let orth_against = |v: &mut DVector<f64>, basis: &[DVector<f64>]| {
            for _ in 0..2 {
                for q in basis {
                    let c = q.dot(v);
                    v.axpy(-c, q, 1.0);
                }
            }
        };
        loop {
            while basis.len() < target {
                let mut added = 0;
                let mut fresh = Vec::with_capacity(current.len());
                for mut v in current.drain(..) {
                    orth_against(&mut v, &basis);
                    let nrm = v.norm();
                    if nrm > 1e-10 {
                        v /= nrm;
                        orth_against(&mut v, &basis);
                        let nrm2 = v.norm();
                        v /= nrm2;
                        basis.push(v.clone());
                        fresh.push(v);
                        added += 1;
                    }
                    if basis.len() >= n {
                        break;
                    }
                }
                if basis.len() >= n {
                    break;
                }
                if added == 0 {
                    // Krylov space exhausted; restart with new random directions
                    current = (0..block).map(|_| DVector::from_fn(n, |_, _| next())).collect();
                    continue;
                }
                current = fresh
                    .into_iter()
                    .map(|v| {
                        let mut w = v.as_slice().to_vec();
                        self.solve_a(&mut w);
                        DVector::from_vec(w)
                    })
                    .collect();
            }
            let m = basis.len();
            let mut av = vec![0.0; n];
            let mut aq = DMatrix::zeros(n, m);
            for (j, q) in basis.iter().enumerate() {
                self.a.mul(q.as_slice(), &mut av);
                aq.set_column(j, &DVector::from_column_slice(&av));
            }
            let q = DMatrix::from_columns(&basis);
            let h = q.transpose() * &aq;
            let (vals, vecs) = sym_eigen_desc(h);
            // ascending
            let mut lam = Vec::with_capacity(k);
            let mut x = DMatrix::zeros(n, k);
            let mut worst: f64 = 0.0;
            for j in 0..k {
                let col = m - 1 - j;
                let s = vecs.column(col);
                let xv = &q * s;
                // residual of the shift-inverted problem: ‖A⁻¹x − x/θ‖·θ
                let mut w = xv.as_slice().to_vec();
                self.solve_a(&mut w);
                let r = DVector::from_vec(w) * vals[col] - &xv;
                worst = worst.max(r.norm());
                lam.push(vals[col]);
                x.set_column(j, &xv);
            }
            if worst < 1e-9 || m >= n {
                return Ok((lam, x));
            }
            target = (target + target / 2).min(n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::mesh::{build_mesh, PolygonDomain};
    use super::*;

    #[test]
    fn harmonic_extension_reproduces_linear() {
        let mesh = build_mesh(&PolygonDomain::rectangle(1.0, 1.0, 0.1)).unwrap();
        let fem = assemble(&mesh).unwrap();
        let g: Vec<f64> = mesh.points.iter().map(|p| 2.0 * p[0] - p[1] + 0.5).collect();
        let h = fem.harmonic_extension(&g);
        for (i, p) in mesh.points.iter().enumerate() {
            assert!((h[i] - (2.0 * p[0] - p[1] + 0.5)).abs() < 1e-10);
        }
        assert!(fem.interior_residual(&h) < 1e-10);
    }

    #[test]
    fn lanczos_matches_dense() {
        let mesh = build_mesh(&PolygonDomain::rectangle(1.0, 1.0, 0.12)).unwrap();
        let fem = assemble(&mesh).unwrap();
        let n = fem.n_unknowns();
        let mut dense = DMatrix::zeros(n, n);
        for (i, r) in fem.a.rows.iter().enumerate() {
            for &(j, v) in r {
                dense[(i, j)] = v;
            }
        }
        let (vals, _) = sym_eigen_desc(dense);
        let (lam, _) = fem.lowest_eigenpairs(10).unwrap();
        for j in 0..10 {
            let exact = vals[n - 1 - j];
            assert!((lam[j] - exact).abs() < 1e-9 * exact, "{} vs {}", lam[j], exact);
        }
    }
}
