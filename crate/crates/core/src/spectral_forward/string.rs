//! The inhomogeneous string −ρ⁻¹φ'' = λφ on [0, l].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::tridiag::smallest_eigenpairs;
use super::{EigenSystem, Geometry};
use crate::error::{input, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StringProblem {
    pub length: f64,
    /// ρ at the n_grid + 1 uniform nodes.
    pub density: Vec<f64>,
}

impl StringProblem {
    pub fn new(length: f64, density: Vec<f64>) -> Result<Self> {
        let p = Self { length, density };
        p.validate()?;
        Ok(p)
    }

    pub fn from_fn(length: f64, n_grid: usize, rho: impl Fn(f64) -> f64) -> Result<Self> {
        let h = length / n_grid as f64;
        Self::new(length, (0..=n_grid).map(|i| rho(i as f64 * h)).collect())
    }

    pub fn constant(length: f64, n_grid: usize) -> Result<Self> {
        Self::from_fn(length, n_grid, |_| 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return input("string length must be positive");
        }
        if self.density.len() < 17 {
            return input("string n_grid must be at least 16");
        }
        if self.density.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return input("string density must be positive and finite");
        }
        Ok(())
    }

    pub fn n_grid(&self) -> usize {
        self.density.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.length / self.n_grid() as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        (0..=self.n_grid()).map(|i| i as f64 * h).collect()
    }

    /// Travel time τ(x_i) = ∫₀^{x_i} √ρ (trapezoid rule).
    pub fn travel_time(&self) -> Vec<f64> {
        let h = self.h();
        let mut tau = Vec::with_capacity(self.density.len());
        tau.push(0.0);
        for i in 1..self.density.len() {
            let prev = tau[i - 1];
            tau.push(prev + 0.5 * h * (self.density[i - 1].sqrt() + self.density[i].sqrt()));
        }
        tau
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { length: self.length, density: self.density.iter().map(|r| r * c).collect() }
    }
}

fn check_k(p: &StringProblem, k: usize) -> Result<()> {
    p.validate()?;
    if k == 0 || 4 * k > p.n_grid() {
        return Err(Error::Resolution(format!("K={k} needs n_grid ≥ 4K (n_grid={})", p.n_grid())));
    }
    Ok(())
}

/// First K Dirichlet eigenpairs of the lumped-mass finite-difference string.
pub fn solve_string_eigs(p: &StringProblem, k: usize) -> Result<EigenSystem> {
    check_k(p, k)?;
    let n = p.n_grid();
    let h = p.h();
    let r = &p.density[1..n];
    let d: Vec<f64> = r.iter().map(|ri| 2.0 / (h * h * ri)).collect();
    let e: Vec<f64> = r.windows(2).map(|w| -1.0 / (h * h * (w[0] * w[1]).sqrt())).collect();
    let (vals, vecs) = smallest_eigenpairs(&d, &e, k);
    let mut phi = DMatrix::zeros(n + 1, k);
    for (j, v) in vecs.iter().enumerate() {
        for i in 0..n - 1 {
            phi[(i + 1, j)] = v[i] / (h * r[i]).sqrt();
        }
    }
    super::fix_first_nonzero_positive(&mut phi);
    let mut mass = DVector::from_iterator(n + 1, p.density.iter().map(|ri| h * ri));
    mass[0] = 0.0;
    mass[n] = 0.0;
    Ok(EigenSystem { lambda: vals, phi, mass, geometry: Geometry::String(p.clone()) })
}

/// ρ ≡ 1, l = 1 from the analytic pairs λ_k = (kπ)², φ_k = √2 sin kπx,
/// with Simpson weights as the mass (n_grid even).
pub fn analytic_constant_string(k: usize, n_grid: usize) -> Result<EigenSystem> {
    if n_grid % 2 != 0 {
        return input("analytic string needs an even n_grid for Simpson weights");
    }
    let p = StringProblem::constant(1.0, n_grid)?;
    let h = p.h();
    let x = p.nodes();
    let pi = std::f64::consts::PI;
    let lambda: Vec<f64> = (1..=k).map(|j| (j as f64 * pi).powi(2)).collect();
    let phi = DMatrix::from_fn(n_grid + 1, k, |i, j| {
        if i == 0 || i == n_grid {
            0.0
        } else {
            2f64.sqrt() * ((j + 1) as f64 * pi * x[i]).sin()
        }
    });
    let mass = DVector::from_fn(n_grid + 1, |i, _| {
        let w = if i == 0 || i == n_grid { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        w * h / 3.0
    });
    Ok(EigenSystem { lambda, phi, mass, geometry: Geometry::String(p) })
}

/// Positive spectrum of the soft (Krein) extension: −ρ⁻¹y'' with
/// y(0) + l·y'(0) = 0 and y(l) = 0. The kernel (spanned by 1 − x/l) is
/// dropped; the first K positive eigenvalues are returned.
pub fn krein_spectrum_string(p: &StringProblem, k: usize) -> Result<Vec<f64>> {
    check_k(p, k + 1)?;
    let n = p.n_grid();
    let h = p.h();
    let l = p.length;
    // unknowns: nodes 0..n-1; lumped masses
    let m: Vec<f64> = (0..n).map(|i| if i == 0 { 0.5 * h * p.density[0] } else { h * p.density[i] }).collect();
    let mut kd = vec![2.0 / h; n];
    kd[0] = 1.0 / h - 1.0 / l;
    let d: Vec<f64> = (0..n).map(|i| kd[i] / m[i]).collect();
    let e: Vec<f64> = (0..n - 1).map(|i| -(1.0 / h) / (m[i] * m[i + 1]).sqrt()).collect();
    let (vals, _) = smallest_eigenpairs(&d, &e, k + 1);
    let zero = vals[0];
    if zero.abs() > 1e-6 * vals[1].abs() {
        return Err(Error::Numerical(format!("Krein kernel eigenvalue not ≈ 0: {zero}")));
    }
    Ok(vals[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_string_eigenvalues() {
        let p = StringProblem::constant(1.0, 50 * 20).unwrap();
        let es = solve_string_eigs(&p, 20).unwrap();
        for (k, lam) in es.lambda.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            assert!((lam - exact).abs() / exact < 1e-3);
        }
        assert!((es.lambda[0] - PI * PI).abs() < 1e-4);
    }

    #[test]
    fn eigenvectors_match_sine() {
        let p = StringProblem::constant(1.0, 2000).unwrap();
        let es = solve_string_eigs(&p, 5).unwrap();
        let x = p.nodes();
        for k in 0..5 {
            let err = (0..x.len())
                .map(|i| (es.phi[(i, k)] - 2f64.sqrt() * ((k + 1) as f64 * PI * x[i]).sin()).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-4, "k={k} err={err}");
        }
    }

    #[test]
    fn density_scaling() {
        let p = StringProblem::from_fn(1.0, 400, |x| 1.0 + 0.8 * x).unwrap();
        let a = solve_string_eigs(&p, 10).unwrap();
        let b = solve_string_eigs(&p.scaled(3.0), 10).unwrap();
        for k in 0..10 {
            assert!((a.lambda[k] / 3.0 - b.lambda[k]).abs() < 1e-10 * a.lambda[k]);
        }
    }

    #[test]
    fn resolution_guard() {
        let p = StringProblem::constant(1.0, 40).unwrap();
        assert!(matches!(solve_string_eigs(&p, 11), Err(Error::Resolution(_))));
        assert!(StringProblem::new(1.0, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn krein_first_eigenvalue() {
        let p = StringProblem::constant(1.0, 4000).unwrap();
        let ev = krein_spectrum_string(&p, 3).unwrap();
        assert!((ev[0] - 4.493409457909064f64.powi(2)).abs() / ev[0] < 1e-4);
        assert!(ev[0] > PI * PI && ev[0] < 4.0 * PI * PI);
    }
}
