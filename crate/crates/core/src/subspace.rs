//! Closed subspaces of a truncated ℓ₂, stored as orthonormal frames, with
//! tolerance-aware lattice operations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{fix_column_signs, svd_desc, sym_eigen_desc};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub rank_cut: f64,
    pub angle_tol: f64,
    pub dedup_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { rank_cut: 1e-8, angle_tol: 1e-3, dedup_tol: 1e-6 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.rank_cut) || self.rank_cut >= 1.0 {
            return input("tolerances.rank_cut must lie in (0,1)");
        }
        if !ok(self.angle_tol) || self.angle_tol >= std::f64::consts::FRAC_PI_4 {
            return input("tolerances.angle_tol must lie in (0,π/4)");
        }
        if !ok(self.dedup_tol) {
            return input("tolerances.dedup_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Self { frame: DMatrix::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Self { frame: DMatrix::identity(n, n) }
    }

    /// Wrap a frame that is already column-orthonormal.
    pub fn from_orthonormal(frame: DMatrix<f64>) -> Self {
        Self { frame }
    }

    pub fn span_of(n: usize, vectors: &[&[f64]], tol: &ToleranceConfig) -> Result<Self> {
        let mut m = DMatrix::zeros(n, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != n {
                return Err(Error::AmbientMismatch(n, v.len()));
            }
            m.set_column(j, &DVector::from_column_slice(v));
        }
        orthonormalize(&m, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Orthogonal projector P = F Fᵀ.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }
}

/// Span of the columns, keeping singular values ≥ rank_cut·σ_max.
pub fn orthonormalize(raw: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<Subspace> {
    orthonormalize_cut(raw, tol.rank_cut)
}

pub fn orthonormalize_cut(raw: &DMatrix<f64>, cut: f64) -> Result<Subspace> {
    let n = raw.nrows();
    if raw.iter().any(|v| !v.is_finite()) {
        return input("non-finite entries in columns");
    }
    if raw.ncols() == 0 || n == 0 {
        return Ok(Subspace::zero(n));
    }
    let (u, s, _) = svd_desc(raw);
    if s[0] <= 0.0 {
        return Ok(Subspace::zero(n));
    }
    let r = s.iter().take_while(|&&v| v >= cut * s[0]).count();
    let mut f = u.columns(0, r).into_owned();
    fix_column_signs(&mut f);
    Ok(Subspace { frame: f })
}

/// Range of a positive semidefinite matrix, keeping eigenvalues ≥ cut·λ_max.
pub fn psd_range(gram: DMatrix<f64>, cut: f64) -> Result<Subspace> {
    let n = gram.nrows();
    if gram.iter().any(|v| !v.is_finite()) {
        return input("non-finite entries in Gram matrix");
    }
    let (vals, vecs) = sym_eigen_desc(gram);
    if n == 0 || vals[0] <= 0.0 {
        return Ok(Subspace::zero(n));
    }
    let r = vals.iter().take_while(|&&v| v >= cut * vals[0]).count();
    Ok(Subspace { frame: vecs.columns(0, r).into_owned() })
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::AmbientMismatch(a.ambient_dim(), b.ambient_dim()));
    }
    Ok(())
}

/// Paired principal decomposition: angles ascending, with the matching
/// directions A·u_i and B·v_i as columns.
struct Principal {
    angles: Vec<f64>,
    ua: DMatrix<f64>,
}

fn principal(a: &Subspace, b: &Subspace) -> Principal {
    let fa = a.frame();
    let fb = b.frame();
    let cross = fa.transpose() * fb;
    let (u, s, v) = svd_desc(&cross);
    let ua = fa * &u;
    let vb = fb * &v;
    // sin θ from the residual of each pair; atan2 keeps small angles accurate
    let angles = (0..s.len())
        .map(|i| {
            let c = s[i].min(1.0);
            let resid = (vb.column(i) - ua.column(i) * c).norm();
            resid.atan2(c).clamp(0.0, std::f64::consts::FRAC_PI_2)
        })
        .collect::<Vec<_>>();
    // descending cosines give ascending angles up to rounding; sort stably
    let mut idx: Vec<usize> = (0..angles.len()).collect();
    idx.sort_by(|&x, &y| angles[x].total_cmp(&angles[y]).then(x.cmp(&y)));
    let mut uo = DMatrix::zeros(ua.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        uo.set_column(j, &ua.column(i));
    }
    Principal { angles: idx.iter().map(|&i| angles[i]).collect(), ua: uo }
}

/// The min(r_A, r_B) principal angles, nondecreasing.
pub fn principal_angles(a: &Subspace, b: &Subspace) -> Result<Vec<f64>> {
    check_ambient(a, b)?;
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroSubspace);
    }
    Ok(principal(a, b).angles)
}

/// Smallest principal angle, π/2 when either side is zero.
pub fn min_angle(a: &Subspace, b: &Subspace) -> f64 {
    if a.is_zero() || b.is_zero() || a.ambient_dim() != b.ambient_dim() {
        return std::f64::consts::FRAC_PI_2;
    }
    let cross = a.frame().transpose() * b.frame();
    let (u, s, v) = svd_desc(&cross);
    let c = s[0].min(1.0);
    let resid = (b.frame() * v.column(0) - a.frame() * u.column(0) * c).norm();
    resid.atan2(c)
}

pub fn meet(a: &Subspace, b: &Subspace, tol: &ToleranceConfig) -> Result<Subspace> {
    check_ambient(a, b)?;
    let n = a.ambient_dim();
    if a.is_zero() || b.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let p = principal(a, b);
    let k = p.angles.iter().take_while(|&&t| t < tol.angle_tol).count();
    let mut f = p.ua.columns(0, k).into_owned();
    fix_column_signs(&mut f);
    Ok(Subspace { frame: f })
}

/// Join that is consistent with `meet`: directions of B lying within
/// angle_tol of A are not added, so dim(A∨B) = dim A + dim B − dim(A∧B).
pub fn join(a: &Subspace, b: &Subspace, tol: &ToleranceConfig) -> Result<Subspace> {
    check_ambient(a, b)?;
    if b.is_zero() {
        return Ok(a.clone());
    }
    if a.is_zero() {
        return Ok(b.clone());
    }
    let fa = a.frame();
    let resid = b.frame() - fa * (fa.transpose() * b.frame());
    let (u, s, _) = svd_desc(&resid);
    let thr = tol.angle_tol.sin();
    let k = s.iter().take_while(|&&v| v >= thr).count();
    let mut f = DMatrix::zeros(a.ambient_dim(), a.dim() + k);
    f.columns_mut(0, a.dim()).copy_from(fa);
    if k > 0 {
        // re-orthogonalize against A once more for safety
        let mut extra = u.columns(0, k).into_owned();
        extra -= fa * (fa.transpose() * &extra);
        let (ue, _, _) = svd_desc(&extra);
        f.columns_mut(a.dim(), k).copy_from(&ue.columns(0, k));
    }
    let (uf, _, _) = svd_desc(&f);
    let mut uf = uf.columns(0, a.dim() + k).into_owned();
    fix_column_signs(&mut uf);
    Ok(Subspace { frame: uf })
}

pub fn complement(a: &Subspace) -> Subspace {
    let n = a.ambient_dim();
    if a.is_zero() {
        return Subspace::full(n);
    }
    if a.dim() == n {
        return Subspace::zero(n);
    }
    let p = DMatrix::identity(n, n) - a.projector();
    let (vals, vecs) = sym_eigen_desc(p);
    let r = vals.iter().take_while(|&&v| v > 0.5).count().min(n - a.dim());
    Subspace { frame: vecs.columns(0, r).into_owned() }
}

/// A ⊆ B up to angle_tol.
pub fn leq(a: &Subspace, b: &Subspace, tol: &ToleranceConfig) -> Result<bool> {
    check_ambient(a, b)?;
    Ok(containment_angle(a, b) < tol.angle_tol)
}

/// Largest angle between a direction of A and the subspace B
/// (π/2 if dim A > dim B); 0 for A = 0.
pub fn containment_angle(a: &Subspace, b: &Subspace) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    if b.is_zero() || a.dim() > b.dim() {
        return std::f64::consts::FRAC_PI_2;
    }
    let fb = b.frame();
    let resid = a.frame() - fb * (fb.transpose() * a.frame());
    let (_, s, _) = svd_desc(&resid);
    s[0].min(1.0).asin()
}

/// Largest of the first min(r_A, r_B) principal angles.
pub fn matched_angle(a: &Subspace, b: &Subspace) -> f64 {
    if a.is_zero() || b.is_zero() {
        return if a.dim() == b.dim() { 0.0 } else { std::f64::consts::FRAC_PI_2 };
    }
    principal(a, b).angles.last().copied().unwrap_or(0.0)
}

/// Same dimension and all principal angles below dedup_tol.
pub fn approx_eq(a: &Subspace, b: &Subspace, tol: &ToleranceConfig) -> bool {
    if a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim() {
        return false;
    }
    if a.is_zero() {
        return true;
    }
    containment_angle(a, b) < tol.dedup_tol
}

pub fn project(a: &Subspace, v: &DVector<f64>) -> DVector<f64> {
    let f = a.frame();
    f * (f.transpose() * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn span(n: usize, vs: &[Vec<f64>]) -> Subspace {
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        Subspace::span_of(n, &refs, &ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn collinear_and_empty() {
        let tol = ToleranceConfig::default();
        let s = span(3, &[e(3, 0), vec![2.0, 0.0, 0.0]]);
        assert_eq!(s.dim(), 1);
        assert!(approx_eq(&s, &span(3, &[e(3, 0)]), &tol));
        assert_eq!(orthonormalize(&DMatrix::zeros(3, 0), &tol).unwrap().dim(), 0);
    }

    #[test]
    fn near_collinear_rank() {
        // singular values of [e1+1e-12 e2, e1] are ~√2 and ~7e-13
        let s = span(3, &[vec![1.0, 1e-12, 0.0], e(3, 0)]);
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_element(2, 1, f64::NAN);
        assert!(orthonormalize(&m, &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn meet_examples() {
        let tol = ToleranceConfig::default();
        let a = span(3, &[e(3, 0), e(3, 1)]);
        let b = span(3, &[e(3, 1), e(3, 2)]);
        let m = meet(&a, &b, &tol).unwrap();
        assert!(approx_eq(&m, &span(3, &[e(3, 1)]), &tol));
        assert!(approx_eq(&meet(&a, &a, &tol).unwrap(), &a, &tol));
        let tight = ToleranceConfig { angle_tol: 1e-6, ..tol };
        let d = span(3, &[vec![1.0, 1.0, 0.0]]);
        assert_eq!(meet(&span(3, &[e(3, 0)]), &d, &tight).unwrap().dim(), 0);
    }

    #[test]
    fn angles_examples() {
        let a = span(3, &[e(3, 0)]);
        let b = span(3, &[vec![1.0, 1.0, 0.0]]);
        let ang = principal_angles(&a, &b).unwrap();
        assert!((ang[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
        let c = span(3, &[e(3, 0), e(3, 1)]);
        let d = span(3, &[e(3, 1), e(3, 2)]);
        let ang = principal_angles(&c, &d).unwrap();
        assert!(ang[0].abs() < 1e-14 && (ang[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!(principal_angles(&Subspace::zero(3), &c).is_err());
    }

    #[test]
    fn small_angle_is_accurate() {
        let eps = 1e-9;
        let a = span(2, &[e(2, 0)]);
        let b = span(2, &[vec![1.0, eps]]);
        let ang = principal_angles(&a, &b).unwrap()[0];
        assert!((ang - eps.atan()).abs() < 1e-20);
    }

    #[test]
    fn leq_flips_at_angle_tol() {
        let tol = ToleranceConfig::default();
        let b = span(2, &[e(2, 0)]);
        for (eps, expect) in [(0.9e-3, true), (1.1e-3, false)] {
            let a = span(2, &[vec![1.0, eps]]);
            assert_eq!(leq(&a, &b, &tol).unwrap(), expect, "eps={eps}");
        }
        assert!(leq(&Subspace::zero(2), &b, &tol).unwrap());
        assert!(!leq(&Subspace::full(2), &b, &tol).unwrap());
    }

    #[test]
    fn complement_examples() {
        let tol = ToleranceConfig::default();
        assert_eq!(complement(&Subspace::zero(4)).dim(), 4);
        let c = complement(&span(4, &[e(4, 0)]));
        assert!(approx_eq(&c, &span(4, &[e(4, 1), e(4, 2), e(4, 3)]), &tol));
    }

    #[test]
    fn join_examples() {
        let tol = ToleranceConfig::default();
        let a = span(3, &[e(3, 0)]);
        assert!(approx_eq(&join(&a, &Subspace::zero(3), &tol).unwrap(), &a, &tol));
        let j = join(&a, &span(3, &[e(3, 1)]), &tol).unwrap();
        assert!(approx_eq(&j, &span(3, &[e(3, 0), e(3, 1)]), &tol));
    }

    #[test]
    fn project_examples() {
        let a = span(3, &[e(3, 0)]);
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!(project(&a, &v).norm() < 1e-15);
        let w = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        assert!((project(&Subspace::full(3), &w) - &w).norm() < 1e-15);
    }

    #[test]
    fn non_distributive_witness() {
        // three distinct lines in a plane: x ∧ (y ∨ z) = x but (x∧y) ∨ (x∧z) = 0
        let tol = ToleranceConfig::default();
        let x = span(2, &[e(2, 0)]);
        let y = span(2, &[e(2, 1)]);
        let z = span(2, &[vec![1.0, 1.0]]);
        let lhs = meet(&x, &join(&y, &z, &tol).unwrap(), &tol).unwrap();
        let rhs = join(&meet(&x, &y, &tol).unwrap(), &meet(&x, &z, &tol).unwrap(), &tol).unwrap();
        assert_eq!(lhs.dim(), 1);
        assert_eq!(rhs.dim(), 0);
    }
}
