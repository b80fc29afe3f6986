//! Small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Flip each column so that its largest-magnitude entry is positive.
pub fn fix_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best * (1.0 + 1e-12) {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

const MAX_SWEEPS: usize = 200_000;

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sym_eigen_desc(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], DMatrix::zeros(0, 0));
    }
    let sym = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, MAX_SWEEPS).unwrap_or_else(|| SymmetricEigen::new(sym));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    fix_column_signs(&mut vecs);
    (vals, vecs)
}

/// Thin SVD with singular values sorted descending. Returns (U, sigma, V).
///
/// One-sided Jacobi: slower than bidiagonal QR but accurate to roundoff on
/// clustered singular values, where nalgebra's SVD stops short.
pub fn svd_desc(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    if r.min(c) == 0 {
        return (DMatrix::zeros(r, 0), vec![], DMatrix::zeros(c, 0));
    }
    if r < c {
        let (v, s, u) = svd_desc(&m.transpose());
        return (u, s, v);
    }
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(c, c);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut a, p, q, cs, sn);
                rotate(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..c).map(|j| a.column(j).norm()).collect();
    let mut idx: Vec<usize> = (0..c).collect();
    idx.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    let big = norms[idx[0]];
    let mut uo = DMatrix::zeros(r, c);
    let mut vo = DMatrix::zeros(c, c);
    let mut so = Vec::with_capacity(c);
    for (j, &i) in idx.iter().enumerate() {
        let s = norms[i];
        so.push(s);
        vo.set_column(j, &v.column(i));
        if s > f64::EPSILON * big && s > f64::MIN_POSITIVE {
            uo.set_column(j, &(a.column(i) / s));
        }
    }
    // complete U where singular values vanish
    let mut e = 0;
    for j in 0..c {
        if uo.column(j).norm_squared() > 0.5 {
            continue;
        }
        while e < r {
            let mut w = DVector::<f64>::zeros(r);
            w[e] = 1.0;
            e += 1;
            for _ in 0..2 {
                for k in 0..c {
                    if k != j && uo.column(k).norm_squared() > 0.5 {
                        let d = uo.column(k).dot(&w);
                        w -= uo.column(k) * d;
                    }
                }
            }
            let n = w.norm();
            if n > 1e-3 {
                uo.set_column(j, &(w / n));
                break;
            }
        }
    }
    (uo, so, vo)
}

const JACOBI_SWEEPS: usize = 80;

fn rotate(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    // clustered unit singular values: cross-Gram of two coordinate subsets
    // of a random orthonormal basis
    #[test]
    fn svd_pairs_clustered_values() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(4..40);
            let q = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                let c: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                DMatrix::from_fn(n, c.len(), |i, j| q[(i, c[j])])
            };
            let (a, b) = (pick(&mut rng), pick(&mut rng));
            let m = a.transpose() * &b;
            let (u, s, v) = svd_desc(&m);
            let err = (&m * &v - &u * DMatrix::from_diagonal(&DVector::from_vec(s.clone()))).norm();
            assert!(err < 1e-12, "n={n} err={err:e}");
            assert!(s.iter().all(|&x| x <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn sym_eigen_of_projector() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let n = rng.gen_range(4..40);
            let r = rng.gen_range(1..n);
            let q = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
            let f = q.columns(0, r).into_owned();
            let p = &f * f.transpose();
            let (vals, vecs) = sym_eigen_desc(p.clone());
            let err = (&p * &vecs - &vecs * DMatrix::from_diagonal(&DVector::from_vec(vals.clone()))).norm();
            assert!(err < 1e-12, "err={err:e}");
            assert!((vals[r - 1] - 1.0).abs() < 1e-12 && vals[r].abs() < 1e-12);
        }
    }
}
