//! Lowest eigenpairs of a symmetric tridiagonal matrix: Sturm-sequence
//! bisection for the eigenvalues, inverse iteration for the vectors.

/// Number of eigenvalues strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// Tridiagonal LU with partial pivoting (LAPACK gttrf layout).
struct TriLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TriLu {
    fn factor(d: &[f64], e: &[f64], shift: f64, tiny: f64) -> Self {
        let n = d.len();
        let mut dd: Vec<f64> = d.iter().map(|v| v - shift).collect();
        let mut dl = e.to_vec();
        let mut du = e.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] == 0.0 {
                    dd[i] = tiny;
                }
                let f = dl[i] / dd[i];
                dl[i] = f;
                dd[i + 1] -= f * du[i];
            } else {
                let f = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = tmp - f * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                swap[i] = true;
            }
        }
        for v in dd.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self { dl, d: dd, du, du2, swap }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// The `count` smallest eigenpairs, eigenvalues ascending, unit eigenvectors.
pub fn smallest_eigenpairs(d: &[f64], e: &[f64], count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = d.len();
    assert!(e.len() + 1 == n && count <= n);
    let (glo, ghi) = gershgorin(d, e);
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * scale);
    let mut vals = Vec::with_capacity(count);
    for k in 0..count {
        let (mut lo, mut hi) = (glo - f64::EPSILON * scale, ghi + f64::EPSILON * scale);
        if let Some(&prev) = vals.last() {
            lo = lo.max(prev - 4.0 * f64::EPSILON * scale);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 2.0 * f64::EPSILON * (lo.abs().max(hi.abs())) + pivmin || mid == lo || mid == hi {
                break;
            }
            if sturm_count(d, e, mid, pivmin) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        vals.push(0.5 * (lo + hi));
    }

    let tiny = f64::EPSILON * scale;
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (k, &lam) in vals.iter().enumerate() {
        let lu = TriLu::factor(d, e, lam, tiny);
        // deterministic, non-degenerate start
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7919 + k * 104729) % 97) as f64 / 97.0).collect();
        for _ in 0..4 {
            lu.solve(&mut x);
            // keep clustered vectors orthogonal
            for (j, v) in vecs.iter().enumerate() {
                if (vals[j] - lam).abs() <= 1e-10 * scale {
                    let c: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= c * vi);
                }
            }
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        vecs.push(x);
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_1d() {
        let n = 200;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let (vals, vecs) = smallest_eigenpairs(&d, &e, 5);
        for k in 0..5 {
            let th = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * th.cos();
            assert!((vals[k] - exact).abs() < 1e-13, "{} vs {}", vals[k], exact);
            // residual
            let v = &vecs[k];
            let mut r = 0.0f64;
            for i in 0..n {
                let mut y = d[i] * v[i];
                if i > 0 {
                    y += e[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    y += e[i] * v[i + 1];
                }
                r = r.max((y - vals[k] * v[i]).abs());
            }
            assert!(r < 1e-12);
        }
    }
}
