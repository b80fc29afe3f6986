//! Classical multidimensional scaling.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::lattice::DistanceMatrix;
use crate::linalg::sym_eigen_desc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub dim: usize,
    pub ids: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    /// Leading eigenvalues of the double-centred Gram matrix (up to 4).
    pub eigenvalues: Vec<f64>,
    /// Share of the positive spectrum not captured by the first `dim` axes.
    pub residual_fraction: f64,
}

/// Fraction of positive spectral mass an automatic dimension must capture.
pub const AUTO_DIM_CAPTURE: f64 = 0.95;

/// `dim = None` picks the smallest of 1..=3 capturing 95% of the positive
/// spectrum.
pub fn embed_mds(dm: &DistanceMatrix, dim: Option<usize>) -> Result<Embedding> {
    let n = dm.len();
    if n < 2 {
        return input("embedding needs at least 2 points");
    }
    if dm.values.iter().flatten().any(|v| !v.is_finite()) {
        return input("distance matrix has non-finite entries; increase t_max");
    }
    if let Some(d) = dim {
        if !(1..=3).contains(&d) {
            return input("embedding dimension must be 1, 2 or 3");
        }
    }
    let d2 = DMatrix::from_fn(n, n, |i, j| dm.values[i][j].powi(2));
    let row: Vec<f64> = (0..n).map(|i| d2.row(i).sum() / n as f64).collect();
    let all = row.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row[i] - row[j] + all));
    let (vals, vecs) = sym_eigen_desc(b);
    let pos: f64 = vals.iter().filter(|v| **v > 0.0).sum();
    let captured = |d: usize| vals.iter().take(d).filter(|v| **v > 0.0).sum::<f64>();
    let dim = dim.unwrap_or_else(|| {
        (1..=3).find(|&d| pos <= 0.0 || captured(d) >= AUTO_DIM_CAPTURE * pos).unwrap_or(3)
    });
    let dim = dim.min(n);
    let mut coords = vec![vec![0.0; dim]; n];
    for a in 0..dim {
        let s = vals[a].max(0.0).sqrt();
        let flip = if vecs[(0, a)] < 0.0 { -1.0 } else { 1.0 };
        for (i, c) in coords.iter_mut().enumerate() {
            c[a] = flip * s * vecs[(i, a)];
        }
    }
    let residual_fraction = if pos > 0.0 { 1.0 - captured(dim) / pos } else { 0.0 };
    Ok(Embedding {
        dim,
        ids: dm.ids.clone(),
        coords,
        eigenvalues: vals.iter().take(4).copied().collect(),
        residual_fraction: residual_fraction.max(0.0),
    })
}

impl Embedding {
    /// Largest pairwise distance in the embedded cloud.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.coords {
            for b in &self.coords {
                d = d.max(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
            }
        }
        d
    }

    /// Scatter plot of the first two coordinates.
    pub fn to_svg(&self) -> String {
        let size = 400.0;
        let pad = 20.0;
        let xy: Vec<(f64, f64)> =
            self.coords.iter().map(|c| (c[0], c.get(1).copied().unwrap_or(0.0))).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &xy {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        for (i, &(x, y)) in xy.iter().enumerate() {
            let px = pad + (x - x0) / span * (size - 2.0 * pad);
            let py = size - pad - (y - y0) / span * (size - 2.0 * pad);
            s.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"steelblue\"><title>{}</title></circle>\n",
                self.ids[i]
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_embed_in_one_dimension() {
        let x: [f64; 4] = [0.0, 0.3, 0.5, 1.2];
        let v: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| (a - b).abs()).collect()).collect();
        let dm = DistanceMatrix::from_values((0..4).map(|i| format!("p{i}")).collect(), v);
        let e = embed_mds(&dm, None).unwrap();
        assert_eq!(e.dim, 1);
        assert!(e.residual_fraction < 1e-10);
        assert!(e.eigenvalues[1].abs() < 1e-10);
        assert!(e.coords[0][0] >= 0.0);
        assert!((e.diameter() - 1.2).abs() < 1e-10);
    }

    #[test]
    fn equilateral_triangle() {
        let v = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let dm = DistanceMatrix::from_values(vec!["a".into(), "b".into(), "c".into()], v);
        let e = embed_mds(&dm, Some(2)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let d: f64 = e.coords[i].iter().zip(&e.coords[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    assert!((d - 1.0).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn rejects_infinite_entries() {
        let dm = DistanceMatrix::from_values(vec!["a".into(), "b".into()], vec![vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]]);
        assert!(embed_mds(&dm, None).is_err());
    }
}
