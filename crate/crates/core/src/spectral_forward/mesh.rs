//! Polygon domains and their Delaunay triangulation (Bowyer–Watson on a
//! boundary-refined point set).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonDomain {
    /// Counterclockwise vertices of a simple polygon.
    pub vertices: Vec<Point>,
    pub mesh_h: f64,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    let (cx, cy) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    (cx * cx + cy * cy).sqrt()
}

impl PolygonDomain {
    pub fn rectangle(w: f64, h: f64, mesh_h: f64) -> Self {
        Self { vertices: vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]], mesh_h }
    }

    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        (0..v.len())
            .map(|i| {
                let j = (i + 1) % v.len();
                v[i][0] * v[j][1] - v[j][0] * v[i][1]
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        if v.len() < 3 || v.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Mesh("polygon needs at least 3 finite vertices".into()));
        }
        if !(self.mesh_h.is_finite() && self.mesh_h > 0.0) {
            return Err(Error::Mesh("mesh_h must be positive".into()));
        }
        if self.signed_area() <= 0.0 {
            return Err(Error::Mesh("polygon must be counterclockwise with positive area".into()));
        }
        let n = v.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                    return Err(Error::Mesh("polygon edges intersect".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            if (v[i][1] > p[1]) != (v[j][1] > p[1]) {
                let x = v[j][0] + (p[1] - v[j][1]) * (v[i][0] - v[j][0]) / (v[i][1] - v[j][1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        let v = &self.vertices;
        (0..v.len()).map(|i| seg_dist(p, v[i], v[(i + 1) % v.len()])).fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for a in v {
            for b in v {
                d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        d
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub points: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub is_boundary: Vec<bool>,
    /// Boundary nodes in counterclockwise order, with their arclength.
    pub boundary_loop: Vec<usize>,
    pub boundary_arclength: Vec<f64>,
    pub perimeter: f64,
    pub domain: PolygonDomain,
}

struct Tri {
    v: [usize; 3],
    cx: f64,
    cy: f64,
    r2: f64,
}

fn make_tri(pts: &[Point], a: usize, b: usize, c: usize) -> Tri {
    let (ax, ay) = (pts[a][0], pts[a][1]);
    let (bx, by) = (pts[b][0], pts[b][1]);
    let (cx, cy) = (pts[c][0], pts[c][1]);
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    Tri { v: [a, b, c], cx: ux, cy: uy, r2: (ax - ux).powi(2) + (ay - uy).powi(2) }
}

/// Delaunay triangulation of a point set (indices into `pts`).
pub fn delaunay(pts: &[Point]) -> Vec<[usize; 3]> {
    let n = pts.len();
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in pts {
        xmin = xmin.min(p[0]);
        ymin = ymin.min(p[1]);
        xmax = xmax.max(p[0]);
        ymax = ymax.max(p[1]);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let (mx, my) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
    let mut all = pts.to_vec();
    all.push([mx - 20.0 * span, my - 20.0 * span]);
    all.push([mx + 20.0 * span, my - 20.0 * span]);
    all.push([mx, my + 20.0 * span]);
    let mut tris = vec![make_tri(&all, n, n + 1, n + 2)];
    for p in 0..n {
        let (px, py) = (all[p][0], all[p][1]);
        let mut bad = Vec::new();
        let mut keep = Vec::with_capacity(tris.len() + 2);
        for t in tris.drain(..) {
            let d2 = (px - t.cx).powi(2) + (py - t.cy).powi(2);
            if d2 < t.r2 * (1.0 - 1e-12) {
                bad.push(t);
            } else {
                keep.push(t);
            }
        }
        // cavity boundary: edges of bad triangles that appear once
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for t in &bad {
            for k in 0..3 {
                edges.push((t.v[k], t.v[(k + 1) % 3]));
            }
        }
        let mut boundary = Vec::new();
        for &(a, b) in &edges {
            let shared = edges.iter().any(|&(c, d)| c == b && d == a);
            if !shared {
                boundary.push((a, b));
            }
        }
        for (a, b) in boundary {
            keep.push(make_tri(&all, a, b, p));
        }
        tris = keep;
    }
    tris.into_iter().filter(|t| t.v.iter().all(|&v| v < n)).map(|t| t.v).collect()
}

pub fn build_mesh(domain: &PolygonDomain) -> Result<Mesh> {
    domain.validate()?;
    let h = domain.mesh_h;
    let v = &domain.vertices;
    let mut points = Vec::new();
    let mut boundary_arclength = Vec::new();
    let mut s0 = 0.0;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let nseg = (len / h).ceil().max(1.0) as usize;
        for k in 0..nseg {
            let t = k as f64 / nseg as f64;
            points.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            boundary_arclength.push(s0 + t * len);
        }
        s0 += len;
    }
    let nb = points.len();
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in v {
        xmin = xmin.min(p[0]);
        ymin = ymin.min(p[1]);
        xmax = xmax.max(p[0]);
        ymax = ymax.max(p[1]);
    }
    // equilateral lattice avoids co-circular ties in the interior
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((ymax - ymin) / dy).ceil() as usize + 1;
    let cols = ((xmax - xmin) / h).ceil() as usize + 2;
    for j in 0..rows {
        let y = ymin + (j as f64 + 0.5) * dy;
        let off = if j % 2 == 1 { 0.5 * h } else { 0.0 };
        for i in 0..cols {
            let p = [xmin + off + (i as f64 + 0.25) * h, y];
            if domain.contains(p) && domain.boundary_distance(p) > 0.55 * h {
                points.push(p);
            }
        }
    }
    let raw = delaunay(&points);
    let min_area = 1e-10 * h * h;
    let mut triangles = Vec::with_capacity(raw.len());
    for t in raw {
        let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
        let area = 0.5 * cross(a, b, c);
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
        if area.abs() > min_area && domain.contains(centroid) {
            triangles.push(if area > 0.0 { t } else { [t[0], t[2], t[1]] });
        }
    }
    let mut used = vec![false; points.len()];
    for t in &triangles {
        for &i in t {
            used[i] = true;
        }
    }
    if used.iter().any(|u| !u) {
        return Err(Error::Mesh("triangulation left points unused".into()));
    }
    let is_boundary = (0..points.len()).map(|i| i < nb).collect();
    Ok(Mesh {
        points,
        triangles,
        is_boundary,
        boundary_loop: (0..nb).collect(),
        boundary_arclength,
        perimeter: s0,
        domain: domain.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_mesh_covers_area() {
        let m = build_mesh(&PolygonDomain::rectangle(1.0, 1.0, 0.1)).unwrap();
        let area: f64 = m
            .triangles
            .iter()
            .map(|t| 0.5 * cross(m.points[t[0]], m.points[t[1]], m.points[t[2]]))
            .sum();
        assert!((area - 1.0).abs() < 1e-12, "area {area}");
        assert!(m.triangles.iter().all(|t| cross(m.points[t[0]], m.points[t[1]], m.points[t[2]]) > 0.0));
    }

    #[test]
    fn rejects_bad_polygons() {
        let cw = PolygonDomain { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], mesh_h: 0.1 };
        assert!(cw.validate().is_err());
        let bow = PolygonDomain { vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]], mesh_h: 0.1 };
        assert!(bow.validate().is_err());
    }
}
