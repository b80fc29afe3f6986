//! The lattice generated by the wave nest under meet, join, complement and
//! wave isotony; atom candidates; the wave distance d*.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::subspace::{approx_eq, complement, join, leq, meet, min_angle, Subspace, ToleranceConfig};
use crate::wave_dynamics::{isotony_trajectory, monotonicity_defect, Isotony, TimeGrid};

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub values: Vec<Subspace>,
    pub seed: Subspace,
    /// Largest angle by which a value sticks out of its successor.
    pub monotonicity_defect: f64,
}

impl Trajectory {
    pub fn dims(&self) -> Vec<usize> {
        self.values.iter().map(|v| v.dim()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub max_elements: usize,
    pub max_depth: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self { max_elements: 512, max_depth: 4 }
    }
}

#[derive(Clone, Debug)]
pub struct FamilyElement {
    pub subspace: Subspace,
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub struct LatticeFamily {
    pub elements: Vec<FamilyElement>,
    pub fixpoint: bool,
    pub capped: bool,
    pub rounds: usize,
}

impl LatticeFamily {
    pub fn subspaces(&self) -> impl Iterator<Item = &Subspace> {
        self.elements.iter().map(|e| &e.subspace)
    }
}

/// Grid-time isotony used by the closure: i^{t_j} for every grid time.
pub struct ClosureIsotony<'a> {
    pub iso: &'a Isotony,
    pub grid: &'a TimeGrid,
}

struct Family {
    items: Vec<FamilyElement>,
    by_dim: BTreeMap<usize, Vec<usize>>,
    tol: ToleranceConfig,
}

impl Family {
    fn contains(&self, s: &Subspace) -> bool {
        self.by_dim.get(&s.dim()).is_some_and(|ix| ix.iter().any(|&i| approx_eq(&self.items[i].subspace, s, &self.tol)))
    }

    fn push(&mut self, s: Subspace, provenance: String) -> bool {
        if self.contains(&s) {
            return false;
        }
        self.by_dim.entry(s.dim()).or_default().push(self.items.len());
        self.items.push(FamilyElement { subspace: s, provenance });
        true
    }
}

pub fn generate_family(
    nest: &[Subspace],
    isotony: Option<ClosureIsotony<'_>>,
    tol: &ToleranceConfig,
    caps: &Caps,
) -> Result<LatticeFamily> {
    let Some(first) = nest.first() else {
        return input("generate_family needs a nonempty nest");
    };
    let n = first.ambient_dim();
    if nest.iter().any(|s| s.ambient_dim() != n) {
        return Err(Error::AmbientMismatch(n, nest.iter().find(|s| s.ambient_dim() != n).unwrap().ambient_dim()));
    }
    let mut fam = Family { items: Vec::new(), by_dim: BTreeMap::new(), tol: *tol };
    fam.push(Subspace::zero(n), "0".into());
    fam.push(Subspace::full(n), "1".into());
    for (j, s) in nest.iter().enumerate() {
        fam.push(s.clone(), format!("N{j}"));
    }
    for (j, s) in nest.iter().enumerate() {
        fam.push(complement(s), format!("~N{j}"));
    }
    let mut fresh_from = 0;
    let mut capped = fam.items.len() >= caps.max_elements;
    let mut fixpoint = false;
    let mut rounds = 0;
    while rounds < caps.max_depth && !capped {
        rounds += 1;
        let fresh: Vec<usize> = (fresh_from..fam.items.len()).collect();
        let total = fam.items.len();
        let items = &fam.items;
        // candidate generators in a fixed order
        let mut jobs: Vec<(u8, usize, usize)> = Vec::new();
        for &a in &fresh {
            for b in 0..total {
                if b < a && b >= fresh_from {
                    continue; // pair already listed with roles swapped
                }
                if a != b {
                    jobs.push((0, a, b));
                    jobs.push((1, a, b));
                }
            }
            jobs.push((2, a, 0));
            if let Some(ci) = &isotony {
                for j in 0..ci.grid.len() {
                    jobs.push((3, a, j));
                }
            }
        }
        let results: Vec<Option<(Subspace, String)>> = jobs
            .par_iter()
            .map(|&(op, a, b)| -> Result<Option<(Subspace, String)>> {
                let sa = &items[a].subspace;
                Ok(Some(match op {
                    0 => (meet(sa, &items[b].subspace, tol)?, format!("({}∧{})", items[a].provenance, items[b].provenance)),
                    1 => (join(sa, &items[b].subspace, tol)?, format!("({}∨{})", items[a].provenance, items[b].provenance)),
                    2 => (complement(sa), format!("~{}", items[a].provenance)),
                    _ => {
                        let ci = isotony.as_ref().unwrap();
                        (isotony_trajectory_point(ci, sa, b)?, format!("i{}({})", b, items[a].provenance))
                    }
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cands: Vec<(usize, usize, Subspace, String)> = results
            .into_iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|(s, p)| (s.dim(), i, s, p)))
            .collect();
        cands.sort_by_key(|c| (c.0, c.1));
        fresh_from = fam.items.len();
        for (_, _, s, p) in cands {
            if fam.items.len() >= caps.max_elements {
                capped = true;
                break;
            }
            fam.push(s, p);
        }
        if fam.items.len() == fresh_from {
            fixpoint = true;
            break;
        }
    }
    Ok(LatticeFamily { elements: fam.items, fixpoint, capped, rounds })
}

fn isotony_trajectory_point(ci: &ClosureIsotony<'_>, s: &Subspace, j: usize) -> Result<Subspace> {
    ci.iso.apply(s, ci.grid.times[j])
}

pub fn trajectory_of(
    p: &Subspace,
    iso: &Isotony,
    grid: &TimeGrid,
    tol: &ToleranceConfig,
    monotone: bool,
) -> Result<Trajectory> {
    let values = isotony_trajectory(iso, p, grid, tol, monotone)?;
    let monotonicity_defect = monotonicity_defect(&values);
    Ok(Trajectory { grid: grid.clone(), values, seed: p.clone(), monotonicity_defect })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomConfig {
    pub min_dim: usize,
    pub d_max: usize,
    /// Join each trajectory value with its predecessor.
    pub monotone_trajectories: bool,
}

impl Default for AtomConfig {
    fn default() -> Self {
        Self { min_dim: 2, d_max: 3, monotone_trajectories: false }
    }
}

#[derive(Clone, Debug)]
pub struct AtomCandidate {
    pub id: String,
    pub provenance: String,
    pub trajectory: Trajectory,
    pub first_nonzero_time: Option<f64>,
}

/// Minimal seeds of the family (dimensions in [min_dim, d_max]) and their
/// isotony trajectories, with trajectory-equal duplicates pruned.
pub fn find_atoms(
    fam: &LatticeFamily,
    iso: &Isotony,
    grid: &TimeGrid,
    tol: &ToleranceConfig,
    cfg: &AtomConfig,
) -> Result<Vec<AtomCandidate>> {
    if cfg.min_dim == 0 || cfg.d_max < cfg.min_dim {
        return input("atoms: need 1 ≤ min_dim ≤ d_max");
    }
    let pool: Vec<&FamilyElement> =
        fam.elements.iter().filter(|e| e.subspace.dim() >= cfg.min_dim && e.subspace.dim() <= cfg.d_max).collect();
    let minimal: Vec<&FamilyElement> = pool
        .par_iter()
        .filter(|p| {
            !pool.iter().any(|q| q.subspace.dim() < p.subspace.dim() && leq(&q.subspace, &p.subspace, tol).unwrap_or(false))
        })
        .copied()
        .collect();
    let trajs: Vec<Trajectory> =
        minimal.par_iter().map(|e| trajectory_of(&e.subspace, iso, grid, tol, cfg.monotone_trajectories)).collect::<Result<Vec<_>>>()?;
    let mut atoms: Vec<AtomCandidate> = Vec::new();
    for (e, tr) in minimal.into_iter().zip(trajs) {
        let dup = atoms.iter().any(|a| {
            a.trajectory.values.iter().zip(&tr.values).all(|(x, y)| approx_eq(x, y, tol))
        });
        if dup {
            continue;
        }
        let first_nonzero_time = tr.values.iter().position(|v| !v.is_zero()).map(|j| grid.times[j]);
        atoms.push(AtomCandidate {
            id: format!("a{}", atoms.len()),
            provenance: e.provenance.clone(),
            trajectory: tr,
            first_nonzero_time,
        });
    }
    Ok(atoms)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    /// Interpolated contact time, None if no contact by t_max.
    pub time: Option<f64>,
    pub grid_index: Option<usize>,
}

/// Contact time of two trajectories on a shared grid.
pub fn contact(a: &[Subspace], b: &[Subspace], grid: &TimeGrid, tol: &ToleranceConfig) -> Result<Contact> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return input("trajectories do not share the grid");
    }
    let mut prev = (0.0, std::f64::consts::FRAC_PI_2);
    for (j, &t) in grid.times.iter().enumerate() {
        let ang = min_angle(&a[j], &b[j]);
        if ang < tol.angle_tol {
            if j == 0 && approx_eq(&a[0], &b[0], tol) {
                return Ok(Contact { time: Some(0.0), grid_index: Some(0) });
            }
            let (tp, ap) = prev;
            let f = if ap > ang { (ap - tol.angle_tol) / (ap - ang) } else { 1.0 };
            return Ok(Contact { time: Some(tp + f.clamp(0.0, 1.0) * (t - tp)), grid_index: Some(j) });
        }
        prev = (t, ang);
    }
    Ok(Contact { time: None, grid_index: None })
}

/// d*(a, b) = 2·contact time; +∞ if the trajectories never meet.
pub fn wave_distance(a: &AtomCandidate, b: &AtomCandidate, tol: &ToleranceConfig) -> Result<f64> {
    if a.trajectory.grid != b.trajectory.grid {
        return input("atoms have different time grids");
    }
    let c = contact(&a.trajectory.values, &b.trajectory.values, &a.trajectory.grid, tol)?;
    Ok(c.time.map_or(f64::INFINITY, |t| 2.0 * t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub incomplete: bool,
    /// max over triples of d_ij − d_ik − d_kj (finite entries only).
    pub triangle_defect: f64,
}

impl DistanceMatrix {
    pub fn from_values(ids: Vec<String>, values: Vec<Vec<f64>>) -> Self {
        let n = values.len();
        let incomplete = values.iter().flatten().any(|v| !v.is_finite());
        let mut defect = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b, c) = (values[i][j], values[i][k], values[k][j]);
                    if a.is_finite() && b.is_finite() && c.is_finite() {
                        defect = defect.max(a - b - c);
                    }
                }
            }
        }
        Self { ids, values, incomplete, triangle_defect: defect.max(0.0) }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("atom");
        for id in &self.ids {
            s.push(',');
            s.push_str(id);
        }
        s.push('\n');
        for (id, row) in self.ids.iter().zip(&self.values) {
            s.push_str(id);
            for v in row {
                s.push(',');
                if v.is_finite() {
                    s.push_str(&format!("{v}"));
                } else {
                    s.push_str("inf");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn max_finite(&self) -> f64 {
        self.values.iter().flatten().filter(|v| v.is_finite()).fold(0.0, |m, v| m.max(*v))
    }
}

pub fn distance_matrix(atoms: &[AtomCandidate], tol: &ToleranceConfig) -> Result<DistanceMatrix> {
    if atoms.len() < 2 {
        return input("distance_matrix needs at least 2 atoms");
    }
    let n = atoms.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let d = pairs.par_iter().map(|&(i, j)| wave_distance(&atoms[i], &atoms[j], tol)).collect::<Result<Vec<_>>>()?;
    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(d) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(DistanceMatrix::from_values(atoms.iter().map(|a| a.id.clone()).collect(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, v: &[f64]) -> Subspace {
        let _ = n;
        Subspace::span_of(v.len(), &[v], &ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn degenerate_family() {
        let tol = ToleranceConfig::default();
        let fam = generate_family(&[Subspace::full(3)], None, &tol, &Caps::default()).unwrap();
        assert_eq!(fam.elements.len(), 2);
        assert!(fam.fixpoint);
    }

    #[test]
    fn closure_is_idempotent() {
        let tol = ToleranceConfig::default();
        let nest = vec![line(3, &[1.0, 0.0, 0.0]), Subspace::span_of(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], &tol).unwrap()];
        let fam = generate_family(&nest, None, &tol, &Caps::default()).unwrap();
        assert!(fam.fixpoint);
        let again: Vec<Subspace> = fam.subspaces().cloned().collect();
        let fam2 = generate_family(&again, None, &tol, &Caps::default()).unwrap();
        assert_eq!(fam2.elements.len(), fam.elements.len());
    }

    #[test]
    fn distance_matrix_csv_and_symmetry() {
        let dm = DistanceMatrix::from_values(vec!["a".into(), "b".into()], vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        assert_eq!(dm.to_csv(), "atom,a,b\na,0,0.5\nb,0.5,0\n");
        assert_eq!(dm.triangle_defect, 0.0);
        assert!(!dm.incomplete);
    }
}
