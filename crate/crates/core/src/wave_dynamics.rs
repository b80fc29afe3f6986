//! Wave dynamics in spectral coordinates, driven only by (λ, κ): the sine
//! propagator, boundary waves and their nest, and the wave isotony.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::spectral_forward::SpectralData;
use crate::subspace::{containment_angle, join, psd_range, Subspace, ToleranceConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 4 {
            return input("time grid needs at least 4 times");
        }
        if times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
            return input("time grid must be positive and strictly increasing");
        }
        Ok(Self { times })
    }

    /// t_j = j·dt for j = 1..=ceil(t_max/dt).
    pub fn uniform(dt: f64, t_max: f64) -> Result<Self> {
        if !(dt > 0.0 && t_max > 0.0) {
            return input("time_grid.dt and time_grid.t_max must be positive");
        }
        let n = (t_max / dt - 1e-9).ceil() as usize;
        Self::new((1..=n).map(|j| j as f64 * dt).collect())
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest spacing between consecutive times (including 0 → t₁).
    pub fn spacing(&self) -> f64 {
        let mut d = self.times[0];
        for w in self.times.windows(2) {
            d = d.max(w[1] - w[0]);
        }
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlProfile {
    /// θ = ½ − ½cos(2π(s−a)/w) on [a, a+w], zero elsewhere.
    Hann { a: f64, w: f64 },
    /// θ = ½ − ½cos(π·clamp((s−a)/w, 0, 1)): rises on [a, a+w], then stays 1.
    RaisedCosine { a: f64, w: f64 },
    /// θ = c·s^p.
    Monomial { p: u32, c: f64 },
}

const PI: f64 = std::f64::consts::PI;

/// ∫_{s0}^{s1} sin(c + d·s) ds.
fn int_sin(c: f64, d: f64, s0: f64, s1: f64) -> f64 {
    if s1 <= s0 {
        return 0.0;
    }
    if (d * (s1 - s0)).abs() < 1e-6 {
        // series about the midpoint
        let m = 0.5 * (s0 + s1);
        let hl = 0.5 * (s1 - s0);
        let x = d * hl;
        let sinc = 1.0 - x * x / 6.0 + x.powi(4) / 120.0;
        return 2.0 * hl * (c + d * m).sin() * sinc;
    }
    ((c + d * s0).cos() - (c + d * s1).cos()) / d
}

/// ∫_{s0}^{s1} sin(ω(t−s))·cos(β(s−a)) ds.
fn int_sin_cos(om: f64, t: f64, beta: f64, a: f64, s0: f64, s1: f64) -> f64 {
    0.5 * (int_sin(om * t - beta * a, beta - om, s0, s1) + int_sin(om * t + beta * a, -(om + beta), s0, s1))
}

/// ∫_{s0}^{s1} sin(ω(t−s))·p(s) ds for a polynomial p (coefficients ascending),
/// by repeated integration by parts.
fn int_sin_poly(om: f64, t: f64, p: &[f64], s0: f64, s1: f64) -> f64 {
    if s1 <= s0 || p.is_empty() {
        return 0.0;
    }
    let eval = |c: &[f64], s: f64| c.iter().rev().fold(0.0, |acc, v| acc * s + v);
    let deriv = |c: &[f64]| -> Vec<f64> { c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect() };
    let mut total = 0.0;
    let mut cur = p.to_vec();
    let mut factor = 1.0;
    while !cur.is_empty() {
        let d1 = deriv(&cur);
        let at = |s: f64| {
            let u = om * (t - s);
            u.cos() * eval(&cur, s) / om + u.sin() * eval(&d1, s) / (om * om)
        };
        total += factor * (at(s1) - at(s0));
        cur = deriv(&d1);
        factor *= -1.0 / (om * om);
    }
    total
}

impl ControlProfile {
    pub fn theta(&self, s: f64) -> f64 {
        match *self {
            ControlProfile::Hann { a, w } => {
                if s <= a || s >= a + w {
                    0.0
                } else {
                    0.5 - 0.5 * (2.0 * PI * (s - a) / w).cos()
                }
            }
            ControlProfile::RaisedCosine { a, w } => {
                let x = ((s - a) / w).clamp(0.0, 1.0);
                0.5 - 0.5 * (PI * x).cos()
            }
            ControlProfile::Monomial { p, c } => c * s.powi(p as i32),
        }
    }

    pub fn theta_dd(&self, s: f64) -> f64 {
        match *self {
            ControlProfile::Hann { a, w } => {
                if s <= a || s >= a + w {
                    0.0
                } else {
                    let b = 2.0 * PI / w;
                    0.5 * b * b * (b * (s - a)).cos()
                }
            }
            ControlProfile::RaisedCosine { a, w } => {
                if s <= a || s >= a + w {
                    0.0
                } else {
                    let b = PI / w;
                    0.5 * b * b * (b * (s - a)).cos()
                }
            }
            ControlProfile::Monomial { p, c } => {
                if p < 2 {
                    0.0
                } else {
                    c * (p * (p - 1)) as f64 * s.powi(p as i32 - 2)
                }
            }
        }
    }

    /// θ(0) = θ'(0) = 0, as boundary controls require.
    pub fn vanishes_at_start(&self) -> bool {
        match *self {
            ControlProfile::Hann { a, .. } | ControlProfile::RaisedCosine { a, .. } => a >= 0.0,
            ControlProfile::Monomial { p, c } => p >= 2 || c == 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ControlProfile::Hann { a, w } | ControlProfile::RaisedCosine { a, w } => {
                if !(a.is_finite() && w.is_finite() && w > 0.0) {
                    return input("control profile needs finite a and positive width");
                }
            }
            ControlProfile::Monomial { c, .. } => {
                if !c.is_finite() {
                    return input("monomial coefficient must be finite");
                }
            }
        }
        Ok(())
    }

    /// ∫₀ᵗ sin(ω(t−s))·θ(s) ds in closed form.
    pub fn sine_integral(&self, om: f64, t: f64) -> f64 {
        match *self {
            ControlProfile::Hann { a, w } => {
                let (s0, s1) = (a.max(0.0), (a + w).min(t));
                let b = 2.0 * PI / w;
                0.5 * int_sin(om * t, -om, s0, s1) - 0.5 * int_sin_cos(om, t, b, a, s0, s1)
            }
            ControlProfile::RaisedCosine { a, w } => {
                let (s0, s1) = (a.max(0.0), (a + w).min(t));
                let b = PI / w;
                let ramp = 0.5 * int_sin(om * t, -om, s0, s1) - 0.5 * int_sin_cos(om, t, b, a, s0, s1);
                let flat = int_sin(om * t, -om, (a + w).max(0.0), t);
                ramp + flat
            }
            ControlProfile::Monomial { p, c } => {
                let mut coeffs = vec![0.0; p as usize + 1];
                coeffs[p as usize] = c;
                int_sin_poly(om, t, &coeffs, 0.0, t)
            }
        }
    }

    /// ∫₀ᵗ sin(ω(t−s))·θ''(s) ds in closed form.
    pub fn sine_integral_dd(&self, om: f64, t: f64) -> f64 {
        match *self {
            ControlProfile::Hann { a, w } => {
                let b = 2.0 * PI / w;
                0.5 * b * b * int_sin_cos(om, t, b, a, a.max(0.0), (a + w).min(t))
            }
            ControlProfile::RaisedCosine { a, w } => {
                let b = PI / w;
                0.5 * b * b * int_sin_cos(om, t, b, a, a.max(0.0), (a + w).min(t))
            }
            ControlProfile::Monomial { p, c } => {
                if p < 2 {
                    return 0.0;
                }
                let mut coeffs = vec![0.0; p as usize - 1];
                coeffs[p as usize - 2] = c * (p * (p - 1)) as f64;
                int_sin_poly(om, t, &coeffs, 0.0, t)
            }
        }
    }
}

/// (1/√λ)∫₀ᵗ sin((t−s)√λ)·θ(s) ds.
pub fn mode_sine_integral(lambda: f64, theta: &ControlProfile, t: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return input("mode_sine_integral needs λ > 0");
    }
    if !(t > 0.0) {
        return input("mode_sine_integral needs t > 0");
    }
    theta.validate()?;
    let om = lambda.sqrt();
    Ok(theta.sine_integral(om, t) / om)
}

/// Per-mode factors of the boundary wave: θ(t) − (1/ω)∫sin(ω(t−s))θ''
/// and ω∫sin(ω(t−s))θ, which must agree.
pub fn boundary_factors(omega: &[f64], theta: &ControlProfile, t: f64) -> (Vec<f64>, Vec<f64>) {
    let th = theta.theta(t);
    let via_dd = omega.iter().map(|&om| th - theta.sine_integral_dd(om, t) / om).collect();
    let via_ibp = omega.iter().map(|&om| om * theta.sine_integral(om, t)).collect();
    (via_dd, via_ibp)
}

const IBP_TOL: f64 = 1e-8;

/// Boundary wave for the control h(s) = θ(s)·η̃, η̃ = Σ_i η_i κ_i.
pub fn boundary_wave(sd: &SpectralData, eta: &[f64], theta: &ControlProfile, t: f64) -> Result<Vec<f64>> {
    if eta.len() != sd.m {
        return Err(Error::Input(format!("eta has {} entries, M={}", eta.len(), sd.m)));
    }
    theta.validate()?;
    if !theta.vanishes_at_start() {
        return Err(Error::Contract("boundary control profile must satisfy θ(0)=θ'(0)=0".into()));
    }
    let om = sd.omega();
    let (a, b) = boundary_factors(&om, theta, t);
    let scale = b.iter().chain(&a).fold(1.0f64, |m, v| m.max(v.abs()));
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if gap > IBP_TOL * scale {
        return Err(Error::Numerical(format!("integration-by-parts cross-check failed: {gap:e}")));
    }
    Ok((0..sd.k).map(|k| a[k] * (0..sd.m).map(|i| eta[i] * sd.kappa[i][k]).sum::<f64>()).collect())
}

/// Domain waves from every column of B under every profile.
pub fn domain_wave(sd: &SpectralData, b: &Subspace, profiles: &[ControlProfile], t: f64) -> Result<Vec<Vec<f64>>> {
    if b.ambient_dim() != sd.k {
        return Err(Error::AmbientMismatch(sd.k, b.ambient_dim()));
    }
    let om = sd.omega();
    let mut out = Vec::with_capacity(b.dim() * profiles.len());
    for p in profiles {
        p.validate()?;
        let f: Vec<f64> = om.iter().map(|&w| p.sine_integral(w, t) / w).collect();
        for col in b.frame().column_iter() {
            out.push((0..sd.k).map(|k| f[k] * col[k]).collect());
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DictionaryConfig {
    /// Windows per harmonic direction at each time.
    pub q: usize,
    /// Window width as a fraction of the current time.
    pub width_frac: f64,
    /// Relative singular-value cut for reachable spans.
    pub wave_cut: f64,
    /// Relative eigenvalue cut for Gramian ranges.
    pub gramian_cut: f64,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        Self { q: 12, width_frac: 0.5, wave_cut: 1e-4, gramian_cut: 1e-6 }
    }
}

impl DictionaryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return input("dictionary.q must be ≥ 1");
        }
        if !(self.width_frac > 0.0 && self.width_frac <= 1.0) {
            return input("dictionary.width_frac must lie in (0,1]");
        }
        for (name, v) in [("wave_cut", self.wave_cut), ("gramian_cut", self.gramian_cut)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Input(format!("dictionary.{name} must lie in (0,1)")));
            }
        }
        Ok(())
    }

    /// Hann windows of width width_frac·t, staggered over [0, t].
    pub fn profiles(&self, t: f64) -> Vec<ControlProfile> {
        let w = self.width_frac * t;
        (0..self.q)
            .map(|j| {
                let a = if self.q == 1 { t - w } else { (t - w) * j as f64 / (self.q - 1) as f64 };
                ControlProfile::Hann { a, w }
            })
            .collect()
    }
}

/// Angular frequencies plus precomputed boundary-wave factors for a grid and
/// dictionary; immutable once built.
#[derive(Clone, Debug)]
pub struct PropagatorTable {
    pub omega: Vec<f64>,
    pub grid: TimeGrid,
    pub dict: DictionaryConfig,
    /// boundary[j][i][k]: profile i of grid time j, mode k (IBP form).
    boundary: Vec<Vec<Vec<f64>>>,
}

impl PropagatorTable {
    pub fn build(sd: &SpectralData, grid: &TimeGrid, dict: &DictionaryConfig) -> Result<Self> {
        dict.validate()?;
        let omega = sd.omega();
        let boundary = grid
            .times
            .par_iter()
            .map(|&t| {
                dict.profiles(t)
                    .iter()
                    .map(|p| {
                        let (a, b) = boundary_factors(&omega, p, t);
                        let scale = b.iter().chain(&a).fold(1.0f64, |m, v| m.max(v.abs()));
                        let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                        if gap > IBP_TOL * scale {
                            return Err(Error::Numerical(format!("integration-by-parts cross-check failed: {gap:e}")));
                        }
                        Ok(b)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { omega, grid: grid.clone(), dict: *dict, boundary })
    }

    pub fn boundary_factors_at(&self, j: usize) -> &[Vec<f64>] {
        &self.boundary[j]
    }
}

/// Gram contribution of the block diag(c)·Q normalized to unit Frobenius
/// norm; invariant under rotations of the frame Q.
fn add_block_gram(gram: &mut DMatrix<f64>, c: &[f64], q: &DMatrix<f64>) {
    let k = q.nrows();
    let block = DMatrix::from_fn(k, q.ncols(), |r, i| c[r] * q[(r, i)]);
    let fro2 = block.norm_squared();
    if fro2 > 0.0 {
        *gram += &block * block.transpose() / fro2;
    }
}

/// Span of boundary waves for the dictionary windows at time t alone.
pub fn reachable_boundary(sd: &SpectralData, t: f64, dict: &DictionaryConfig) -> Result<Subspace> {
    dict.validate()?;
    let q = sd.harmonic_frame()?;
    let om = sd.omega();
    let mut gram = DMatrix::zeros(sd.k, sd.k);
    for p in dict.profiles(t) {
        let (_, c) = boundary_factors(&om, &p, t);
        add_block_gram(&mut gram, &c, q.frame());
    }
    psd_range(gram, dict.wave_cut * dict.wave_cut)
}

#[derive(Clone, Debug)]
pub struct Nest {
    pub grid: TimeGrid,
    pub elements: Vec<Subspace>,
    /// First grid index with dimension ≥ sat_frac·K, if any.
    pub saturation_index: Option<usize>,
}

impl Nest {
    pub fn dims(&self) -> Vec<usize> {
        self.elements.iter().map(|e| e.dim()).collect()
    }

    pub fn saturated(&self) -> bool {
        self.saturation_index.is_some()
    }

    pub fn saturation_time(&self) -> Option<f64> {
        self.saturation_index.map(|j| self.grid.times[j])
    }
}

pub const SATURATION_FRACTION: f64 = 0.95;

/// Nest element at t_j = span of all boundary waves whose windows end by t_j
/// (every earlier dictionary, delayed to finish at t_j).
pub fn build_wave_nest(sd: &SpectralData, table: &PropagatorTable) -> Result<Nest> {
    let q = sd.harmonic_frame()?;
    let grams: Vec<DMatrix<f64>> = (0..table.grid.len())
        .into_par_iter()
        .map(|j| {
            let mut g = DMatrix::zeros(sd.k, sd.k);
            for c in table.boundary_factors_at(j) {
                add_block_gram(&mut g, c, q.frame());
            }
            g
        })
        .collect();
    let mut cumulative = Vec::with_capacity(grams.len());
    let mut acc = DMatrix::zeros(sd.k, sd.k);
    for g in grams {
        acc += g;
        cumulative.push(acc.clone());
    }
    let cut = table.dict.wave_cut * table.dict.wave_cut;
    let elements = cumulative.into_par_iter().map(|g| psd_range(g, cut)).collect::<Result<Vec<_>>>()?;
    let need = (SATURATION_FRACTION * sd.k as f64).ceil() as usize;
    let saturation_index = elements.iter().position(|e| e.dim() >= need);
    Ok(Nest { grid: table.grid.clone(), elements, saturation_index })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsotonyMethod {
    /// Finite dictionary of interior controls.
    Dictionary,
    /// Closed-form controllability Gramian (all L² controls).
    Gramian,
}

/// The wave isotony i^t acting on subspaces of the truncated space.
#[derive(Clone, Debug)]
pub struct Isotony {
    pub omega: Vec<f64>,
    pub dict: DictionaryConfig,
    pub method: IsotonyMethod,
}

impl Isotony {
    pub fn new(sd: &SpectralData, dict: &DictionaryConfig, method: IsotonyMethod) -> Result<Self> {
        dict.validate()?;
        Ok(Self { omega: sd.omega(), dict: *dict, method })
    }

    pub fn k(&self) -> usize {
        self.omega.len()
    }

    pub fn apply(&self, b: &Subspace, t: f64) -> Result<Subspace> {
        let k = self.k();
        if b.ambient_dim() != k {
            return Err(Error::AmbientMismatch(k, b.ambient_dim()));
        }
        if b.is_zero() {
            return Ok(Subspace::zero(k));
        }
        if b.dim() == k {
            return Ok(Subspace::full(k));
        }
        psd_range(self.gram(b, t), self.cut())
    }

    /// Range cut on eigenvalues of the method's Gram matrix.
    pub fn cut(&self) -> f64 {
        match self.method {
            IsotonyMethod::Dictionary => self.dict.wave_cut * self.dict.wave_cut,
            IsotonyMethod::Gramian => self.dict.gramian_cut,
        }
    }

    /// Gram matrix whose range is i^t(B).
    pub fn gram(&self, b: &Subspace, t: f64) -> DMatrix<f64> {
        let k = self.k();
        match self.method {
            IsotonyMethod::Dictionary => {
                let mut gram = DMatrix::zeros(k, k);
                for p in self.dict.profiles(t) {
                    let c: Vec<f64> = self.omega.iter().map(|&w| p.sine_integral(w, t) / w).collect();
                    add_block_gram(&mut gram, &c, b.frame());
                }
                gram
            }
            IsotonyMethod::Gramian => self.gramian(b, t),
        }
    }

    /// W_B(t) = ∫₀ᵗ S(τ) P_B S(τ) dτ with S = diag(sin(ω_k τ)/ω_k).
    pub fn gramian(&self, b: &Subspace, t: f64) -> DMatrix<f64> {
        let k = self.k();
        let p = b.projector();
        let om = &self.omega;
        DMatrix::from_fn(k, k, |i, j| {
            let (wi, wj) = (om[i], om[j]);
            let d = wi - wj;
            let s = wi + wj;
            let diff = if (d * t).abs() < 1e-8 { 0.5 * t * (1.0 - (d * t).powi(2) / 6.0) } else { (d * t).sin() / (2.0 * d) };
            p[(i, j)] / (wi * wj) * (diff - (s * t).sin() / (2.0 * s))
        })
    }
}

/// i^t(B) for a single time.
pub fn isotony_step(iso: &Isotony, b: &Subspace, t: f64) -> Result<Subspace> {
    if !(t > 0.0) {
        return input("isotony_step needs t > 0");
    }
    iso.apply(b, t)
}

/// Trajectory t_j ↦ i^{t_j}(B). With `monotone`, each value is joined with
/// its predecessor so the sequence is nondecreasing in the tolerance order.
pub fn isotony_trajectory(
    iso: &Isotony,
    b: &Subspace,
    grid: &TimeGrid,
    tol: &ToleranceConfig,
    monotone: bool,
) -> Result<Vec<Subspace>> {
    let raw = grid.times.par_iter().map(|&t| iso.apply(b, t)).collect::<Result<Vec<_>>>()?;
    if !monotone {
        return Ok(raw);
    }
    let mut out: Vec<Subspace> = Vec::with_capacity(raw.len());
    for s in raw {
        let v = match out.last() {
            Some(prev) => join(&s, prev, tol)?,
            None => s,
        };
        out.push(v);
    }
    Ok(out)
}

/// Largest angle by which a trajectory value sticks out of its successor.
pub fn monotonicity_defect(values: &[Subspace]) -> f64 {
    values.windows(2).map(|w| containment_angle(&w[0], &w[1])).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_forward::{assemble_kappa, harmonic_basis, solve_string_eigs, StringProblem};

    fn quad(om: f64, t: f64, f: impl Fn(f64) -> f64) -> f64 {
        quad_on(om, t, 0.0, t, f)
    }

    // composite Simpson on [s0, s1]; f must be smooth there
    fn quad_on(om: f64, t: f64, s0: f64, s1: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = 20000;
        let h = (s1 - s0) / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let x = s0 + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            // sample just inside the ends so piecewise profiles use their interior branch
            let xe = x.clamp(s0 + 1e-13, s1 - 1e-13);
            s += w * (om * (t - x)).sin() * f(xe);
        }
        s * h / 3.0
    }

    #[test]
    fn constant_profile_closed_form() {
        let p = ControlProfile::Monomial { p: 0, c: 1.0 };
        let v = mode_sine_integral(PI * PI, &p, 1.0).unwrap();
        assert!((v - 2.0 / (PI * PI)).abs() < 1e-14);
        assert!((v - 0.20264).abs() < 1e-5);
        assert!(mode_sine_integral(-1.0, &p, 1.0).is_err());
    }

    #[test]
    fn linear_profile_closed_form() {
        let p = ControlProfile::Monomial { p: 1, c: 1.0 };
        for &(lam, t) in &[(PI * PI, 1.0), (400.0, 0.37)] {
            let v = mode_sine_integral(lam, &p, t).unwrap();
            let exact = t / lam - (lam.sqrt() * t).sin() / lam.powf(1.5);
            assert!((v - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let profiles = [
            ControlProfile::Hann { a: 0.1, w: 0.3 },
            ControlProfile::Hann { a: 0.2, w: 0.6 },
            ControlProfile::RaisedCosine { a: 0.05, w: 0.2 },
            ControlProfile::Monomial { p: 3, c: 0.5 },
        ];
        for p in &profiles {
            for &om in &[PI, 2.0 * PI / 0.3, 37.0] {
                let t = 0.55;
                let q = quad(om, t, |s| p.theta(s));
                assert!((p.sine_integral(om, t) - q).abs() < 1e-10, "{p:?} om={om} {} {}", p.sine_integral(om, t), q);
                let (s0, s1) = match *p {
                    ControlProfile::Hann { a, w } | ControlProfile::RaisedCosine { a, w } => (a, (a + w).min(t)),
                    ControlProfile::Monomial { .. } => (0.0, t),
                };
                let qd = quad_on(om, t, s0, s1, |s| p.theta_dd(s));
                assert!((p.sine_integral_dd(om, t) - qd).abs() < 1e-8 * qd.abs().max(1.0), "{p:?} om={om} {} {qd}", p.sine_integral_dd(om, t));
            }
        }
    }

    #[test]
    fn boundary_wave_quadratic_profile() {
        let es = solve_string_eigs(&StringProblem::constant(1.0, 400).unwrap(), 8).unwrap();
        let sd = assemble_kappa(&es, &harmonic_basis(&es.geometry, 1).unwrap()).unwrap();
        let p = ControlProfile::Monomial { p: 2, c: 0.5 };
        let t = 0.3;
        let u = boundary_wave(&sd, &[1.0], &p, t).unwrap();
        for k in 0..8 {
            let w = sd.lambda[k].sqrt();
            let exact = (t * t / 2.0 - (1.0 - (w * t).cos()) / (w * w)) * sd.kappa[0][k];
            assert!((u[k] - exact).abs() < 1e-12);
        }
        assert!(boundary_wave(&sd, &[0.0], &p, t).unwrap().iter().all(|v| *v == 0.0));
        let bad = ControlProfile::Monomial { p: 1, c: 1.0 };
        assert!(matches!(boundary_wave(&sd, &[1.0], &bad, t), Err(Error::Contract(_))));
    }

    #[test]
    fn ibp_forms_agree_for_hann() {
        let om: Vec<f64> = (1..=80).map(|k| k as f64 * PI).collect();
        for j in 1..=30 {
            let t = 0.02 * j as f64;
            for p in DictionaryConfig::default().profiles(t) {
                let (a, b) = boundary_factors(&om, &p, t);
                for k in 0..om.len() {
                    assert!((a[k] - b[k]).abs() < 1e-9, "t={t} k={k}");
                }
            }
        }
    }

    #[test]
    fn domain_wave_single_mode() {
        let sd = SpectralData {
            lambda: vec![4.0, 9.0, 16.0],
            kappa: vec![vec![1.0, 1.0, 1.0]],
            k: 3,
            m: 1,
            meta: Default::default(),
        };
        let b = Subspace::span_of(3, &[&[0.0, 1.0, 0.0]], &ToleranceConfig::default()).unwrap();
        let p = ControlProfile::Monomial { p: 0, c: 1.0 };
        let v = domain_wave(&sd, &b, &[p], 0.7).unwrap();
        assert!((v[0][1] - (1.0 - (3.0f64 * 0.7).cos()) / 9.0).abs() < 1e-14);
        assert!(v[0][0].abs() < 1e-15 && v[0][2].abs() < 1e-15, "{v:?}");
        assert!(domain_wave(&sd, &Subspace::zero(3), &[p], 0.7).unwrap().is_empty());
    }
}
