//! Coefficient paths B(t), fundamental solutions of γ̇ = JBγ and related path utilities.

use crate::error::{Error, Result};
use crate::symplectic::{j_matrix, n_matrix, relative_defect, CMat, Mat};
use nalgebra::{Complex, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Steps per unit of time used when no explicit step count is given.
pub const DEFAULT_STEPS_PER_UNIT: f64 = 2048.0;

/// Continuous symmetric path, piecewise linear between grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPath {
    n: usize,
    grid: Vec<f64>,
    values: Vec<Mat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtendMode {
    /// N-reflection to [0, 2σ]
    Half,
    /// reflection followed by 2σ-periodic continuation to [0, 4σ]
    Full,
}

impl CoefficientPath {
    pub fn new(grid: Vec<f64>, values: Vec<Mat>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Dimension("coefficient path needs matching grid and values, at least two".into()));
        }
        if grid[0] != 0.0 {
            return Err(Error::Validation("coefficient grid must start at 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("coefficient grid must be strictly increasing".into()));
        }
        let d = values[0].nrows();
        if d == 0 || d % 2 != 0 {
            return Err(Error::Dimension(format!("coefficient order {d} is not positive and even")));
        }
        for v in &values {
            if v.nrows() != d || v.ncols() != d {
                return Err(Error::Dimension("coefficient samples differ in size".into()));
            }
            if (v - v.transpose()).amax() > 1e-12 * v.amax().max(1.0) {
                return Err(Error::Validation("coefficient sample is not symmetric".into()));
            }
        }
        Ok(CoefficientPath { n: d / 2, grid, values })
    }

    pub fn constant(b: Mat, tau: f64) -> Result<Self> {
        Self::new(vec![0.0, tau], vec![b.clone(), b])
    }

    /// Samples `f` on a uniform grid with `segments` pieces.
    pub fn from_fn(tau: f64, segments: usize, f: impl Fn(f64) -> Mat) -> Result<Self> {
        let grid: Vec<f64> = (0..=segments).map(|k| tau * k as f64 / segments as f64).collect();
        let values = grid.iter().map(|&t| {
            let b = f(t);
            (&b + b.transpose()) * 0.5
        });
        Self::new(grid.clone(), values.collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Mat] {
        &self.values
    }

    pub fn segment_of(&self, t: f64) -> usize {
        let k = self.grid.partition_point(|&g| g <= t);
        k.clamp(1, self.grid.len() - 1) - 1
    }

    pub fn eval(&self, t: f64) -> Mat {
        let k = self.segment_of(t);
        let (t0, t1) = (self.grid[k], self.grid[k + 1]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        &self.values[k] * (1.0 - s) + &self.values[k + 1] * s
    }

    /// Off-diagonal blocks vanish at both ends.
    pub fn satisfies_b1(&self, tol: f64) -> bool {
        let n = self.n;
        [&self.values[0], self.values.last().unwrap()]
            .iter()
            .all(|b| b.view((0, n), (n, n)).amax() <= tol && b.view((n, 0), (n, n)).amax() <= tol)
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over the grid (linear interpolation preserves the bound).
    pub fn min_eigenvalue(&self) -> f64 {
        self.values
            .iter()
            .map(|b| SymmetricEigen::new(b.clone()).eigenvalues.min())
            .fold(f64::INFINITY, f64::min)
    }

    /// Exact integral of the piecewise-linear path.
    pub fn integral(&self) -> Mat {
        let d = 2 * self.n;
        let mut acc = Mat::zeros(d, d);
        for k in 0..self.grid.len() - 1 {
            acc += (&self.values[k] + &self.values[k + 1]) * (0.5 * (self.grid[k + 1] - self.grid[k]));
        }
        acc
    }

    pub fn map(&self, f: impl Fn(&Mat) -> Mat) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(f).collect())
    }

    /// Pointwise combination on the union of both grids (same duration required).
    pub fn zip_with(&self, other: &CoefficientPath, f: impl Fn(&Mat, &Mat) -> Mat) -> Result<Self> {
        if (self.tau() - other.tau()).abs() > 1e-12 || self.n != other.n {
            return Err(Error::Dimension("coefficient paths differ in duration or size".into()));
        }
        let mut grid: Vec<f64> = self.grid.iter().chain(other.grid.iter()).copied().collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let values = grid.iter().map(|&t| f(&self.eval(t), &other.eval(t))).collect();
        Self::new(grid, values)
    }

    fn append(grid: &mut Vec<f64>, values: &mut Vec<Mat>, offset: f64, src_grid: &[f64], src: &[Mat]) {
        for (t, v) in src_grid.iter().zip(src) {
            let t = t + offset;
            if let Some(&last) = grid.last() {
                if t <= last + 1e-14 {
                    continue;
                }
            }
            grid.push(t);
            values.push(v.clone());
        }
    }

    /// B(σ+t) = N B(σ−t) N, optionally continued 2σ-periodically.
    pub fn reversible_extend(&self, mode: ExtendMode) -> Result<Self> {
        if !self.satisfies_b1(1e-10) {
            return Err(Error::Validation("condition (B1) fails: off-diagonal blocks do not vanish at the ends".into()));
        }
        let sigma = self.tau();
        let nm = n_matrix(self.n);
        let refl_grid: Vec<f64> = self.grid.iter().rev().map(|t| sigma - t).collect();
        let refl: Vec<Mat> = self.values.iter().rev().map(|b| &nm * b * &nm).collect();
        let (mut grid, mut values) = (self.grid.clone(), self.values.clone());
        Self::append(&mut grid, &mut values, sigma, &refl_grid, &refl);
        if mode == ExtendMode::Full {
            let (g2, v2) = (grid.clone(), values.clone());
            Self::append(&mut grid, &mut values, 2.0 * sigma, &g2, &v2);
        }
        Self::new(grid, values)
    }

    /// Concatenates `copies` translates.
    pub fn periodic_extend(&self, copies: usize) -> Result<Self> {
        let (mut grid, mut values) = (self.grid.clone(), self.values.clone());
        for c in 1..copies {
            Self::append(&mut grid, &mut values, c as f64 * self.tau(), &self.grid, &self.values);
        }
        Self::new(grid, values)
    }

    /// Reversed path B(τ − t).
    pub fn reversed(&self) -> Result<Self> {
        let tau = self.tau();
        Self::new(self.grid.iter().rev().map(|t| tau - t).collect(), self.values.iter().rev().cloned().collect())
    }

    /// Path on [a, b] shifted to start at 0.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let mut grid = vec![0.0];
        let mut values = vec![self.eval(a)];
        for (t, v) in self.grid.iter().zip(&self.values) {
            if *t > a + 1e-14 && *t < b - 1e-14 {
                grid.push(t - a);
                values.push(v.clone());
            }
        }
        grid.push(b - a);
        values.push(self.eval(b));
        Self::new(grid, values)
    }
}

/// γ: [0, τ] → Sp(2n) with γ(0) = I, stored as samples.
#[derive(Clone, Debug)]
pub struct SymplecticPath {
    n: usize,
    grid: Vec<f64>,
    samples: Vec<Mat>,
    source: Option<CoefficientPath>,
    pub(crate) phase: OnceLock<Vec<f64>>,
}

impl SymplecticPath {
    pub fn from_samples(grid: Vec<f64>, mut samples: Vec<Mat>, source: Option<CoefficientPath>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != samples.len() {
            return Err(Error::Dimension("path needs matching grid and samples, at least two".into()));
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("path grid must start at 0 and increase strictly".into()));
        }
        let d = samples[0].nrows();
        let id = Mat::identity(d, d);
        if (&samples[0] - &id).amax() > 1e-10 {
            return Err(Error::Validation("path must start at the identity".into()));
        }
        samples[0] = id;
        for (t, s) in grid.iter().zip(&samples) {
            if s.nrows() != d || s.ncols() != d {
                return Err(Error::Dimension("path samples differ in size".into()));
            }
            let drift = relative_defect(s)?;
            if drift > 1e-7 {
                return Err(Error::Validation(format!("sample at t = {t} is not symplectic (drift {drift:.2e})")));
            }
        }
        Ok(SymplecticPath { n: d / 2, grid, samples, source, phase: OnceLock::new() })
    }

    /// Samples an explicit path on a uniform grid.
    pub fn from_fn(tau: f64, steps: usize, f: impl Fn(f64) -> Mat) -> Result<Self> {
        let grid: Vec<f64> = (0..=steps).map(|k| tau * k as f64 / steps as f64).collect();
        let samples = grid.iter().map(|&t| f(t)).collect();
        Self::from_samples(grid, samples, None)
    }

    /// e^{tJ} on [0, τ] in dimension 2n.
    pub fn rotation(n: usize, tau: f64) -> Self {
        let steps = ((tau.abs() * 256.0).ceil() as usize).max(64);
        Self::from_fn(tau, steps, |t| crate::symplectic::rotation(n, t)).expect("rotation path is valid")
    }

    /// The constant identity path.
    pub fn identity(n: usize, tau: f64) -> Self {
        Self::from_fn(tau, 64, |_| Mat::identity(2 * n, 2 * n)).expect("identity path is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn samples(&self) -> &[Mat] {
        &self.samples
    }

    pub fn source(&self) -> Option<&CoefficientPath> {
        self.source.as_ref()
    }

    pub fn end(&self) -> &Mat {
        self.samples.last().unwrap()
    }

    fn index_before(&self, t: f64) -> usize {
        let k = self.grid.partition_point(|&g| g <= t);
        k.clamp(1, self.grid.len()) - 1
    }

    /// γ(t): re-integration from the nearest earlier sample when the generator is
    /// known, cubic Hermite interpolation otherwise.
    pub fn eval(&self, t: f64) -> Mat {
        let t = t.clamp(0.0, self.tau());
        let k = self.index_before(t);
        if (t - self.grid[k]).abs() < 1e-15 {
            return self.samples[k].clone();
        }
        if let Some(b) = &self.source {
            let t0 = self.grid[k];
            let sub = (((t - t0) * 4.0 * DEFAULT_STEPS_PER_UNIT).ceil() as usize).max(4);
            return integrate_span(b, &self.samples[k], t0, t, sub);
        }
        let k = k.min(self.grid.len() - 2);
        let (t0, t1) = (self.grid[k], self.grid[k + 1]);
        let h = t1 - t0;
        let deriv = |i: usize| -> Mat {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(self.grid.len() - 1);
            (&self.samples[hi] - &self.samples[lo]) / (self.grid[hi] - self.grid[lo])
        };
        let s = (t - t0) / h;
        let (h00, h10, h01, h11) = (
            2.0 * s * s * s - 3.0 * s * s + 1.0,
            s * s * s - 2.0 * s * s + s,
            -2.0 * s * s * s + 3.0 * s * s,
            s * s * s - s * s,
        );
        &self.samples[k] * h00 + deriv(k) * (h10 * h) + &self.samples[k + 1] * h01 + deriv(k + 1) * (h11 * h)
    }

    /// Doubles the grid density on [t* − r, t* + r].
    pub fn refine_near(&self, t_star: f64, radius: f64) -> Self {
        if radius <= 0.0 {
            return self.clone();
        }
        let (lo, hi) = (t_star - radius, t_star + radius);
        let mut grid = Vec::with_capacity(self.grid.len() * 2);
        let mut samples = Vec::with_capacity(self.grid.len() * 2);
        for k in 0..self.grid.len() {
            grid.push(self.grid[k]);
            samples.push(self.samples[k].clone());
            if k + 1 < self.grid.len() {
                let mid = 0.5 * (self.grid[k] + self.grid[k + 1]);
                if self.grid[k + 1] >= lo && self.grid[k] <= hi {
                    grid.push(mid);
                    samples.push(self.eval(mid));
                }
            }
        }
        SymplecticPath { n: self.n, grid, samples, source: self.source.clone(), phase: OnceLock::new() }
    }

    /// The same path on the sub-grid of samples with index in [i0, i1], shifted
    /// to start at 0 and multiplied by γ(t_{i0})⁻¹ on the right so it starts at I.
    pub fn segment(&self, i0: usize, i1: usize) -> Result<Self> {
        let inv0 = {
            let j = j_matrix(self.n);
            -(&j * self.samples[i0].transpose() * &j)
        };
        let t0 = self.grid[i0];
        let grid = self.grid[i0..=i1].iter().map(|t| t - t0).collect();
        let samples = self.samples[i0..=i1].iter().map(|s| s * &inv0).collect();
        let source = match &self.source {
            Some(b) => Some(b.restrict(t0, self.grid[i1])?),
            None => None,
        };
        Self::from_samples(grid, samples, source)
    }

    pub fn to_csv(&self) -> String {
        let d = 2 * self.n;
        let mut out = String::from("t");
        for i in 0..d {
            for j in 0..d {
                out.push_str(&format!(",m{}{}", i, j));
            }
        }
        out.push('\n');
        for (t, s) in self.grid.iter().zip(&self.samples) {
            out.push_str(&format!("{t}"));
            for i in 0..d {
                for j in 0..d {
                    out.push_str(&format!(",{}", s[(i, j)]));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn rk4_step(jb: impl Fn(f64) -> Mat, m: &Mat, t: f64, h: f64) -> Mat {
    let a0 = jb(t);
    let a1 = jb(t + 0.5 * h);
    let a2 = jb(t + h);
    let k1 = &a0 * m;
    let k2 = &a1 * (m + &k1 * (0.5 * h));
    let k3 = &a1 * (m + &k2 * (0.5 * h));
    let k4 = &a2 * (m + &k3 * h);
    m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// M ← M(I + ½JE), E = MᵀJM − J; first-order restoration of MᵀJM = J. Skipped
/// once E is at rounding level for large M, where the linearization no longer holds.
fn symplectic_correct(m: &mut Mat, j: &Mat) {
    for _ in 0..2 {
        let e = m.transpose() * j * &*m - j;
        if e.amax() < 1e-15 || e.amax() > 1e-6 {
            break;
        }
        let d = m.nrows();
        *m = &*m * (Mat::identity(d, d) + j * e * 0.5);
    }
}

/// Integrates from `start` at t0 to t1 with `sub` equal steps (respecting the
/// generator's breakpoints).
fn integrate_span(b: &CoefficientPath, start: &Mat, t0: f64, t1: f64, sub: usize) -> Mat {
    let j = j_matrix(b.n());
    let mut m = start.clone();
    let h = (t1 - t0) / sub as f64;
    for s in 0..sub {
        let t = t0 + s as f64 * h;
        m = rk4_step(|x| &j * b.eval(x), &m, t, h);
        symplectic_correct(&mut m, &j);
    }
    m
}

/// Classical RK4 for γ̇ = JB(t)γ, γ(0) = I, with about `steps` steps distributed
/// over the pieces of B.
pub fn fundamental_solution(b: &CoefficientPath, steps: usize) -> Result<SymplecticPath> {
    if steps < 64 {
        return Err(Error::Validation(format!("at least 64 steps are required, got {steps}")));
    }
    let n = b.n();
    let j = j_matrix(n);
    let tau = b.tau();
    let mut grid = vec![0.0];
    let mut samples = vec![Mat::identity(2 * n, 2 * n)];
    let mut m = Mat::identity(2 * n, 2 * n);
    for k in 0..b.grid().len() - 1 {
        let (t0, t1) = (b.grid()[k], b.grid()[k + 1]);
        let a0 = &j * &b.values()[k];
        let a1 = &j * &b.values()[k + 1];
        let jb = |t: f64| {
            let s = (t - t0) / (t1 - t0);
            &a0 * (1.0 - s) + &a1 * s
        };
        let pieces = ((steps as f64 * (t1 - t0) / tau).round() as usize).max(1);
        let h = (t1 - t0) / pieces as f64;
        for p in 0..pieces {
            let t = t0 + p as f64 * h;
            m = rk4_step(jb, &m, t, h);
            symplectic_correct(&mut m, &j);
            let drift = relative_defect(&m)?;
            if drift > 1e-6 {
                return Err(Error::Integration(format!(
                    "symplectic drift {drift:.2e} at t = {t:.4}; increase the step count"
                )));
            }
            grid.push(if p + 1 == pieces { t1 } else { t + h });
            samples.push(m.clone());
        }
    }
    Ok(SymplecticPath { n, grid, samples, source: Some(b.clone()), phase: OnceLock::new() })
}

/// Fundamental solution with the default density, doubled until the endpoint
/// changes by less than 1e-9 (relative).
pub fn fundamental_solution_auto(b: &CoefficientPath) -> Result<SymplecticPath> {
    let mut steps = ((DEFAULT_STEPS_PER_UNIT * b.tau()).ceil() as usize).max(64);
    let mut path = fundamental_solution(b, steps)?;
    for _ in 0..6 {
        steps *= 2;
        let finer = fundamental_solution(b, steps)?;
        let change = (finer.end() - path.end()).norm() / finer.end().norm().max(1.0);
        path = finer;
        if change < 1e-9 {
            return Ok(path);
        }
    }
    Err(Error::Integration("endpoint did not stabilize under step doubling".into()))
}

/// Real 2n×2n form [[X, −Y], [Y, X]] of a complex n×n matrix X + iY.
pub fn realify(u: &CMat) -> Mat {
    let n = u.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            let z = u[(i, k)];
            m[(i, k)] = z.re;
            m[(i, n + k)] = -z.im;
            m[(n + i, k)] = z.im;
            m[(n + i, n + k)] = z.re;
        }
    }
    m
}

/// A path from I to M: γ(t) = P^{t/τ} O^{t/τ} for the polar decomposition M = PO.
pub fn path_to(m: &Mat, tau: f64, steps: usize) -> Result<SymplecticPath> {
    let n = crate::symplectic::half_dim(m)?;
    let p2 = SymmetricEigen::new(m * m.transpose());
    let p_inv_half = &p2.eigenvectors
        * Mat::from_diagonal(&p2.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * p2.eigenvectors.transpose();
    let o = &p_inv_half * m;
    let u = CMat::from_fn(n, n, |i, k| Complex::new(o[(i, k)], o[(n + i, k)]));
    let schur = u.clone().schur();
    let (q, t) = schur.unpack();
    let angles: Vec<f64> = (0..n).map(|i| t[(i, i)].arg()).collect();
    let logs = p2.eigenvalues.map(|l| 0.5 * l.ln());
    let v = p2.eigenvectors.clone();
    SymplecticPath::from_fn(tau, steps, |time| {
        let s = time / tau;
        let ps = &v * Mat::from_diagonal(&logs.map(|x| (s * x).exp())) * v.transpose();
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            angles.iter().map(|a| Complex::from_polar(1.0, s * a)),
        ));
        let us = &q * d * q.adjoint();
        ps * realify(&us)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{r2, rotation};
    use std::f64::consts::PI;

    fn expm(a: &Mat) -> Mat {
        // scaling and squaring with a long Taylor series
        let norm = a.norm();
        let k = (norm.log2().ceil().max(0.0) as i32) + 4;
        let scaled = a / 2f64.powi(k);
        let d = a.nrows();
        let mut term = Mat::identity(d, d);
        let mut sum = Mat::identity(d, d);
        for i in 1..30 {
            term = &term * &scaled / i as f64;
            sum += &term;
        }
        for _ in 0..k {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn identity_generator_gives_rotation() {
        let b = CoefficientPath::constant(Mat::identity(2, 2), 2.0 * PI).unwrap();
        let g = fundamental_solution(&b, 2048).unwrap();
        let err = g.grid().iter().zip(g.samples()).map(|(t, s)| (s - r2(*t)).amax()).fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn zero_generator_gives_identity() {
        let b = CoefficientPath::constant(Mat::zeros(4, 4), 1.0).unwrap();
        let g = fundamental_solution(&b, 64).unwrap();
        assert!(g.samples().iter().all(|s| s == &Mat::identity(4, 4)));
    }

    #[test]
    fn shear_matches_exponential() {
        let bm = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = CoefficientPath::constant(bm.clone(), 1.0).unwrap();
        let g = fundamental_solution(&b, 256).unwrap();
        let e = expm(&(j_matrix(1) * bm));
        assert!((g.end() - e).amax() < 1e-12);
    }

    #[test]
    fn too_few_steps_rejected() {
        let b = CoefficientPath::constant(Mat::identity(2, 2), 1.0).unwrap();
        assert!(fundamental_solution(&b, 10).is_err());
    }

    #[test]
    fn reversible_extension() {
        let b = CoefficientPath::constant(Mat::identity(2, 2), 1.0).unwrap();
        let e = b.reversible_extend(ExtendMode::Half).unwrap();
        assert_eq!(e.tau(), 2.0);
        assert_eq!(e.eval(1.7), Mat::identity(2, 2));
        let b = CoefficientPath::from_fn(1.0, 4, |t| Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![t, 1.0 - t]))).unwrap();
        let e = b.reversible_extend(ExtendMode::Half).unwrap();
        assert!((e.eval(1.5) - Mat::from_diagonal_element(2, 2, 0.5)).amax() < 1e-15);
        for t in [0.0, 0.25, 0.6, 1.0] {
            assert_eq!(e.eval(t), b.eval(t));
        }
        let full = b.reversible_extend(ExtendMode::Full).unwrap();
        assert_eq!(full.tau(), 4.0);
        assert!((full.eval(2.3) - b.eval(0.3)).amax() < 1e-14);
        let bad = CoefficientPath::constant(Mat::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]), 1.0).unwrap();
        assert!(bad.reversible_extend(ExtendMode::Half).is_err());
    }

    #[test]
    fn refine_locates_crossing() {
        let g = SymplecticPath::rotation(1, 2.0 * PI);
        // bisection on the upper-right entry −sin t of R(t)
        let (mut a, mut b) = (3.0, 3.3);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            let fm = g.refine_near(mid, 1e-3).eval(mid)[(0, 1)];
            if fm.signum() == g.eval(a)[(0, 1)].signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        assert!((a - PI).abs() < 1e-10, "{a}");
        assert_eq!(g.refine_near(1.0, 0.0).grid(), g.grid());
        let r = g.refine_near(2.0 * PI, 0.1);
        assert!(r.grid().len() > g.grid().len());
        assert_eq!(r.end(), g.end());
    }

    #[test]
    fn source_eval_matches_rotation() {
        let b = CoefficientPath::constant(Mat::identity(4, 4), 3.0).unwrap();
        let g = fundamental_solution(&b, 512).unwrap();
        assert!((g.eval(1.2345) - rotation(2, 1.2345)).amax() < 1e-10);
    }

    #[test]
    fn path_to_reaches_target() {
        let m = crate::symplectic::diamond_raw(&r2(2.5), &Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]));
        let g = path_to(&m, 1.0, 200).unwrap();
        assert!((g.end() - &m).amax() < 1e-10);
    }
}
