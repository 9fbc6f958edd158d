//! Fourier truncations of the forms ⟨Ax, y⟩ = ∫ −Jẋ·y and ⟨Bx, y⟩ = ∫ Bx·y on the
//! reversible loop spaces, and the index oracle obtained by counting negative
//! eigenvalues of A − B.
//!
//! Basis: φ_{p,f}(t) = exp(2πpt/τ·J) f with f ∈ L₀ (space E), f ∈ L₁ (space Ě),
//! or f ∈ L₀ and p odd (space Ê), scaled to unit norm in the weighted inner
//! product τ(1 + |p|)|a_p|².

use crate::angle::Omega;
use crate::error::{Error, Result};
use crate::lagrangian::{i_l, i_sqrt_l0, Family, IndexRecord};
use crate::path::{fundamental_solution_auto, CoefficientPath, ExtendMode};
use crate::symplectic::{j_matrix, CMat, Mat};
use nalgebra::{Complex, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::TAU;

const MAX_M: usize = 512;
/// Truncation orders evaluated together in one parallel batch.
const SWEEP_CHUNK: usize = 3;
/// Eigenvalues below this fraction of the largest |λ| count as kernel.
const KERNEL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// x(−t) = Nx(t)
    E,
    /// x(−t) = Nx(t) and x(t + τ/2) = −x(t)
    Hat,
    /// x(−t) = −Nx(t)
    Check,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTruncation {
    pub space: Space,
    pub tau: f64,
    pub m: usize,
    pub n: usize,
}

impl FourierTruncation {
    pub fn new(space: Space, tau: f64, m: usize, n: usize) -> Result<Self> {
        if !(tau > 0.0) || n == 0 {
            return Err(Error::Domain("truncation needs τ > 0 and n ≥ 1".into()));
        }
        if space == Space::Hat && m == 0 {
            return Err(Error::Domain("the odd-mode space needs m ≥ 1".into()));
        }
        Ok(FourierTruncation { space, tau, m, n })
    }

    /// Frequencies in basis order: −m..=m, or the odd ±1, ±3, .., ±(2m−1).
    pub fn modes(&self) -> Vec<i64> {
        let m = self.m as i64;
        match self.space {
            Space::Hat => (-m..m).map(|j| 2 * j + 1).collect(),
            _ => (-m..=m).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.modes().len() * self.n
    }

    /// Offset of the constant vectors f within R^{2n}.
    fn frame_offset(&self) -> usize {
        match self.space {
            Space::Check => 0,
            _ => self.n,
        }
    }

    fn weight(&self, p: i64) -> f64 {
        (self.tau * (1.0 + p.unsigned_abs() as f64)).sqrt()
    }

    /// Number of eigenvalues A − B is expected to have below zero when B = 0
    /// and which the index is measured against.
    pub fn negative_offset(&self) -> usize {
        match self.space {
            Space::Hat => self.m * self.n,
            _ => self.m * self.n + self.n,
        }
    }
}

/// Diagonal A-form 2πp in the unit-norm basis.
pub fn assemble_a(tr: &FourierTruncation) -> Mat {
    let modes = tr.modes();
    let n = tr.n;
    let mut a = Mat::zeros(tr.dim(), tr.dim());
    for (i, &p) in modes.iter().enumerate() {
        let w = tr.weight(p);
        for r in 0..n {
            a[(i * n + r, i * n + r)] = TAU * p as f64 / (w * w);
        }
    }
    a
}

fn e1(z: Complex<f64>) -> Complex<f64> {
    if z.norm() < 0.5 {
        let (mut term, mut sum) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        for k in 0..30 {
            sum += term / (k as f64 + 1.0);
            term = term * z / (k as f64 + 1.0);
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

fn e2(z: Complex<f64>) -> Complex<f64> {
    if z.norm() < 0.5 {
        let (mut term, mut sum) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        for k in 0..30 {
            sum += term / (k as f64 + 2.0);
            term = term * z / (k as f64 + 1.0);
        }
        sum
    } else {
        (z.exp() * (z - 1.0) + 1.0) / (z * z)
    }
}

/// Fourier moments C(k) = ∫₀^τ B(t) e^{2πikt/τ} dt of a piecewise-linear B,
/// exact per piece and cached.
pub struct Moments<'a> {
    b: &'a CoefficientPath,
    cache: HashMap<i64, CMat>,
}

impl<'a> Moments<'a> {
    pub fn new(b: &'a CoefficientPath) -> Self {
        Moments { b, cache: HashMap::new() }
    }

    pub fn get(&mut self, k: i64) -> &CMat {
        let b = self.b;
        self.cache.entry(k).or_insert_with(|| {
            let d = 2 * b.n();
            let omega = TAU * k as f64 / b.tau();
            let mut acc = CMat::zeros(d, d);
            for s in 0..b.grid().len() - 1 {
                let (t0, t1) = (b.grid()[s], b.grid()[s + 1]);
                let h = t1 - t0;
                let z = Complex::new(0.0, omega * h);
                let phase = Complex::new(0.0, omega * t0).exp() * h;
                let (c0, c1) = (e1(z) * phase, e2(z) * phase);
                let (v0, v1) = (&b.values()[s], &b.values()[s + 1]);
                let delta = v1 - v0;
                acc += v0.map(|x| Complex::new(x, 0.0)) * c0 + delta.map(|x| Complex::new(x, 0.0)) * c1;
            }
            acc
        })
    }
}

/// B-form ⟨Bφ_p f, φ_q g⟩ = Re fᵀ[P C(q−p) P + P C(−p−q) P̄ + P̄ C(p+q) P + P̄ C(p−q) P̄] g
/// with P = (I − iJ)/2, in the unit-norm basis. B must be given on [0, τ].
pub fn assemble_b(tr: &FourierTruncation, b: &CoefficientPath) -> Result<Mat> {
    let mut moments = Moments::new(b);
    assemble_b_with(tr, b, &mut moments)
}

fn assemble_b_with(tr: &FourierTruncation, b: &CoefficientPath, moments: &mut Moments) -> Result<Mat> {
    if b.n() != tr.n || (b.tau() - tr.tau).abs() > 1e-9 * tr.tau {
        return Err(Error::Dimension("coefficient path does not match the truncation".into()));
    }
    let n = tr.n;
    let d = 2 * n;
    let j = j_matrix(n).map(|x| Complex::new(x, 0.0));
    let id = CMat::identity(d, d);
    let i = Complex::new(0.0, 1.0);
    let p_proj = (&id - &j * i) * Complex::new(0.5, 0.0);
    let p_bar = (&id + &j * i) * Complex::new(0.5, 0.0);
    let modes = tr.modes();
    let off = tr.frame_offset();
    let mut out = Mat::zeros(tr.dim(), tr.dim());
    for (a, &p) in modes.iter().enumerate() {
        for (c, &q) in modes.iter().enumerate().skip(a) {
            let form = &p_proj * moments.get(q - p) * &p_proj
                + &p_proj * moments.get(-(p + q)) * &p_bar
                + &p_bar * moments.get(p + q) * &p_proj
                + &p_bar * moments.get(p - q) * &p_bar;
            let scale = 1.0 / (tr.weight(p) * tr.weight(q));
            for r in 0..n {
                for s in 0..n {
                    let v = form[(off + r, off + s)].re * scale;
                    out[(a * n + r, c * n + s)] = v;
                    out[(c * n + s, a * n + r)] = v;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandCount {
    pub d: f64,
    /// (dim M_d⁺, dim M_d⁰, dim M_d⁻)
    pub counts: (usize, usize, usize),
    /// some eigenvalue lies within 1e−12 of ±d
    pub near_edge: bool,
}

/// Eigenvalue counts of A − B in [d, ∞), (−d, d) and (−∞, −d].
pub fn band_counts(a: &Mat, b: &Mat, d: f64) -> Result<BandCount> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension("A and B differ in size".into()));
    }
    if d < 0.0 {
        return Err(Error::Domain("band half-width must be nonnegative".into()));
    }
    let ev = SymmetricEigen::new(a - b).eigenvalues;
    Ok(counts_of(ev.as_slice(), d))
}

fn counts_of(ev: &[f64], d: f64) -> BandCount {
    let plus = ev.iter().filter(|&&x| x >= d).count();
    let minus = ev.iter().filter(|&&x| x <= -d).count();
    let near_edge = ev.iter().any(|&x| (x.abs() - d).abs() < 1e-12);
    BandCount { d, counts: (plus, ev.len() - plus - minus, minus), near_edge }
}

/// d = ¼ of the smallest eigenvalue magnitude outside the numerical kernel.
pub fn band_width(ev: &[f64]) -> f64 {
    let top = ev.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let floor = KERNEL_TOL * top.max(1.0);
    let gap = ev.iter().map(|x| x.abs()).filter(|&x| x > floor).fold(f64::INFINITY, f64::min);
    if gap.is_finite() {
        0.25 * gap
    } else {
        floor
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GalerkinFamily {
    L0,
    L1,
    Sqrt,
}

impl GalerkinFamily {
    fn space(self) -> Space {
        match self {
            GalerkinFamily::L0 => Space::E,
            GalerkinFamily::L1 => Space::Check,
            GalerkinFamily::Sqrt => Space::Hat,
        }
    }

    fn record(self, index: i64, nullity: usize) -> IndexRecord {
        let (family, omega) = match self {
            GalerkinFamily::L0 => (Family::L0, None),
            GalerkinFamily::L1 => (Family::L1, None),
            GalerkinFamily::Sqrt => (Family::OmegaL0, Some(Omega::I)),
        };
        IndexRecord { family, omega, index, nullity }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub band: BandCount,
    pub index: i64,
    pub nullity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinIndex {
    pub record: IndexRecord,
    pub m_star: usize,
    pub sweep: Vec<SweepRow>,
}

impl GalerkinIndex {
    pub fn sweep_csv(&self) -> String {
        let mut s = String::from("m,d,plus,zero,minus,index,nullity\n");
        for r in &self.sweep {
            let (p, z, m) = r.band.counts;
            s.push_str(&format!("{},{},{},{},{},{},{}\n", r.m, r.band.d, p, z, m, r.index, r.nullity));
        }
        s
    }
}

/// The loop-space coefficient for `family`: the reversible extension of B from
/// [0, σ] to [0, 2σ] for the boundary families, to [0, 4σ] for the √−1 family.
pub fn extended_coefficient(b: &CoefficientPath, family: GalerkinFamily) -> Result<CoefficientPath> {
    match family {
        GalerkinFamily::Sqrt => b.reversible_extend(ExtendMode::Full),
        _ => b.reversible_extend(ExtendMode::Half),
    }
}

fn sweep_row(tr: &FourierTruncation, ext: &CoefficientPath, moments: &mut Moments) -> Result<SweepRow> {
    let a = assemble_a(tr);
    let bm = assemble_b_with(tr, ext, moments)?;
    let ev = SymmetricEigen::new(a - bm).eigenvalues;
    let band = counts_of(ev.as_slice(), band_width(ev.as_slice()));
    let index = band.counts.2 as i64 - tr.negative_offset() as i64;
    Ok(SweepRow { m: tr.m, band, index, nullity: band.counts.1 })
}

/// Index and nullity of γ_B (B on [0, σ] with (B1)) from negative-eigenvalue
/// counts, increasing m until three consecutive truncations agree.
pub fn index_from_galerkin(b: &CoefficientPath, family: GalerkinFamily) -> Result<GalerkinIndex> {
    index_from_galerkin_upto(b, family, MAX_M)
}

/// As [`index_from_galerkin`] with the sweep stopped after truncation order `m_max`.
pub fn index_from_galerkin_upto(b: &CoefficientPath, family: GalerkinFamily, m_max: usize) -> Result<GalerkinIndex> {
    let ext = extended_coefficient(b, family)?;
    let tau = ext.tau();
    let start = ((tau * ext.max_norm() / TAU).ceil() as usize + 2).max(1);
    let mut sweep: Vec<SweepRow> = Vec::new();
    let mut next = start;
    while next <= m_max {
        let chunk: Vec<usize> = (next..(next + SWEEP_CHUNK).min(m_max + 1)).collect();
        next += chunk.len();
        let rows = crate::par::try_map(&chunk, |&m| {
            let tr = FourierTruncation::new(family.space(), tau, m, b.n())?;
            sweep_row(&tr, &ext, &mut Moments::new(&ext))
        })?;
        for row in rows {
            sweep.push(row);
            let k = sweep.len();
            if k >= 3 && sweep[k - 3..].iter().all(|r| (r.index, r.nullity) == (row.index, row.nullity)) {
                return Ok(GalerkinIndex { record: family.record(row.index, row.nullity), m_star: sweep[k - 3].m, sweep });
            }
        }
    }
    Err(Error::NoStabilization(format!("Galerkin counts did not settle by m = {m_max}")))
}

/// Largest coupling between odd and even modes of E on the full period; the
/// splitting E_{τ,2m} = Ê_m ⊕ Ẽ_m requires it to vanish.
pub fn odd_even_coupling(b: &CoefficientPath, m: usize) -> Result<f64> {
    let ext = b.reversible_extend(ExtendMode::Full)?;
    let tr = FourierTruncation::new(Space::E, ext.tau(), 2 * m, b.n())?;
    let bm = assemble_b(&tr, &ext)?;
    let modes = tr.modes();
    let n = b.n();
    let mut worst: f64 = 0.0;
    for (i, p) in modes.iter().enumerate() {
        for (k, q) in modes.iter().enumerate() {
            if (p - q).rem_euclid(2) == 1 {
                for r in 0..n {
                    for s in 0..n {
                        worst = worst.max(bm[(i * n + r, k * n + s)].abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderReport {
    pub family: GalerkinFamily,
    pub upper: IndexRecord,
    pub lower: IndexRecord,
    /// ∫(B₁ − B₂) is positive definite
    pub strict: bool,
    pub holds: bool,
}

fn check_pd(m: &Mat) -> bool {
    SymmetricEigen::new(m.clone()).eigenvalues.min() > 1e-12
}

/// For B₁ ≥ B₂: i(B₁) ≥ i(B₂) and i(B₁) + ν(B₁) ≥ i(B₂) + ν(B₂); when ∫(B₁ − B₂) > 0
/// also i(B₁) ≥ i(B₂) + ν(B₂). Indices from the Galerkin counts.
pub fn monotonicity_suite(b1: &CoefficientPath, b2: &CoefficientPath) -> Result<Vec<OrderReport>> {
    let diff = b1.zip_with(b2, |x, y| x - y)?;
    if diff.min_eigenvalue() < -1e-10 {
        return Err(Error::Validation("the pair is not ordered: B₁ − B₂ has a negative eigenvalue".into()));
    }
    let strict = check_pd(&diff.integral());
    [GalerkinFamily::Sqrt, GalerkinFamily::L0, GalerkinFamily::L1]
        .iter()
        .map(|&family| {
            let upper = index_from_galerkin(b1, family)?.record;
            let lower = index_from_galerkin(b2, family)?.record;
            let mut holds = upper.index >= lower.index && upper.sum() >= lower.sum();
            if strict {
                holds &= upper.index >= lower.sum();
            }
            Ok(OrderReport { family, upper, lower, strict, holds })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositivityReport {
    /// Some(i_{L0}) when ∫B₂₂ > 0, None when the hypothesis fails
    pub l0: Option<i64>,
    pub l1: Option<i64>,
    pub holds: bool,
    /// the path engine returned the same indices
    pub engines_agree: bool,
}

/// For B ≥ 0: ∫B₂₂ > 0 ⇒ i_{L0} ≥ 0 and ∫B₁₁ > 0 ⇒ i_{L1} ≥ 0.
pub fn block_positivity(b: &CoefficientPath) -> Result<PositivityReport> {
    if b.min_eigenvalue() < -1e-10 {
        return Err(Error::Validation("coefficient path is not positive semidefinite".into()));
    }
    let n = b.n();
    let int = b.integral();
    let b11 = int.view((0, 0), (n, n)).into_owned();
    let b22 = int.view((n, n), (n, n)).into_owned();
    let gamma = fundamental_solution_auto(b)?;
    let mut agree = true;
    let mut run = |hyp: bool, family: GalerkinFamily, j: u8| -> Result<Option<i64>> {
        if !hyp {
            return Ok(None);
        }
        let g = index_from_galerkin(b, family)?.record;
        let p = i_l(&gamma, j)?;
        agree &= (g.index, g.nullity) == (p.index, p.nullity);
        Ok(Some(g.index))
    };
    let l0 = run(check_pd(&b22), GalerkinFamily::L0, 0)?;
    let l1 = run(check_pd(&b11), GalerkinFamily::L1, 1)?;
    let holds = l0.is_none_or(|i| i >= 0) && l1.is_none_or(|i| i >= 0);
    Ok(PositivityReport { l0, l1, holds, engines_agree: agree })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemipositiveReport {
    pub sqrt: IndexRecord,
    pub l0: IndexRecord,
    pub l1: IndexRecord,
    pub definite_integral: bool,
    pub holds: bool,
}

/// For B ≥ 0: i_{√−1}^{L0} ≥ 0, i_{L_j} + ν_{L_j} ≥ 0 and i_{L_j} ≥ −n, with
/// i_{L_j} ≥ 0 once ∫B > 0. Indices from the path engine.
pub fn semipositive_bounds(b: &CoefficientPath) -> Result<SemipositiveReport> {
    if b.min_eigenvalue() < -1e-10 {
        return Err(Error::Validation("coefficient path is not positive semidefinite".into()));
    }
    let gamma = fundamental_solution_auto(b)?;
    let quarter = i_sqrt_l0(&gamma)?;
    let l0 = i_l(&gamma, 0)?;
    let l1 = i_l(&gamma, 1)?;
    let n = b.n() as i64;
    let definite_integral = check_pd(&b.integral());
    let mut holds = quarter.index >= 0;
    for r in [&l0, &l1] {
        holds &= r.sum() >= 0 && r.index >= -n;
        if definite_integral {
            holds &= r.index >= 0;
        }
    }
    Ok(SemipositiveReport { sqrt: quarter, l0, l1, definite_integral, holds })
}
