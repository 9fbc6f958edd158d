//! Seeded random coefficient paths satisfying (B1) exactly, for identity suites.

use crate::error::{Error, Result};
use crate::path::{fundamental_solution_auto, CoefficientPath};
use crate::symplectic::{j_matrix, n_matrix, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const SEGMENTS: usize = 64;
const MAX_DRAWS: usize = 256;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale))
}

fn random_symmetric(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Mat {
    let a = random_matrix(rng, d, d, scale);
    (&a + a.transpose()) * 0.5
}

fn block_diag(p: &Mat, q: &Mat) -> Mat {
    let n = p.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(p);
    m.view_mut((n, n), (n, n)).copy_from(q);
    m
}

/// Bump vanishing at both ends, 1 at the midpoint.
fn bump(t: f64, tau: f64) -> f64 {
    4.0 * t * (tau - t) / (tau * tau)
}

/// Smooth matrix curve A₀ + sin(πt/τ)A₁ + cos(2πt/τ)A₂.
struct Curve([Mat; 3]);

impl Curve {
    fn symmetric(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Self {
        Curve([random_symmetric(rng, d, scale), random_symmetric(rng, d, scale), random_symmetric(rng, d, 0.5 * scale)])
    }

    fn general(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Self {
        Curve([random_matrix(rng, d, d, scale), random_matrix(rng, d, d, scale), random_matrix(rng, d, d, 0.5 * scale)])
    }

    fn at(&self, t: f64, tau: f64) -> Mat {
        let [a0, a1, a2] = &self.0;
        a0 + a1 * (PI * t / tau).sin() + a2 * (2.0 * PI * t / tau).cos()
    }
}

/// B(t) = diag(P(t), Q(t)) + φ(t)S on [0, τ] with φ vanishing at the ends, so the
/// off-diagonal blocks vanish there exactly.
pub fn random_b1_path(rng: &mut ChaCha8Rng, n: usize, tau: f64) -> Result<CoefficientPath> {
    let p = Curve::symmetric(rng, n, 1.5);
    let q = Curve::symmetric(rng, n, 1.5);
    let s = random_symmetric(rng, 2 * n, 2.0);
    CoefficientPath::from_fn(tau, SEGMENTS, |t| block_diag(&p.at(t, tau), &q.at(t, tau)) + &s * bump(t, tau))
}

/// B(t) = G(t)G(t)ᵀ with G = diag(P, Q) + φK; positive semidefinite with (B1).
pub fn random_psd_path(rng: &mut ChaCha8Rng, n: usize, tau: f64) -> Result<CoefficientPath> {
    let p = Curve::general(rng, n, 1.0);
    let q = Curve::general(rng, n, 1.0);
    let k = random_matrix(rng, 2 * n, 2 * n, 1.0);
    CoefficientPath::from_fn(tau, SEGMENTS, |t| {
        let g = block_diag(&p.at(t, tau), &q.at(t, tau)) + &k * bump(t, tau);
        &g * g.transpose()
    })
}

/// (B₁, B₂) with B₁ − B₂ ≥ 0 and both satisfying (B1).
pub fn random_ordered_pair(rng: &mut ChaCha8Rng, n: usize, tau: f64) -> Result<(CoefficientPath, CoefficientPath)> {
    let lower = random_b1_path(rng, n, tau)?;
    let gap = random_psd_path(rng, n, tau)?.map(|m| m * 0.5)?;
    let upper = lower.zip_with(&gap, |a, b| a + b)?;
    Ok((upper, lower))
}

#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub b: CoefficientPath,
}

pub fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Largest sample norm allowed for the sixth brake iterate of a suite path.
/// Beyond this, integration error in γ(τ) is amplified enough by the powers of
/// the monodromy to blur Gr(γ^k) at the resolution the intersection count needs.
pub const ITERATE_NORM_CAP: f64 = 1e3;

/// Bound on the sample norms of γ^6: max ‖γ(t)‖ · ‖S‖³ with S = Nγ(τ)⁻¹Nγ(τ).
pub fn iterate_growth(b: &CoefficientPath) -> Result<f64> {
    let g = fundamental_solution_auto(b)?;
    let n = b.n();
    let (j, nm) = (j_matrix(n), n_matrix(n));
    let end = g.end();
    let inv = -(&j * end.transpose() * &j);
    let step = &nm * inv * &nm * end;
    let peak = g.samples().iter().map(|m| m.norm()).fold(0.0, f64::max);
    Ok(peak * step.norm().powi(3))
}

fn draw(seed: u64, index: usize, psd: bool, n: Option<usize>) -> Result<SuiteCase> {
    let mut rng = case_rng(if psd { seed ^ 0x5eed_0f_b0b } else { seed }, index);
    let n = match n {
        Some(n) if !(1..=4).contains(&n) => return Err(Error::Domain(format!("suite half-dimension {n} is outside 1..=4"))),
        Some(n) => n,
        None => 1 + index % 3,
    };
    for _ in 0..MAX_DRAWS {
        let tau = rng.random_range(0.5..2.0);
        let b = if psd { random_psd_path(&mut rng, n, tau)? } else { random_b1_path(&mut rng, n, tau)? };
        if iterate_growth(&b)? <= ITERATE_NORM_CAP {
            return Ok(SuiteCase { index, seed, n, b });
        }
    }
    Err(Error::Domain(format!("no admissible path for case {index} after {MAX_DRAWS} draws")))
}

/// Case `index` of the general suite: n cycles through 1, 2, 3, τ ∈ [0.5, 2),
/// redrawn until the iterates stay within [`ITERATE_NORM_CAP`].
pub fn general_case(seed: u64, index: usize) -> Result<SuiteCase> {
    draw(seed, index, false, None)
}

/// Case `index` with a fixed half-dimension n ≤ 4; `psd` selects the
/// semidefinite suite.
pub fn case_with_dimension(seed: u64, index: usize, n: usize, psd: bool) -> Result<SuiteCase> {
    draw(seed, index, psd, Some(n))
}

/// Case `index` of the semidefinite suite.
pub fn psd_case(seed: u64, index: usize) -> Result<SuiteCase> {
    draw(seed, index, true, None)
}
