//! Iterated paths in the brake and periodic senses, and the Bott-type formulas
//! expressing their indices through ω-indices of the base path.

use crate::angle::Omega;
use crate::error::{Error, Result};
use crate::lagrangian::{i_l, i_sqrt_l0, Family, IndexRecord};
use crate::omega::i_nu_omega;
use crate::path::{fundamental_solution_auto, CoefficientPath, ExtendMode, SymplecticPath};
use crate::symplectic::{j_matrix, n_matrix, Mat};
use serde::{Deserialize, Serialize};

const JUNCTION_TOL: f64 = 1e-8;

fn sp_inverse(m: &Mat) -> Mat {
    let j = j_matrix(m.nrows() / 2);
    -(&j * m.transpose() * &j)
}

fn check_junction(a: &Mat, b: &Mat, t: f64) -> Result<()> {
    let gap = (a - b).amax();
    if gap > JUNCTION_TOL * (1.0 + a.amax()) {
        return Err(Error::Validation(format!("iterated path jumps by {gap:.2e} at t = {t}")));
    }
    Ok(())
}

/// γ^k on [0, kτ]: even legs γ(t − 2jτ)S^j, odd legs Nγ(2jτ + 2τ − t)N S^{j+1},
/// with S = Nγ(τ)⁻¹Nγ(τ).
pub fn iterate_brake(path: &SymplecticPath, k: usize) -> Result<SymplecticPath> {
    if k == 0 {
        return Err(Error::Domain("iteration count must be positive".into()));
    }
    let tau = path.tau();
    let nm = n_matrix(path.n());
    let end = path.end();
    let step = &nm * sp_inverse(end) * &nm * end;
    let (g, s) = (path.grid(), path.samples());
    let mut grid = g.to_vec();
    let mut samples = s.to_vec();
    let mut power = Mat::identity(2 * path.n(), 2 * path.n());
    for leg in 1..k {
        let offset = leg as f64 * tau;
        let last = samples.last().unwrap().clone();
        if leg % 2 == 1 {
            let right = &power * &step;
            let first = &nm * &s[g.len() - 1] * &nm * &right;
            check_junction(&last, &first, offset)?;
            for i in (0..g.len() - 1).rev() {
                grid.push(offset + (tau - g[i]));
                samples.push(&nm * &s[i] * &nm * &right);
            }
            power = right;
        } else {
            check_junction(&last, &power, offset)?;
            for i in 1..g.len() {
                grid.push(offset + g[i]);
                samples.push(&s[i] * &power);
            }
        }
        // snap the leg end exactly onto the boundary
        *grid.last_mut().unwrap() = (leg + 1) as f64 * tau;
    }
    let source = match path.source() {
        Some(b) if k > 1 => brake_source(b, k).ok(),
        Some(b) => Some(b.clone()),
        None => None,
    };
    SymplecticPath::from_samples(grid, samples, source)
}

fn brake_source(b: &CoefficientPath, k: usize) -> Result<CoefficientPath> {
    let ext = b.reversible_extend(ExtendMode::Half)?;
    let full = ext.periodic_extend(k.div_ceil(2))?;
    if k % 2 == 1 {
        full.restrict(0.0, k as f64 * b.tau())
    } else {
        Ok(full)
    }
}

/// γ(m)(t) = γ(t − jτ)γ(τ)^j on [jτ, (j+1)τ].
pub fn iterate_periodic(path: &SymplecticPath, m: usize) -> Result<SymplecticPath> {
    if m == 0 {
        return Err(Error::Domain("iteration count must be positive".into()));
    }
    let tau = path.tau();
    let (g, s) = (path.grid(), path.samples());
    let mut grid = g.to_vec();
    let mut samples = s.to_vec();
    let mut power = Mat::identity(2 * path.n(), 2 * path.n());
    for leg in 1..m {
        power = &s[g.len() - 1] * &power;
        let offset = leg as f64 * tau;
        for i in 1..g.len() {
            grid.push(offset + g[i]);
            samples.push(&s[i] * &power);
        }
        *grid.last_mut().unwrap() = (leg + 1) as f64 * tau;
    }
    SymplecticPath::from_samples(grid, samples, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationReport {
    pub k: usize,
    pub direct: IndexRecord,
    pub formula: IndexRecord,
    pub agree: bool,
}

impl IterationReport {
    fn new(k: usize, direct: IndexRecord, formula: IndexRecord) -> Self {
        let agree = direct.index == formula.index && direct.nullity == formula.nullity;
        IterationReport { k, direct, formula, agree }
    }
}

fn add(acc: &mut IndexRecord, r: &IndexRecord) {
    acc.index += r.index;
    acc.nullity += r.nullity;
}

/// Sum of i_ω(γ²) over ω = ω_k^e for the given exponents e, where ω_k = e^{iπ/k}.
fn omega_sum(double: &SymplecticPath, k: usize, exponents: impl Iterator<Item = i64>, acc: &mut IndexRecord) -> Result<()> {
    let wk = Omega::pi_over(k as i64);
    for e in exponents {
        add(acc, &i_nu_omega(double, wk.pow(e))?);
    }
    Ok(())
}

/// i_{L0}(γ^k) directly and as i_{L0}(γ) [+ i_{√−1}^{L0}(γ)] + Σ i_{ω_k^{2i}}(γ²).
pub fn bott_l0(path: &SymplecticPath, k: usize) -> Result<IterationReport> {
    let direct = i_l(&iterate_brake(path, k)?, 0)?;
    let mut formula = i_l(path, 0)?;
    let double = iterate_brake(path, 2)?;
    let k64 = k as i64;
    if k % 2 == 1 {
        omega_sum(&double, k, (1..=(k64 - 1) / 2).map(|i| 2 * i), &mut formula)?;
    } else {
        add(&mut formula, &i_sqrt_l0(path)?);
        omega_sum(&double, k, (1..k64 / 2).map(|i| 2 * i), &mut formula)?;
    }
    Ok(IterationReport::new(k, direct, formula))
}

/// i_{√−1}^{L0}(γ^k) directly and through the odd powers of ω_k on γ².
pub fn bott_sqrt(path: &SymplecticPath, k: usize) -> Result<IterationReport> {
    let direct = i_sqrt_l0(&iterate_brake(path, k)?)?;
    let double = iterate_brake(path, 2)?;
    let k64 = k as i64;
    let mut formula;
    if k % 2 == 1 {
        formula = i_sqrt_l0(path)?;
        omega_sum(&double, k, (1..=(k64 - 1) / 2).map(|i| 2 * i - 1), &mut formula)?;
    } else {
        formula = IndexRecord { family: Family::OmegaL0, omega: Some(Omega::I), index: 0, nullity: 0 };
        omega_sum(&double, k, (1..=k64 / 2).map(|i| 2 * i - 1), &mut formula)?;
    }
    Ok(IterationReport::new(k, direct, formula))
}

/// i_z(γ(m)) directly and as Σ_{ω^m = z} i_ω(γ).
pub fn bott_periodic(path: &SymplecticPath, z: Omega, m: usize) -> Result<IterationReport> {
    if m == 0 {
        return Err(Error::Domain("iteration count must be positive".into()));
    }
    let direct = i_nu_omega(&iterate_periodic(path, m)?, z)?;
    let mut formula = IndexRecord { family: Family::PeriodicOmega, omega: Some(z), index: 0, nullity: 0 };
    for w in z.roots(m as u32) {
        add(&mut formula, &i_nu_omega(path, w)?);
    }
    Ok(IterationReport::new(m, direct, formula))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleRelationReport {
    pub periodic_one: IndexRecord,
    pub l0: IndexRecord,
    pub l1: IndexRecord,
    pub holds: bool,
}

/// i_1(γ²) = i_{L0}(γ) + i_{L1}(γ) + n and ν_1(γ²) = ν_{L0}(γ) + ν_{L1}(γ).
pub fn check_double_relation(path: &SymplecticPath) -> Result<DoubleRelationReport> {
    let periodic_one = i_nu_omega(&iterate_brake(path, 2)?, Omega::ONE)?;
    let l0 = i_l(path, 0)?;
    let l1 = i_l(path, 1)?;
    let holds = periodic_one.index == l0.index + l1.index + path.n() as i64
        && periodic_one.nullity == l0.nullity + l1.nullity;
    Ok(DoubleRelationReport { periodic_one, l0, l1, holds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub family: Family,
    pub p: usize,
    pub q: usize,
    pub index_p: i64,
    pub index_q: i64,
    pub holds: bool,
}

fn family_index(path: &SymplecticPath, family: Family) -> Result<i64> {
    Ok(match family {
        Family::L0 => i_l(path, 0)?.index,
        Family::L1 => i_l(path, 1)?.index,
        Family::OmegaL0 => i_sqrt_l0(path)?.index,
        Family::PeriodicOmega => return Err(Error::Domain("monotonicity applies to the boundary families".into())),
    })
}

/// For B ≥ 0: the index of γ_B^p dominates that of γ_B^q (p > q for the √−1
/// family, p ≥ q for L0 and L1).
pub fn monotonicity_check(b: &CoefficientPath, p: usize, q: usize, family: Family) -> Result<MonotonicityReport> {
    if b.min_eigenvalue() < -1e-10 {
        return Err(Error::Validation("coefficient path is not positive semidefinite".into()));
    }
    if !b.satisfies_b1(1e-10) {
        return Err(Error::Validation("condition (B1) fails".into()));
    }
    let strict = family == Family::OmegaL0;
    if q == 0 || p < q || (strict && p == q) {
        return Err(Error::Domain(format!("iteration counts p = {p}, q = {q} are not ordered")));
    }
    let gamma = fundamental_solution_auto(b)?;
    let index_p = family_index(&iterate_brake(&gamma, p)?, family)?;
    let index_q = family_index(&iterate_brake(&gamma, q)?, family)?;
    Ok(MonotonicityReport { family, p, q, index_p, index_q, holds: index_p >= index_q })
}
