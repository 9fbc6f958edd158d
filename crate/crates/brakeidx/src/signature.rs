//! Signatures of the symmetric matrices M_ε(P) = PᵀK₋(ε)P + K₊(ε) near ε = 0 and
//! the boundary index differences they encode.

use crate::error::{Error, Result};
use crate::lagrangian::i_l;
use crate::path::SymplecticPath;
use crate::symplectic::{nu_lagrangian, Mat, SymplecticMatrix};
use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

pub const DEFAULT_EPS0: f64 = 1e-3;
const MAX_HALVINGS: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsSide {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifferenceVariant {
    /// i_{L0} − i_{L1}
    Bare,
    /// (i_{L0} + ν_{L0}) − (i_{L1} + ν_{L1})
    PlusNullity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsSignature {
    pub p: SymplecticMatrix,
    pub side: EpsSide,
    pub eps_used: f64,
    pub signature: i64,
    /// (m⁺, m⁰, m⁻)
    pub inertia: (usize, usize, usize),
}

fn blocks(n: usize, a: f64, b: f64) -> Mat {
    let mut k = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        k[(i, i)] = a;
        k[(n + i, n + i)] = -a;
        k[(i, n + i)] = b;
        k[(n + i, i)] = b;
    }
    k
}

/// M_ε(P) = PᵀK₋P + K₊ with K∓ = [[sin 2ε, ∓cos 2ε], [∓cos 2ε, −sin 2ε]] ⊗ I_n.
pub fn m_eps(p: &Mat, eps: f64) -> Mat {
    let n = p.nrows() / 2;
    let (s, c) = (2.0 * eps).sin_cos();
    let m = p.transpose() * blocks(n, s, -c) * p + blocks(n, s, c);
    (&m + m.transpose()) * 0.5
}

/// (m⁺, m⁰, m⁻) with zero threshold 1e−10·‖M‖.
pub fn inertia(m: &Mat) -> (usize, usize, usize) {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let ev = SymmetricEigen::new(m.clone()).eigenvalues;
    let tol = 1e-10 * scale;
    let pos = ev.iter().filter(|&&x| x > tol).count();
    let neg = ev.iter().filter(|&&x| x < -tol).count();
    (pos, ev.len() - pos - neg, neg)
}

/// Signature of M_ε(P) for ε → 0 from the given side, starting at ε₀.
pub fn sgn_m_eps_from(p: &SymplecticMatrix, side: EpsSide, eps0: f64) -> Result<EpsSignature> {
    let sign = match side {
        EpsSide::Plus => 1.0,
        EpsSide::Minus => -1.0,
    };
    let mut prev: Option<(usize, usize, usize)> = None;
    for j in 0..=MAX_HALVINGS {
        let eps = sign * eps0 * 0.5f64.powi(j as i32);
        let inr = inertia(&m_eps(p.matrix(), eps));
        if inr.1 != 0 {
            prev = None;
            continue;
        }
        if prev == Some(inr) {
            return Ok(EpsSignature {
                p: p.clone(),
                side,
                eps_used: eps,
                signature: inr.0 as i64 - inr.2 as i64,
                inertia: inr,
            });
        }
        prev = Some(inr);
    }
    Err(Error::NoStabilization(format!("signature of M_ε did not settle after {MAX_HALVINGS} halvings")))
}

pub fn sgn_m_eps(p: &SymplecticMatrix, side: EpsSide) -> Result<EpsSignature> {
    sgn_m_eps_from(p, side, DEFAULT_EPS0)
}

fn endpoint(path: &SymplecticPath) -> Result<SymplecticMatrix> {
    SymplecticMatrix::new(path.end().clone())
}

/// Half the stabilized signature at γ(τ): ε → 0⁺ for the bare difference,
/// ε → 0⁻ for the difference including nullities.
pub fn index_difference(path: &SymplecticPath, variant: DifferenceVariant) -> Result<i64> {
    let side = match variant {
        DifferenceVariant::Bare => EpsSide::Plus,
        DifferenceVariant::PlusNullity => EpsSide::Minus,
    };
    let s = sgn_m_eps(&endpoint(path)?, side)?.signature;
    if s % 2 != 0 {
        return Err(Error::Consistency(format!("odd signature {s} at the endpoint")));
    }
    Ok(s / 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceReport {
    pub variant: DifferenceVariant,
    pub from_signature: i64,
    pub from_indices: i64,
    pub agree: bool,
}

/// Compares the signature value with the difference of independently computed indices.
pub fn check_index_difference(path: &SymplecticPath, variant: DifferenceVariant) -> Result<DifferenceReport> {
    let from_signature = index_difference(path, variant)?;
    let (l0, l1) = (i_l(path, 0)?, i_l(path, 1)?);
    let from_indices = match variant {
        DifferenceVariant::Bare => l0.index - l1.index,
        DifferenceVariant::PlusNullity => l0.sum() - l1.sum(),
    };
    Ok(DifferenceReport { variant, from_signature, from_indices, agree: from_signature == from_indices })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub start: i64,
    pub end: i64,
    pub holds: bool,
}

/// For a sampled path P(t) in Sp(2n) along which ν_{L0} and ν_{L1} stay constant,
/// the ε → 0⁺ signatures at both ends coincide.
pub fn constancy_check(samples: &[Mat]) -> Result<ConstancyReport> {
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Dimension("empty path".into())),
    };
    for j in 0..2u8 {
        let nu0 = nu_lagrangian(first, j);
        if samples.iter().any(|s| nu_lagrangian(s, j) != nu0) {
            return Err(Error::Validation(format!("ν_L{j} is not constant along the path")));
        }
    }
    let start = sgn_m_eps(&SymplecticMatrix::new(first.clone())?, EpsSide::Plus)?.signature;
    let end = sgn_m_eps(&SymplecticMatrix::new(last.clone())?, EpsSide::Plus)?.signature;
    Ok(ConstancyReport { start, end, holds: start == end })
}

/// s ↦ diag(ρ(s)⁻¹, ρ(s)ᵀ) on [0, 1] with ρ(0) = I and ρ(1) = A, det A > 0;
/// ρ joins I to the polar factors of A.
pub fn scaling_path(a: &Mat, steps: usize) -> Result<Vec<Mat>> {
    let n = a.nrows();
    if a.ncols() != n || a.determinant() <= 0.0 {
        return Err(Error::Validation("scaling path needs a square matrix with positive determinant".into()));
    }
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let orth = &u * &vt;
    let sym = vt.transpose() * Mat::from_diagonal(&svd.singular_values) * &vt;
    let schur = nalgebra::Schur::new(orth.map(|x| nalgebra::Complex::new(x, 0.0)));
    let (q, t) = schur.unpack();
    let angles: Vec<nalgebra::Complex<f64>> = (0..n).map(|i| t[(i, i)].ln()).collect();
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let s = k as f64 / steps as f64;
        let d = nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { (angles[i] * s).exp() } else { nalgebra::Complex::new(0.0, 0.0) });
        let o = (&q * d * q.adjoint()).map(|z| z.re);
        let p = Mat::identity(n, n) * (1.0 - s) + &sym * s;
        let rho = o * p;
        let inv = rho.clone().try_inverse().ok_or_else(|| Error::Domain("scaling path is singular".into()))?;
        let mut m = Mat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&inv);
        m.view_mut((n, n), (n, n)).copy_from(&rho.transpose());
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{diamond, normal_form, rotation, NormalFormSpec};
    use std::f64::consts::TAU;

    fn sp(rows: &[f64]) -> SymplecticMatrix {
        SymplecticMatrix::new(Mat::from_row_slice(2, 2, rows)).unwrap()
    }

    fn sig(rows: &[f64], side: EpsSide) -> i64 {
        sgn_m_eps(&sp(rows), side).unwrap().signature
    }

    #[test]
    fn worked_examples() {
        let b = 0.7;
        for s in [1.0, -1.0] {
            assert_eq!(sig(&[s, 0.0, s * b, s], EpsSide::Plus), -2);
            assert_eq!(sig(&[s, -s * b, 0.0, s], EpsSide::Plus), 2);
            assert_eq!(sig(&[2.0 * s, -s, -s, s], EpsSide::Plus), 2);
        }
        for th in [0.3, 1.0, 2.5, 4.0] {
            let r = SymplecticMatrix::new(rotation(1, th)).unwrap();
            assert_eq!(sgn_m_eps(&r, EpsSide::Plus).unwrap().signature, 0);
        }
        assert_eq!(sgn_m_eps(&SymplecticMatrix::identity(2), EpsSide::Plus).unwrap().signature, 0);
    }

    #[test]
    fn orthogonal_has_balanced_inertia() {
        let r = SymplecticMatrix::new(rotation(3, 0.8)).unwrap();
        let s = sgn_m_eps(&r, EpsSide::Plus).unwrap();
        assert_eq!(s.inertia, (3, 0, 3));
        let m = m_eps(r.matrix(), 1e-3);
        let j = crate::symplectic::j_matrix(3);
        assert!((&m * &j + &j * &m).amax() < 1e-12);
    }

    #[test]
    fn signature_is_additive_under_diamond() {
        let a = normal_form(&NormalFormSpec::N1 { lambda: 1.0, b: -1.0 }).unwrap();
        let b = sp(&[2.0, -1.0, -1.0, 1.0]);
        let d = diamond(&a, &b);
        for side in [EpsSide::Plus, EpsSide::Minus] {
            let sum = sgn_m_eps(&a, side).unwrap().signature + sgn_m_eps(&b, side).unwrap().signature;
            assert_eq!(sgn_m_eps(&d, side).unwrap().signature, sum);
        }
    }

    #[test]
    fn independent_of_starting_eps() {
        let p = sp(&[1.0, 0.0, 0.4, 1.0]);
        for side in [EpsSide::Plus, EpsSide::Minus] {
            let v: Vec<i64> = [1e-2, 1e-3, 1e-4].iter().map(|&e| sgn_m_eps_from(&p, side, e).unwrap().signature).collect();
            assert!(v.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn differences_on_simple_paths() {
        for variant in [DifferenceVariant::Bare, DifferenceVariant::PlusNullity] {
            assert_eq!(index_difference(&SymplecticPath::rotation(1, TAU), variant).unwrap(), 0);
            assert_eq!(index_difference(&SymplecticPath::identity(2, 1.0), variant).unwrap(), 0);
            for tau in [0.5, 1.7, 3.0] {
                assert!(check_index_difference(&SymplecticPath::rotation(2, tau), variant).unwrap().agree);
            }
        }
    }

    #[test]
    fn constancy_along_rotation_and_scaling() {
        let rot: Vec<Mat> = (0..=20).map(|k| rotation(1, 0.4 + 0.01 * k as f64)).collect();
        let r = constancy_check(&rot).unwrap();
        assert!(r.holds && r.start == 0);
        let a = Mat::from_row_slice(2, 2, &[0.3, -1.2, 0.8, 0.9]);
        let path = scaling_path(&a, 50).unwrap();
        assert!((&path[50].view((0, 0), (2, 2)) * &a - Mat::identity(2, 2)).amax() < 1e-10);
        assert!(constancy_check(&path).unwrap().holds);
        let crossing: Vec<Mat> = (0..=20).map(|k| rotation(1, 2.9 + (std::f64::consts::PI - 2.9) * k as f64 / 10.0)).collect();
        assert!(constancy_check(&crossing).is_err());
    }
}
