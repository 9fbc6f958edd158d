//! The periodic index function (i_ω, ν_ω), splitting numbers and the ω-profile.

use crate::angle::Omega;
use crate::error::{Error, Result};
use crate::lagrangian::{mu_clm, Family, IndexRecord, LagrangianFrame};
use crate::path::SymplecticPath;
use crate::symplectic::{diamond_raw, normal_form, nu_omega_tol, r2, unit_spectrum, Mat, NormalFormSpec, NULLITY_TOL};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Denominator used to place floating eigen-angles on the rational circle.
const ANGLE_DENOMINATOR: i64 = 1 << 40;

/// (i_ω(γ), ν_ω(γ)): μ(Gr(ωI), Gr γ) on the complexification, shifted by −n at ω = 1.
pub fn i_nu_omega(path: &SymplecticPath, omega: Omega) -> Result<IndexRecord> {
    let n = path.n();
    let v = LagrangianFrame::twisted_diagonal(n, omega.to_complex());
    let mu = mu_clm(&v, path)?;
    let shift = if omega.is_one() { n as i64 } else { 0 };
    Ok(IndexRecord {
        family: Family::PeriodicOmega,
        omega: Some(omega),
        index: mu - shift,
        nullity: nu_omega_tol(path.end(), omega.to_complex(), NULLITY_TOL),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingPair {
    pub omega: Omega,
    pub s_plus: i64,
    pub s_minus: i64,
}

/// S±(ω) as the stabilized jumps i_{ωe^{±iε}} − i_ω along a path ending at M.
pub fn splitting_by_limit(path: &SymplecticPath, omega: Omega) -> Result<SplittingPair> {
    let base = i_nu_omega(path, omega)?.index;
    let mut prev: Option<(i64, i64)> = None;
    for j in 0..20 {
        let eps = Omega::from_turns(1, 1 << (12 + j));
        let plus = i_nu_omega(path, omega.mul(&eps))?.index - base;
        let minus = i_nu_omega(path, omega.mul(&eps.conj()))?.index - base;
        if prev == Some((plus, minus)) {
            return Ok(SplittingPair { omega, s_plus: plus, s_minus: minus });
        }
        prev = Some((plus, minus));
    }
    Err(Error::NoStabilization(format!("splitting numbers at {omega} did not settle")))
}

fn same_point(a: Complex<f64>, b: Complex<f64>) -> bool {
    (a - b).norm() < 1e-9
}

/// N2(ω, b) is trivial when M·R((t−1)α)^{⋄2} has no unit eigenvalues for t ∈ [0, 1).
pub fn n2_is_trivial(m: &Mat) -> bool {
    let alpha = 1e-3;
    (0..8).all(|k| {
        let t = k as f64 / 8.0;
        let r = r2((t - 1.0) * alpha);
        let p = m * diamond_raw(&r, &r);
        p.complex_eigenvalues().iter().all(|z| (z.norm() - 1.0).abs() > 1e-7)
    })
}

/// Closed-form splitting numbers of one basic normal form.
pub fn splitting_of_normal_form(spec: &NormalFormSpec, omega: Omega) -> Result<(i64, i64)> {
    let w = omega.to_complex();
    let m = normal_form(spec)?;
    Ok(match *spec {
        NormalFormSpec::D { .. } => (0, 0),
        NormalFormSpec::N1 { lambda, b } => {
            if !same_point(w, Complex::new(lambda, 0.0)) {
                (0, 0)
            } else if lambda * b < -1e-12 {
                (0, 0)
            } else {
                (1, 1)
            }
        }
        NormalFormSpec::R { theta } => {
            let e = Complex::from_polar(1.0, theta);
            if same_point(w, e) {
                (0, 1)
            } else if same_point(w, e.conj()) {
                (1, 0)
            } else {
                (0, 0)
            }
        }
        NormalFormSpec::N2 { theta, .. } => {
            let e = Complex::from_polar(1.0, theta);
            if !(same_point(w, e) || same_point(w, e.conj())) {
                (0, 0)
            } else if n2_is_trivial(m.matrix()) {
                (0, 0)
            } else {
                (1, 1)
            }
        }
    })
}

/// ⋄-additive table value for a product of basic normal forms.
pub fn splitting_table(parts: &[NormalFormSpec], omega: Omega) -> Result<SplittingPair> {
    let mut acc = (0, 0);
    for p in parts {
        let (a, b) = splitting_of_normal_form(p, omega)?;
        acc = (acc.0 + a, acc.1 + b);
    }
    Ok(SplittingPair { omega, s_plus: acc.0, s_minus: acc.1 })
}

/// ⋄-product of the listed normal forms.
pub fn diamond_of(parts: &[NormalFormSpec]) -> Result<Mat> {
    let mut it = parts.iter();
    let first = it.next().ok_or_else(|| Error::Validation("empty normal-form list".into()))?;
    let mut m = normal_form(first)?.into_inner();
    for p in it {
        m = diamond_raw(&m, normal_form(p)?.matrix());
    }
    Ok(m)
}

/// Splitting numbers of M = path(τ) at ω; when a normal-form decomposition of M
/// is supplied the table value is cross-checked against the limit.
pub fn splitting_numbers(
    m: &Mat,
    omega: Omega,
    path: &SymplecticPath,
    parts: Option<&[NormalFormSpec]>,
) -> Result<SplittingPair> {
    if (path.end() - m).amax() > 1e-8 {
        return Err(Error::Validation("path does not end at the given matrix".into()));
    }
    let limit = splitting_by_limit(path, omega)?;
    if let Some(parts) = parts {
        let table = splitting_table(parts, omega)?;
        if table != limit {
            return Err(Error::Consistency(format!(
                "splitting at {omega}: table ({}, {}) vs limit ({}, {})",
                table.s_plus, table.s_minus, limit.s_plus, limit.s_minus
            )));
        }
    }
    Ok(limit)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCell {
    pub theta_start: f64,
    pub theta_end: f64,
    /// i_ω at the sample point of the cell
    pub index: i64,
    /// the same value rebuilt from i_1 and splitting numbers
    pub reconstructed: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaProfile {
    pub index_at_one: i64,
    /// angles in [0, 2π) where ν_ω > 0, with their splitting numbers
    pub crossings: Vec<(f64, SplittingPair)>,
    pub cells: Vec<ProfileCell>,
}

impl OmegaProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta_start,theta_end,index\n");
        for c in &self.cells {
            s.push_str(&format!("{},{},{}\n", c.theta_start, c.theta_end, c.index));
        }
        s
    }
}

/// θ ↦ i_{e^{iθ}}(γ) on `resolution` cells, evaluated directly and rebuilt from
/// i_1 and the splitting numbers at the unit eigenvalues of γ(τ); the two must agree.
pub fn omega_profile(path: &SymplecticPath, resolution: usize) -> Result<OmegaProfile> {
    if resolution < 8 {
        return Err(Error::Validation("profile resolution must be at least 8".into()));
    }
    let spectrum = unit_spectrum(path.end(), 1e-6);
    let mut crossings = Vec::new();
    for e in &spectrum.0 {
        let theta = e.angle();
        let w = if theta == 0.0 { Omega::ONE } else { Omega::approx_radians(theta, ANGLE_DENOMINATOR) };
        crossings.push((w.angle(), splitting_by_limit(path, w)?));
    }
    let index_at_one = i_nu_omega(path, Omega::ONE)?.index;
    let s_plus_one = crossings.iter().find(|(a, _)| *a == 0.0).map_or(0, |(_, s)| s.s_plus);
    let res = resolution as i64;
    let ks: Vec<i64> = (0..res).collect();
    let cells = crate::par::try_map(&ks, |&k| -> Result<ProfileCell> {
        let mut num = 2 * k + 1;
        let mut den = 2 * res;
        // keep the sample point away from eigen-angles
        while crossings.iter().any(|(a, _)| (a - TAU * num as f64 / den as f64).abs() < 1e-6) {
            num = 2 * num + 1;
            den *= 2;
        }
        let w = Omega::from_turns(num, den);
        let index = i_nu_omega(path, w)?.index;
        let theta = w.angle();
        let reconstructed = index_at_one
            + s_plus_one
            + crossings
                .iter()
                .filter(|(a, _)| *a > 0.0 && *a < theta)
                .map(|(_, s)| s.s_plus - s.s_minus)
                .sum::<i64>();
        if index != reconstructed {
            return Err(Error::Consistency(format!(
                "profile at θ = {theta}: direct {index}, reconstructed {reconstructed}"
            )));
        }
        Ok(ProfileCell {
            theta_start: TAU * k as f64 / res as f64,
            theta_end: TAU * (k + 1) as f64 / res as f64,
            index,
            reconstructed,
        })
    })?;
    Ok(OmegaProfile { index_at_one, crossings, cells })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaBoundReport {
    pub omega: Omega,
    pub lower: i64,
    pub index: i64,
    pub upper: i64,
    pub holds: bool,
}

/// i_1 + ν_1 − n ≤ i_ω ≤ i_1 + n − ν_ω
pub fn check_omega_bounds(path: &SymplecticPath, omega: Omega) -> Result<OmegaBoundReport> {
    if omega.is_one() {
        return Err(Error::Domain("ω must differ from 1".into()));
    }
    let n = path.n() as i64;
    let one = i_nu_omega(path, Omega::ONE)?;
    let w = i_nu_omega(path, omega)?;
    let lower = one.index + one.nullity as i64 - n;
    let upper = one.index + n - w.nullity as i64;
    Ok(OmegaBoundReport { omega, lower, index: w.index, upper, holds: lower <= w.index && w.index <= upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_periodic_indices() {
        let p = SymplecticPath::rotation(1, TAU);
        let r = i_nu_omega(&p, Omega::ONE).unwrap();
        assert_eq!((r.index, r.nullity), (1, 2));
        assert_eq!(i_nu_omega(&p, Omega::MINUS_ONE).unwrap().index, 2);
        assert_eq!(i_nu_omega(&p, Omega::from_turns(1, 3)).unwrap().index, 2);
    }

    #[test]
    fn identity_path_periodic_indices() {
        let p = SymplecticPath::identity(2, 1.0);
        assert_eq!(i_nu_omega(&p, Omega::ONE).unwrap().index, -2);
        assert_eq!(i_nu_omega(&p, Omega::I).unwrap().index, 0);
    }

    #[test]
    fn conjugate_symmetry() {
        let p = SymplecticPath::rotation(2, 4.0);
        for w in [Omega::from_turns(1, 5), Omega::from_turns(2, 7), Omega::I] {
            assert_eq!(i_nu_omega(&p, w).unwrap(), IndexRecord { omega: Some(w), ..i_nu_omega(&p, w.conj()).unwrap() });
        }
    }

    #[test]
    fn n2_triviality_detects_both_kinds() {
        let th = 1.0;
        let mk = |b1: f64, b2: f64, b3: f64| {
            let b4 = crate::symplectic::n2_b4(th, b1, b2, b3);
            normal_form(&NormalFormSpec::N2 { theta: th, b: [b1, b2, b3, b4] }).unwrap().into_inner()
        };
        let kinds: Vec<bool> = [(0.0, 1.0, -1.0), (0.0, -1.0, 1.0)].iter().map(|&(a, b, c)| n2_is_trivial(&mk(a, b, c))).collect();
        assert_ne!(kinds[0], kinds[1]);
    }

    #[test]
    fn table_for_rotation() {
        let r = NormalFormSpec::R { theta: 2.0 * PI / 3.0 };
        let w = Omega::from_turns(1, 3);
        assert_eq!(splitting_table(&[r.clone()], w).unwrap(), SplittingPair { omega: w, s_plus: 0, s_minus: 1 });
        assert_eq!(splitting_table(&[r], w.conj()).unwrap(), SplittingPair { omega: w.conj(), s_plus: 1, s_minus: 0 });
    }

    #[test]
    fn omega_bounds_on_rotation() {
        let r = check_omega_bounds(&SymplecticPath::rotation(1, TAU), Omega::MINUS_ONE).unwrap();
        assert!(r.holds);
        assert_eq!((r.lower, r.index, r.upper), (2, 2, 2));
    }

    fn check_table(parts: &[NormalFormSpec], omega: Omega) -> SplittingPair {
        let m = diamond_of(parts).unwrap();
        let path = crate::path::path_to(&m, 1.0, 512).unwrap();
        splitting_numbers(&m, omega, &path, Some(parts)).unwrap()
    }

    #[test]
    fn table_agrees_with_limit() {
        use NormalFormSpec::*;
        let s = |p: &[NormalFormSpec], w| {
            let r = check_table(p, w);
            (r.s_plus, r.s_minus)
        };
        assert_eq!(s(&[N1 { lambda: 1.0, b: 1.0 }], Omega::ONE), (1, 1));
        assert_eq!(s(&[N1 { lambda: 1.0, b: 0.0 }], Omega::ONE), (1, 1));
        assert_eq!(s(&[N1 { lambda: 1.0, b: -1.0 }], Omega::ONE), (0, 0));
        assert_eq!(s(&[N1 { lambda: -1.0, b: 1.0 }], Omega::MINUS_ONE), (0, 0));
        assert_eq!(s(&[N1 { lambda: -1.0, b: -1.0 }], Omega::MINUS_ONE), (1, 1));
        assert_eq!(s(&[R { theta: PI / 2.0 }], Omega::I), (0, 1));
        assert_eq!(s(&[R { theta: PI / 2.0 }], Omega::I.conj()), (1, 0));
        assert_eq!(s(&[D { lambda: 2.0 }], Omega::ONE), (0, 0));
        assert_eq!(
            s(&[R { theta: PI / 2.0 }, N1 { lambda: 1.0, b: 1.0 }, R { theta: PI / 2.0 }], Omega::I),
            (0, 2)
        );
    }

    #[test]
    fn n2_table_agrees_with_limit() {
        let th = 1.0;
        for (b1, b2, b3) in [(0.0, 1.0, -1.0), (0.0, -1.0, 1.0), (0.5, 0.3, -0.2)] {
            let b4 = crate::symplectic::n2_b4(th, b1, b2, b3);
            let parts = [NormalFormSpec::N2 { theta: th, b: [b1, b2, b3, b4] }];
            let w = Omega::approx_radians(th, ANGLE_DENOMINATOR);
            let r = check_table(&parts, w);
            assert_eq!(r.s_plus, r.s_minus);
        }
    }

    #[test]
    fn profile_reconstruction_matches() {
        let p = SymplecticPath::rotation(2, 4.0);
        let prof = omega_profile(&p, 360).unwrap();
        assert_eq!(prof.crossings.len(), 2);
        assert!(prof.cells.iter().all(|c| c.index == c.reconstructed));
        assert!(prof.to_csv().lines().count() == 361);
    }
}
