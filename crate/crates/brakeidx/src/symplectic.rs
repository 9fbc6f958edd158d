//! Standard structures on R^{2n}, symplecticity, the ⋄-product, basic normal forms,
//! nullities and the unit-circle part of the spectrum.

use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;

/// Relative singular-value threshold for kernel dimensions.
pub const NULLITY_TOL: f64 = 1e-8;
/// Normalized drift allowed for a matrix to count as symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// J = [[0, −I], [I, 0]]
pub fn j_matrix(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = -1.0;
        j[(n + k, k)] = 1.0;
    }
    j
}

/// N = [[−I, 0], [0, I]]
pub fn n_matrix(n: usize) -> Mat {
    let mut m = Mat::identity(2 * n, 2 * n);
    for k in 0..n {
        m[(k, k)] = -1.0;
    }
    m
}

pub fn structures(n: usize) -> (Mat, Mat) {
    (j_matrix(n), n_matrix(n))
}

/// e^{θJ} = cos θ I + sin θ J
pub fn rotation(n: usize, theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::identity(2 * n, 2 * n) * c + j_matrix(n) * s
}

pub fn half_dim(m: &Mat) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!("order {} is not a positive even number", m.nrows())));
    }
    Ok(m.nrows() / 2)
}

/// ‖MᵀJM − J‖_F
pub fn symplectic_defect(m: &Mat) -> Result<f64> {
    let n = half_dim(m)?;
    let j = j_matrix(n);
    Ok((m.transpose() * &j * m - j).norm())
}

pub fn is_symplectic(m: &Mat, tol: f64) -> Result<bool> {
    Ok(symplectic_defect(m)? <= tol)
}

/// Drift normalized by ‖M‖_F², the scale-free form used for validation.
pub fn relative_defect(m: &Mat) -> Result<f64> {
    let s = m.norm_squared().max(1.0);
    Ok(symplectic_defect(m)? / s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct SymplecticMatrix(Mat);

impl SymplecticMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        let d = relative_defect(&m)?;
        if d > SYMPLECTIC_TOL {
            return Err(Error::Validation(format!("matrix is not symplectic (normalized defect {d:.3e})")));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > 1e-6 * det.abs().max(1.0) {
            return Err(Error::Validation(format!("determinant {det} differs from 1")));
        }
        Ok(SymplecticMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix(Mat::identity(2 * n, 2 * n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }

    /// M⁻¹ = −J Mᵀ J
    pub fn inverse(&self) -> Self {
        let j = j_matrix(self.n());
        SymplecticMatrix(-(&j * self.0.transpose() * &j))
    }

    pub fn mul(&self, other: &SymplecticMatrix) -> Self {
        SymplecticMatrix(&self.0 * &other.0)
    }
}

/// External matrix format `{"n": .., "rows": [[..], ..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl MatrixLiteral {
    pub fn from_matrix(m: &Mat) -> Self {
        MatrixLiteral {
            n: m.nrows() / 2,
            rows: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        let d = 2 * self.n;
        if self.rows.len() != d || self.rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension(format!("expected {d}x{d} rows for n = {}", self.n)));
        }
        Ok(Mat::from_fn(d, d, |i, j| self.rows[i][j]))
    }
}

impl TryFrom<MatrixLiteral> for SymplecticMatrix {
    type Error = Error;
    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        SymplecticMatrix::new(lit.to_matrix()?)
    }
}

impl From<SymplecticMatrix> for MatrixLiteral {
    fn from(m: SymplecticMatrix) -> Self {
        MatrixLiteral::from_matrix(&m.0)
    }
}

/// Interleave two block matrices [[A,B],[C,D]] of half-orders n1, n2 into
/// [[A1,0,B1,0],[0,A2,0,B2],[C1,0,D1,0],[0,C2,0,D2]].
pub fn diamond_raw(m1: &Mat, m2: &Mat) -> Mat {
    let (n1, n2) = (m1.nrows() / 2, m2.nrows() / 2);
    let n = n1 + n2;
    let mut out = Mat::zeros(2 * n, 2 * n);
    for bi in 0..2 {
        for bj in 0..2 {
            for i in 0..n1 {
                for j in 0..n1 {
                    out[(bi * n + i, bj * n + j)] = m1[(bi * n1 + i, bj * n1 + j)];
                }
            }
            for i in 0..n2 {
                for j in 0..n2 {
                    out[(bi * n + n1 + i, bj * n + n1 + j)] = m2[(bi * n2 + i, bj * n2 + j)];
                }
            }
        }
    }
    out
}

pub fn diamond(m1: &SymplecticMatrix, m2: &SymplecticMatrix) -> SymplecticMatrix {
    SymplecticMatrix(diamond_raw(&m1.0, &m2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NormalFormSpec {
    /// diag(λ, 1/λ), λ = ±2
    D { lambda: f64 },
    /// [[λ, b], [0, λ]], λ = ±1
    N1 { lambda: f64, b: f64 },
    /// rotation by θ ∈ (0,π)∪(π,2π)
    R { theta: f64 },
    /// [[R(θ), b], [0, R(θ)]] with b = [[b1, b2], [b3, b4]], b2 ≠ b3
    N2 { theta: f64, b: [f64; 4] },
}

/// R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]
pub fn r2(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

fn in_rotation_range(theta: f64) -> bool {
    let eps = 1e-12;
    theta > eps && theta < 2.0 * PI - eps && (theta - PI).abs() > eps
}

/// Solve the symplecticity constraint of N2 for b4: cos θ (b2 − b3) = −sin θ (b1 + b4).
pub fn n2_b4(theta: f64, b1: f64, b2: f64, b3: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -c * (b2 - b3) / s - b1
}

pub fn normal_form(spec: &NormalFormSpec) -> Result<SymplecticMatrix> {
    let m = match *spec {
        NormalFormSpec::D { lambda } => {
            if (lambda.abs() - 2.0).abs() > 1e-12 {
                return Err(Error::Validation(format!("D(λ) needs λ = ±2, got {lambda}")));
            }
            Mat::from_row_slice(2, 2, &[lambda, 0.0, 0.0, 1.0 / lambda])
        }
        NormalFormSpec::N1 { lambda, b } => {
            if (lambda.abs() - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!("N1(λ,b) needs λ = ±1, got {lambda}")));
            }
            Mat::from_row_slice(2, 2, &[lambda, b, 0.0, lambda])
        }
        NormalFormSpec::R { theta } => {
            if !in_rotation_range(theta) {
                return Err(Error::Validation(format!("R(θ) needs θ in (0,π)∪(π,2π), got {theta}")));
            }
            r2(theta)
        }
        NormalFormSpec::N2 { theta, b } => {
            if !in_rotation_range(theta) {
                return Err(Error::Validation(format!("N2 needs θ in (0,π)∪(π,2π), got {theta}")));
            }
            if (b[1] - b[2]).abs() < 1e-12 {
                return Err(Error::Validation("N2 needs b2 ≠ b3".into()));
            }
            let r = r2(theta);
            let mut m = Mat::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&r);
            m.view_mut((2, 2), (2, 2)).copy_from(&r);
            m.view_mut((0, 2), (2, 2)).copy_from(&Mat::from_row_slice(2, 2, &b));
            m
        }
    };
    SymplecticMatrix::new(m)
}

/// Number of singular values at or below `tol·scale`.
pub fn small_singular_values(sv: impl Iterator<Item = f64>, tol: f64, scale: f64) -> usize {
    sv.filter(|&s| s <= tol * scale.max(1.0)).count()
}

pub fn complexify(m: &Mat) -> CMat {
    m.map(|x| Complex::new(x, 0.0))
}

/// dim_C ker(M − ωI), capped by the number of eigenvalues within 1e−4 of ω so
/// that small singular values of an ill-conditioned M − ωI are not miscounted.
pub fn nu_omega_tol(m: &Mat, omega: Complex<f64>, tol: f64) -> usize {
    let d = m.nrows();
    let near = m.clone().complex_eigenvalues().iter().filter(|z| (*z - omega).norm() < 1e-4).count();
    if near == 0 {
        return 0;
    }
    let a = complexify(m) - CMat::identity(d, d) * omega;
    let sv = a.singular_values();
    let scale = sv.max();
    small_singular_values(sv.iter().copied(), tol, scale).min(near)
}

pub fn nu_omega(m: &Mat, omega: Complex<f64>) -> Result<usize> {
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("|ω| = {} is not 1", omega.norm())));
    }
    half_dim(m)?;
    Ok(nu_omega_tol(m, omega, NULLITY_TOL))
}

pub fn rank_tol(m: &Mat, tol: f64, scale: f64) -> usize {
    let sv = m.singular_values();
    sv.len() - small_singular_values(sv.iter().copied(), tol, scale)
}

/// Sines of principal angles below this count as intersections of M L_j with L_j.
pub const ANGLE_NULLITY_TOL: f64 = 1e-7;

/// dim(M L_j ∩ L_j), from the principal angles between the orthonormalized
/// image frame and L_j.
pub fn nu_lagrangian(m: &Mat, j: u8) -> usize {
    let n = m.nrows() / 2;
    let (frame, off) = match j {
        0 => (m.columns(n, n).into_owned(), 0),
        _ => (m.columns(0, n).into_owned(), n),
    };
    let u = frame.svd(true, false).u.expect("left singular vectors");
    let across = u.rows(off, n).into_owned();
    across.singular_values().iter().filter(|&&s| s <= ANGLE_NULLITY_TOL).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitEigen {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub nullity: usize,
}

impl UnitEigen {
    pub fn angle(&self) -> f64 {
        self.im.atan2(self.re).rem_euclid(2.0 * PI)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSpectrum(pub Vec<UnitEigen>);

/// Unit-circle eigenvalues grouped into clusters, sorted by angle in [0, 2π).
pub fn unit_spectrum(m: &Mat, tol: f64) -> UnitSpectrum {
    let ev = m.clone().complex_eigenvalues();
    let mut unit: Vec<Complex<f64>> = ev.iter().copied().filter(|z| (z.norm() - 1.0).abs() <= tol).collect();
    let angle = |z: &Complex<f64>| {
        let a = z.im.atan2(z.re).rem_euclid(2.0 * PI);
        if a > 2.0 * PI - 1e-9 { 0.0 } else { a }
    };
    unit.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    let cluster = 1e-4_f64.max(tol);
    let mut groups: Vec<Vec<Complex<f64>>> = Vec::new();
    for z in unit {
        match groups.last_mut() {
            Some(g) if (g[0] - z).norm() < cluster => g.push(z),
            _ => groups.push(vec![z]),
        }
    }
    if groups.len() > 1 {
        let first = groups[0][0];
        if (groups.last().unwrap()[0] - first).norm() < cluster {
            let last = groups.pop().unwrap();
            groups[0].extend(last);
        }
    }
    let out = groups
        .into_iter()
        .map(|g| {
            let mean: Complex<f64> = g.iter().sum::<Complex<f64>>() / g.len() as f64;
            let mut w = mean / mean.norm();
            for real in [1.0, -1.0] {
                if (w.re - real).abs() < cluster {
                    w = Complex::new(real, 0.0);
                }
            }
            UnitEigen { re: w.re, im: w.im, multiplicity: g.len(), nullity: nu_omega_tol(m, w, 1e-6) }
        })
        .collect();
    UnitSpectrum(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn structures_n1() {
        let (j, n) = structures(1);
        assert_eq!(j, Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert_eq!(n, Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
        assert_eq!(&j * &j, -Mat::identity(2, 2));
    }

    #[test]
    fn structures_anticommute() {
        for n in 1..=4 {
            let (j, nm) = structures(n);
            assert_eq!(&nm * &j * &nm, -j.clone());
            assert_eq!(&nm * &nm, Mat::identity(2 * n, 2 * n));
        }
    }

    #[test]
    fn symplectic_membership() {
        assert!(is_symplectic(&Mat::identity(4, 4), 1e-12).unwrap());
        assert!(is_symplectic(&r2(0.7), 1e-12).unwrap());
        assert!(!is_symplectic(&Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]), 1e-9).unwrap());
        assert!(matches!(is_symplectic(&Mat::identity(3, 3), 1e-9), Err(Error::Dimension(_))));
    }

    #[test]
    fn diamond_blocks() {
        let i2 = SymplecticMatrix::identity(1);
        assert_eq!(diamond(&i2, &i2).matrix(), &Mat::identity(4, 4));
        let a = normal_form(&NormalFormSpec::N1 { lambda: 1.0, b: 1.0 }).unwrap();
        let b = normal_form(&NormalFormSpec::N1 { lambda: 1.0, b: -1.0 }).unwrap();
        let d = diamond(&a, &b);
        let expect = Mat::from_row_slice(
            4,
            4,
            &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        );
        assert_eq!(d.matrix(), &expect);
        assert!(SymplecticMatrix::new(d.into_inner()).is_ok());
    }

    #[test]
    fn normal_forms() {
        let r = normal_form(&NormalFormSpec::R { theta: PI / 2.0 }).unwrap();
        assert!(close(r.matrix(), &Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]), 1e-15));
        let d = normal_form(&NormalFormSpec::D { lambda: 2.0 }).unwrap();
        assert_eq!(d.matrix(), &Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]));
        let n1 = normal_form(&NormalFormSpec::N1 { lambda: 1.0, b: -1.0 }).unwrap();
        assert_eq!(n1.matrix(), &Mat::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0]));
        assert!(normal_form(&NormalFormSpec::D { lambda: 3.0 }).is_err());
        assert!(normal_form(&NormalFormSpec::R { theta: PI }).is_err());
        assert!(normal_form(&NormalFormSpec::N2 { theta: 1.0, b: [1.0, 2.0, 2.0, 0.0] }).is_err());
        let th = 1.1;
        let b4 = n2_b4(th, 0.3, 1.0, -0.5);
        assert!(normal_form(&NormalFormSpec::N2 { theta: th, b: [0.3, 1.0, -0.5, b4] }).is_ok());
    }

    #[test]
    fn nullities() {
        let one = Complex::new(1.0, 0.0);
        assert_eq!(nu_omega(&Mat::identity(4, 4), one).unwrap(), 4);
        let n1 = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(nu_omega(&n1, one).unwrap(), 1);
        let w = Complex::new((PI / 3.0).cos(), (PI / 3.0).sin());
        assert_eq!(nu_omega(&r2(PI / 3.0), w).unwrap(), 1);
        assert_eq!(nu_omega(&r2(PI / 3.0), w.conj()).unwrap(), 1);
        assert_eq!(nu_omega(&r2(PI / 3.0), one).unwrap(), 0);
    }

    #[test]
    fn lagrangian_nullities() {
        assert_eq!(nu_lagrangian(&Mat::identity(6, 6), 0), 3);
        assert_eq!(nu_lagrangian(&r2(PI / 2.0), 0), 0);
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.7, 1.0]);
        assert_eq!(nu_lagrangian(&m, 0), 1);
        assert_eq!(nu_lagrangian(&m, 1), 0);
    }

    #[test]
    fn spectrum_examples() {
        let s = unit_spectrum(&r2(1.0), 1e-9);
        assert_eq!(s.0.len(), 2);
        assert!((s.0[0].angle() - 1.0).abs() < 1e-12 && s.0[0].multiplicity == 1 && s.0[0].nullity == 1);
        assert!((s.0[1].angle() - (2.0 * PI - 1.0)).abs() < 1e-12);
        assert!(unit_spectrum(&Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]), 1e-9).0.is_empty());
        let s = unit_spectrum(&Mat::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]), 1e-6);
        assert_eq!(s.0, vec![UnitEigen { re: -1.0, im: 0.0, multiplicity: 2, nullity: 1 }]);
    }

    #[test]
    fn inverse_is_inverse() {
        let m = SymplecticMatrix::new(diamond_raw(&r2(0.3), &Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]))).unwrap();
        assert!(close(&(m.matrix() * m.inverse().matrix()), &Mat::identity(4, 4), 1e-12));
    }

    #[test]
    fn json_literal_round_trip() {
        let m = SymplecticMatrix::new(r2(0.4)).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: SymplecticMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SymplecticMatrix>(r#"{"n":1,"rows":[[2,0],[0,1]]}"#).is_err());
    }
}
