//! Intersection counts of Lagrangian paths in F = R^{2n} ⊕ R^{2n} (structure (−J) ⊕ J)
//! and the indices i_{L0}, i_{L1}, i_ω^{L0} built from them.
//!
//! A Lagrangian Λ with frame Z is represented by the unitary U = (Q₋*Z)(Q₊*Z)⁻¹,
//! Q± spanning the ±1 eigenspaces of i𝒥. Intersections of Λ_V and Λ_W are the
//! eigenvalue-1 directions of U_V*U_W, so the count is the net number of
//! eigenvalues passing 1, read off from the lifted phase of det(U_V*U_W) and the
//! eigen-angles at the two ends. Eigenvalues sitting at 1 at an end are pushed to
//! one side, which is the endpoint convention; the side and the orientation are
//! fixed by calibration against known indices.

use crate::angle::Omega;
use crate::error::{Error, Result};
use crate::path::SymplecticPath;
use crate::symplectic::{complexify, j_matrix, nu_lagrangian, rotation, CMat, Mat};
use nalgebra::{Complex, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

/// Eigen-angles of U_V*U_W closer than this to 0 (mod 2π) count as intersections.
pub const ANGLE_TOL: f64 = 1e-7;
const MAX_PHASE_STEP: f64 = 0.5;

/// 𝒥 = (−J) ⊕ J on R^{4n}
pub fn structure_f(n: usize) -> Mat {
    let j = j_matrix(n);
    let mut s = Mat::zeros(4 * n, 4 * n);
    s.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&(-&j));
    s.view_mut((2 * n, 2 * n), (2 * n, 2 * n)).copy_from(&j);
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianFrame {
    columns: CMat,
}

impl LagrangianFrame {
    pub fn new(columns: CMat) -> Result<Self> {
        let (r, c) = columns.shape();
        if r == 0 || r % 4 != 0 || c * 2 != r {
            return Err(Error::Dimension(format!("a Lagrangian frame in F needs 4n×2n columns, got {r}×{c}")));
        }
        let sv = columns.singular_values();
        if sv.min() <= 1e-10 * sv.max() {
            return Err(Error::Validation("frame columns are not independent".into()));
        }
        let f = LagrangianFrame { columns };
        if !f.is_isotropic(1e-10) {
            return Err(Error::Validation("frame is not isotropic".into()));
        }
        Ok(f)
    }

    pub fn real(columns: &Mat) -> Result<Self> {
        Self::new(complexify(columns))
    }

    /// Gr(M) = {(x, Mx)}
    pub fn graph(m: &Mat) -> Self {
        let d = m.nrows();
        let mut z = Mat::zeros(2 * d, d);
        z.view_mut((0, 0), (d, d)).fill_with_identity();
        z.view_mut((d, 0), (d, d)).copy_from(m);
        LagrangianFrame { columns: complexify(&z) }
    }

    /// L × L' from frames of L and L' in R^{2n}.
    pub fn product(l: &Mat, lp: &Mat) -> Self {
        let (d, n) = l.shape();
        let mut z = Mat::zeros(2 * d, 2 * n);
        z.view_mut((0, 0), (d, n)).copy_from(l);
        z.view_mut((d, n), (d, n)).copy_from(lp);
        LagrangianFrame { columns: complexify(&z) }
    }

    /// V₁ = L₀ × L₀
    pub fn v1(n: usize) -> Self {
        Self::product(&l0_frame(n), &l0_frame(n))
    }

    /// V₂ = L₁ × L₁
    pub fn v2(n: usize) -> Self {
        Self::product(&l1_frame(n), &l1_frame(n))
    }

    /// V_ω = L₀ × e^{θJ}L₀
    pub fn v_theta(n: usize, theta: f64) -> Self {
        Self::product(&l0_frame(n), &(rotation(n, theta) * l0_frame(n)))
    }

    /// Gr(ωI) = {(x, ωx)} in C^{4n}
    pub fn twisted_diagonal(n: usize, omega: Complex<f64>) -> Self {
        let d = 2 * n;
        let mut z = CMat::zeros(2 * d, d);
        for k in 0..d {
            z[(k, k)] = Complex::new(1.0, 0.0);
            z[(d + k, k)] = omega;
        }
        LagrangianFrame { columns: z }
    }

    pub fn columns(&self) -> &CMat {
        &self.columns
    }

    pub fn n(&self) -> usize {
        self.columns.nrows() / 4
    }

    /// Z*𝒥Z = 0 relative to ‖Z‖².
    pub fn is_isotropic(&self, tol: f64) -> bool {
        let s = complexify(&structure_f(self.n()));
        let g = self.columns.adjoint() * s * &self.columns;
        g.norm() <= tol * self.columns.norm_squared().max(1.0)
    }

    pub fn transform(&self, g: &CMat) -> Result<Self> {
        Self::new(g * &self.columns)
    }
}

/// Columns e_{n+1..2n}
pub fn l0_frame(n: usize) -> Mat {
    Mat::from_fn(2 * n, n, |i, k| if i == n + k { 1.0 } else { 0.0 })
}

/// Columns e_{1..n}
pub fn l1_frame(n: usize) -> Mat {
    Mat::from_fn(2 * n, n, |i, k| if i == k { 1.0 } else { 0.0 })
}

/// Adjoints of the bases Q₋, Q₊ of the −1 and +1 eigenspaces of i𝒥.
struct Souriau {
    qm_adj: CMat,
    qp_adj: CMat,
}

impl Souriau {
    fn new(n: usize) -> Self {
        let r = 1.0 / 2f64.sqrt();
        let mut qm = CMat::zeros(4 * n, 2 * n);
        for k in 0..n {
            qm[(k, k)] = Complex::new(r, 0.0);
            qm[(n + k, k)] = Complex::new(0.0, r);
            qm[(2 * n + k, n + k)] = Complex::new(r, 0.0);
            qm[(3 * n + k, n + k)] = Complex::new(0.0, -r);
        }
        let qp = qm.map(|z| z.conj());
        Souriau { qm_adj: qm.adjoint(), qp_adj: qp.adjoint() }
    }

    fn unitary(&self, z: &CMat) -> Result<CMat> {
        let a = &self.qm_adj * z;
        let b = &self.qp_adj * z;
        let binv = b.try_inverse().ok_or_else(|| Error::Validation("frame is not Lagrangian".into()))?;
        Ok(a * binv)
    }

    /// arg det(Q₋*Z) − arg det(Q₊*Z), modulo 2π
    fn phase(&self, z: &CMat) -> f64 {
        (&self.qm_adj * z).determinant().arg() - (&self.qp_adj * z).determinant().arg()
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// det((b − c) + i(a + d)) for M = [[a, b], [c, d]]; the Souriau phase of Gr(M) is
/// twice its argument.
fn graph_det(m: &Mat) -> Complex<f64> {
    let n = m.nrows() / 2;
    let z = CMat::from_fn(n, n, |i, k| {
        Complex::new(m[(i, n + k)] - m[(n + i, k)], m[(i, k)] + m[(n + i, n + k)])
    });
    z.determinant()
}

fn graph_increment(d0: Complex<f64>, d1: Complex<f64>) -> f64 {
    2.0 * (d1 * d0.conj()).arg()
}

/// Phase increment of Gr(γ) over [t0, t1], subdividing until every step is small.
fn resolved_increment(path: &SymplecticPath, t0: f64, d0: Complex<f64>, t1: f64, d1: Complex<f64>, depth: u32) -> Result<f64> {
    let inc = graph_increment(d0, d1);
    if inc.abs() <= MAX_PHASE_STEP {
        return Ok(inc);
    }
    if depth == 0 {
        return Err(Error::PhaseResolution { t: t0, step: inc.abs() });
    }
    let tm = 0.5 * (t0 + t1);
    let dm = graph_det(&path.eval(tm));
    Ok(resolved_increment(path, t0, d0, tm, dm, depth - 1)? + resolved_increment(path, tm, dm, t1, d1, depth - 1)?)
}

/// Lifted Souriau phase of Gr(γ(t_k)) relative to t_0, cached on the path.
pub(crate) fn cumulative_phase(path: &SymplecticPath) -> Result<&[f64]> {
    if let Some(p) = path.phase.get() {
        return Ok(p);
    }
    let dets: Vec<Complex<f64>> = path.samples().iter().map(graph_det).collect();
    let mut acc = Vec::with_capacity(dets.len());
    acc.push(0.0);
    let g = path.grid();
    for k in 0..dets.len() - 1 {
        let inc = resolved_increment(path, g[k], dets[k], g[k + 1], dets[k + 1], 16)?;
        acc.push(acc[k] + inc);
    }
    Ok(path.phase.get_or_init(|| acc))
}

/// Eigen-angles of U_V*U_W in [0, 2π).
fn eigen_angles(uv: &CMat, uw: &CMat) -> Result<Vec<f64>> {
    let m = uv.adjoint() * uw;
    let ev = Schur::new(m)
        .eigenvalues()
        .ok_or_else(|| Error::Consistency("Schur form did not converge".into()))?;
    Ok(ev.iter().map(|z| z.arg().rem_euclid(TAU)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// eigenvalues at 1 at an end are pushed to angle 0⁺
    Plus,
    /// pushed to 2π⁻
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convention {
    pub orientation: i64,
    pub side: Side,
}

/// Integer data of one count: net winding of the eigenvalues through 1 with raw
/// end angles, and the numbers of end eigenvalues within tolerance of angle 0 and
/// of 2π at the start and the end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawCount {
    pub winding: i64,
    pub near_zero: (usize, usize),
    pub near_full: (usize, usize),
}

impl RawCount {
    pub fn mu(&self, c: Convention) -> i64 {
        let per_side = match c.side {
            Side::Plus => self.winding + self.near_full.1 as i64 - self.near_full.0 as i64,
            Side::Minus => self.winding - self.near_zero.1 as i64 + self.near_zero.0 as i64,
        };
        c.orientation * per_side
    }

    /// dim(V ∩ W) at the end of the interval.
    pub fn end_nullity(&self) -> usize {
        self.near_zero.1 + self.near_full.1
    }
}

fn classify(angles: &[f64]) -> (usize, usize) {
    let zero = angles.iter().filter(|&&a| a < ANGLE_TOL).count();
    let full = angles.iter().filter(|&&a| a > TAU - ANGLE_TOL).count();
    (zero, full)
}

fn assemble(phi_change: f64, angles_a: &[f64], angles_b: &[f64]) -> Result<RawCount> {
    let sa: f64 = angles_a.iter().sum();
    let sb: f64 = angles_b.iter().sum();
    let x = (sa + phi_change - sb) / TAU;
    let w = x.round();
    if (x - w).abs() > 1e-4 {
        return Err(Error::Consistency(format!("phase winding {x} is not an integer")));
    }
    let (za, fa) = classify(angles_a);
    let (zb, fb) = classify(angles_b);
    Ok(RawCount { winding: w as i64, near_zero: (za, zb), near_full: (fa, fb) })
}

/// Raw count of (V, Gr(γ)) over the samples with index in [i0, i1].
pub fn raw_count_graph(v: &LagrangianFrame, path: &SymplecticPath, i0: usize, i1: usize) -> Result<RawCount> {
    let n = path.n();
    if v.n() != n {
        return Err(Error::Dimension("frame and path differ in dimension".into()));
    }
    let phase = cumulative_phase(path)?;
    let s = Souriau::new(n);
    let uv = s.unitary(v.columns())?;
    let ua = s.unitary(LagrangianFrame::graph(&path.samples()[i0]).columns())?;
    let ub = s.unitary(LagrangianFrame::graph(&path.samples()[i1]).columns())?;
    assemble(phase[i1] - phase[i0], &eigen_angles(&uv, &ua)?, &eigen_angles(&uv, &ub)?)
}

/// Raw count of (V, W(t)) for an arbitrary sampled frame path.
pub fn raw_count_frames(v: &LagrangianFrame, frames: &[LagrangianFrame]) -> Result<RawCount> {
    let s = Souriau::new(v.n());
    let mut change = 0.0;
    for w in frames.windows(2) {
        let inc = wrap(s.phase(w[1].columns()) - s.phase(w[0].columns()));
        if inc.abs() > MAX_PHASE_STEP {
            return Err(Error::PhaseResolution { t: f64::NAN, step: inc.abs() });
        }
        change += inc;
    }
    let uv = s.unitary(v.columns())?;
    let ua = s.unitary(frames[0].columns())?;
    let ub = s.unitary(frames.last().unwrap().columns())?;
    assemble(change, &eigen_angles(&uv, &ua)?, &eigen_angles(&uv, &ub)?)
}

/// All four sign conventions; exactly one reproduces the anchors.
pub fn candidate_conventions() -> [Convention; 4] {
    [
        Convention { orientation: 1, side: Side::Plus },
        Convention { orientation: 1, side: Side::Minus },
        Convention { orientation: -1, side: Side::Plus },
        Convention { orientation: -1, side: Side::Minus },
    ]
}

/// Selects the convention with i_{L0}(I) = −n, i_{L0}(e^{tJ}|[0,2π]) = 1 and
/// i_{L0}(e^{tJ}|[0,π/2]) = 0, the last being the positive-generator rule
/// i_{L0} = Σ_{0<s<τ} ν_{L0}(γ(s)).
pub fn calibrate() -> Result<Convention> {
    let anchors = [
        (SymplecticPath::identity(1, 1.0), -1),
        (SymplecticPath::rotation(1, TAU), 1),
        (SymplecticPath::rotation(1, PI / 2.0), 0),
    ];
    let v = LagrangianFrame::v1(1);
    let raws = anchors
        .iter()
        .map(|(p, _)| raw_count_graph(&v, p, 0, p.samples().len() - 1))
        .collect::<Result<Vec<_>>>()?;
    let passing: Vec<Convention> = candidate_conventions()
        .into_iter()
        .filter(|c| raws.iter().zip(&anchors).all(|(r, (_, want))| r.mu(*c) - 1 == *want))
        .collect();
    match passing.as_slice() {
        [c] => Ok(*c),
        _ => Err(Error::Consistency(format!("{} conventions reproduce the anchor indices", passing.len()))),
    }
}

/// The calibrated convention, established once per process.
pub fn convention() -> Convention {
    static CONV: OnceLock<Convention> = OnceLock::new();
    *CONV.get_or_init(|| calibrate().expect("intersection-count calibration failed"))
}

/// μ^CLM(V, Gr(γ)) over the whole path.
pub fn mu_clm(v: &LagrangianFrame, path: &SymplecticPath) -> Result<i64> {
    mu_clm_range(v, path, 0, path.samples().len() - 1)
}

/// μ^CLM(V, Gr(γ)) over [t_{i0}, t_{i1}].
pub fn mu_clm_range(v: &LagrangianFrame, path: &SymplecticPath, i0: usize, i1: usize) -> Result<i64> {
    Ok(raw_count_graph(v, path, i0, i1)?.mu(convention()))
}

pub fn mu_clm_frames(v: &LagrangianFrame, frames: &[LagrangianFrame]) -> Result<i64> {
    Ok(raw_count_frames(v, frames)?.mu(convention()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    L0,
    L1,
    #[serde(rename = "omegaL0")]
    OmegaL0,
    #[serde(rename = "periodic")]
    PeriodicOmega,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub family: Family,
    pub omega: Option<Omega>,
    pub index: i64,
    pub nullity: usize,
}

impl IndexRecord {
    pub fn sum(&self) -> i64 {
        self.index + self.nullity as i64
    }
}

/// (i_{L_j}(γ), ν_{L_j}(γ)) = (μ(V_{j+1}, Gr γ) − n, dim γ(τ)L_j ∩ L_j)
pub fn i_l(path: &SymplecticPath, j: u8) -> Result<IndexRecord> {
    let n = path.n();
    let (v, family) = match j {
        0 => (LagrangianFrame::v1(n), Family::L0),
        1 => (LagrangianFrame::v2(n), Family::L1),
        _ => return Err(Error::Domain(format!("boundary index j must be 0 or 1, got {j}"))),
    };
    let index = mu_clm(&v, path)? - n as i64;
    Ok(IndexRecord { family, omega: None, index, nullity: nu_lagrangian(path.end(), j) })
}

/// dim(γ(τ)L₀ ∩ e^{θJ}L₀)
pub fn nu_omega_l0(m: &Mat, theta: f64) -> usize {
    let n = m.nrows() / 2;
    nu_lagrangian(&(rotation(n, -theta) * m), 0)
}

/// (i_ω^{L0}(γ), ν_ω^{L0}(γ)) for ω = e^{iθ}, θ ∈ (0, π).
pub fn i_omega_l0(path: &SymplecticPath, theta: f64) -> Result<IndexRecord> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("θ = {theta} is outside (0, π)")));
    }
    let n = path.n();
    let index = mu_clm(&LagrangianFrame::v_theta(n, theta), path)?;
    Ok(IndexRecord {
        family: Family::OmegaL0,
        omega: Some(Omega::approx_radians(theta, 1 << 20)),
        index,
        nullity: nu_omega_l0(path.end(), theta),
    })
}

/// i_{√−1}^{L0}
pub fn i_sqrt_l0(path: &SymplecticPath) -> Result<IndexRecord> {
    let mut r = i_omega_l0(path, PI / 2.0)?;
    r.omega = Some(Omega::I);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Location {
    Interior,
    LeftEndpoint,
    RightEndpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub t: f64,
    pub dimension: usize,
    /// (m⁺, m⁰, m⁻)
    pub form_signature: (usize, usize, usize),
    pub location: Location,
}

fn orthonormal(z: &CMat) -> CMat {
    z.clone().qr().q()
}

fn overlap_singular_values(qv: &CMat, m: &Mat) -> Vec<f64> {
    let qw = orthonormal(LagrangianFrame::graph(m).columns());
    let d = qv.nrows();
    let mut a = CMat::zeros(d, d);
    a.view_mut((0, 0), (d, d / 2)).copy_from(qv);
    a.view_mut((0, d / 2), (d, d / 2)).copy_from(&qw);
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

const CROSSING_TOL: f64 = 1e-6;

/// Crossing form y ↦ y*B̃y on V ∩ Gr(γ(t)), B̃ = sym(−Jγ̇γ⁻¹), with γ̇ by finite
/// differences.
fn crossing_form(v: &LagrangianFrame, path: &SymplecticPath, t: f64, location: Location) -> Result<CrossingEvent> {
    let n = path.n();
    let d = 2 * n;
    let tau = path.tau();
    let h = 1e-6 * tau;
    let g = path.eval(t);
    let gdot = match location {
        Location::Interior => (path.eval(t + h) - path.eval(t - h)) / (2.0 * h),
        Location::LeftEndpoint => (path.eval(t + h) * 4.0 - path.eval(t + 2.0 * h) - &g * 3.0) / (2.0 * h),
        Location::RightEndpoint => (&g * 3.0 - path.eval(t - h) * 4.0 + path.eval(t - 2.0 * h)) / (2.0 * h),
    };
    let j = j_matrix(n);
    let ginv = -(&j * g.transpose() * &j);
    let bt = -(&j * gdot * ginv);
    let bt = (&bt + bt.transpose()) * 0.5;
    // null vectors of [Z_V, −Z_W]
    let zw = LagrangianFrame::graph(&g).columns().clone();
    let zv = v.columns();
    let mut a = CMat::zeros(2 * d, 2 * d);
    a.view_mut((0, 0), (2 * d, d)).copy_from(zv);
    a.view_mut((0, d), (2 * d, d)).copy_from(&(-&zw));
    let scale = zv.norm().max(zw.norm());
    let svd = a.svd(false, true);
    let vt = svd.v_t.unwrap();
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= CROSSING_TOL * scale)
        .collect();
    let dim = null.len();
    let mut y = CMat::zeros(d, dim);
    for (c, &i) in null.iter().enumerate() {
        let coeff = vt.row(i).adjoint();
        let x = coeff.rows(d, d).into_owned();
        let gx = complexify(&g) * x;
        y.set_column(c, &gx);
    }
    let form = y.adjoint() * complexify(&bt) * &y;
    let form = (&form + form.adjoint()) * Complex::new(0.5, 0.0);
    let ev = SymmetricEigen::new(form).eigenvalues;
    let zero = 1e-6 * bt.norm().max(1.0) * y.norm_squared().max(1.0);
    let plus = ev.iter().filter(|&&l| l > zero).count();
    let minus = ev.iter().filter(|&&l| l < -zero).count();
    Ok(CrossingEvent { t, dimension: dim, form_signature: (plus, dim - plus - minus, minus), location })
}

/// Crossings of (V, Gr(γ)): local minima of the smallest overlap singular value,
/// refined by golden-section search to 1e-10.
pub fn crossing_events(v: &LagrangianFrame, path: &SymplecticPath) -> Result<Vec<CrossingEvent>> {
    let qv = orthonormal(v.columns());
    let grid = path.grid();
    let smin: Vec<f64> = path.samples().iter().map(|m| overlap_singular_values(&qv, m)[0]).collect();
    let last = grid.len() - 1;
    let mut events = Vec::new();
    if smin[0] < CROSSING_TOL {
        events.push(crossing_form(v, path, 0.0, Location::LeftEndpoint)?);
    }
    for k in 1..last {
        if !(smin[k] <= smin[k - 1] && smin[k] < smin[k + 1] && smin[k] < 0.2) {
            continue;
        }
        let f = |t: f64| overlap_singular_values(&qv, &path.eval(t))[0];
        let (mut a, mut b) = (grid[k - 1], grid[k + 1]);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        let (mut c, mut e) = (b - gr * (b - a), a + gr * (b - a));
        let (mut fc, mut fe) = (f(c), f(e));
        while b - a > 1e-10 {
            if fc < fe {
                b = e;
                e = c;
                fe = fc;
                c = b - gr * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + gr * (b - a);
                fe = f(e);
            }
        }
        let t = 0.5 * (a + b);
        if f(t) < CROSSING_TOL && t > grid[0] + 1e-9 && t < grid[last] - 1e-9 {
            let ev = crossing_form(v, path, t, Location::Interior)?;
            if ev.form_signature.1 > 0 {
                return Err(Error::DegenerateCrossing { t, dimension: ev.dimension });
            }
            events.push(ev);
        }
    }
    if smin[last] < CROSSING_TOL {
        events.push(crossing_form(v, path, grid[last], Location::RightEndpoint)?);
    }
    Ok(events)
}

/// Σ_left m⁺ + Σ_interior (m⁺ − m⁻) − Σ_right m⁻ over regular crossings.
pub fn mu_by_crossings(v: &LagrangianFrame, path: &SymplecticPath) -> Result<i64> {
    let events = crossing_events(v, path)?;
    let mut mu = 0i64;
    for e in events {
        let (p, z, m) = e.form_signature;
        if z > 0 {
            return Err(Error::DegenerateCrossing { t: e.t, dimension: e.dimension });
        }
        mu += match e.location {
            Location::LeftEndpoint => p as i64,
            Location::Interior => p as i64 - m as i64,
            Location::RightEndpoint => -(m as i64),
        };
    }
    Ok(mu)
}
