//! Reversible Hamiltonians, brake orbits found by shooting from L₀, minimal
//! periods, orbit indices and spot checks of the minimal-period bounds.
//!
//! With J = [[0, −I], [I, 0]] the brake condition x(−t) = Nx(t) puts x(0) and
//! x(T/2) on L₀ = {x₁ = 0}; the shooting unknown is q₀ with x(0) = (0, q₀) and the
//! residual is x₁(T/2).

use crate::angle::Omega;
use crate::error::{Error, Result};
use crate::galerkin::{index_from_galerkin, GalerkinFamily};
use crate::iteration::iterate_brake;
use crate::lagrangian::{i_l, i_sqrt_l0, IndexRecord};
use crate::omega::i_nu_omega;
use crate::path::{fundamental_solution_auto, CoefficientPath, SymplecticPath};
use crate::symplectic::{j_matrix, n_matrix, Mat};
use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type Vector = DVector<f64>;

const NEWTON_STEPS: usize = 50;
/// a solution that moves less than this fraction of its amplitude is treated as constant
const MOTION_TOL: f64 = 1e-3;
pub const RESIDUAL_TOL: f64 = 1e-10;
const TRIVIAL_TOL: f64 = 1e-8;
const MAX_PERIOD_RATIO: usize = 64;
const PERIOD_TOL: f64 = 1e-6;
const SYMMETRY_TOL: f64 = 1e-7;
const HYPOTHESIS_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    /// exponents of x₁, …, x₂ₙ
    pub powers: Vec<u32>,
}

impl Monomial {
    fn value(&self, x: &Vector) -> f64 {
        self.powers.iter().enumerate().fold(self.coef, |acc, (i, &p)| acc * x[i].powi(p as i32))
    }

    fn derivative(&self, i: usize) -> Option<Monomial> {
        let p = self.powers[i];
        if p == 0 || self.coef == 0.0 {
            return None;
        }
        let mut powers = self.powers.clone();
        powers[i] -= 1;
        Some(Monomial { coef: self.coef * p as f64, powers })
    }
}

/// A polynomial with its gradient and Hessian differentiated symbolically.
#[derive(Clone, Debug)]
struct Polynomial {
    terms: Vec<Monomial>,
    grad: Vec<Vec<Monomial>>,
    hess: Vec<Vec<Vec<Monomial>>>,
}

impl Polynomial {
    fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        if terms.iter().any(|t| t.powers.len() != dim) {
            return Err(Error::Dimension(format!("every monomial needs {dim} exponents")));
        }
        let diff = |ts: &[Monomial], i: usize| -> Vec<Monomial> { ts.iter().filter_map(|t| t.derivative(i)).collect() };
        let grad: Vec<Vec<Monomial>> = (0..dim).map(|i| diff(&terms, i)).collect();
        let hess = grad.iter().map(|g| (0..dim).map(|j| diff(g, j)).collect()).collect();
        Ok(Polynomial { terms, grad, hess })
    }

    fn sum(ts: &[Monomial], x: &Vector) -> f64 {
        ts.iter().map(|t| t.value(x)).sum()
    }
}

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&Vector) -> Vector + Send + Sync;
type HessianFn = dyn Fn(&Vector) -> Mat + Send + Sync;

#[derive(Clone)]
enum Evaluator {
    Polynomial(Polynomial),
    Custom { value: Arc<ValueFn>, gradient: Arc<GradientFn>, hessian: Option<Arc<HessianFn>> },
}

/// Built-in systems; JSON form `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum HamiltonianSpec {
    /// ½|x|²
    Harmonic { n: usize },
    /// ½|x|² + ¼|x|⁴
    Quartic { n: usize },
    /// ¼|x|⁴
    PureQuartic { n: usize },
    /// ½(a|x₁|² + b|x₂|²) + (s/4)|x|⁴
    Anisotropic {
        n: usize,
        a: f64,
        b: f64,
        #[serde(default)]
        quartic: f64,
    },
    /// ((1 − c)/4) Σ xᵢ⁴ + (c/4)|x|⁴, convex for c ∈ [0, 1]
    EvenQuartic { n: usize, c: f64 },
    /// ½ B₀x·x + Σ monomials
    Polynomial {
        n: usize,
        #[serde(default)]
        b0: Option<Vec<Vec<f64>>>,
        terms: Vec<Monomial>,
    },
}

fn radial_quartic(n: usize, scale: f64) -> Vec<Monomial> {
    let d = 2 * n;
    let mut out = Vec::new();
    for i in 0..d {
        let mut p = vec![0; d];
        p[i] = 4;
        out.push(Monomial { coef: scale / 4.0, powers: p });
        for j in i + 1..d {
            let mut p = vec![0; d];
            p[i] = 2;
            p[j] = 2;
            out.push(Monomial { coef: scale / 2.0, powers: p });
        }
    }
    out
}

fn coordinate_quartic(n: usize, scale: f64) -> Vec<Monomial> {
    (0..2 * n)
        .map(|i| {
            let mut p = vec![0; 2 * n];
            p[i] = 4;
            Monomial { coef: scale / 4.0, powers: p }
        })
        .collect()
}

/// H(x) = ½B₀x·x + Ĥ(x).
#[derive(Clone)]
pub struct Hamiltonian {
    n: usize,
    b0: Option<Mat>,
    hat: Evaluator,
    label: String,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hamiltonian").field("n", &self.n).field("label", &self.label).field("b0", &self.b0).finish()
    }
}

impl Hamiltonian {
    pub fn from_spec(spec: &HamiltonianSpec) -> Result<Self> {
        let (n, b0, terms, label) = match spec {
            HamiltonianSpec::Harmonic { n } => (*n, Some(Mat::identity(2 * n, 2 * n)), vec![], "harmonic".to_string()),
            HamiltonianSpec::Quartic { n } => {
                (*n, Some(Mat::identity(2 * n, 2 * n)), radial_quartic(*n, 1.0), "quartic".to_string())
            }
            HamiltonianSpec::PureQuartic { n } => (*n, None, radial_quartic(*n, 1.0), "pure-quartic".to_string()),
            HamiltonianSpec::Anisotropic { n, a, b, quartic } => {
                let diag = (0..2 * n).map(|i| if i < *n { *a } else { *b });
                let b0 = Mat::from_diagonal(&Vector::from_iterator(2 * n, diag));
                let terms = if *quartic != 0.0 { radial_quartic(*n, *quartic) } else { vec![] };
                (*n, Some(b0), terms, format!("anisotropic({a},{b},{quartic})"))
            }
            HamiltonianSpec::EvenQuartic { n, c } => {
                let mut terms = coordinate_quartic(*n, 1.0 - c);
                terms.extend(radial_quartic(*n, *c));
                (*n, None, terms, format!("even-quartic({c})"))
            }
            HamiltonianSpec::Polynomial { n, b0, terms } => {
                let b0 = match b0 {
                    Some(rows) => {
                        let d = 2 * n;
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(Error::Dimension(format!("b0 must be {d}x{d}")));
                        }
                        let m = Mat::from_fn(d, d, |i, j| rows[i][j]);
                        if (&m - m.transpose()).amax() > 1e-12 {
                            return Err(Error::Validation("b0 must be symmetric".into()));
                        }
                        Some(m)
                    }
                    None => None,
                };
                (*n, b0, terms.clone(), "polynomial".to_string())
            }
        };
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        Ok(Hamiltonian { n, b0, hat: Evaluator::Polynomial(Polynomial::new(2 * n, terms)?), label })
    }

    /// Ĥ given by value and gradient; Hessians by central differences of the
    /// gradient unless [`Hamiltonian::with_hessian`] supplies them.
    pub fn custom(
        n: usize,
        b0: Option<Mat>,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if let Some(b) = &b0 {
            if b.shape() != (2 * n, 2 * n) {
                return Err(Error::Dimension("b0 has the wrong size".into()));
            }
        }
        let hat = Evaluator::Custom { value: Arc::new(value), gradient: Arc::new(gradient), hessian: None };
        Ok(Hamiltonian { n, b0, hat, label: "custom".into() })
    }

    pub fn with_hessian(mut self, hessian: impl Fn(&Vector) -> Mat + Send + Sync + 'static) -> Self {
        if let Evaluator::Custom { hessian: h, .. } = &mut self.hat {
            *h = Some(Arc::new(hessian));
        }
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The quadratic part B₀ (zero when absent).
    pub fn b0(&self) -> Mat {
        self.b0.clone().unwrap_or_else(|| Mat::zeros(2 * self.n, 2 * self.n))
    }

    pub fn hat_value(&self, x: &Vector) -> f64 {
        match &self.hat {
            Evaluator::Polynomial(p) => Polynomial::sum(&p.terms, x),
            Evaluator::Custom { value, .. } => value(x),
        }
    }

    pub fn hat_gradient(&self, x: &Vector) -> Vector {
        match &self.hat {
            Evaluator::Polynomial(p) => Vector::from_iterator(x.len(), p.grad.iter().map(|g| Polynomial::sum(g, x))),
            Evaluator::Custom { gradient, .. } => gradient(x),
        }
    }

    pub fn hat_hessian(&self, x: &Vector) -> Mat {
        let d = x.len();
        match &self.hat {
            Evaluator::Polynomial(p) => Mat::from_fn(d, d, |i, j| Polynomial::sum(&p.hess[i][j], x)),
            Evaluator::Custom { hessian: Some(h), .. } => h(x),
            Evaluator::Custom { gradient, .. } => {
                let step = 1e-5 * (1.0 + x.norm());
                let mut h = Mat::zeros(d, d);
                for j in 0..d {
                    let mut e = Vector::zeros(d);
                    e[j] = step;
                    let col = (gradient(&(x + &e)) - gradient(&(x - &e))) / (2.0 * step);
                    h.set_column(j, &col);
                }
                (&h + h.transpose()) * 0.5
            }
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let quad = self.b0.as_ref().map_or(0.0, |b| 0.5 * x.dot(&(b * x)));
        quad + self.hat_value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let g = self.hat_gradient(x);
        match &self.b0 {
            Some(b) => g + b * x,
            None => g,
        }
    }

    pub fn hessian(&self, x: &Vector) -> Mat {
        let h = self.hat_hessian(x);
        match &self.b0 {
            Some(b) => h + b,
            None => h,
        }
    }

    /// ẋ = JH′(x)
    pub fn field(&self, x: &Vector) -> Vector {
        j_matrix(self.n) * self.gradient(x)
    }

    pub fn hypotheses(&self, part: Part) -> Hypotheses {
        let d = 2 * self.n;
        let value = |x: &Vector| match part {
            Part::Full => self.value(x),
            Part::Hat => self.hat_value(x),
        };
        let gradient = |x: &Vector| match part {
            Part::Full => self.gradient(x),
            Part::Hat => self.hat_gradient(x),
        };
        let hessian = |x: &Vector| match part {
            Part::Full => self.hessian(x),
            Part::Hat => self.hat_hessian(x),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a11_0b17);
        let mut sample = |radius: f64| -> Vector {
            let v = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let scale = radius / v.norm().max(1e-12);
            v * scale
        };
        let nm = n_matrix(self.n);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()));
        let (mut h1, mut h2, mut h4, mut h5, mut h6) = (true, true, true, true, true);
        for k in 0..HYPOTHESIS_SAMPLES {
            let x = sample(0.1 + 4.0 * k as f64 / HYPOTHESIS_SAMPLES as f64);
            let v = value(&x);
            h1 &= close(value(&(&nm * &x)), v);
            h6 &= close(value(&(-&x)), v);
            h4 &= v >= -1e-12;
            let hx = hessian(&x);
            let lam = SymmetricEigen::new(hx.clone()).eigenvalues.min();
            h5 &= lam >= -1e-9 * (1.0 + hx.norm());
        }
        // superquadratic growth μH(x) ≤ H′(x)·x with μ = 2.2 far out
        for radius in [8.0, 32.0] {
            for _ in 0..HYPOTHESIS_SAMPLES / 4 {
                let x = sample(radius);
                let v = value(&x);
                h2 &= v > 0.0 && 2.2 * v <= gradient(&x).dot(&x);
                h4 &= v >= 0.0;
            }
        }
        let zero = Vector::zeros(d);
        let h3 = value(&zero).abs() < 1e-12 && gradient(&zero).amax() < 1e-12 && hessian(&zero).amax() < 1e-9;
        Hypotheses { h1, h2, h3, h4, h5, h6 }
    }

    pub fn is_reversible(&self) -> bool {
        self.hypotheses(Part::Full).h1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    /// H itself
    Full,
    /// Ĥ = H − ½B₀x·x
    Hat,
}

/// Sampled checks of the structural hypotheses (reversible, superquadratic,
/// o(|x|²) at 0, nonnegative, convex, even).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub h4: bool,
    pub h5: bool,
    pub h6: bool,
}

impl Hypotheses {
    fn failures(&self, upto: usize) -> Vec<String> {
        [self.h1, self.h2, self.h3, self.h4, self.h5, self.h6]
            .iter()
            .take(upto)
            .enumerate()
            .filter(|(_, ok)| !**ok)
            .map(|(i, _)| format!("H{}", i + 1))
            .collect()
    }
}

struct Trajectory {
    grid: Vec<f64>,
    states: Vec<Vector>,
    variations: Vec<Mat>,
}

fn rk4(h: &Hamiltonian, x: &Vector, phi: &Mat, dt: f64) -> (Vector, Mat) {
    let j = j_matrix(h.n);
    let f = |x: &Vector, p: &Mat| (&j * h.gradient(x), &j * h.hessian(x) * p);
    let (k1, l1) = f(x, phi);
    let (k2, l2) = f(&(x + &k1 * (0.5 * dt)), &(phi + &l1 * (0.5 * dt)));
    let (k3, l3) = f(&(x + &k2 * (0.5 * dt)), &(phi + &l2 * (0.5 * dt)));
    let (k4, l4) = f(&(x + &k3 * dt), &(phi + &l3 * dt));
    (x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0), phi + (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (dt / 6.0))
}

/// State and variational matrix after `steps` RK4 steps over [0, span].
fn flow(h: &Hamiltonian, x0: &Vector, span: f64, steps: usize, keep: bool) -> Trajectory {
    let d = 2 * h.n;
    let dt = span / steps as f64;
    let (mut x, mut phi) = (x0.clone(), Mat::identity(d, d));
    let mut tr = Trajectory { grid: vec![0.0], states: vec![x.clone()], variations: vec![phi.clone()] };
    for s in 0..steps {
        (x, phi) = rk4(h, &x, &phi, dt);
        if keep || s + 1 == steps {
            tr.grid.push(if s + 1 == steps { span } else { (s + 1) as f64 * dt });
            tr.states.push(x.clone());
            tr.variations.push(phi.clone());
        }
    }
    tr
}

/// Step count (a multiple of 4) at which doubling changes the end state by
/// less than 1e−12.
fn settle_steps(h: &Hamiltonian, x0: &Vector, span: f64) -> Result<usize> {
    let rate = 1.0 + h.hessian(x0).norm() + h.gradient(x0).norm();
    let mut steps = (((64.0 * span * rate).ceil() as usize).max(64)).div_ceil(4) * 4;
    let mut end = flow(h, x0, span, steps, false).states.pop().unwrap();
    for _ in 0..12 {
        let finer = flow(h, x0, span, 2 * steps, false).states.pop().unwrap();
        let change = (&finer - &end).norm();
        steps *= 2;
        end = finer;
        if !change.is_finite() {
            break;
        }
        if change < 1e-12 * (1.0 + end.norm()) {
            return Ok(steps);
        }
    }
    Err(Error::Integration(format!("orbit integration over {span} did not settle")))
}

fn brake_start(n: usize, q0: &[f64]) -> Vector {
    let mut x = Vector::zeros(2 * n);
    x.rows_mut(n, n).copy_from_slice(q0);
    x
}

/// A T-periodic solution with x(−t) = Nx(t), sampled on [0, T].
#[derive(Clone, Debug)]
pub struct BrakeOrbit {
    pub hamiltonian: Hamiltonian,
    pub period: f64,
    pub q0: Vec<f64>,
    pub grid: Vec<f64>,
    pub states: Vec<Vector>,
    /// |x₁(0)| + |x₁(T/2)|
    pub residual: f64,
    pub energy_drift: f64,
    pub symmetric: bool,
    pub tau_min: f64,
    pub k: usize,
    pub newton_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub hamiltonian: String,
    pub period: f64,
    pub q0: Vec<f64>,
    pub residual: f64,
    pub energy_drift: f64,
    pub symmetric: bool,
    pub tau_min: f64,
    pub k: usize,
    pub newton_steps: usize,
}

impl BrakeOrbit {
    pub fn summary(&self) -> OrbitSummary {
        OrbitSummary {
            hamiltonian: self.hamiltonian.label.clone(),
            period: self.period,
            q0: self.q0.clone(),
            residual: self.residual,
            energy_drift: self.energy_drift,
            symmetric: self.symmetric,
            tau_min: self.tau_min,
            k: self.k,
            newton_steps: self.newton_steps,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.states.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// x(t) for any real t, by periodicity and cubic Hermite interpolation with
    /// the exact vector field as derivative.
    pub fn eval(&self, t: f64) -> Vector {
        let t = t.rem_euclid(self.period);
        let k = self.grid.partition_point(|&g| g <= t).clamp(1, self.grid.len() - 1) - 1;
        let (t0, t1) = (self.grid[k], self.grid[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (x0, x1) = (&self.states[k], &self.states[k + 1]);
        let (f0, f1) = (self.hamiltonian.field(x0), self.hamiltonian.field(x1));
        x0 * (2.0 * s * s * s - 3.0 * s * s + 1.0)
            + f0 * ((s * s * s - 2.0 * s * s + s) * h)
            + x1 * (-2.0 * s * s * s + 3.0 * s * s)
            + f1 * ((s * s * s - s * s) * h)
    }

    fn max_shift_defect(&self, shift: f64, sign: f64) -> f64 {
        self.grid.iter().zip(&self.states).map(|(&t, x)| (self.eval(t + shift) - x * sign).norm()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..2 * self.hamiltonian.n {
            out.push_str(&format!(",x{}", i + 1));
        }
        out.push('\n');
        for (t, x) in self.grid.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for v in x.iter() {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Newton iteration on q₀ ↦ x₁(T/2), with the Jacobian taken from the
/// variational equation; the converged half orbit is reflected to [0, T].
pub fn shoot_brake(h: &Hamiltonian, period: f64, q0: &[f64]) -> Result<BrakeOrbit> {
    let n = h.n;
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Domain("period must be positive".into()));
    }
    if q0.len() != n || q0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("initial guess needs {n} finite entries")));
    }
    if !h.is_reversible() {
        return Err(Error::Validation("Hamiltonian is not reversible: H(Nx) ≠ H(x)".into()));
    }
    let half = 0.5 * period;
    let mut q = Vector::from_column_slice(q0);
    let mut steps = settle_steps(h, &brake_start(n, q.as_slice()), half)?;
    let residual_at = |q: &Vector, steps: usize| -> (Vector, Mat) {
        let tr = flow(h, &brake_start(n, q.as_slice()), half, steps, false);
        (tr.states[1].rows(0, n).into_owned(), tr.variations[1].view((0, n), (n, n)).into_owned())
    };
    for it in 0..=NEWTON_STEPS {
        let (f, jac) = residual_at(&q, steps);
        let res = f.norm();
        if !res.is_finite() {
            break;
        }
        if res < RESIDUAL_TOL {
            let (f2, _) = residual_at(&q, 2 * steps);
            if f2.norm() < RESIDUAL_TOL {
                if q.norm() < TRIVIAL_TOL {
                    return Err(Error::NoOrbit("Newton converged to the trivial solution".into()));
                }
                return build_orbit(h, period, q, steps, it);
            }
            steps *= 2;
            continue;
        }
        let svd = jac.svd(true, true);
        let cut = 1e-12 * svd.singular_values.max().max(1e-300);
        let delta = svd.solve(&(-&f), cut).map_err(|e| Error::NoOrbit(format!("Newton step failed: {e}")))?;
        let mut lambda = 1.0;
        let mut next = &q + &delta;
        for _ in 0..12 {
            if residual_at(&next, steps).0.norm() < res {
                break;
            }
            lambda *= 0.5;
            next = &q + &delta * lambda;
        }
        q = next;
    }
    Err(Error::NoOrbit(format!("Newton did not converge within {NEWTON_STEPS} steps")))
}

fn build_orbit(h: &Hamiltonian, period: f64, q: Vector, steps: usize, newton_steps: usize) -> Result<BrakeOrbit> {
    let n = h.n;
    let x0 = brake_start(n, q.as_slice());
    let tr = flow(h, &x0, 0.5 * period, steps, true);
    let e0 = h.value(&x0);
    let energy_drift = tr.states.iter().map(|x| (h.value(x) - e0).abs()).fold(0.0, f64::max);
    let residual = tr.states.last().unwrap().rows(0, n).norm();
    let amp = tr.states.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let motion = tr.states.iter().map(|x| (x - &x0).norm()).fold(0.0, f64::max);
    if motion < MOTION_TOL * amp {
        return Err(Error::NoOrbit(format!("Newton converged to a near-equilibrium (motion {motion:e}, amplitude {amp:e})")));
    }
    let nm = n_matrix(n);
    let (mut grid, mut states) = (tr.grid.clone(), tr.states.clone());
    for i in (0..steps).rev() {
        grid.push(period - tr.grid[i]);
        states.push(&nm * &tr.states[i]);
    }
    *grid.last_mut().unwrap() = period;
    let mut orbit = BrakeOrbit {
        hamiltonian: h.clone(),
        period,
        q0: q.iter().copied().collect(),
        grid,
        states,
        residual,
        energy_drift,
        symmetric: false,
        tau_min: period,
        k: 1,
        newton_steps,
    };
    let scale = orbit.amplitude().max(1.0);
    orbit.symmetric = orbit.max_shift_defect(0.5 * period, -1.0) < SYMMETRY_TOL * scale;
    let (tau, k) = minimal_period(&orbit)?;
    orbit.tau_min = tau;
    orbit.k = k;
    Ok(orbit)
}

/// Independent shooting runs from each guess, in guess order.
pub fn shoot_multistart(h: &Hamiltonian, period: f64, guesses: &[Vec<f64>]) -> Vec<Result<BrakeOrbit>> {
    crate::par::map(guesses, |q0| shoot_brake(h, period, q0))
}

/// Smallest T/k (k ≤ 64) with max |x(t + T/k) − x(t)| < 1e−6·amplitude.
pub fn minimal_period(orbit: &BrakeOrbit) -> Result<(f64, usize)> {
    let amp = orbit.amplitude();
    if amp < TRIVIAL_TOL {
        return Err(Error::Domain("constant orbit has no minimal period".into()));
    }
    for k in (2..=MAX_PERIOD_RATIO).rev() {
        let tau = orbit.period / k as f64;
        if orbit.max_shift_defect(tau, 1.0) < PERIOD_TOL * amp {
            return Ok((tau, k));
        }
    }
    Ok((orbit.period, 1))
}

/// γ_B on [0, span] for B(t) = H″(x(t)), from the variational equation along
/// the orbit, with the sampled B attached as generator.
pub fn variational_path(orbit: &BrakeOrbit, span: f64) -> Result<SymplecticPath> {
    let h = &orbit.hamiltonian;
    let n = h.n;
    let x0 = brake_start(n, &orbit.q0);
    let steps = settle_steps(h, &x0, span)?;
    let tr = flow(h, &x0, span, steps, true);
    let mut values: Vec<Mat> = tr.states.iter().map(|x| h.hessian(x)).collect();
    // the off-diagonal blocks vanish at brake and symmetric times up to integration error
    for idx in [0, values.len() - 1] {
        let v = &mut values[idx];
        let scale = 1.0 + v.norm();
        let off = v.view((0, n), (n, n)).amax().max(v.view((n, 0), (n, n)).amax());
        if off < 1e-7 * scale {
            v.view_mut((0, n), (n, n)).fill(0.0);
            v.view_mut((n, 0), (n, n)).fill(0.0);
        }
    }
    let source = CoefficientPath::new(tr.grid.clone(), values)?;
    SymplecticPath::from_samples(tr.grid, tr.variations, Some(source))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitMode {
    Brake,
    Symmetric,
}

/// (i_{L0}, ν_{L0}) of γ_B on [0, T/2], or (i_{√−1}^{L0}, ν_{√−1}^{L0}) on [0, T/4].
pub fn orbit_index(orbit: &BrakeOrbit, mode: OrbitMode) -> Result<IndexRecord> {
    match mode {
        OrbitMode::Brake => i_l(&variational_path(orbit, 0.5 * orbit.period)?, 0),
        OrbitMode::Symmetric => {
            if !orbit.symmetric {
                return Err(Error::Validation("orbit is not symmetric: x(t + T/2) ≠ −x(t)".into()));
            }
            i_sqrt_l0(&variational_path(orbit, 0.25 * orbit.period)?)
        }
    }
}

/// Index facts of the minimal-period orbit x_τ used to bound its iteration
/// count: i_{L1} + ν_{L1} ≥ 1, i_{L0} + ν_{L0} ≥ 0 and i₁(γ²) + ν₁(γ²) − n ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFacts {
    pub l0: IndexRecord,
    pub l1: IndexRecord,
    pub doubled: IndexRecord,
    pub l1_bound: bool,
    pub l0_bound: bool,
    pub doubled_bound: bool,
}

pub fn index_facts(orbit: &BrakeOrbit) -> Result<IndexFacts> {
    let path = variational_path(orbit, 0.5 * orbit.tau_min)?;
    let l0 = i_l(&path, 0)?;
    let l1 = i_l(&path, 1)?;
    let doubled = i_nu_omega(&iterate_brake(&path, 2)?, Omega::ONE)?;
    let n = orbit.hamiltonian.n as i64;
    Ok(IndexFacts {
        l0,
        l1,
        doubled,
        l1_bound: l1.sum() >= 1,
        l0_bound: l0.sum() >= 0,
        doubled_bound: doubled.sum() - n >= 1,
    })
}

/// Minimal-period bounds for a brake orbit of period T; the string forms
/// T1.1 … T1.5 are the identifiers used on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpotcheckKind {
    /// convex H: τ ≥ T/(2n+2), and τ ∈ {T, T/2} when ∫H″₂₂ > 0
    #[serde(rename = "T1.1")]
    Convex,
    /// n = 1: τ ∈ {T, T/2}
    #[serde(rename = "T1.2")]
    Planar,
    /// H = ½B₀x·x + Ĥ: τ ≥ T/(2i_{L0} + 2ν_{L0} + 2n + 2) with indices of B₀ on [0, T/2]
    #[serde(rename = "T1.3")]
    ConvexShifted,
    /// symmetric orbits of even H: τ ∈ {T, T/3}
    #[serde(rename = "T1.4")]
    Symmetric,
    /// symmetric orbits with B₀: τ ≥ T/(4s + 3) for even s and T/(4s + 7) for odd s,
    /// s = i_{√−1}^{L0} + ν_{√−1}^{L0} of B₀ on [0, T/4]
    #[serde(rename = "T1.5")]
    SymmetricShifted,
}

impl std::str::FromStr for SpotcheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T1.1" => Ok(SpotcheckKind::Convex),
            "T1.2" => Ok(SpotcheckKind::Planar),
            "T1.3" => Ok(SpotcheckKind::ConvexShifted),
            "T1.4" => Ok(SpotcheckKind::Symmetric),
            "T1.5" => Ok(SpotcheckKind::SymmetricShifted),
            _ => Err(Error::Domain(format!("unknown spot check {s}, expected T1.1 … T1.5"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotcheckReport {
    pub check: SpotcheckKind,
    /// every sampled hypothesis holds; otherwise the report is informational
    pub applicable: bool,
    pub failed_hypotheses: Vec<String>,
    pub period: f64,
    pub tau_min: f64,
    pub k: usize,
    pub lower_bound: Option<f64>,
    /// admissible iteration counts k = T/τ_min when a sharp conclusion applies
    pub allowed_k: Option<Vec<usize>>,
    /// ∫₀^{T/2} H″₂₂(x(t)) dt > 0
    pub h22_positive: Option<bool>,
    pub b0_index: Option<IndexRecord>,
    pub engines_agree: Option<bool>,
    pub facts: Option<IndexFacts>,
    pub holds: bool,
}

fn is_psd(m: &Mat) -> bool {
    SymmetricEigen::new(m.clone()).eigenvalues.min() >= -1e-10 * (1.0 + m.norm())
}

fn is_block_diagonal(m: &Mat, n: usize) -> bool {
    m.view((0, n), (n, n)).amax() == 0.0 && m.view((n, 0), (n, n)).amax() == 0.0
}

/// ∫₀^{T/2} H″₂₂(x(t)) dt by the trapezoid rule on the orbit grid.
pub fn h22_integral(orbit: &BrakeOrbit) -> Mat {
    let n = orbit.hamiltonian.n;
    let half = 0.5 * orbit.period;
    let mut acc = Mat::zeros(n, n);
    for w in 0..orbit.grid.len() - 1 {
        let (t0, t1) = (orbit.grid[w], orbit.grid[w + 1]);
        if t1 > half + 1e-12 {
            break;
        }
        let a = orbit.hamiltonian.hessian(&orbit.states[w]).view((n, n), (n, n)).into_owned();
        let b = orbit.hamiltonian.hessian(&orbit.states[w + 1]).view((n, n), (n, n)).into_owned();
        acc += (a + b) * (0.5 * (t1 - t0));
    }
    acc
}

/// Index of the constant path B₀ on [0, span] from the path engine, and whether
/// the Galerkin count agrees.
fn b0_index(b0: &Mat, span: f64, family: GalerkinFamily) -> Result<(IndexRecord, bool)> {
    let b = CoefficientPath::constant(b0.clone(), span)?;
    let gamma = fundamental_solution_auto(&b)?;
    let rec = match family {
        GalerkinFamily::Sqrt => i_sqrt_l0(&gamma)?,
        GalerkinFamily::L0 => i_l(&gamma, 0)?,
        GalerkinFamily::L1 => i_l(&gamma, 1)?,
    };
    let g = index_from_galerkin(&b, family)?.record;
    Ok((rec, (g.index, g.nullity) == (rec.index, rec.nullity)))
}

/// Checks the minimal period of a found orbit against the selected bound.
/// The bounds hold for some orbit of each period, not for every one, so a
/// failing report on an iterated orbit is evidence only.
pub fn period_spotcheck(orbit: &BrakeOrbit, which: SpotcheckKind) -> Result<SpotcheckReport> {
    let h = &orbit.hamiltonian;
    let n = h.n;
    let t = orbit.period;
    let along_convex = orbit.states.iter().all(|x| is_psd(&h.hessian(x)));
    let b0 = h.b0();
    let with_b0 = matches!(which, SpotcheckKind::ConvexShifted | SpotcheckKind::SymmetricShifted);
    let upto = match which {
        SpotcheckKind::Convex | SpotcheckKind::ConvexShifted => 5,
        SpotcheckKind::Planar => 4,
        SpotcheckKind::Symmetric | SpotcheckKind::SymmetricShifted => 6,
    };
    let hyp = h.hypotheses(if with_b0 { Part::Hat } else { Part::Full });
    let mut failed = hyp.failures(upto);
    if upto >= 5 && !along_convex {
        failed.push("H5 along the orbit".into());
    }
    if with_b0 && !(is_psd(&b0) && is_block_diagonal(&b0, n)) {
        failed.push("B0 not semipositive block-diagonal".into());
    }
    if which == SpotcheckKind::Planar && n != 1 {
        failed.push("n = 1".into());
    }
    if matches!(which, SpotcheckKind::Symmetric | SpotcheckKind::SymmetricShifted) && !orbit.symmetric {
        failed.push("symmetric orbit".into());
    }
    let mut report = SpotcheckReport {
        check: which,
        applicable: failed.is_empty(),
        failed_hypotheses: failed,
        period: t,
        tau_min: orbit.tau_min,
        k: orbit.k,
        lower_bound: None,
        allowed_k: None,
        h22_positive: None,
        b0_index: None,
        engines_agree: None,
        facts: None,
        holds: true,
    };
    let nn = n as f64;
    match which {
        SpotcheckKind::Convex => {
            report.lower_bound = Some(t / (2.0 * nn + 2.0));
            let pos = SymmetricEigen::new(h22_integral(orbit)).eigenvalues.min() > 1e-12;
            report.h22_positive = Some(pos);
            if pos {
                report.allowed_k = Some(vec![1, 2]);
            }
        }
        SpotcheckKind::Planar => report.allowed_k = Some(vec![1, 2]),
        SpotcheckKind::ConvexShifted => {
            let (rec, agree) = b0_index(&b0, 0.5 * t, GalerkinFamily::L0)?;
            report.lower_bound = Some(t / (2.0 * rec.sum() as f64 + 2.0 * nn + 2.0));
            report.b0_index = Some(rec);
            report.engines_agree = Some(agree);
        }
        SpotcheckKind::Symmetric => report.allowed_k = Some(vec![1, 3]),
        SpotcheckKind::SymmetricShifted => {
            let (rec, agree) = b0_index(&b0, 0.25 * t, GalerkinFamily::Sqrt)?;
            let s = rec.sum() as f64;
            let denom = if rec.sum() % 2 == 0 { 4.0 * s + 3.0 } else { 4.0 * s + 7.0 };
            report.lower_bound = Some(t / denom);
            report.b0_index = Some(rec);
            report.engines_agree = Some(agree);
        }
    }
    if report.applicable && matches!(which, SpotcheckKind::Convex | SpotcheckKind::ConvexShifted) {
        report.facts = Some(index_facts(orbit)?);
    }
    let bound_ok = report.lower_bound.is_none_or(|b| orbit.tau_min >= b * (1.0 - 1e-9));
    let k_ok = report.allowed_k.as_ref().is_none_or(|ks| ks.contains(&orbit.k));
    let facts_ok = report.facts.is_none_or(|f| f.l1_bound && f.l0_bound && f.doubled_bound);
    report.holds = bound_ok && k_ok && facts_ok && report.engines_agree != Some(false);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearBoundReport {
    pub period: f64,
    pub applicable: bool,
    pub reason: Option<String>,
    /// the comparison coefficient (π/T − ε)I
    pub comparison: Option<f64>,
    pub comparison_l0: Option<IndexRecord>,
    pub comparison_sqrt: Option<IndexRecord>,
    pub l0: Option<IndexRecord>,
    pub sqrt: Option<IndexRecord>,
    pub engines_agree: Option<bool>,
    pub holds: bool,
}

/// For 0 < T < π/‖B₀‖: the comparison path exp((π/T − ε)tJ) has vanishing
/// L₀ and √−1 indices and nullities on [0, T/2] and [0, T/4], and B₀ is squeezed
/// to i + ν = 0 in both families.
pub fn linear_bound_check(b0: &Mat, period: f64) -> Result<LinearBoundReport> {
    let d = b0.nrows();
    if d == 0 || d % 2 == 1 || b0.ncols() != d {
        return Err(Error::Dimension("B0 must be 2n×2n".into()));
    }
    let n = d / 2;
    if !(period > 0.0) {
        return Err(Error::Domain("period must be positive".into()));
    }
    if (b0 - b0.transpose()).amax() > 1e-12 || !is_psd(b0) || !is_block_diagonal(b0, n) {
        return Err(Error::Validation("B0 must be symmetric, semipositive and block-diagonal".into()));
    }
    let norm = b0.clone().svd(false, false).singular_values.max();
    let mut report = LinearBoundReport {
        period,
        applicable: true,
        reason: None,
        comparison: None,
        comparison_l0: None,
        comparison_sqrt: None,
        l0: None,
        sqrt: None,
        engines_agree: None,
        holds: true,
    };
    if norm > 0.0 && period >= PI / norm {
        report.applicable = false;
        report.reason = Some(format!("T = {period} is not below π/‖B0‖ = {}", PI / norm));
        return Ok(report);
    }
    let c = 0.5 * (PI / period + norm);
    let id = Mat::identity(d, d) * c;
    let (cl0, _) = b0_index(&id, 0.5 * period, GalerkinFamily::L0)?;
    let (csq, _) = b0_index(&id, 0.25 * period, GalerkinFamily::Sqrt)?;
    let (l0, a0) = b0_index(b0, 0.5 * period, GalerkinFamily::L0)?;
    let (sq, a1) = b0_index(b0, 0.25 * period, GalerkinFamily::Sqrt)?;
    report.holds = cl0.index == 0 && cl0.nullity == 0 && csq.index == 0 && csq.nullity == 0 && l0.sum() == 0 && sq.sum() == 0 && a0 && a1;
    report.comparison = Some(c);
    report.comparison_l0 = Some(cl0);
    report.comparison_sqrt = Some(csq);
    report.l0 = Some(l0);
    report.sqrt = Some(sq);
    report.engines_agree = Some(a0 && a1);
    Ok(report)
}

/// Period of the circular orbit of radius r for a radial H(x) = h(|x|²/2),
/// as the level-set integral ∮ ds/|H′| computed by the midpoint rule.
pub fn radial_period(h: &Hamiltonian, r: f64, nodes: usize) -> f64 {
    let n = h.n;
    let mut acc = 0.0;
    for k in 0..nodes {
        let th = 2.0 * PI * (k as f64 + 0.5) / nodes as f64;
        let mut x = Vector::zeros(2 * n);
        x[0] = r * th.cos();
        x[n] = r * th.sin();
        acc += r / h.gradient(&x).norm();
    }
    acc * 2.0 * PI / nodes as f64
}
