//! The randomized identity suite: every case is checked against the iteration
//! formulas, the signature identity, the doubling relation, the Galerkin oracle
//! and the index inequalities. Cases run in parallel and are merged in order.

use crate::angle::Omega;
use crate::error::Result;
use crate::galerkin::{block_positivity, index_from_galerkin, monotonicity_suite, semipositive_bounds, GalerkinFamily};
use crate::io::PathInput;
use crate::iteration::{bott_l0, bott_periodic, bott_sqrt, check_double_relation, monotonicity_check};
use crate::lagrangian::{i_l, i_omega_l0, i_sqrt_l0, Family};
use crate::omega::check_omega_bounds;
use crate::path::{fundamental_solution_auto, CoefficientPath};
use crate::signature::{check_index_difference, DifferenceVariant};
use crate::suite::{case_rng, case_with_dimension, general_case, psd_case, random_ordered_pair, SuiteCase};
use crate::symplectic::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// i_{L0} − i_{L1} from the ε-signature, both variants
    IndexDifference,
    BottL0,
    BottSqrt,
    BottPeriodic,
    /// i₁(γ²) = i_{L0} + i_{L1} + n, ν₁(γ²) = ν_{L0} + ν_{L1}
    DoubleRelation,
    GalerkinOracle,
    /// i_{L0} ≤ i_ω^{L0} ≤ i_{L0} + n
    Squeeze,
    /// |i_{L0} − i_{L1}| ≤ n with and without nullities
    DifferenceBound,
    /// i_{L0} = i_{L1} when γ(τ) is orthogonal
    OrthogonalEndpoint,
    /// i₁ + ν₁ − n ≤ i_ω ≤ i₁ + n − ν_ω
    OmegaBounds,
    /// ordered pairs B₁ ≥ B₂
    OrderedPair,
    /// iterates of B ≥ 0 have nondecreasing index
    IterateMonotone,
    /// lower bounds for B ≥ 0
    Semipositive,
    /// ∫B₂₂ > 0 ⇒ i_{L0} ≥ 0, ∫B₁₁ > 0 ⇒ i_{L1} ≥ 0
    BlockPositivity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub identity: Identity,
    pub case: usize,
    pub ok: bool,
    /// JSON of the report, or the error message
    pub detail: String,
    pub paths: Vec<PathInput>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub identity: Identity,
    pub passed: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub cases: usize,
    pub tallies: Vec<Tally>,
    pub first_failure: Option<Check>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn tally(&self, identity: Identity) -> Option<&Tally> {
        self.tallies.iter().find(|t| t.identity == identity)
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<22} {:>8}\n", "identity", "passed");
        for t in &self.tallies {
            let name = serde_json::to_string(&t.identity).unwrap_or_default();
            s.push_str(&format!("{:<22} {:>4}/{:<4}\n", name.trim_matches('"'), t.passed, t.total));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// largest iteration count in the Bott checks
    pub max_iteration: usize,
    /// the Galerkin oracle runs on the first this-many cases
    pub galerkin_cases: usize,
    pub identities: Option<Vec<Identity>>,
    /// fixed half-dimension instead of cycling through 1, 2, 3
    pub n: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { max_iteration: 6, galerkin_cases: 30, identities: None, n: None }
    }
}

struct Recorder<'a> {
    case: usize,
    opts: &'a SuiteOptions,
    out: Vec<Check>,
}

impl Recorder<'_> {
    fn wants(&self, id: Identity) -> bool {
        self.opts.identities.as_ref().is_none_or(|ids| ids.contains(&id))
    }

    fn record<T: Serialize>(&mut self, identity: Identity, paths: &[&CoefficientPath], run: impl FnOnce() -> Result<(bool, T)>) {
        if !self.wants(identity) {
            return;
        }
        let (ok, detail) = match run() {
            Ok((ok, r)) => (ok, serde_json::to_string(&r).unwrap_or_default()),
            Err(e) => (false, format!("error: {e}")),
        };
        let paths = if ok { vec![] } else { paths.iter().map(|b| PathInput::from_coefficient(b)).collect() };
        self.out.push(Check { identity, case: self.case, ok, detail, paths });
    }
}

fn draw(seed: u64, case: usize, n: Option<usize>, psd: bool) -> Result<SuiteCase> {
    match (n, psd) {
        (Some(n), _) => case_with_dimension(seed, case, n, psd),
        (None, false) => general_case(seed, case),
        (None, true) => psd_case(seed, case),
    }
}

fn general_checks(seed: u64, case: usize, rec: &mut Recorder) -> Result<()> {
    let c = draw(seed, case, rec.opts.n, false)?;
    let b = &c.b;
    let gamma = fundamental_solution_auto(b)?;
    let n = c.n as i64;
    let kmax = rec.opts.max_iteration;
    rec.record(Identity::IndexDifference, &[b], || {
        let a = check_index_difference(&gamma, DifferenceVariant::Bare)?;
        let p = check_index_difference(&gamma, DifferenceVariant::PlusNullity)?;
        Ok((a.agree && p.agree, [a, p]))
    });
    rec.record(Identity::BottL0, &[b], || {
        let r = (1..=kmax).map(|k| bott_l0(&gamma, k)).collect::<Result<Vec<_>>>()?;
        Ok((r.iter().all(|x| x.agree), r))
    });
    rec.record(Identity::BottSqrt, &[b], || {
        let r = (1..=kmax).map(|k| bott_sqrt(&gamma, k)).collect::<Result<Vec<_>>>()?;
        Ok((r.iter().all(|x| x.agree), r))
    });
    rec.record(Identity::BottPeriodic, &[b], || {
        let mut r = Vec::new();
        for z in [Omega::ONE, Omega::MINUS_ONE, Omega::from_turns(1, 3)] {
            for m in 1..=kmax {
                r.push(bott_periodic(&gamma, z, m)?);
            }
        }
        Ok((r.iter().all(|x| x.agree), r))
    });
    rec.record(Identity::DoubleRelation, &[b], || {
        let r = check_double_relation(&gamma)?;
        Ok((r.holds, r))
    });
    if case < rec.opts.galerkin_cases {
        rec.record(Identity::GalerkinOracle, &[b], || {
            let g0 = index_from_galerkin(b, GalerkinFamily::L0)?;
            let gs = index_from_galerkin(b, GalerkinFamily::Sqrt)?;
            let (p0, ps) = (i_l(&gamma, 0)?, i_sqrt_l0(&gamma)?);
            let ok = (g0.record.index, g0.record.nullity) == (p0.index, p0.nullity)
                && (gs.record.index, gs.record.nullity) == (ps.index, ps.nullity)
                && g0.m_star <= 256
                && gs.m_star <= 256;
            Ok((ok, [(g0.record, g0.m_star, p0), (gs.record, gs.m_star, ps)]))
        });
    }
    let (l0, l1) = (i_l(&gamma, 0)?, i_l(&gamma, 1)?);
    rec.record(Identity::Squeeze, &[b], || {
        let mut r = Vec::new();
        for theta in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            r.push(i_omega_l0(&gamma, theta)?);
        }
        Ok((r.iter().all(|w| l0.index <= w.index && w.index <= l0.index + n), (l0, r)))
    });
    rec.record(Identity::DifferenceBound, &[b], || {
        Ok(((l0.index - l1.index).abs() <= n && (l0.sum() - l1.sum()).abs() <= n, (l0, l1)))
    });
    rec.record(Identity::OmegaBounds, &[b], || {
        let r = [Omega::MINUS_ONE, Omega::I, Omega::from_turns(1, 3)]
            .iter()
            .map(|&w| check_omega_bounds(&gamma, w))
            .collect::<Result<Vec<_>>>()?;
        Ok((r.iter().all(|x| x.holds), r))
    });
    Ok(())
}

/// Constant B = diag(P, P) has the orthogonal flow exp(tJB).
fn orthogonal_case(seed: u64, case: usize, n: usize) -> Result<CoefficientPath> {
    let mut rng = case_rng(seed ^ 0x0a7e, case);
    let p = Mat::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
    let p = (&p + p.transpose()) * 0.5;
    let mut b = Mat::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(&p);
    b.view_mut((n, n), (n, n)).copy_from(&p);
    CoefficientPath::constant(b, rng.random_range(0.5..3.0))
}

fn semipositive_checks(seed: u64, case: usize, rec: &mut Recorder) -> Result<()> {
    let c = draw(seed, case, rec.opts.n, true)?;
    let b = &c.b;
    rec.record(Identity::Semipositive, &[b], || {
        let r = semipositive_bounds(b)?;
        Ok((r.holds, r))
    });
    rec.record(Identity::BlockPositivity, &[b], || {
        let r = block_positivity(b)?;
        Ok((r.holds && r.engines_agree, r))
    });
    rec.record(Identity::IterateMonotone, &[b], || {
        let mut r = Vec::new();
        for family in [Family::L0, Family::L1] {
            r.push(monotonicity_check(b, 2, 1, family)?);
            r.push(monotonicity_check(b, 3, 2, family)?);
        }
        r.push(monotonicity_check(b, 2, 1, Family::OmegaL0)?);
        r.push(monotonicity_check(b, 3, 2, Family::OmegaL0)?);
        Ok((r.iter().all(|x| x.holds), r))
    });
    let mut rng = case_rng(seed ^ 0x0bde5, case);
    let tau = rng.random_range(0.5..1.5);
    let (hi, lo) = random_ordered_pair(&mut rng, c.n, tau)?;
    rec.record(Identity::OrderedPair, &[&hi, &lo], || {
        let r = monotonicity_suite(&hi, &lo)?;
        Ok((r.iter().all(|x| x.holds), r))
    });
    let orth = orthogonal_case(seed, case, c.n)?;
    rec.record(Identity::OrthogonalEndpoint, &[&orth], || {
        let g = fundamental_solution_auto(&orth)?;
        let (a, b) = (i_l(&g, 0)?, i_l(&g, 1)?);
        Ok((a.index == b.index, (a, b)))
    });
    Ok(())
}

fn run_case(seed: u64, case: usize, opts: &SuiteOptions) -> Vec<Check> {
    let mut rec = Recorder { case, opts, out: Vec::new() };
    for (identity, outcome) in [
        (Identity::IndexDifference, general_checks(seed, case, &mut rec)),
        (Identity::Semipositive, semipositive_checks(seed, case, &mut rec)),
    ] {
        if let Err(e) = outcome {
            rec.out.push(Check { identity, case, ok: false, detail: format!("error: {e}"), paths: vec![] });
        }
    }
    rec.out
}

/// Runs `cases` seeded cases and tallies every identity.
pub fn run_suite(seed: u64, cases: usize, opts: &SuiteOptions) -> SuiteSummary {
    let idx: Vec<usize> = (0..cases).collect();
    let checks: Vec<Check> = crate::par::map(&idx, |&c| run_case(seed, c, opts)).into_iter().flatten().collect();
    let mut tallies: Vec<Tally> = Vec::new();
    for ch in &checks {
        match tallies.iter_mut().find(|t| t.identity == ch.identity) {
            Some(t) => {
                t.total += 1;
                t.passed += ch.ok as usize;
            }
            None => tallies.push(Tally { identity: ch.identity, passed: ch.ok as usize, total: 1 }),
        }
    }
    tallies.sort_by_key(|t| t.identity);
    let first_failure = checks.into_iter().find(|c| !c.ok);
    SuiteSummary { seed, cases, tallies, first_failure }
}
