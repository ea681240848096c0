//! Randomized verification campaigns, fixture replay, and report assembly.
//!
//! A campaign is a deterministic function of its configuration: trial `t`
//! derives its own SplitMix64 stream from `seed XOR t`, draws a kernel model
//! and operator(s), evaluates every selected registry entry, and folds the
//! outcomes into per-bound statistics. Violations and evaluator errors are
//! recorded with enough provenance (operator entries, normalized-kernel Gram)
//! to replay offline; the campaign itself never aborts.
//!
//! The harness works at `f64`, the calibrated precision of the registry
//! tolerances.

use crate::berezin::{self, BerezinProfile};
use crate::bounds::{evaluate_bounds, BoundEvaluation, BoundId, EvalConfig};
use crate::linalg::{adjoint, CMatrix};
use crate::operator::{Operator, PsdSpectrum};
use crate::rkhs::{self, KernelSpace, PointLabel};
use ndarray::Array2;
use num_complex::Complex;
use rand::prelude::*;
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Probability that a trial draws a structured operator instead of a dense
/// Gaussian one.
const STRUCTURED_PROB: f64 = 0.2;
/// Stream separation constant for the ascent seed, keeping the estimator's
/// internal draws decorrelated from the trial stream.
const ASCENT_STREAM_SALT: u64 = 0xDA7A_5EED;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("dims must be nonempty and every entry at least 1")]
    BadDims,
    #[error("omega sizes must be nonempty and every entry at least 1")]
    BadOmegaSizes,
    #[error("kernel kinds must be nonempty")]
    NoKernelKinds,
    #[error("bounds must be nonempty")]
    NoBounds,
    #[error("tolerance must be positive and finite")]
    BadTol,
    #[error("unknown kernel kind: {0}")]
    UnknownKernelKind(String),
    #[error("unknown fixture: {0}")]
    UnknownFixture(String),
    #[error("fixture {name}: {detail}")]
    FixtureMismatch { name: String, detail: String },
}

/// Families of kernel models the campaign can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Orthonormal,
    Szego,
    Bergman,
    Fock,
    RandomGram,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        KernelKind::Orthonormal,
        KernelKind::Szego,
        KernelKind::Bergman,
        KernelKind::Fock,
        KernelKind::RandomGram,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Orthonormal => "orthonormal",
            KernelKind::Szego => "szego",
            KernelKind::Bergman => "bergman",
            KernelKind::Fock => "fock",
            KernelKind::RandomGram => "random_gram",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KernelKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| HarnessError::UnknownKernelKind(s.to_string()))
    }
}

/// Campaign configuration. Echoed verbatim into the report.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: u64,
    pub dims: Vec<usize>,
    pub omega_sizes: Vec<usize>,
    pub kernel_kinds: Vec<KernelKind>,
    pub bounds: Vec<BoundId>,
    pub tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            trials: 500,
            dims: vec![2, 3, 4, 8],
            omega_sizes: vec![2, 4, 8, 16],
            kernel_kinds: KernelKind::ALL.to_vec(),
            bounds: BoundId::ALL.to_vec(),
            tol: 1e-9,
        }
    }
}

impl SuiteConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::ZeroTrials);
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(HarnessError::BadDims);
        }
        if self.omega_sizes.is_empty() || self.omega_sizes.contains(&0) {
            return Err(HarnessError::BadOmegaSizes);
        }
        if self.kernel_kinds.is_empty() {
            return Err(HarnessError::NoKernelKinds);
        }
        if self.bounds.is_empty() {
            return Err(HarnessError::NoBounds);
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(HarnessError::BadTol);
        }
        Ok(())
    }
}

/// Row-major complex matrix as `[re, im]` pairs, the JSON wire form.
pub type ComplexTable = Vec<Vec<[f64; 2]>>;

/// One evaluated (bound, operand pair) within a trial: the id, the outcome,
/// the optional second operand, and the operator the entry actually tested.
type TrialOutcome = (
    BoundId,
    crate::bounds::Result<crate::bounds::BoundEvaluation<f64>>,
    Option<Operator<f64>>,
    Operator<f64>,
);

pub(crate) fn matrix_to_table(m: &CMatrix<f64>) -> ComplexTable {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Parameter location of the minimal-slack instance of a bound.
#[derive(Debug, Clone, Serialize)]
pub struct MinSlackInstance {
    pub trial_seed: u64,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
}

/// Per-bound campaign statistics.
#[derive(Debug, Clone, Serialize)]
pub struct BoundStats {
    pub checked: u64,
    pub violations: u64,
    pub errors: u64,
    /// Largest relative violation magnitude; zero when all instances passed.
    pub worst_violation: f64,
    /// Smallest raw slack observed across checked instances.
    pub min_slack: f64,
    pub min_slack_instance: Option<MinSlackInstance>,
}

impl Default for BoundStats {
    fn default() -> Self {
        BoundStats {
            checked: 0,
            violations: 0,
            errors: 0,
            worst_violation: 0.0,
            min_slack: f64::INFINITY,
            min_slack_instance: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureDetail {
    Violation {
        lhs: f64,
        rhs: f64,
        slack: f64,
        theta: Option<f64>,
        alpha: Option<f64>,
        r: Option<f64>,
    },
    Error {
        message: String,
    },
}

/// A violated or failed evaluation with everything needed to replay it.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub bound_id: BoundId,
    pub trial_seed: u64,
    pub kernel_kind: KernelKind,
    pub detail: FailureDetail,
    pub operator: ComplexTable,
    pub operator_b: Option<ComplexTable>,
    /// Gram of the normalized kernel columns, enough to rebuild the model.
    pub gram: ComplexTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub total_violations: u64,
    pub total_errors: u64,
    pub per_bound: BTreeMap<String, BoundStats>,
    pub failures: Vec<FailureRecord>,
}

/// Draws a `dim x dim` operator: i.i.d. complex standard normal entries
/// scaled by `scale / sqrt(dim)`, with probability 0.2 replaced by a
/// structured draw (Hermitian, unitary, nilpotent shift, or a normal
/// operator built by unitary conjugation of a diagonal).
pub fn random_operator<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Operator<f64> {
    assert!(scale > 0.0, "operator scale must be positive");
    if rng.random::<f64>() < STRUCTURED_PROB {
        match rng.random_range(0..4u32) {
            0 => {
                let g = gaussian_matrix(rng, dim, dim, scale / (dim as f64).sqrt());
                let h = Array2::from_shape_fn((dim, dim), |(i, j)| {
                    if i == j {
                        Complex::new(g[(i, j)].re, 0.0)
                    } else {
                        (g[(i, j)] + g[(j, i)].conj()) * Complex::new(0.5, 0.0)
                    }
                });
                Operator::new(h).expect("hermitian draw is finite")
            }
            1 => random_unitary(rng, dim),
            2 => {
                let mut n = Array2::zeros((dim, dim));
                for i in 0..dim.saturating_sub(1) {
                    n[(i, i + 1)] = Complex::new(scale, 0.0);
                }
                Operator::new(n).expect("shift draw is finite")
            }
            _ => random_normal_operator(rng, dim, scale),
        }
    } else {
        let g = gaussian_matrix(rng, dim, dim, scale / (dim as f64).sqrt());
        Operator::new(g).expect("gaussian draw is finite")
    }
}

/// Normal operator: unitary conjugation of a random complex diagonal.
pub fn random_normal_operator<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Operator<f64> {
    let u = random_unitary(rng, dim);
    let d = Array2::from_shape_fn((dim, dim), |(i, j)| {
        if i == j {
            Complex::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ) * Complex::new(scale, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let m = u.entries().dot(&d).dot(&adjoint(u.entries()));
    Operator::new(m).expect("normal draw is finite")
}

/// Unitary draw: the eigenbasis of a random positive semidefinite matrix.
fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> Operator<f64> {
    let g = Operator::new(gaussian_matrix(rng, dim, dim, 1.0)).expect("finite");
    let spec = PsdSpectrum::new(&g.gram_of_columns()).expect("column Gram is positive");
    Operator::new(spec.vectors().clone()).expect("eigenvector basis is finite")
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMatrix<f64> {
    Array2::from_shape_fn((rows, cols), |_| {
        Complex::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ) * Complex::new(scale, 0.0)
    })
}

/// Shell-orthogonal partner of `a`: `i * a * u` where `u` flips random signs
/// in the eigenbasis of `a* a`, so it is Hermitian, unitary, and commutes
/// with `a* a`. Then `Re<A k, B k> = 0` at every model point up to rounding.
pub fn orthogonal_partner<R: Rng>(rng: &mut R, a: &Operator<f64>) -> Operator<f64> {
    let spec = PsdSpectrum::new(&a.gram_of_columns()).expect("column Gram is positive");
    let n = a.dim();
    let v = spec.vectors();
    let signs: Vec<f64> = (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut scaled = v.clone();
    for (k, &s) in signs.iter().enumerate() {
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    let u = scaled.dot(&adjoint(v));
    let b = a.entries().dot(&u).mapv(|z| z * Complex::new(0.0, 1.0));
    Operator::new(b).expect("partner is finite")
}

fn random_disc_points<R: Rng>(rng: &mut R, m: usize, radius: f64) -> Vec<Complex<f64>> {
    (0..m)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            Complex::from_polar(r, phi)
        })
        .collect()
}

/// Draws a kernel model of the given family. `n` is the ambient dimension
/// for the families that have one; the point families take their dimension
/// from the number of points.
pub fn random_space<R: Rng>(rng: &mut R, kind: KernelKind, n: usize, m: usize) -> KernelSpace<f64> {
    for _ in 0..16 {
        let attempt = match kind {
            KernelKind::Orthonormal => rkhs::build_orthonormal(n, m.min(n)),
            KernelKind::Szego => rkhs::build_szego(&random_disc_points(rng, m, 0.85)),
            KernelKind::Bergman => rkhs::build_bergman(&random_disc_points(rng, m, 0.85)),
            KernelKind::Fock => rkhs::build_fock(&random_disc_points(rng, m, 2.0)),
            KernelKind::RandomGram => {
                let b = gaussian_matrix(rng, n, m, 1.0);
                let gram = adjoint(&b).dot(&b);
                rkhs::build_from_gram(&gram, PointLabel::indices(m))
            }
        };
        if let Ok(space) = attempt {
            return space;
        }
    }
    unreachable!("kernel model generation failed 16 times in a row")
}

/// Runs a campaign. Deterministic given the configuration; never aborts on
/// evaluator errors, which are recorded per bound instead.
/// Draws the primary instance of one trial: kernel family, model, operator
/// scale, and the operator itself. `run_suite` calls this with the trial
/// stream (`cfg.seed ^ trial`); calling it the same way replays a campaign
/// instance without rerunning the campaign. Second operands for the sum and
/// normal-operator bounds are drawn afterwards from the same stream.
pub fn trial_instance<R: Rng>(
    rng: &mut R,
    cfg: &SuiteConfig,
) -> (KernelKind, KernelSpace<f64>, f64, Operator<f64>) {
    let kind = cfg.kernel_kinds[rng.random_range(0..cfg.kernel_kinds.len())];
    let n = cfg.dims[rng.random_range(0..cfg.dims.len())];
    let m = cfg.omega_sizes[rng.random_range(0..cfg.omega_sizes.len())];
    let space = random_space(rng, kind, n, m);
    let dim = space.dim();
    let scale = (2.0f64).powf(4.0 * rng.random::<f64>() - 2.0);
    let a = random_operator(rng, dim, scale);
    (kind, space, scale, a)
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, HarnessError> {
    cfg.validate()?;
    let mut per_bound: BTreeMap<String, BoundStats> = cfg
        .bounds
        .iter()
        .map(|id| (id.as_str().to_string(), BoundStats::default()))
        .collect();
    let mut failures: Vec<FailureRecord> = Vec::new();

    for trial in 0..cfg.trials {
        let stream_seed = cfg.seed ^ trial;
        let mut rng = SplitMix64::seed_from_u64(stream_seed);
        let (kind, space, scale, a) = trial_instance(&mut rng, cfg);
        let dim = space.dim();

        let eval_cfg = EvalConfig::<f64> {
            tol: cfg.tol,
            dw_seed: stream_seed ^ ASCENT_STREAM_SALT,
            ..EvalConfig::default()
        };
        let gram_table = matrix_to_table(&rkhs::normalized_gram(&space));

        // Plain entries share one context; entries with special operands are
        // evaluated one by one so the trial stream stays in a fixed order.
        let mut plain = Vec::new();
        for &id in &cfg.bounds {
            if !id.needs_second_operand() && !id.needs_normal_operator() {
                plain.push(id);
            }
        }
        let mut outcomes: Vec<TrialOutcome> = Vec::new();
        for (id, res) in evaluate_bounds(&plain, &a, &space, None, &eval_cfg) {
            outcomes.push((id, res, None, a.clone()));
        }
        for &id in &cfg.bounds {
            match id {
                BoundId::RmkNormal => {
                    let normal = random_normal_operator(&mut rng, dim, scale);
                    let res = crate::bounds::evaluate_bound(id, &normal, &space, None, &eval_cfg);
                    outcomes.push((id, res, None, normal));
                }
                BoundId::Sum => {
                    let b = random_operator(&mut rng, dim, scale);
                    let res = crate::bounds::evaluate_bound(id, &a, &space, Some(&b), &eval_cfg);
                    outcomes.push((id, res, Some(b), a.clone()));
                }
                BoundId::SumOrth => {
                    let b = orthogonal_partner(&mut rng, &a);
                    let res = crate::bounds::evaluate_bound(id, &a, &space, Some(&b), &eval_cfg);
                    outcomes.push((id, res, Some(b), a.clone()));
                }
                _ => {}
            }
        }

        for (id, res, b, op) in outcomes {
            let stats = per_bound
                .get_mut(id.as_str())
                .expect("stats preallocated for every selected bound");
            match res {
                Ok(ev) => {
                    stats.checked += 1;
                    if ev.slack < stats.min_slack {
                        stats.min_slack = ev.slack;
                        stats.min_slack_instance = Some(MinSlackInstance {
                            trial_seed: stream_seed,
                            theta: ev.params.theta,
                            alpha: ev.params.alpha,
                            r: ev.params.r,
                        });
                    }
                    if !ev.satisfied {
                        stats.violations += 1;
                        let scale_of = ev.lhs.abs().max(ev.rhs.abs()).max(1.0);
                        stats.worst_violation = stats.worst_violation.max(-ev.slack / scale_of);
                        failures.push(FailureRecord {
                            bound_id: id,
                            trial_seed: stream_seed,
                            kernel_kind: kind,
                            detail: FailureDetail::Violation {
                                lhs: ev.lhs,
                                rhs: ev.rhs,
                                slack: ev.slack,
                                theta: ev.params.theta,
                                alpha: ev.params.alpha,
                                r: ev.params.r,
                            },
                            operator: matrix_to_table(op.entries()),
                            operator_b: b.as_ref().map(|x| matrix_to_table(x.entries())),
                            gram: gram_table.clone(),
                        });
                    }
                }
                Err(e) => {
                    stats.errors += 1;
                    failures.push(FailureRecord {
                        bound_id: id,
                        trial_seed: stream_seed,
                        kernel_kind: kind,
                        detail: FailureDetail::Error {
                            message: e.to_string(),
                        },
                        operator: matrix_to_table(op.entries()),
                        operator_b: b.as_ref().map(|x| matrix_to_table(x.entries())),
                        gram: gram_table.clone(),
                    });
                }
            }
        }
    }

    failures.sort_by(|a, b| {
        (a.bound_id.as_str(), a.trial_seed).cmp(&(b.bound_id.as_str(), b.trial_seed))
    });
    let total_violations = per_bound.values().map(|s| s.violations).sum();
    let total_errors = per_bound.values().map(|s| s.errors).sum();
    Ok(SuiteReport {
        config: cfg.clone(),
        total_violations,
        total_errors,
        per_bound,
        failures,
    })
}

// ----------------------------------------------------------------------
// fixtures
// ----------------------------------------------------------------------

pub const FIXTURE_NAMES: [&str; 3] = ["minus-identity", "nilpotent-orthonormal", "identity"];

/// Replays a named reference instance, asserting its frozen expected values,
/// and returns the evaluations for inspection.
pub fn replay_fixture(name: &str) -> Result<Vec<BoundEvaluation<f64>>, HarnessError> {
    let cfg = EvalConfig::<f64>::default();
    let mismatch = |detail: String| HarnessError::FixtureMismatch {
        name: name.to_string(),
        detail,
    };
    match name {
        "minus-identity" => {
            let space = rkhs::build_szego(&[Complex::new(0.0, 0.0), Complex::new(0.5, 0.0)])
                .expect("two-point disc model");
            let a = Operator::<f64>::identity(space.dim()).scale(Complex::new(-1.0, 0.0));
            let scanned = crate::bounds::evaluate_bound(BoundId::T2, &a, &space, None, &cfg)
                .expect("single-operand entry");
            let fixed = crate::bounds::evaluate_bound(BoundId::T2FixedPi, &a, &space, None, &cfg)
                .expect("single-operand entry");
            if (scanned.rhs - 2.0).abs() > 1e-9 {
                return Err(mismatch(format!("scanned rhs {} far from 2", scanned.rhs)));
            }
            if scanned.params.theta != Some(0.0) {
                return Err(mismatch(format!(
                    "theta {:?} is not 0",
                    scanned.params.theta
                )));
            }
            if (fixed.rhs - 6.0).abs() > 1e-9 {
                return Err(mismatch(format!(
                    "fixed-angle rhs {} far from 6",
                    fixed.rhs
                )));
            }
            Ok(vec![scanned, fixed])
        }
        "nilpotent-orthonormal" => {
            let space = rkhs::build_orthonormal::<f64>(2, 2).expect("standard basis model");
            let a = Operator::new(ndarray::array![
                [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
                [Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)]
            ])
            .expect("finite");
            let profile = BerezinProfile::new(&a, &space).expect("dimensions match");
            let (eta, _) = profile.eta();
            let (ber, _) = profile.ber();
            let bnorm =
                berezin::berezin_norm(&a.adjoint().compose(&a), &space).expect("dimensions match");
            if eta != 1.0 || ber != 0.0 || bnorm != 1.0 {
                return Err(mismatch(format!(
                    "expected eta 1, ber 0, coupling norm 1; got {eta}, {ber}, {bnorm}"
                )));
            }
            let chain = crate::bounds::evaluate_bound(BoundId::Eqn1, &a, &space, None, &cfg)
                .expect("single-operand entry");
            if chain.slack != 0.0 {
                return Err(mismatch(format!(
                    "chain slack {} is not exactly 0",
                    chain.slack
                )));
            }
            Ok(vec![chain])
        }
        "identity" => {
            let space = rkhs::build_szego(&[Complex::new(0.0, 0.0), Complex::new(0.5, 0.0)])
                .expect("two-point disc model");
            let a = Operator::<f64>::identity(space.dim());
            let (eta, _) = BerezinProfile::new(&a, &space)
                .expect("dimensions match")
                .eta();
            if (eta - 2.0f64.sqrt()).abs() > 1e-12 {
                return Err(mismatch(format!("eta {eta} far from sqrt(2)")));
            }
            let chain = crate::bounds::evaluate_bound(BoundId::Eqn1, &a, &space, None, &cfg)
                .expect("single-operand entry");
            if !chain.satisfied {
                return Err(mismatch("chain verdict failed".to_string()));
            }
            Ok(vec![chain])
        }
        other => Err(HarnessError::UnknownFixture(other.to_string())),
    }
}
