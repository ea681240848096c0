//! Registry of operator inequalities on finite kernel models.
//!
//! Every entry relates the Davis-Wielandt shell radius `eta` (or a power of
//! it) to combinations of Berezin numbers, Berezin norms, moduli powers, and
//! witnessed estimator values. Bounds with free parameters (an angle on
//! `[0, 2*pi]`, a weight on `[0, 1]`, a power family) are reported at the
//! parameter that minimizes the bound side found by grid scan plus golden
//! refinement; because every evaluated parameter yields a valid bound, the
//! reported instance is sound even when the exact minimizer is missed.
//!
//! An evaluation reports `lhs <= rhs` with `slack = rhs - lhs` and a verdict
//! relative to `tol * max(|lhs|, |rhs|, 1)`. Chain inequalities (lower and
//! upper half) and families over several powers report the binding member,
//! with the verdict covering all members.

mod context;

use crate::operator::{Operator, OperatorError};
use crate::rkhs::KernelSpace;
use crate::scalar::Scalar;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use crate::optimize::minimize_scalar;
use context::InstanceContext;

/// Stable identifiers of the registry entries, used verbatim in reports and
/// command-line filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundId {
    Eqn0Lower,
    Eqn0Upper,
    Eqn1,
    T1i,
    T1ii,
    T1iii,
    T2,
    T2FixedPi,
    T3Upper,
    T3Lower,
    T5,
    C1,
    T6,
    C2,
    RmkNormal,
    T7,
    C3,
    T8,
    T9,
    C4i,
    C4ii,
    T10,
    Sum,
    SumOrth,
}

impl BoundId {
    /// Registry order.
    pub const ALL: [BoundId; 24] = [
        BoundId::Eqn0Lower,
        BoundId::Eqn0Upper,
        BoundId::Eqn1,
        BoundId::T1i,
        BoundId::T1ii,
        BoundId::T1iii,
        BoundId::T2,
        BoundId::T2FixedPi,
        BoundId::T3Upper,
        BoundId::T3Lower,
        BoundId::T5,
        BoundId::C1,
        BoundId::T6,
        BoundId::C2,
        BoundId::RmkNormal,
        BoundId::T7,
        BoundId::C3,
        BoundId::T8,
        BoundId::T9,
        BoundId::C4i,
        BoundId::C4ii,
        BoundId::T10,
        BoundId::Sum,
        BoundId::SumOrth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Eqn0Lower => "B-EQN0-L",
            BoundId::Eqn0Upper => "B-EQN0-U",
            BoundId::Eqn1 => "B-EQN1",
            BoundId::T1i => "B-T1-i",
            BoundId::T1ii => "B-T1-ii",
            BoundId::T1iii => "B-T1-iii",
            BoundId::T2 => "B-T2",
            BoundId::T2FixedPi => "B-T2-FIXED-PI",
            BoundId::T3Upper => "B-T3-U",
            BoundId::T3Lower => "B-T3-L",
            BoundId::T5 => "B-T5",
            BoundId::C1 => "B-C1",
            BoundId::T6 => "B-T6",
            BoundId::C2 => "B-C2",
            BoundId::RmkNormal => "B-RMK-NORMAL",
            BoundId::T7 => "B-T7",
            BoundId::C3 => "B-C3",
            BoundId::T8 => "B-T8",
            BoundId::T9 => "B-T9",
            BoundId::C4i => "B-C4-i",
            BoundId::C4ii => "B-C4-ii",
            BoundId::T10 => "B-T10",
            BoundId::Sum => "B-SUM",
            BoundId::SumOrth => "B-SUM-ORTH",
        }
    }

    /// Whether the bound relates two operators instead of one.
    pub fn needs_second_operand(self) -> bool {
        matches!(self, BoundId::Sum | BoundId::SumOrth)
    }

    /// Whether the bound only applies to normal operators.
    pub fn needs_normal_operator(self) -> bool {
        matches!(self, BoundId::RmkNormal)
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl serde::Serialize for BoundId {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> serde::Deserialize<'de> for BoundId {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for BoundId {
    type Err = BoundError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| BoundError::UnknownBoundId(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("unknown bound id: {0}")]
    UnknownBoundId(String),
    #[error("bound {id} needs a second operand")]
    MissingSecondOperand { id: BoundId },
    #[error("operator is not normal: commutator norm {defect:.3e} exceeds {tol:.3e}")]
    NotNormal { defect: f64, tol: f64 },
    #[error(
        "operands are not shell-orthogonal: max |Re<A k, B k>| = {defect:.3e} exceeds {tol:.3e}"
    )]
    NotOrthogonal { defect: f64, tol: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

pub type Result<T> = std::result::Result<T, BoundError>;

/// Minimizer location of a parameterized bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams<F: Scalar> {
    /// Rotation angle, when the bound scans `[0, 2*pi]`.
    pub theta: Option<F>,
    /// Interpolation weight, when the bound scans `[0, 1]`.
    pub alpha: Option<F>,
    /// Power-family member, when the bound ranges over several exponents.
    pub r: Option<F>,
}

impl<F: Scalar> Default for BoundParams<F> {
    fn default() -> Self {
        BoundParams {
            theta: None,
            alpha: None,
            r: None,
        }
    }
}

/// Outcome of evaluating one registry entry on one instance.
#[derive(Debug, Clone)]
pub struct BoundEvaluation<F: Scalar> {
    pub id: BoundId,
    pub lhs: F,
    pub rhs: F,
    /// Exactly `rhs - lhs`; negative means the inequality side lost.
    pub slack: F,
    /// `slack >= -tol * max(|lhs|, |rhs|, 1)`, over every member for chain
    /// and family bounds.
    pub satisfied: bool,
    pub params: BoundParams<F>,
    /// Model point attaining the shell-radius side, when one exists.
    pub argmax_index: Option<usize>,
}

/// Evaluation settings: scan resolutions, power family, and verdict
/// tolerances.
#[derive(Debug, Clone)]
pub struct EvalConfig<F: Scalar> {
    /// Distinct angles scanned on `[0, 2*pi)`.
    pub theta_grid: usize,
    /// Grid points scanned on `[0, 1]`, endpoints included.
    pub alpha_grid: usize,
    /// Golden-section bracket width for both scans.
    pub refine_tol: F,
    /// Exponents checked by the power-family bound.
    pub r_values: Vec<F>,
    /// Relative slack tolerance for closed-form bounds.
    pub tol: F,
    /// Relative slack tolerance for bounds backed by iterative estimators.
    pub estimator_tol: F,
    /// Random restarts for the Davis-Wielandt ascent.
    pub dw_restarts: usize,
    /// Seed for the ascent restarts.
    pub dw_seed: u64,
}

impl<F: Scalar> Default for EvalConfig<F> {
    fn default() -> Self {
        EvalConfig {
            theta_grid: 1024,
            alpha_grid: 257,
            refine_tol: F::konst(1e-8),
            r_values: vec![F::one(), F::konst(1.5), F::konst(2.0), F::konst(3.0)],
            tol: F::konst(1e-9),
            estimator_tol: F::konst(1e-6),
            dw_restarts: 4,
            dw_seed: 0,
        }
    }
}

impl<F: Scalar> EvalConfig<F> {
    /// Verdict tolerance for a given entry.
    pub(crate) fn tol_for(&self, id: BoundId) -> F {
        match id {
            BoundId::Eqn0Lower | BoundId::Eqn0Upper => self.estimator_tol,
            _ => self.tol,
        }
    }
}

/// Evaluates one registry entry. `b` is required exactly for the two-operand
/// entries and ignored otherwise.
pub fn evaluate_bound<F: Scalar>(
    id: BoundId,
    a: &Operator<F>,
    space: &KernelSpace<F>,
    b: Option<&Operator<F>>,
    cfg: &EvalConfig<F>,
) -> Result<BoundEvaluation<F>> {
    let ctx = InstanceContext::new(a, space)?;
    ctx.evaluate(id, b, cfg)
}

/// Evaluates several entries on one instance, sharing the spectral
/// precomputation across all of them. Results come back in input order, one
/// per requested id, errors recorded in place.
pub fn evaluate_bounds<F: Scalar>(
    ids: &[BoundId],
    a: &Operator<F>,
    space: &KernelSpace<F>,
    b: Option<&Operator<F>>,
    cfg: &EvalConfig<F>,
) -> Vec<(BoundId, Result<BoundEvaluation<F>>)> {
    match InstanceContext::new(a, space) {
        Ok(ctx) => ids
            .iter()
            .map(|&id| (id, ctx.evaluate(id, b, cfg)))
            .collect(),
        Err(e) => ids.iter().map(|&id| (id, Err(e.clone()))).collect(),
    }
}

/// Weighted power mean `M_r(a, b)` of two nonnegative numbers with weight
/// `alpha` on `a`. `r = 0` is the geometric mean `a^alpha * b^(1-alpha)`;
/// negative `r` with a zero argument degenerates to zero, matching the limit.
pub fn power_mean<F: Scalar>(a: F, b: F, alpha: F, r: F) -> F {
    assert!(
        a >= F::zero() && b >= F::zero(),
        "power mean needs nonnegative inputs"
    );
    assert!(
        alpha >= F::zero() && alpha <= F::one(),
        "weight must lie in [0, 1]"
    );
    if r == F::zero() {
        return a.powf(alpha) * b.powf(F::one() - alpha);
    }
    if r < F::zero() && (a == F::zero() || b == F::zero()) {
        return F::zero();
    }
    (alpha * a.powf(r) + (F::one() - alpha) * b.powf(r)).powf(F::one() / r)
}
