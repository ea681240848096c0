//! Shared per-instance state for the registry evaluators.
//!
//! All registry entries combine a small set of ingredients: the shell profile
//! of the operator, spectra of the two moduli, and coupling matrices of
//! modulus powers against the normalized kernel columns. Factoring the model
//! columns through the modulus eigenbases once lets every power scan reweight
//! eigenvalues instead of re-diagonalizing, which turns each step of an
//! `alpha` scan into a handful of small matrix products.
//!
//! Exponent bookkeeping: powers are expressed on the squared modulus, so
//! `|A|^(2s)` maps to eigenvalues `mu^s` of `A*A` and `|A*|^(2s)` to `nu^s`
//! of `AA*`. The `s = 0` case goes through the same range-projector
//! convention as the assembled operator powers.

use super::{BoundError, BoundEvaluation, BoundId, BoundParams, EvalConfig, Result};
use crate::berezin::{pair_matrix_max_abs, BerezinProfile};
use crate::linalg::{adjoint, hermitian_lambda_max, inner, CMatrix};
use crate::operator::{dw_lower_estimate, numerical_radius, operator_norm, Operator, PsdSpectrum};
use crate::optimize::minimize_scalar;
use crate::rkhs::KernelSpace;
use crate::scalar::Scalar;
use ndarray::Array2;
use num_complex::Complex;
use std::cell::OnceCell;

/// Relative commutator tolerance deciding whether an operator counts as
/// normal.
const NORMALITY_TOL: f64 = 1e-10;
/// Absolute tolerance on `Re<A k, B k>` for the orthogonal-sum gate.
const ORTHOGONALITY_TOL: f64 = 1e-10;

pub(super) struct InstanceContext<'a, F: Scalar> {
    a: &'a Operator<F>,
    space: &'a KernelSpace<F>,
    profile: BerezinProfile<F>,
    eta_sq: F,
    eta_index: usize,
    ber_a: F,
    least_a: F,
    /// Largest symbol modulus of the squared operator.
    ber_a_sq_op: F,
    /// Spectrum of `A*A`.
    left: PsdSpectrum<F>,
    /// Spectrum of `AA*`.
    right: PsdSpectrum<F>,
    /// Kernel columns in the `A*A` eigenbasis.
    p: CMatrix<F>,
    /// Kernel columns in the `AA*` eigenbasis.
    q: CMatrix<F>,
    /// Change of basis between the two modulus eigenbases.
    w: CMatrix<F>,
    p_abs_sq: Array2<F>,
    q_abs_sq: Array2<F>,
    /// Coupling matrix of `|A|^2`.
    m_aa: CMatrix<F>,
    /// Coupling matrix of `|A*|^2`.
    m_aadj: CMatrix<F>,
    /// Coupling matrix of `|A|^4`.
    m_a4: CMatrix<F>,
    /// Coupling matrix of `((|A| + |A*|) / 2)^2`.
    m_mean_sq: CMatrix<F>,
    bnorm_aa: F,
    least_aa: F,
    /// Numerical radius and operator norm, computed on first use.
    estimates: OnceCell<(F, F)>,
    /// Witnessed shell estimate, computed on first use.
    dw_cell: OnceCell<F>,
}

impl<'a, F: Scalar> InstanceContext<'a, F> {
    pub(super) fn new(a: &'a Operator<F>, space: &'a KernelSpace<F>) -> Result<Self> {
        let profile = BerezinProfile::new(a, space)?;
        let (eta_sq, eta_index) = profile.eta_sq();
        let (ber_a, _) = profile.ber();
        let (least_a, _) = profile.least();
        let k = space.kernels();
        let a_sq = a.compose(a);
        let ber_a_sq_op = column_symbol_max(a_sq.entries(), k);

        let left = PsdSpectrum::new(&a.gram_of_columns())?;
        let right = PsdSpectrum::new(&a.adjoint().gram_of_columns())?;
        let p = adjoint(left.vectors()).dot(k);
        let q = adjoint(right.vectors()).dot(k);
        let w = adjoint(left.vectors()).dot(right.vectors());
        let p_abs_sq = Array2::from_shape_fn(p.dim(), |ix| p[ix].norm_sqr());
        let q_abs_sq = Array2::from_shape_fn(q.dim(), |ix| q[ix].norm_sqr());

        let ak = a.entries().dot(k);
        let m_aa = adjoint(&ak).dot(&ak);
        let ahk = adjoint(a.entries()).dot(k);
        let m_aadj = adjoint(&ahk).dot(&ahk);
        let m_a4 = pair_power(&left, &p, F::konst(2.0));
        let half = F::konst(0.5);
        let cross_half = cross_power(&left, &right, &p, &q, &w, half, half);
        let quarter = Complex::new(F::konst(0.25), F::zero());
        let m_mean_sq = Array2::from_shape_fn(m_aa.dim(), |(i, j)| {
            (m_aa[(i, j)] + m_aadj[(i, j)] + cross_half[(i, j)] + cross_half[(j, i)].conj())
                * quarter
        });

        let bnorm_aa = pair_matrix_max_abs(&m_aa);
        let least_aa = profile
            .image_norms_sq()
            .iter()
            .copied()
            .fold(F::infinity(), F::min);

        Ok(InstanceContext {
            a,
            space,
            profile,
            eta_sq,
            eta_index,
            ber_a,
            least_a,
            ber_a_sq_op,
            left,
            right,
            p,
            q,
            w,
            p_abs_sq,
            q_abs_sq,
            m_aa,
            m_aadj,
            m_a4,
            m_mean_sq,
            bnorm_aa,
            least_aa,
            estimates: OnceCell::new(),
            dw_cell: OnceCell::new(),
        })
    }

    pub(super) fn evaluate(
        &self,
        id: BoundId,
        b: Option<&Operator<F>>,
        cfg: &EvalConfig<F>,
    ) -> Result<BoundEvaluation<F>> {
        let tol = cfg.tol_for(id);
        match id {
            BoundId::Eqn0Lower | BoundId::Eqn0Upper => self.eqn0(id, cfg),
            BoundId::Eqn1 => Ok(self.eqn1(tol)),
            BoundId::T1i => {
                let lhs = (self.least_a * self.least_a + self.bnorm_aa * self.bnorm_aa)
                    .max(self.ber_a * self.ber_a + self.least_aa * self.least_aa);
                Ok(single(
                    id,
                    lhs,
                    self.eta_sq,
                    BoundParams::default(),
                    Some(self.eta_index),
                    tol,
                ))
            }
            BoundId::T1ii => {
                let lhs =
                    F::konst(2.0) * (self.ber_a * self.least_aa).max(self.least_a * self.bnorm_aa);
                Ok(single(
                    id,
                    lhs,
                    self.eta_sq,
                    BoundParams::default(),
                    Some(self.eta_index),
                    tol,
                ))
            }
            BoundId::T1iii => {
                let one = F::one();
                let lhs = (self.least_a * self.least_a * (one + self.bnorm_aa))
                    .max(self.ber_a * self.ber_a * (one + self.least_aa));
                Ok(single(
                    id,
                    lhs,
                    self.eta_sq,
                    BoundParams::default(),
                    Some(self.eta_index),
                    tol,
                ))
            }
            BoundId::T2 => Ok(self.t2(cfg, tol)),
            BoundId::T2FixedPi => Ok(self.t2_fixed_pi(tol)),
            BoundId::T3Upper => Ok(self.t3_upper(tol)),
            BoundId::T3Lower => Ok(self.t3_lower(tol)),
            BoundId::T5 => {
                let (alpha, rhs) = self.min_alpha(cfg, |al| self.t5_rhs_at(al));
                Ok(self.upper(id, rhs, with_alpha(alpha), tol))
            }
            BoundId::C1 => {
                let half = F::konst(0.5);
                Ok(self.upper(id, self.t5_rhs_at(half), with_alpha(half), tol))
            }
            BoundId::T6 => Ok(self.t6(cfg, tol)),
            BoundId::C2 => {
                let (alpha, rhs) = self.min_alpha(cfg, |al| self.t6_rhs_at(F::one(), al));
                let lhs = self.eta_sq * self.eta_sq;
                Ok(single(
                    id,
                    lhs,
                    rhs,
                    with_alpha(alpha),
                    Some(self.eta_index),
                    tol,
                ))
            }
            BoundId::RmkNormal => self.rmk_normal(cfg, tol),
            BoundId::T7 => {
                let (alpha, rhs) = self.min_alpha(cfg, |al| self.t7_rhs_at(al));
                Ok(self.upper(id, rhs, with_alpha(alpha), tol))
            }
            BoundId::C3 => Ok(self.c3(tol)),
            BoundId::T8 => {
                let (alpha, rhs) = self.min_alpha(cfg, |al| self.t8_rhs_at(al));
                Ok(self.upper(id, rhs, with_alpha(alpha), tol))
            }
            BoundId::T9 => {
                let (a1, b1) = self.min_alpha(cfg, |al| self.t9_branch_at(al, false));
                let (a2, b2) = self.min_alpha(cfg, |al| self.t9_branch_at(al, true));
                let (alpha, rhs) = if b1 <= b2 { (a1, b1) } else { (a2, b2) };
                Ok(self.upper(id, rhs, with_alpha(alpha), tol))
            }
            BoundId::C4i => {
                let zero = F::zero();
                let rhs = self
                    .t9_branch_at(zero, false)
                    .min(self.t9_branch_at(zero, true));
                Ok(self.upper(id, rhs, BoundParams::default(), tol))
            }
            BoundId::C4ii => {
                let quarter = F::konst(0.25);
                let four = F::konst(4.0);
                let rhs = quarter * self.max_abs_combo3(F::one(), F::one(), four)
                    + F::konst(0.5) * self.ber_a_sq_op;
                Ok(self.upper(id, rhs, BoundParams::default(), tol))
            }
            BoundId::T10 => {
                let (a1, b1) = self.min_alpha(cfg, |al| self.t10_branch_at(al, false));
                let (a2, b2) = self.min_alpha(cfg, |al| self.t10_branch_at(al, true));
                let (alpha, rhs) = if b1 <= b2 { (a1, b1) } else { (a2, b2) };
                Ok(self.upper(id, rhs, with_alpha(alpha), tol))
            }
            BoundId::Sum => self.sum(id, b, tol),
            BoundId::SumOrth => self.sum_orth(id, b, tol),
        }
    }

    // ------------------------------------------------------------------
    // estimator-backed entries
    // ------------------------------------------------------------------

    fn estimates(&self, cfg: &EvalConfig<F>) -> (F, F) {
        *self.estimates.get_or_init(|| {
            let w = numerical_radius(self.a, cfg.refine_tol).value;
            let nrm = operator_norm(self.a).value;
            (w, nrm)
        })
    }

    fn dw_value(&self, cfg: &EvalConfig<F>) -> Result<F> {
        if let Some(&v) = self.dw_cell.get() {
            return Ok(v);
        }
        let est = dw_lower_estimate(self.a, Some(self.space), cfg.dw_restarts, cfg.dw_seed)?;
        let _ = self.dw_cell.set(est.value);
        Ok(est.value)
    }

    fn eqn0(&self, id: BoundId, cfg: &EvalConfig<F>) -> Result<BoundEvaluation<F>> {
        let (w, nrm) = self.estimates(cfg);
        let dw = self.dw_value(cfg)?;
        let tol = cfg.tol_for(id);
        let ev = match id {
            BoundId::Eqn0Lower => {
                let lhs = w.max(nrm * nrm);
                single(id, lhs, dw, BoundParams::default(), None, tol)
            }
            _ => {
                let rhs = (w * w + nrm.powi(4)).sqrt();
                single(id, dw, rhs, BoundParams::default(), None, tol)
            }
        };
        Ok(ev)
    }

    // ------------------------------------------------------------------
    // chain and closed-form entries
    // ------------------------------------------------------------------

    fn eqn1(&self, tol: F) -> BoundEvaluation<F> {
        let eta = self.eta_sq.sqrt();
        let lower_lhs = self.ber_a.max(self.bnorm_aa);
        let upper_rhs = (self.ber_a * self.ber_a + self.bnorm_aa * self.bnorm_aa).sqrt();
        family(
            BoundId::Eqn1,
            &[
                (lower_lhs, eta, BoundParams::default()),
                (eta, upper_rhs, BoundParams::default()),
            ],
            Some(self.eta_index),
            tol,
        )
    }

    fn t2(&self, cfg: &EvalConfig<F>, tol: F) -> BoundEvaluation<F> {
        let symbols = self.profile.symbols();
        let norms = self.profile.image_norms_sq();
        let rotated_ber_sq = |theta: F| {
            let rot = Complex::from_polar(F::one(), theta);
            let mut best = F::zero();
            for (s, &qv) in symbols.iter().zip(norms) {
                let v = (rot * *s + Complex::new(qv, F::zero())).norm();
                best = best.max(v);
            }
            best * best
        };
        let two_pi = F::konst(2.0) * F::PI();
        let (theta, base) = minimize_scalar(
            rotated_ber_sq,
            F::zero(),
            two_pi,
            cfg.theta_grid + 1,
            cfg.refine_tol,
        );
        let rhs = base + F::konst(2.0) * self.bnorm_aa * self.ber_a;
        let params = BoundParams {
            theta: Some(theta),
            ..BoundParams::default()
        };
        self.upper(BoundId::T2, rhs, params, tol)
    }

    fn t2_fixed_pi(&self, tol: F) -> BoundEvaluation<F> {
        let mut best = F::zero();
        for (s, &qv) in self
            .profile
            .symbols()
            .iter()
            .zip(self.profile.image_norms_sq())
        {
            let v = (Complex::new(qv, F::zero()) - *s).norm();
            best = best.max(v);
        }
        let rhs = best * best + F::konst(2.0) * self.bnorm_aa * self.ber_a;
        let params = BoundParams {
            theta: Some(F::PI()),
            ..BoundParams::default()
        };
        self.upper(BoundId::T2FixedPi, rhs, params, tol)
    }

    fn shifted_symbol_range(&self, sign: F) -> (F, F) {
        // (max, min) of |s +- q| over the model points.
        let mut hi = F::zero();
        let mut lo = F::infinity();
        for (s, &qv) in self
            .profile
            .symbols()
            .iter()
            .zip(self.profile.image_norms_sq())
        {
            let v = (*s + Complex::new(sign * qv, F::zero())).norm();
            hi = hi.max(v);
            lo = lo.min(v);
        }
        (hi, lo)
    }

    fn t3_upper(&self, tol: F) -> BoundEvaluation<F> {
        let (ber_plus, _) = self.shifted_symbol_range(F::one());
        let (ber_minus, _) = self.shifted_symbol_range(-F::one());
        let rhs = F::konst(0.5) * (ber_plus * ber_plus + ber_minus * ber_minus);
        self.upper(BoundId::T3Upper, rhs, BoundParams::default(), tol)
    }

    fn t3_lower(&self, tol: F) -> BoundEvaluation<F> {
        let (ber_plus, least_plus) = self.shifted_symbol_range(F::one());
        let (ber_minus, least_minus) = self.shifted_symbol_range(-F::one());
        let lhs = F::konst(0.5)
            * (ber_plus * ber_plus + least_minus * least_minus)
                .max(ber_minus * ber_minus + least_plus * least_plus);
        single(
            BoundId::T3Lower,
            lhs,
            self.eta_sq,
            BoundParams::default(),
            Some(self.eta_index),
            tol,
        )
    }

    // ------------------------------------------------------------------
    // weighted modulus-power entries
    // ------------------------------------------------------------------

    pub(super) fn t5_rhs_at(&self, alpha: F) -> F {
        let one = F::one();
        let quarter = F::konst(0.25);
        let mx = self.pair_left(alpha);
        let my = self.pair_right(one - alpha);
        let norm_sum = max_abs_sum2(&mx, &my);
        let x = self.diag_left(alpha);
        let y = self.diag_right(one - alpha);
        let two = F::konst(2.0);
        let mut plus = F::zero();
        let mut minus = F::zero();
        for ((&qv, &xv), &yv) in self.profile.image_norms_sq().iter().zip(&x).zip(&y) {
            plus = plus.max((two * qv + xv - yv).abs());
            minus = minus.max((two * qv - xv + yv).abs());
        }
        quarter * norm_sum * norm_sum + quarter * plus * minus
    }

    pub(super) fn t6_rhs_at(&self, r: F, alpha: F) -> F {
        let two = F::konst(2.0);
        let base = self.pair_left(two * r);
        let left = max_abs_sum2(&self.pair_left(two * alpha * r), &base);
        let right = max_abs_sum2(&self.pair_right(two * (F::one() - alpha) * r), &base);
        two.powf(two * r - two) * left * right
    }

    fn t6(&self, cfg: &EvalConfig<F>, tol: F) -> BoundEvaluation<F> {
        let two = F::konst(2.0);
        let mut members = Vec::with_capacity(cfg.r_values.len());
        for &r in &cfg.r_values {
            let base = self.pair_left(two * r);
            let rhs_at = |alpha: F| {
                let left = max_abs_sum2(&self.pair_left(two * alpha * r), &base);
                let right = max_abs_sum2(&self.pair_right(two * (F::one() - alpha) * r), &base);
                two.powf(two * r - two) * left * right
            };
            let (alpha, rhs) = self.min_alpha(cfg, rhs_at);
            let lhs = self.eta_sq.powf(two * r);
            let mut params = with_alpha(alpha);
            params.r = Some(r);
            members.push((lhs, rhs, params));
        }
        family(BoundId::T6, &members, Some(self.eta_index), tol)
    }

    fn rmk_normal(&self, cfg: &EvalConfig<F>, tol: F) -> Result<BoundEvaluation<F>> {
        let aa = self.a.gram_of_columns();
        let comm = aa.sub(&self.a.adjoint().gram_of_columns());
        let neg = comm.scale(Complex::new(-F::one(), F::zero()));
        let defect = hermitian_lambda_max(comm.entries()).max(hermitian_lambda_max(neg.entries()));
        let gate = F::konst(NORMALITY_TOL) * self.left.lambda_max();
        if defect > gate {
            return Err(BoundError::NotNormal {
                defect: defect.as_f64(),
                tol: gate.as_f64(),
            });
        }
        let two = F::konst(2.0);
        let rhs_at = |alpha: F| {
            let left = max_abs_sum2(&self.pair_left(two * alpha), &self.m_a4).sqrt();
            let right = max_abs_sum2(&self.pair_left(two * (F::one() - alpha)), &self.m_a4).sqrt();
            left * right
        };
        let (alpha, rhs) = self.min_alpha(cfg, rhs_at);
        Ok(self.upper(BoundId::RmkNormal, rhs, with_alpha(alpha), tol))
    }

    pub(super) fn t7_rhs_at(&self, alpha: F) -> F {
        let one = F::one();
        let two_s = F::konst(2.0);
        let mx = self.pair_left(two_s * alpha);
        let my = self.pair_right(two_s * (one - alpha));
        let cr = cross_power(
            &self.left,
            &self.right,
            &self.p,
            &self.q,
            &self.w,
            alpha,
            one - alpha,
        );
        let two = Complex::new(F::konst(2.0), F::zero());
        let mut norm = F::zero();
        let (m, _) = mx.dim();
        for i in 0..m {
            for j in 0..m {
                let z = mx[(i, j)]
                    + my[(i, j)]
                    + cr[(i, j)]
                    + cr[(j, i)].conj()
                    + self.m_a4[(i, j)] * two;
                norm = norm.max(z.norm());
            }
        }
        let cx = self
            .diag_left(alpha)
            .into_iter()
            .fold(F::infinity(), F::min);
        let cy = self
            .diag_right(one - alpha)
            .into_iter()
            .fold(F::infinity(), F::min);
        F::konst(0.5) * norm - cx * cy
    }

    fn c3(&self, tol: F) -> BoundEvaluation<F> {
        let four = Complex::new(F::konst(4.0), F::zero());
        let two = Complex::new(F::konst(2.0), F::zero());
        let mut norm = F::zero();
        let (m, _) = self.m_mean_sq.dim();
        for i in 0..m {
            for j in 0..m {
                let z = self.m_mean_sq[(i, j)] * four + self.m_a4[(i, j)] * two;
                norm = norm.max(z.norm());
            }
        }
        let half = F::konst(0.5);
        let c_mod = self.diag_left(half).into_iter().fold(F::infinity(), F::min);
        let c_mod_adj = self
            .diag_right(half)
            .into_iter()
            .fold(F::infinity(), F::min);
        let rhs = norm - c_mod * c_mod_adj;
        self.upper(BoundId::C3, rhs, BoundParams::default(), tol)
    }

    pub(super) fn t8_rhs_at(&self, alpha: F) -> F {
        self.max_abs_combo3(alpha, F::one() - alpha, F::one())
    }

    fn t9_branch_at(&self, alpha: F, swap: bool) -> F {
        let quarter_w = alpha / F::konst(4.0);
        let big_w = F::one() - F::konst(0.75) * alpha;
        let (ca, cb) = if swap {
            (big_w, quarter_w)
        } else {
            (quarter_w, big_w)
        };
        alpha / F::konst(2.0) * self.ber_a_sq_op + self.max_abs_combo3(ca, cb, F::one())
    }

    fn t10_branch_at(&self, alpha: F, use_adjoint: bool) -> F {
        let side = if use_adjoint {
            &self.m_aadj
        } else {
            &self.m_aa
        };
        let ca = Complex::new(alpha, F::zero());
        let cb = Complex::new(F::one() - alpha, F::zero());
        let mut best = F::zero();
        let (m, _) = side.dim();
        for i in 0..m {
            for j in 0..m {
                let z = self.m_mean_sq[(i, j)] * ca + side[(i, j)] * cb + self.m_a4[(i, j)];
                best = best.max(z.norm());
            }
        }
        best
    }

    // ------------------------------------------------------------------
    // two-operand entries
    // ------------------------------------------------------------------

    fn sum(&self, id: BoundId, b: Option<&Operator<F>>, tol: F) -> Result<BoundEvaluation<F>> {
        let b = b.ok_or(BoundError::MissingSecondOperand { id })?;
        let profile_b = BerezinProfile::new(b, self.space)?;
        let profile_sum = BerezinProfile::new(&self.a.add(b), self.space)?;
        let coupling = self
            .a
            .adjoint()
            .compose(b)
            .add(&b.adjoint().compose(self.a));
        let coupling_ber = column_symbol_max(coupling.entries(), self.space.kernels());
        let (lhs, argmax) = profile_sum.eta();
        let rhs = self.eta_sq.sqrt() + profile_b.eta().0 + coupling_ber;
        Ok(single(
            id,
            lhs,
            rhs,
            BoundParams::default(),
            Some(argmax),
            tol,
        ))
    }

    fn sum_orth(&self, id: BoundId, b: Option<&Operator<F>>, tol: F) -> Result<BoundEvaluation<F>> {
        let b = b.ok_or(BoundError::MissingSecondOperand { id })?;
        let profile_b = BerezinProfile::new(b, self.space)?;
        let k = self.space.kernels();
        let ak = self.a.entries().dot(k);
        let bk = b.entries().dot(k);
        let mut defect = F::zero();
        for col in 0..ak.ncols() {
            let overlap = inner(&ak.column(col).to_owned(), &bk.column(col).to_owned());
            defect = defect.max(overlap.re.abs());
        }
        let gate = F::konst(ORTHOGONALITY_TOL);
        if defect > gate {
            return Err(BoundError::NotOrthogonal {
                defect: defect.as_f64(),
                tol: gate.as_f64(),
            });
        }
        let profile_sum = BerezinProfile::new(&self.a.add(b), self.space)?;
        let (lhs, argmax) = profile_sum.eta();
        let rhs = self.eta_sq.sqrt() + profile_b.eta().0;
        Ok(single(
            id,
            lhs,
            rhs,
            BoundParams::default(),
            Some(argmax),
            tol,
        ))
    }

    // ------------------------------------------------------------------
    // cached building blocks
    // ------------------------------------------------------------------

    /// Coupling matrix of `|A|^(2s)`.
    fn pair_left(&self, s: F) -> CMatrix<F> {
        pair_power(&self.left, &self.p, s)
    }

    /// Coupling matrix of `|A*|^(2s)`.
    fn pair_right(&self, s: F) -> CMatrix<F> {
        pair_power(&self.right, &self.q, s)
    }

    /// Symbols of `|A|^(2s)` at every model point.
    fn diag_left(&self, s: F) -> Vec<F> {
        diag_power(&self.left, &self.p_abs_sq, s)
    }

    /// Symbols of `|A*|^(2s)` at every model point.
    fn diag_right(&self, s: F) -> Vec<F> {
        diag_power(&self.right, &self.q_abs_sq, s)
    }

    /// `max_abs` of `ca * |A|^2 + cb * |A*|^2 + cc * |A|^4` couplings.
    fn max_abs_combo3(&self, ca: F, cb: F, cc: F) -> F {
        let ca = Complex::new(ca, F::zero());
        let cb = Complex::new(cb, F::zero());
        let cc = Complex::new(cc, F::zero());
        let mut best = F::zero();
        let (m, _) = self.m_aa.dim();
        for i in 0..m {
            for j in 0..m {
                let z = self.m_aa[(i, j)] * ca + self.m_aadj[(i, j)] * cb + self.m_a4[(i, j)] * cc;
                best = best.max(z.norm());
            }
        }
        best
    }

    fn min_alpha(&self, cfg: &EvalConfig<F>, f: impl Fn(F) -> F) -> (F, F) {
        minimize_scalar(f, F::zero(), F::one(), cfg.alpha_grid, cfg.refine_tol)
    }

    fn upper(&self, id: BoundId, rhs: F, params: BoundParams<F>, tol: F) -> BoundEvaluation<F> {
        single(id, self.eta_sq, rhs, params, Some(self.eta_index), tol)
    }
}

fn with_alpha<F: Scalar>(alpha: F) -> BoundParams<F> {
    BoundParams {
        theta: None,
        alpha: Some(alpha),
        r: None,
    }
}

fn scale_of<F: Scalar>(lhs: F, rhs: F) -> F {
    lhs.abs().max(rhs.abs()).max(F::one())
}

fn single<F: Scalar>(
    id: BoundId,
    lhs: F,
    rhs: F,
    params: BoundParams<F>,
    argmax_index: Option<usize>,
    tol: F,
) -> BoundEvaluation<F> {
    let slack = rhs - lhs;
    let satisfied = slack >= -tol * scale_of(lhs, rhs);
    BoundEvaluation {
        id,
        lhs,
        rhs,
        slack,
        satisfied,
        params,
        argmax_index,
    }
}

/// Reports the binding member of a multi-part bound: the one with the
/// smallest relative slack. The verdict covers every member.
fn family<F: Scalar>(
    id: BoundId,
    members: &[(F, F, BoundParams<F>)],
    argmax_index: Option<usize>,
    tol: F,
) -> BoundEvaluation<F> {
    assert!(
        !members.is_empty(),
        "a multi-part bound needs at least one member"
    );
    let mut satisfied = true;
    let mut best_rel = F::infinity();
    let mut best = 0usize;
    for (i, &(lhs, rhs, _)) in members.iter().enumerate() {
        let scale = scale_of(lhs, rhs);
        let slack = rhs - lhs;
        if slack < -tol * scale {
            satisfied = false;
        }
        let rel = slack / scale;
        if rel < best_rel {
            best_rel = rel;
            best = i;
        }
    }
    let (lhs, rhs, params) = members[best];
    BoundEvaluation {
        id,
        lhs,
        rhs,
        slack: rhs - lhs,
        satisfied,
        params,
        argmax_index,
    }
}

/// Largest symbol modulus `max_j |<M k_j, k_j>|` for an arbitrary matrix `M`
/// against normalized kernel columns `k`.
fn column_symbol_max<F: Scalar>(m: &CMatrix<F>, k: &CMatrix<F>) -> F {
    let mk = m.dot(k);
    let mut best = F::zero();
    for j in 0..k.ncols() {
        let mut acc = Complex::new(F::zero(), F::zero());
        for i in 0..k.nrows() {
            acc += mk[(i, j)] * k[(i, j)].conj();
        }
        best = best.max(acc.norm());
    }
    best
}

/// Coupling matrix `K^H P^s K` from the factored form `proj = basis^H K`.
fn pair_power<F: Scalar>(spec: &PsdSpectrum<F>, proj: &CMatrix<F>, s: F) -> CMatrix<F> {
    let mut scaled = proj.clone();
    for (i, &lam) in spec.values().iter().enumerate() {
        let w = spec.power_eigenvalue(lam, s);
        for j in 0..scaled.ncols() {
            scaled[(i, j)] *= w;
        }
    }
    adjoint(proj).dot(&scaled)
}

/// Symbols `<P^s k_j, k_j>` from squared projection magnitudes.
fn diag_power<F: Scalar>(spec: &PsdSpectrum<F>, abs_sq: &Array2<F>, s: F) -> Vec<F> {
    let (n, m) = abs_sq.dim();
    let mut out = vec![F::zero(); m];
    for i in 0..n {
        let w = spec.power_eigenvalue(spec.values()[i], s);
        for (j, slot) in out.iter_mut().enumerate() {
            *slot += w * abs_sq[(i, j)];
        }
    }
    out
}

/// Coupling matrix `K^H P^sl Q^sr K` of a product of powers of the two
/// moduli, through the change of basis `w` between their eigenbases.
fn cross_power<F: Scalar>(
    left: &PsdSpectrum<F>,
    right: &PsdSpectrum<F>,
    p: &CMatrix<F>,
    q: &CMatrix<F>,
    w: &CMatrix<F>,
    sl: F,
    sr: F,
) -> CMatrix<F> {
    let n = w.nrows();
    let wl: Vec<F> = left
        .values()
        .iter()
        .map(|&lam| left.power_eigenvalue(lam, sl))
        .collect();
    let wr: Vec<F> = right
        .values()
        .iter()
        .map(|&lam| right.power_eigenvalue(lam, sr))
        .collect();
    let mut t = w.clone();
    for i in 0..n {
        for k in 0..n {
            t[(i, k)] *= wl[i] * wr[k];
        }
    }
    adjoint(p).dot(&t.dot(q))
}

fn max_abs_sum2<F: Scalar>(a: &CMatrix<F>, b: &CMatrix<F>) -> F {
    let mut best = F::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        best = best.max((*x + *y).norm());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berezin;
    use crate::operator::psd_power;
    use crate::rkhs;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_distr::StandardNormal;
    use rand_xoshiro::SplitMix64;

    fn random_instance(seed: u64, m: usize) -> (Operator<f64>, KernelSpace<f64>) {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let pts: Vec<Complex<f64>> = (0..m)
            .map(|_| {
                let r = 0.7 * rng.random::<f64>().sqrt();
                let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                Complex::from_polar(r, phi)
            })
            .collect();
        let space = rkhs::build_szego(&pts).unwrap();
        let n = space.dim();
        let a = Operator::new(Array2::from_shape_fn((n, n), |_| {
            Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        }))
        .unwrap();
        (a, space)
    }

    #[test]
    fn factored_pair_matrices_match_assembled_powers() {
        let (a, space) = random_instance(3, 4);
        let ctx = InstanceContext::new(&a, &space).unwrap();
        let aa = a.gram_of_columns();
        let aadj = a.adjoint().gram_of_columns();
        for &s in &[0.0, 0.3, 0.5, 1.0, 1.7, 2.0, 3.0] {
            let direct = berezin::pair_matrix(psd_power(&aa, s).unwrap().entries(), &space);
            let fast = ctx.pair_left(s);
            for (d, f) in direct.iter().zip(fast.iter()) {
                assert!((d - f).norm() < 1e-10, "s={s}: {d} vs {f}");
            }
            let direct_r = berezin::pair_matrix(psd_power(&aadj, s).unwrap().entries(), &space);
            let fast_r = ctx.pair_right(s);
            for (d, f) in direct_r.iter().zip(fast_r.iter()) {
                assert!((d - f).norm() < 1e-10, "s={s}: {d} vs {f}");
            }
        }
    }

    #[test]
    fn factored_diagonals_match_assembled_symbols() {
        let (a, space) = random_instance(7, 5);
        let ctx = InstanceContext::new(&a, &space).unwrap();
        let aa = a.gram_of_columns();
        for &s in &[0.0, 0.25, 1.0, 2.5] {
            let power = psd_power(&aa, s).unwrap();
            let symbols = berezin::berezin_symbols(&power, &space).unwrap();
            let fast = ctx.diag_left(s);
            for (sym, f) in symbols.iter().zip(&fast) {
                assert!((sym.re - f).abs() < 1e-10, "s={s}");
                assert!(sym.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cross_coupling_matches_assembled_product() {
        let (a, space) = random_instance(11, 4);
        let ctx = InstanceContext::new(&a, &space).unwrap();
        let aa = a.gram_of_columns();
        let aadj = a.adjoint().gram_of_columns();
        for &(sl, sr) in &[(0.5, 0.5), (0.3, 0.7), (1.0, 2.0)] {
            let x = psd_power(&aa, sl).unwrap();
            let y = psd_power(&aadj, sr).unwrap();
            let direct = berezin::pair_matrix(x.compose(&y).entries(), &space);
            let fast = cross_power(&ctx.left, &ctx.right, &ctx.p, &ctx.q, &ctx.w, sl, sr);
            for (d, f) in direct.iter().zip(fast.iter()) {
                assert!((d - f).norm() < 1e-9, "sl={sl} sr={sr}: {d} vs {f}");
            }
        }
    }

    #[test]
    fn mean_square_coupling_matches_assembled_operator() {
        let (a, space) = random_instance(13, 4);
        let ctx = InstanceContext::new(&a, &space).unwrap();
        let half = crate::operator::modulus(&a)
            .unwrap()
            .add(&crate::operator::modulus_adjoint(&a).unwrap())
            .scale(Complex::new(0.5, 0.0));
        let direct = berezin::pair_matrix(half.compose(&half).entries(), &space);
        for (d, f) in direct.iter().zip(ctx.m_mean_sq.iter()) {
            assert!((d - f).norm() < 1e-9, "{d} vs {f}");
        }
    }

    #[test]
    fn squared_symbol_max_matches_profile_route() {
        let (a, space) = random_instance(17, 5);
        let ctx = InstanceContext::new(&a, &space).unwrap();
        let via_profile = berezin::ber(&a.compose(&a), &space).unwrap();
        assert!((ctx.ber_a_sq_op - via_profile).abs() < 1e-12);
    }
}
