//! One-dimensional scalar minimization: dense grid scan followed by
//! golden-section refinement of the best bracket.
//!
//! The returned point is the incumbent, i.e. the best value actually
//! evaluated. For minimizing valid upper bounds this is all that is needed:
//! any evaluated parameter yields a true bound, so an inexact minimizer never
//! compromises soundness, only tightness.

use crate::scalar::Scalar;

/// Minimizes `f` on `[lo, hi]`: evaluates `grid` equispaced points (endpoints
/// included), then refines the bracket around the best grid point by
/// golden-section search until its width drops below `refine_tol`. Returns
/// `(x_best, f(x_best))` over every point evaluated. Ties prefer the earlier
/// point, so grid order is reproducible.
pub fn minimize_scalar<F: Scalar>(
    f: impl Fn(F) -> F,
    lo: F,
    hi: F,
    grid: usize,
    refine_tol: F,
) -> (F, F) {
    assert!(grid >= 2, "grid scan needs at least two points");
    assert!(hi > lo, "empty interval");
    let n = grid - 1;
    let width = hi - lo;
    let step = width / F::from_usize(n).unwrap();
    let mut best_x = lo;
    let mut best_f = f(lo);
    let mut best_k = 0usize;
    for k in 1..=n {
        let x = if k == n {
            hi
        } else {
            lo + step * F::from_usize(k).unwrap()
        };
        let fx = f(x);
        if fx < best_f {
            best_f = fx;
            best_x = x;
            best_k = k;
        }
    }
    let bracket_lo = if best_k == 0 {
        lo
    } else {
        lo + step * F::from_usize(best_k - 1).unwrap()
    };
    let bracket_hi = if best_k >= n {
        hi
    } else {
        lo + step * F::from_usize(best_k + 1).unwrap()
    };
    golden_section_min(
        &f,
        bracket_lo,
        bracket_hi,
        refine_tol,
        &mut best_x,
        &mut best_f,
    );
    (best_x, best_f)
}

/// Golden-section minimization on `[a, b]` down to width `tol`, folding every
/// evaluation into the incumbent `(best_x, best_f)`. Only strictly better
/// values displace the incumbent.
pub(crate) fn golden_section_min<F: Scalar>(
    f: &impl Fn(F) -> F,
    mut a: F,
    mut b: F,
    tol: F,
    best_x: &mut F,
    best_f: &mut F,
) {
    let inv_phi = (F::konst(5.0).sqrt() - F::one()) / F::konst(2.0);
    let consider = |x: F, fx: F, bx: &mut F, bf: &mut F| {
        if fx < *bf {
            *bf = fx;
            *bx = x;
        }
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    consider(c, fc, best_x, best_f);
    consider(d, fd, best_x, best_f);
    for _ in 0..512 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            consider(c, fc, best_x, best_f);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            consider(d, fd, best_x, best_f);
        }
    }
}

/// Maximization counterpart used by angle scans: same mechanics with the
/// comparison flipped.
pub(crate) fn golden_section_max<F: Scalar>(
    f: &impl Fn(F) -> F,
    a: F,
    b: F,
    tol: F,
    best_x: &mut F,
    best_f: &mut F,
) {
    let neg = |x: F| -f(x);
    let mut neg_best = -*best_f;
    golden_section_min(&neg, a, b, tol, best_x, &mut neg_best);
    *best_f = -neg_best;
}
