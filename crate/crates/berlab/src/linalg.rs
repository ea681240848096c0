//! Dense complex linear algebra used by the rest of the crate.
//!
//! Matrices are `ndarray::Array2<Complex<F>>` in row-major layout. The two
//! workhorses are a cyclic Jacobi eigensolver for Hermitian matrices (full
//! spectrum plus unitary eigenvectors) and a Householder tridiagonalization
//! with Sturm bisection that extracts only the largest eigenvalue. The two
//! routes are algorithmically independent, which the tests exploit to
//! cross-validate them. Problem sizes here are small (tens of rows), so
//! robustness and determinism beat asymptotics.

use crate::scalar::Scalar;
use ndarray::{Array1, Array2};
use num_complex::Complex;

/// Dense complex matrix.
pub type CMatrix<F> = Array2<Complex<F>>;
/// Dense complex column vector.
pub type CVector<F> = Array1<Complex<F>>;

/// Conjugate transpose.
pub fn adjoint<F: Scalar>(m: &CMatrix<F>) -> CMatrix<F> {
    let (r, c) = m.dim();
    Array2::from_shape_fn((c, r), |(i, j)| m[(j, i)].conj())
}

/// Inner product, linear in the first slot: `sum_i x_i * conj(y_i)`.
pub fn inner<F: Scalar>(x: &CVector<F>, y: &CVector<F>) -> Complex<F> {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Complex::new(F::zero(), F::zero());
    for (a, b) in x.iter().zip(y.iter()) {
        acc += *a * b.conj();
    }
    acc
}

/// Euclidean norm of a complex vector.
pub fn vector_norm<F: Scalar>(x: &CVector<F>) -> F {
    x.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt()
}

/// Frobenius norm of a complex matrix.
pub fn frobenius_norm<F: Scalar>(m: &CMatrix<F>) -> F {
    m.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt()
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs_entry<F: Scalar>(m: &CMatrix<F>) -> F {
    m.iter().map(|z| z.norm()).fold(F::zero(), F::max)
}

/// Identity matrix of size `n`.
pub fn identity<F: Scalar>(n: usize) -> CMatrix<F> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex::new(F::one(), F::zero())
        } else {
            Complex::new(F::zero(), F::zero())
        }
    })
}

/// Replaces `m` by its Hermitian part `(m + m^H) / 2` and zeroes the
/// imaginary parts of the diagonal. Off-diagonal pairs come out exactly
/// conjugate, which downstream eigensolvers rely on.
pub fn hermitian_part<F: Scalar>(m: &CMatrix<F>) -> CMatrix<F> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let half = F::konst(0.5);
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = Complex::new(m[(i, i)].re, F::zero());
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * Complex::new(half, F::zero());
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    out
}

/// Distance from exact Hermitian symmetry: `max_ij |m_ij - conj(m_ji)|`.
pub fn hermitian_defect<F: Scalar>(m: &CMatrix<F>) -> F {
    let n = m.nrows();
    let mut worst = F::zero();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix: `h = vectors * diag(values) * vectors^H`
/// with real eigenvalues in ascending order and orthonormal eigenvector columns.
pub struct HermitianEigen<F: Scalar> {
    pub values: Array1<F>,
    pub vectors: CMatrix<F>,
}

/// Full Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized first, so callers may pass matrices that are
/// Hermitian only up to rounding; decide beforehand whether that is
/// acceptable. Deterministic: identical input bits give identical output.
pub fn hermitian_eigen<F: Scalar>(h: &CMatrix<F>) -> HermitianEigen<F> {
    let n = h.nrows();
    debug_assert_eq!(n, h.ncols(), "eigendecomposition needs a square matrix");
    let mut a = hermitian_part(h);
    let mut v = identity::<F>(n);
    if n > 1 {
        let scale = frobenius_norm(&a).max(F::min_positive_value());
        let stop = scale * F::epsilon();
        let skip = stop * F::konst(1e-2);
        for _sweep in 0..60 {
            let mut off = F::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[(i, j)].norm_sqr();
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r <= skip {
                        a[(p, q)] = Complex::new(F::zero(), F::zero());
                        a[(q, p)] = Complex::new(F::zero(), F::zero());
                        continue;
                    }
                    let phase = apq / Complex::new(r, F::zero());
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (r + r);
                    let t = if tau == F::zero() {
                        F::one()
                    } else {
                        let sign = if tau > F::zero() { F::one() } else { -F::one() };
                        sign / (tau.abs() + (F::one() + tau * tau).sqrt())
                    };
                    let c = F::one() / (F::one() + t * t).sqrt();
                    let s = t * c;
                    let cs = Complex::new(c, F::zero());
                    let s_phase = phase * Complex::new(s, F::zero());
                    // Right-multiply by the rotation: mixes columns p and q.
                    for i in 0..n {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = cs * aip - s_phase.conj() * aiq;
                        a[(i, q)] = s_phase * aip + cs * aiq;
                    }
                    // Left-multiply by its adjoint: mixes rows p and q.
                    for j in 0..n {
                        let apj = a[(p, j)];
                        let aqj = a[(q, j)];
                        a[(p, j)] = cs * apj - s_phase * aqj;
                        a[(q, j)] = s_phase.conj() * apj + cs * aqj;
                    }
                    a[(p, q)] = Complex::new(F::zero(), F::zero());
                    a[(q, p)] = Complex::new(F::zero(), F::zero());
                    a[(p, p)] = Complex::new(a[(p, p)].re, F::zero());
                    a[(q, q)] = Complex::new(a[(q, q)].re, F::zero());
                    // Accumulate the eigenvector basis.
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = cs * vip - s_phase.conj() * viq;
                        v[(i, q)] = s_phase * vip + cs * viq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .expect("eigenvalues of a finite Hermitian matrix are comparable")
    });
    let values = Array1::from_iter(order.iter().map(|&i| a[(i, i)].re));
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Largest eigenvalue of a Hermitian matrix via Householder tridiagonalization
/// and Sturm-sequence bisection. No eigenvectors are formed, which makes this
/// the cheap inner kernel for angle scans.
pub fn hermitian_lambda_max<F: Scalar>(h: &CMatrix<F>) -> F {
    let n = h.nrows();
    debug_assert_eq!(n, h.ncols());
    if n == 0 {
        return F::zero();
    }
    if n == 1 {
        return h[(0, 0)].re;
    }
    let (diag, off) = tridiagonalize(h);
    tridiagonal_lambda_max(&diag, &off)
}

/// Householder reduction of a Hermitian matrix to symmetric tridiagonal form.
/// Returns the diagonal and the moduli of the subdiagonal; reflectors are
/// discarded.
fn tridiagonalize<F: Scalar>(h: &CMatrix<F>) -> (Vec<F>, Vec<F>) {
    let n = h.nrows();
    let mut a = hermitian_part(h);
    let mut off = vec![F::zero(); n - 1];
    let half = F::konst(0.5);
    for k in 0..n.saturating_sub(2) {
        let mut xnorm_sq = F::zero();
        for i in (k + 1)..n {
            xnorm_sq += a[(i, k)].norm_sqr();
        }
        let xnorm = xnorm_sq.sqrt();
        if xnorm == F::zero() {
            off[k] = F::zero();
            continue;
        }
        let x0 = a[(k + 1, k)];
        let x0n = x0.norm();
        let phase = if x0n > F::zero() {
            x0 / Complex::new(x0n, F::zero())
        } else {
            Complex::new(F::one(), F::zero())
        };
        // Reflect x onto -phase * |x| * e1; v = x - alpha * e1.
        let alpha = -phase * Complex::new(xnorm, F::zero());
        let mut v: Vec<Complex<F>> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] = x0 - alpha;
        let vnorm_sq: F = v.iter().map(|z| z.norm_sqr()).sum();
        off[k] = xnorm;
        if vnorm_sq <= F::min_positive_value() {
            continue;
        }
        let beta = (F::one() + F::one()) / vnorm_sq;
        let m = n - (k + 1);
        // p = beta * A_sub * v on the trailing block.
        let mut p = vec![Complex::new(F::zero(), F::zero()); m];
        for (ii, pi) in p.iter_mut().enumerate() {
            let i = k + 1 + ii;
            let mut acc = Complex::new(F::zero(), F::zero());
            for (jj, vj) in v.iter().enumerate() {
                acc += a[(i, k + 1 + jj)] * *vj;
            }
            *pi = acc * Complex::new(beta, F::zero());
        }
        // mu = v^H p is real because the block is Hermitian.
        let mut mu = Complex::new(F::zero(), F::zero());
        for (vi, pi) in v.iter().zip(p.iter()) {
            mu += pi * vi.conj();
        }
        let gamma = Complex::new(beta * half * mu.re, F::zero());
        // q = p - (beta*mu/2) v, then rank-two update A -= v q^H + q v^H.
        let q: Vec<Complex<F>> = p
            .iter()
            .zip(v.iter())
            .map(|(pi, vi)| *pi - gamma * *vi)
            .collect();
        for ii in 0..m {
            let i = k + 1 + ii;
            for jj in 0..m {
                let j = k + 1 + jj;
                let upd = v[ii] * q[jj].conj() + q[ii] * v[jj].conj();
                a[(i, j)] -= upd;
            }
        }
        // The transformed column k is alpha * e1 below the diagonal; its
        // modulus is all the Sturm count needs.
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1, n - 2)].norm();
    }
    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    (diag, off)
}

/// Largest eigenvalue of a real symmetric tridiagonal matrix by bisection on
/// the Sturm count.
fn tridiagonal_lambda_max<F: Scalar>(diag: &[F], off: &[F]) -> F {
    let n = diag.len();
    let mut lo = F::infinity();
    let mut hi = F::neg_infinity();
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { F::zero() };
        let right = if i < n - 1 { off[i].abs() } else { F::zero() };
        let radius = left + right;
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    if lo == hi {
        return hi;
    }
    let scale = lo.abs().max(hi.abs()).max(F::min_positive_value());
    let pivmin = F::min_positive_value().max(scale * F::epsilon() * F::epsilon());
    let count_below = |x: F| -> usize {
        let mut count = 0usize;
        let mut pivot = diag[0] - x;
        if pivot.abs() < pivmin {
            pivot = -pivmin;
        }
        if pivot < F::zero() {
            count += 1;
        }
        for i in 1..n {
            pivot = (diag[i] - x) - off[i - 1] * off[i - 1] / pivot;
            if pivot.abs() < pivmin {
                pivot = -pivmin;
            }
            if pivot < F::zero() {
                count += 1;
            }
        }
        count
    };
    let tol = scale * F::epsilon() * F::konst(4.0);
    let two = F::konst(2.0);
    for _ in 0..128 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / two;
        if count_below(mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / two
}
