//! Berezin-type functionals of an operator over a finite kernel model.
//!
//! For each point of the model the profile records the symbol
//! `<A k, k>` and the squared image norm `‖A k‖^2` at the normalized kernel
//! `k`. Every functional here is an exact maximum or minimum over the finite
//! point family: the Berezin number (largest symbol modulus), its smallest
//! counterpart, the two-index Berezin norm, the Davis-Wielandt shell of
//! (symbol, squared image norm) pairs, and the shell radius `eta`.
//!
//! Ties in argmax/argmin resolve to the lowest point index.

use crate::linalg::{adjoint, inner, CMatrix};
use crate::operator::{Operator, OperatorError, Result};
use crate::rkhs::{KernelSpace, PointLabel};
use crate::scalar::Scalar;
use num_complex::Complex;

/// Symbol and squared image norm of one operator at every model point.
#[derive(Debug, Clone)]
pub struct BerezinProfile<F: Scalar> {
    symbols: Vec<Complex<F>>,
    image_norms_sq: Vec<F>,
}

/// One point of the Davis-Wielandt shell.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellPoint<F: Scalar> {
    pub label: PointLabel<F>,
    pub symbol: Complex<F>,
    pub image_norm_sq: F,
}

fn check_dims<F: Scalar>(a: &Operator<F>, space: &KernelSpace<F>) -> Result<()> {
    if a.dim() != space.dim() {
        return Err(OperatorError::DimensionMismatch {
            op_dim: a.dim(),
            arg_dim: space.dim(),
        });
    }
    Ok(())
}

impl<F: Scalar> BerezinProfile<F> {
    pub fn new(a: &Operator<F>, space: &KernelSpace<F>) -> Result<Self> {
        check_dims(a, space)?;
        let k = space.kernels();
        let ak = a.entries().dot(k);
        let m = space.num_points();
        let mut symbols = Vec::with_capacity(m);
        let mut image_norms_sq = Vec::with_capacity(m);
        for j in 0..m {
            let col = k.column(j).to_owned();
            let img = ak.column(j).to_owned();
            symbols.push(inner(&img, &col));
            image_norms_sq.push(img.iter().map(|z| z.norm_sqr()).sum::<F>());
        }
        Ok(BerezinProfile {
            symbols,
            image_norms_sq,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Complex<F>] {
        &self.symbols
    }

    pub fn image_norms_sq(&self) -> &[F] {
        &self.image_norms_sq
    }

    /// Largest symbol modulus and its point index.
    pub fn ber(&self) -> (F, usize) {
        argmax(self.symbols.iter().map(|s| s.norm()))
    }

    /// Smallest symbol modulus and its point index.
    pub fn least(&self) -> (F, usize) {
        argmin(self.symbols.iter().map(|s| s.norm()))
    }

    /// Squared shell radius `max_j (|symbol_j|^2 + image_norm_sq_j^2)` and its
    /// point index. Kept separate from [`Self::eta`] so callers comparing
    /// squared quantities avoid a round trip through the square root.
    pub fn eta_sq(&self) -> (F, usize) {
        argmax(
            self.symbols
                .iter()
                .zip(self.image_norms_sq.iter())
                .map(|(s, &q)| s.norm_sqr() + q * q),
        )
    }

    /// Shell radius `max_j sqrt(|symbol_j|^2 + image_norm_sq_j^2)`.
    pub fn eta(&self) -> (F, usize) {
        let (v, i) = self.eta_sq();
        (v.sqrt(), i)
    }

    /// Davis-Wielandt shell points in model order.
    pub fn shell(&self, space: &KernelSpace<F>) -> Vec<ShellPoint<F>> {
        debug_assert_eq!(space.num_points(), self.len());
        space
            .points()
            .iter()
            .zip(self.symbols.iter().zip(self.image_norms_sq.iter()))
            .map(|(&label, (&symbol, &image_norm_sq))| ShellPoint {
                label,
                symbol,
                image_norm_sq,
            })
            .collect()
    }
}

fn argmax<F: Scalar>(values: impl Iterator<Item = F>) -> (F, usize) {
    let mut best = F::neg_infinity();
    let mut at = 0usize;
    for (i, v) in values.enumerate() {
        if v > best {
            best = v;
            at = i;
        }
    }
    (best, at)
}

fn argmin<F: Scalar>(values: impl Iterator<Item = F>) -> (F, usize) {
    let mut best = F::infinity();
    let mut at = 0usize;
    for (i, v) in values.enumerate() {
        if v < best {
            best = v;
            at = i;
        }
    }
    (best, at)
}

/// Symbols `<A k_j, k_j>` in point order.
pub fn berezin_symbols<F: Scalar>(
    a: &Operator<F>,
    space: &KernelSpace<F>,
) -> Result<Vec<Complex<F>>> {
    Ok(BerezinProfile::new(a, space)?.symbols)
}

/// Berezin number: the largest symbol modulus over the model.
pub fn ber<F: Scalar>(a: &Operator<F>, space: &KernelSpace<F>) -> Result<F> {
    Ok(BerezinProfile::new(a, space)?.ber().0)
}

/// Smallest symbol modulus over the model.
pub fn least_ber<F: Scalar>(a: &Operator<F>, space: &KernelSpace<F>) -> Result<F> {
    Ok(BerezinProfile::new(a, space)?.least().0)
}

/// Berezin norm: the largest two-index coupling
/// `max_{j,l} |<A k_j, k_l>|` over all ordered point pairs.
pub fn berezin_norm<F: Scalar>(a: &Operator<F>, space: &KernelSpace<F>) -> Result<F> {
    check_dims(a, space)?;
    Ok(pair_matrix_max_abs(&pair_matrix(a.entries(), space)))
}

/// The `m x m` matrix of couplings: entry `(l, j)` is `<A k_j, k_l>`.
pub(crate) fn pair_matrix<F: Scalar>(a: &CMatrix<F>, space: &KernelSpace<F>) -> CMatrix<F> {
    let k = space.kernels();
    adjoint(k).dot(&a.dot(k))
}

pub(crate) fn pair_matrix_max_abs<F: Scalar>(m: &CMatrix<F>) -> F {
    m.iter().map(|z| z.norm()).fold(F::zero(), F::max)
}

/// Davis-Wielandt shell radius over the model.
pub fn eta<F: Scalar>(a: &Operator<F>, space: &KernelSpace<F>) -> Result<F> {
    Ok(BerezinProfile::new(a, space)?.eta().0)
}

/// Davis-Wielandt shell: one (label, symbol, squared image norm) triple per
/// model point, in point order.
pub fn dwber_shell<F: Scalar>(
    a: &Operator<F>,
    space: &KernelSpace<F>,
) -> Result<Vec<ShellPoint<F>>> {
    let profile = BerezinProfile::new(a, space)?;
    Ok(profile.shell(space))
}
