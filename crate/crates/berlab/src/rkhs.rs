//! Finite reproducing-kernel models.
//!
//! A model is a finite family of unit-norm kernel columns living in an
//! n-dimensional complex coefficient space, one column per sample point. It
//! can be built from a raw Gram matrix (validated, symmetrized, factorized
//! through a Hermitian eigendecomposition with relative rank truncation) or
//! from the classical Szego, Bergman, and Fock kernels evaluated at given
//! points. All downstream Berezin functionals are exact suprema over this
//! finite family.

use crate::linalg::{
    self, hermitian_defect, hermitian_eigen, hermitian_part, max_abs_entry, vector_norm, CMatrix,
    CVector,
};
use crate::scalar::Scalar;
use ndarray::Array2;
use num_complex::Complex;
use thiserror::Error;

/// Identifies a sample point: a complex number for disc/plane kernels, or an
/// opaque index for models built from raw Gram data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointLabel<F: Scalar> {
    Complex(Complex<F>),
    Index(usize),
}

impl<F: Scalar> PointLabel<F> {
    /// Plain index labels `0..m`.
    pub fn indices(m: usize) -> Vec<Self> {
        (0..m).map(PointLabel::Index).collect()
    }

    /// Coordinates used when a label must be written out as two reals.
    pub fn coordinates(&self) -> (F, F) {
        match self {
            PointLabel::Complex(z) => (z.re, z.im),
            PointLabel::Index(i) => (F::from_usize(*i).unwrap_or_else(F::zero), F::zero()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("a kernel model needs at least one point")]
    EmptyPointSet,
    #[error("gram matrix must be square, got {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected {expected} labels, got {got}")]
    LabelMismatch { expected: usize, got: usize },
    #[error("gram matrix is not Hermitian: defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error(
        "gram matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e} below -{tol:.3e}"
    )]
    NotPsd { eigenvalue: f64, tol: f64 },
    #[error("kernel at point {index} is numerically zero (mass {value:.3e})")]
    ZeroKernelPoint { index: usize, value: f64 },
    #[error("point {index} lies outside the admissible disc: |z| = {modulus:.6} > {limit}")]
    PointOutsideDisc {
        index: usize,
        modulus: f64,
        limit: f64,
    },
    #[error("point {index} exceeds the supported radius: |z| = {modulus:.6} > {limit}")]
    PointTooLarge {
        index: usize,
        modulus: f64,
        limit: f64,
    },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("kernel index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, SpaceError>;

/// Gram symmetry tolerance, relative to the largest entry modulus.
const GRAM_HERMITIAN_TOL: f64 = 1e-12;
/// Minimum admissible kernel mass on the diagonal of a Gram matrix.
const KERNEL_MASS_FLOOR: f64 = 1e-10;
/// Eigenvalues below `-PSD_TOL * lambda_max` reject the Gram as indefinite;
/// negative eigenvalues above that are clamped to zero.
const PSD_TOL: f64 = 1e-10;
/// Relative rank cutoff: eigenvalues at or below `RANK_TOL * lambda_max` are
/// treated as numerically zero and dropped from the factorization.
const RANK_TOL: f64 = 1e-12;
/// Szego and Bergman points must satisfy `|z| <= 1 - DISC_MARGIN`.
const DISC_MARGIN: f64 = 1e-6;
/// Fock points must satisfy `|z| <= FOCK_RADIUS`.
const FOCK_RADIUS: f64 = 10.0;

/// A finite family of unit-norm kernel columns.
///
/// `kernels` is `n x m`: column `j` is the normalized kernel of point `j`
/// expressed in an orthonormal coordinate basis of the n-dimensional span.
/// The pairwise inner products of the columns reproduce the normalized Gram
/// matrix of the model. When the model was built from a Gram matrix, the raw
/// input is retained for provenance.
#[derive(Debug, Clone)]
pub struct KernelSpace<F: Scalar> {
    dim: usize,
    points: Vec<PointLabel<F>>,
    kernels: CMatrix<F>,
    gram: Option<CMatrix<F>>,
}

impl<F: Scalar> KernelSpace<F> {
    /// Ambient dimension n of the span of the kernel family.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of sample points m.
    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    /// Point labels in column order.
    pub fn points(&self) -> &[PointLabel<F>] {
        &self.points
    }

    /// The `n x m` matrix of unit-norm kernel columns.
    pub fn kernels(&self) -> &CMatrix<F> {
        &self.kernels
    }

    /// Raw Gram matrix the model was built from, when available.
    pub fn gram(&self) -> Option<&CMatrix<F>> {
        self.gram.as_ref()
    }

    /// Normalized kernel column of point `index`.
    pub fn normalized_kernel(&self, index: usize) -> Result<CVector<F>> {
        if index >= self.num_points() {
            return Err(SpaceError::IndexOutOfRange {
                index,
                len: self.num_points(),
            });
        }
        Ok(self.kernels.column(index).to_owned())
    }

    /// The same model with points (and kernel columns) reordered by `perm`,
    /// where `perm[new] = old`. `perm` must be a permutation of `0..m`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.num_points();
        assert_eq!(perm.len(), m, "permutation length must match point count");
        let mut seen = vec![false; m];
        for &p in perm {
            assert!(p < m && !seen[p], "not a permutation of 0..{m}");
            seen[p] = true;
        }
        let kernels = Array2::from_shape_fn((self.dim, m), |(i, j)| self.kernels[(i, perm[j])]);
        let points = perm.iter().map(|&p| self.points[p]).collect();
        let gram = self
            .gram
            .as_ref()
            .map(|g| Array2::from_shape_fn((m, m), |(i, j)| g[(perm[i], perm[j])]));
        KernelSpace {
            dim: self.dim,
            points,
            kernels,
            gram,
        }
    }

    /// Builds a model directly from columns that already live in coordinate
    /// space. Columns are normalized to unit length; a column of negligible
    /// norm is rejected. No Gram matrix is retained.
    pub fn from_columns(columns: CMatrix<F>, labels: Vec<PointLabel<F>>) -> Result<Self> {
        let (n, m) = columns.dim();
        if m == 0 || n == 0 {
            return Err(SpaceError::EmptyPointSet);
        }
        if labels.len() != m {
            return Err(SpaceError::LabelMismatch {
                expected: m,
                got: labels.len(),
            });
        }
        let mut kernels = columns;
        for j in 0..m {
            let nrm = vector_norm(&kernels.column(j).to_owned());
            if nrm <= F::konst(KERNEL_MASS_FLOOR) {
                return Err(SpaceError::ZeroKernelPoint {
                    index: j,
                    value: nrm.as_f64(),
                });
            }
            let inv = Complex::new(F::one() / nrm, F::zero());
            for i in 0..n {
                kernels[(i, j)] *= inv;
            }
        }
        Ok(KernelSpace {
            dim: n,
            points: labels,
            kernels,
            gram: None,
        })
    }
}

/// Validates a Gram matrix and factorizes it into unit-norm kernel columns.
///
/// The input must be Hermitian up to a small relative defect and positive
/// semidefinite up to `-1e-10 * lambda_max`; negative eigenvalues above that
/// threshold are clamped to zero. Eigendirections at or below the relative
/// rank cutoff are dropped, and the ambient dimension of the model is the
/// retained rank. Each kernel column is then scaled to unit Euclidean norm.
///
/// Pairwise inner products of the columns reproduce the normalized Gram
/// entries; for Gram matrices whose condition number approaches the rank
/// cutoff this reproduction degrades with the truncation, and a point whose
/// kernel loses most of its mass to truncated directions is rejected as
/// numerically zero rather than silently distorted.
pub fn build_from_gram<F: Scalar>(
    gram: &CMatrix<F>,
    labels: Vec<PointLabel<F>>,
) -> Result<KernelSpace<F>> {
    let (rows, cols) = gram.dim();
    if rows == 0 {
        return Err(SpaceError::EmptyPointSet);
    }
    if rows != cols {
        return Err(SpaceError::NotSquare { rows, cols });
    }
    let m = rows;
    if labels.len() != m {
        return Err(SpaceError::LabelMismatch {
            expected: m,
            got: labels.len(),
        });
    }
    let scale = F::one().max(max_abs_entry(gram));
    let defect = hermitian_defect(gram);
    let sym_tol = F::konst(GRAM_HERMITIAN_TOL) * scale;
    if defect > sym_tol {
        return Err(SpaceError::NotHermitian {
            defect: defect.as_f64(),
            tol: sym_tol.as_f64(),
        });
    }
    let h = hermitian_part(gram);
    let mass_floor = F::konst(KERNEL_MASS_FLOOR);
    for j in 0..m {
        if h[(j, j)].re <= mass_floor {
            return Err(SpaceError::ZeroKernelPoint {
                index: j,
                value: h[(j, j)].re.as_f64(),
            });
        }
    }
    let eig = hermitian_eigen(&h);
    let lam_max = eig.values[m - 1];
    let psd_tol = F::konst(PSD_TOL) * lam_max;
    let lam_min = eig.values[0];
    if lam_min < -psd_tol {
        return Err(SpaceError::NotPsd {
            eigenvalue: lam_min.as_f64(),
            tol: psd_tol.as_f64(),
        });
    }
    let rank_cut = F::konst(RANK_TOL) * lam_max;
    let kept: Vec<usize> = (0..m)
        .filter(|&k| eig.values[k].max(F::zero()) > rank_cut)
        .collect();
    let n = kept.len();
    debug_assert!(n >= 1, "lambda_max always survives its own rank cutoff");
    let mut kernels = Array2::from_shape_fn((n, m), |(r, j)| {
        let k = kept[r];
        let root = eig.values[k].max(F::zero()).sqrt();
        eig.vectors[(j, k)].conj() * Complex::new(root, F::zero())
    });
    // Normalize each column by its own retained mass so unit norm holds to
    // machine precision even after truncation.
    for j in 0..m {
        let mass_sq: F = (0..n).map(|r| kernels[(r, j)].norm_sqr()).sum();
        let expected = h[(j, j)].re;
        if mass_sq < F::konst(0.5) * expected {
            return Err(SpaceError::ZeroKernelPoint {
                index: j,
                value: mass_sq.as_f64(),
            });
        }
        let inv = Complex::new(F::one() / mass_sq.sqrt(), F::zero());
        for r in 0..n {
            kernels[(r, j)] *= inv;
        }
    }
    Ok(KernelSpace {
        dim: n,
        points: labels,
        kernels,
        gram: Some(gram.clone()),
    })
}

/// Hardy-space model on the unit disc: Gram entries `1 / (1 - z_i conj(z_j))`.
pub fn build_szego<F: Scalar>(points: &[Complex<F>]) -> Result<KernelSpace<F>> {
    check_disc_points(points)?;
    build_point_kernel(points, |zi, zj| {
        let one = Complex::new(F::one(), F::zero());
        one / (one - zi * zj.conj())
    })
}

/// Bergman-space model on the unit disc: Gram entries `1 / (1 - z_i conj(z_j))^2`.
pub fn build_bergman<F: Scalar>(points: &[Complex<F>]) -> Result<KernelSpace<F>> {
    check_disc_points(points)?;
    build_point_kernel(points, |zi, zj| {
        let one = Complex::new(F::one(), F::zero());
        let d = one - zi * zj.conj();
        one / (d * d)
    })
}

/// Fock-space model on the plane: Gram entries `exp(z_i conj(z_j))`.
pub fn build_fock<F: Scalar>(points: &[Complex<F>]) -> Result<KernelSpace<F>> {
    let limit = F::konst(FOCK_RADIUS);
    for (i, z) in points.iter().enumerate() {
        if z.norm() > limit {
            return Err(SpaceError::PointTooLarge {
                index: i,
                modulus: z.norm().as_f64(),
                limit: limit.as_f64(),
            });
        }
    }
    build_point_kernel(points, |zi, zj| (zi * zj.conj()).exp())
}

fn check_disc_points<F: Scalar>(points: &[Complex<F>]) -> Result<()> {
    let limit = F::one() - F::konst(DISC_MARGIN);
    for (i, z) in points.iter().enumerate() {
        if z.norm() > limit {
            return Err(SpaceError::PointOutsideDisc {
                index: i,
                modulus: z.norm().as_f64(),
                limit: limit.as_f64(),
            });
        }
    }
    Ok(())
}

fn build_point_kernel<F: Scalar>(
    points: &[Complex<F>],
    entry: impl Fn(Complex<F>, Complex<F>) -> Complex<F>,
) -> Result<KernelSpace<F>> {
    let m = points.len();
    if m == 0 {
        return Err(SpaceError::EmptyPointSet);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if points[i].re == points[j].re && points[i].im == points[j].im {
                return Err(SpaceError::DuplicatePoint {
                    first: i,
                    second: j,
                });
            }
        }
    }
    // Fill the upper triangle and mirror conjugates so the Gram matrix is
    // Hermitian exactly, not merely up to rounding of two evaluations.
    let mut gram = Array2::from_elem((m, m), Complex::new(F::zero(), F::zero()));
    for i in 0..m {
        let g_ii = entry(points[i], points[i]);
        gram[(i, i)] = Complex::new(g_ii.re, F::zero());
        for j in (i + 1)..m {
            let g = entry(points[i], points[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g.conj();
        }
    }
    let labels = points.iter().map(|&z| PointLabel::Complex(z)).collect();
    build_from_gram(&gram, labels)
}

/// Orthonormal model: the first `m` standard basis columns of an
/// `n`-dimensional space (`m <= n`), Gram exactly the identity.
pub fn build_orthonormal<F: Scalar>(n: usize, m: usize) -> Result<KernelSpace<F>> {
    if m == 0 || n == 0 {
        return Err(SpaceError::EmptyPointSet);
    }
    assert!(
        m <= n,
        "cannot fit {m} orthonormal columns in dimension {n}"
    );
    let columns = Array2::from_shape_fn((n, m), |(i, j)| {
        if i == j {
            Complex::new(F::one(), F::zero())
        } else {
            Complex::new(F::zero(), F::zero())
        }
    });
    let mut space = KernelSpace::from_columns(columns, PointLabel::indices(m))?;
    space.gram = Some(linalg::identity(m));
    Ok(space)
}

/// Gram of the normalized columns: entry `(i, j)` is the inner product of
/// column j against column i, matching the orientation of the raw Gram.
pub fn normalized_gram<F: Scalar>(space: &KernelSpace<F>) -> CMatrix<F> {
    let m = space.num_points();
    let k = space.kernels();
    Array2::from_shape_fn((m, m), |(i, j)| {
        linalg::inner(&k.column(j).to_owned(), &k.column(i).to_owned())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_distr::StandardNormal;
    use rand_xoshiro::SplitMix64;

    fn cx(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_gram_gives_standard_basis() {
        let g = linalg::identity::<f64>(3);
        let space = build_from_gram(&g, PointLabel::indices(3)).unwrap();
        assert_eq!(space.dim(), 3);
        assert_eq!(space.num_points(), 3);
        let ng = normalized_gram(&space);
        let defect = max_abs_entry(&(&ng - &linalg::identity::<f64>(3)));
        assert!(defect < 1e-14);
    }

    #[test]
    fn szego_two_points_matches_hand_values() {
        // Points {0, 0.5}: Gram [[1, 1], [1, 4/3]], normalized overlap
        // 1 / sqrt(4/3) = sqrt(3)/2.
        let space = build_szego(&[cx(0.0, 0.0), cx(0.5, 0.0)]).unwrap();
        let g = space.gram().unwrap();
        assert!((g[(1, 1)].re - 4.0 / 3.0).abs() < 1e-15);
        assert!((g[(0, 1)] - cx(1.0, 0.0)).norm() < 1e-15);
        let k0 = space.normalized_kernel(0).unwrap();
        let k1 = space.normalized_kernel(1).unwrap();
        let overlap = linalg::inner(&k0, &k1).norm();
        assert!(
            (overlap - 3f64.sqrt() / 2.0).abs() < 1e-12,
            "overlap {overlap}"
        );
    }

    #[test]
    fn bergman_and_fock_grams_match_hand_values() {
        let b = build_bergman(&[cx(0.0, 0.0), cx(0.5, 0.0)]).unwrap();
        assert!((b.gram().unwrap()[(1, 1)].re - 16.0 / 9.0).abs() < 1e-15);
        let f = build_fock(&[cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
        assert!((f.gram().unwrap()[(1, 1)].re - 1f64.exp()).abs() < 1e-15);
        assert!((f.gram().unwrap()[(0, 1)] - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn indefinite_gram_is_rejected() {
        let g = ndarray::array![[cx(1.0, 0.0), cx(2.0, 0.0)], [cx(2.0, 0.0), cx(1.0, 0.0)]];
        match build_from_gram(&g, PointLabel::indices(2)) {
            Err(SpaceError::NotPsd { eigenvalue, .. }) => {
                assert!((eigenvalue - (-1.0)).abs() < 1e-12)
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_gram_is_rejected() {
        let g = ndarray::array![[cx(1.0, 0.0), cx(0.5, 0.0)], [cx(0.1, 0.0), cx(1.0, 0.0)]];
        assert!(matches!(
            build_from_gram(&g, PointLabel::indices(2)),
            Err(SpaceError::NotHermitian { .. })
        ));
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let g = ndarray::array![[cx(1.0, 0.0), cx(0.0, 0.0)], [cx(0.0, 0.0), cx(1e-11, 0.0)]];
        assert!(matches!(
            build_from_gram(&g, PointLabel::indices(2)),
            Err(SpaceError::ZeroKernelPoint { index: 1, .. })
        ));
    }

    #[test]
    fn domain_checks_reject_bad_points() {
        assert!(matches!(
            build_szego(&[cx(0.9999999, 0.0)]),
            Err(SpaceError::PointOutsideDisc { index: 0, .. })
        ));
        assert!(matches!(
            build_fock(&[cx(11.0, 0.0)]),
            Err(SpaceError::PointTooLarge { index: 0, .. })
        ));
        assert!(matches!(
            build_szego(&[cx(0.1, 0.2), cx(0.1, 0.2)]),
            Err(SpaceError::DuplicatePoint {
                first: 0,
                second: 1
            })
        ));
        assert!(matches!(
            build_szego::<f64>(&[]),
            Err(SpaceError::EmptyPointSet)
        ));
    }

    #[test]
    fn kernel_columns_are_unit_norm_and_reproduce_gram() {
        let mut rng = SplitMix64::seed_from_u64(2024);
        for trial in 0..20 {
            let m = 2 + (trial % 5);
            let b = Array2::from_shape_fn((m, m), |_| {
                cx(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let g = linalg::adjoint(&b).dot(&b);
            let space = build_from_gram(&g, PointLabel::indices(m)).unwrap();
            for j in 0..m {
                let col = space.normalized_kernel(j).unwrap();
                assert!((vector_norm(&col) - 1.0).abs() <= 1e-12);
            }
            let ng = normalized_gram(&space);
            for i in 0..m {
                for j in 0..m {
                    let expect = g[(i, j)] / cx((g[(i, i)].re * g[(j, j)].re).sqrt(), 0.0);
                    assert!(
                        (ng[(i, j)] - expect).norm() < 1e-10,
                        "entry ({i},{j}) off by {}",
                        (ng[(i, j)] - expect).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn rank_deficient_gram_truncates_dimension() {
        // Rank-one Gram of two copies of the same unit direction.
        let g = ndarray::array![[cx(1.0, 0.0), cx(1.0, 0.0)], [cx(1.0, 0.0), cx(1.0, 0.0)]];
        let space = build_from_gram(&g, PointLabel::indices(2)).unwrap();
        assert_eq!(space.dim(), 1);
        let ng = normalized_gram(&space);
        assert!((ng[(0, 1)] - cx(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn near_psd_noise_is_repaired() {
        // A tiny negative eigenvalue within tolerance must clamp, not reject.
        let eps = 1e-14;
        let g = ndarray::array![
            [cx(1.0, 0.0), cx(1.0 + eps, 0.0)],
            [cx(1.0 + eps, 0.0), cx(1.0, 0.0)]
        ];
        let space = build_from_gram(&g, PointLabel::indices(2)).unwrap();
        assert_eq!(space.dim(), 1);
    }

    #[test]
    fn permutation_reorders_points_and_columns() {
        let pts = [cx(0.1, 0.2), cx(-0.3, 0.1), cx(0.0, -0.4)];
        let space = build_szego(&pts).unwrap();
        let perm = [2usize, 0, 1];
        let shuffled = space.permuted(&perm);
        for (new, &old) in perm.iter().enumerate() {
            assert_eq!(shuffled.points()[new], space.points()[old]);
            let a = shuffled.normalized_kernel(new).unwrap();
            let b = space.normalized_kernel(old).unwrap();
            assert!(
                max_abs_entry(&Array2::from_shape_fn((a.len(), 1), |(i, _)| a[i] - b[i])) == 0.0
            );
        }
    }

    #[test]
    fn index_out_of_range_is_reported() {
        let space = build_orthonormal::<f64>(3, 2).unwrap();
        assert!(matches!(
            space.normalized_kernel(5),
            Err(SpaceError::IndexOutOfRange { index: 5, len: 2 })
        ));
    }

    #[test]
    fn orthonormal_model_embeds_in_larger_dimension() {
        let space = build_orthonormal::<f64>(5, 3).unwrap();
        assert_eq!(space.dim(), 5);
        assert_eq!(space.num_points(), 3);
        let ng = normalized_gram(&space);
        assert!(max_abs_entry(&(&ng - &linalg::identity::<f64>(3))) == 0.0);
    }

    #[test]
    fn builds_in_single_precision() {
        let space = build_szego(&[Complex::new(0.0f32, 0.0), Complex::new(0.5, 0.0)]).unwrap();
        let k0 = space.normalized_kernel(0).unwrap();
        let k1 = space.normalized_kernel(1).unwrap();
        let overlap = linalg::inner(&k0, &k1).norm();
        assert!((overlap - 3f32.sqrt() / 2.0).abs() < 1e-5);
    }
}
