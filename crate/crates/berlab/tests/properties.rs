//! Property-based invariants over randomly generated matrices: adjoint
//! algebra, positive-part spectra, witnessed norm estimates, and the
//! definitional order relations between the Berezin functionals. All of
//! these must hold for arbitrary inputs, not just the curated fixtures.

use berlab::berezin::BerezinProfile;
use berlab::linalg::{hermitian_defect, inner};
use berlab::operator::{
    modulus, numerical_radius, operator_norm, psd_power, Operator, PsdSpectrum,
};
use berlab::rkhs::{self, PointLabel};
use ndarray::{Array1, Array2};
use num_complex::Complex;
use proptest::prelude::*;

type C = Complex<f64>;

fn complex_entry() -> impl Strategy<Value = C> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| C::new(re, im))
}

fn square_matrix(n: usize) -> impl Strategy<Value = Operator<f64>> {
    prop::collection::vec(complex_entry(), n * n)
        .prop_map(move |v| Operator::new(Array2::from_shape_vec((n, n), v).unwrap()).unwrap())
}

fn any_operator() -> impl Strategy<Value = Operator<f64>> {
    (1usize..=5).prop_flat_map(square_matrix)
}

fn complex_vector(n: usize) -> impl Strategy<Value = Array1<C>> {
    prop::collection::vec(complex_entry(), n).prop_map(Array1::from_vec)
}

/// Strictly positive definite Gram tables: B^H B + I/2 keeps every point
/// away from the rank cutoff so model construction cannot reject.
fn model_space() -> impl Strategy<Value = berlab::KernelSpace64> {
    (2usize..=5).prop_flat_map(|m| {
        prop::collection::vec(complex_entry(), m * m).prop_map(move |v| {
            let b = Array2::from_shape_vec((m, m), v).unwrap();
            let half = C::new(0.5, 0.0);
            let gram = Array2::from_shape_fn((m, m), |(i, j)| {
                let mut acc = C::new(0.0, 0.0);
                for k in 0..m {
                    acc += b[(k, i)].conj() * b[(k, j)];
                }
                if i == j {
                    acc += half;
                }
                acc
            });
            rkhs::build_from_gram(&gram, PointLabel::indices(m)).unwrap()
        })
    })
}

fn vec_norm(x: &Array1<C>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn adjoint_is_an_involution(a in any_operator()) {
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn adjoint_reverses_products(a in any_operator(), seed in 0u64..1000) {
        let mut entries = a.entries().clone();
        // a second operand derived from the first, reshuffled by the seed
        entries.mapv_inplace(|z| z * C::new(((seed % 7) as f64 - 3.0) / 3.0, 0.5));
        let b = Operator::new(entries.reversed_axes().as_standard_layout().to_owned()).unwrap();
        let left = a.compose(&b).adjoint();
        let right = b.adjoint().compose(&a.adjoint());
        let scale = 1.0 + berlab::linalg::max_abs_entry(left.entries());
        let diff = berlab::linalg::max_abs_entry(&(left.entries() - right.entries()));
        prop_assert!(diff <= 1e-12 * scale, "adjoint reversal off by {diff:e}");
    }

    #[test]
    fn column_grams_are_positive(a in any_operator()) {
        let gram = a.gram_of_columns();
        prop_assert!(hermitian_defect(gram.entries()) <= 1e-13);
        let spec = PsdSpectrum::new(&gram).unwrap();
        let floor = -1e-10 * spec.lambda_max().max(1.0);
        for &lam in spec.values() {
            prop_assert!(lam >= floor, "negative eigenvalue {lam:e}");
        }
    }

    #[test]
    fn square_root_squares_back(a in any_operator()) {
        let gram = a.gram_of_columns();
        let root = psd_power(&gram, 0.5).unwrap();
        let squared = root.compose(&root);
        let scale = 1.0 + berlab::linalg::max_abs_entry(gram.entries());
        let diff = berlab::linalg::max_abs_entry(&(squared.entries() - gram.entries()));
        prop_assert!(diff <= 1e-9 * scale, "sqrt squared off by {diff:e}");
        let m = modulus(&a).unwrap();
        let diff2 = berlab::linalg::max_abs_entry(&(m.entries() - root.entries()));
        prop_assert!(diff2 <= 1e-10 * scale);
    }

    #[test]
    fn zero_power_is_an_idempotent_projector(a in any_operator()) {
        let gram = a.gram_of_columns();
        let proj = psd_power(&gram, 0.0).unwrap();
        let twice = proj.compose(&proj);
        let diff = berlab::linalg::max_abs_entry(&(twice.entries() - proj.entries()));
        prop_assert!(diff <= 1e-10, "projector not idempotent: {diff:e}");
        prop_assert!(hermitian_defect(proj.entries()) <= 1e-12);
    }

    #[test]
    fn operator_norm_bounds_every_image(a in any_operator(), seed in 0u64..1000) {
        let est = operator_norm(&a);
        let ax = a.apply(&est.witness);
        prop_assert!((vec_norm(&ax) - est.value).abs() <= 1e-9 * (1.0 + est.value));
        let n = a.dim();
        let phase = C::new(0.0, (seed as f64) / 159.0).exp();
        let x = Array1::from_shape_fn(n, |i| phase * C::new((i + 1) as f64, seed as f64 % 3.0));
        let image = vec_norm(&a.apply(&x));
        prop_assert!(image <= est.value * vec_norm(&x) + 1e-9);
    }

    #[test]
    fn radius_and_norm_sandwich_each_other(a in any_operator()) {
        let w = numerical_radius(&a, 1e-8).value;
        let norm = operator_norm(&a).value;
        prop_assert!(w <= norm + 1e-6, "radius {w} above norm {norm}");
        prop_assert!(norm <= 2.0 * w + 1e-6, "norm {norm} above twice radius {w}");
    }

    #[test]
    fn berezin_functionals_obey_their_definitional_order(
        a_raw in square_matrix(5),
        space in model_space(),
    ) {
        let n = space.dim();
        let a = Operator::new(
            a_raw.entries().slice(ndarray::s![..n, ..n]).to_owned(),
        ).unwrap();
        let profile = BerezinProfile::new(&a, &space).unwrap();
        let (ber, _) = profile.ber();
        let (least, _) = profile.least();
        let (eta_sq, _) = profile.eta_sq();
        let bnorm = berlab::berezin::berezin_norm(&a, &space).unwrap();
        prop_assert!(least <= ber + 1e-12);
        prop_assert!(ber <= bnorm + 1e-12 * (1.0 + bnorm));
        prop_assert!(eta_sq + 1e-12 >= ber * ber);
        let w = numerical_radius(&a, 1e-8).value;
        for s in profile.symbols() {
            prop_assert!(s.norm() <= w + 1e-6, "symbol {s} escapes the numerical range");
        }
        let norm_sq = operator_norm(&a).value.powi(2);
        for &q in profile.image_norms_sq() {
            prop_assert!(q <= norm_sq + 1e-9 * (1.0 + norm_sq));
        }
    }

    #[test]
    fn generated_models_have_unit_kernel_columns(space in model_space()) {
        for j in 0..space.num_points() {
            let k = space.normalized_kernel(j).unwrap();
            let norm = vec_norm(&k);
            prop_assert!((norm - 1.0).abs() <= 1e-10, "column {j} has norm {norm}");
        }
        let gram = rkhs::normalized_gram(&space);
        for j in 0..space.num_points() {
            prop_assert!((gram[(j, j)].re - 1.0).abs() <= 1e-10);
            prop_assert!(gram[(j, j)].im.abs() <= 1e-12);
        }
    }

    #[test]
    fn symbols_of_the_adjoint_conjugate(a_raw in square_matrix(5), space in model_space()) {
        let n = space.dim();
        let a = Operator::new(
            a_raw.entries().slice(ndarray::s![..n, ..n]).to_owned(),
        ).unwrap();
        let direct = berlab::berezin::berezin_symbols(&a, &space).unwrap();
        let adjoint = berlab::berezin::berezin_symbols(&a.adjoint(), &space).unwrap();
        for (s, t) in direct.iter().zip(&adjoint) {
            prop_assert!((s - t.conj()).norm() <= 1e-10 * (1.0 + s.norm()));
        }
    }

    #[test]
    fn cauchy_schwarz_for_model_inner_products(
        x in complex_vector(4),
        y in complex_vector(4),
    ) {
        let lhs = inner(&x, &y).norm();
        let rhs = vec_norm(&x) * vec_norm(&y);
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs));
    }
}
