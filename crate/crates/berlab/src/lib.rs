//! berlab: Berezin-functional laboratory on finite reproducing-kernel models.
//!
//! The crate builds finite kernel-column models from classical kernels or raw
//! Gram matrices, evaluates Berezin-type functionals of complex operators on
//! them (symbol, number, norm, Davis-Wielandt shell and radius), and checks a
//! registry of operator inequalities over deterministic randomized campaigns.
//! The `berlab` binary exposes the campaign runner, fixture replay, shell
//! export, and single-bound evaluation.
//!
//! All numerics are generic over the real scalar via [`scalar::Scalar`];
//! concrete `f64`/`f32` aliases live at the crate root. Published tolerances
//! assume `f64`.

pub mod berezin;
pub mod bounds;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod optimize;
pub mod rkhs;
pub mod scalar;

pub use scalar::Scalar;

/// Double-precision complex matrix.
pub type CMatrix64 = linalg::CMatrix<f64>;
/// Single-precision complex matrix.
pub type CMatrix32 = linalg::CMatrix<f32>;
/// Double-precision complex vector.
pub type CVector64 = linalg::CVector<f64>;
/// Single-precision complex vector.
pub type CVector32 = linalg::CVector<f32>;
/// Double-precision kernel model.
pub type KernelSpace64 = rkhs::KernelSpace<f64>;
/// Single-precision kernel model.
pub type KernelSpace32 = rkhs::KernelSpace<f32>;
/// Double-precision operator.
pub type Operator64 = operator::Operator<f64>;
/// Single-precision operator.
pub type Operator32 = operator::Operator<f32>;
/// Double-precision Berezin profile.
pub type BerezinProfile64 = berezin::BerezinProfile<f64>;
/// Double-precision bound evaluation.
pub type BoundEvaluation64 = bounds::BoundEvaluation<f64>;
