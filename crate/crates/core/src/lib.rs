//! Quantum orthogonal arrays and `k`-uniform states.
//!
//! [`ffield`] supplies `GF(p^t)` arithmetic, [`oarray`] classical orthogonal
//! arrays, [`qstate`] sparse pure states with partial traces, [`qoa`] the
//! QOA builders and a coverage dispatcher, and [`verify`] the brute-force
//! certificates. Everything numeric is generic over [`Scalar`] (`f64` or
//! `f32`); the aliases below fix `f64`.

pub mod error;
pub mod ffield;
pub mod oarray;
pub mod qoa;
pub mod qstate;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use ffield::{Field, FieldElement};
pub use oarray::{OrthogonalArray, RowBudget};
pub use qoa::{dispatch, Provenance, QuantumOA, QudParams};
pub use qstate::{DensityMatrix, SparseState};
pub use scalar::Scalar;
pub use verify::{is_k_uniform, qoa_check, UniformityReport};

pub type State = SparseState<f64>;
pub type State32 = SparseState<f32>;
pub type Density = DensityMatrix<f64>;
pub type Qoa = QuantumOA<f64>;
pub type Qoa32 = QuantumOA<f32>;
