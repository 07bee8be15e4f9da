//! Misspecified Cramér-Rao bounds on DOA estimation for a colocated MIMO radar
//! whose estimator ignores a single-bounce multipath.
//!
//! The crate is organised bottom-up:
//!
//! * [`array`] – transmit/receive geometries, steering vectors and their
//!   angular derivatives, MIMO steering matrices and beampatterns.
//! * [`multipath`] – the true (direct + indirect) signal model, path
//!   coefficients and synthesis of the compressed sufficient statistic.
//! * [`bounds`] – FIM, CRB, the error-score matrix, the pseudo-true DOA and
//!   the MCRB in both closed and sandwich form.
//! * [`estimation`] – the misspecified ML DOA estimator and a deterministic
//!   parallel Monte-Carlo RMSE engine.
//! * [`scenario`] – automotive ground-reflection geometry mapped onto scenes
//!   over a range grid.
//!
//! All angles are radians and all bounds are rad².

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod bounds;
pub mod error;
pub mod estimation;
pub mod multipath;
pub mod scenario;
pub mod search;

pub use nalgebra::Complex;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex double used throughout.
pub type C64 = Complex<f64>;

/// Dense complex matrix (`M_r × M_t` for MIMO quantities).
pub type CMatrix = nalgebra::DMatrix<C64>;

pub use array::{ArrayGeometry, MimoMatrices, SteeringSet};
pub use bounds::{BoundBreakdown, ZetaSet};
pub use error::{Error, Result};
pub use estimation::{EstimatorConfig, RmseCurve};
pub use multipath::MultipathScene;
pub use scenario::{GroundScenario, RangePoint};
pub use search::SearchConfig;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// `tr(Aᴴ B)` for equally shaped matrices, i.e. the Frobenius inner product.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}
