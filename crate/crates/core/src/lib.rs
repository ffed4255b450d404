//! Weighted Bergman kernels `B_k^orb = sum_i c_i B_{k+i}` on model orbifolds
//! with cyclic stabilisers.
//!
//! Two geometries are solved exactly: the flat quotient `C^n / (Z/m)` and the
//! football `P^1 / (Z/m)`. On top of them the crate checks the residue-class
//! moment condition on the weights `c_i`, fits the large-`k` expansion
//! `b_0 k^n + b_1 k^{n-1} + ...` against its predicted coefficients, verifies
//! the averaged local reproducing kernel, and compares weighted Hilbert
//! functions with their intersection-number prediction.
//!
//! ```
//! use orb_bergman::{bergman::weighted_bergman, coeffs::canonical_sequence};
//! use orb_bergman::models::{Model, PointSpec, Rho};
//!
//! let football = Model::football(3, 1).unwrap();
//! let c = canonical_sequence(3, 2);
//! let v = weighted_bergman(&football, &c, 10, &PointSpec::Football(Rho::integer(0))).unwrap();
//! assert_eq!(v.to_f64(), 9.0 * 10.0 + 27.0);
//! ```

pub mod bergman;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod expansion;
pub mod localkernel;
pub mod models;
pub mod numeric;
pub mod report;
pub mod riemannroch;

pub use error::{Error, Result};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Nearest `f64` to an exact rational.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `exp(2 pi i j / m)`, exact at the points where cosine and sine are `0` or `+-1`.
pub fn root_of_unity(m: u64, j: u64) -> Complex64 {
    let j = j % m;
    if j == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * j == m {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * j == m {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * j == 3 * m {
        return Complex64::new(0.0, -1.0);
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64)
}
