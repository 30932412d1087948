//! Special functions used by the eigenfunction families.

mod bessel;
pub(crate) mod ddouble;
mod kummer;

use thiserror::Error;

pub use bessel::{bessel_j0, bessel_j0_extended, SERIES_LIMIT};
pub(crate) use bessel::{j0_dd, j0_fast};
pub use kummer::{kummer, kummer_polynomial, pochhammer, KummerPolynomial, MAX_ORDER};

/// First positive zero of J0.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("argument is not finite: {0}")]
    NonFinite(f64),
    #[error("Kummer polynomial order {0} exceeds the supported maximum of 64")]
    OrderTooLarge(u32),
}
