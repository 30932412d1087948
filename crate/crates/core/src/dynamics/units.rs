//! Dimension-carrying scalars over the base units share, currency and second.

use std::fmt;
use std::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dim {
    pub share: i8,
    pub currency: i8,
    pub time: i8,
}

impl Dim {
    pub const fn new(share: i8, currency: i8, time: i8) -> Self {
        Self { share, currency, time }
    }

    pub const NONE: Dim = Dim::new(0, 0, 0);
    pub const SHARE: Dim = Dim::new(1, 0, 0);
    pub const SECOND: Dim = Dim::new(0, 0, 1);
    /// Currency per share.
    pub const PRICE: Dim = Dim::new(-1, 1, 0);
    pub const SHARE_PER_SECOND: Dim = Dim::new(1, 0, -1);
    pub const SHARE_PER_SECOND2: Dim = Dim::new(1, 0, -2);
    pub const CURRENCY_PER_SECOND: Dim = Dim::new(0, 1, -1);
    pub const CURRENCY_PER_SECOND2: Dim = Dim::new(0, 1, -2);
}

impl Mul for Dim {
    type Output = Dim;
    fn mul(self, o: Dim) -> Dim {
        Dim::new(self.share + o.share, self.currency + o.currency, self.time + o.time)
    }
}

impl Div for Dim {
    type Output = Dim;
    fn div(self, o: Dim) -> Dim {
        Dim::new(self.share - o.share, self.currency - o.currency, self.time - o.time)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut num = Vec::new();
        let mut den = Vec::new();
        for (name, e) in [("currency", self.currency), ("share", self.share), ("s", self.time)] {
            let part = |e: i8| if e == 1 { name.to_string() } else { format!("{name}^{e}") };
            match e.cmp(&0) {
                std::cmp::Ordering::Greater => num.push(part(e)),
                std::cmp::Ordering::Less => den.push(part(-e)),
                std::cmp::Ordering::Equal => {}
            }
        }
        let num = if num.is_empty() { "1".to_string() } else { num.join("*") };
        if den.is_empty() {
            write!(f, "{num}")
        } else {
            write!(f, "{num}/{}", den.join("*"))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("dimension mismatch: {left} vs {right}")]
pub struct DimensionError {
    pub left: Dim,
    pub right: Dim,
}

/// A value with its dimension. Addition and subtraction are checked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dim,
}

impl Quantity {
    pub const fn new(value: f64, dim: Dim) -> Self {
        Self { value, dim }
    }

    pub fn plus(self, o: Quantity) -> Result<Quantity, DimensionError> {
        if self.dim != o.dim {
            return Err(DimensionError { left: self.dim, right: o.dim });
        }
        Ok(Quantity::new(self.value + o.value, self.dim))
    }

    pub fn minus(self, o: Quantity) -> Result<Quantity, DimensionError> {
        self.plus(-o)
    }

    /// Returns the value if the dimension is `expected`.
    pub fn expect(self, expected: Dim) -> Result<f64, DimensionError> {
        if self.dim == expected {
            Ok(self.value)
        } else {
            Err(DimensionError { left: self.dim, right: expected })
        }
    }
}

impl Mul for Quantity {
    type Output = Quantity;
    fn mul(self, o: Quantity) -> Quantity {
        Quantity::new(self.value * o.value, self.dim * o.dim)
    }
}

impl Div for Quantity {
    type Output = Quantity;
    fn div(self, o: Quantity) -> Quantity {
        Quantity::new(self.value / o.value, self.dim / o.dim)
    }
}

impl Neg for Quantity {
    type Output = Quantity;
    fn neg(self) -> Quantity {
        Quantity::new(-self.value, self.dim)
    }
}
