use core::{fmt, ops};

use num_rational::Ratio;
use num_traits::{CheckedAdd, ToPrimitive, Zero};

/// A probability mass, kept as an exact fraction when it was given as one.
///
/// Sums of exact masses stay exact until an `i64` overflow, after which they
/// fall back to floating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mass {
    Exact(Ratio<i64>),
    Real(f64),
}

impl Mass {
    pub fn fraction(numer: i64, denom: i64) -> Self {
        Mass::Exact(Ratio::new(numer, denom))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Mass::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Mass::Real(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Mass::Exact(r) => r.is_zero(),
            Mass::Real(x) => x == 0.0,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Mass::Exact(_))
    }
}

impl ops::Add for Mass {
    type Output = Mass;

    fn add(self, other: Mass) -> Mass {
        match (self, other) {
            (Mass::Exact(a), Mass::Exact(b)) => match a.checked_add(&b) {
                Some(sum) => Mass::Exact(sum),
                None => Mass::Real(self.to_f64() + other.to_f64()),
            },
            _ => Mass::Real(self.to_f64() + other.to_f64()),
        }
    }
}

/// Division by a positive total; exact when both are exact.
impl ops::Div for Mass {
    type Output = Mass;

    fn div(self, total: Mass) -> Mass {
        match (self, total) {
            (Mass::Exact(a), Mass::Exact(b)) if !b.is_zero() => {
                let numer = (*a.numer() as i128) * (*b.denom() as i128);
                let denom = (*a.denom() as i128) * (*b.numer() as i128);
                let r = Ratio::new(numer, denom);
                match (i64::try_from(*r.numer()), i64::try_from(*r.denom())) {
                    (Ok(n), Ok(d)) => Mass::Exact(Ratio::new(n, d)),
                    _ => Mass::Real(self.to_f64() / total.to_f64()),
                }
            }
            _ => Mass::Real(self.to_f64() / total.to_f64()),
        }
    }
}

impl Default for Mass {
    fn default() -> Self {
        Mass::Exact(Ratio::zero())
    }
}

/// Fractions print verbatim (`1/6`), reals with six decimals.
impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mass::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Mass::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Mass::Real(x) => write!(f, "{x:.6}"),
        }
    }
}
