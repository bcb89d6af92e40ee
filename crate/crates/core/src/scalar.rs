//! Exact scalar fields the matrix machinery is generic over.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};

/// An exact ordered field.
///
/// Every rank and kernel decision in this crate is an exact zero test, so the
/// trait is only implemented for rational types. Floating point is
/// deliberately not a `Field`.
pub trait Field:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Lossless `"numerator/denominator"` rendering (denominator always present).
    fn to_fraction_string(&self) -> String;

    /// Inverse of [`Field::to_fraction_string`]; also accepts a bare integer.
    fn parse_fraction(s: &str) -> Option<Self>;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits in field")
    }
}

impl<I> Field for Ratio<I>
where
    I: Integer + Signed + Clone + Debug + Display + FromStr + FromPrimitive + Send + Sync + 'static,
    Ratio<I>: FromPrimitive,
{
    fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn parse_fraction(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n = I::from_str(n.trim()).ok()?;
                let d = I::from_str(d.trim()).ok()?;
                if d.is_zero() {
                    return None;
                }
                Some(Ratio::new(n, d))
            }
            None => Some(Ratio::from_integer(I::from_str(s).ok()?)),
        }
    }
}
