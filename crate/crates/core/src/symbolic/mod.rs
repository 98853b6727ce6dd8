//! Exact sparse symbolic algebra over the rationals.
//!
//! A [`SparseExpr`] is a finite sum of rational multiples of [`Monomial`]s in
//! the chart coordinates `t`, `v`, `y` and auxiliary symbols. The same type
//! carries plain polynomials, Laurent polynomials (negative exponents are an
//! opt-in per variable) and truncated power series (terms above a per-variable
//! order are dropped on every operation).

mod expr;
mod monomial;
mod parse;

pub use expr::SparseExpr;
pub use monomial::Monomial;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A variable identifier.
///
/// `T`, `V`, `Y` are the chart coordinates (the primed chart reuses them).
/// `Eps` is the dual-number symbol, `U`, `X`, `Z` are ambient projective
/// coordinates used only by the embedded surface models, and `Param(n)` are
/// auxiliary parameters handed out by a [`ParamPool`].
///
/// The derived order is the canonical variable order used everywhere:
/// `t < v < y < eps < u < x < z < p0 < p1 < ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    V,
    Y,
    Eps,
    U,
    X,
    Z,
    Param(u32),
}

impl Var {
    pub fn is_chart_coordinate(self) -> bool {
        matches!(self, Var::T | Var::V | Var::Y)
    }

    pub fn is_auxiliary(self) -> bool {
        !self.is_chart_coordinate()
    }

    pub fn name(self) -> String {
        match self {
            Var::T => "t".into(),
            Var::V => "v".into(),
            Var::Y => "y".into(),
            Var::Eps => "eps".into(),
            Var::U => "u".into(),
            Var::X => "x".into(),
            Var::Z => "z".into(),
            Var::Param(n) => format!("p{n}"),
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Some(match s {
            "t" => Var::T,
            "v" => Var::V,
            "y" => Var::Y,
            "eps" => Var::Eps,
            "u" => Var::U,
            "x" => Var::X,
            "z" => Var::Z,
            _ => {
                let digits = s.strip_prefix('p')?;
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                Var::Param(digits.parse().ok()?)
            }
        })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Hands out fresh parameter symbols; never reuses an index.
#[derive(Clone, Debug, Default)]
pub struct ParamPool {
    next: u32,
}

impl ParamPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: u32) -> Self {
        Self { next }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::Param(self.next);
        self.next += 1;
        v
    }

    pub fn fresh_many(&mut self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.fresh()).collect()
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_names_round_trip() {
        for v in [Var::T, Var::V, Var::Y, Var::Eps, Var::U, Var::X, Var::Z, Var::Param(17)] {
            assert_eq!(Var::from_name(&v.name()), Some(v));
        }
        assert_eq!(Var::from_name("p"), None);
        assert_eq!(Var::from_name("q1"), None);
    }

    #[test]
    fn fresh_params_never_collide_with_coordinates() {
        let mut pool = ParamPool::new();
        let ps = pool.fresh_many(5);
        assert!(ps.iter().all(|p| p.is_auxiliary()));
        assert_eq!(ps[4], Var::Param(4));
        assert_eq!(pool.fresh(), Var::Param(5));
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(fmt_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(fmt_rational(&int(7)), "7");
    }
}
