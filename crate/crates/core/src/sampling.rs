//! Seeded random generation of expressions and fields for randomized checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::charts::Derivation;
use crate::symbolic::{rat, Monomial, Rational, SparseExpr, Var};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero-or-zero small rational `n/d` with `|n| <= bound`, `1 <= d <= 3`.
pub fn random_rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    rat(rng.gen_range(-bound..=bound), rng.gen_range(1..=3))
}

pub fn random_nonzero_rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    loop {
        let q = random_rational(rng, bound);
        if q != rat(0, 1) {
            return q;
        }
    }
}

/// Random polynomial with up to `terms` terms in `vars`, each exponent in
/// `lo..=hi`. Negative `lo` produces Laurent terms (never use it for `y`).
pub fn random_expr<R: Rng>(rng: &mut R, vars: &[Var], lo: i32, hi: i32, terms: usize) -> SparseExpr {
    let n = rng.gen_range(0..=terms);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let m = Monomial::from_factors(vars.iter().map(|&v| (v, rng.gen_range(lo..=hi))));
        pairs.push((m, random_rational(rng, 5)));
    }
    SparseExpr::from_terms(pairs).expect("random expression")
}

pub fn random_poly<R: Rng>(rng: &mut R, vars: &[Var], max_deg: i32, terms: usize) -> SparseExpr {
    random_expr(rng, vars, 0, max_deg, terms)
}

/// A random field of regular shape `g d/dv + (a y^2 + b y + c) d/dy + k d/dt`
/// with coefficients polynomial in `t, v`; with `with_t` unset the field is
/// tangent to the fibers and `t`-free. `order` truncates in `t`.
pub fn random_chart_field<R: Rng>(rng: &mut R, order: Option<u32>, with_t: bool) -> Derivation {
    let base: &[Var] = if with_t { &[Var::T, Var::V] } else { &[Var::V] };
    let poly = |rng: &mut R| random_poly(rng, base, 3, 3);
    let g = poly(rng);
    let y = SparseExpr::var(Var::Y);
    let cy = &(&poly(rng) * &(&y * &y)) + &(&(&poly(rng) * &y) + &poly(rng));
    let k = if with_t { random_poly(rng, &[Var::T], 3, 2) } else { SparseExpr::zero() };
    let d = Derivation::from_components([(Var::V, g), (Var::Y, cy), (Var::T, k)]);
    match order {
        Some(n) => d.with_truncation(Var::T, n),
        None => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{regularity_check, Chart};

    #[test]
    fn same_seed_same_samples() {
        let a = random_chart_field(&mut rng(3), Some(2), true);
        let b = random_chart_field(&mut rng(3), Some(2), true);
        assert_eq!(a, b);
    }

    #[test]
    fn random_fields_are_regular() {
        let mut r = rng(11);
        for _ in 0..50 {
            assert!(regularity_check(&random_chart_field(&mut r, Some(3), true), &Chart::new("W")));
        }
    }
}
