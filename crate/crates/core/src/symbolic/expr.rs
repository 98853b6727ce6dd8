use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{fmt_rational, Monomial, Rational, Var};
use crate::error::{Error, Result};

/// Exact sparse expression: a finite map from monomials to nonzero rationals.
///
/// Two extra pieces of state ride along:
/// * `laurent`: the variables allowed to carry negative exponents. Set when an
///   expression is built with a negative power and propagated by union.
/// * `truncation`: per-variable orders `N`; every term whose exponent in that
///   variable exceeds `N` is dropped. Combined by minimum.
///
/// Equality compares the term maps only.
#[derive(Clone, Debug, Default)]
pub struct SparseExpr {
    terms: BTreeMap<Monomial, Rational>,
    laurent: BTreeSet<Var>,
    truncation: BTreeMap<Var, u32>,
}

impl PartialEq for SparseExpr {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for SparseExpr {}

fn merge_truncation(a: &BTreeMap<Var, u32>, b: &BTreeMap<Var, u32>) -> BTreeMap<Var, u32> {
    let mut out = a.clone();
    for (&v, &n) in b {
        out.entry(v).and_modify(|m| *m = (*m).min(n)).or_insert(n);
    }
    out
}

fn exceeds(m: &Monomial, trunc: &BTreeMap<Var, u32>) -> bool {
    trunc.iter().any(|(&v, &n)| m.exponent(v) > n as i32)
}

impl SparseExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        let mut e = Self::zero();
        if !q.is_zero() {
            e.terms.insert(Monomial::one(), q);
        }
        e
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(super::int(n))
    }

    pub fn var(v: Var) -> Self {
        let mut e = Self::zero();
        e.terms.insert(Monomial::var(v), Rational::one());
        e
    }

    /// A single term. Negative exponents switch on the Laurent flag of their
    /// variable; a negative power of `y` is rejected.
    pub fn term(c: Rational, m: Monomial) -> Result<Self> {
        Self::from_terms([(m, c)])
    }

    /// Shorthand for `c * prod(v^e)` with a small-integer coefficient.
    pub fn monomial(c: i64, factors: &[(Var, i32)]) -> Self {
        Self::term(super::int(c), Monomial::from_factors(factors.iter().copied())).expect("negative power of y")
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Result<Self> {
        let mut e = Self::zero();
        for (m, c) in terms {
            for &(v, x) in m.factors() {
                if x < 0 {
                    if v == Var::Y {
                        return Err(Error::NegativeExponentNotPermitted { var: v });
                    }
                    e.laurent.insert(v);
                }
            }
            e.add_term(m, c);
        }
        Ok(e)
    }

    /// Explicitly allows negative exponents of `v`.
    pub fn with_laurent(mut self, v: Var) -> Self {
        self.laurent.insert(v);
        self
    }

    pub fn laurent_flags(&self) -> &BTreeSet<Var> {
        &self.laurent
    }

    /// Sets (or tightens) the truncation order of `v`, dropping higher terms.
    pub fn with_truncation(mut self, v: Var, n: u32) -> Self {
        let n = self.truncation.get(&v).map_or(n, |&m| m.min(n));
        self.truncation.insert(v, n);
        self.terms.retain(|m, _| m.exponent(v) <= n as i32);
        self
    }

    pub fn without_truncation(mut self) -> Self {
        self.truncation.clear();
        self
    }

    pub fn truncation(&self, v: Var) -> Option<u32> {
        self.truncation.get(&v).copied()
    }

    pub fn t_truncation(&self) -> Option<u32> {
        self.truncation(Var::T)
    }

    pub fn truncations(&self) -> &BTreeMap<Var, u32> {
        &self.truncation
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || exceeds(&m, &self.truncation) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient_of(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The value of a constant expression (zero included).
    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.coefficient_of(&Monomial::one()))
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self { terms: BTreeMap::new(), ..self.clone() };
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= q;
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        acc.truncation = self.truncation.clone();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative. Differentiating with respect to a
    /// truncated variable lowers its truncation order by one (saturating at
    /// zero), since `d/dx` does not preserve the ideal `(x^{N+1})`.
    pub fn partial_derivative(&self, x: Var) -> Self {
        let mut out = self.partial_derivative_keep_truncation(x);
        if let Some(n) = self.truncation(x) {
            out = out.with_truncation(x, n.saturating_sub(1));
        }
        out
    }

    pub(crate) fn partial_derivative_keep_truncation(&self, x: Var) -> Self {
        let mut out =
            Self { terms: BTreeMap::new(), laurent: self.laurent.clone(), truncation: self.truncation.clone() };
        for (m, c) in &self.terms {
            let e = m.exponent(x);
            if e != 0 {
                let q = c * super::int(e as i64);
                out.add_term(m.mul(&Monomial::pow(x, -1)), q);
            }
        }
        out
    }

    /// Minimal exponent of `x`, `None` for the zero expression.
    pub fn valuation(&self, x: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exponent(x)).min()
    }

    /// Maximal exponent of `x`, `None` for the zero expression.
    pub fn degree(&self, x: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exponent(x)).max()
    }

    /// Vanishing order in `t`; `Ok(None)` stands for `+inf` (zero expression).
    pub fn t_valuation(&self) -> Result<Option<u32>> {
        match self.valuation(Var::T) {
            None => Ok(None),
            Some(e) if e < 0 => Err(Error::NegativeTExponent(self.canonical_string())),
            Some(e) => Ok(Some(e as u32)),
        }
    }

    /// Terms with exponent exactly `e` in `x`, with `x` removed.
    pub fn coefficient(&self, x: Var, e: i32) -> Self {
        let mut out =
            Self { terms: BTreeMap::new(), laurent: self.laurent.clone(), truncation: self.truncation.clone() };
        out.truncation.remove(&x);
        for (m, c) in &self.terms {
            let (ex, rest) = m.split_off(x);
            if ex == e {
                out.terms.insert(rest, c.clone());
            }
        }
        out
    }

    /// Groups terms by their monomial in the variables selected by `keep`;
    /// the values are the cofactors in the remaining variables.
    pub fn collect<F: Fn(Var) -> bool + Copy>(&self, keep: F) -> BTreeMap<Monomial, SparseExpr> {
        let mut out: BTreeMap<Monomial, SparseExpr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key = m.restrict(keep);
            let rest = m.restrict(|v| !keep(v));
            out.entry(key)
                .or_insert_with(|| Self { laurent: self.laurent.clone(), ..Self::zero() })
                .add_term(rest, c.clone());
        }
        out
    }

    /// Sets `x = q`.
    pub fn specialize(&self, x: Var, q: &Rational) -> Self {
        let mut out =
            Self { terms: BTreeMap::new(), laurent: self.laurent.clone(), truncation: self.truncation.clone() };
        out.truncation.remove(&x);
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(x);
            let factor = if e == 0 {
                Rational::one()
            } else if q.is_zero() {
                if e < 0 {
                    panic!("specializing {x} = 0 in an expression with a negative power of {x}");
                }
                continue;
            } else if e > 0 {
                num_traits::pow(q.clone(), e as usize)
            } else {
                num_traits::pow(q.recip(), (-e) as usize)
            };
            out.add_term(rest, c * factor);
        }
        out
    }

    /// Multiplicative inverse when the expression is a single invertible
    /// monomial, or such a monomial times a series `1 + w` with `w` in the
    /// ideal of a truncated variable.
    pub fn inverse_unit(&self) -> Option<Self> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let mut inv = Self::term(c.recip(), m.inverse()).ok()?;
            inv.laurent.extend(self.laurent.iter().copied());
            inv.truncation = self.truncation.clone();
            return Some(inv);
        }
        for (&x, &n) in &self.truncation {
            let min = self.valuation(x)?;
            let leads: Vec<_> = self.terms.iter().filter(|(m, _)| m.exponent(x) == min).collect();
            if min != 0 || leads.len() != 1 {
                continue;
            }
            let (lm, lc) = leads[0];
            let lead_inv = Self::term(lc.recip(), lm.inverse()).ok()?;
            let mut w = self * &lead_inv;
            w = &w - &Self::one();
            let neg_w = -&w;
            let mut acc = Self::one().with_truncation(x, n);
            let mut power = Self::one().with_truncation(x, n);
            for _ in 0..n {
                power = &power * &neg_w;
                if power.is_zero() {
                    break;
                }
                acc = &acc + &power;
            }
            return Some(&acc * &lead_inv);
        }
        None
    }

    /// Simultaneous substitution `x -> rules[x]`; unlisted variables are left
    /// alone. A negative power of a substituted variable requires the
    /// replacement to be invertible (see [`SparseExpr::inverse_unit`]).
    ///
    /// The truncation of an unsubstituted variable survives; for a
    /// substituted one it survives only if the replacement lies in the ideal
    /// of that same variable (e.g. `t -> t`). Truncations carried by the
    /// replacements are merged in.
    pub fn substitute(&self, rules: &BTreeMap<Var, SparseExpr>) -> Result<Self> {
        let mut trunc = BTreeMap::new();
        for (&v, &n) in &self.truncation {
            let keep = match rules.get(&v) {
                None => true,
                Some(r) => r.valuation(v).is_some_and(|e| e >= 1),
            };
            if keep {
                trunc.insert(v, n);
            }
        }
        for r in rules.values() {
            trunc = merge_truncation(&trunc, &r.truncation);
        }
        let mut laurent: BTreeSet<Var> = self.laurent.iter().filter(|v| !rules.contains_key(v)).copied().collect();
        for r in rules.values() {
            laurent.extend(r.laurent.iter().copied());
        }

        let mut out = Self { terms: BTreeMap::new(), laurent, truncation: trunc.clone() };
        let mut powers: HashMap<(Var, i32), SparseExpr> = HashMap::new();
        for (m, c) in &self.terms {
            let mut acc = Self::constant(c.clone());
            acc.truncation = trunc.clone();
            let mut rest = Vec::new();
            for &(v, e) in m.factors() {
                let Some(r) = rules.get(&v) else {
                    rest.push((v, e));
                    continue;
                };
                if !powers.contains_key(&(v, e)) {
                    let base = if e < 0 {
                        r.clone()
                            .inverse_unit()
                            .ok_or_else(|| Error::NonInvertibleSubstitution { var: v, expr: r.canonical_string() })?
                    } else {
                        r.clone()
                    };
                    let mut base = base;
                    for (&tv, &tn) in &trunc {
                        base = base.with_truncation(tv, tn);
                    }
                    let p = base.pow(e.unsigned_abs());
                    powers.insert((v, e), p);
                }
                acc = &acc * &powers[&(v, e)];
                if acc.is_zero() {
                    break;
                }
            }
            if acc.is_zero() {
                continue;
            }
            let rest = Monomial::from_factors(rest);
            for (am, ac) in acc.terms {
                out.add_term(am.mul(&rest), ac);
            }
            out.laurent.extend(acc.laurent.iter().copied());
        }
        for m in out.terms.keys() {
            for &(v, e) in m.factors() {
                if e < 0 {
                    if v == Var::Y {
                        return Err(Error::NegativeExponentNotPermitted { var: v });
                    }
                    out.laurent.insert(v);
                }
            }
        }
        Ok(out)
    }

    /// Divides every term by the monomial `m` (times `c`), failing if a
    /// negative exponent would appear in a variable not already Laurent.
    pub fn divide_by_term(&self, c: &Rational, m: &Monomial) -> Option<Self> {
        let inv = m.inverse();
        let mut out =
            Self { terms: BTreeMap::new(), laurent: self.laurent.clone(), truncation: self.truncation.clone() };
        for (tm, tc) in &self.terms {
            let q = tm.mul(&inv);
            for &(v, e) in q.factors() {
                if e < 0 && !self.laurent.contains(&v) {
                    return None;
                }
            }
            out.add_term(q, tc / c);
        }
        Some(out)
    }

    /// Deterministic serialization; see the crate README for the grammar.
    pub fn canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| if m.is_one() { fmt_rational(c) } else { format!("{} * {}", fmt_rational(c), m) })
            .collect();
        parts.join(" + ")
    }

    /// Largest absolute numerator/denominator among the coefficients, as a
    /// rough size measure for diagnostics.
    pub fn height(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl fmt::Display for SparseExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

impl<'a> Add<&'a SparseExpr> for &'a SparseExpr {
    type Output = SparseExpr;

    fn add(self, rhs: &'a SparseExpr) -> SparseExpr {
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let trunc = merge_truncation(&self.truncation, &rhs.truncation);
        let mut out = big.clone();
        if out.truncation != trunc {
            out.truncation = trunc;
            let t = out.truncation.clone();
            out.terms.retain(|m, _| !exceeds(m, &t));
        }
        out.laurent.extend(small.laurent.iter().copied());
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a SparseExpr> for &'a SparseExpr {
    type Output = SparseExpr;

    fn sub(self, rhs: &'a SparseExpr) -> SparseExpr {
        self + &(-rhs)
    }
}

impl Neg for &SparseExpr {
    type Output = SparseExpr;

    fn neg(self) -> SparseExpr {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }
}

impl<'a> Mul<&'a SparseExpr> for &'a SparseExpr {
    type Output = SparseExpr;

    fn mul(self, rhs: &'a SparseExpr) -> SparseExpr {
        let trunc = merge_truncation(&self.truncation, &rhs.truncation);
        let mut laurent = self.laurent.clone();
        laurent.extend(rhs.laurent.iter().copied());
        let mut out = SparseExpr { terms: BTreeMap::new(), laurent, truncation: trunc };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if out.truncation.iter().any(|(&v, &n)| ma.exponent(v) + mb.exponent(v) > n as i32) {
                    continue;
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<SparseExpr> for SparseExpr {
            type Output = SparseExpr;
            fn $f(self, rhs: SparseExpr) -> SparseExpr {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a SparseExpr> for SparseExpr {
            type Output = SparseExpr;
            fn $f(self, rhs: &'a SparseExpr) -> SparseExpr {
                (&self).$f(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for SparseExpr {
    type Output = SparseExpr;

    fn neg(self) -> SparseExpr {
        -&self
    }
}

impl From<Rational> for SparseExpr {
    fn from(q: Rational) -> Self {
        SparseExpr::constant(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{int, rat};

    fn p(s: &str) -> SparseExpr {
        s.parse().unwrap()
    }

    fn rules(pairs: &[(Var, &str)]) -> BTreeMap<Var, SparseExpr> {
        pairs.iter().map(|(v, s)| (*v, p(s))).collect()
    }

    #[test]
    fn add_examples() {
        assert!((p("v^2") + p("-1 * v^2")).is_zero());
        assert_eq!(p("t + v") + p("t"), p("2 t + v"));
        assert_eq!(p("y v^2 - t v") + p("t v"), p("v^2 y"));
    }

    #[test]
    fn mul_examples() {
        let q = p("3 t v - 1/2 y");
        assert_eq!(SparseExpr::one() * q.clone(), q);
        assert_eq!(p("v") * p("v^-1"), SparseExpr::one());
        let one_t = p("1 + t").with_truncation(Var::T, 1);
        let sq = &one_t * &one_t;
        assert_eq!(sq, p("1 + 2 t"));
        assert_eq!(sq.t_truncation(), Some(1));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("v^2").partial_derivative(Var::V), p("2 v"));
        assert_eq!(p("y v^2 - t v").partial_derivative(Var::Y), p("v^2"));
        assert!(p("7/3").partial_derivative(Var::T).is_zero());
    }

    #[test]
    fn derivative_in_truncated_variable_lowers_order() {
        let e = p("1 + t + t^2").with_truncation(Var::T, 2);
        let d = e.partial_derivative(Var::T);
        assert_eq!(d, p("1 + 2 t"));
        assert_eq!(d.t_truncation(), Some(1));
    }

    #[test]
    fn substitute_examples() {
        let r = rules(&[(Var::Y, "v^2 y + t v"), (Var::V, "v^-1")]);
        assert_eq!(p("y v").substitute(&r).unwrap(), p("v y + t"));
        let id = rules(&[(Var::V, "v"), (Var::Y, "y"), (Var::T, "t")]);
        let q = p("3 t v^2 y - y^2 + 1/5");
        assert_eq!(q.substitute(&id).unwrap(), q);
        let inv = rules(&[(Var::V, "v^-1")]);
        assert_eq!(p("v^-1").substitute(&inv).unwrap(), p("v"));
    }

    #[test]
    fn substitute_negative_power_of_non_unit_fails() {
        let r = rules(&[(Var::V, "1 + v")]);
        let err = p("v^-1").substitute(&r).unwrap_err();
        assert!(matches!(err, Error::NonInvertibleSubstitution { var: Var::V, .. }));
    }

    #[test]
    fn substitute_negative_power_of_truncated_unit() {
        let r = rules(&[(Var::V, "1 + t")]);
        let e = p("v^-1").with_truncation(Var::T, 3);
        let got = e.substitute(&r.into_iter().map(|(k, v)| (k, v.with_truncation(Var::T, 3))).collect()).unwrap();
        assert_eq!(got, p("1 - t + t^2 - t^3"));
    }

    #[test]
    fn dual_number_inverse() {
        let e = p("1 + eps v").with_truncation(Var::Eps, 1);
        let inv = e.inverse_unit().unwrap();
        assert_eq!(inv, p("1 - eps v"));
        assert_eq!(&inv * &e, SparseExpr::one());
    }

    #[test]
    fn t_valuation_examples() {
        assert_eq!(p("t^2 v + t^3").t_valuation().unwrap(), Some(2));
        assert_eq!(SparseExpr::zero().t_valuation().unwrap(), None);
        // gamma = t^2 a + t A with a = 3, A = -2
        assert_eq!(p("3 t^2 - 2 t").t_valuation().unwrap(), Some(1));
        assert!(matches!(p("t^-1").t_valuation(), Err(Error::NegativeTExponent(_))));
    }

    #[test]
    fn canonical_string_examples() {
        assert_eq!(SparseExpr::zero().canonical_string(), "0");
        assert_eq!(p("y v^2 - t v").canonical_string(), "-1 * t^1 v^1 + 1 * v^2 y^1");
        assert_eq!(p("2 v").canonical_string(), "2 * v^1");
        assert_eq!(p("-3/4 + t").canonical_string(), "-3/4 + 1 * t^1");
    }

    #[test]
    fn negative_power_of_y_rejected() {
        assert!(SparseExpr::term(int(1), Monomial::pow(Var::Y, -1)).is_err());
        assert!("y^-2".parse::<SparseExpr>().is_err());
    }

    #[test]
    fn laurent_flag_set_on_negative_powers() {
        let e = p("v^-1 + t");
        assert!(e.laurent_flags().contains(&Var::V));
        assert!(!e.laurent_flags().contains(&Var::T));
    }

    #[test]
    fn specialize_and_coefficients() {
        let e = p("t^2 v + 3 t v^-1 + y");
        assert_eq!(e.specialize(Var::T, &int(2)), p("4 v + 6 v^-1 + y"));
        assert_eq!(e.coefficient(Var::T, 1), p("3 v^-1"));
        let groups = e.collect(|v| v == Var::V);
        assert_eq!(groups[&Monomial::var(Var::V)], p("t^2"));
        assert_eq!(e.scale(&rat(1, 2)).coefficient(Var::T, 0), p("1/2 y"));
    }
}
