//! Buchberger's algorithm over `Q` for small systems in the auxiliary
//! parameters, and emptiness certificates via the weak Nullstellensatz.
//!
//! A reduced basis equal to `{1}` means the system has no solution over any
//! algebraically closed field containing `Q`, in particular over `C`. It is
//! not a statement about rational points only: `{x^2 + 1}` has no rational
//! solution but is not certified empty.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Monomial, Rational, SparseExpr, Var};

/// A polynomial in auxiliary variables only, with non-negative exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPolynomial(SparseExpr);

impl ParamPolynomial {
    pub fn new(e: SparseExpr) -> Result<Self> {
        let e = e.without_truncation();
        for (m, _) in e.terms() {
            for &(v, k) in m.factors() {
                if !v.is_auxiliary() {
                    return Err(Error::NotParameterPolynomial(v));
                }
                if k < 0 {
                    return Err(Error::NegativeExponentNotPermitted { var: v });
                }
            }
        }
        Ok(Self(e))
    }

    pub fn one() -> Self {
        Self(SparseExpr::one())
    }

    pub fn expr(&self) -> &SparseExpr {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn total_degree(&self) -> i32 {
        self.0.terms().map(|(m, _)| m.total_degree()).max().unwrap_or(0)
    }

    pub fn canonical_string(&self) -> String {
        self.0.canonical_string()
    }
}

impl fmt::Display for ParamPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::str::FromStr for ParamPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.parse()?)
    }
}

/// Variables are ranked by the canonical variable order, the first one
/// being the largest (so `p1 > p2 > ...` under lex).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    #[default]
    GrevLex,
    Lex,
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MonomialOrder::GrevLex => "grevlex",
            MonomialOrder::Lex => "lex",
        })
    }
}

/// Dense exponent vectors over a fixed variable list. The sort key is
/// linear in the exponents, so monomial products are key sums.
#[derive(Clone, Debug)]
struct Ring {
    vars: Vec<Var>,
    order: MonomialOrder,
}

type Key = Vec<i32>;
type Poly = BTreeMap<Key, Rational>;

impl Ring {
    fn key(&self, e: &[i32]) -> Key {
        match self.order {
            MonomialOrder::Lex => e.to_vec(),
            MonomialOrder::GrevLex => {
                let mut k = Vec::with_capacity(e.len() + 1);
                k.push(e.iter().sum());
                k.extend(e.iter().rev().map(|x| -x));
                k
            }
        }
    }

    fn exps(&self, k: &Key) -> Vec<i32> {
        match self.order {
            MonomialOrder::Lex => k.clone(),
            MonomialOrder::GrevLex => k[1..].iter().rev().map(|x| -x).collect(),
        }
    }

    fn to_poly(&self, p: &ParamPolynomial) -> Poly {
        p.0.terms()
            .map(|(m, c)| (self.key(&self.vars.iter().map(|&v| m.exponent(v)).collect::<Vec<_>>()), c.clone()))
            .collect()
    }

    fn to_param(&self, p: &Poly) -> ParamPolynomial {
        let terms = p.iter().map(|(k, c)| {
            let e = self.exps(k);
            (Monomial::from_factors(self.vars.iter().zip(e).map(|(&v, x)| (v, x))), c.clone())
        });
        ParamPolynomial(SparseExpr::from_terms(terms).expect("non-negative exponents"))
    }
}

fn add_key(a: &Key, b: &Key) -> Key {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_key(a: &Key, b: &Key) -> Key {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn degree(ring: &Ring, k: &Key) -> i32 {
    ring.exps(k).iter().sum()
}

fn divides(ring: &Ring, a: &Key, b: &Key) -> bool {
    ring.exps(a).iter().zip(ring.exps(b)).all(|(x, y)| *x <= y)
}

fn lcm(ring: &Ring, a: &Key, b: &Key) -> Key {
    let e: Vec<i32> = ring.exps(a).iter().zip(ring.exps(b)).map(|(x, y)| (*x).max(y)).collect();
    ring.key(&e)
}

fn coprime(ring: &Ring, a: &Key, b: &Key) -> bool {
    ring.exps(a).iter().zip(ring.exps(b)).all(|(x, y)| *x == 0 || y == 0)
}

fn lead(p: &Poly) -> (&Key, &Rational) {
    p.last_key_value().expect("nonzero polynomial")
}

/// `p -= c * x^k * q`
fn sub_mul(p: &mut Poly, c: &Rational, k: &Key, q: &Poly) {
    for (m, x) in q {
        let key = add_key(m, k);
        let v = p.entry(key.clone()).or_insert_with(Rational::zero);
        *v -= c * x;
        if v.is_zero() {
            p.remove(&key);
        }
    }
}

fn monic(mut p: Poly) -> Poly {
    if let Some((_, c)) = p.last_key_value() {
        let inv = c.recip();
        for x in p.values_mut() {
            *x *= &inv;
        }
    }
    p
}

/// Full reduction of `p` modulo `g` (every term, not only the leading one).
fn reduce(ring: &Ring, mut p: Poly, g: &[Poly]) -> Poly {
    let mut rem = Poly::new();
    while let Some((k, c)) = p.pop_last() {
        match g.iter().find(|q| divides(ring, lead(q).0, &k)) {
            Some(q) => {
                let (lk, lc) = lead(q);
                let shift = sub_key(&k, lk);
                let f = &c / lc;
                // the leading term cancels exactly; handle the rest
                let mut tail = q.clone();
                tail.pop_last();
                sub_mul(&mut p, &f, &shift, &tail);
            }
            None => {
                rem.insert(k, c);
            }
        }
    }
    rem
}

fn s_poly(ring: &Ring, f: &Poly, g: &Poly) -> Poly {
    let (fk, fc) = lead(f);
    let (gk, gc) = lead(g);
    let l = lcm(ring, fk, gk);
    let mut out = Poly::new();
    sub_mul(&mut out, &-fc.recip(), &sub_key(&l, fk), f);
    sub_mul(&mut out, &gc.recip(), &sub_key(&l, gk), g);
    out
}

fn ring_for(polys: &[&ParamPolynomial], order: MonomialOrder) -> Ring {
    let vars: BTreeSet<Var> = polys.iter().flat_map(|p| p.0.vars()).collect();
    Ring { vars: vars.into_iter().collect(), order }
}

/// A reduced Gröbner basis, sorted by leading monomial (ascending).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    pub generators: Vec<ParamPolynomial>,
    pub order: MonomialOrder,
}

impl GroebnerBasis {
    pub fn is_unit(&self) -> bool {
        self.generators.len() == 1 && self.generators[0] == ParamPolynomial::one()
    }

    pub fn canonical_strings(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.canonical_string()).collect()
    }

    fn ring_with(&self, extra: &[&ParamPolynomial]) -> Ring {
        let mut all: Vec<&ParamPolynomial> = self.generators.iter().collect();
        all.extend_from_slice(extra);
        ring_for(&all, self.order)
    }
}

/// Counters from one run of [`buchberger`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct BuchbergerStats {
    pub pairs_considered: usize,
    pub pairs_skipped: usize,
    pub zero_reductions: usize,
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
pub fn buchberger(gens: &[ParamPolynomial], order: MonomialOrder) -> GroebnerBasis {
    buchberger_with_stats(gens, order).0
}

/// Pairs are taken by smallest lcm degree, ties broken by generator
/// indices; pairs with coprime leading monomials are skipped.
pub fn buchberger_with_stats(gens: &[ParamPolynomial], order: MonomialOrder) -> (GroebnerBasis, BuchbergerStats) {
    let ring = ring_for(&gens.iter().collect::<Vec<_>>(), order);
    let mut stats = BuchbergerStats::default();
    let mut g: Vec<Poly> = Vec::new();
    let mut pairs: BTreeSet<(i32, usize, usize)> = BTreeSet::new();
    let unit = || GroebnerBasis { generators: vec![ParamPolynomial::one()], order };

    let push = |g: &mut Vec<Poly>, pairs: &mut BTreeSet<(i32, usize, usize)>, p: Poly| -> bool {
        let is_constant = lead(&p).0.iter().all(|x| *x == 0);
        let j = g.len();
        for (i, q) in g.iter().enumerate() {
            pairs.insert((degree(&ring, &lcm(&ring, lead(q).0, lead(&p).0)), i, j));
        }
        g.push(monic(p));
        is_constant
    };

    for p in gens {
        let p = reduce(&ring, ring.to_poly(p), &g);
        if !p.is_empty() && push(&mut g, &mut pairs, p) {
            return (unit(), stats);
        }
    }
    while let Some((_, i, j)) = pairs.pop_first() {
        stats.pairs_considered += 1;
        if coprime(&ring, lead(&g[i]).0, lead(&g[j]).0) {
            stats.pairs_skipped += 1;
            continue;
        }
        let s = reduce(&ring, s_poly(&ring, &g[i], &g[j]), &g);
        if s.is_empty() {
            stats.zero_reductions += 1;
        } else if push(&mut g, &mut pairs, s) {
            return (unit(), stats);
        }
    }
    (GroebnerBasis { generators: interreduce(&ring, g), order }, stats)
}

fn interreduce(ring: &Ring, g: Vec<Poly>) -> Vec<ParamPolynomial> {
    let mut minimal: Vec<Poly> = Vec::new();
    for (i, p) in g.iter().enumerate() {
        let lp = lead(p).0;
        let redundant = g.iter().enumerate().any(|(j, q)| {
            let lq = lead(q).0;
            j != i && divides(ring, lq, lp) && (lq != lp || j < i)
        });
        if !redundant {
            minimal.push(p.clone());
        }
    }
    let mut out = Vec::new();
    for i in 0..minimal.len() {
        let others: Vec<Poly> = minimal.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| q.clone()).collect();
        let mut p = minimal[i].clone();
        let (lk, lc) = p.pop_last().unwrap();
        let mut r = reduce(ring, p, &others);
        r.insert(lk, lc);
        out.push(monic(r));
    }
    out.sort_by(|a, b| lead(a).0.cmp(lead(b).0));
    out.into_iter().map(|p| ring.to_param(&p)).collect()
}

/// Remainder of `p` on division by `gb`; zero iff `p` is in the ideal.
pub fn normal_form(p: &ParamPolynomial, gb: &GroebnerBasis) -> ParamPolynomial {
    let ring = gb.ring_with(&[p]);
    let g: Vec<Poly> = gb.generators.iter().map(|q| ring.to_poly(q)).collect();
    ring.to_param(&reduce(&ring, ring.to_poly(p), &g))
}

/// S-polynomials of the basis that do not reduce to zero (empty for a
/// Gröbner basis).
pub fn unreduced_s_polynomials(gb: &GroebnerBasis) -> Vec<(usize, usize)> {
    let ring = gb.ring_with(&[]);
    let g: Vec<Poly> = gb.generators.iter().map(|q| ring.to_poly(q)).collect();
    let mut bad = Vec::new();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if !reduce(&ring, s_poly(&ring, &g[i], &g[j]), &g).is_empty() {
                bad.push((i, j));
            }
        }
    }
    bad
}

/// Whether `gb` is reduced: monic, and no term of any generator is
/// divisible by the leading monomial of another.
pub fn is_reduced(gb: &GroebnerBasis) -> bool {
    let ring = gb.ring_with(&[]);
    let g: Vec<Poly> = gb.generators.iter().map(|q| ring.to_poly(q)).collect();
    g.iter().enumerate().all(|(i, p)| {
        lead(p).1.is_one()
            && g.iter().enumerate().all(|(j, q)| i == j || p.keys().all(|k| !divides(&ring, lead(q).0, k)))
    })
}

#[derive(Clone, Debug)]
pub struct EmptinessCertificate {
    pub empty: bool,
    pub basis: GroebnerBasis,
}

/// True iff the reduced basis is `{1}`, i.e. no common zero over `C`.
/// The empty system (and the zero ideal) has solutions.
pub fn certify_empty(gens: &[ParamPolynomial], order: MonomialOrder) -> EmptinessCertificate {
    let basis = buchberger(gens, order);
    EmptinessCertificate { empty: basis.is_unit(), basis }
}
