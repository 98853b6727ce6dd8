//! Global formal vector fields on the two-chart family, truncated in `t`.
//!
//! A field is carried by its chart-`W` representative
//! `g d/dv + (alpha y^2 + beta y + gamma) d/dy + k d/dt`; the `W'`
//! representative is its pushforward, and being global means exactly that
//! the pushforward is regular on `W'`.

mod cohomology;

pub use cohomology::{
    coboundary_matrix, h0_dimension, h1_dimension, h1_dimension_excluding, is_coboundary, kodaira_spencer_cocycle,
    CechCocycle, H1Result, OverlapKey, Window,
};

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::charts::{pushforward, ChartVectorField, Derivation, IdentityCheck, Transition};
use crate::error::{Error, Result};
use crate::linalg::{self, matrix_from_columns, RationalMatrix};
use crate::symbolic::{Monomial, Rational, SparseExpr, Var};

/// Which of the four `W`-chart coefficient functions an unknown belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    G,
    Alpha,
    Beta,
    Gamma,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::G, Slot::Alpha, Slot::Beta, Slot::Gamma];

    /// The derivation `v^d t^m` placed in this slot.
    fn unit(self, d: i32, m: i32) -> Derivation {
        let y = |k| (Var::Y, k);
        let (var, factors) = match self {
            Slot::G => (Var::V, vec![(Var::V, d), (Var::T, m)]),
            Slot::Alpha => (Var::Y, vec![(Var::V, d), (Var::T, m), y(2)]),
            Slot::Beta => (Var::Y, vec![(Var::V, d), (Var::T, m), y(1)]),
            Slot::Gamma => (Var::Y, vec![(Var::V, d), (Var::T, m)]),
        };
        Derivation::from_components([(var, SparseExpr::monomial(1, &factors))])
    }
}

/// The seven series that determine a global field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    A,
    B,
    C,
    LowerA,
    LowerB,
    LowerC,
    E,
}

impl Direction {
    pub const ALL: [Direction; 7] = [
        Direction::A,
        Direction::B,
        Direction::C,
        Direction::LowerA,
        Direction::LowerB,
        Direction::LowerC,
        Direction::E,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Direction::A => "A",
            Direction::B => "B",
            Direction::C => "C",
            Direction::LowerA => "a",
            Direction::LowerB => "b",
            Direction::LowerC => "c",
            Direction::E => "e",
        }
    }

    pub fn index(self) -> usize {
        Direction::ALL.iter().position(|&d| d == self).unwrap()
    }

    /// The unknown this direction is read off from: `(slot, v-degree)`.
    fn readout(self) -> (Slot, i32) {
        match self {
            Direction::A => (Slot::G, 2),
            Direction::B => (Slot::G, 1),
            Direction::C => (Slot::G, 0),
            Direction::LowerA => (Slot::Alpha, 2),
            Direction::LowerB => (Slot::Alpha, 1),
            Direction::LowerC => (Slot::Alpha, 0),
            Direction::E => (Slot::Beta, 0),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Generic coefficients for `g, alpha, beta, gamma` up to `v`-degree `D`
/// and `k`, all up to `t`-order `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlobalFieldAnsatz {
    pub degree: u32,
    pub order: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Unknown {
    Coeff { slot: Slot, v_degree: u32, t_order: u32 },
    K { t_order: u32 },
}

impl GlobalFieldAnsatz {
    pub fn new(order: u32, degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Precondition(format!("v-degree bound must be at least 2, got {degree}")));
        }
        Ok(Self { degree, order })
    }

    pub fn unknowns(&self) -> Vec<Unknown> {
        let mut out = Vec::new();
        for m in 0..=self.order {
            for slot in Slot::ALL {
                for d in 0..=self.degree {
                    out.push(Unknown::Coeff { slot, v_degree: d, t_order: m });
                }
            }
            out.push(Unknown::K { t_order: m });
        }
        out
    }

    pub fn unknown_count(&self) -> usize {
        ((4 * (self.degree + 1) + 1) * (self.order + 1)) as usize
    }

    fn unit_field(&self, u: Unknown) -> Derivation {
        let d = match u {
            Unknown::Coeff { slot, v_degree, t_order } => slot.unit(v_degree as i32, t_order as i32),
            Unknown::K { t_order } => {
                Derivation::from_components([(Var::T, SparseExpr::monomial(1, &[(Var::T, t_order as i32)]))])
            }
        };
        d.with_truncation(Var::T, self.order)
    }

    /// The chart field with the given unknown values.
    pub fn field(&self, values: &[Rational]) -> Derivation {
        let mut acc = Derivation::zero();
        for (u, x) in self.unknowns().into_iter().zip(values) {
            if !x.is_zero() {
                acc = acc.add(&self.unit_field(u).scale(x));
            }
        }
        acc.with_truncation(Var::T, self.order)
    }
}

/// Terms of a derivation that are not allowed on a chart, keyed by
/// `(component, monomial)`.
pub fn irregular_terms(d: &Derivation) -> BTreeMap<(Var, Monomial), Rational> {
    let mut out = BTreeMap::new();
    for (var, c) in d.components() {
        for (m, q) in c.terms() {
            let neg = m.exponent(Var::V) < 0 || m.exponent(Var::T) < 0;
            let ey = m.exponent(Var::Y);
            let bad = neg
                || match var {
                    Var::V => ey > 0,
                    Var::Y => ey > 2,
                    Var::T => ey > 0 || m.exponent(Var::V) != 0,
                    _ => true,
                };
            if bad {
                out.insert((var, m.clone()), q.clone());
            }
        }
    }
    out
}

/// A global field at truncation order `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalField {
    pub field_w: ChartVectorField,
    pub field_w_prime: ChartVectorField,
    pub order: u32,
}

/// The eight series read off a global field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldParameters {
    pub series: BTreeMap<Direction, SparseExpr>,
    pub k: SparseExpr,
}

impl FieldParameters {
    pub fn get(&self, d: Direction) -> &SparseExpr {
        &self.series[&d]
    }

    /// The `t^m` coefficient of direction `d`.
    pub fn coefficient(&self, d: Direction, m: u32) -> Rational {
        self.get(d).coefficient_of(&Monomial::pow(Var::T, m as i32))
    }
}

impl GlobalField {
    pub fn from_w_field(field: Derivation, order: u32, tr: &Transition) -> Result<Self> {
        let field = field.with_truncation(Var::T, order);
        let pushed = pushforward(&field, tr)?;
        Ok(Self {
            field_w: ChartVectorField::from_derivation(&tr.source, field)?,
            field_w_prime: ChartVectorField::from_derivation(&tr.target, pushed)?,
            order,
        })
    }

    pub fn parameters(&self) -> FieldParameters {
        let g = self.field_w.coeff_v();
        let (alpha, beta, _) = self.field_w.fiber_shape();
        let mut series = BTreeMap::new();
        for d in Direction::ALL {
            let (slot, deg) = d.readout();
            let src = match slot {
                Slot::G => &g,
                Slot::Alpha => &alpha,
                _ => &beta,
            };
            series.insert(d, src.coefficient(Var::V, deg).with_truncation(Var::T, self.order));
        }
        FieldParameters { series, k: self.field_w.coeff_t() }
    }

    pub fn derivation(&self) -> &Derivation {
        self.field_w.derivation()
    }

    /// Restriction to the central fiber: `t = 0`, no `d/dt` part.
    pub fn at_t_zero(&self) -> Derivation {
        let mut d = self.derivation().map(|c| c.specialize(Var::T, &Rational::zero()));
        d.set(Var::T, SparseExpr::zero());
        d
    }
}

/// The solution space of the matching problem at `(N, D)`.
#[derive(Clone, Debug)]
pub struct GlobalFieldSpace {
    pub ansatz: GlobalFieldAnsatz,
    /// `basis[m * 7 + j]` is the field whose `t^m` coefficient of direction
    /// `j` is one and all other direction coefficients vanish.
    pub basis: Vec<GlobalField>,
    pub rank: usize,
    pub rank_by_columns: usize,
    pub equations: usize,
}

impl GlobalFieldSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn element(&self, d: Direction, m: u32) -> &GlobalField {
        &self.basis[m as usize * 7 + d.index()]
    }
}

/// Solves for all global fields with `t`-order `N` and `v`-degree at most
/// `D` on chart `W`, by requiring the pushforward of the generic field to be
/// regular on `W'`.
pub fn solve_global_fields(order: u32, degree: u32, tr: &Transition) -> Result<GlobalFieldSpace> {
    let ansatz = GlobalFieldAnsatz::new(order, degree)?;
    let unknowns = ansatz.unknowns();
    let mut columns = Vec::with_capacity(unknowns.len());
    for &u in &unknowns {
        columns.push(irregular_terms(&pushforward(&ansatz.unit_field(u), tr)?));
    }
    let (matrix, _) = matrix_from_columns(&columns);
    let kernel = linalg::kernel_basis(&matrix);
    let rank = unknowns.len() - kernel.len();
    let rank_by_columns = linalg::rank_by_columns(&matrix);

    let expected = 7 * (order as usize + 1);
    if kernel.len() != expected {
        return Err(Error::Precondition(format!(
            "matching system has a {}-dimensional solution space, expected {expected}",
            kernel.len()
        )));
    }
    // Change to the basis dual to the direction readouts.
    let mut readout = RationalMatrix::zeros(expected, expected);
    for m in 0..=order {
        for d in Direction::ALL {
            let (slot, deg) = d.readout();
            let target = Unknown::Coeff { slot, v_degree: deg as u32, t_order: m };
            let col = unknowns.iter().position(|&u| u == target).unwrap();
            for (i, k) in kernel.iter().enumerate() {
                readout.set(m as usize * 7 + d.index(), i, k[col].clone());
            }
        }
    }
    let inv = linalg::inverse(&readout)
        .ok_or_else(|| Error::Precondition("direction readouts do not determine global fields".into()))?;
    let mut basis = Vec::with_capacity(expected);
    for b in 0..expected {
        let mut values = vec![Rational::zero(); unknowns.len()];
        for (i, k) in kernel.iter().enumerate() {
            let w = inv.get(i, b);
            if w.is_zero() {
                continue;
            }
            for (v, x) in values.iter_mut().zip(k) {
                if !x.is_zero() {
                    *v += w * x;
                }
            }
        }
        basis.push(GlobalField::from_w_field(ansatz.field(&values), order, tr)?);
    }
    Ok(GlobalFieldSpace { ansatz, basis, rank, rank_by_columns, equations: matrix.rows() })
}

/// The closed-form parametrization: the global field with the given seven
/// series (each truncated at `order`).
pub fn field_from_series(series: &BTreeMap<Direction, SparseExpr>, order: u32) -> Derivation {
    let get = |d: Direction| series.get(&d).cloned().unwrap_or_default().with_truncation(Var::T, order);
    let (a_up, b_up, c_up) = (get(Direction::A), get(Direction::B), get(Direction::C));
    let (a, b, c, e) = (get(Direction::LowerA), get(Direction::LowerB), get(Direction::LowerC), get(Direction::E));
    let t = SparseExpr::var(Var::T);
    let v = SparseExpr::var(Var::V);
    let v2 = &v * &v;
    let g = &(&(&a_up * &v2) + &(&b_up * &v)) + &c_up;
    let alpha = &(&(&a * &v2) + &(&b * &v)) + &c;
    let beta = &(&SparseExpr::from_int(-2) * &(&(&(&a * &t) + &a_up) * &v)) + &e;
    let gamma = &(&(&t * &t) * &a) + &(&t * &a_up);
    let k = &(&(&b * &(&t * &t)) + &(&e * &t)) + &(&b_up * &t);
    let y = SparseExpr::var(Var::Y);
    let cy = &(&(&alpha * &(&y * &y)) + &(&beta * &y)) + &gamma;
    Derivation::from_components([(Var::V, g), (Var::Y, cy), (Var::T, k)]).with_truncation(Var::T, order)
}

/// Checks the closed-form shape of a global field and the four identities
/// expressing its `W'` coefficients through the `W` ones.
pub fn verify_shape_identities(field: &GlobalField, tr: &Transition) -> Result<Vec<IdentityCheck>> {
    let n = field.order;
    let trunc = |e: SparseExpr| e.with_truncation(Var::T, n);
    let p = field.parameters();
    let t = SparseExpr::var(Var::T);
    let v = SparseExpr::var(Var::V);
    let v2 = &v * &v;
    let g1 = field.field_w.coeff_v();
    let (a1, b1, c1) = field.field_w.fiber_shape();
    let k1 = field.field_w.coeff_t();
    let get = |d| p.get(d).clone();
    let (a_up, b_up, c_up) = (get(Direction::A), get(Direction::B), get(Direction::C));
    let (a, b, c, e) = (get(Direction::LowerA), get(Direction::LowerB), get(Direction::LowerC), get(Direction::E));

    let mut checks = vec![
        IdentityCheck::new("g = A v^2 + B v + C", trunc(&g1 - &(&(&(&a_up * &v2) + &(&b_up * &v)) + &c_up))),
        IdentityCheck::new("alpha = a v^2 + b v + c", trunc(&a1 - &(&(&(&a * &v2) + &(&b * &v)) + &c))),
        IdentityCheck::new(
            "beta = -2 (a t + A) v + e",
            trunc(&(&b1 + &(&SparseExpr::from_int(2) * &(&(&(&a * &t) + &a_up) * &v))) - &e),
        ),
        IdentityCheck::new("gamma = t^2 a + t A", trunc(&c1 - &(&(&(&t * &t) * &a) + &(&t * &a_up)))),
        IdentityCheck::new(
            "b t^2 + e t + B t - k = 0",
            trunc(&(&(&(&b * &(&t * &t)) + &(&e * &t)) + &(&b_up * &t)) - &k1),
        ),
    ];

    // W' coefficients from W ones, with v -> 1/v' (symbols reused).
    let inv: BTreeMap<Var, SparseExpr> = [(Var::V, tr.inverse_rules[&Var::V].clone())].into();
    let at_inv = |x: &SparseExpr| x.substitute(&inv);
    let (g1i, a1i, b1i, c1i) = (at_inv(&g1)?, at_inv(&a1)?, at_inv(&b1)?, at_inv(&c1)?);
    let vi = SparseExpr::monomial(1, &[(Var::V, -1)]);
    let g2 = field.field_w_prime.coeff_v();
    let (a2, b2, c2) = field.field_w_prime.fiber_shape();
    let two = SparseExpr::from_int(2);
    checks.push(IdentityCheck::new("g2 = -v'^2 g1(1/v')", trunc(&g2 + &(&v2 * &g1i))));
    checks.push(IdentityCheck::new("alpha2 = v'^2 alpha1(1/v')", trunc(&a2 - &(&v2 * &a1i))));
    let beta2 = &(&(&two * &(&t * &v)) * &a1i) + &(&b1i + &(&two * &(&v * &g1i)));
    checks.push(IdentityCheck::new("beta2 = 2 t v' alpha1(1/v') + beta1(1/v') + 2 v' g1(1/v')", trunc(&b2 - &beta2)));
    let gamma2 =
        &(&(&(&(&t * &t) * &a1i) + &(&(&t * &vi) * &b1i)) + &(&(&vi * &vi) * &c1i)) + &(&(&t * &g1i) - &(&k1 * &vi));
    checks.push(IdentityCheck::new(
        "gamma2 = t^2 alpha1(1/v') + (t/v') beta1(1/v') + (1/v'^2) gamma1(1/v') + t g1(1/v') - k1/v'",
        trunc(&c2 - &gamma2),
    ));
    if !field.field_w_prime.coeff_t().is_zero() || !k1.is_zero() {
        checks.push(IdentityCheck::new("k2 = k1", trunc(&field.field_w_prime.coeff_t() - &k1)));
    }
    Ok(checks)
}

/// Dimension of the fields on the single fiber over `t = tau`.
pub fn fiber_field_dimension(tau: &Rational, degree: u32, tr: &Transition) -> Result<usize> {
    if tau.is_zero() {
        return Err(Error::Precondition("fiber dimension needs tau != 0; use the t = 0 solver".into()));
    }
    fiber_dimension_at(tau, degree, tr)
}

pub(crate) fn fiber_dimension_at(tau: &Rational, degree: u32, tr: &Transition) -> Result<usize> {
    if degree < 2 {
        return Err(Error::Precondition(format!("v-degree bound must be at least 2, got {degree}")));
    }
    let fiber = tr.specialize(Var::T, &SparseExpr::constant(tau.clone()))?;
    let mut columns = Vec::new();
    for slot in Slot::ALL {
        for d in 0..=degree as i32 {
            let unit = slot.unit(d, 0);
            columns.push(irregular_terms(&pushforward(&unit, &fiber)?));
        }
    }
    let (m, _) = matrix_from_columns(&columns);
    Ok(linalg::kernel_basis(&m).len())
}

/// `t`-valuation checks that every basis field's `k` vanishes at `t = 0`.
pub fn k_vanishes_at_zero(space: &GlobalFieldSpace) -> bool {
    space.basis.iter().all(|f| f.parameters().k.coefficient_of(&Monomial::one()).is_zero())
}

/// Rank of the restriction of the basis to `t = 0`, as coefficient vectors.
pub fn restriction_rank(space: &GlobalFieldSpace) -> usize {
    let cols: Vec<BTreeMap<(Var, Monomial), Rational>> = space
        .basis
        .iter()
        .map(|f| {
            f.at_t_zero()
                .components()
                .flat_map(|(v, c)| c.terms().map(move |(m, q)| ((v, m.clone()), q.clone())))
                .collect()
        })
        .collect();
    linalg::rank(&matrix_from_columns(&cols).0)
}
