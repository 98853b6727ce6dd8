//! Charts, transitions and vector fields on them.
//!
//! Both charts of a two-chart family use the same coordinate symbols
//! `t, v, y`; which chart an expression lives on is tracked by the caller.

mod manifest;
mod models;
mod transition;

pub use manifest::{EmbeddedModel, GluedFamily, Hypersurface, ProjectiveMap};
pub use models::{projective_ratio, verify_surface_models, SurfaceModelReport};
pub use transition::{pushforward, pushforward_field, verify_transition_consistency, ConsistencyReport, Transition};

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Rational, SparseExpr, Var};

/// The coordinates every chart carries, in order.
pub const CHART_COORDS: [Var; 3] = [Var::T, Var::V, Var::Y];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
}

impl Chart {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into() }
    }

    pub fn coords(&self) -> &'static [Var] {
        &CHART_COORDS
    }
}

/// A named exact identity; it holds iff the residual is zero.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    #[serde(serialize_with = "crate::report::ser_expr")]
    pub residual: SparseExpr,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, residual: SparseExpr) -> Self {
        Self { name: name.into(), residual }
    }

    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

/// A derivation `sum_x c_x d/dx` with no shape constraints; components may be
/// Laurent and may involve auxiliary symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Derivation {
    comps: BTreeMap<Var, SparseExpr>,
}

impl Derivation {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_components<I: IntoIterator<Item = (Var, SparseExpr)>>(comps: I) -> Self {
        let mut d = Self::zero();
        for (v, c) in comps {
            d.set(v, c);
        }
        d
    }

    /// `d/dx`.
    pub fn partial(x: Var) -> Self {
        Self::from_components([(x, SparseExpr::one())])
    }

    pub fn set(&mut self, v: Var, c: SparseExpr) {
        if c.is_zero() {
            self.comps.remove(&v);
        } else {
            self.comps.insert(v, c);
        }
    }

    pub fn component(&self, v: Var) -> SparseExpr {
        self.comps.get(&v).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (Var, &SparseExpr)> {
        self.comps.iter().map(|(v, c)| (*v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Applies the derivation to a function.
    ///
    /// Differentiating in a truncated variable `x` normally loses one order,
    /// but when the multiplying component vanishes at `x = 0` the product is
    /// still known to the full order, so that case keeps the truncation.
    pub fn apply(&self, f: &SparseExpr) -> SparseExpr {
        let mut acc = SparseExpr::zero();
        for (&x, c) in &self.comps {
            let df = if f.truncation(x).is_some() && c.valuation(x).is_some_and(|e| e >= 1) {
                f.partial_derivative_keep_truncation(x)
            } else {
                f.partial_derivative(x)
            };
            if !df.is_zero() {
                acc = &acc + &(c * &df);
            }
        }
        acc
    }

    /// `[self, other]`, the commutator of derivations.
    pub fn bracket(&self, other: &Derivation) -> Derivation {
        let vars: Vec<Var> = self.comps.keys().chain(other.comps.keys()).copied().collect();
        let mut out = Derivation::zero();
        for v in vars {
            if out.comps.contains_key(&v) {
                continue;
            }
            let c = &self.apply(&other.component(v)) - &other.apply(&self.component(v));
            out.set(v, c);
        }
        out
    }

    pub fn scale(&self, q: &Rational) -> Derivation {
        if q.is_zero() {
            return Derivation::zero();
        }
        Self::from_components(self.comps.iter().map(|(v, c)| (*v, c.scale(q))))
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        let mut out = self.clone();
        for (v, c) in &other.comps {
            let s = &out.component(*v) + c;
            out.set(*v, s);
        }
        out
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        self.add(&other.scale(&-Rational::from_integer(1.into())))
    }

    /// Applies `f` to every component.
    pub fn map<F: FnMut(&SparseExpr) -> SparseExpr>(&self, mut f: F) -> Derivation {
        Self::from_components(self.comps.iter().map(|(v, c)| (*v, f(c))))
    }

    pub fn try_map<F: FnMut(&SparseExpr) -> Result<SparseExpr>>(&self, mut f: F) -> Result<Derivation> {
        let mut out = Derivation::zero();
        for (v, c) in &self.comps {
            out.set(*v, f(c)?);
        }
        Ok(out)
    }

    pub fn with_truncation(&self, x: Var, n: u32) -> Derivation {
        self.map(|c| c.clone().with_truncation(x, n))
    }

    /// Minimal `t`-valuation over the components; `None` for zero.
    pub fn t_valuation(&self) -> Result<Option<u32>> {
        let mut best = None;
        for c in self.comps.values() {
            if let Some(e) = c.t_valuation()? {
                best = Some(best.map_or(e, |b: u32| b.min(e)));
            }
        }
        Ok(best)
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.comps.iter().map(|(v, c)| format!("({}) d/d{}", c.canonical_string(), v)).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Why a derivation fails to be a regular field on a chart, if it does.
pub fn regularity_violation(d: &Derivation) -> Option<String> {
    for (v, c) in d.components() {
        if !CHART_COORDS.contains(&v) {
            return Some(format!("component along non-coordinate {v}"));
        }
        for (m, _) in c.terms() {
            if m.exponent(Var::V) < 0 || m.exponent(Var::T) < 0 {
                return Some(format!("negative exponent in d/d{v} coefficient `{m}`"));
            }
        }
    }
    let cv = d.component(Var::V);
    if cv.degree(Var::Y).is_some_and(|e| e > 0) {
        return Some("d/dv coefficient depends on y".into());
    }
    let cy = d.component(Var::Y);
    if cy.degree(Var::Y).is_some_and(|e| e > 2) {
        return Some("d/dy coefficient has degree > 2 in y".into());
    }
    let ct = d.component(Var::T);
    if ct.degree(Var::Y).is_some_and(|e| e > 0) || ct.vars().contains(&Var::V) {
        return Some("d/dt coefficient is not a function of t".into());
    }
    None
}

/// True iff the derivation has the shape of a regular vector field on a
/// chart `C x C x P^1`. Auxiliary symbols count as constants.
pub fn regularity_check(d: &Derivation, _chart: &Chart) -> bool {
    regularity_violation(d).is_none()
}

/// A regular vector field on a named chart:
/// `g d/dv + (alpha y^2 + beta y + gamma) d/dy + k d/dt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartVectorField {
    chart: String,
    field: Derivation,
}

impl ChartVectorField {
    pub fn new(chart: &str, coeff_v: SparseExpr, coeff_y: SparseExpr, coeff_t: SparseExpr) -> Result<Self> {
        Self::from_derivation(
            chart,
            Derivation::from_components([(Var::V, coeff_v), (Var::Y, coeff_y), (Var::T, coeff_t)]),
        )
    }

    pub fn from_derivation(chart: &str, field: Derivation) -> Result<Self> {
        if let Some(reason) = regularity_violation(&field) {
            return Err(Error::NotChartRegular { chart: chart.to_string(), reason });
        }
        Ok(Self { chart: chart.to_string(), field })
    }

    pub fn chart(&self) -> &str {
        &self.chart
    }

    pub fn derivation(&self) -> &Derivation {
        &self.field
    }

    pub fn coeff_v(&self) -> SparseExpr {
        self.field.component(Var::V)
    }

    pub fn coeff_y(&self) -> SparseExpr {
        self.field.component(Var::Y)
    }

    pub fn coeff_t(&self) -> SparseExpr {
        self.field.component(Var::T)
    }

    /// `(alpha, beta, gamma)` with `coeff_y = alpha y^2 + beta y + gamma`.
    pub fn fiber_shape(&self) -> (SparseExpr, SparseExpr, SparseExpr) {
        let cy = self.coeff_y();
        (cy.coefficient(Var::Y, 2), cy.coefficient(Var::Y, 1), cy.coefficient(Var::Y, 0))
    }

    pub fn bracket(&self, other: &ChartVectorField) -> Result<ChartVectorField> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch(self.chart.clone(), other.chart.clone()));
        }
        Self::from_derivation(&self.chart, self.field.bracket(&other.field))
    }
}

impl fmt::Display for ChartVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.chart, self.field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> SparseExpr {
        s.parse().unwrap()
    }

    fn dy(c: &str) -> Derivation {
        Derivation::from_components([(Var::Y, p(c))])
    }

    #[test]
    fn regularity_examples() {
        let w = Chart::new("W");
        assert!(regularity_check(&dy("-1 * v^2 y^2"), &w));
        assert!(!regularity_check(&dy("v^-1"), &w));
        assert!(!regularity_check(&Derivation::from_components([(Var::V, p("y"))]), &w));
        assert!(!regularity_check(&dy("y^3"), &w));
        assert!(!regularity_check(&Derivation::from_components([(Var::T, p("v"))]), &w));
    }

    #[test]
    fn bracket_examples() {
        let dv = Derivation::partial(Var::V);
        let e4 = dy("-1 * v y^2");
        assert_eq!(dv.bracket(&e4), dy("-1 * y^2"));
        assert!(e4.bracket(&e4).is_zero());

        let e1 = dy("-1 * v^2 y^2");
        let e6 = Derivation::from_components([(Var::V, p("v"))]);
        assert_eq!(e1.bracket(&e6), dy("2 v^2 y^2"));
    }

    #[test]
    fn chart_field_bracket_needs_same_chart() {
        let a = ChartVectorField::new("W", p("1"), SparseExpr::zero(), SparseExpr::zero()).unwrap();
        let b = ChartVectorField::new("W'", p("1"), SparseExpr::zero(), SparseExpr::zero()).unwrap();
        assert!(matches!(a.bracket(&b), Err(Error::ChartMismatch(..))));
        assert!(a.bracket(&a).unwrap().derivation().is_zero());
    }

    #[test]
    fn t_derivative_keeps_order_when_coefficient_vanishes_at_zero() {
        let f = p("t + t^2 + t^3").with_truncation(Var::T, 3);
        let tdt = Derivation::from_components([(Var::T, p("t").with_truncation(Var::T, 3))]);
        assert_eq!(tdt.apply(&f), p("t + 2 t^2 + 3 t^3"));
        assert_eq!(tdt.apply(&f).t_truncation(), Some(3));
        let dt = Derivation::partial(Var::T);
        assert_eq!(dt.apply(&f).t_truncation(), Some(2));
    }

    #[test]
    fn invalid_shape_is_rejected() {
        let err = ChartVectorField::new("W", p("y"), SparseExpr::zero(), SparseExpr::zero()).unwrap_err();
        assert!(matches!(err, Error::NotChartRegular { .. }));
    }
}
