use std::collections::BTreeMap;

use rand::Rng;

use super::{ChartVectorField, Derivation, IdentityCheck};
use crate::error::{Error, Result};
use crate::sampling;
use crate::symbolic::{SparseExpr, Var};

/// A coordinate change between two charts.
///
/// `rules[x']` expresses the target coordinate `x'` in source coordinates;
/// `inverse_rules[x]` expresses the source coordinate `x` in target
/// coordinates. Both charts use the same symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub rules: BTreeMap<Var, SparseExpr>,
    pub inverse_rules: BTreeMap<Var, SparseExpr>,
}

impl Transition {
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        rules: BTreeMap<Var, SparseExpr>,
        inverse_rules: BTreeMap<Var, SparseExpr>,
    ) -> Self {
        Self { source: source.into(), target: target.into(), rules, inverse_rules }
    }

    pub fn identity(chart: &str, coords: &[Var]) -> Self {
        let rules: BTreeMap<Var, SparseExpr> = coords.iter().map(|&v| (v, SparseExpr::var(v))).collect();
        Self::new(chart, chart, rules.clone(), rules)
    }

    pub fn inverse(&self) -> Self {
        Self::new(&*self.target, &*self.source, self.inverse_rules.clone(), self.rules.clone())
    }

    /// The same gluing with `x` set to the constant `value` in every rule;
    /// the rule for `x` itself is dropped.
    pub fn specialize(&self, x: Var, value: &SparseExpr) -> Result<Self> {
        let sub: BTreeMap<Var, SparseExpr> = [(x, value.clone())].into();
        let fix = |rules: &BTreeMap<Var, SparseExpr>| -> Result<BTreeMap<Var, SparseExpr>> {
            rules.iter().filter(|(v, _)| **v != x).map(|(v, r)| Ok((*v, r.substitute(&sub)?))).collect()
        };
        Ok(Self::new(&*self.source, &*self.target, fix(&self.rules)?, fix(&self.inverse_rules)?))
    }

    /// The central fiber `t = 0` of the gluing.
    pub fn at_t_zero(&self) -> Result<Self> {
        self.specialize(Var::T, &SparseExpr::zero())
    }

    /// Replaces the parameter `t` by a dual-number symbol `eps` with
    /// `eps^2 = 0`: the first-order neighbourhood of the central fiber.
    pub fn first_order_in(&self, eps: Var) -> Result<Self> {
        let e = SparseExpr::var(eps).with_truncation(eps, 1);
        let fix = |rules: &BTreeMap<Var, SparseExpr>| -> Result<BTreeMap<Var, SparseExpr>> {
            let sub: BTreeMap<Var, SparseExpr> = [(Var::T, e.clone())].into();
            let mut out = BTreeMap::new();
            for (v, r) in rules {
                let key = if *v == Var::T { eps } else { *v };
                out.insert(key, r.substitute(&sub)?.with_truncation(eps, 1));
            }
            Ok(out)
        };
        Ok(Self::new(&*self.source, &*self.target, fix(&self.rules)?, fix(&self.inverse_rules)?))
    }

    pub fn target_coords(&self) -> impl Iterator<Item = Var> + '_ {
        self.rules.keys().copied()
    }
}

/// Pushes a derivation on the source chart forward to the target chart:
/// the `x'` component is `d(rules[x'])` rewritten in target coordinates.
pub fn pushforward(d: &Derivation, tr: &Transition) -> Result<Derivation> {
    let mut out = Derivation::zero();
    for (&x, rule) in &tr.rules {
        let c = d.apply(rule).substitute(&tr.inverse_rules)?;
        out.set(x, c);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub checks: Vec<IdentityCheck>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn first_failure(&self) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| !c.passed())
    }
}

/// Checks that the rules and inverse rules are mutually inverse, and that
/// pushing random regular fields forward and back returns them unchanged.
///
/// Residuals of the coordinate round trips are reported as functions on the
/// source chart.
pub fn verify_transition_consistency(tr: &Transition, samples: usize, seed: u64) -> Result<ConsistencyReport> {
    let mut checks = Vec::new();
    for (&x, rule) in &tr.rules {
        let back = rule.substitute(&tr.inverse_rules)?;
        let residual = (&back - &SparseExpr::var(x)).substitute(&tr.rules)?;
        checks.push(IdentityCheck::new(format!("forward({x}) after inverse"), residual));
    }
    for (&x, rule) in &tr.inverse_rules {
        let back = rule.substitute(&tr.rules)?;
        let residual = &back - &SparseExpr::var(x);
        checks.push(IdentityCheck::new(format!("inverse({x}) after forward"), residual));
    }

    let mut rng = sampling::rng(seed);
    let inv = tr.inverse();
    let has_t = tr.rules.contains_key(&Var::T);
    for k in 0..samples {
        let order = if has_t { Some(rng.gen_range(1..=3)) } else { None };
        let f = sampling::random_chart_field(&mut rng, order, has_t);
        let round = pushforward(&pushforward(&f, tr)?, &inv)?;
        for v in tr.inverse_rules.keys() {
            let residual = &round.component(*v) - &f.component(*v);
            checks.push(IdentityCheck::new(format!("field #{k} round trip, d/d{v}"), residual));
        }
    }
    Ok(ConsistencyReport { checks })
}

/// [`pushforward`] for a chart field, checking that it lives on the source.
pub fn pushforward_field(f: &ChartVectorField, tr: &Transition) -> Result<Derivation> {
    if f.chart() != tr.source {
        return Err(Error::ChartMismatch(f.chart().to_string(), tr.source.clone()));
    }
    pushforward(f.derivation(), tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::GluedFamily;

    fn p(s: &str) -> SparseExpr {
        s.parse().unwrap()
    }

    fn w() -> Transition {
        GluedFamily::w_family().transitions[0].clone()
    }

    #[test]
    fn pushforward_of_coordinate_fields() {
        let tr = w();
        let dv = pushforward(&Derivation::partial(Var::V), &tr).unwrap();
        assert_eq!(dv.component(Var::V), p("-1 * v^2"));
        assert_eq!(dv.component(Var::Y), p("2 v y + t"));
        assert!(dv.component(Var::T).is_zero());

        let dy = pushforward(&Derivation::partial(Var::Y), &tr).unwrap();
        assert_eq!(dy, Derivation::from_components([(Var::Y, p("v^-2"))]));

        let dt = pushforward(&Derivation::partial(Var::T), &tr).unwrap();
        assert_eq!(dt, Derivation::from_components([(Var::T, p("1")), (Var::Y, p("-1 * v^-1"))]));
    }

    #[test]
    fn identity_pushforward_is_identity() {
        let id = Transition::identity("W", &crate::charts::CHART_COORDS);
        let f = Derivation::from_components([(Var::V, p("v^2 + t")), (Var::Y, p("y^2 v"))]);
        assert_eq!(pushforward(&f, &id).unwrap(), f);
        assert!(verify_transition_consistency(&id, 5, 1).unwrap().passed());
    }

    #[test]
    fn stock_transition_is_consistent() {
        let r = verify_transition_consistency(&w(), 10, 7).unwrap();
        assert!(r.passed(), "{:?}", r.first_failure());
    }

    #[test]
    fn corrupted_rule_reports_residual() {
        let mut tr = w();
        tr.rules.insert(Var::Y, p("y v^2 + t v"));
        let r = verify_transition_consistency(&tr, 3, 7).unwrap();
        let bad = r.first_failure().unwrap();
        assert_eq!(bad.residual, p("2 t v"));
    }

    #[test]
    fn central_fiber_and_first_order_gluings() {
        let t0 = w().at_t_zero().unwrap();
        assert_eq!(t0.rules[&Var::Y], p("y v^2"));
        assert!(!t0.rules.contains_key(&Var::T));
        let eps = w().first_order_in(Var::Eps).unwrap();
        assert_eq!(eps.rules[&Var::Y], p("y v^2 - eps v"));
        assert_eq!(eps.rules[&Var::Eps], p("eps"));
    }
}
