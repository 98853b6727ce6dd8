use std::collections::BTreeMap;

use super::manifest::ProjectiveMap;
use super::{GluedFamily, IdentityCheck, Transition};
use crate::error::{Error, Result};
use crate::symbolic::{SparseExpr, Var};

#[derive(Clone, Debug)]
pub struct SurfaceModelReport {
    pub checks: Vec<IdentityCheck>,
    /// Common factor relating the two trivializations on the overlap.
    pub trivialization_ratio: Option<SparseExpr>,
}

impl SurfaceModelReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn first_failure(&self) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| !c.passed())
    }
}

/// `r` with `a[i] = r * b[i]` for all `i`, when `b` has a single-term entry
/// to divide by. Negative powers of `t` and `v` are allowed in `r`.
pub fn projective_ratio(a: &[SparseExpr], b: &[SparseExpr]) -> Option<SparseExpr> {
    if a.len() != b.len() {
        return None;
    }
    let i = b.iter().position(|e| e.len() == 1)?;
    let (m, c) = b[i].terms().next()?;
    let r = a[i].clone().with_laurent(Var::T).with_laurent(Var::V).divide_by_term(c, m)?;
    if r.is_zero() {
        return None;
    }
    a.iter().zip(b).all(|(x, y)| *x == &r * y).then_some(r)
}

fn pull_back(map: &ProjectiveMap, rules: &BTreeMap<Var, SparseExpr>) -> Result<ProjectiveMap> {
    map.iter().map(|g| g.iter().map(|e| e.substitute(rules)).collect()).collect()
}

/// Cross products `a_i b_j - a_j b_i` (plain difference for single entries).
fn projective_agreement(name: &str, a: &ProjectiveMap, b: &ProjectiveMap, out: &mut Vec<IdentityCheck>) {
    for (k, (ga, gb)) in a.iter().zip(b).enumerate() {
        if ga.len() == 1 {
            out.push(IdentityCheck::new(format!("{name}, factor {k}"), &ga[0] - &gb[0]));
            continue;
        }
        for i in 0..ga.len() {
            for j in i + 1..ga.len() {
                let r = &(&ga[i] * &gb[j]) - &(&ga[j] * &gb[i]);
                out.push(IdentityCheck::new(format!("{name}, factor {k}, minor ({i},{j})"), r));
            }
        }
    }
}

fn ambient_rules(ambient: &[Vec<Var>], map: &ProjectiveMap) -> BTreeMap<Var, SparseExpr> {
    ambient.iter().flatten().zip(map.iter().flatten()).map(|(v, e)| (*v, e.clone())).collect()
}

/// Checks the embedded models of a family: every chart embedding lands in
/// its hypersurface, embeddings agree on overlaps, the trivializations agree
/// up to a common factor, and the `t = 0` slice of a `t`-dependent
/// hypersurface is the `t`-free one.
pub fn verify_surface_models(family: &GluedFamily) -> Result<SurfaceModelReport> {
    let model = family.model.as_ref().ok_or_else(|| Error::Manifest("no embedded model declared".into()))?;
    let tr = family.primary_transition()?;
    let tr0: Transition = tr.at_t_zero()?;
    let mut checks = Vec::new();

    for h in &model.hypersurfaces {
        for (chart, map) in &h.embeddings {
            let residual = h.equation.substitute(&ambient_rules(&model.ambient, map))?;
            checks.push(IdentityCheck::new(format!("{} contains the image of {chart}", h.name), residual));
        }
        if let (Some(src), Some(dst)) = (h.embeddings.get(&tr.source), h.embeddings.get(&tr.target)) {
            let full = src.len() == model.ambient.len();
            let rules = if full { &tr.rules } else { &tr0.rules };
            let pulled = pull_back(dst, rules)?;
            projective_agreement(&format!("{} embeddings agree on the overlap", h.name), src, &pulled, &mut checks);
        }
    }

    let mut trivialization_ratio = None;
    if let (Some(src), Some(dst)) = (model.trivializations.get(&tr.source), model.trivializations.get(&tr.target)) {
        let pulled = pull_back(dst, &tr.rules)?;
        projective_agreement("trivializations agree on the overlap", src, &pulled, &mut checks);
        if let (Some(a), Some(b)) = (pulled.last(), src.last()) {
            trivialization_ratio = projective_ratio(a, b);
        }
        let missing = match &trivialization_ratio {
            Some(_) => SparseExpr::zero(),
            None => SparseExpr::one(),
        };
        checks.push(IdentityCheck::new("trivialization fiber factor differs by a monomial", missing));
    }

    let t0: BTreeMap<Var, SparseExpr> = [(Var::T, SparseExpr::zero())].into();
    for h in model.hypersurfaces.iter().filter(|h| h.equation.vars().contains(&Var::T)) {
        for g in model.hypersurfaces.iter().filter(|g| !g.equation.vars().contains(&Var::T)) {
            let residual = &h.equation.substitute(&t0)? - &g.equation;
            checks.push(IdentityCheck::new(format!("{} at t = 0 is {}", h.name, g.name), residual));
        }
    }

    Ok(SurfaceModelReport { checks, trivialization_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> SparseExpr {
        s.parse().unwrap()
    }

    #[test]
    fn stock_models_pass() {
        let r = verify_surface_models(&GluedFamily::w_family()).unwrap();
        assert!(r.passed(), "{:?}", r.first_failure());
        assert_eq!(r.trivialization_ratio, Some(p("v")));
        assert!(r.checks.iter().any(|c| c.name == "X at t = 0 is F2"));
    }

    #[test]
    fn chart_one_lands_in_x() {
        let fam = GluedFamily::w_family();
        let model = fam.model.as_ref().unwrap();
        let h = model.hypersurface("X").unwrap();
        let rules = ambient_rules(&model.ambient, &h.embeddings["W"]);
        assert!(h.equation.substitute(&rules).unwrap().is_zero());
    }

    #[test]
    fn broken_embedding_is_caught() {
        let text = include_str!("../../fixtures/w_family.manifest")
            .replace("embedding X W' = 1, y v^2 + t v, y", "embedding X W' = 1, y v^2 - t v, y");
        let r = verify_surface_models(&GluedFamily::from_manifest(&text).unwrap()).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(projective_ratio(&[p("t y v"), p("y v^2 - t v")], &[p("t y"), p("y v - t")]), Some(p("v")));
        assert_eq!(projective_ratio(&[p("1"), p("2")], &[p("1"), p("3")]), None);
    }
}
