use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;

use hirzebruch::charts::{pushforward, regularity_violation, Derivation, GluedFamily, Transition};
use hirzebruch::global_fields::solve_global_fields;
use hirzebruch::groebner::{buchberger, certify_empty, normal_form, MonomialOrder, ParamPolynomial};
use hirzebruch::sampling::{self, random_expr, random_poly, random_rational};
use hirzebruch::symbolic::{SparseExpr, Var};

const CASES: u32 = 200;

fn runner(tag: u8) -> TestRunner {
    let mut seed = [7u8; 32];
    seed[0] = tag;
    TestRunner::new_with_rng(
        Config { cases: CASES, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &seed),
    )
}

fn check(tag: u8, f: impl Fn(&mut sampling::SampleRng) -> Result<(), TestCaseError>) {
    runner(tag).run(&any::<u64>(), |s| f(&mut sampling::rng(s))).unwrap();
}

fn tr() -> Transition {
    GluedFamily::w_family().transitions[0].clone()
}

fn chart_expr(r: &mut sampling::SampleRng) -> SparseExpr {
    let v = random_expr(r, &[Var::V], -3, 3, 3);
    &(&v * &random_poly(r, &[Var::T, Var::Y], 2, 3)) + &random_poly(r, &[Var::Y, Var::T], 3, 2)
}

fn param_poly(r: &mut sampling::SampleRng) -> ParamPolynomial {
    param_poly_in(r, &[Var::Param(1), Var::Param(2), Var::Param(3)])
}

fn param_poly_in(r: &mut sampling::SampleRng, vars: &[Var]) -> ParamPolynomial {
    ParamPolynomial::new(random_poly(r, vars, 2, 3)).unwrap()
}

#[test]
fn print_parse_round_trip() {
    check(1, |r| {
        let e = chart_expr(r);
        let back: SparseExpr = e.canonical_string().parse().unwrap();
        prop_assert_eq!(back, e);
        Ok(())
    });
}

#[test]
fn transition_round_trip() {
    let tr = tr();
    check(2, |r| {
        let f = chart_expr(r);
        let there = f.substitute(&tr.rules).unwrap();
        prop_assert_eq!(there.substitute(&tr.inverse_rules).unwrap(), f);
        Ok(())
    });
}

#[test]
fn derivative_commutes_with_specialization() {
    check(3, |r| {
        let f = chart_expr(r);
        let q = random_rational(r, 4);
        let lhs = f.partial_derivative(Var::V).specialize(Var::T, &q);
        prop_assert_eq!(lhs, f.specialize(Var::T, &q).partial_derivative(Var::V));
        Ok(())
    });
}

#[test]
fn normal_form_is_idempotent_and_kills_the_ideal() {
    check(4, |r| {
        let gens: Vec<ParamPolynomial> =
            (0..r.gen_range(1..=3)).map(|_| param_poly(r)).filter(|p| !p.is_zero()).collect();
        prop_assume!(!gens.is_empty());
        let gb = buchberger(&gens, MonomialOrder::GrevLex);
        let f = param_poly(r);
        let nf = normal_form(&f, &gb);
        prop_assert_eq!(normal_form(&nf, &gb), nf.clone());
        // f - nf lies in the ideal
        let diff = ParamPolynomial::new(f.expr() - nf.expr()).unwrap();
        prop_assert!(normal_form(&diff, &gb).is_zero());
        let mut member = SparseExpr::zero();
        for g in &gens {
            member = &member + &(&random_poly(r, &[Var::Param(1), Var::Param(2)], 1, 2) * g.expr());
        }
        prop_assert!(normal_form(&ParamPolynomial::new(member).unwrap(), &gb).is_zero());
        Ok(())
    });
}

#[test]
fn emptiness_does_not_depend_on_the_order() {
    // lex bases of three random quadrics in three unknowns are too slow here
    let vars = [Var::Param(1), Var::Param(2)];
    check(5, |r| {
        let mut gens: Vec<ParamPolynomial> = (0..r.gen_range(1..=3)).map(|_| param_poly_in(r, &vars)).collect();
        if r.gen_bool(0.3) {
            // force an inconsistent system
            let g = param_poly_in(r, &vars);
            gens.push(g.clone());
            gens.push(ParamPolynomial::new(g.expr() + &SparseExpr::one()).unwrap());
        }
        let a = certify_empty(&gens, MonomialOrder::GrevLex);
        let b = certify_empty(&gens, MonomialOrder::Lex);
        prop_assert_eq!(a.empty, b.empty);
        prop_assert_eq!(a.basis.is_unit(), a.empty);
        Ok(())
    });
}

#[test]
fn global_fields_stay_regular() {
    let tr = tr();
    let space = solve_global_fields(1, 5, &tr).unwrap();
    check(6, |r| {
        let mut field = Derivation::zero();
        for f in &space.basis {
            field = field.add(&f.derivation().scale(&random_rational(r, 3)));
        }
        prop_assert!(regularity_violation(&field).is_none());
        let other = pushforward(&field, &tr).unwrap();
        prop_assert!(regularity_violation(&other).is_none());
        // the bracket of two global fields is global
        let g = space.basis[r.gen_range(0..space.basis.len())].derivation().clone();
        let b = field.bracket(&g);
        prop_assert!(regularity_violation(&b).is_none());
        prop_assert!(regularity_violation(&pushforward(&b, &tr).unwrap()).is_none());
        Ok(())
    });
}
