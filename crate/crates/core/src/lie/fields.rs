use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use super::{format_combination, lie_algebra_basis, Generator, StructureConstants};
use crate::charts::{pushforward, ChartVectorField, Derivation, Transition};
use crate::error::{Error, Result};
use crate::global_fields::{Direction, GlobalFieldSpace};
use crate::linalg::{self, RationalMatrix};
use crate::sampling;
use crate::symbolic::{int, Monomial, Rational, SparseExpr, Var};

/// The fields `E'_1, ..., E'_7` on both charts of the central fiber.
#[derive(Clone, Debug)]
pub struct FundamentalFields {
    pub chart1: Vec<ChartVectorField>,
    pub chart2: Vec<ChartVectorField>,
    /// Whether the fields were negated to match the structure constants.
    pub sign_flipped: bool,
}

impl FundamentalFields {
    pub fn get(&self, i: usize) -> &ChartVectorField {
        &self.chart1[i - 1]
    }

    pub fn negated(&self) -> Self {
        let neg = |v: &[ChartVectorField]| -> Vec<ChartVectorField> {
            v.iter()
                .map(|f| ChartVectorField::from_derivation(f.chart(), f.derivation().scale(&int(-1))).unwrap())
                .collect()
        };
        Self { chart1: neg(&self.chart1), chart2: neg(&self.chart2), sign_flipped: !self.sign_flipped }
    }
}

fn eps_const(x: i64) -> SparseExpr {
    (&SparseExpr::from_int(x) * &SparseExpr::var(Var::Eps)).with_truncation(Var::Eps, 1)
}

fn unit_plus(x: i64) -> SparseExpr {
    &SparseExpr::one() + &eps_const(x)
}

fn inv(e: &SparseExpr) -> SparseExpr {
    e.inverse_unit().expect("first-order unit")
}

/// First-order flow `(v, y) -> (v_new, y_new)` of the group element
/// `exp(eps * g)` on one chart, returned as the `eps`-coefficients.
fn differentiate(v_new: SparseExpr, y_new: SparseExpr) -> Derivation {
    Derivation::from_components([(Var::V, v_new.coefficient(Var::Eps, 1)), (Var::Y, y_new.coefficient(Var::Eps, 1))])
}

/// On `u != 0` with `v = v/u` and fiber coordinate (second)/(first):
/// `v -> (c + d v)/(a + b v)`,
/// `y -> y (a + b v)^2 / (1 + y (a0 v^2 + a1 v + a2))`.
fn chart1_field(g: &Generator) -> Derivation {
    let [[ma, mb], [mc, md]] = g.matrix;
    let [a0, a1, a2] = g.translation;
    let v = SparseExpr::var(Var::V);
    let y = SparseExpr::var(Var::Y);
    let a = unit_plus(ma);
    let (b, c, d) = (eps_const(mb), eps_const(mc), unit_plus(md));
    let den = &a + &(&b * &v);
    let v_new = &(&c + &(&d * &v)) * &inv(&den);
    let shift = &(&(&eps_const(a0) * &(&v * &v)) + &(&eps_const(a1) * &v)) + &eps_const(a2);
    let y_new = &(&y * &(&den * &den)) * &inv(&(&SparseExpr::one() + &(&y * &shift)));
    differentiate(v_new, y_new)
}

/// On `v != 0` with `v' = u/v` and fiber coordinate (third)/(first):
/// `v' -> (a v' + b)/(c v' + d)`,
/// `y' -> y' (c v' + d)^2 / (1 + y' (a0 + a1 v' + a2 v'^2))`.
fn chart2_field(g: &Generator) -> Derivation {
    let [[ma, mb], [mc, md]] = g.matrix;
    let [a0, a1, a2] = g.translation;
    let v = SparseExpr::var(Var::V);
    let y = SparseExpr::var(Var::Y);
    let (a, b, c, d) = (unit_plus(ma), eps_const(mb), eps_const(mc), unit_plus(md));
    let den = &(&c * &v) + &d;
    let v_new = &(&(&a * &v) + &b) * &inv(&den);
    let shift = &(&eps_const(a0) + &(&eps_const(a1) * &v)) + &(&eps_const(a2) * &(&v * &v));
    let y_new = &(&y * &(&den * &den)) * &inv(&(&SparseExpr::one() + &(&y * &shift)));
    differentiate(v_new, y_new)
}

/// Differentiates the group action along each basis generator on both
/// charts of the central fiber and checks that the results glue.
pub fn generate_fundamental_fields(tr: &Transition) -> Result<FundamentalFields> {
    let tr0 = tr.at_t_zero()?;
    let mut chart1 = Vec::new();
    let mut chart2 = Vec::new();
    for (i, g) in lie_algebra_basis().iter().enumerate() {
        let f1 = chart1_field(g);
        let f2 = chart2_field(g);
        if pushforward(&f1, &tr0)? != f2 {
            return Err(Error::ChartDisagreement(i + 1));
        }
        chart1.push(ChartVectorField::from_derivation(&tr.source, f1)?);
        chart2.push(ChartVectorField::from_derivation(&tr.target, f2)?);
    }
    Ok(FundamentalFields { chart1, chart2, sign_flipped: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub i: usize,
    pub j: usize,
    pub expected: String,
    pub computed: String,
    pub residual: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    pub relations: Vec<RelationCheck>,
    pub sign_flipped: bool,
}

impl BracketReport {
    pub fn passed_count(&self) -> usize {
        self.relations.iter().filter(|r| r.passed).count()
    }

    pub fn passed(&self) -> bool {
        self.passed_count() == self.relations.len()
    }
}

fn combination(fields: &[Derivation], terms: &[(usize, Rational)]) -> Derivation {
    terms.iter().fold(Derivation::zero(), |acc, (k, c)| acc.add(&fields[k - 1].scale(c)))
}

fn check_relations(fields: &[Derivation], s: &StructureConstants) -> Vec<RelationCheck> {
    s.pairs()
        .into_iter()
        .map(|(i, j)| {
            let terms = s.get(i, j);
            let computed = fields[i - 1].bracket(&fields[j - 1]);
            let residual = computed.sub(&combination(fields, &terms));
            RelationCheck {
                i,
                j,
                expected: format_combination(&terms),
                computed: computed.to_string(),
                residual: residual.to_string(),
                passed: residual.is_zero(),
            }
        })
        .collect()
}

/// Brackets all pairs of fundamental fields and compares with the table.
/// If the table fails as given but holds for the negated fields, the
/// negated fields are used and the flip is recorded.
pub fn verify_bracket_table(f: &FundamentalFields, s: &StructureConstants) -> BracketReport {
    let fields: Vec<Derivation> = f.chart1.iter().map(|c| c.derivation().clone()).collect();
    let direct = check_relations(&fields, s);
    if direct.iter().all(|r| r.passed) {
        return BracketReport { relations: direct, sign_flipped: f.sign_flipped };
    }
    let negated: Vec<Derivation> = fields.iter().map(|d| d.scale(&int(-1))).collect();
    let flipped = check_relations(&negated, s);
    if flipped.iter().all(|r| r.passed) {
        return BracketReport { relations: flipped, sign_flipped: !f.sign_flipped };
    }
    BracketReport { relations: direct, sign_flipped: f.sign_flipped }
}

/// The `d/dt` coefficient of a field.
pub fn base_component(f: &ChartVectorField) -> SparseExpr {
    f.coeff_t()
}

/// Coordinates of each `E'_i` in the `t = 0` basis of global fields
/// (column `i` of the result).
pub fn order0_coordinates(f: &FundamentalFields, space: &GlobalFieldSpace) -> Result<RationalMatrix> {
    let fields: Vec<Derivation> = f.chart1.iter().map(|c| c.derivation().clone()).collect();
    let m = span_coordinates(&fields, space)?;
    if linalg::rank(&m) != 7 {
        return Err(Error::Precondition("fundamental fields are linearly dependent".into()));
    }
    Ok(m)
}

/// Coordinates of fields on the central fiber (chart `W`) in the `t = 0`
/// basis of global fields, one column per field.
pub fn span_coordinates(fields: &[Derivation], space: &GlobalFieldSpace) -> Result<RationalMatrix> {
    let mut m = RationalMatrix::zeros(7, fields.len());
    for (i, e) in fields.iter().enumerate() {
        let mut acc = Derivation::zero();
        for d in Direction::ALL {
            let c = global_readout(e, d);
            if !c.is_zero() {
                acc = acc.add(&space.element(d, 0).at_t_zero().scale(&c));
            }
            m.set(d.index(), i, c);
        }
        if &acc != e {
            return Err(Error::NotInGlobalSpan(i + 1));
        }
    }
    Ok(m)
}

/// The `t^0` coefficient of direction `d` read off a field on `W`.
fn global_readout(field: &Derivation, d: Direction) -> Rational {
    let g = field.component(Var::V);
    let cy = field.component(Var::Y);
    let (src, deg) = match d {
        Direction::A => (g.clone(), 2),
        Direction::B => (g.clone(), 1),
        Direction::C => (g.clone(), 0),
        Direction::LowerA => (cy.coefficient(Var::Y, 2), 2),
        Direction::LowerB => (cy.coefficient(Var::Y, 2), 1),
        Direction::LowerC => (cy.coefficient(Var::Y, 2), 0),
        Direction::E => (cy.coefficient(Var::Y, 1), 0),
    };
    src.coefficient_of(&Monomial::pow(Var::V, deg))
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationSample {
    pub p: u32,
    pub q: u32,
    /// `None` when the bracket vanishes.
    pub valuation: Option<u32>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationReport {
    pub samples: Vec<FiltrationSample>,
}

impl FiltrationReport {
    pub fn passed(&self) -> bool {
        self.samples.iter().all(|s| s.passed)
    }
}

/// For base fields `t^p u(t) d/dt` and `t^q w(t) d/dt` with random `u, w`
/// checks `val [f, g] >= p + q - 1`, and `>= 2p` when `p = q`.
pub fn verify_filtration_facts(seed: u64, per_cell: usize) -> Result<FiltrationReport> {
    let mut rng = sampling::rng(seed);
    let mut samples = Vec::new();
    for p in 1..=4u32 {
        for q in 1..=4u32 {
            for _ in 0..per_cell {
                let series = |e: u32, rng: &mut sampling::SampleRng| {
                    let terms: Vec<(Monomial, Rational)> = (0..3)
                        .map(|k| (Monomial::pow(Var::T, (e + k) as i32), sampling::random_rational(rng, 4)))
                        .collect();
                    let mut s = SparseExpr::from_terms(terms).unwrap();
                    if s.coefficient_of(&Monomial::pow(Var::T, e as i32)).is_zero() {
                        s = &s + &SparseExpr::monomial(1, &[(Var::T, e as i32)]);
                    }
                    Derivation::from_components([(Var::T, s)])
                };
                let f = series(p, &mut rng);
                let same = p == q && rng.gen_bool(0.3);
                let g = if same { f.clone() } else { series(q, &mut rng) };
                let val = f.bracket(&g).t_valuation()?;
                let bound = if p == q { 2 * p } else { p + q - 1 };
                samples.push(FiltrationSample { p, q, valuation: val, passed: val.is_none_or(|v| v >= bound) });
            }
        }
    }
    Ok(FiltrationReport { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::GluedFamily;
    use crate::global_fields::solve_global_fields;

    fn base_bracket(a: &SparseExpr, b: &SparseExpr) -> SparseExpr {
        let da = Derivation::from_components([(Var::T, a.clone())]);
        let db = Derivation::from_components([(Var::T, b.clone())]);
        da.bracket(&db).component(Var::T)
    }

    fn tr() -> Transition {
        GluedFamily::w_family().transitions[0].clone()
    }

    fn p(s: &str) -> SparseExpr {
        s.parse().unwrap()
    }

    #[test]
    fn fundamental_fields_match_expected_forms() {
        let f = generate_fundamental_fields(&tr()).unwrap();
        let expect = [
            ("0", "-1 * v^2 y^2"),
            ("0", "-1 * y^2"),
            ("1", "0"),
            ("0", "-1 * v y^2"),
            ("-1 * v", "2 y"),
            ("v", "0"),
            ("-1 * v^2", "2 v y"),
        ];
        for (i, (cv, cy)) in expect.iter().enumerate() {
            assert_eq!(f.chart1[i].coeff_v(), p(cv), "E{}", i + 1);
            assert_eq!(f.chart1[i].coeff_y(), p(cy), "E{}", i + 1);
            assert!(f.chart1[i].coeff_t().is_zero());
        }
    }

    #[test]
    fn table_holds_without_flip() {
        let f = generate_fundamental_fields(&tr()).unwrap();
        let r = verify_bracket_table(&f, &StructureConstants::stock());
        assert!(r.passed(), "{:?}", r.relations.iter().find(|x| !x.passed));
        assert!(!r.sign_flipped);
    }

    #[test]
    fn negated_fields_are_flipped_back() {
        let f = generate_fundamental_fields(&tr()).unwrap().negated();
        let r = verify_bracket_table(&f, &StructureConstants::stock());
        assert!(r.passed());
        assert!(!r.sign_flipped);
    }

    #[test]
    fn corrupted_table_fails_one_relation() {
        let f = generate_fundamental_fields(&tr()).unwrap();
        let mut s = StructureConstants::stock();
        s.set(1, 3, vec![(4, int(2))]);
        assert_eq!(verify_bracket_table(&f, &s).passed_count(), 20);
    }

    #[test]
    fn fundamental_fields_span_central_fiber() {
        let f = generate_fundamental_fields(&tr()).unwrap();
        let space = solve_global_fields(0, 4, &tr()).unwrap();
        let m = order0_coordinates(&f, &space).unwrap();
        assert_eq!(*m.get(Direction::LowerA.index(), 0), int(-1));
        assert_eq!(*m.get(Direction::C.index(), 2), int(1));
    }

    #[test]
    fn filtration() {
        let r = verify_filtration_facts(5, 3).unwrap();
        assert!(r.passed());
        let f = Derivation::from_components([(Var::T, p("t^2"))]);
        let g = Derivation::from_components([(Var::T, p("t^3"))]);
        assert_eq!(f.bracket(&g).component(Var::T), p("t^4"));
    }

    #[test]
    fn base_component_is_bracket_compatible() {
        let s = solve_global_fields(3, 3, &tr()).unwrap();
        for a in &s.basis {
            for b in &s.basis {
                let lhs = base_component(&a.field_w.bracket(&b.field_w).unwrap());
                let rhs = base_bracket(&base_component(&a.field_w), &base_component(&b.field_w));
                assert_eq!(lhs, rhs);
            }
        }
    }
}
