//! Extension of the fundamental fields to global fields on the truncated
//! families `W_n`, order by order in `t`, keeping the structure constants.
//!
//! A global field on `W_n` is `sum_l c_l(t) Y_l` where `Y_l` is the global
//! field whose readouts are `t^0` in direction `l` and zero elsewhere, and
//! `c_l` is a polynomial of degree `<= n`. Brackets of the `Y_l` are global
//! again, so the whole lifting problem is carried out on coefficient vectors
//! `(c_1, ..., c_7)`: with `K(c) = sum_a c_a k_a` the base component,
//!
//! `[c, d] = sum_{a,b} c_a d_b [Y_a, Y_b] + K(c) dd/dt - K(d) dc/dt`.
//!
//! The order-`m` unknowns of field `i` are the `t^m` coefficients of its
//! seven coordinates. They enter the `t^m` part of every relation linearly;
//! everything else is a polynomial in the parameters of lower orders.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rand::Rng;

use crate::charts::{Derivation, IdentityCheck, Transition};
use crate::error::{Error, Result};
use crate::global_fields::{solve_global_fields, Direction, GlobalField, GlobalFieldSpace};
use crate::groebner::{buchberger, normal_form, GroebnerBasis, MonomialOrder, ParamPolynomial};
use crate::lie::{generate_fundamental_fields, span_coordinates, verify_bracket_table, StructureConstants};
use crate::linalg::{self, RationalMatrix};
use crate::sampling;
use crate::symbolic::{ParamPool, Rational, SparseExpr, Var};

/// Seven `t`-series, the coordinates of a global field in the basis `Y_l`.
pub type Coords = Vec<SparseExpr>;

fn t_pow(m: u32) -> SparseExpr {
    SparseExpr::monomial(1, &[(Var::T, m as i32)])
}

/// Coordinates are exact polynomials in `t`, so the truncation order can be
/// raised as well as lowered.
fn truncate(c: &Coords, m: u32) -> Coords {
    c.iter().map(|x| x.clone().without_truncation().with_truncation(Var::T, m)).collect()
}

/// The basis `Y_1, ..., Y_7` of global fields at order `n` with their
/// base components and mutual brackets.
#[derive(Clone, Debug)]
pub struct GlobalAlgebra {
    pub order: u32,
    pub space: GlobalFieldSpace,
    /// `k[a]`: the `d/dt` coefficient of `Y_a`.
    pub k: Vec<SparseExpr>,
    /// `[Y_a, Y_b] = sum_l s[a][b][l] Y_l`.
    pub s: Vec<Vec<Coords>>,
}

impl GlobalAlgebra {
    pub fn new(space: GlobalFieldSpace, tr: &Transition) -> Result<Self> {
        let order = space.ansatz.order;
        let y: Vec<&GlobalField> = Direction::ALL.iter().map(|&d| space.element(d, 0)).collect();
        let mut k = Vec::new();
        for f in &y {
            let kf = f.field_w.coeff_t().with_truncation(Var::T, order);
            if !kf.coefficient(Var::T, 0).is_zero() {
                return Err(Error::Precondition("a global field has k(0) != 0".into()));
            }
            k.push(kf);
        }
        let mut alg = Self { order, space: space.clone(), k, s: Vec::new() };
        let mut s = Vec::new();
        for a in &y {
            let mut row = Vec::new();
            for b in &y {
                let br = a.field_w.bracket(&b.field_w)?;
                let g = GlobalField::from_w_field(br.derivation().clone(), order, tr)?;
                let p = g.parameters();
                let c: Coords = Direction::ALL.iter().map(|&d| p.get(d).clone()).collect();
                if alg.field(&c) != *br.derivation() {
                    return Err(Error::Precondition("bracket of global fields not determined by readouts".into()));
                }
                row.push(c);
            }
            s.push(row);
        }
        alg.s = s;
        Ok(alg)
    }

    pub fn from_order(order: u32, degree: u32, tr: &Transition) -> Result<Self> {
        Self::new(solve_global_fields(order, degree, tr)?, tr)
    }

    /// `sum_l c_l Y_l` as a field on `W`.
    pub fn field(&self, c: &Coords) -> Derivation {
        let mut acc = Derivation::zero();
        for (l, cl) in c.iter().enumerate() {
            if !cl.is_zero() {
                let y = self.space.element(Direction::ALL[l], 0).derivation();
                acc = acc.add(&y.map(|x| x * cl));
            }
        }
        acc
    }

    /// `K(c)`.
    pub fn base(&self, c: &Coords) -> SparseExpr {
        c.iter().zip(&self.k).fold(SparseExpr::zero(), |acc, (x, k)| &acc + &(x * k))
    }

    pub fn bracket(&self, c: &Coords, d: &Coords) -> Coords {
        let mut out: Coords = vec![SparseExpr::zero(); 7];
        for (a, ca) in c.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, db) in d.iter().enumerate() {
                if db.is_zero() {
                    continue;
                }
                let cd = ca * db;
                for (l, s) in self.s[a][b].iter().enumerate() {
                    if !s.is_zero() {
                        out[l] = &out[l] + &(&cd * s);
                    }
                }
            }
        }
        // K has no constant term, so multiplying by it restores the order
        // lost by differentiating.
        let kc = self.base(c);
        let kd = self.base(d);
        for l in 0..7 {
            let dd = d[l].partial_derivative_keep_truncation(Var::T);
            let dc = c[l].partial_derivative_keep_truncation(Var::T);
            out[l] = &(&out[l] + &(&kc * &dd)) - &(&kd * &dc);
        }
        out
    }
}

/// The data of one lifting problem.
#[derive(Clone, Debug)]
pub struct LiftProblem {
    pub structure_constants: StructureConstants,
    /// The fields to lift, on chart `W` at `t = 0`.
    pub order0: Vec<Derivation>,
    pub target_order: u32,
    pub algebra: GlobalAlgebra,
    /// Coordinates of the order-0 fields (constants).
    pub order0_coords: Vec<Coords>,
    /// Whether the fundamental fields were negated to match the table.
    pub sign_flipped: bool,
}

impl LiftProblem {
    pub fn new(
        structure_constants: StructureConstants,
        order0: Vec<Derivation>,
        target_order: u32,
        degree: u32,
        tr: &Transition,
    ) -> Result<Self> {
        if structure_constants.dimension != order0.len() {
            return Err(Error::DimensionMismatch { expected: structure_constants.dimension, found: order0.len() });
        }
        let algebra = GlobalAlgebra::from_order(target_order, degree, tr)?;
        let m = span_coordinates(&order0, &algebra.space)?;
        let order0_coords =
            (0..order0.len()).map(|i| m.column(i).into_iter().map(SparseExpr::constant).collect()).collect();
        Ok(Self { structure_constants, order0, target_order, algebra, order0_coords, sign_flipped: false })
    }

    /// The fundamental fields with the given table, negated if the table
    /// only holds for the negated fields.
    pub fn with_table(table: StructureConstants, target_order: u32, degree: u32, tr: &Transition) -> Result<Self> {
        let mut f = generate_fundamental_fields(tr)?;
        let report = verify_bracket_table(&f, &table);
        if report.sign_flipped != f.sign_flipped {
            f = f.negated();
        }
        let fields = f.chart1.iter().map(|c| c.derivation().clone()).collect();
        let mut p = Self::new(table, fields, target_order, degree, tr)?;
        p.sign_flipped = f.sign_flipped;
        Ok(p)
    }

    pub fn stock(target_order: u32, tr: &Transition) -> Result<Self> {
        Self::with_table(StructureConstants::stock(), target_order, 4, tr)
    }

    pub fn rank(&self) -> usize {
        self.order0.len()
    }

    /// `[E_i, E_j] - sum_k c_ijk E_k` in coordinates.
    fn relation(&self, e: &[Coords], i: usize, j: usize) -> Coords {
        let mut r = self.algebra.bracket(&e[i - 1], &e[j - 1]);
        for (k, c) in self.structure_constants.get(i, j) {
            for l in 0..7 {
                r[l] = &r[l] - &e[k - 1][l].scale(&c);
            }
        }
        r
    }
}

/// Where a lifting parameter comes from: the `t^order` coefficient of
/// direction `direction` in field `E_field`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamLabel {
    pub field: usize,
    pub direction: Direction,
    pub order: u32,
}

/// A family of lifts up to some order.
#[derive(Clone, Debug)]
pub struct ParametricLift {
    pub order: u32,
    /// `coordinates[i][l]`, polynomials in `t` (degree `<= order`) and the
    /// free parameters.
    pub coordinates: Vec<Coords>,
    /// Free parameters, in order of introduction.
    pub parameters: Vec<Var>,
    /// Eliminated parameters with their values in the free ones.
    pub eliminated: Vec<(Var, SparseExpr)>,
    /// Polynomial conditions on the free parameters.
    pub conditions: Vec<ParamPolynomial>,
    pub labels: BTreeMap<Var, ParamLabel>,
}

impl ParametricLift {
    pub fn order0(p: &LiftProblem) -> Self {
        Self {
            order: 0,
            coordinates: p.order0_coords.iter().map(|c| truncate(c, 0)).collect(),
            parameters: Vec::new(),
            eliminated: Vec::new(),
            conditions: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters.len()
    }

    /// All free parameters set to the given values (missing ones to zero).
    pub fn specialize(&self, values: &BTreeMap<Var, Rational>) -> ParametricLift {
        let sub = |e: &SparseExpr| {
            self.parameters
                .iter()
                .fold(e.clone(), |acc, v| acc.specialize(*v, values.get(v).unwrap_or(&Rational::zero())))
        };
        ParametricLift {
            order: self.order,
            coordinates: self.coordinates.iter().map(|c| c.iter().map(sub).collect()).collect(),
            parameters: Vec::new(),
            eliminated: self.eliminated.iter().map(|(v, e)| (*v, sub(e))).collect(),
            conditions: self
                .conditions
                .iter()
                .filter_map(|c| {
                    let e = sub(c.expr());
                    (!e.is_zero()).then(|| ParamPolynomial::new(e).unwrap())
                })
                .collect(),
            labels: self.labels.clone(),
        }
    }

    /// The member with every free parameter zero.
    pub fn particular(&self) -> ParametricLift {
        self.specialize(&BTreeMap::new())
    }

    /// The affine constraints `v - value = 0` of the eliminated parameters.
    pub fn affine_constraints(&self) -> Vec<ParamPolynomial> {
        self.eliminated
            .iter()
            .map(|(v, e)| ParamPolynomial::new(&SparseExpr::var(*v) - e).expect("parameter polynomial"))
            .collect()
    }

    pub fn fields(&self, p: &LiftProblem) -> Vec<Derivation> {
        self.coordinates.iter().map(|c| p.algebra.field(c).with_truncation(Var::T, self.order)).collect()
    }
}

/// Row label: component `direction` of relation `[E_i, E_j]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquationLabel {
    pub i: usize,
    pub j: usize,
    pub direction: Direction,
}

/// `matrix * unknowns = rhs` at one order, `rhs` polynomial in the lower
/// parameters.
#[derive(Clone, Debug)]
pub struct OrderEquations {
    pub order: u32,
    pub unknowns: Vec<Var>,
    pub labels: Vec<EquationLabel>,
    pub matrix: RationalMatrix,
    pub rhs: Vec<SparseExpr>,
}

impl OrderEquations {
    /// Largest total degree in the parameters among the right-hand sides.
    pub fn rhs_degree(&self) -> i32 {
        self.rhs.iter().flat_map(|e| e.terms().map(|(m, _)| m.total_degree())).max().unwrap_or(0)
    }

    pub fn specialize(&self, values: &BTreeMap<Var, Rational>) -> Vec<Rational> {
        self.rhs
            .iter()
            .map(|e| {
                let s = values.iter().fold(e.clone(), |acc, (v, q)| acc.specialize(*v, q));
                s.constant_value().expect("all parameters specialized")
            })
            .collect()
    }
}

/// The `t^m` parts of all relations, with fresh unknowns for the order-`m`
/// coefficients (none when `m = 0`).
pub fn assemble_order_equations(
    p: &LiftProblem,
    m: u32,
    lower: &ParametricLift,
    pool: &mut ParamPool,
) -> Result<(OrderEquations, BTreeMap<Var, ParamLabel>)> {
    if m > 0 && lower.order + 1 != m {
        return Err(Error::Precondition(format!("order {m} needs a lift to order {}", m - 1)));
    }
    let mut labels = BTreeMap::new();
    let mut unknowns = Vec::new();
    let mut e: Vec<Coords> = lower.coordinates.iter().map(|c| truncate(c, m)).collect();
    if m > 0 {
        for (i, ei) in e.iter_mut().enumerate() {
            for (l, d) in Direction::ALL.iter().enumerate() {
                let x = pool.fresh();
                labels.insert(x, ParamLabel { field: i + 1, direction: *d, order: m });
                unknowns.push(x);
                ei[l] = &ei[l] + &(&t_pow(m) * &SparseExpr::var(x)).with_truncation(Var::T, m);
            }
        }
    }
    let index: BTreeMap<Var, usize> = unknowns.iter().enumerate().map(|(k, v)| (*v, k)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut eq_labels = Vec::new();
    for (i, j) in p.structure_constants.pairs() {
        let rel = p.relation(&e, i, j);
        for (l, d) in Direction::ALL.iter().enumerate() {
            let coef = rel[l].coefficient(Var::T, m as i32).without_truncation();
            let mut row = Vec::new();
            let mut rest = Vec::new();
            for (mono, c) in coef.terms() {
                let fresh: Vec<_> = mono.factors().iter().filter(|(v, _)| index.contains_key(v)).collect();
                match fresh.as_slice() {
                    [] => rest.push((mono.clone(), -c.clone())),
                    [(v, 1)] if mono.factors().len() == 1 => row.push((index[v], c.clone())),
                    _ => return Err(Error::Precondition(format!("order-{m} unknowns enter [E{i},E{j}] nonlinearly"))),
                }
            }
            if row.is_empty() && rest.is_empty() {
                continue;
            }
            rows.push(row);
            rhs.push(SparseExpr::from_terms(rest)?);
            eq_labels.push(EquationLabel { i, j, direction: *d });
        }
    }
    let matrix = RationalMatrix::from_sparse_rows(&rows, unknowns.len());
    Ok((OrderEquations { order: m, unknowns, labels: eq_labels, matrix, rhs }, labels))
}

/// Proof that no choice of lower-order parameters admits an order-`m` lift.
#[derive(Clone, Debug)]
pub struct ObstructionCertificate {
    pub order: u32,
    pub equations: OrderEquations,
    /// Sparse rows `l` with `l * matrix = 0`.
    pub left_null_rows: Vec<Vec<(usize, Rational)>>,
    /// Solvability conditions `l * rhs` together with the lower-order
    /// conditions and affine constraints.
    pub parameter_system: Vec<ParamPolynomial>,
    pub groebner_certificate: GroebnerBasis,
    /// Whether lex gives the same verdict as grevlex.
    pub lex_agrees: bool,
}

impl ObstructionCertificate {
    pub fn obstructs(&self) -> bool {
        self.groebner_certificate.is_unit()
    }

    /// Parameters occurring in the system.
    pub fn parameters(&self) -> BTreeSet<Var> {
        self.parameter_system.iter().flat_map(|p| p.expr().vars()).collect()
    }
}

/// Result of one `solve_order` step.
#[derive(Clone, Debug)]
pub enum OrderOutcome {
    Solvable { lift: ParametricLift, equations: OrderEquations, rank: usize },
    Obstructed(ObstructionCertificate),
}

fn dot_expr(row: &[(usize, Rational)], rhs: &[SparseExpr]) -> SparseExpr {
    row.iter().fold(SparseExpr::zero(), |acc, (k, c)| &acc + &rhs[*k].scale(c))
}

/// Extends `lower` by one order, or certifies that it cannot be extended
/// for any value of its parameters.
pub fn solve_order(p: &LiftProblem, m: u32, lower: &ParametricLift, pool: &mut ParamPool) -> Result<OrderOutcome> {
    let (eq, labels) = assemble_order_equations(p, m, lower, pool)?;
    let left: Vec<Vec<(usize, Rational)>> = linalg::left_nullspace(&eq.matrix)
        .into_iter()
        .map(|row| row.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect())
        .collect();
    let mut conditions = lower.conditions.clone();
    let mut witnesses = Vec::new();
    for row in &left {
        let c = dot_expr(row, &eq.rhs);
        if !c.is_zero() {
            conditions.push(ParamPolynomial::new(c)?);
            witnesses.push(row.clone());
        }
    }
    let mut system = conditions.clone();
    system.extend(lower.affine_constraints());
    if !system.is_empty() {
        let gb = buchberger(&system, MonomialOrder::GrevLex);
        if gb.is_unit() {
            let lex_agrees = buchberger(&system, MonomialOrder::Lex).is_unit();
            return Ok(OrderOutcome::Obstructed(ObstructionCertificate {
                order: m,
                equations: eq,
                left_null_rows: witnesses,
                parameter_system: system,
                groebner_certificate: gb,
                lex_agrees,
            }));
        }
    }

    let mut red = eq.matrix.clone();
    let mut aug = eq.rhs.clone();
    let pivots = linalg::eliminate(&mut red, &mut aug);
    let rank = pivots.len();
    let free: Vec<usize> = (0..eq.unknowns.len()).filter(|c| !pivots.contains(c)).collect();
    let mut values: BTreeMap<Var, SparseExpr> =
        free.iter().map(|&c| (eq.unknowns[c], SparseExpr::var(eq.unknowns[c]))).collect();
    let mut eliminated = lower.eliminated.clone();
    for (r, &c) in pivots.iter().enumerate() {
        let mut v = aug[r].clone();
        for &f in &free {
            let x = red.get(r, f);
            if !x.is_zero() {
                v = &v - &SparseExpr::var(eq.unknowns[f]).scale(x);
            }
        }
        eliminated.push((eq.unknowns[c], v.clone()));
        values.insert(eq.unknowns[c], v);
    }

    let mut coordinates: Vec<Coords> = lower.coordinates.iter().map(|c| truncate(c, m)).collect();
    for (i, ci) in coordinates.iter_mut().enumerate() {
        for l in 0..7 {
            let x = eq.unknowns[i * 7 + l];
            ci[l] = &ci[l] + &(&t_pow(m) * &values[&x]).with_truncation(Var::T, m);
        }
    }
    let mut parameters = lower.parameters.clone();
    parameters.extend(free.iter().map(|&c| eq.unknowns[c]));
    let mut all_labels = lower.labels.clone();
    all_labels.extend(labels);
    let lift = ParametricLift { order: m, coordinates, parameters, eliminated, conditions, labels: all_labels };
    Ok(OrderOutcome::Solvable { lift, equations: eq, rank })
}

/// Per-order outcome in a [`LiftReport`].
#[derive(Clone, Debug)]
pub enum OrderStatus {
    Solvable {
        /// Number of free parameters introduced at this order.
        new_parameters: usize,
        rank: usize,
        /// Rank recomputed by column elimination of the transpose.
        rank_by_columns: usize,
        equations: usize,
        rhs_degree: i32,
    },
    Obstructed,
}

#[derive(Clone, Debug)]
pub struct OrderSummary {
    pub order: u32,
    pub status: OrderStatus,
}

#[derive(Clone, Debug)]
pub struct LiftReport {
    pub target_order: u32,
    pub orders: Vec<OrderSummary>,
    /// The lift to the last solvable order.
    pub lift: ParametricLift,
    pub certificate: Option<ObstructionCertificate>,
}

impl LiftReport {
    pub fn obstructed(&self) -> bool {
        self.certificate.is_some()
    }
}

/// Runs [`solve_order`] for `m = 1, ..., n`, stopping at the first
/// obstruction.
pub fn run_lift(p: &LiftProblem) -> Result<LiftReport> {
    let mut pool = ParamPool::starting_at(1);
    let mut lift = ParametricLift::order0(p);
    let mut orders = Vec::new();
    for m in 1..=p.target_order {
        match solve_order(p, m, &lift, &mut pool)? {
            OrderOutcome::Solvable { lift: next, equations, rank } => {
                orders.push(OrderSummary {
                    order: m,
                    status: OrderStatus::Solvable {
                        new_parameters: next.parameters.len() - lift.parameters.len(),
                        rank,
                        rank_by_columns: linalg::rank_by_columns(&equations.matrix),
                        equations: equations.labels.len(),
                        rhs_degree: equations.rhs_degree(),
                    },
                });
                lift = next;
            }
            OrderOutcome::Obstructed(cert) => {
                orders.push(OrderSummary { order: m, status: OrderStatus::Obstructed });
                return Ok(LiftReport { target_order: p.target_order, orders, lift, certificate: Some(cert) });
            }
        }
    }
    Ok(LiftReport { target_order: p.target_order, orders, lift, certificate: None })
}

/// Substitutes random rational values for the parameters of `lower` and
/// checks whether the order-`m` system is then consistent. One entry per
/// sample.
pub fn sample_consistency(
    p: &LiftProblem,
    lower: &ParametricLift,
    m: u32,
    samples: usize,
    seed: u64,
) -> Result<Vec<bool>> {
    let mut rng = sampling::rng(seed);
    let mut out = Vec::new();
    for _ in 0..samples {
        let values: BTreeMap<Var, Rational> = lower
            .parameters
            .iter()
            .map(|v| {
                let q = if rng.gen_bool(0.1) { Rational::zero() } else { sampling::random_rational(&mut rng, 5) };
                (*v, q)
            })
            .collect();
        let fixed = lower.specialize(&values);
        let mut pool = ParamPool::starting_at(1_000_000);
        let (eq, _) = assemble_order_equations(p, m, &fixed, &mut pool)?;
        let rhs = eq.specialize(&BTreeMap::new());
        out.push(linalg::solve_affine(&eq.matrix, &rhs)?.is_consistent());
    }
    Ok(out)
}

/// Brackets the actual fields of a parameter-free lift and returns the
/// residual of every relation modulo `t^(order+1)`.
pub fn relation_residuals(p: &LiftProblem, lift: &ParametricLift) -> Result<Vec<IdentityCheck>> {
    if !lift.parameters.is_empty() {
        return Err(Error::Precondition("specialize the lift before checking residuals".into()));
    }
    let fields = lift.fields(p);
    let mut out = Vec::new();
    for (i, j) in p.structure_constants.pairs() {
        let mut r = fields[i - 1].bracket(&fields[j - 1]);
        for (k, c) in p.structure_constants.get(i, j) {
            r = r.sub(&fields[k - 1].scale(&c));
        }
        let r = r.with_truncation(Var::T, lift.order);
        let mut acc = SparseExpr::zero();
        let mut text = Vec::new();
        for (v, c) in r.components() {
            if !c.is_zero() {
                text.push(format!("{v}: {c}"));
                acc = &acc + c;
            }
        }
        let mut check = IdentityCheck::new(format!("[E{i},E{j}] mod t^{}", lift.order + 1), acc);
        if !text.is_empty() && check.passed() {
            // components cancelled in the sum
            check = IdentityCheck::new(check.name, SparseExpr::one());
        }
        out.push(check);
    }
    Ok(out)
}

/// The order-`m` system of a parameter-free lift assembled from brackets
/// of the fields themselves, one row per `(component, v^i y^j)`. Serves as
/// a cross-check on the coordinate formulation.
pub fn assemble_direct(p: &LiftProblem, lower: &ParametricLift, m: u32) -> Result<(RationalMatrix, Vec<Rational>)> {
    if !lower.parameters.is_empty() || lower.order + 1 != m {
        return Err(Error::Precondition(format!(
            "direct assembly needs a parameter-free lift to order {}",
            m.saturating_sub(1)
        )));
    }
    let mut pool = ParamPool::starting_at(2_000_000);
    let mut unknowns = BTreeMap::new();
    let mut fields = Vec::new();
    for (i, c) in lower.coordinates.iter().enumerate() {
        let mut f = p.algebra.field(&truncate(c, m)).with_truncation(Var::T, m);
        for (l, d) in Direction::ALL.iter().enumerate() {
            let x = pool.fresh();
            unknowns.insert(x, i * 7 + l);
            let coef = (&t_pow(m) * &SparseExpr::var(x)).with_truncation(Var::T, m);
            f = f.add(&p.algebra.space.element(*d, 0).derivation().map(|e| e * &coef));
        }
        fields.push(f.with_truncation(Var::T, m));
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, j) in p.structure_constants.pairs() {
        let mut r = fields[i - 1].bracket(&fields[j - 1]);
        for (k, c) in p.structure_constants.get(i, j) {
            r = r.sub(&fields[k - 1].scale(&c));
        }
        for (_, comp) in r.components() {
            let top = comp.coefficient(Var::T, m as i32).without_truncation();
            for (_, cof) in top.collect(|v| v.is_chart_coordinate()) {
                let mut row = Vec::new();
                let mut constant = Rational::zero();
                for (mono, q) in cof.terms() {
                    match mono.factors() {
                        [] => constant -= q,
                        [(v, 1)] if unknowns.contains_key(v) => row.push((unknowns[v], q.clone())),
                        _ => return Err(Error::Precondition("nonlinear term in direct assembly".into())),
                    }
                }
                rows.push(row);
                rhs.push(constant);
            }
        }
    }
    Ok((RationalMatrix::from_sparse_rows(&rows, 7 * p.rank()), rhs))
}

/// One coefficient of a base component.
#[derive(Clone, Debug)]
pub struct BaseCoefficient {
    pub field: usize,
    pub power: u32,
    pub value: SparseExpr,
    /// Zero on the whole solution space.
    pub forced_zero: bool,
}

#[derive(Clone, Debug)]
pub struct BaseComponentReport {
    pub order: u32,
    pub coefficients: Vec<BaseCoefficient>,
}

impl BaseComponentReport {
    pub fn get(&self, field: usize, power: u32) -> &BaseCoefficient {
        self.coefficients.iter().find(|c| c.field == field && c.power == power).expect("coefficient in range")
    }

    /// `(field, power)` of every coefficient forced to vanish.
    pub fn forced(&self) -> Vec<(usize, u32)> {
        self.coefficients.iter().filter(|c| c.forced_zero).map(|c| (c.field, c.power)).collect()
    }
}

/// The base components `k_i(t)` of the lifted fields as functions of the
/// parameters, and which of their coefficients vanish identically.
pub fn base_component_analysis(p: &LiftProblem, lift: &ParametricLift) -> BaseComponentReport {
    let gb = (!lift.conditions.is_empty()).then(|| buchberger(&lift.conditions, MonomialOrder::GrevLex));
    let mut coefficients = Vec::new();
    for (i, c) in lift.coordinates.iter().enumerate() {
        let k = p.algebra.base(c).with_truncation(Var::T, lift.order);
        for e in 0..=lift.order {
            let value = k.coefficient(Var::T, e as i32).without_truncation();
            let forced_zero = value.is_zero()
                || gb.as_ref().is_some_and(|g| {
                    ParamPolynomial::new(value.clone()).map(|v| normal_form(&v, g).is_zero()).unwrap_or(false)
                });
            coefficients.push(BaseCoefficient { field: i + 1, power: e, value, forced_zero });
        }
    }
    BaseComponentReport { order: lift.order, coefficients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::GluedFamily;

    fn tr() -> Transition {
        GluedFamily::w_family().transitions[0].clone()
    }

    #[test]
    fn coordinates_match_direct_brackets() {
        let alg = GlobalAlgebra::from_order(2, 4, &tr()).unwrap();
        let mut rng = sampling::rng(3);
        for _ in 0..5 {
            let mut rand_coords = || -> Coords {
                (0..7)
                    .map(|_| {
                        let terms = (0..3).map(|e| {
                            (crate::symbolic::Monomial::pow(Var::T, e), sampling::random_rational(&mut rng, 3))
                        });
                        SparseExpr::from_terms(terms).unwrap().with_truncation(Var::T, 2)
                    })
                    .collect()
            };
            let c = rand_coords();
            let d = rand_coords();
            let lhs = alg.field(&alg.bracket(&c, &d));
            let rhs = alg.field(&c).bracket(&alg.field(&d)).with_truncation(Var::T, 2);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn order_zero_is_the_bracket_table() {
        let p = LiftProblem::stock(0, &tr()).unwrap();
        let lift = ParametricLift::order0(&p);
        let (eq, _) = assemble_order_equations(&p, 0, &lift, &mut ParamPool::new()).unwrap();
        assert!(eq.unknowns.is_empty());
        assert!(eq.rhs.iter().all(|x| x.is_zero()));
        assert!(run_lift(&p).unwrap().orders.is_empty());
    }

    #[test]
    fn order_one_lifts() {
        let p = LiftProblem::stock(1, &tr()).unwrap();
        let report = run_lift(&p).unwrap();
        assert!(!report.obstructed());
        let OrderStatus::Solvable { rank, rank_by_columns, rhs_degree, .. } = report.orders[0].status else {
            panic!("order 1 should be solvable")
        };
        assert_eq!(rank, rank_by_columns);
        assert_eq!(rhs_degree, 0);
        let res = relation_residuals(&p, &report.lift.particular()).unwrap();
        assert!(res.iter().all(|c| c.passed()));
        let base = base_component_analysis(&p, &report.lift);
        for i in 1..=7 {
            assert!(base.get(i, 0).forced_zero);
        }
        for i in [1, 2, 4] {
            assert!(base.get(i, 1).forced_zero, "a_1 of k_{i}");
        }
    }

    #[test]
    fn order_two_is_obstructed() {
        let p = LiftProblem::stock(2, &tr()).unwrap();
        let report = run_lift(&p).unwrap();
        let cert = report.certificate.as_ref().expect("obstruction at order 2");
        assert_eq!(cert.order, 2);
        assert!(cert.obstructs());
        assert!(cert.lex_agrees);
        assert!(cert.equations.rhs_degree() <= 2);
        let order1: BTreeSet<Var> = report.lift.labels.keys().copied().collect();
        assert!(cert.parameters().is_subset(&order1));
        let samples = sample_consistency(&p, &report.lift, 2, 5, 11).unwrap();
        assert!(samples.iter().all(|ok| !ok));
        let (m, rhs) = assemble_direct(&p, &report.lift.particular(), 2).unwrap();
        assert!(!linalg::solve_affine(&m, &rhs).unwrap().is_consistent());
    }

    #[test]
    fn direct_assembly_agrees_at_order_one() {
        let p = LiftProblem::stock(1, &tr()).unwrap();
        let lower = ParametricLift::order0(&p);
        let (m, rhs) = assemble_direct(&p, &lower, 1).unwrap();
        let (eq, _) = assemble_order_equations(&p, 1, &lower, &mut ParamPool::new()).unwrap();
        assert_eq!(linalg::rank(&m), linalg::rank(&eq.matrix));
        let direct = linalg::solve_affine(&m, &rhs).unwrap();
        assert!(direct.is_consistent());
        assert_eq!(direct.dimension(), Some(7));
    }

    #[test]
    fn abelian_problem_lifts_trivially() {
        let dv = Derivation::partial(Var::V);
        let fields: Vec<Derivation> = (1..=7).map(|c| dv.scale(&crate::symbolic::int(c))).collect();
        let p = LiftProblem::new(StructureConstants::zero(7), fields, 2, 4, &tr()).unwrap();
        let report = run_lift(&p).unwrap();
        assert!(!report.obstructed());
        let res = relation_residuals(&p, &report.lift.particular()).unwrap();
        assert!(res.iter().all(|c| c.passed()));
        let zero = ParametricLift {
            order: 2,
            coordinates: p.order0_coords.iter().map(|c| truncate(c, 2)).collect(),
            ..report.lift.particular()
        };
        assert!(relation_residuals(&p, &zero).unwrap().iter().all(|c| c.passed()));
        let base = base_component_analysis(&p, &report.lift);
        for i in 1..=7 {
            assert!(base.get(i, 0).forced_zero);
            // the global lift of d/dv has no d/dt part to first order
            assert!(base.get(i, 1).forced_zero);
            assert!(!base.get(i, 2).forced_zero);
        }
    }
}
