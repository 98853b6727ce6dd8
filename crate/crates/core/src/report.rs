//! Machine-readable verification reports.
//!
//! Each section runner returns a list of [`Check`]s. A report is
//! deterministic for fixed inputs except for the `wall_time` fields.

use std::path::Path;
use std::time::Instant;

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::charts::{verify_surface_models, verify_transition_consistency, GluedFamily, IdentityCheck};
use crate::error::{Error, Result};
use crate::global_fields::{
    fiber_field_dimension, h0_dimension, h1_dimension, is_coboundary, kodaira_spencer_cocycle, solve_global_fields,
    verify_shape_identities, Direction, Window,
};
use crate::lie::{generate_fundamental_fields, verify_bracket_table, verify_filtration_facts, StructureConstants};
use crate::lifting::{
    base_component_analysis, relation_residuals, run_lift, sample_consistency, LiftProblem, OrderStatus,
};
use crate::symbolic::{fmt_rational, int, SparseExpr};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MANIFEST_FILE: &str = "w_family.manifest";
pub const TABLE_FILE: &str = "structure_constants.table";

pub const MAX_FIELD_ORDER: u32 = 6;
pub const MAX_DEGREE: u32 = 8;
pub const MIN_DEGREE: u32 = 2;
pub const MAX_LIFT_ORDER: u32 = 3;
pub const SOUNDNESS_SAMPLES: usize = 20;

pub fn ser_expr<S: Serializer>(e: &SparseExpr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.canonical_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Obstructed,
    Solvable,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Obstructed => "OBSTRUCTED",
            Status::Solvable => "SOLVABLE",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub status: Status,
    pub details: Value,
    /// Seconds.
    pub wall_time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl VerificationReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn extend(&mut self, section: Section) {
        self.checks.extend(section.checks);
        self.warnings.extend(section.warnings);
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Checks and warnings from one subcommand.
#[derive(Clone, Debug, Default)]
pub struct Section {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Section {
    fn timed<F: FnOnce() -> Result<(Status, Value)>>(&mut self, id: &str, f: F) -> Result<()> {
        let start = Instant::now();
        let (status, details) = f()?;
        self.checks.push(Check { id: id.into(), status, details, wall_time: start.elapsed().as_secs_f64() });
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// The glued family and structure constants to verify.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub family: GluedFamily,
    pub table: StructureConstants,
    pub seed: u64,
}

impl Inputs {
    pub fn stock(seed: u64) -> Self {
        Self { family: GluedFamily::w_family(), table: StructureConstants::stock(), seed }
    }

    /// Reads `w_family.manifest` and `structure_constants.table` from `dir`.
    pub fn from_dir(dir: &Path, seed: u64) -> Result<Self> {
        Ok(Self {
            family: GluedFamily::load(&dir.join(MANIFEST_FILE))?,
            table: StructureConstants::load(&dir.join(TABLE_FILE))?,
            seed,
        })
    }
}

fn identity_json(checks: &[IdentityCheck]) -> Value {
    json!(checks
        .iter()
        .map(|c| json!({"name": c.name, "residual": c.residual.canonical_string(), "passed": c.passed()}))
        .collect::<Vec<_>>())
}

pub fn gluing_section(inputs: &Inputs) -> Result<Section> {
    let mut s = Section::default();
    let tr = inputs.family.primary_transition()?.clone();
    s.timed("gluing.transition_consistency", || {
        let r = verify_transition_consistency(&tr, 25, inputs.seed)?;
        let rules: Value = tr.rules.iter().map(|(v, e)| (v.name(), json!(e.canonical_string()))).collect();
        Ok((Status::from_bool(r.passed()), json!({"rules": rules, "checks": identity_json(&r.checks)})))
    })?;
    s.timed("gluing.surface_models", || {
        let r = verify_surface_models(&inputs.family)?;
        Ok((
            Status::from_bool(r.passed()),
            json!({
                "checks": identity_json(&r.checks),
                "trivialization_ratio": r.trivialization_ratio.as_ref().map(|e| e.canonical_string()),
            }),
        ))
    })?;
    Ok(s)
}

pub fn check_field_flags(order: u32, degree: u32) -> Result<()> {
    if order > MAX_FIELD_ORDER {
        return Err(Error::Precondition(format!("--order must be at most {MAX_FIELD_ORDER}")));
    }
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
        return Err(Error::Precondition(format!("--degree must be between {MIN_DEGREE} and {MAX_DEGREE}")));
    }
    Ok(())
}

pub fn check_lift_flags(order: u32, degree: u32) -> Result<()> {
    if order > MAX_LIFT_ORDER {
        return Err(Error::Precondition(format!("--order must be at most {MAX_LIFT_ORDER} for lift")));
    }
    check_field_flags(order, degree)
}

pub fn global_fields_section(inputs: &Inputs, order: u32, degree: u32) -> Result<Section> {
    check_field_flags(order, degree)?;
    let mut s = Section::default();
    let tr = inputs.family.primary_transition()?.clone();
    let space = solve_global_fields(order, degree, &tr)?;
    s.timed("global_fields.dimension", || {
        let expected = 7 * (order as usize + 1);
        let basis: Vec<Value> = space
            .basis
            .iter()
            .enumerate()
            .map(|(n, f)| {
                let comps: Value =
                    f.derivation().components().map(|(v, c)| (v.name(), json!(c.canonical_string()))).collect();
                json!({"direction": Direction::ALL[n % 7].label(), "t_power": n / 7, "field_w": comps})
            })
            .collect();
        Ok((
            Status::from_bool(space.dimension() == expected),
            json!({
                "order": order,
                "degree": degree,
                "dimension": space.dimension(),
                "expected": expected,
                "rank": space.rank,
                "rank_by_columns": space.rank_by_columns,
                "equations": space.equations,
                "basis": basis,
            }),
        ))
    })?;
    s.timed("global_fields.shape_identities", || {
        let mut failures = Vec::new();
        let mut count = 0;
        for (n, f) in space.basis.iter().enumerate() {
            for c in verify_shape_identities(f, &tr)? {
                count += 1;
                if !c.passed() {
                    failures.push(
                        json!({"basis_element": n, "identity": c.name, "residual": c.residual.canonical_string()}),
                    );
                }
            }
        }
        Ok((Status::from_bool(failures.is_empty()), json!({"identities_checked": count, "failures": failures})))
    })?;
    s.timed("global_fields.fiber_dimension", || {
        let at_zero = h0_dimension(&tr, degree)?;
        let at_one = fiber_field_dimension(&int(1), degree, &tr)?;
        let at_two = fiber_field_dimension(&int(2), degree, &tr)?;
        Ok((
            Status::from_bool(at_zero == 7 && at_one == 6 && at_two == 6),
            json!({"tau_0": at_zero, "tau_1": at_one, "tau_2": at_two}),
        ))
    })?;
    Ok(s)
}

pub fn cohomology_section(inputs: &Inputs, windows: &[Window]) -> Result<Section> {
    let mut s = Section::default();
    let tr = inputs.family.primary_transition()?.clone();
    s.timed("cohomology.h0", || {
        let h0 = h0_dimension(&tr, 5)?;
        Ok((Status::from_bool(h0 == 7), json!({"dimension": h0, "expected": 7})))
    })?;
    let mut stabilized = None;
    s.timed("cohomology.h1", || {
        let h1 = h1_dimension(&tr, windows)?;
        stabilized = Some(h1.stabilized);
        let ok = h1.per_window.iter().all(|x| x.1 == 1) && h1.stabilized != Some(false);
        let per: Vec<Value> =
            h1.per_window.iter().map(|(w, d)| json!({"window": w.to_string(), "dimension": d})).collect();
        Ok((
            Status::from_bool(ok),
            json!({"per_window": per, "stabilized": h1.stabilized, "dimension": h1.dimension()}),
        ))
    })?;
    if stabilized == Some(None) {
        s.warnings.push(format!("H1 computed in {} window(s); stabilization needs at least three", windows.len()));
    }
    s.timed("cohomology.kodaira_spencer", || {
        let ks = kodaira_spencer_cocycle(&tr)?;
        let boundary = is_coboundary(&tr, &ks.overlap_field, 8)?;
        Ok((
            Status::from_bool(!boundary && !ks.overlap_field.is_zero()),
            json!({
                "overlap_field": ks.overlap_field.to_string(),
                "primed_form": ks.primed_form.to_string(),
                "multiple_of_v_dy": ks.multiple.as_ref().map(fmt_rational),
                "is_coboundary": boundary,
            }),
        ))
    })?;
    Ok(s)
}

pub fn brackets_section(inputs: &Inputs) -> Result<Section> {
    let mut s = Section::default();
    let tr = inputs.family.primary_transition()?.clone();
    let f = generate_fundamental_fields(&tr)?;
    s.timed("brackets.relations", || {
        let r = verify_bracket_table(&f, &inputs.table);
        let fields: Vec<Value> = f
            .chart1
            .iter()
            .zip(&f.chart2)
            .enumerate()
            .map(|(i, (a, b))| json!({"field": format!("E'{}", i + 1), "w": a.derivation().to_string(), "w_prime": b.derivation().to_string()}))
            .collect();
        Ok((
            Status::from_bool(r.passed()),
            json!({
                "passed": r.passed_count(),
                "total": r.relations.len(),
                "sign_flipped": r.sign_flipped,
                "fields": fields,
                "relations": r.relations,
            }),
        ))
    })?;
    s.timed("brackets.jacobi", || {
        let bad = inputs.table.jacobi_violations();
        Ok((Status::from_bool(bad.is_empty()), json!({"violations": bad})))
    })?;
    s.timed("brackets.filtration", || {
        let r = verify_filtration_facts(inputs.seed, 4)?;
        let failures: Vec<_> = r.samples.iter().filter(|x| !x.passed).collect();
        Ok((Status::from_bool(r.passed()), json!({"samples": r.samples.len(), "failures": failures})))
    })?;
    Ok(s)
}

pub fn lift_section(inputs: &Inputs, order: u32, degree: u32) -> Result<Section> {
    check_lift_flags(order, degree)?;
    let mut s = Section::default();
    let tr = inputs.family.primary_transition()?.clone();
    let p = LiftProblem::with_table(inputs.table.clone(), order, degree, &tr)?;
    let start = Instant::now();
    let report = run_lift(&p)?;
    let lift_time = start.elapsed().as_secs_f64();

    let orders: Vec<Value> = report
        .orders
        .iter()
        .map(|o| match &o.status {
            OrderStatus::Solvable { new_parameters, rank, rank_by_columns, equations, rhs_degree } => json!({
                "order": o.order,
                "status": Status::Solvable,
                "new_parameters": new_parameters,
                "rank": rank,
                "rank_by_columns": rank_by_columns,
                "equations": equations,
                "rhs_degree": rhs_degree,
            }),
            OrderStatus::Obstructed => json!({"order": o.order, "status": Status::Obstructed}),
        })
        .collect();
    let labels: Value = report
        .lift
        .labels
        .iter()
        .map(|(v, l)| (v.name(), json!(format!("E{} {} t^{}", l.field, l.direction.label(), l.order))))
        .collect();
    let certificate = report.certificate.as_ref().map(|c| {
        json!({
            "order": c.order,
            "equations": c.equations.labels.len(),
            "unknowns": c.equations.unknowns.len(),
            "left_null_rows": c.left_null_rows.iter().map(|row| {
                row.iter().map(|(k, q)| json!([k, fmt_rational(q)])).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "parameter_system": c.parameter_system.iter().map(|p| p.canonical_string()).collect::<Vec<_>>(),
            "groebner_basis": c.groebner_certificate.canonical_strings(),
            "monomial_order": c.groebner_certificate.order.to_string(),
            "lex_agrees": c.lex_agrees,
        })
    });
    let status = if report.obstructed() { Status::Obstructed } else { Status::Solvable };
    s.checks.push(Check {
        id: "lift.result".into(),
        status,
        details: json!({
            "target_order": order,
            "sign_flipped": p.sign_flipped,
            "orders": orders,
            "free_parameters": report.lift.parameters.iter().map(|v| v.name()).collect::<Vec<_>>(),
            "parameter_labels": labels,
            "certificate": certificate,
        }),
        wall_time: lift_time,
    });

    if let Some(cert) = &report.certificate {
        s.timed("lift.certificate", || {
            Ok((
                Status::from_bool(cert.obstructs() && cert.lex_agrees),
                json!({"groebner_basis_is_one": cert.obstructs(), "lex_agrees": cert.lex_agrees}),
            ))
        })?;
        s.timed("lift.soundness", || {
            let runs = sample_consistency(&p, &report.lift, cert.order, SOUNDNESS_SAMPLES, inputs.seed)?;
            let inconsistent = runs.iter().filter(|ok| !**ok).count();
            Ok((
                Status::from_bool(inconsistent == runs.len()),
                json!({"samples": runs.len(), "inconsistent": inconsistent}),
            ))
        })?;
    }
    if report.lift.order >= 1 {
        s.timed("lift.residuals", || {
            let particular = report.lift.particular();
            if !particular.conditions.is_empty() {
                return Ok((Status::Pass, json!({"skipped": "particular member violates the parameter conditions"})));
            }
            let res = relation_residuals(&p, &particular)?;
            let failures: Vec<_> = res.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
            Ok((
                Status::from_bool(failures.is_empty()),
                json!({"order": report.lift.order, "relations": res.len(), "failures": failures}),
            ))
        })?;
        s.timed("lift.base_components", || {
            let b = base_component_analysis(&p, &report.lift);
            let k0 = (1..=p.rank()).all(|i| b.get(i, 0).forced_zero);
            let a1 = [1, 2, 4].iter().all(|&i| b.get(i, 1).forced_zero);
            let coeffs: Vec<Value> = b
                .coefficients
                .iter()
                .map(|c| json!({"field": c.field, "power": c.power, "value": c.value.canonical_string(), "forced_zero": c.forced_zero}))
                .collect();
            Ok((
                Status::from_bool(k0 && a1),
                json!({"order": b.order, "k_at_zero_vanishes": k0, "a1_of_k1_k2_k4_vanish": a1, "coefficients": coeffs}),
            ))
        })?;
    }
    Ok(s)
}
