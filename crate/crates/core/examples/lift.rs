//! Lifts the fundamental fields order by order in t until an obstruction.

use hirzebruch::charts::GluedFamily;
use hirzebruch::lifting::{run_lift, LiftProblem, OrderStatus};

fn main() -> hirzebruch::Result<()> {
    let tr = GluedFamily::w_family().transitions[0].clone();
    let target = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let problem = LiftProblem::stock(target, &tr)?;
    let report = run_lift(&problem)?;
    for o in &report.orders {
        match &o.status {
            OrderStatus::Solvable { new_parameters, rank, equations, .. } => {
                println!(
                    "order {}: solvable, rank {rank} of {equations} equations, {new_parameters} new parameters",
                    o.order
                )
            }
            OrderStatus::Obstructed => println!("order {}: obstructed", o.order),
        }
    }
    println!("free parameters: {:?}", report.lift.parameters.iter().map(|v| v.name()).collect::<Vec<_>>());
    if let Some(c) = &report.certificate {
        println!(
            "certificate at order {}: {} witness rows, basis {:?}, lex agrees: {}",
            c.order,
            c.left_null_rows.len(),
            c.groebner_certificate.canonical_strings(),
            c.lex_agrees
        );
    }
    Ok(())
}
