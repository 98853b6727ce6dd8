//! Fundamental vector fields of the group action and their bracket table.

use hirzebruch::charts::GluedFamily;
use hirzebruch::lie::{generate_fundamental_fields, verify_bracket_table, StructureConstants};

fn main() -> hirzebruch::Result<()> {
    let tr = GluedFamily::w_family().transitions[0].clone();
    let fields = generate_fundamental_fields(&tr)?;
    for i in 1..=7 {
        println!("E{i} = {}", fields.get(i));
    }
    let table = StructureConstants::stock();
    println!("jacobi violations: {}", table.jacobi_violations().len());
    let report = verify_bracket_table(&fields, &table);
    for r in report.relations.iter().filter(|r| !r.passed) {
        println!("failed [{},{}]: {}", r.i, r.j, r.residual);
    }
    println!("{}/{} relations hold", report.passed_count(), report.relations.len());
    Ok(())
}
