//! Solves for global vector fields on the family to a given order in t.

use hirzebruch::charts::GluedFamily;
use hirzebruch::global_fields::{fiber_field_dimension, h0_dimension, solve_global_fields, verify_shape_identities};
use hirzebruch::symbolic::int;

fn main() -> hirzebruch::Result<()> {
    let tr = GluedFamily::w_family().transitions[0].clone();
    let (order, degree) = (2, 5);
    let space = solve_global_fields(order, degree, &tr)?;
    println!("order {order}, degree {degree}: dimension {} from {} equations", space.dimension(), space.equations);
    for f in space.basis.iter().take(7) {
        let ok = verify_shape_identities(f, &tr)?.iter().all(|c| c.passed());
        println!("  {}   shape identities hold: {ok}", f.derivation());
    }
    println!("fields on the fiber t = 0: {}", h0_dimension(&tr, degree)?);
    for tau in [1, 2] {
        println!("fields on the fiber t = {tau}: {}", fiber_field_dimension(&int(tau), degree, &tr)?);
    }
    Ok(())
}
