//! Checks the chart transition of the W family and its surface models.

use hirzebruch::charts::{verify_surface_models, verify_transition_consistency, GluedFamily};

fn main() -> hirzebruch::Result<()> {
    let family = GluedFamily::w_family();
    let tr = family.primary_transition()?;
    for (x, r) in &tr.rules {
        println!("{x}' = {r}");
    }
    let consistency = verify_transition_consistency(tr, 20, 7)?;
    println!("transition consistency: {} ({} identities)", consistency.passed(), consistency.checks.len());
    let models = verify_surface_models(&family)?;
    println!("surface models: {} ({} identities)", models.passed(), models.checks.len());
    if let Some(r) = &models.trivialization_ratio {
        println!("trivialization ratio: {r}");
    }
    Ok(())
}
