//! Cech cohomology of the tangent sheaf of the central fiber.

use hirzebruch::charts::GluedFamily;
use hirzebruch::global_fields::{h0_dimension, h1_dimension, is_coboundary, kodaira_spencer_cocycle, Window};

fn main() -> hirzebruch::Result<()> {
    let tr = GluedFamily::w_family().transitions[0].clone();
    println!("h0 = {}", h0_dimension(&tr, 6)?);
    let h1 = h1_dimension(&tr, &Window::default_sweep())?;
    for (w, d) in &h1.per_window {
        println!("h1 on window {w} = {d}");
    }
    println!("stabilized: {:?}", h1.stabilized);
    let ks = kodaira_spencer_cocycle(&tr)?;
    println!("Kodaira-Spencer cocycle {}", ks.overlap_field);
    println!("is a coboundary: {}", is_coboundary(&tr, &ks.overlap_field, 8)?);
    Ok(())
}
