//! Exact Laurent arithmetic, derivatives and substitution.

use hirzebruch::charts::{Derivation, GluedFamily};
use hirzebruch::symbolic::{rat, SparseExpr, Var};

fn main() -> hirzebruch::Result<()> {
    let f: SparseExpr = "v^-2 y + 3/2 t v - y^2".parse()?;
    let g: SparseExpr = "v + t".parse()?;
    println!("f       = {f}");
    println!("f * g   = {}", &f * &g);
    println!("df/dv   = {}", f.partial_derivative(Var::V));
    println!("f(t=1/3) = {}", f.specialize(Var::T, &rat(1, 3)));

    let tr = GluedFamily::w_family().transitions[0].clone();
    let moved = f.substitute(&tr.rules)?;
    println!("f in {} coordinates = {moved}", tr.target);
    println!("and back = {}", moved.substitute(&tr.inverse_rules)?);

    let d = Derivation::from_components([(Var::V, "v^2".parse()?), (Var::Y, "t v".parse()?)]);
    println!("D = {d}, D(f) = {}", d.apply(&f));
    let trunc = g.pow(4).with_truncation(Var::T, 2);
    println!("(v + t)^4 mod t^3 = {trunc}");
    Ok(())
}
