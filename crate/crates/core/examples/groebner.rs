//! Buchberger's algorithm and emptiness certificates.

use hirzebruch::groebner::{buchberger, certify_empty, normal_form, MonomialOrder, ParamPolynomial};

fn main() -> hirzebruch::Result<()> {
    let gens: Vec<ParamPolynomial> =
        ["x^2 + z^2 - 1", "x - z"].iter().map(|s| s.parse()).collect::<hirzebruch::Result<_>>()?;
    for order in [MonomialOrder::GrevLex, MonomialOrder::Lex] {
        let gb = buchberger(&gens, order);
        println!("{order:?}: {:?}", gb.canonical_strings());
        let f: ParamPolynomial = "x^3 z".parse()?;
        println!("  normal form of x^3 z: {}", normal_form(&f, &gb));
    }
    let bad: Vec<ParamPolynomial> =
        ["x z - 1", "x", "z^2 + 1"].iter().map(|s| s.parse()).collect::<hirzebruch::Result<_>>()?;
    let cert = certify_empty(&bad, MonomialOrder::GrevLex);
    println!("{{x z - 1, x, z^2 + 1}} has no common zero: {} (basis {:?})", cert.empty, cert.basis.canonical_strings());
    Ok(())
}
