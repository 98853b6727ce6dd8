//! Čech cohomology of the tangent sheaf of the central fiber for the
//! two-chart cover `{W0, W0'}`.
//!
//! Overlap sections are written in `W0` coordinates as
//! `sum v^i (p d/dv + (q2 y^2 + q1 y + q0) d/dy)` with `i` ranging over all
//! integers. The coboundary of a pair of regular fields `(V, V')` is
//! `V - V'` with `V'` pushed to `W0`. Since the overlap space is infinite
//! dimensional, `H^1` is computed in finite windows of `v`-exponents.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use super::Slot;
use crate::charts::{pushforward, Derivation, Transition};
use crate::error::{Error, Result};
use crate::linalg::{self, matrix_from_columns, RationalMatrix};
use crate::symbolic::{Monomial, Rational, Var};

/// Row label of an overlap section: `(component, v^i y^k)`.
pub type OverlapKey = (Var, Monomial);

/// An inclusive range of `v`-exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: i32,
    pub hi: i32,
}

impl Window {
    pub fn symmetric(w: i32) -> Self {
        Self { lo: -w, hi: w }
    }

    pub fn contains(&self, i: i32) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn covers(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Dimension of the windowed overlap space (four fiber directions per
    /// exponent).
    pub fn overlap_dimension(&self) -> usize {
        4 * (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn default_sweep() -> Vec<Window> {
        (3..=5).map(Window::symmetric).collect()
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

impl FromStr for Window {
    type Err = Error;

    /// `"w"` for `[-w, w]`, or `"lo:hi"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("bad window `{s}`; expected `w` or `lo:hi`"));
        let w = match s.split_once(':') {
            Some((a, b)) => {
                Window { lo: a.trim().parse().map_err(|_| bad())?, hi: b.trim().parse().map_err(|_| bad())? }
            }
            None => Window::symmetric(s.trim().parse::<i32>().map_err(|_| bad())?.abs()),
        };
        if w.lo > w.hi {
            return Err(bad());
        }
        Ok(w)
    }
}

fn keyed(d: &Derivation) -> BTreeMap<OverlapKey, Rational> {
    d.components().flat_map(|(v, c)| c.terms().map(move |(m, q)| ((v, m.clone()), q.clone()))).collect()
}

/// Columns of the coboundary map on pairs `(V, V')` of regular fields of
/// `v`-degree at most `degree`: first the `4(D+1)` unknowns of `V`, then
/// those of `V'`.
pub fn coboundary_matrix(tr: &Transition, degree: u32) -> Result<Vec<BTreeMap<OverlapKey, Rational>>> {
    let back = tr.at_t_zero()?.inverse();
    let mut cols = Vec::new();
    for slot in Slot::ALL {
        for d in 0..=degree as i32 {
            cols.push(keyed(&slot.unit(d, 0).map(|c| c.specialize(Var::T, &Rational::zero()))));
        }
    }
    for slot in Slot::ALL {
        for d in 0..=degree as i32 {
            let unit = slot.unit(d, 0).map(|c| c.specialize(Var::T, &Rational::zero()));
            let pushed = pushforward(&unit, &back)?;
            cols.push(keyed(&pushed.scale(&-Rational::from_integer(1.into()))));
        }
    }
    Ok(cols)
}

/// Number of global fields on the central fiber, as the kernel of the
/// coboundary map.
pub fn h0_dimension(tr: &Transition, degree: u32) -> Result<usize> {
    let cols = coboundary_matrix(tr, degree)?;
    Ok(linalg::kernel_basis(&matrix_from_columns(&cols).0).len())
}

#[derive(Clone, Debug)]
pub struct H1Result {
    pub per_window: Vec<(Window, usize)>,
    /// `Some` only when at least three windows were computed.
    pub stabilized: Option<bool>,
}

impl H1Result {
    pub fn dimension(&self) -> Option<usize> {
        self.per_window.last().map(|(_, d)| *d)
    }
}

/// `H^1` in a window: the windowed overlap space modulo coboundaries landing
/// in it, optionally with some directions removed from the space.
pub fn h1_dimension_excluding(tr: &Transition, window: Window, excluded: &[OverlapKey]) -> Result<usize> {
    let degree = (window.lo.abs().max(window.hi) + 4) as u32;
    let cols = coboundary_matrix(tr, degree)?;
    let (m, keys) = matrix_from_columns(&cols);
    let inside = |k: &OverlapKey| {
        let i = k.1.exponent(Var::V);
        window.contains(i) && !excluded.contains(k)
    };
    let rows_in: Vec<usize> = (0..keys.len()).filter(|&r| inside(&keys[r])).collect();
    let rows_out: Vec<usize> = (0..keys.len()).filter(|&r| !inside(&keys[r])).collect();
    let pick = |rows: &[usize]| {
        let mut out = RationalMatrix::zeros(rows.len(), m.cols());
        for (i, &r) in rows.iter().enumerate() {
            for c in 0..m.cols() {
                out.set(i, c, m.get(r, c).clone());
            }
        }
        out
    };
    let kernel = linalg::kernel_basis(&pick(&rows_out));
    let m_in = pick(&rows_in);
    let mut image = RationalMatrix::zeros(rows_in.len(), kernel.len());
    for (j, k) in kernel.iter().enumerate() {
        for (i, x) in m_in.mul_vec(k)?.into_iter().enumerate() {
            image.set(i, j, x);
        }
    }
    let excluded_inside = excluded.iter().filter(|k| window.contains(k.1.exponent(Var::V))).count();
    Ok(window.overlap_dimension() - excluded_inside - linalg::rank(&image))
}

/// `H^1` over a sweep of windows, each of which must contain `[-3, 3]`.
pub fn h1_dimension(tr: &Transition, windows: &[Window]) -> Result<H1Result> {
    let minimal = Window::symmetric(3);
    let mut per_window = Vec::new();
    for w in windows {
        if !w.covers(&minimal) {
            return Err(Error::Precondition(format!("window {w} must contain {minimal}")));
        }
        per_window.push((*w, h1_dimension_excluding(tr, *w, &[])?));
    }
    let stabilized = (per_window.len() >= 3).then(|| per_window.windows(2).all(|p| p[0].1 == p[1].1));
    Ok(H1Result { per_window, stabilized })
}

/// The class of the first-order deformation in `H^1`.
#[derive(Clone, Debug)]
pub struct CechCocycle {
    /// The overlap field in `W0` coordinates.
    pub overlap_field: Derivation,
    /// The same field in `W0'` coordinates.
    pub primed_form: Derivation,
    /// `c` with `primed_form = c * v * d/dy'`, where `v = 1/v'` is the `W0`
    /// base coordinate, if the field has that form.
    pub multiple: Option<Rational>,
}

impl CechCocycle {
    pub fn zero() -> Self {
        Self { overlap_field: Derivation::zero(), primed_form: Derivation::zero(), multiple: None }
    }
}

/// Glues the two charts over the dual numbers (`t` replaced by `eps`,
/// `eps^2 = 0`) and compares the two lifts of `d/deps` on the overlap.
pub fn kodaira_spencer_cocycle(tr: &Transition) -> Result<CechCocycle> {
    let first = tr.first_order_in(Var::Eps)?;
    let d_eps = Derivation::partial(Var::Eps);
    let diff = pushforward(&d_eps, &first)?.sub(&d_eps);
    let primed_form = diff.map(|c| c.specialize(Var::Eps, &Rational::zero()));
    let overlap_field = pushforward(&primed_form, &tr.at_t_zero()?.inverse())?;

    let cy = primed_form.component(Var::Y);
    let only_fiber = primed_form.components().all(|(v, _)| v == Var::Y);
    let m = Monomial::pow(Var::V, -1);
    let multiple = (only_fiber && cy.len() == 1 && !cy.coefficient_of(&m).is_zero()).then(|| cy.coefficient_of(&m));
    Ok(CechCocycle { overlap_field, primed_form, multiple })
}

/// Whether the overlap field (in `W0` coordinates) is `V - V'` for regular
/// `V, V'` of `v`-degree at most `degree`.
pub fn is_coboundary(tr: &Transition, field: &Derivation, degree: u32) -> Result<bool> {
    let mut cols = coboundary_matrix(tr, degree)?;
    let n = cols.len();
    cols.push(keyed(field));
    let (m, _) = matrix_from_columns(&cols);
    let a = RationalMatrix::from_rows(&(0..m.rows()).map(|r| m.row(r)[..n].to_vec()).collect::<Vec<_>>())?;
    let rhs = m.column(n);
    if m.rows() == 0 {
        return Ok(true);
    }
    Ok(linalg::solve_affine(&a, &rhs)?.is_consistent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::GluedFamily;
    use crate::symbolic::{int, SparseExpr};

    fn fiber_term(c: i64, v_exp: i32) -> Derivation {
        Derivation::from_components([(Var::Y, SparseExpr::monomial(c, &[(Var::V, v_exp)]))])
    }

    fn tr() -> Transition {
        GluedFamily::w_family().transitions[0].clone()
    }

    #[test]
    fn kodaira_spencer_class() {
        let ks = kodaira_spencer_cocycle(&tr()).unwrap();
        assert!(ks.overlap_field.component(Var::V).is_zero());
        assert!(ks.overlap_field.component(Var::T).is_zero());
        assert_eq!(ks.primed_form, fiber_term(-1, -1));
        assert_eq!(ks.overlap_field, fiber_term(-1, -1));
        assert_eq!(ks.multiple, Some(int(-1)));
        assert!(!is_coboundary(&tr(), &ks.overlap_field, 8).unwrap());
    }

    #[test]
    fn coboundary_examples() {
        assert!(is_coboundary(&tr(), &Derivation::zero(), 4).unwrap());
        let vdv = Derivation::from_components([(Var::V, "v".parse().unwrap())]);
        assert!(is_coboundary(&tr(), &vdv, 4).unwrap());
    }

    #[test]
    fn h0_and_h1() {
        assert_eq!(h0_dimension(&tr(), 5).unwrap(), 7);
        let r = h1_dimension(&tr(), &Window::default_sweep()).unwrap();
        assert_eq!(r.per_window.iter().map(|x| x.1).collect::<Vec<_>>(), vec![1, 1, 1]);
        assert_eq!(r.stabilized, Some(true));
        let single = h1_dimension(&tr(), &[Window::symmetric(3)]).unwrap();
        assert_eq!(single.stabilized, None);
        assert!(h1_dimension(&tr(), &[Window::symmetric(2)]).is_err());
    }

    #[test]
    fn excluding_the_class_kills_h1() {
        let key = (Var::Y, Monomial::pow(Var::V, -1));
        assert_eq!(h1_dimension_excluding(&tr(), Window::symmetric(3), &[key]).unwrap(), 0);
    }

    #[test]
    fn window_parsing() {
        assert_eq!("3".parse::<Window>().unwrap(), Window::symmetric(3));
        assert_eq!("-4:5".parse::<Window>().unwrap(), Window { lo: -4, hi: 5 });
        assert!("5:-4".parse::<Window>().is_err());
        assert!("x".parse::<Window>().is_err());
    }
}
