//! The seven-dimensional Lie algebra of the automorphism group of the central
//! fiber: its basis, structure constants and fundamental vector fields.

mod fields;

pub use fields::{
    base_component, generate_fundamental_fields, order0_coordinates, span_coordinates, verify_bracket_table,
    verify_filtration_facts, BracketReport, FiltrationReport, FundamentalFields, RelationCheck,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::symbolic::{fmt_rational, int, Rational, SparseExpr, Var};

const STOCK_TABLE: &str = include_str!("../../fixtures/structure_constants.table");

/// A generator `(a0, a1, a2) x [[a, b], [c, d]]` of `C^3 x M(2, C)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub translation: [i64; 3],
    pub matrix: [[i64; 2]; 2],
}

/// The standard basis `e1, ..., e7`.
pub fn lie_algebra_basis() -> [Generator; 7] {
    let tr = |t: [i64; 3]| Generator { translation: t, matrix: [[0, 0], [0, 0]] };
    let mx = |m: [[i64; 2]; 2]| Generator { translation: [0, 0, 0], matrix: m };
    [
        tr([1, 0, 0]),
        tr([0, 0, 1]),
        mx([[0, 0], [1, 0]]),
        tr([0, 1, 0]),
        mx([[1, 0], [0, 0]]),
        mx([[0, 0], [0, 1]]),
        mx([[0, 1], [0, 0]]),
    ]
}

/// `[E_i, E_j] = sum_k c_ijk E_k`, stored for `i < j` (1-based), zero entries
/// omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    pub dimension: usize,
    table: BTreeMap<(usize, usize), Vec<(usize, Rational)>>,
}

impl StructureConstants {
    pub fn zero(dimension: usize) -> Self {
        Self { dimension, table: BTreeMap::new() }
    }

    pub fn stock() -> Self {
        Self::parse(STOCK_TABLE).expect("stock table parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Lines `[i,j] = c Ek + ...`; `#` comments. Every pair `i < j` of
    /// `1..=7` must appear exactly once.
    pub fn parse(text: &str) -> Result<Self> {
        let n = 7;
        let mut table = BTreeMap::new();
        let mut seen = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Table(format!("line {}: {m}", ln + 1));
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| bad("expected `=`"))?;
            let inner = lhs
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| bad("expected `[i,j]`"))?;
            let (i, j) = inner.split_once(',').ok_or_else(|| bad("expected `[i,j]`"))?;
            let i: usize = i.trim().parse().map_err(|_| bad("bad index"))?;
            let j: usize = j.trim().parse().map_err(|_| bad("bad index"))?;
            if !(1..=n).contains(&i) || !(1..=n).contains(&j) || i >= j {
                return Err(bad("indices must satisfy 1 <= i < j <= 7"));
            }
            if seen.insert((i, j), ()).is_some() {
                return Err(bad("duplicate bracket"));
            }
            let expr: SparseExpr = rhs.replace('E', "p").parse().map_err(|e| bad(&format!("{e}")))?;
            let mut terms = Vec::new();
            for (m, c) in expr.terms() {
                match m.factors() {
                    [(Var::Param(k), 1)] if (1..=n as u32).contains(k) => terms.push((*k as usize, c.clone())),
                    _ => return Err(bad("right-hand side must be a linear combination of E1..E7")),
                }
            }
            if !terms.is_empty() {
                table.insert((i, j), terms);
            }
        }
        if seen.len() != n * (n - 1) / 2 {
            return Err(Error::Table(format!("expected 21 brackets, found {}", seen.len())));
        }
        Ok(Self { dimension: n, table })
    }

    /// `[E_i, E_j]` for any `i, j`, using antisymmetry.
    pub fn get(&self, i: usize, j: usize) -> Vec<(usize, Rational)> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Vec::new(),
            Less => self.table.get(&(i, j)).cloned().unwrap_or_default(),
            Greater => self.get(j, i).into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, terms: Vec<(usize, Rational)>) {
        assert!(i < j);
        let terms: Vec<_> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            self.table.remove(&(i, j));
        } else {
            self.table.insert((i, j), terms);
        }
    }

    /// All pairs `i < j`, zero brackets included.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.dimension;
        (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
    }

    fn dense(&self, i: usize, j: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dimension + 1];
        for (k, c) in self.get(i, j) {
            v[k] += c;
        }
        v
    }

    /// Triples `(i, j, k)` where the Jacobi identity fails.
    pub fn jacobi_violations(&self) -> Vec<(usize, usize, usize)> {
        let n = self.dimension;
        let mut bad = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                for k in j + 1..=n {
                    // [[a,b],c] + [[b,c],a] + [[c,a],b]
                    let mut acc = vec![Rational::zero(); n + 1];
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        for (l, x) in self.dense(a, b).iter().enumerate() {
                            if x.is_zero() {
                                continue;
                            }
                            for (m, y) in self.dense(l, c).iter().enumerate() {
                                acc[m] += x * y;
                            }
                        }
                    }
                    if acc.iter().any(|x| !x.is_zero()) {
                        bad.push((i, j, k));
                    }
                }
            }
        }
        bad
    }
}

/// Renders `sum c Ek` as text, `0` for the empty sum.
pub fn format_combination(terms: &[(usize, Rational)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = terms
        .iter()
        .map(|(k, c)| if *c == int(1) { format!("E{k}") } else { format!("{} E{k}", fmt_rational(c)) })
        .collect();
    parts.join(" + ")
}

impl fmt::Display for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.pairs() {
            writeln!(f, "[{i},{j}] = {}", format_combination(&self.get(i, j)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stock_table() {
        let s = StructureConstants::stock();
        assert_eq!(s.get(1, 3), vec![(4, int(-2))]);
        assert_eq!(s.get(3, 7), vec![(5, int(1)), (6, int(-1))]);
        assert_eq!(s.get(7, 6), vec![(7, int(-1))]);
        assert!(s.get(5, 6).is_empty());
        assert!(s.jacobi_violations().is_empty());
    }

    #[test]
    fn round_trips_through_display() {
        let s = StructureConstants::stock();
        assert_eq!(StructureConstants::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(StructureConstants::parse("[1,2] = 0").is_err());
        let t = STOCK_TABLE.replace("[6,7] = E7", "[6,7] = E8");
        assert!(StructureConstants::parse(&t).is_err());
        let t = STOCK_TABLE.replace("[6,7] = E7", "[7,6] = E7");
        assert!(StructureConstants::parse(&t).is_err());
    }

    #[test]
    fn corrupted_sign_breaks_jacobi() {
        let t = STOCK_TABLE.replace("[3,4] = E2", "[3,4] = -E2");
        assert!(!StructureConstants::parse(&t).unwrap().jacobi_violations().is_empty());
    }
}
