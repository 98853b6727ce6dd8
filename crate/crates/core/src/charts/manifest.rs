//! Plain-text family manifests.
//!
//! ```text
//! chart <name> t v y
//! transition <source> <target>
//! forward <var> = <expr>          # target coordinate in source coordinates
//! inverse <var> = <expr>          # source coordinate in target coordinates
//! ambient x y z | u v | t         # projective groups of the ambient space
//! hypersurface <name> = <expr>    # in the ambient coordinates
//! embedding <hypersurface> <chart> = <expr>, ... | ... | ...
//! trivialization <chart> = <expr>, ... | ...
//! ```
//!
//! `#` starts a comment. `forward`/`inverse` lines attach to the most recent
//! `transition`.

use std::collections::BTreeMap;
use std::path::Path;

use super::{Chart, Transition, CHART_COORDS};
use crate::error::{Error, Result};
use crate::symbolic::{SparseExpr, Var};

const STOCK_MANIFEST: &str = include_str!("../../fixtures/w_family.manifest");

/// A map into a product of projective spaces (and affine lines, as groups of
/// size one), one expression list per factor.
pub type ProjectiveMap = Vec<Vec<SparseExpr>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypersurface {
    pub name: String,
    pub equation: SparseExpr,
    pub embeddings: BTreeMap<String, ProjectiveMap>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmbeddedModel {
    pub ambient: Vec<Vec<Var>>,
    pub hypersurfaces: Vec<Hypersurface>,
    pub trivializations: BTreeMap<String, ProjectiveMap>,
}

impl EmbeddedModel {
    pub fn hypersurface(&self, name: &str) -> Option<&Hypersurface> {
        self.hypersurfaces.iter().find(|h| h.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedFamily {
    pub charts: Vec<Chart>,
    pub transitions: Vec<Transition>,
    pub base_variable: Var,
    pub model: Option<EmbeddedModel>,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Manifest(format!("line {line}: {msg}"))
}

fn parse_expr_at(line: usize, s: &str) -> Result<SparseExpr> {
    s.trim().parse::<SparseExpr>().map_err(|e| bad(line, e))
}

fn parse_var(line: usize, s: &str) -> Result<Var> {
    Var::from_name(s.trim()).ok_or_else(|| bad(line, format!("unknown variable `{}`", s.trim())))
}

fn parse_map(line: usize, s: &str) -> Result<ProjectiveMap> {
    s.split('|').map(|g| g.split(',').map(|e| parse_expr_at(line, e)).collect()).collect()
}

fn split_eq(line: usize, s: &str) -> Result<(String, String)> {
    let (l, r) = s.split_once('=').ok_or_else(|| bad(line, "expected `=`"))?;
    Ok((l.trim().to_string(), r.trim().to_string()))
}

impl GluedFamily {
    /// The stock two-chart family shipped with the crate.
    pub fn w_family() -> Self {
        Self::from_manifest(STOCK_MANIFEST).expect("stock manifest parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_manifest(&text)
    }

    pub fn from_manifest(text: &str) -> Result<Self> {
        let mut charts: Vec<Chart> = Vec::new();
        let mut transitions: Vec<Transition> = Vec::new();
        let mut model = EmbeddedModel::default();
        let mut has_model = false;

        for (k, raw) in text.lines().enumerate() {
            let ln = k + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match kw {
                "chart" => {
                    let mut it = rest.split_whitespace();
                    let name = it.next().ok_or_else(|| bad(ln, "chart needs a name"))?;
                    let coords: Vec<Var> = it.map(|c| parse_var(ln, c)).collect::<Result<_>>()?;
                    if coords != CHART_COORDS {
                        return Err(bad(ln, "charts must use the coordinates `t v y`"));
                    }
                    if charts.iter().any(|c| c.name == name) {
                        return Err(bad(ln, format!("duplicate chart `{name}`")));
                    }
                    charts.push(Chart::new(name));
                }
                "transition" => {
                    let names: Vec<&str> = rest.split_whitespace().collect();
                    let [src, dst] = names[..] else {
                        return Err(bad(ln, "transition needs a source and a target chart"));
                    };
                    for n in [src, dst] {
                        if !charts.iter().any(|c| c.name == n) {
                            return Err(bad(ln, format!("unknown chart `{n}`")));
                        }
                    }
                    transitions.push(Transition::new(src, dst, BTreeMap::new(), BTreeMap::new()));
                }
                "forward" | "inverse" => {
                    let tr = transitions.last_mut().ok_or_else(|| bad(ln, "rule outside a transition"))?;
                    let (lhs, rhs) = split_eq(ln, rest)?;
                    let var = parse_var(ln, &lhs)?;
                    if !CHART_COORDS.contains(&var) {
                        return Err(bad(ln, format!("`{var}` is not a chart coordinate")));
                    }
                    let expr = parse_expr_at(ln, &rhs)?;
                    let rules = if kw == "forward" { &mut tr.rules } else { &mut tr.inverse_rules };
                    if rules.insert(var, expr).is_some() {
                        return Err(bad(ln, format!("duplicate rule for `{var}`")));
                    }
                }
                "ambient" => {
                    has_model = true;
                    model.ambient = rest
                        .split('|')
                        .map(|g| g.split_whitespace().map(|v| parse_var(ln, v)).collect())
                        .collect::<Result<_>>()?;
                }
                "hypersurface" => {
                    has_model = true;
                    let (name, eq) = split_eq(ln, rest)?;
                    model.hypersurfaces.push(Hypersurface {
                        name,
                        equation: parse_expr_at(ln, &eq)?,
                        embeddings: BTreeMap::new(),
                    });
                }
                "embedding" => {
                    let (lhs, rhs) = split_eq(ln, rest)?;
                    let names: Vec<&str> = lhs.split_whitespace().collect();
                    let [hyp, chart] = names[..] else {
                        return Err(bad(ln, "embedding needs a hypersurface and a chart"));
                    };
                    if !charts.iter().any(|c| c.name == chart) {
                        return Err(bad(ln, format!("unknown chart `{chart}`")));
                    }
                    let map = parse_map(ln, &rhs)?;
                    let h = model
                        .hypersurfaces
                        .iter_mut()
                        .find(|h| h.name == hyp)
                        .ok_or_else(|| bad(ln, format!("unknown hypersurface `{hyp}`")))?;
                    h.embeddings.insert(chart.to_string(), map);
                }
                "trivialization" => {
                    has_model = true;
                    let (chart, rhs) = split_eq(ln, rest)?;
                    if !charts.iter().any(|c| c.name == chart) {
                        return Err(bad(ln, format!("unknown chart `{chart}`")));
                    }
                    model.trivializations.insert(chart, parse_map(ln, &rhs)?);
                }
                other => return Err(bad(ln, format!("unknown keyword `{other}`"))),
            }
        }

        if charts.is_empty() {
            return Err(Error::Manifest("empty manifest: no charts declared".into()));
        }
        for tr in &transitions {
            if tr.rules.is_empty() {
                return Err(Error::Manifest(format!("transition {} -> {} has no rules", tr.source, tr.target)));
            }
            if tr.rules.keys().ne(tr.inverse_rules.keys()) {
                return Err(Error::Manifest(format!(
                    "transition {} -> {}: forward and inverse rules cover different coordinates",
                    tr.source, tr.target
                )));
            }
        }
        for h in &model.hypersurfaces {
            let width: usize = model.ambient.iter().map(Vec::len).sum();
            for (chart, map) in &h.embeddings {
                let n: usize = map.iter().map(Vec::len).sum();
                if n > width || map.iter().zip(&model.ambient).any(|(g, a)| g.len() != a.len()) {
                    return Err(Error::Manifest(format!("embedding {} on {chart} does not fit the ambient", h.name)));
                }
            }
        }

        Ok(Self { charts, transitions, base_variable: Var::T, model: has_model.then_some(model) })
    }

    pub fn chart(&self, name: &str) -> Option<&Chart> {
        self.charts.iter().find(|c| c.name == name)
    }

    pub fn transition(&self, source: &str, target: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.source == source && t.target == target)
    }

    /// The first declared transition; the stock family has exactly one.
    pub fn primary_transition(&self) -> Result<&Transition> {
        self.transitions.first().ok_or_else(|| Error::Manifest("no transition declared".into()))
    }
}
