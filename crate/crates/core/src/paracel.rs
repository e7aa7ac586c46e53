//! Paracels, smoots, compatible sets and twins, and the combinatorial
//! expansion of `M_ef(1)` built from them.
//!
//! A subset `F` of the unmarked edges is a *paracel* when `e` and `f` both
//! join the same two distinct components of the spanning subgraph `(V, F)`.
//! An unmarked edge outside `F` joining the same two components is a
//! *smoot* of `F`. For disjoint `β, γ`, a set `α` is *compatible* when it
//! avoids `β ∪ γ`, `γ + α` is a paracel, and every edge of `β` is a smoot of
//! `γ + α`. Two compatible sets are *twins* when their intersection is
//! compatible too.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::cluster::{m_poly, registry};
use crate::multigraph::{submasks, EdgeSet, Multigraph, Universe};
use crate::polyring::{MPoly, Monomial, PolyError, Rational, Registry};

#[derive(Debug, Clone, Error)]
pub enum ParacelError {
    #[error("edge set touches a marked edge")]
    TouchesMarked,
    #[error("β and γ overlap")]
    Overlap,
    #[error("{0} is not compatible with the given β, γ")]
    NotCompatible(String),
    #[error("{0} is not a paracel")]
    NotParacel(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A paracel with its two components and smoots.
///
/// `c1` is the component whose smallest vertex is smaller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParacelCert {
    pub set: EdgeSet,
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub smoots: EdgeSet,
}

/// Per-edge exponents over the full edge list, entries in `{0, 1, 2}`.
pub type EdgeExponents = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinFamily {
    pub beta: EdgeSet,
    pub gamma: EdgeSet,
    /// `A_{β,γ}` in ascending mask order.
    pub compatible: Vec<EdgeSet>,
    /// `B_{β,γ}`: each product `x^α x^α'` of twins, once.
    pub monomials: BTreeSet<EdgeExponents>,
}

/// Paracel data for every subset of the unmarked edges of one graph.
///
/// Subsets are addressed by dense index: bit `i` of the index stands for
/// the `i`-th unmarked edge.
pub(crate) struct ParacelIndex {
    unmarked: Vec<usize>,
    /// Smoot mask (full edge positions) of each paracel, `None` otherwise.
    smoots: Vec<Option<u64>>,
}

impl ParacelIndex {
    pub(crate) fn new(g: &Multigraph) -> Self {
        let unmarked: Vec<usize> = (0..g.edge_count())
            .filter(|&i| i != g.e() && i != g.f())
            .collect();
        let smoots = (0..1u64 << unmarked.len())
            .map(|dense| {
                let mask = expand(&unmarked, dense);
                paracel_components(g, mask).map(|(_, _, s)| s)
            })
            .collect();
        Self { unmarked, smoots }
    }

    fn dense(&self, mask: u64) -> u64 {
        self.unmarked
            .iter()
            .enumerate()
            .fold(0, |acc, (bit, &edge)| acc | (mask >> edge & 1) << bit)
    }

    fn smoots_of(&self, mask: u64) -> Option<u64> {
        self.smoots[self.dense(mask) as usize]
    }

    pub(crate) fn compatible(&self, beta: u64, gamma: u64, alpha: u64) -> bool {
        alpha & (beta | gamma) == 0
            && self
                .smoots_of(gamma | alpha)
                .is_some_and(|s| beta & !s == 0)
    }

    fn compatible_sets(&self, beta: u64, gamma: u64, universe: u64) -> Vec<u64> {
        submasks(universe & !beta & !gamma)
            .filter(|&alpha| self.compatible(beta, gamma, alpha))
            .collect()
    }
}

fn expand(unmarked: &[usize], dense: u64) -> u64 {
    unmarked
        .iter()
        .enumerate()
        .fold(0, |acc, (bit, &edge)| acc | (dense >> bit & 1) << edge)
}

/// Labels of the two components joined by both `e` and `f` plus the smoot
/// mask, when `mask` (a subset of the unmarked edges) is a paracel.
fn paracel_components(g: &Multigraph, mask: u64) -> Option<(usize, usize, u64)> {
    if g.is_loop(g.e()) || g.is_loop(g.f()) {
        return None;
    }
    let labels = g
        .components(EdgeSet::from_mask(mask, Universe::Unmarked))
        .labels;
    let side = |edge: usize| {
        let edge = g.edge(edge);
        let (a, b) = (labels[edge.u], labels[edge.v]);
        (a.min(b), a.max(b))
    };
    let (c1, c2) = side(g.e());
    if c1 == c2 || side(g.f()) != (c1, c2) {
        return None;
    }
    let smoots = (0..g.edge_count())
        .filter(|&i| i != g.e() && i != g.f() && mask >> i & 1 == 0 && side(i) == (c1, c2))
        .fold(0u64, |acc, i| acc | 1 << i);
    Some((c1, c2, smoots))
}

fn require_unmarked(g: &Multigraph, sets: &[EdgeSet]) -> Result<(), ParacelError> {
    if sets.iter().all(|s| s.is_subset(g.unmarked_edges())) {
        Ok(())
    } else {
        Err(ParacelError::TouchesMarked)
    }
}

fn unmarked_set(mask: u64) -> EdgeSet {
    EdgeSet::from_mask(mask, Universe::Unmarked)
}

pub fn is_paracel(g: &Multigraph, set: EdgeSet) -> Result<Option<ParacelCert>, ParacelError> {
    require_unmarked(g, &[set])?;
    Ok(paracel_components(g, set.mask()).map(|(c1, c2, smoots)| {
        let labels = g.components(set).labels;
        let members = |label| {
            (0..g.vertex_count())
                .filter(|&v| labels[v] == label)
                .collect()
        };
        ParacelCert {
            set: unmarked_set(set.mask()),
            c1: members(c1),
            c2: members(c2),
            smoots: unmarked_set(smoots),
        }
    }))
}

/// Every paracel, in ascending mask order.
pub fn enumerate_paracels(g: &Multigraph) -> Vec<ParacelCert> {
    submasks(g.unmarked_mask())
        .filter_map(|mask| is_paracel(g, unmarked_set(mask)).expect("unmarked subset"))
        .collect()
}

fn check_pair(g: &Multigraph, beta: EdgeSet, gamma: EdgeSet) -> Result<(), ParacelError> {
    require_unmarked(g, &[beta, gamma])?;
    if beta.is_disjoint(gamma) {
        Ok(())
    } else {
        Err(ParacelError::Overlap)
    }
}

pub fn is_compatible(
    g: &Multigraph,
    beta: EdgeSet,
    gamma: EdgeSet,
    alpha: EdgeSet,
) -> Result<bool, ParacelError> {
    check_pair(g, beta, gamma)?;
    require_unmarked(g, &[alpha])?;
    if !alpha.is_disjoint(beta.union(gamma)) {
        return Ok(false);
    }
    Ok(paracel_components(g, gamma.mask() | alpha.mask())
        .is_some_and(|(_, _, smoots)| beta.mask() & !smoots == 0))
}

/// `A_{β,γ}` in ascending mask order.
pub fn enumerate_a(
    g: &Multigraph,
    beta: EdgeSet,
    gamma: EdgeSet,
) -> Result<Vec<EdgeSet>, ParacelError> {
    check_pair(g, beta, gamma)?;
    let index = ParacelIndex::new(g);
    Ok(index
        .compatible_sets(beta.mask(), gamma.mask(), g.unmarked_mask())
        .into_iter()
        .map(unmarked_set)
        .collect())
}

pub fn are_twins(
    g: &Multigraph,
    beta: EdgeSet,
    gamma: EdgeSet,
    alpha: EdgeSet,
    alpha_prime: EdgeSet,
) -> Result<bool, ParacelError> {
    for a in [alpha, alpha_prime] {
        if !is_compatible(g, beta, gamma, a)? {
            return Err(ParacelError::NotCompatible(g.format_set(a)));
        }
    }
    is_compatible(g, beta, gamma, alpha.intersection(alpha_prime))
}

fn product_exponents(edge_count: usize, a: u64, b: u64) -> EdgeExponents {
    (0..edge_count)
        .map(|i| (a >> i & 1) as u32 + (b >> i & 1) as u32)
        .collect()
}

fn family_from(index: &ParacelIndex, g: &Multigraph, beta: u64, gamma: u64) -> TwinFamily {
    let compatible = index.compatible_sets(beta, gamma, g.unmarked_mask());
    let mut monomials = BTreeSet::new();
    for (i, &a) in compatible.iter().enumerate() {
        for &b in &compatible[i..] {
            if index.compatible(beta, gamma, a & b) {
                monomials.insert(product_exponents(g.edge_count(), a, b));
            }
        }
    }
    TwinFamily {
        beta: unmarked_set(beta),
        gamma: unmarked_set(gamma),
        compatible: compatible.into_iter().map(unmarked_set).collect(),
        monomials,
    }
}

pub fn twin_family(
    g: &Multigraph,
    beta: EdgeSet,
    gamma: EdgeSet,
) -> Result<TwinFamily, ParacelError> {
    check_pair(g, beta, gamma)?;
    Ok(family_from(
        &ParacelIndex::new(g),
        g,
        beta.mask(),
        gamma.mask(),
    ))
}

/// `B_{β,γ}`.
pub fn enumerate_b(
    g: &Multigraph,
    beta: EdgeSet,
    gamma: EdgeSet,
) -> Result<BTreeSet<EdgeExponents>, ParacelError> {
    Ok(twin_family(g, beta, gamma)?.monomials)
}

/// Display order for edge sets: by size, then by edge positions.
pub fn set_order_key(set: EdgeSet) -> (usize, Vec<usize>) {
    (set.len(), set.iter().collect())
}

/// Every `(β, γ)` with nonempty `B_{β,γ}`, sorted by `β` then `γ` in
/// [`set_order_key`] order.
pub fn twin_families(g: &Multigraph) -> Vec<TwinFamily> {
    let index = ParacelIndex::new(g);
    let unmarked = g.unmarked_mask();
    let mut families = Vec::new();
    for gamma in submasks(unmarked) {
        for beta in submasks(unmarked & !gamma) {
            let family = family_from(&index, g, beta, gamma);
            if !family.monomials.is_empty() {
                families.push(family);
            }
        }
    }
    families.sort_by_key(|fam| (set_order_key(fam.beta), set_order_key(fam.gamma)));
    families
}

fn rhs_from(g: &Multigraph, registry: &Arc<Registry>, families: &[TwinFamily]) -> MPoly {
    let n = g.edge_count();
    MPoly::from_terms(
        registry,
        families.iter().flat_map(|fam| {
            let shift = fam.beta.union(fam.gamma).mask();
            fam.monomials.iter().map(move |m| {
                let exps: Vec<u32> = (0..n).map(|i| m[i] + (shift >> i & 1) as u32).collect();
                (Monomial::from_parts(&exps, 0), Rational::one())
            })
        }),
    )
}

/// `Σ_{β,γ} x^β x^γ Σ_{m ∈ B_{β,γ}} m`, a polynomial without `q`.
pub fn rhs_theorem(g: &Multigraph) -> MPoly {
    rhs_from(g, &registry(g), &twin_families(g))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermDiff {
    pub monomial: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremCheck {
    /// `M_ef(1)` from the correlation difference.
    pub lhs: MPoly,
    /// The twin expansion.
    pub rhs: MPoly,
    pub mismatches: Vec<TermDiff>,
}

impl TheoremCheck {
    pub fn is_equal(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `M_ef(1)` against the twin expansion term by term.
pub fn verify_main_theorem(g: &Multigraph) -> Result<TheoremCheck, PolyError> {
    let m = m_poly(g)?;
    Ok(verify_with_m(g, &m))
}

/// Same as [`verify_main_theorem`] with `M_ef(q)` already computed.
pub fn verify_with_m(g: &Multigraph, m: &MPoly) -> TheoremCheck {
    let lhs = m.subst_q(&Rational::one());
    let rhs = rhs_from(g, m.registry(), &twin_families(g));
    let mut mismatches = Vec::new();
    if lhs != rhs {
        let monomials: BTreeSet<&Monomial> =
            lhs.terms().chain(rhs.terms()).map(|(m, _)| m).collect();
        for mono in monomials {
            let (l, r) = (lhs.coeff(mono), rhs.coeff(mono));
            if l != r {
                let shown = MPoly::term(lhs.registry(), mono.clone(), Rational::one());
                mismatches.push(TermDiff {
                    monomial: shown.to_string(),
                    lhs: l.to_string(),
                    rhs: r.to_string(),
                });
            }
        }
    }
    TheoremCheck {
        lhs,
        rhs,
        mismatches,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub beta: EdgeSet,
    pub alpha: EdgeSet,
    pub alpha_prime: EdgeSet,
}

/// The unique `β` (all smoots of `γ`) and a twin split `α, α'` of the
/// remaining edges with `x^β x^γ x^α x^α' = x^{E^{ef}}`; `α` takes every
/// remaining edge with an endpoint in `c1`.
pub fn canonical_split(g: &Multigraph, gamma: EdgeSet) -> Result<Split, ParacelError> {
    let cert =
        is_paracel(g, gamma)?.ok_or_else(|| ParacelError::NotParacel(g.format_set(gamma)))?;
    let beta = cert.smoots;
    let rest = g.unmarked_edges().difference(gamma).difference(beta);
    let alpha = rest
        .iter()
        .filter(|&i| {
            let edge = g.edge(i);
            cert.c1.contains(&edge.u) || cert.c1.contains(&edge.v)
        })
        .fold(EdgeSet::empty(Universe::Unmarked), EdgeSet::insert);
    Ok(Split {
        beta,
        alpha,
        alpha_prime: rest.difference(alpha),
    })
}

/// `1`, `x_h^2`, `x_g^2*x_h*x_k`, ...
pub fn format_exponents(g: &Multigraph, exps: &[u32]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| match e {
            1 => format!("x_{}", g.edge(i).id),
            _ => format!("x_{}^{}", g.edge(i).id, e),
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Renders families as a `β | γ | A | B` table.
pub fn render_table(g: &Multigraph, families: &[TwinFamily]) -> String {
    let rows: Vec<[String; 4]> = families
        .iter()
        .map(|fam| {
            let a: Vec<String> = fam.compatible.iter().map(|&s| g.format_set(s)).collect();
            let mut b: Vec<&EdgeExponents> = fam.monomials.iter().collect();
            b.sort_by_key(|m| {
                let deg: u32 = m.iter().sum();
                (
                    deg,
                    m.iter().map(|&e| std::cmp::Reverse(e)).collect::<Vec<_>>(),
                )
            });
            let b: Vec<String> = b.into_iter().map(|m| format_exponents(g, m)).collect();
            [
                g.format_set(fam.beta),
                g.format_set(fam.gamma),
                format!("{{{}}}", a.join(", ")),
                format!("{{{}}}", b.join(", ")),
            ]
        })
        .collect();
    let header = ["beta", "gamma", "A", "B"].map(String::from);
    let mut widths = header.clone().map(|h| h.len());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String; 4]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            if i == 3 {
                s.push_str(cell);
            } else {
                let _ = write!(s, "{cell:<w$}");
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(&header);
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 9));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}

/// Integer coefficient of the all-ones monomial in the twin expansion.
pub fn rhs_squarefree_coeff(g: &Multigraph) -> Rational {
    let rhs = rhs_theorem(g);
    let mut exps = crate::cluster::squarefree_pattern(g);
    exps.push(0);
    rhs.coeff(&Monomial::from_exponents(exps))
}

impl TwinFamily {
    /// Number of `(α, α')` twin pairs with `α ≤ α'` in mask order.
    pub fn twin_pair_count(&self, g: &Multigraph) -> usize {
        let mut count = 0;
        for (i, &a) in self.compatible.iter().enumerate() {
            for &b in &self.compatible[i..] {
                if is_compatible(g, self.beta, self.gamma, a.intersection(b)).unwrap_or(false) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn monomial_sum(&self, registry: &Arc<Registry>) -> MPoly {
        MPoly::from_terms(
            registry,
            self.monomials
                .iter()
                .map(|m| (Monomial::from_parts(m, 0), Rational::one())),
        )
    }
}
