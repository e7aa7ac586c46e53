//! Random-cluster restricted sums and the correlation polynomial `M_ef(q)`.
//!
//! All sums are unnormalized: the partition function `Z` cancels from every
//! quantity computed here. Divide by `restricted_sum(g, ∅, ∅)` to get
//! probabilities.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::multigraph::{submasks, EdgeSet, GraphError, Multigraph};
use crate::polyring::{integer, MPoly, Monomial, PolyError, QPoly, Rational, Registry};

#[derive(Debug, Clone, Error)]
pub enum ClusterError {
    #[error("A and B overlap")]
    Overlap,
    #[error("edge set touches a marked edge")]
    TouchesMarked,
    #[error("probability must lie in [0, 1), got {0}")]
    ProbabilityOutOfRange(Rational),
    #[error("invalid exponent pattern: {0}")]
    InvalidLambda(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One variable per edge, in edge order.
pub fn registry(g: &Multigraph) -> Arc<Registry> {
    Registry::new(g.edge_ids())
}

/// Exponent vector (edges then `q`) of `x^F q^k`.
pub(crate) fn mask_monomial(edge_count: usize, mask: u64, q_exponent: u32) -> Monomial {
    let mut exps: Vec<u32> = (0..edge_count).map(|i| (mask >> i & 1) as u32).collect();
    exps.push(q_exponent);
    Monomial::from_exponents(exps)
}

fn restricted_sum_in(
    g: &Multigraph,
    registry: &Arc<Registry>,
    include: u64,
    exclude: u64,
) -> MPoly {
    let free = g.full_mask() & !include & !exclude;
    let n = g.edge_count();
    MPoly::from_terms(
        registry,
        submasks(free).map(|s| {
            let f = include | s;
            let k = g.component_count(f) as u32;
            (mask_monomial(n, f, k), Rational::one())
        }),
    )
}

/// `Σ x^F q^{k(F)}` over all `F` with `A ⊆ F ⊆ E − B`.
pub fn restricted_sum(g: &Multigraph, a: EdgeSet, b: EdgeSet) -> Result<MPoly, ClusterError> {
    if !a.is_disjoint(b) {
        return Err(ClusterError::Overlap);
    }
    Ok(restricted_sum_in(g, &registry(g), a.mask(), b.mask()))
}

/// The edge weight `p / (1 - p)` matching edge probability `p`.
pub fn weight_from_probability(p: &Rational) -> Result<Rational, ClusterError> {
    if p < &Rational::zero() || p >= &Rational::one() {
        return Err(ClusterError::ProbabilityOutOfRange(p.clone()));
    }
    Ok(p / (Rational::one() - p))
}

/// `(F, k(F))` for every `F` with `include ⊆ F ⊆ E − exclude`.
fn restricted_terms(g: &Multigraph, include: u64, exclude: u64) -> Vec<(u64, u32)> {
    submasks(g.full_mask() & !include & !exclude)
        .map(|s| (include | s, g.component_count(include | s) as u32))
        .collect()
}

/// `T_e^f T_f^e − T_ef T^ef` with integer coefficients.
///
/// Restricted sums are multilinear, so the product monomial
/// `x^{F1} x^{F2}` is determined by `(F1 ∪ F2, F1 ∩ F2)`. Each key maps to
/// its coefficient polynomial in `q`, lowest power first.
fn integer_difference(g: &Multigraph) -> HashMap<(u64, u64), Vec<i64>> {
    let e = 1u64 << g.e();
    let f = 1u64 << g.f();
    let mut acc: HashMap<(u64, u64), Vec<i64>> = HashMap::new();
    let mut add = |left: &[(u64, u32)], right: &[(u64, u32)], sign: i64| {
        for &(f1, k1) in left {
            for &(f2, k2) in right {
                let slot = acc.entry((f1 | f2, f1 & f2)).or_default();
                let power = (k1 + k2) as usize;
                if slot.len() <= power {
                    slot.resize(power + 1, 0);
                }
                slot[power] += sign;
            }
        }
    };
    add(&restricted_terms(g, e, f), &restricted_terms(g, f, e), 1);
    add(
        &restricted_terms(g, e | f, 0),
        &restricted_terms(g, 0, e | f),
        -1,
    );
    acc.retain(|_, coeffs| coeffs.iter().any(|&c| c != 0));
    acc
}

fn key_exponents(edge_count: usize, union: u64, common: u64) -> Vec<u32> {
    (0..edge_count)
        .map(|i| (union >> i & 1) as u32 + (common >> i & 1) as u32)
        .collect()
}

/// `T_e^f T_f^e − T_ef T^ef`, as a polynomial over `registry`.
fn difference_in(g: &Multigraph, registry: &Arc<Registry>) -> MPoly {
    let n = g.edge_count();
    MPoly::from_terms(
        registry,
        integer_difference(g)
            .into_iter()
            .flat_map(|((union, common), coeffs)| {
                let exps = key_exponents(n, union, common);
                coeffs
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, c)| c != 0)
                    .map(move |(k, c)| (Monomial::from_parts(&exps, k as u32), integer(c)))
            }),
    )
}

pub fn correlation_difference(g: &Multigraph) -> MPoly {
    difference_in(g, &registry(g))
}

/// `x_e x_f (1 − q)` over the registry of `g`.
pub fn normalizer(g: &Multigraph, registry: &Arc<Registry>) -> MPoly {
    let xexf = mask_monomial(g.edge_count(), 1 << g.e() | 1 << g.f(), 0);
    &MPoly::term(registry, xexf.clone(), Rational::one())
        - &MPoly::term(registry, xexf.with_q(1), Rational::one())
}

/// `M_ef(q)`: the correlation difference divided exactly by `x_e x_f (1 − q)`.
///
/// A [`PolyError::NonDivisible`] here means a bug upstream; the quotient
/// always exists.
pub fn m_poly(g: &Multigraph) -> Result<MPoly, PolyError> {
    let registry = registry(g);
    let marks = 1u64 << g.e() | 1u64 << g.f();
    let n = g.edge_count();
    let mut terms = Vec::new();
    for ((union, common), coeffs) in integer_difference(g) {
        // every monomial carries x_e x_f exactly once; the q part must vanish at 1
        if union & marks != marks || common & marks != 0 || coeffs.iter().sum::<i64>() != 0 {
            return difference_in(g, &registry).exact_div(&normalizer(g, &registry));
        }
        let exps = key_exponents(n, union & !marks, common);
        let mut partial = 0;
        for (k, c) in coeffs[..coeffs.len() - 1].iter().enumerate() {
            partial += c;
            if partial != 0 {
                terms.push((Monomial::from_parts(&exps, k as u32), integer(partial)));
            }
        }
    }
    Ok(MPoly::from_terms(&registry, terms))
}

/// [`m_poly`] by generic polynomial division of the correlation difference.
pub fn m_poly_by_division(g: &Multigraph) -> Result<MPoly, PolyError> {
    let registry = registry(g);
    difference_in(g, &registry).exact_div(&normalizer(g, &registry))
}

/// `M_ef(1)`.
pub fn m_poly_at_one(g: &Multigraph) -> Result<MPoly, PolyError> {
    Ok(m_poly(g)?.subst_q(&Rational::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairSign {
    /// `k1 − k2 = −1`; contributes `+q^{k1} x^{A+B}`.
    Positive,
    /// `k1 − k2 = +1`; contributes `−q^{k2} x^{A+B}`.
    Negative,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairClass {
    pub a: EdgeSet,
    pub b: EdgeSet,
    pub k1: usize,
    pub k2: usize,
    pub sign: PairSign,
}

impl PairClass {
    /// The pair's contribution `(q^{k1} − q^{k2}) / (1 − q)` to the
    /// coefficient of `x^{A+B}` in `M_ef(q)`.
    pub fn contribution(&self) -> QPoly {
        match self.sign {
            PairSign::Neutral => QPoly::zero(),
            PairSign::Positive => QPoly::monomial(integer(1), self.k1),
            PairSign::Negative => QPoly::monomial(integer(-1), self.k2),
        }
    }
}

/// Classifies an ordered pair `(A, B)` of subsets of `E^{ef}`.
pub fn classify_pair(g: &Multigraph, a: EdgeSet, b: EdgeSet) -> Result<PairClass, ClusterError> {
    let unmarked = g.unmarked_mask();
    if !a.is_subset(g.unmarked_edges()) || !b.is_subset(g.unmarked_edges()) {
        return Err(ClusterError::TouchesMarked);
    }
    debug_assert_eq!(a.mask() & !unmarked, 0);
    let e = 1u64 << g.e();
    let f = 1u64 << g.f();
    let k1 = g.component_count(a.mask() | e) + g.component_count(b.mask() | f);
    let k2 = g.component_count(a.mask() | e | f) + g.component_count(b.mask());
    let sign = match k1 as i64 - k2 as i64 {
        -1 => PairSign::Positive,
        1 => PairSign::Negative,
        0 => PairSign::Neutral,
        d => unreachable!("k1 - k2 = {d}"),
    };
    Ok(PairClass { a, b, k1, k2, sign })
}

/// Exponent pattern of the all-ones monomial `x^{E^{ef}}`.
pub fn squarefree_pattern(g: &Multigraph) -> Vec<u32> {
    let unmarked = g.unmarked_mask();
    (0..g.edge_count())
        .map(|i| (unmarked >> i & 1) as u32)
        .collect()
}

/// Coefficient of `x^{E^{ef}}` in `M_ef(q)`.
pub fn squarefree_full_coeff(g: &Multigraph) -> Result<QPoly, PolyError> {
    Ok(m_poly(g)?.coeff_of(&squarefree_pattern(g)))
}

/// The same coefficient at `q = 1`, an integer.
pub fn squarefree_full_coeff_at_one(g: &Multigraph) -> Result<BigInt, PolyError> {
    Ok(squarefree_full_coeff(g)?
        .eval(&Rational::one())
        .to_integer())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionStep {
    Deleted(String),
    Contracted(String),
    /// A loop with exponent 2; contracting a loop is deleting it.
    LoopRemoved(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub graph: Multigraph,
    pub log: Vec<ReductionStep>,
    /// Set when an exponent-2 edge is parallel to `e` or `f`: the
    /// coefficient of `x^λ` is then 0 on both sides and reduction stops.
    pub short_circuit: Option<String>,
}

/// Checks a per-edge exponent vector over the full edge list: entries in
/// `{0, 1, 2}` and zero at `e` and `f`.
pub fn validate_lambda(g: &Multigraph, lambda: &[u32]) -> Result<(), ClusterError> {
    if lambda.len() != g.edge_count() {
        return Err(ClusterError::InvalidLambda(format!(
            "expected {} entries, got {}",
            g.edge_count(),
            lambda.len()
        )));
    }
    if lambda[g.e()] != 0 || lambda[g.f()] != 0 {
        return Err(ClusterError::InvalidLambda(
            "e and f must have exponent 0".into(),
        ));
    }
    if let Some(bad) = lambda.iter().find(|&&x| x > 2) {
        return Err(ClusterError::InvalidLambda(format!(
            "exponent {bad} exceeds 2"
        )));
    }
    Ok(())
}

/// Deletes every exponent-0 edge and contracts every exponent-2 edge, so the
/// surviving unmarked edges all have exponent 1.
pub fn reduce_by_lambda(g: &Multigraph, lambda: &[u32]) -> Result<Reduction, ClusterError> {
    validate_lambda(g, lambda)?;
    let ids = g.edge_ids();
    let marked = [g.e(), g.f()];
    let mut graph = g.clone();
    let mut log = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        if !marked.contains(&i) && lambda[i] == 0 {
            graph = graph.delete_edge(id)?;
            log.push(ReductionStep::Deleted(id.clone()));
        }
    }
    for (i, id) in ids.iter().enumerate() {
        if marked.contains(&i) || lambda[i] != 2 {
            continue;
        }
        let index = graph.edge_index(id).expect("edge survives deletion");
        if graph.are_parallel(index, graph.e()) || graph.are_parallel(index, graph.f()) {
            return Ok(Reduction {
                graph,
                log,
                short_circuit: Some(id.clone()),
            });
        }
        if graph.is_loop(index) {
            graph = graph.delete_edge(id)?;
            log.push(ReductionStep::LoopRemoved(id.clone()));
        } else {
            graph = graph.contract_edge(id)?;
            log.push(ReductionStep::Contracted(id.clone()));
        }
    }
    Ok(Reduction {
        graph,
        log,
        short_circuit: None,
    })
}
