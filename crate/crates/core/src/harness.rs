//! Instance generators and the per-instance check battery shared by the
//! CLI `fuzz` command, the acceptance suite and the Python bindings.

use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cluster::{m_poly, reduce_by_lambda, squarefree_full_coeff_at_one, ClusterError};
use crate::multigraph::{generated_edge_id, random_multigraph, unordered_pair, Edge, Multigraph};
use crate::paracel::{enumerate_paracels, verify_with_m, TheoremCheck};
use crate::polyring::{rational, MPoly, PolyError, Rational};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Error)]
pub enum HarnessError {
    #[error("--vertices must be at least 2, got {0}")]
    TooFewVertices(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// All `(e, f, E^{ef})` on `1..=max_vertices` labeled vertices with at most
/// `max_unmarked` unmarked edges: `e` and `f` range over ordered pairs of
/// vertex pairs (loops allowed, possibly equal), `E^{ef}` over multisets of
/// vertex pairs. Unmarked edges are named in order `g, h, k, ...`.
pub fn exhaustive(max_vertices: usize, max_unmarked: usize) -> impl Iterator<Item = Multigraph> {
    (1..=max_vertices).flat_map(move |n| {
        let pairs = n * (n + 1) / 2;
        let multisets = Rc::new(multisets(pairs, max_unmarked));
        (0..pairs * pairs).flat_map(move |ef| {
            let multisets = Rc::clone(&multisets);
            let (e, f) = (
                unordered_pair((ef / pairs) as u64, n),
                unordered_pair((ef % pairs) as u64, n),
            );
            (0..multisets.len()).map(move |i| {
                let mut edges = vec![edge("e", e), edge("f", f)];
                for (j, &p) in multisets[i].iter().enumerate() {
                    edges.push(edge(&generated_edge_id(j), unordered_pair(p as u64, n)));
                }
                Multigraph::new(n, edges, "e", "f").expect("generated graph is valid")
            })
        })
    })
}

fn edge(id: &str, (u, v): (usize, usize)) -> Edge {
    Edge {
        id: id.to_string(),
        u,
        v,
    }
}

/// Non-decreasing index sequences over `0..items` of every length up to `max_len`.
fn multisets(items: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            let start = seq.last().copied().unwrap_or(0);
            for item in start..items {
                let mut longer: Vec<usize> = seq.clone();
                longer.push(item);
                next.push(longer);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FuzzConfig {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub count: usize,
    pub seed: u64,
}

/// Seeded random instances: for each, the vertex count is drawn from
/// `2..=max_vertices`, the unmarked edge count from `0..=max_edges`, then a
/// graph seed for [`random_multigraph`].
pub fn fuzz_instances(config: &FuzzConfig) -> Result<Vec<(u64, Multigraph)>, HarnessError> {
    if config.max_vertices < 2 {
        return Err(HarnessError::TooFewVertices(config.max_vertices));
    }
    let mut rng = SplitMix64::new(config.seed);
    Ok((0..config.count)
        .map(|_| {
            let n = rng.range_inclusive(2, config.max_vertices as u64) as usize;
            let m = rng.range_inclusive(0, config.max_edges as u64) as usize;
            let seed = rng.next_u64();
            (seed, random_multigraph(n, m, seed))
        })
        .collect())
}

/// Edge exponents with the `(q-exponent, coefficient)` pairs beside them.
type GroupedTerm = (Vec<u32>, Vec<(u32, BigInt)>);

/// Exact evaluation of an integer-coefficient `M_ef(q)` at weights `a/16`
/// and `q = b/4`, scaled to an integer with the sign of the true value.
pub struct PositivityEvaluator {
    terms: Vec<GroupedTerm>,
    max_edge_degree: u32,
    q_degree: u32,
}

pub const WEIGHT_DENOMINATOR: u64 = 16;
pub const Q_DENOMINATOR: u64 = 4;

impl PositivityEvaluator {
    pub fn new(m: &MPoly) -> Option<Self> {
        let mut terms: Vec<GroupedTerm> = Vec::new();
        for (mono, c) in m.terms() {
            if !c.is_integer() {
                return None;
            }
            let key = mono.edge_exponents().to_vec();
            let coeff = (mono.q_exponent(), c.to_integer());
            match terms.iter_mut().find(|(k, _)| *k == key) {
                Some((_, list)) => list.push(coeff),
                None => terms.push((key, vec![coeff])),
            }
        }
        Some(Self {
            max_edge_degree: terms.iter().map(|(k, _)| k.iter().sum()).max().unwrap_or(0),
            q_degree: m.q_degree(),
            terms,
        })
    }

    /// `Σ_μ C_μ(b) Π a_i^{μ_i} 16^{X − |μ|}` where `C_μ(b) = Σ_s c_{μ,s} b^s 4^{Q − s}`.
    /// The true value is this divided by `16^X 4^Q`.
    pub fn scaled(&self, numerators: &[u64], q_numerator: u64) -> BigInt {
        self.at_q(q_numerator).scaled(numerators)
    }

    /// Fixes `q = b/4`, for repeated evaluation at many weights.
    pub fn at_q(&self, q_numerator: u64) -> CollapsedQ<'_> {
        let collapsed = self.collapse_q(q_numerator);
        let small = collapsed.iter().map(ToPrimitive::to_i128).collect();
        CollapsedQ {
            owner: self,
            collapsed,
            small,
        }
    }

    fn collapse_q(&self, b: u64) -> Vec<BigInt> {
        self.terms
            .iter()
            .map(|(_, list)| {
                list.iter()
                    .map(|(s, c)| {
                        c * BigInt::from(b).pow(*s)
                            * BigInt::from(Q_DENOMINATOR).pow(self.q_degree - s)
                    })
                    .sum()
            })
            .collect()
    }

    fn fast(&self, collapsed: &[Option<i128>], a: &[u64]) -> Option<i128> {
        let mut total: i128 = 0;
        for ((exps, _), c) in self.terms.iter().zip(collapsed) {
            let mut value = (*c)?;
            let degree: u32 = exps.iter().sum();
            for (i, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    value = value.checked_mul(a[i] as i128)?;
                }
            }
            value = value.checked_mul(
                (WEIGHT_DENOMINATOR as i128).checked_pow(self.max_edge_degree - degree)?,
            )?;
            total = total.checked_add(value)?;
        }
        Some(total)
    }

    fn slow(&self, collapsed: &[BigInt], a: &[u64]) -> BigInt {
        self.terms
            .iter()
            .zip(collapsed)
            .map(|((exps, _), c)| {
                let degree: u32 = exps.iter().sum();
                let mut value =
                    c * BigInt::from(WEIGHT_DENOMINATOR).pow(self.max_edge_degree - degree);
                for (i, &e) in exps.iter().enumerate() {
                    value *= BigInt::from(a[i]).pow(e);
                }
                value
            })
            .sum()
    }

    pub fn scale(&self) -> BigInt {
        BigInt::from(WEIGHT_DENOMINATOR).pow(self.max_edge_degree)
            * BigInt::from(Q_DENOMINATOR).pow(self.q_degree)
    }

    /// The unscaled value as a rational.
    pub fn value(&self, numerators: &[u64], q_numerator: u64) -> Rational {
        Rational::new(self.scaled(numerators, q_numerator), self.scale())
    }
}

/// A [`PositivityEvaluator`] with `q` substituted.
pub struct CollapsedQ<'a> {
    owner: &'a PositivityEvaluator,
    collapsed: Vec<BigInt>,
    small: Vec<Option<i128>>,
}

impl CollapsedQ<'_> {
    pub fn scaled(&self, numerators: &[u64]) -> BigInt {
        self.owner
            .fast(&self.small, numerators)
            .map(BigInt::from)
            .unwrap_or_else(|| self.owner.slow(&self.collapsed, numerators))
    }

    /// Sign of the value, without allocating on the fast path.
    pub fn is_negative(&self, numerators: &[u64]) -> bool {
        match self.owner.fast(&self.small, numerators) {
            Some(v) => v < 0,
            None => self.owner.slow(&self.collapsed, numerators).is_negative(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeValue {
    /// `(edge id, weight)` over every edge.
    pub weights: Vec<(String, String)>,
    pub q: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCase {
    pub lambda: Vec<u32>,
    pub before: String,
    pub after: String,
    pub short_circuit: Option<String>,
}

impl LambdaCase {
    pub fn holds(&self) -> bool {
        self.before == self.after
    }
}

/// Coefficient of `x^λ` in `M_ef(1)` next to the all-ones coefficient of
/// the reduced graph.
pub fn lambda_case(
    g: &Multigraph,
    m_at_one: &MPoly,
    lambda: &[u32],
) -> Result<LambdaCase, HarnessError> {
    let before = m_at_one.coeff_of(lambda).eval(&Rational::one());
    let reduction = reduce_by_lambda(g, lambda)?;
    let after = match &reduction.short_circuit {
        Some(_) => BigInt::zero(),
        None => squarefree_full_coeff_at_one(&reduction.graph)?,
    };
    Ok(LambdaCase {
        lambda: lambda.to_vec(),
        before: before.to_string(),
        after: after.to_string(),
        short_circuit: reduction.short_circuit,
    })
}

pub fn random_lambda(g: &Multigraph, rng: &mut SplitMix64) -> Vec<u32> {
    (0..g.edge_count())
        .map(|i| {
            if i == g.e() || i == g.f() {
                0
            } else {
                rng.below(3) as u32
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub weight_samples: usize,
    /// Numerators over [`Q_DENOMINATOR`].
    pub q_numerators: Vec<u64>,
    pub lambda_samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            weight_samples: 25,
            q_numerators: (0..=4).collect(),
            lambda_samples: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceReport {
    pub m: MPoly,
    pub theorem: TheoremCheck,
    pub squarefree_coeff: BigInt,
    pub paracel_count: usize,
    pub degree_ok: bool,
    pub lambda_cases: Vec<LambdaCase>,
    pub negative: Option<NegativeValue>,
}

impl InstanceReport {
    pub fn squarefree_ok(&self) -> bool {
        self.squarefree_coeff == BigInt::from(self.paracel_count)
    }

    pub fn reduction_ok(&self) -> bool {
        self.lambda_cases.iter().all(LambdaCase::holds)
    }

    /// Every contract check passed; a negative value is reported separately.
    pub fn passes(&self) -> bool {
        self.theorem.is_equal() && self.squarefree_ok() && self.degree_ok && self.reduction_ok()
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.theorem.is_equal() {
            out.push("main_theorem");
        }
        if !self.squarefree_ok() {
            out.push("paracel_count");
        }
        if !self.degree_ok {
            out.push("degree_bound");
        }
        if !self.reduction_ok() {
            out.push("reduction");
        }
        out
    }
}

/// No `x_e`, `x_f`, and every variable of degree at most 2 at `q = 1`.
pub fn degree_bound_holds(g: &Multigraph, m_at_one: &MPoly) -> bool {
    !m_at_one.contains_var(g.e())
        && !m_at_one.contains_var(g.f())
        && m_at_one.max_edge_degree() <= 2
}

/// Searches for a negative value of `M` at random weights `a/16`,
/// `a ∈ [1, 64]`, and each configured `q`.
pub fn positivity_scan(
    g: &Multigraph,
    m: &MPoly,
    rng: &mut SplitMix64,
    config: &CheckConfig,
) -> Option<NegativeValue> {
    let evaluator = PositivityEvaluator::new(m)?;
    let fixed: Vec<CollapsedQ> = config
        .q_numerators
        .iter()
        .map(|&b| evaluator.at_q(b))
        .collect();
    for _ in 0..config.weight_samples {
        let a: Vec<u64> = (0..g.edge_count())
            .map(|_| rng.range_inclusive(1, 64))
            .collect();
        for (at_q, &b) in fixed.iter().zip(&config.q_numerators) {
            if at_q.is_negative(&a) {
                return Some(NegativeValue {
                    weights: g
                        .edges()
                        .iter()
                        .zip(&a)
                        .map(|(edge, &ai)| {
                            (
                                edge.id.clone(),
                                rational(ai as i64, WEIGHT_DENOMINATOR as i64).to_string(),
                            )
                        })
                        .collect(),
                    q: rational(b as i64, Q_DENOMINATOR as i64).to_string(),
                    value: evaluator.value(&a, b).to_string(),
                });
            }
        }
    }
    None
}

pub fn check_instance(
    g: &Multigraph,
    rng: &mut SplitMix64,
    config: &CheckConfig,
) -> Result<InstanceReport, HarnessError> {
    let m = m_poly(g)?;
    let theorem = verify_with_m(g, &m);
    let m_at_one = &theorem.lhs;
    let squarefree_coeff = m_at_one
        .coeff_of(&crate::cluster::squarefree_pattern(g))
        .eval(&Rational::one())
        .to_integer();
    let lambda_cases = (0..config.lambda_samples)
        .map(|_| lambda_case(g, m_at_one, &random_lambda(g, rng)))
        .collect::<Result<_, _>>()?;
    let degree_ok = degree_bound_holds(g, m_at_one);
    let negative = positivity_scan(g, &m, rng, config);
    Ok(InstanceReport {
        paracel_count: enumerate_paracels(g).len(),
        squarefree_coeff,
        degree_ok,
        lambda_cases,
        negative,
        theorem,
        m,
    })
}

/// Seed of the check stream for instance `index`.
pub fn check_seed(seed: u64, index: usize) -> u64 {
    SplitMix64::new(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)).next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub index: usize,
    pub graph_seed: u64,
    pub graph: String,
    pub failed: Vec<&'static str>,
    pub negative: Option<NegativeValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub config: FuzzConfig,
    pub instances: usize,
    pub passed: usize,
    pub zero_m: usize,
    pub failures: Vec<Finding>,
    pub counterexamples: Vec<Finding>,
}

pub fn run_fuzz(config: &FuzzConfig, checks: &CheckConfig) -> Result<FuzzSummary, HarnessError> {
    let instances = fuzz_instances(config)?;
    let mut summary = FuzzSummary {
        config: *config,
        instances: instances.len(),
        passed: 0,
        zero_m: 0,
        failures: Vec::new(),
        counterexamples: Vec::new(),
    };
    for (index, (graph_seed, g)) in instances.iter().enumerate() {
        let mut rng = SplitMix64::new(check_seed(config.seed, index));
        let report = check_instance(g, &mut rng, checks)?;
        let failed = report.failed_checks();
        if report.m.is_zero() {
            summary.zero_m += 1;
        }
        let finding = || Finding {
            index,
            graph_seed: *graph_seed,
            graph: g.to_graph_file(),
            failed: failed.clone(),
            negative: report.negative.clone(),
        };
        if report.negative.is_some() {
            summary.counterexamples.push(finding());
        }
        if failed.is_empty() {
            summary.passed += 1;
        } else {
            summary.failures.push(finding());
        }
    }
    Ok(summary)
}

/// Graph file for a negative evaluation, with the weights and `q` in comments.
pub fn replay_file(finding: &Finding) -> String {
    let mut out = String::from("# negative evaluation of M_ef(q)\n");
    if let Some(neg) = &finding.negative {
        out.push_str(&format!("# q = {}\n", neg.q));
        for (id, w) in &neg.weights {
            out.push_str(&format!("# x_{id} = {w}\n"));
        }
        out.push_str(&format!("# value = {}\n", neg.value));
    }
    out.push_str(&finding.graph);
    out
}
