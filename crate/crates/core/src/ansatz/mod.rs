//! Quadratic-form decompositions `M_ef(q)/q² = Σ x^β x^γ Q_{β,γ}` where each
//! `Q_{β,γ}` is a form in the variables `x_α = x^α`, `α ∈ A_{β,γ}`.

mod greedy;
mod psd;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{m_poly, registry};
use crate::instances::Instance;
use crate::multigraph::{EdgeSet, GraphError, Multigraph, Universe};
use crate::paracel::is_compatible;
use crate::polyring::{rational, MPoly, Monomial, PolyError, QPoly, Rational, Registry};

pub use greedy::greedy_decompose;
pub use psd::{default_grid, psd_check, quadratic_value, PsdOutcome, SweepPoint, SweepReport};

const K3_DECOMP: &str = include_str!("../../data/k3.decomp.json");
const K4_MINUS_EDGE_DECOMP: &str = include_str!("../../data/k4_minus_edge.decomp.json");
const K4_DECOMP: &str = include_str!("../../data/k4.decomp.json");

#[derive(Debug, Clone, Error)]
pub enum AnsatzError {
    #[error("matrix is {rows} rows for a basis of {basis}")]
    DimensionMismatch { rows: usize, basis: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("pair β={beta}, γ={gamma} appears twice")]
    DuplicatePair { beta: String, gamma: String },
    #[error("β={beta} and γ={gamma} overlap")]
    Overlap { beta: String, gamma: String },
    #[error("basis element {alpha} is not compatible with β={beta}, γ={gamma}")]
    NotCompatible {
        beta: String,
        gamma: String,
        alpha: String,
    },
    #[error("M_ef(q) is not divisible by q^2 (lowest q order {0})")]
    NotDivisibleByQ2(u32),
    #[error("invalid decomposition file: {0}")]
    Json(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `Σ_{i,j} matrix[i][j] x^{basis[i]} x^{basis[j]}`; off-diagonal entries
/// carry half of the cross coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadForm {
    basis: Vec<EdgeSet>,
    matrix: Vec<Vec<QPoly>>,
}

impl QuadForm {
    pub fn new(basis: Vec<EdgeSet>, matrix: Vec<Vec<QPoly>>) -> Result<Self, AnsatzError> {
        let n = basis.len();
        if matrix.len() != n {
            return Err(AnsatzError::DimensionMismatch {
                rows: matrix.len(),
                basis: n,
            });
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(AnsatzError::DimensionMismatch {
                    rows: row.len(),
                    basis: n,
                });
            }
            for j in 0..i {
                if row[j] != matrix[j][i] {
                    return Err(AnsatzError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &[EdgeSet] {
        &self.basis
    }

    pub fn matrix(&self) -> &[Vec<QPoly>] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(QPoly::is_zero)
    }

    /// Entries evaluated at `q`.
    pub fn at(&self, q: &Rational) -> Vec<Vec<Rational>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|c| c.eval(q)).collect())
            .collect()
    }

    /// The form as a polynomial, shifted by `x^shift`.
    pub fn expand_shifted(&self, registry: &Arc<Registry>, shift: u64) -> MPoly {
        let n = registry.edge_vars();
        let mut out = MPoly::zero(registry);
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let edge_exps =
                    exponent_sum(n, &[shift, self.basis[i].mask(), self.basis[j].mask()]);
                for (power, c) in entry.coeffs().iter().enumerate() {
                    if !c.is_zero() {
                        let mut m = edge_exps.clone();
                        m.push(power as u32);
                        out.add_term(Monomial::from_exponents(m), c.clone());
                    }
                }
            }
        }
        out
    }
}

fn exponent_sum(n: usize, masks: &[u64]) -> Vec<u32> {
    (0..n)
        .map(|i| masks.iter().map(|m| (m >> i & 1) as u32).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzEntry {
    pub beta: EdgeSet,
    pub gamma: EdgeSet,
    pub form: QuadForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnsatzDecomp {
    pub entries: Vec<AnsatzEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompJson {
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryJson {
    pub beta: Vec<String>,
    pub gamma: Vec<String>,
    pub basis: Vec<Vec<String>>,
    /// Each entry lists rational coefficients, constant term first.
    pub matrix: Vec<Vec<Vec<String>>>,
}

fn qpoly_strings(p: &QPoly) -> Vec<String> {
    if p.is_zero() {
        vec!["0".into()]
    } else {
        p.coeff_strings()
    }
}

impl AnsatzDecomp {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, beta: EdgeSet, gamma: EdgeSet) -> Option<&AnsatzEntry> {
        self.entries
            .iter()
            .find(|e| e.beta == beta && e.gamma == gamma)
    }

    pub fn from_json_model(g: &Multigraph, model: &DecompJson) -> Result<Self, AnsatzError> {
        let set = |ids: &[String]| g.edge_set(ids, Universe::Unmarked);
        let entries = model
            .entries
            .iter()
            .map(|entry| {
                let basis = entry
                    .basis
                    .iter()
                    .map(|ids| set(ids))
                    .collect::<Result<_, _>>()?;
                let matrix = entry
                    .matrix
                    .iter()
                    .map(|row| row.iter().map(|c| QPoly::parse_coeffs(c)).collect())
                    .collect::<Result<_, _>>()?;
                Ok(AnsatzEntry {
                    beta: set(&entry.beta)?,
                    gamma: set(&entry.gamma)?,
                    form: QuadForm::new(basis, matrix)?,
                })
            })
            .collect::<Result<_, AnsatzError>>()?;
        Ok(Self { entries })
    }

    pub fn from_json(g: &Multigraph, text: &str) -> Result<Self, AnsatzError> {
        let model: DecompJson =
            serde_json::from_str(text).map_err(|e| AnsatzError::Json(e.to_string()))?;
        Self::from_json_model(g, &model)
    }

    pub fn to_json_model(&self, g: &Multigraph) -> DecompJson {
        DecompJson {
            entries: self
                .entries
                .iter()
                .map(|entry| EntryJson {
                    beta: g.set_ids(entry.beta),
                    gamma: g.set_ids(entry.gamma),
                    basis: entry.form.basis.iter().map(|&a| g.set_ids(a)).collect(),
                    matrix: entry
                        .form
                        .matrix
                        .iter()
                        .map(|row| row.iter().map(qpoly_strings).collect())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self, g: &Multigraph) -> String {
        serde_json::to_string(&self.to_json_model(g)).expect("serializable")
    }

    /// Checks distinct, disjoint `(β, γ)` pairs and `basis ⊆ A_{β,γ}`.
    pub fn validate(&self, g: &Multigraph) -> Result<(), AnsatzError> {
        let mut seen = BTreeSet::new();
        for entry in &self.entries {
            let (beta, gamma) = (g.format_set(entry.beta), g.format_set(entry.gamma));
            if !seen.insert((entry.beta, entry.gamma)) {
                return Err(AnsatzError::DuplicatePair { beta, gamma });
            }
            if !entry.beta.is_disjoint(entry.gamma) {
                return Err(AnsatzError::Overlap { beta, gamma });
            }
            for &alpha in &entry.form.basis {
                let ok = is_compatible(g, entry.beta, entry.gamma, alpha).map_err(|_| {
                    AnsatzError::Overlap {
                        beta: beta.clone(),
                        gamma: gamma.clone(),
                    }
                })?;
                if !ok {
                    return Err(AnsatzError::NotCompatible {
                        beta,
                        gamma,
                        alpha: g.format_set(alpha),
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn expand_decomp(g: &Multigraph, d: &AnsatzDecomp) -> Result<MPoly, AnsatzError> {
    d.validate(g)?;
    Ok(expand_unchecked(&registry(g), d))
}

fn expand_unchecked(registry: &Arc<Registry>, d: &AnsatzDecomp) -> MPoly {
    d.entries.iter().fold(MPoly::zero(registry), |acc, entry| {
        &acc + &entry
            .form
            .expand_shifted(registry, entry.beta.mask() | entry.gamma.mask())
    })
}

/// `M / q²`, failing when some term of `M` has `q` order below 2.
pub fn m_over_q2(m: &MPoly) -> Result<MPoly, AnsatzError> {
    if let Some((&order, _)) = m.by_q_power().iter().next() {
        if order < 2 {
            return Err(AnsatzError::NotDivisibleByQ2(order));
        }
    }
    let q2 = MPoly::q_pow(m.registry(), 2);
    Ok(m.exact_div(&q2)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdentityOutcome {
    Holds,
    /// `expand_decomp(d) − M/q²`.
    Residual(MPoly),
}

impl IdentityOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds)
    }
}

pub fn identity_check(g: &Multigraph, d: &AnsatzDecomp) -> Result<IdentityOutcome, AnsatzError> {
    identity_check_with(g, &m_poly(g)?, d)
}

/// [`identity_check`] with `M_ef(q)` already computed.
pub fn identity_check_with(
    g: &Multigraph,
    m: &MPoly,
    d: &AnsatzDecomp,
) -> Result<IdentityOutcome, AnsatzError> {
    let target = m_over_q2(m)?;
    let residual = &expand_decomp(g, d)? - &target;
    Ok(if residual.is_zero() {
        IdentityOutcome::Holds
    } else {
        IdentityOutcome::Residual(residual)
    })
}

/// The decomposition tabulated for a bundled instance, zero rows included.
pub fn paper_decomps(instance: Instance) -> AnsatzDecomp {
    let text = match instance {
        Instance::K3 => K3_DECOMP,
        Instance::K4MinusEdge => K4_MINUS_EDGE_DECOMP,
        Instance::K4 => K4_DECOMP,
    };
    AnsatzDecomp::from_json(&instance.graph(), text).expect("bundled decomposition parses")
}

/// Lowest `q` order of the entries of `Q`, then the lowest-degree part in
/// the edge variables of that specialization.
pub fn lowest_part_at_q0(g: &Multigraph, form: &QuadForm) -> MPoly {
    let registry = registry(g);
    let at_zero = form.expand_shifted(&registry, 0).subst_q(&Rational::zero());
    let Some(min_degree) = at_zero.terms().map(|(m, _)| m.degree()).min() else {
        return at_zero;
    };
    MPoly::from_terms(
        &registry,
        at_zero
            .terms()
            .filter(|(m, _)| m.degree() == min_degree)
            .map(|(m, c)| (m.clone(), c.clone())),
    )
}

pub(crate) fn half() -> Rational {
    rational(1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::polyring::integer;

    fn s(g: &Multigraph, ids: &[&str]) -> EdgeSet {
        g.edge_set(ids, Universe::Unmarked).unwrap()
    }

    #[test]
    fn k3_expansion() {
        let g = instances::k3();
        let d = paper_decomps(Instance::K3);
        assert_eq!(d.len(), 2);
        assert_eq!(expand_decomp(&g, &d).unwrap().to_string(), "x_g*q + x_g^2");
        assert!(identity_check(&g, &d).unwrap().holds());
        assert!(expand_decomp(&g, &AnsatzDecomp::default())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn perturbed_k3_leaves_residual() {
        let g = instances::k3();
        let mut d = paper_decomps(Instance::K3);
        let entry = d.entries.iter_mut().find(|e| e.gamma.is_empty()).unwrap();
        entry.form.matrix[0][0] = QPoly::constant(integer(2));
        match identity_check(&g, &d).unwrap() {
            IdentityOutcome::Residual(r) => assert_eq!(r.to_string(), "x_g^2"),
            IdentityOutcome::Holds => panic!("perturbation went unnoticed"),
        }
    }

    #[test]
    fn bundled_decompositions_hold() {
        for instance in Instance::ALL {
            let g = instance.graph();
            let d = paper_decomps(instance);
            assert_eq!(
                identity_check(&g, &d).unwrap(),
                IdentityOutcome::Holds,
                "{instance}"
            );
        }
        assert_eq!(paper_decomps(Instance::K4MinusEdge).len(), 14);
        assert_eq!(paper_decomps(Instance::K4).len(), 31);
    }

    #[test]
    fn q0_parts_match_squares() {
        let expect = [
            (Instance::K3, "x_g^2"),
            (
                Instance::K4MinusEdge,
                "x_g^2*x_k^2 + 2*x_g^2*x_h*x_k + x_g^2*x_h^2",
            ),
            (
                Instance::K4,
                "x_k^2*x_l^2 - 2*x_g*x_h*x_k*x_l + x_g^2*x_h^2",
            ),
        ];
        for (instance, text) in expect {
            let g = instance.graph();
            let d = paper_decomps(instance);
            let entry = d.entry(s(&g, &[]), s(&g, &[])).unwrap();
            assert_eq!(lowest_part_at_q0(&g, &entry.form).to_string(), text);
        }
    }

    #[test]
    fn json_round_trip() {
        for instance in Instance::ALL {
            let g = instance.graph();
            let d = paper_decomps(instance);
            let text = d.to_json(&g);
            let back = AnsatzDecomp::from_json(&g, &text).unwrap();
            assert_eq!(back, d);
            assert_eq!(back.to_json(&g), text);
        }
    }

    #[test]
    fn validation_errors() {
        let g = instances::k3();
        let bad = r#"{"entries":[{"beta":[],"gamma":[],"basis":[[]],"matrix":[[["1"]]]}]}"#;
        let d = AnsatzDecomp::from_json(&g, bad).unwrap();
        assert!(matches!(
            expand_decomp(&g, &d),
            Err(AnsatzError::NotCompatible { .. })
        ));
        let asym = r#"{"entries":[{"beta":[],"gamma":[],"basis":[["g"],[]],"matrix":[[["1"],["1"]],[["0"],["1"]]]}]}"#;
        assert!(matches!(
            AnsatzDecomp::from_json(&g, asym),
            Err(AnsatzError::NotSymmetric(1, 0))
        ));
        let unknown = r#"{"entries":[{"beta":["z"],"gamma":[],"basis":[],"matrix":[]}]}"#;
        assert!(matches!(
            AnsatzDecomp::from_json(&g, unknown),
            Err(AnsatzError::Graph(_))
        ));
        let twice = r#"{"entries":[{"beta":[],"gamma":[],"basis":[],"matrix":[]},{"beta":[],"gamma":[],"basis":[],"matrix":[]}]}"#;
        let d = AnsatzDecomp::from_json(&g, twice).unwrap();
        assert!(matches!(
            d.validate(&g),
            Err(AnsatzError::DuplicatePair { .. })
        ));
    }
}
