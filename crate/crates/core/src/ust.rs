//! The `q → 0` end of `M_ef(q)`: the lowest power of `q` and the perfect
//! square it is expected to carry on connected graphs.
//!
//! The tree limit sends `q` to zero faster than the edge weights, so the
//! square appears in the lowest total degree of the `q²` coefficient. On
//! K4−e that coefficient also has degree-5 terms such as `x_g² x_h x_k²`,
//! which the limit discards.

use num_traits::{One, Signed};
use serde::Serialize;

use crate::cluster::m_poly;
use crate::multigraph::Multigraph;
use crate::polyring::{MPoly, PolyError};

/// Order reported for the zero polynomial.
pub const ZERO_ORDER: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct LowestQPart {
    /// Smallest `q` exponent in `M`, or [`ZERO_ORDER`] when `M = 0`.
    pub q_order: u32,
    /// Coefficient of `q^{q_order}`, free of `q`.
    pub part: MPoly,
}

impl LowestQPart {
    pub fn is_zero(&self) -> bool {
        self.q_order == ZERO_ORDER
    }

    /// Terms of `part` with the smallest total degree, and that degree.
    pub fn lowest_degree(&self) -> (u64, MPoly) {
        let Some(degree) = self.part.terms().map(|(m, _)| m.degree()).min() else {
            return (0, self.part.clone());
        };
        let terms = self
            .part
            .terms()
            .filter(|(m, _)| m.degree() == degree)
            .map(|(m, c)| (m.clone(), c.clone()));
        (degree, MPoly::from_terms(self.part.registry(), terms))
    }
}

pub fn lowest_q_part(m: &MPoly) -> LowestQPart {
    match m.by_q_power().into_iter().next() {
        Some((q_order, part)) => LowestQPart { q_order, part },
        None => LowestQPart {
            q_order: ZERO_ORDER,
            part: MPoly::zero(m.registry()),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UstOutcome {
    /// The lowest-degree terms of the `q^{q_order}` coefficient equal
    /// `root²`, with the leading coefficient of `root` positive.
    Square {
        q_order: u32,
        degree: u64,
        root: MPoly,
        unit_coefficients: bool,
    },
    NotSquare {
        q_order: u32,
        degree: u64,
        part: MPoly,
    },
    /// `M = 0`, or a connected graph whose `q²` part vanishes.
    Zero,
    /// Connected graph with non-loop marks and `q` order below 2.
    Anomaly { q_order: u32, part: MPoly },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UstKind {
    Square,
    NotSquare,
    Zero,
    Anomaly,
}

impl UstOutcome {
    pub fn kind(&self) -> UstKind {
        match self {
            Self::Square { .. } => UstKind::Square,
            Self::NotSquare { .. } => UstKind::NotSquare,
            Self::Zero => UstKind::Zero,
            Self::Anomaly { .. } => UstKind::Anomaly,
        }
    }
}

/// Square root of `part` with its leading coefficient made positive.
pub fn normalized_root(part: &MPoly) -> Option<MPoly> {
    let root = part.sqrt()?;
    match root.leading_term() {
        Some((_, c)) if c.is_negative() => Some(-&root),
        _ => Some(root),
    }
}

pub fn has_unit_coefficients(p: &MPoly) -> bool {
    p.terms().all(|(_, c)| c.abs().is_one())
}

pub fn ust_square_check(g: &Multigraph) -> Result<UstOutcome, PolyError> {
    Ok(classify_lowest(g, &lowest_q_part(&m_poly(g)?)))
}

/// [`ust_square_check`] for an already computed lowest part.
///
/// Only connected graphs with non-loop `e, f` are held to order 2. Higher
/// orders on such graphs mean the `q²` coefficient is zero; other graphs
/// are checked at whatever order appears.
pub fn classify_lowest(g: &Multigraph, lowest: &LowestQPart) -> UstOutcome {
    if lowest.is_zero() {
        return UstOutcome::Zero;
    }
    let strict = g.is_connected() && !g.is_loop(g.e()) && !g.is_loop(g.f());
    if strict && lowest.q_order < 2 {
        return UstOutcome::Anomaly {
            q_order: lowest.q_order,
            part: lowest.part.clone(),
        };
    }
    if strict && lowest.q_order > 2 {
        return UstOutcome::Zero;
    }
    let (degree, part) = lowest.lowest_degree();
    match normalized_root(&part) {
        Some(root) => UstOutcome::Square {
            q_order: lowest.q_order,
            degree,
            unit_coefficients: has_unit_coefficients(&root),
            root,
        },
        None => UstOutcome::NotSquare {
            q_order: lowest.q_order,
            degree,
            part,
        },
    }
}
