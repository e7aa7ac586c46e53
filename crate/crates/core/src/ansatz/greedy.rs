//! Heuristic search for an ansatz decomposition.
//!
//! Every term `c q^s x^μ` of `M/q²` is placed in one bucket `(β, γ)` as
//! `x^β x^γ x^α x^α'` with `α, α' ∈ A_{β,γ}`. Squares (`α = α'`) are placed
//! first; cross terms then prefer buckets whose two diagonal entries are
//! already filled. Several tie-break orders are tried and a result is only
//! returned once it passes the identity and the PSD sweep. The bucket chosen
//! for a term is arbitrary whenever more than one fits.

use std::collections::BTreeMap;

use super::{
    default_grid, half, identity_check_with, m_over_q2, AnsatzDecomp, AnsatzEntry, QuadForm,
};
use crate::cluster::m_poly;
use crate::multigraph::{submasks, EdgeSet, Multigraph, Universe};
use crate::paracel::ParacelIndex;
use crate::polyring::{QPoly, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Placement {
    beta: u64,
    gamma: u64,
    a: u64,
    b: u64,
}

impl Placement {
    fn is_diagonal(&self) -> bool {
        self.a == self.b
    }
}

#[derive(Clone, Copy)]
enum Order {
    SmallGamma,
    LargeGamma,
    SmallBeta,
}

impl Order {
    fn key(self, p: &Placement) -> (i64, i64, Placement) {
        let (gb, bb) = (p.gamma.count_ones() as i64, p.beta.count_ones() as i64);
        match self {
            Self::SmallGamma => (gb, bb, *p),
            Self::LargeGamma => (-gb, bb, *p),
            Self::SmallBeta => (bb, gb, *p),
        }
    }
}

/// All placements of the edge monomial `exps` (entries 0..=2).
fn placements(index: &ParacelIndex, exps: &[u32]) -> Vec<Placement> {
    let support = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .fold(0u64, |acc, (i, _)| acc | 1 << i);
    let doubled = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e == 2)
        .fold(0u64, |acc, (i, _)| acc | 1 << i);
    if exps.iter().any(|&e| e > 2) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for gamma in submasks(support) {
        for beta in submasks(support & !gamma) {
            let shifted = beta | gamma;
            // exponents left for x^α x^α' after removing x^β x^γ
            let twice = doubled & !shifted;
            let once = (support & !shifted & !doubled) | (doubled & shifted);
            for extra in submasks(once) {
                let a = twice | extra;
                let b = twice | (once & !extra);
                if a > b {
                    continue;
                }
                if index.compatible(beta, gamma, a) && index.compatible(beta, gamma, b) {
                    out.push(Placement { beta, gamma, a, b });
                }
            }
        }
    }
    out
}

struct Bucket {
    basis: Vec<u64>,
    entries: BTreeMap<(usize, usize), QPoly>,
}

impl Bucket {
    fn slot(&mut self, alpha: u64) -> usize {
        match self.basis.iter().position(|&x| x == alpha) {
            Some(i) => i,
            None => {
                self.basis.push(alpha);
                self.basis.len() - 1
            }
        }
    }

    fn has_diagonal(&self, alpha: u64) -> bool {
        self.basis
            .iter()
            .position(|&x| x == alpha)
            .is_some_and(|i| self.entries.get(&(i, i)).is_some_and(|c| !c.is_zero()))
    }

    fn add(&mut self, i: usize, j: usize, c: &QPoly) {
        let slot = self.entries.entry((i, j)).or_default();
        *slot = &*slot + c;
    }
}

fn build(terms: &[(Vec<u32>, QPoly, Vec<Placement>)], order: Order) -> Option<AnsatzDecomp> {
    let mut buckets: BTreeMap<(u64, u64), Bucket> = BTreeMap::new();
    let place = |p: &Placement, c: &QPoly, buckets: &mut BTreeMap<(u64, u64), Bucket>| {
        let bucket = buckets.entry((p.beta, p.gamma)).or_insert_with(|| Bucket {
            basis: Vec::new(),
            entries: BTreeMap::new(),
        });
        let (i, j) = (bucket.slot(p.a), bucket.slot(p.b));
        if i == j {
            bucket.add(i, i, c);
        } else {
            let h = c.scale(&half());
            bucket.add(i, j, &h);
            bucket.add(j, i, &h);
        }
    };
    let mut deferred = Vec::new();
    for (_, c, options) in terms {
        let best = options
            .iter()
            .filter(|p| p.is_diagonal())
            .min_by_key(|p| order.key(p));
        match best {
            Some(p) => place(p, c, &mut buckets),
            None => deferred.push((c, options)),
        }
    }
    for (c, options) in deferred {
        let p = options.iter().min_by_key(|p| {
            let filled = buckets
                .get(&(p.beta, p.gamma))
                .is_some_and(|b| b.has_diagonal(p.a) && b.has_diagonal(p.b));
            (!filled, order.key(p))
        })?;
        place(p, c, &mut buckets);
    }
    let entries = buckets
        .into_iter()
        .map(|((beta, gamma), bucket)| {
            let n = bucket.basis.len();
            let mut matrix = vec![vec![QPoly::zero(); n]; n];
            for ((i, j), c) in bucket.entries {
                matrix[i][j] = c;
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| bucket.basis[i]);
            let matrix = order
                .iter()
                .map(|&i| order.iter().map(|&j| matrix[i][j].clone()).collect())
                .collect();
            let basis = order
                .iter()
                .map(|&i| EdgeSet::from_mask(bucket.basis[i], Universe::Unmarked))
                .collect();
            AnsatzEntry {
                beta: EdgeSet::from_mask(beta, Universe::Unmarked),
                gamma: EdgeSet::from_mask(gamma, Universe::Unmarked),
                form: QuadForm::new(basis, matrix).expect("symmetric by construction"),
            }
        })
        .collect();
    Some(AnsatzDecomp { entries })
}

/// A decomposition passing [`identity_check`](super::identity_check) and a
/// PSD sweep on the default grid, or `None` if the heuristic finds none.
pub fn greedy_decompose(g: &Multigraph) -> Option<AnsatzDecomp> {
    let m = m_poly(g).ok()?;
    if m.is_zero() {
        return Some(AnsatzDecomp::default());
    }
    let target = m_over_q2(&m).ok()?;
    let index = ParacelIndex::new(g);
    let mut grouped: BTreeMap<Vec<u32>, QPoly> = BTreeMap::new();
    for (mono, c) in target.terms() {
        let slot = grouped.entry(mono.edge_exponents().to_vec()).or_default();
        *slot = &*slot + &QPoly::monomial(c.clone(), mono.q_exponent() as usize);
    }
    let terms: Vec<(Vec<u32>, QPoly, Vec<Placement>)> = grouped
        .into_iter()
        .map(|(exps, c)| {
            let options = placements(&index, &exps);
            (exps, c, options)
        })
        .collect();
    if terms.iter().any(|(_, _, options)| options.is_empty()) {
        return None;
    }
    let grid: Vec<Rational> = default_grid();
    [Order::SmallGamma, Order::LargeGamma, Order::SmallBeta]
        .into_iter()
        .filter_map(|order| build(&terms, order))
        .find(|d| {
            identity_check_with(g, &m, d).is_ok_and(|r| r.holds())
                && d.entries.iter().all(|e| e.form.psd_sweep(&grid).passes())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::identity_check;
    use crate::instances;

    #[test]
    fn triangle_decomposes() {
        let g = instances::k3();
        let d = greedy_decompose(&g).expect("K3 decomposes");
        assert!(identity_check(&g, &d).unwrap().holds());
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn vanishing_m_gives_empty_decomposition() {
        let g = Multigraph::from_triples(3, &[("e", 0, 1), ("f", 1, 2), ("g", 0, 1)], "e", "f")
            .unwrap();
        assert_eq!(greedy_decompose(&g), Some(AnsatzDecomp::default()));
    }

    #[test]
    fn parallel_pair_is_one_scalar_form() {
        let g = Multigraph::from_triples(2, &[("e", 0, 1), ("f", 0, 1)], "e", "f").unwrap();
        let d = greedy_decompose(&g).unwrap();
        assert_eq!(
            d.to_json(&g),
            r#"{"entries":[{"beta":[],"gamma":[],"basis":[[]],"matrix":[[["1"]]]}]}"#
        );
    }

    #[test]
    fn results_are_validated() {
        for g in [instances::k4_minus_edge(), instances::k4()] {
            if let Some(d) = greedy_decompose(&g) {
                assert!(identity_check(&g, &d).unwrap().holds());
                let grid = default_grid();
                assert!(d.entries.iter().all(|e| e.form.psd_sweep(&grid).passes()));
            }
        }
    }
}
