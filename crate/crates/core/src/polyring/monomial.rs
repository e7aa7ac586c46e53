use std::cmp::Ordering;

/// Exponent vector: one entry per edge variable in registry order, then the
/// exponent of `q` last.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// vector compared entry by entry (a larger exponent on an earlier variable
/// is larger).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn one(edge_vars: usize) -> Self {
        Self(vec![0; edge_vars + 1].into_boxed_slice())
    }

    /// `exponents` holds the edge exponents followed by the `q` exponent.
    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        assert!(!exponents.is_empty(), "monomial needs a q slot");
        Self(exponents.into_boxed_slice())
    }

    pub fn from_parts(edge_exponents: &[u32], q_exponent: u32) -> Self {
        let mut exps = edge_exponents.to_vec();
        exps.push(q_exponent);
        Self(exps.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn edge_exponents(&self) -> &[u32] {
        &self.0[..self.0.len() - 1]
    }

    pub fn q_exponent(&self) -> u32 {
        self.0[self.0.len() - 1]
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// `self / other` when every exponent of `other` fits.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Box<[u32]>>>()
            .map(Self)
    }

    /// The monomial whose square is `self`, if all exponents are even.
    pub fn halve(&self) -> Option<Self> {
        self.0
            .iter()
            .map(|&e| (e % 2 == 0).then_some(e / 2))
            .collect::<Option<Box<[u32]>>>()
            .map(Self)
    }

    pub fn without_q(&self) -> Self {
        let mut exps = self.0.to_vec();
        *exps.last_mut().unwrap() = 0;
        Self(exps.into_boxed_slice())
    }

    pub fn with_q(&self, q_exponent: u32) -> Self {
        let mut exps = self.0.to_vec();
        *exps.last_mut().unwrap() = q_exponent;
        Self(exps.into_boxed_slice())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
