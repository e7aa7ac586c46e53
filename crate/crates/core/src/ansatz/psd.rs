use num_traits::{One, Signed, Zero};

use super::QuadForm;
use crate::polyring::{rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsdOutcome {
    Psd,
    /// `witnessᵀ Q witness = value < 0`.
    NotPsd {
        witness: Vec<Rational>,
        value: Rational,
    },
}

impl PsdOutcome {
    pub fn is_psd(&self) -> bool {
        matches!(self, Self::Psd)
    }
}

pub fn quadratic_value(matrix: &[Vec<Rational>], v: &[Rational]) -> Rational {
    let mut total = Rational::zero();
    for (i, row) in matrix.iter().enumerate() {
        if v[i].is_zero() {
            continue;
        }
        for (j, entry) in row.iter().enumerate() {
            if !v[j].is_zero() && !entry.is_zero() {
                total += &v[i] * entry * &v[j];
            }
        }
    }
    total
}

/// Decides positive semidefiniteness of a symmetric rational matrix by
/// symmetric elimination with diagonal pivoting.
pub fn psd_check(matrix: &[Vec<Rational>]) -> PsdOutcome {
    match eliminate(matrix) {
        None => PsdOutcome::Psd,
        Some(lifted) => {
            let witness = simple_witness(matrix).unwrap_or(lifted);
            let value = quadratic_value(matrix, &witness);
            assert!(value.is_negative(), "witness must certify indefiniteness");
            PsdOutcome::NotPsd { witness, value }
        }
    }
}

/// Looks for a witness among `e_i` and `e_i ± e_j`.
fn simple_witness(matrix: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = matrix.len();
    let unit = |pairs: &[(usize, i64)]| {
        let mut v = vec![Rational::zero(); n];
        for &(i, c) in pairs {
            v[i] = rational(c, 1);
        }
        v
    };
    if let Some(i) = (0..n).find(|&i| matrix[i][i].is_negative()) {
        return Some(unit(&[(i, 1)]));
    }
    for i in 0..n {
        for j in i + 1..n {
            for sign in [1, -1] {
                let v = unit(&[(i, 1), (j, sign)]);
                if quadratic_value(matrix, &v).is_negative() {
                    return Some(v);
                }
            }
        }
    }
    None
}

/// Runs the elimination; on failure returns a witness vector.
fn eliminate(matrix: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = matrix.len();
    let mut s: Vec<Vec<Rational>> = matrix.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    // (pivot, multipliers S_pj / S_pp over the indices active after it)
    let mut steps: Vec<(usize, Vec<(usize, Rational)>)> = Vec::new();
    loop {
        let mut local = vec![Rational::zero(); n];
        if let Some(&i) = active.iter().find(|&&i| s[i][i].is_negative()) {
            local[i] = Rational::one();
            return Some(lift(local, &steps));
        }
        for &i in &active {
            if s[i][i].is_zero() {
                if let Some(&j) = active.iter().find(|&&j| j != i && !s[i][j].is_zero()) {
                    let c = -(&s[j][j] + Rational::one()) / (rational(2, 1) * &s[i][j]);
                    local[i] = c;
                    local[j] = Rational::one();
                    return Some(lift(local, &steps));
                }
            }
        }
        let pos = active.iter().position(|&i| s[i][i].is_positive())?;
        let p = active.remove(pos);
        let pivot = s[p][p].clone();
        let multipliers: Vec<(usize, Rational)> = active
            .iter()
            .map(|&j| (j, &s[p][j] / &pivot))
            .filter(|(_, m)| !m.is_zero())
            .collect();
        for &(i, ref mi) in &multipliers {
            for &(j, ref mj) in &multipliers {
                let delta = mi * mj * &pivot;
                s[i][j] -= delta;
            }
        }
        steps.push((p, multipliers));
    }
}

/// Turns a witness of a Schur complement into one of the original matrix.
fn lift(mut v: Vec<Rational>, steps: &[(usize, Vec<(usize, Rational)>)]) -> Vec<Rational> {
    for (p, multipliers) in steps.iter().rev() {
        let mut value = Rational::zero();
        for (j, m) in multipliers {
            value -= m * &v[*j];
        }
        v[*p] = value;
    }
    v
}

pub fn default_grid() -> Vec<Rational> {
    (0..=10).map(|i| rational(i, 10)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPoint {
    pub q: Rational,
    pub outcome: PsdOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn passes(&self) -> bool {
        self.points.iter().all(|p| p.outcome.is_psd())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| !p.outcome.is_psd())
    }
}

impl QuadForm {
    pub fn psd_check(&self, q: &Rational) -> PsdOutcome {
        psd_check(&self.at(q))
    }

    pub fn psd_sweep(&self, samples: &[Rational]) -> SweepReport {
        SweepReport {
            points: samples
                .iter()
                .map(|q| SweepPoint {
                    q: q.clone(),
                    outcome: self.psd_check(q),
                })
                .collect(),
        }
    }
}
