use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{integer, rational_sqrt, Monomial, PolyError, QPoly, Rational};

/// Ordered edge-variable names; `q` is always the extra last variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Registry {
    edges: Vec<String>,
}

impl Registry {
    pub fn new(edges: Vec<String>) -> Arc<Self> {
        Arc::new(Self { edges })
    }

    pub fn edges(&self) -> &[String] {
        &self.edges
    }

    pub fn edge_vars(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e == name)
    }
}

/// Per-edge weights for full evaluation, keyed by edge id.
pub type Weights = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Value(Rational),
    Poly(MPoly),
}

/// Sparse polynomial in the edge variables of a registry and `q`.
///
/// Zero coefficients are never stored, so structural equality of the term
/// maps is polynomial equality.
#[derive(Debug, Clone)]
pub struct MPoly {
    registry: Arc<Registry>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for MPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.registry == other.registry
    }
}

impl MPoly {
    pub fn zero(registry: &Arc<Registry>) -> Self {
        Self {
            registry: Arc::clone(registry),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(registry: &Arc<Registry>, value: Rational) -> Self {
        Self::term(registry, Monomial::one(registry.edge_vars()), value)
    }

    pub fn one(registry: &Arc<Registry>) -> Self {
        Self::constant(registry, Rational::one())
    }

    pub fn term(registry: &Arc<Registry>, monomial: Monomial, coeff: Rational) -> Self {
        assert_eq!(monomial.exponents().len(), registry.edge_vars() + 1);
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(monomial, coeff);
        }
        Self {
            registry: Arc::clone(registry),
            terms,
        }
    }

    /// `x_i` for the edge variable at registry index `i`.
    pub fn var(registry: &Arc<Registry>, index: usize) -> Self {
        let mut exps = vec![0; registry.edge_vars() + 1];
        exps[index] = 1;
        Self::term(registry, Monomial::from_exponents(exps), Rational::one())
    }

    pub fn q(registry: &Arc<Registry>) -> Self {
        Self::q_pow(registry, 1)
    }

    pub fn q_pow(registry: &Arc<Registry>, power: u32) -> Self {
        let mut exps = vec![0; registry.edge_vars() + 1];
        exps[registry.edge_vars()] = power;
        Self::term(registry, Monomial::from_exponents(exps), Rational::one())
    }

    /// Builds a polynomial from `(edge exponents, q exponent, coefficient)`
    /// triples, merging repeated monomials.
    pub fn from_terms<I>(registry: &Arc<Registry>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in terms {
            assert_eq!(m.exponents().len(), registry.edge_vars() + 1);
            *acc.entry(m).or_insert_with(Rational::zero) += c;
        }
        Self::from_map(registry, acc)
    }

    fn from_map(registry: &Arc<Registry>, acc: HashMap<Monomial, Rational>) -> Self {
        Self {
            registry: Arc::clone(registry),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending canonical order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, monomial: &Monomial) -> Rational {
        self.terms
            .get(monomial)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn trailing_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next()
    }

    fn same_registry(&self, other: &Self) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry {
            Ok(())
        } else {
            Err(PolyError::RegistryMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.same_registry(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.same_registry(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.same_registry(other)?;
        let mut acc: HashMap<Monomial, Rational> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Ok(Self::from_map(&self.registry, acc))
    }

    /// Adds `coeff * monomial` in place.
    pub fn add_term(&mut self, monomial: Monomial, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(monomial) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero(&self.registry);
        }
        Self {
            registry: Arc::clone(&self.registry),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, monomial: &Monomial) -> Self {
        Self {
            registry: Arc::clone(&self.registry),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.mul(monomial), c.clone()))
                .collect(),
        }
    }

    /// Exact quotient `self / divisor`.
    ///
    /// Runs leading-term reduction in canonical order; terms that the
    /// divisor's leading monomial cannot reach go to the remainder, and a
    /// nonzero remainder is reported as [`PolyError::NonDivisible`].
    pub fn exact_div(&self, divisor: &Self) -> Result<Self, PolyError> {
        self.same_registry(divisor)?;
        let (lead_m, lead_c) = match divisor.leading_term() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(PolyError::DivisionByZero),
        };
        let mut rest = self.clone();
        let mut quotient = Self::zero(&self.registry);
        let mut remainder = Self::zero(&self.registry);
        while let Some((m, c)) = rest.terms.pop_last() {
            match m.checked_div(&lead_m) {
                Some(shift) => {
                    let factor = &c / &lead_c;
                    for (dm, dc) in divisor.terms.iter().rev().skip(1) {
                        rest.add_term(dm.mul(&shift), -(dc * &factor));
                    }
                    quotient.add_term(shift, factor);
                }
                None => remainder.add_term(m, c),
            }
        }
        if remainder.is_zero() {
            Ok(quotient)
        } else {
            Err(PolyError::NonDivisible { remainder })
        }
    }

    /// Coefficient of the edge monomial `pattern` as a polynomial in `q`.
    pub fn coeff_of(&self, pattern: &[u32]) -> QPoly {
        assert_eq!(pattern.len(), self.registry.edge_vars(), "pattern length");
        let mut coeffs: Vec<Rational> = Vec::new();
        for (m, c) in &self.terms {
            if m.edge_exponents() == pattern {
                let d = m.q_exponent() as usize;
                if coeffs.len() <= d {
                    coeffs.resize(d + 1, Rational::zero());
                }
                coeffs[d] += c;
            }
        }
        QPoly::new(coeffs)
    }

    /// Substitutes a value for `q`, keeping the edge variables.
    pub fn subst_q(&self, q: &Rational) -> Self {
        let mut powers: Vec<Rational> = vec![Rational::one()];
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let d = m.q_exponent() as usize;
            while powers.len() <= d {
                let next = powers.last().unwrap() * q;
                powers.push(next);
            }
            *acc.entry(m.without_q()).or_insert_with(Rational::zero) += c * &powers[d];
        }
        Self::from_map(&self.registry, acc)
    }

    /// Substitutes values for the edge variables named in `weights`, leaving
    /// the others (and `q`) symbolic.
    pub fn subst_edges(&self, weights: &Weights) -> Result<Self, PolyError> {
        let mut values: Vec<Option<Rational>> = vec![None; self.registry.edge_vars()];
        for (name, w) in weights {
            let i = self
                .registry
                .index_of(name)
                .ok_or_else(|| PolyError::UnknownVariable(name.clone()))?;
            values[i] = Some(w.clone());
        }
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = m.exponents().to_vec();
            for (i, value) in values.iter().enumerate() {
                if let Some(w) = value {
                    if exps[i] > 0 {
                        coeff *= num_traits::pow(w.clone(), exps[i] as usize);
                        exps[i] = 0;
                    }
                }
            }
            *acc.entry(Monomial::from_exponents(exps))
                .or_insert_with(Rational::zero) += coeff;
        }
        Ok(Self::from_map(&self.registry, acc))
    }

    /// Full evaluation. Every edge variable that occurs must have a weight.
    pub fn eval(&self, q: &Rational, weights: &Weights) -> Result<Rational, PolyError> {
        let mut values: Vec<Option<&Rational>> = vec![None; self.registry.edge_vars()];
        for (name, w) in weights {
            let i = self
                .registry
                .index_of(name)
                .ok_or_else(|| PolyError::UnknownVariable(name.clone()))?;
            values[i] = Some(w);
        }
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.edge_exponents().iter().enumerate() {
                if e > 0 {
                    let w = values[i]
                        .ok_or_else(|| PolyError::MissingWeight(self.registry.edges[i].clone()))?;
                    term *= num_traits::pow(w.clone(), e as usize);
                }
            }
            term *= num_traits::pow(q.clone(), m.q_exponent() as usize);
            total += term;
        }
        Ok(total)
    }

    /// `q`-only substitution without weights, full evaluation with them.
    pub fn evaluate(
        &self,
        q: &Rational,
        weights: Option<&Weights>,
    ) -> Result<Evaluation, PolyError> {
        match weights {
            Some(w) => self.eval(q, w).map(Evaluation::Value),
            None => Ok(Evaluation::Poly(self.subst_q(q))),
        }
    }

    /// Square root with positive leading coefficient, if `self` is a perfect
    /// square.
    ///
    /// The root is built from its leading term down: each new term is the
    /// leading term of the residual divided by twice the root's leading
    /// term. The search stops once a candidate term squares to something
    /// below the trailing monomial of `self`.
    pub fn sqrt(&self) -> Option<Self> {
        let registry = &self.registry;
        let (lead_m, lead_c) = match self.leading_term() {
            Some(t) => t,
            None => return Some(Self::zero(registry)),
        };
        let floor = self.trailing_term()?.0.clone();
        let root_m = lead_m.halve()?;
        let root_c = rational_sqrt(lead_c)?;
        let twice_lead = &root_c * integer(2);

        let mut root = Self::term(registry, root_m.clone(), root_c);
        let mut residual = self.clone();
        residual.terms.remove(lead_m);
        let mut last = root_m.clone();

        while let Some((m, c)) = residual.leading_term() {
            let next_m = m.checked_div(&root_m)?;
            if next_m >= last || next_m.mul(&next_m) < floor {
                return None;
            }
            let next_c = c / &twice_lead;
            // residual -= 2 * root * t + t^2
            let two_t = &next_c * integer(2);
            for (rm, rc) in &root.terms {
                residual.add_term(rm.mul(&next_m), -(rc * &two_t));
            }
            residual.add_term(next_m.mul(&next_m), -(&next_c * &next_c));
            root.add_term(next_m.clone(), next_c);
            last = next_m;
        }
        Some(root)
    }

    /// Highest exponent of the edge variable at `index`.
    pub fn degree_in(&self, index: usize) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exponents()[index])
            .max()
            .unwrap_or(0)
    }

    pub fn max_edge_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.edge_exponents().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn q_degree(&self) -> u32 {
        self.degree_in(self.registry.edge_vars())
    }

    pub fn contains_var(&self, index: usize) -> bool {
        self.terms.keys().any(|m| m.exponents()[index] > 0)
    }

    /// Groups terms by `q` exponent; each group has its `q` stripped.
    pub fn by_q_power(&self) -> BTreeMap<u32, MPoly> {
        let mut groups: BTreeMap<u32, MPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            groups
                .entry(m.q_exponent())
                .or_insert_with(|| Self::zero(&self.registry))
                .terms
                .insert(m.without_q(), c.clone());
        }
        groups
    }

    /// Same terms over another registry with the same variable names.
    pub fn with_registry(&self, registry: &Arc<Registry>) -> Result<Self, PolyError> {
        if registry.edges != self.registry.edges {
            return Err(PolyError::RegistryMismatch);
        }
        Ok(Self {
            registry: Arc::clone(registry),
            terms: self.terms.clone(),
        })
    }

    fn write_monomial(&self, f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
        let mut first = true;
        let names = self
            .registry
            .edges
            .iter()
            .map(|e| format!("x_{e}"))
            .chain(std::iter::once("q".to_string()));
        for (name, &e) in names.zip(m.exponents()) {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Terms in ascending canonical order, e.g. `x_g*q^3 + x_g^2*q^2`.
impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let magnitude = c.abs();
            if m.is_one() {
                write!(f, "{magnitude}")?;
            } else {
                if !magnitude.is_one() {
                    write!(f, "{magnitude}*")?;
                }
                self.write_monomial(f, m)?;
            }
        }
        Ok(())
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    /// Panics on mismatched registries; use [`MPoly::try_add`] to handle that.
    fn add(self, rhs: &MPoly) -> MPoly {
        self.try_add(rhs).expect("registry mismatch")
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self.try_sub(rhs).expect("registry mismatch")
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        self.try_mul(rhs).expect("registry mismatch")
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        self.scale(&-Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::rational;

    fn reg() -> Arc<Registry> {
        Registry::new(["e", "f", "g", "h", "k", "l"].map(String::from).to_vec())
    }

    /// x^exps * q^qe with edge exponents listed for (e, f, g, h, k, l).
    fn mono(r: &Arc<Registry>, exps: [u32; 6], qe: u32, c: i64) -> MPoly {
        MPoly::term(r, Monomial::from_parts(&exps, qe), integer(c))
    }

    #[test]
    fn triangle_product() {
        let r = reg();
        let a = &mono(&r, [1, 0, 0, 0, 0, 0], 2, 1) + &mono(&r, [1, 0, 1, 0, 0, 0], 1, 1);
        let b = &mono(&r, [0, 1, 0, 0, 0, 0], 2, 1) + &mono(&r, [0, 1, 1, 0, 0, 0], 1, 1);
        let expected = [
            mono(&r, [1, 1, 0, 0, 0, 0], 4, 1),
            mono(&r, [1, 1, 1, 0, 0, 0], 3, 2),
            mono(&r, [1, 1, 2, 0, 0, 0], 2, 1),
        ]
        .iter()
        .fold(MPoly::zero(&r), |acc, t| &acc + t);
        assert_eq!(&a * &b, expected);
        assert_eq!(&a + &MPoly::zero(&r), a);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn registry_mismatch_is_an_error() {
        let a = MPoly::one(&reg());
        let b = MPoly::one(&Registry::new(vec!["g".into()]));
        assert!(matches!(a.try_add(&b), Err(PolyError::RegistryMismatch)));
        assert!(matches!(a.try_mul(&b), Err(PolyError::RegistryMismatch)));
    }

    #[test]
    fn exact_division_of_the_triangle_difference() {
        let r = reg();
        // x_e x_f x_g (q^3 - q^4) + x_e x_f x_g^2 (q^2 - q^3)
        let d = [
            mono(&r, [1, 1, 1, 0, 0, 0], 3, 1),
            mono(&r, [1, 1, 1, 0, 0, 0], 4, -1),
            mono(&r, [1, 1, 2, 0, 0, 0], 2, 1),
            mono(&r, [1, 1, 2, 0, 0, 0], 3, -1),
        ]
        .iter()
        .fold(MPoly::zero(&r), |acc, t| &acc + t);
        let xexf = mono(&r, [1, 1, 0, 0, 0, 0], 0, 1);
        let divisor = &xexf - &mono(&r, [1, 1, 0, 0, 0, 0], 1, 1);
        let m = d.exact_div(&divisor).unwrap();
        assert_eq!(m.to_string(), "x_g*q^3 + x_g^2*q^2");
        assert_eq!(d.exact_div(&MPoly::one(&r)).unwrap(), d);

        let x_g = MPoly::var(&r, 2);
        let err = (&x_g + &MPoly::one(&r)).exact_div(&x_g).unwrap_err();
        match err {
            PolyError::NonDivisible { remainder } => assert_eq!(remainder, MPoly::one(&r)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            d.exact_div(&MPoly::zero(&r)),
            Err(PolyError::DivisionByZero)
        ));
    }

    #[test]
    fn coefficient_slices() {
        let r = reg();
        let m = &mono(&r, [0, 0, 1, 0, 0, 0], 3, 1) + &mono(&r, [0, 0, 2, 0, 0, 0], 2, 1);
        assert_eq!(
            m.coeff_of(&[0, 0, 1, 0, 0, 0]),
            QPoly::monomial(integer(1), 3)
        );
        assert_eq!(
            m.coeff_of(&[0, 0, 2, 0, 0, 0]),
            QPoly::monomial(integer(1), 2)
        );
        assert!(m.coeff_of(&[0, 0, 1, 1, 0, 0]).is_zero());
    }

    #[test]
    fn evaluation() {
        let r = reg();
        let m = &mono(&r, [0, 0, 1, 0, 0, 0], 3, 1) + &mono(&r, [0, 0, 2, 0, 0, 0], 2, 1);
        assert_eq!(m.subst_q(&integer(1)).to_string(), "x_g + x_g^2");
        let weights: Weights = [("g".to_string(), integer(2))].into_iter().collect();
        assert_eq!(m.eval(&rational(1, 2), &weights).unwrap(), rational(5, 4));
        assert!(matches!(
            m.eval(&integer(1), &Weights::new()),
            Err(PolyError::MissingWeight(name)) if name == "g"
        ));
        let with_const = &m + &MPoly::constant(&r, integer(7));
        let zeros: Weights = r.edges().iter().map(|e| (e.clone(), integer(0))).collect();
        assert_eq!(with_const.eval(&integer(0), &zeros).unwrap(), integer(7));
        assert_eq!(
            m.evaluate(&integer(1), None).unwrap(),
            Evaluation::Poly(m.subst_q(&integer(1)))
        );
    }

    #[test]
    fn square_roots() {
        let r = reg();
        let gh = mono(&r, [0, 0, 1, 1, 0, 0], 0, 1);
        let kl = mono(&r, [0, 0, 0, 0, 1, 1], 0, 1);
        let diff = &gh - &kl;
        let square = &diff * &diff;
        assert_eq!(square.sqrt(), Some(diff.clone()));
        assert_eq!((-&diff).mul(&-&diff).sqrt(), Some(diff));

        let xg = MPoly::var(&r, 2);
        assert_eq!((&xg * &xg).sqrt(), Some(xg.clone()));
        assert_eq!((&(&xg * &xg) + &xg).sqrt(), None);
        assert_eq!(MPoly::zero(&r).sqrt(), Some(MPoly::zero(&r)));
        assert_eq!(
            MPoly::constant(&r, rational(9, 4)).sqrt(),
            Some(MPoly::constant(&r, rational(3, 2)))
        );
        assert_eq!(MPoly::constant(&r, integer(-1)).sqrt(), None);
    }

    #[test]
    fn display_formats() {
        let r = reg();
        let p = &(&mono(&r, [0, 0, 1, 0, 0, 0], 0, -2) + &MPoly::constant(&r, rational(1, 2)))
            + &mono(&r, [0, 0, 0, 1, 0, 0], 1, 1);
        assert_eq!(p.to_string(), "1/2 - 2*x_g + x_h*q");
        assert_eq!(MPoly::zero(&r).to_string(), "0");
    }
}
