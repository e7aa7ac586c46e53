//! JSON form of [`MPoly`]:
//! `{"terms":[{"exp":{"g":1,"q":3},"num":"1","den":"1"}, ...]}`.
//!
//! Terms appear in ascending canonical order, exponent keys in registry order
//! with `q` last, and zero exponents are omitted. Numerators and
//! denominators are decimal strings, so big integers survive unchanged.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{MPoly, Monomial, PolyError, Rational, Registry};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MPolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Exponents,
    pub num: String,
    pub den: String,
}

/// Exponent map that keeps its key order through a round trip.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Exponents(pub Vec<(String, u32)>);

impl Serialize for Exponents {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, e) in &self.0 {
            map.serialize_entry(name, e)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Exponents {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct OrderedVisitor;
        impl<'de> Visitor<'de> for OrderedVisitor {
            type Value = Exponents;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from variable name to exponent")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Exponents, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, u32>()? {
                    entries.push((k, v));
                }
                Ok(Exponents(entries))
            }
        }
        deserializer.deserialize_map(OrderedVisitor)
    }
}

impl MPoly {
    pub fn to_json_model(&self) -> MPolyJson {
        let names = self.registry().edges();
        let terms = self
            .terms()
            .map(|(m, c)| {
                let mut exp: Vec<(String, u32)> = names
                    .iter()
                    .zip(m.edge_exponents())
                    .filter(|(_, &e)| e > 0)
                    .map(|(n, &e)| (n.clone(), e))
                    .collect();
                if m.q_exponent() > 0 {
                    exp.push(("q".to_string(), m.q_exponent()));
                }
                TermJson {
                    exp: Exponents(exp),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                }
            })
            .collect();
        MPolyJson { terms }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_model()).expect("serializable")
    }

    pub fn from_json_model(model: &MPolyJson, registry: &Arc<Registry>) -> Result<Self, PolyError> {
        let n = registry.edge_vars();
        let mut terms = Vec::with_capacity(model.terms.len());
        for term in &model.terms {
            let mut exps = vec![0u32; n + 1];
            for (name, e) in &term.exp.0 {
                let slot = if name == "q" {
                    n
                } else {
                    registry
                        .index_of(name)
                        .ok_or_else(|| PolyError::UnknownVariable(name.clone()))?
                };
                exps[slot] += e;
            }
            let num: BigInt = term
                .num
                .parse()
                .map_err(|_| PolyError::Json(format!("bad numerator `{}`", term.num)))?;
            let den: BigInt = term
                .den
                .parse()
                .map_err(|_| PolyError::Json(format!("bad denominator `{}`", term.den)))?;
            if den.is_zero() {
                return Err(PolyError::Json("zero denominator".into()));
            }
            terms.push((Monomial::from_exponents(exps), Rational::new(num, den)));
        }
        Ok(Self::from_terms(registry, terms))
    }

    pub fn from_json(text: &str, registry: &Arc<Registry>) -> Result<Self, PolyError> {
        let model: MPolyJson =
            serde_json::from_str(text).map_err(|e| PolyError::Json(e.to_string()))?;
        Self::from_json_model(&model, registry)
    }
}
