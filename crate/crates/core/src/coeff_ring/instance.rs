//! Concrete coefficient rings selected at runtime from a descriptor.

use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{parse_elem, CoeffError, CoeffRing, LocalRing, MPoly, MPolyRing, Monomial};
use crate::local_ring::{FiniteField, LocalElem, LocalFieldSpec};

/// A finite product of rings of one type, with componentwise operations.
#[derive(Clone, Debug)]
pub struct ProductRing<R: CoeffRing> {
    factors: Vec<R>,
}

impl<R: CoeffRing> ProductRing<R> {
    pub fn new(factors: Vec<R>) -> Result<Self, CoeffError> {
        if factors.is_empty() {
            return Err(CoeffError::Instance("a product needs at least one factor".into()));
        }
        let p = factors[0].prime();
        if factors.iter().any(|f| f.prime() != p) {
            return Err(CoeffError::Instance("factors have different characteristic".into()));
        }
        Ok(ProductRing { factors })
    }

    pub fn factors(&self) -> &[R] {
        &self.factors
    }

    fn zip(&self, a: &[R::Elem], b: &[R::Elem], f: impl Fn(&R, &R::Elem, &R::Elem) -> R::Elem) -> Vec<R::Elem> {
        self.factors.iter().zip(a.iter().zip(b)).map(|(r, (x, y))| f(r, x, y)).collect()
    }
}

impl<R: CoeffRing> CoeffRing for ProductRing<R> {
    type Elem = Vec<R::Elem>;

    fn zero(&self) -> Self::Elem {
        self.factors.iter().map(|r| r.zero()).collect()
    }

    fn one(&self) -> Self::Elem {
        self.factors.iter().map(|r| r.one()).collect()
    }

    fn from_int(&self, n: i64) -> Self::Elem {
        self.factors.iter().map(|r| r.from_int(n)).collect()
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.zip(a, b, |r, x, y| r.add(x, y))
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.factors.iter().zip(a).map(|(r, x)| r.neg(x)).collect()
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, CoeffError> {
        self.factors.iter().zip(a.iter().zip(b)).map(|(r, (x, y))| r.mul(x, y)).collect()
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.factors.iter().zip(a).all(|(r, x)| r.is_zero(x))
    }

    fn prime(&self) -> u64 {
        self.factors[0].prime()
    }

    fn is_char_p(&self) -> bool {
        self.factors.iter().all(|r| r.is_char_p())
    }

    fn q_power_frobenius(&self, a: &Self::Elem, q: u64) -> Result<Self::Elem, CoeffError> {
        self.factors.iter().zip(a).map(|(r, x)| r.q_power_frobenius(x, q)).collect()
    }

    fn q_root(&self, a: &Self::Elem, q: u64) -> Option<Self::Elem> {
        self.factors.iter().zip(a).map(|(r, x)| r.q_root(x, q)).collect()
    }

    fn elements(&self) -> Option<Vec<Self::Elem>> {
        let lists: Vec<Vec<R::Elem>> = self.factors.iter().map(|r| r.elements()).collect::<Option<_>>()?;
        let mut out: Vec<Self::Elem> = vec![Vec::new()];
        for list in &lists {
            if out.len() * list.len() > 1 << 22 {
                return None;
            }
            out = out
                .iter()
                .flat_map(|prefix| {
                    list.iter().map(move |x| {
                        let mut v = prefix.clone();
                        v.push(x.clone());
                        v
                    })
                })
                .collect();
        }
        Some(out)
    }

    fn cardinality(&self) -> Option<u64> {
        self.factors
            .iter()
            .try_fold(1u64, |acc, r| acc.checked_mul(r.cardinality()?))
    }

    fn random_element(&self, rng: &mut dyn RngCore) -> Self::Elem {
        self.factors.iter().map(|r| r.random_element(rng)).collect()
    }

    fn residue_root(&self, modulus: &[i64]) -> Option<Self::Elem> {
        self.factors.iter().map(|r| r.residue_root(modulus)).collect()
    }

    fn from_local(&self, x: &LocalElem) -> Option<Self::Elem> {
        self.factors.iter().map(|r| r.from_local(x)).collect()
    }

    fn lift_precision(&self) -> Option<u32> {
        self.factors.iter().map(|r| r.lift_precision()).min().flatten()
    }

    fn format(&self, a: &Self::Elem) -> String {
        let parts: Vec<String> = self.factors.iter().zip(a).map(|(r, x)| r.format(x)).collect();
        format!("({})", parts.join(", "))
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|r| r.describe()).collect();
        parts.join(" x ")
    }
}

fn default_p() -> u64 {
    2
}

fn default_d() -> usize {
    1
}

fn default_var() -> String {
    "x".to_string()
}

fn default_cap() -> u32 {
    64
}

fn default_sample_degree() -> u32 {
    4
}

/// Serialized choice of coefficient ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceDescriptor {
    FiniteField {
        p: u64,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<Vec<i64>>,
    },
    /// `F_{p^d}[vars]/(ideal)` with monomial generators, or one univariate monic generator.
    Quotient {
        #[serde(default = "default_p")]
        p: u64,
        #[serde(default = "default_d")]
        d: usize,
        vars: Vec<String>,
        ideal: Vec<String>,
    },
    BoundedPoly {
        #[serde(default = "default_p")]
        p: u64,
        #[serde(default = "default_d")]
        d: usize,
        #[serde(default = "default_var")]
        var: String,
        #[serde(default = "default_cap")]
        cap: u32,
        #[serde(default = "default_sample_degree")]
        sample_degree: u32,
    },
    /// Polynomials over `O/pi^N` for the ambient local ring.
    TorsionFreeLift {
        vars: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        precision: Option<u32>,
    },
    Product {
        factors: Vec<InstanceDescriptor>,
    },
}

fn split_prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut d = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        d += 1;
    }
    (r == 1).then_some((p, d))
}

impl FromStr for InstanceDescriptor {
    type Err = CoeffError;

    /// Accepts JSON or the shorthands `F4`, `F2[x]/(x^2)`, `F2[x,y]/(x^2,y^2)`,
    /// `F2[x]` (degree cap 64) and products such as `F2*F4`.
    fn from_str(text: &str) -> Result<Self, CoeffError> {
        let t = text.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t)
                .map_err(|e| CoeffError::Instance(format!("malformed instance JSON: {e}")));
        }
        let bad = || CoeffError::Instance(format!("unrecognized instance `{t}`"));
        let factors: Vec<&str> = split_top_level(t, '*');
        if factors.len() > 1 {
            let factors = factors.into_iter().map(str::parse).collect::<Result<_, _>>()?;
            return Ok(InstanceDescriptor::Product { factors });
        }
        let rest = t.strip_prefix('F').ok_or_else(bad)?;
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        let (p, d) = split_prime_power(digits.parse().map_err(|_| bad())?).ok_or_else(bad)?;
        let rest = &rest[digits.len()..];
        if rest.is_empty() {
            return Ok(InstanceDescriptor::FiniteField { p, d, modulus: None });
        }
        let inner = rest.strip_prefix('[').ok_or_else(bad)?;
        let close = inner.find(']').ok_or_else(bad)?;
        let vars: Vec<String> = inner[..close].split(',').map(|v| v.trim().to_string()).collect();
        let rest = inner[close + 1..].trim();
        if rest.is_empty() {
            if vars.len() != 1 {
                return Err(bad());
            }
            return Ok(InstanceDescriptor::BoundedPoly {
                p,
                d,
                var: vars[0].clone(),
                cap: default_cap(),
                sample_degree: default_sample_degree(),
            });
        }
        let gens = rest
            .strip_prefix("/(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let ideal = split_top_level(gens, ',').into_iter().map(|g| g.trim().to_string()).collect();
        Ok(InstanceDescriptor::Quotient { p, d, vars, ideal })
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// A runtime-selected coefficient ring.
#[derive(Clone, Debug)]
pub enum AnyRing {
    Field(FiniteField),
    Poly(MPolyRing<FiniteField>),
    Product(ProductRing<MPolyRing<FiniteField>>),
    Lift(MPolyRing<LocalRing>),
}

/// Runs an expression with `$r` bound to the concrete ring inside an [`AnyRing`].
#[macro_export]
macro_rules! with_ring {
    ($any:expr, $r:ident => $body:expr) => {
        match $any {
            $crate::coeff_ring::AnyRing::Field($r) => $body,
            $crate::coeff_ring::AnyRing::Poly($r) => $body,
            $crate::coeff_ring::AnyRing::Product($r) => $body,
            $crate::coeff_ring::AnyRing::Lift($r) => $body,
        }
    };
}

fn field(p: u64, d: usize, modulus: &Option<Vec<i64>>) -> Result<FiniteField, CoeffError> {
    let k = match modulus {
        Some(m) => FiniteField::new(p, m),
        None => FiniteField::with_degree(p, d),
    };
    k.map_err(|e| CoeffError::Instance(e.to_string()))
}

fn quotient(k: FiniteField, vars: &[String], ideal: &[String]) -> Result<MPolyRing<FiniteField>, CoeffError> {
    if vars.is_empty() {
        return Err(CoeffError::Instance("a quotient needs at least one variable".into()));
    }
    let free = MPolyRing::new(k.clone(), vars.to_vec());
    let gens: Vec<MPoly<_>> = ideal.iter().map(|g| parse_elem(&free, g)).collect::<Result<_, _>>()?;
    let all_monomial = gens.iter().all(|g| g.terms.len() == 1);
    if all_monomial {
        let monos: Vec<Monomial> = gens.iter().map(|g| g.terms[0].0.clone()).collect();
        let ring = MPolyRing::with_monomial_ideal(k, vars.to_vec(), monos);
        if ring.standard_monomials().is_none() {
            return Err(CoeffError::Instance("quotient is not finite dimensional".into()));
        }
        return Ok(ring);
    }
    if vars.len() != 1 || gens.len() != 1 {
        return Err(CoeffError::Instance(
            "only monomial ideals or a single univariate generator are supported".into(),
        ));
    }
    let g = &gens[0];
    let deg = g.total_degree() as usize;
    let mut dense = vec![k.zero(); deg + 1];
    for (m, c) in &g.terms {
        dense[m.0[0] as usize] = *c;
    }
    let lead_inv = k
        .inv(dense[deg])
        .ok_or_else(|| CoeffError::Instance("zero generator".into()))?;
    let monic: Vec<_> = dense.iter().map(|&c| k.mul(c, lead_inv)).collect();
    MPolyRing::with_principal_ideal(k, vars[0].clone(), monic)
}

fn poly_instance(desc: &InstanceDescriptor) -> Result<MPolyRing<FiniteField>, CoeffError> {
    match desc {
        InstanceDescriptor::FiniteField { p, d, modulus } => Ok(MPolyRing::new(field(*p, *d, modulus)?, vec![])),
        InstanceDescriptor::Quotient { p, d, vars, ideal } => quotient(field(*p, *d, &None)?, vars, ideal),
        InstanceDescriptor::BoundedPoly {
            p,
            d,
            var,
            cap,
            sample_degree,
        } => MPolyRing::bounded(field(*p, *d, &None)?, var.clone(), *cap, *sample_degree),
        _ => Err(CoeffError::Instance("products only combine characteristic-p factors".into())),
    }
}

/// Builds a ring from its descriptor. Lifts need the ambient local ring.
pub fn make_instance(
    desc: &InstanceDescriptor,
    spec: Option<&Arc<LocalFieldSpec>>,
) -> Result<AnyRing, CoeffError> {
    match desc {
        InstanceDescriptor::FiniteField { p, d, modulus } => Ok(AnyRing::Field(field(*p, *d, modulus)?)),
        InstanceDescriptor::Quotient { .. } | InstanceDescriptor::BoundedPoly { .. } => {
            Ok(AnyRing::Poly(poly_instance(desc)?))
        }
        InstanceDescriptor::TorsionFreeLift { vars, precision } => {
            let spec = spec.ok_or_else(|| CoeffError::Instance("a lift needs a local ring".into()))?;
            let prec = precision.unwrap_or(spec.default_precision());
            if prec == 0 || prec > spec.max_precision() {
                return Err(CoeffError::Instance(format!("precision {prec} out of range")));
            }
            Ok(AnyRing::Lift(MPolyRing::new(LocalRing::new(spec, prec), vars.clone())))
        }
        InstanceDescriptor::Product { factors } => {
            let rings = factors.iter().map(poly_instance).collect::<Result<Vec<_>, _>>()?;
            Ok(AnyRing::Product(ProductRing::new(rings)?))
        }
    }
}

impl AnyRing {
    pub fn describe(&self) -> String {
        with_ring!(self, r => r.describe())
    }

    pub fn cardinality(&self) -> Option<u64> {
        with_ring!(self, r => r.cardinality())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_and_json_agree() {
        let a: InstanceDescriptor = "F2[x]/(x^2)".parse().unwrap();
        let b: InstanceDescriptor =
            r#"{"kind":"quotient","p":2,"vars":["x"],"ideal":["x^2"]}"#.parse().unwrap();
        assert_eq!(a, b);
        let f4: InstanceDescriptor = r#"{"kind":"finite_field","p":2,"d":2}"#.parse().unwrap();
        assert_eq!(f4, "F4".parse().unwrap());
        let AnyRing::Field(k) = make_instance(&f4, None).unwrap() else {
            panic!("expected a field")
        };
        assert_eq!(k.order(), 4);
    }

    #[test]
    fn dual_numbers_instance() {
        let AnyRing::Poly(r) = make_instance(&"F2[x]/(x^2)".parse().unwrap(), None).unwrap() else {
            panic!("expected a polynomial ring")
        };
        let x = r.symbol("x").unwrap();
        assert!(r.mul(&x, &x).unwrap().is_empty());
        assert_eq!(r.cardinality(), Some(4));
        let AnyRing::Poly(r) = make_instance(&"F4[x,y]/(x^2,x*y,y^3)".parse().unwrap(), None).unwrap() else {
            panic!("expected a polynomial ring")
        };
        assert_eq!(r.standard_monomials().unwrap().len(), 4);
    }

    #[test]
    fn invalid_instances() {
        assert!(make_instance(&"F6".parse().unwrap_or(InstanceDescriptor::FiniteField { p: 6, d: 1, modulus: None }), None).is_err());
        assert!("G2".parse::<InstanceDescriptor>().is_err());
        let zero_cap = InstanceDescriptor::BoundedPoly {
            p: 2,
            d: 1,
            var: "x".into(),
            cap: 0,
            sample_degree: 1,
        };
        assert!(make_instance(&zero_cap, None).is_err());
        assert!(make_instance(&"F2[x,y]/(x^2)".parse().unwrap(), None).is_err());
        assert!(make_instance(&"F2[x]/(x^2+x+1)".parse().unwrap(), None).is_ok());
    }
}
