//! `O/pi^N` as a coefficient ring; the base of the torsion-free solver rings.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{CoeffError, CoeffRing};
use crate::local_ring::{Coords, LocalElem, LocalFieldSpec};

/// The quotient `O/pi^N`, with elements stored as canonical coordinates.
#[derive(Clone, Debug)]
pub struct LocalRing {
    spec: Arc<LocalFieldSpec>,
    prec: u32,
}

impl LocalRing {
    pub fn new(spec: &Arc<LocalFieldSpec>, prec: u32) -> Self {
        LocalRing {
            spec: spec.clone(),
            prec: prec.min(spec.max_precision()),
        }
    }

    pub fn spec(&self) -> &Arc<LocalFieldSpec> {
        &self.spec
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Canonical representative of raw coordinates.
    pub fn reduce(&self, c: &Coords) -> Coords {
        self.spec.canonical(c, self.prec)
    }

    pub fn to_local(&self, c: &Coords) -> LocalElem {
        LocalElem::from_coords(&self.spec, c.clone(), self.prec)
    }
}

impl CoeffRing for LocalRing {
    type Elem = Coords;

    fn zero(&self) -> Coords {
        self.spec.zero_coords()
    }

    fn one(&self) -> Coords {
        self.spec.canonical(&self.spec.one_coords(), self.prec)
    }

    fn from_int(&self, n: i64) -> Coords {
        self.spec.canonical(&self.spec.raw_from_int(n), self.prec)
    }

    fn canonical(&self, a: &Coords) -> Coords {
        self.reduce(a)
    }

    fn add(&self, a: &Coords, b: &Coords) -> Coords {
        self.spec.canonical(&self.spec.raw_add(a, b), self.prec)
    }

    fn neg(&self, a: &Coords) -> Coords {
        self.spec.canonical(&self.spec.raw_neg(a), self.prec)
    }

    fn mul(&self, a: &Coords, b: &Coords) -> Result<Coords, CoeffError> {
        Ok(self.spec.canonical(&self.spec.raw_mul(a, b), self.prec))
    }

    fn is_zero(&self, a: &Coords) -> bool {
        a.iter().all(|&x| x == 0)
    }

    fn prime(&self) -> u64 {
        self.spec.p()
    }

    fn is_char_p(&self) -> bool {
        self.prec as usize <= self.spec.e()
    }

    fn cardinality(&self) -> Option<u64> {
        self.spec.q().checked_pow(self.prec)
    }

    fn elements(&self) -> Option<Vec<Coords>> {
        let total = self.cardinality()?;
        if total > 1 << 20 {
            return None;
        }
        let d = self.spec.dim();
        let h = self.spec.h();
        let bounds: Vec<u64> = (0..d)
            .map(|idx| self.spec.p().pow(self.spec.slot_exponent(self.prec, idx / h)))
            .collect();
        let mut out = Vec::with_capacity(total as usize);
        let mut cur = self.spec.zero_coords();
        loop {
            out.push(cur.clone());
            let mut k = d;
            loop {
                if k == 0 {
                    return Some(out);
                }
                k -= 1;
                cur[k] += 1;
                if cur[k] < bounds[k] {
                    break;
                }
                cur[k] = 0;
            }
        }
    }

    fn random_element(&self, rng: &mut dyn RngCore) -> Coords {
        let c: Coords = (0..self.spec.dim()).map(|_| rng.gen_range(0..1u64 << 30)).collect();
        self.spec.canonical(&c, self.prec)
    }

    fn from_local(&self, x: &LocalElem) -> Option<Coords> {
        (**x.spec() == *self.spec).then(|| self.spec.canonical(x.coords(), self.prec))
    }

    fn lift_precision(&self) -> Option<u32> {
        Some(self.prec)
    }

    fn symbol(&self, name: &str) -> Option<Coords> {
        match name {
            "pi" => Some(LocalElem::uniformizer(&self.spec, self.prec).coords().clone()),
            "w" => Some(LocalElem::omega(&self.spec, self.prec).coords().clone()),
            _ => None,
        }
    }

    fn format(&self, a: &Coords) -> String {
        self.spec.format_coords(a, self.prec)
    }

    fn describe(&self) -> String {
        format!("O/pi^{}", self.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_ring::{parse_elem, MPolyRing};
    use proptest::prelude::*;

    fn ring() -> LocalRing {
        let spec = LocalFieldSpec::from_json(
            r#"{"p":3,"h":2,"e":2,"unram_modulus":[2,2,1],"eisenstein":[[3,0],[3,3],[1,0]],"precision":7}"#,
        )
        .unwrap();
        LocalRing::new(&spec, 7)
    }

    fn elem() -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-2000i64..2000, 4)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in elem(), b in elem(), c in elem()) {
            let r = ring();
            let s = r.spec().clone();
            let (a, b, c) = (
                s.canonical(&s.raw_from_signed(&a), 7),
                s.canonical(&s.raw_from_signed(&b), 7),
                s.canonical(&s.raw_from_signed(&c), 7),
            );
            let ab = r.mul(&a, &b).unwrap();
            prop_assert_eq!(r.mul(&ab, &c).unwrap(), r.mul(&a, &r.mul(&b, &c).unwrap()).unwrap());
            prop_assert_eq!(ab.clone(), r.mul(&b, &a).unwrap());
            let lhs = r.mul(&a, &r.add(&b, &c)).unwrap();
            let rhs = r.add(&ab, &r.mul(&a, &c).unwrap());
            prop_assert_eq!(lhs, rhs);
            prop_assert!(r.is_zero(&r.add(&a, &r.neg(&a))));
        }

        #[test]
        fn pi_is_a_nonzerodivisor_on_lifts(a in elem(), b in elem()) {
            let r = ring();
            let s = r.spec().clone();
            let pi = r.symbol("pi").unwrap();
            let (a, b) = (s.raw_from_signed(&a), s.raw_from_signed(&b));
            let pa = r.mul(&pi, &a).unwrap();
            let pb = r.mul(&pi, &b).unwrap();
            if pa == pb {
                prop_assert_eq!(s.canonical(&a, 6), s.canonical(&b, 6));
            }
        }

        #[test]
        fn higher_precision_agrees(a in elem(), b in elem()) {
            let s = ring().spec().clone();
            let lo = LocalRing::new(&s, 5);
            let hi = LocalRing::new(&s, 11);
            let (a, b) = (s.raw_from_signed(&a), s.raw_from_signed(&b));
            let x = hi.mul(&hi.add(&a, &b), &b).unwrap();
            let y = lo.mul(&lo.add(&a, &b), &b).unwrap();
            prop_assert_eq!(s.canonical(&x, 5), y);
        }
    }

    #[test]
    fn lift_polynomials_parse() {
        let r = ring();
        let poly = MPolyRing::new(r.clone(), vec!["X".into()]);
        let a = parse_elem(&poly, "pi*X^2 + 3*w").unwrap();
        let b = parse_elem(&poly, "pi*X + 1").unwrap();
        let ab = poly.mul(&a, &b).unwrap();
        let expect = parse_elem(&poly, "pi^2*X^3 + pi*X^2 + 3*w*pi*X + 3*w").unwrap();
        assert_eq!(ab, expect);
        assert_eq!(r.elements().map(|e| e.len()), None);
        assert_eq!(LocalRing::new(r.spec(), 2).elements().unwrap().len(), 81);
    }
}
