//! Sparse multivariate polynomials over a [`CoeffRing`], optionally reduced
//! modulo a monomial ideal or a monic univariate generator, or capped in degree.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::Arc;

use rand::{Rng, RngCore};
use smallvec::SmallVec;

use super::{CoeffError, CoeffRing};
use crate::local_ring::LocalElem;

/// Multiplicative hashing for exponent vectors; much cheaper than SipHash
/// for the short integer keys used while multiplying polynomials.
#[derive(Default, Clone, Copy)]
pub struct MonomialHasher(u64);

impl Hasher for MonomialHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    fn write_u32(&mut self, i: u32) {
        self.write_u64(i as u64);
    }

    fn write_u64(&mut self, i: u64) {
        self.0 = (self.0.rotate_left(5) ^ i).wrapping_mul(0x517c_c1b7_2722_0a95);
    }

    fn write_usize(&mut self, i: usize) {
        self.write_u64(i as u64);
    }
}

pub type MonomialMap<V> = HashMap<Monomial, V, BuildHasherDefault<MonomialHasher>>;

/// Dense exponent vector, one entry per ring variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub SmallVec<[u32; 8]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        Monomial(self.0.iter().map(|a| a * k).collect())
    }

    /// Whether `self` divides `other`.
    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }
}

/// Degree first, then larger exponents on earlier variables first.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorted list of terms with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MPoly<E> {
    pub terms: Vec<(Monomial, E)>,
}

impl<E> MPoly<E> {
    pub fn zero() -> Self {
        MPoly { terms: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub enum Ideal<E> {
    Zero,
    /// Generated by the listed monomials.
    Monomial(Vec<Monomial>),
    /// Generated by a monic polynomial in the single ring variable,
    /// coefficients lowest degree first.
    Principal(Vec<E>),
}

struct PolyRingData<R: CoeffRing> {
    base: R,
    vars: Vec<String>,
    ideal: Ideal<R::Elem>,
    degree_cap: Option<u32>,
    sample_degree: u32,
}

/// `R[x_1..x_t]` modulo an optional ideal, with an optional degree cap.
pub struct MPolyRing<R: CoeffRing>(Arc<PolyRingData<R>>);

impl<R: CoeffRing> Clone for MPolyRing<R> {
    fn clone(&self) -> Self {
        MPolyRing(self.0.clone())
    }
}

impl<R: CoeffRing> fmt::Debug for MPolyRing<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl<R: CoeffRing> MPolyRing<R> {
    pub fn new(base: R, vars: Vec<String>) -> Self {
        MPolyRing(Arc::new(PolyRingData {
            base,
            vars,
            ideal: Ideal::Zero,
            degree_cap: None,
            sample_degree: 2,
        }))
    }

    pub fn with_monomial_ideal(base: R, vars: Vec<String>, gens: Vec<Monomial>) -> Self {
        MPolyRing(Arc::new(PolyRingData {
            base,
            vars,
            ideal: Ideal::Monomial(gens),
            degree_cap: None,
            sample_degree: 2,
        }))
    }

    /// `base[x]/(g)` for a monic `g`, coefficients lowest degree first.
    pub fn with_principal_ideal(base: R, var: String, gen: Vec<R::Elem>) -> Result<Self, CoeffError> {
        if gen.len() < 2 || *gen.last().unwrap() != base.one() {
            return Err(CoeffError::Instance("generator must be monic of positive degree".into()));
        }
        Ok(MPolyRing(Arc::new(PolyRingData {
            base,
            vars: vec![var],
            ideal: Ideal::Principal(gen),
            degree_cap: None,
            sample_degree: 2,
        })))
    }

    /// `base[x]` where products of degree above `cap` are errors. Random
    /// elements have degree at most `sample_degree`.
    pub fn bounded(base: R, var: String, cap: u32, sample_degree: u32) -> Result<Self, CoeffError> {
        if cap == 0 {
            return Err(CoeffError::Instance("degree cap must be positive".into()));
        }
        Ok(MPolyRing(Arc::new(PolyRingData {
            base,
            vars: vec![var],
            ideal: Ideal::Zero,
            degree_cap: Some(cap),
            sample_degree: sample_degree.min(cap),
        })))
    }

    pub fn base(&self) -> &R {
        &self.0.base
    }

    pub fn vars(&self) -> &[String] {
        &self.0.vars
    }

    pub fn nvars(&self) -> usize {
        self.0.vars.len()
    }

    pub fn ideal(&self) -> &Ideal<R::Elem> {
        &self.0.ideal
    }

    pub fn degree_cap(&self) -> Option<u32> {
        self.0.degree_cap
    }

    pub fn var(&self, i: usize) -> MPoly<R::Elem> {
        MPoly {
            terms: vec![(Monomial::var(self.nvars(), i), self.0.base.one())],
        }
    }

    pub fn constant(&self, c: R::Elem) -> MPoly<R::Elem> {
        if self.0.base.is_zero(&c) {
            MPoly::zero()
        } else {
            self.reduce_terms(vec![(Monomial::one(self.nvars()), c)])
        }
    }

    pub fn monomial(&self, m: Monomial, c: R::Elem) -> MPoly<R::Elem> {
        if self.0.base.is_zero(&c) {
            MPoly::zero()
        } else {
            self.reduce_terms(vec![(m, c)])
        }
    }

    fn in_monomial_ideal(&self, m: &Monomial) -> bool {
        match &self.0.ideal {
            Ideal::Monomial(gens) => gens.iter().any(|g| g.divides(m)),
            _ => false,
        }
    }

    /// Sorts, merges, drops zero terms and reduces modulo the ideal.
    pub fn reduce_terms(&self, terms: Vec<(Monomial, R::Elem)>) -> MPoly<R::Elem> {
        let base = &self.0.base;
        let mut map: MonomialMap<R::Elem> = MonomialMap::default();
        for (m, c) in terms {
            if self.in_monomial_ideal(&m) {
                continue;
            }
            match map.get_mut(&m) {
                Some(v) => *v = base.add(v, &c),
                None => {
                    map.insert(m, base.canonical(&c));
                }
            }
        }
        let poly = self.collect(map);
        match &self.0.ideal {
            Ideal::Principal(gen) => self.reduce_principal(poly, gen),
            _ => poly,
        }
    }

    fn collect(&self, map: MonomialMap<R::Elem>) -> MPoly<R::Elem> {
        let base = &self.0.base;
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !base.is_zero(c)).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        MPoly { terms }
    }

    fn reduce_principal(&self, poly: MPoly<R::Elem>, gen: &[R::Elem]) -> MPoly<R::Elem> {
        let base = &self.0.base;
        let d = gen.len() - 1;
        if poly.total_degree() < d as u32 {
            return poly;
        }
        let top = poly.total_degree() as usize;
        let mut dense = vec![base.zero(); top + 1];
        for (m, c) in poly.terms {
            dense[m.0[0] as usize] = c;
        }
        for k in (d..=top).rev() {
            let lead = std::mem::replace(&mut dense[k], base.zero());
            if base.is_zero(&lead) {
                continue;
            }
            for (i, g) in gen[..d].iter().enumerate() {
                let t = base.mul(&lead, g).expect("base multiplication");
                dense[k - d + i] = base.sub(&dense[k - d + i], &t);
            }
        }
        let terms = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !base.is_zero(c))
            .map(|(i, c)| {
                let mut m = Monomial::one(1);
                m.0[0] = i as u32;
                (m, c)
            })
            .collect();
        MPoly { terms }
    }

    pub fn map_coeffs(&self, a: &MPoly<R::Elem>, f: impl Fn(&R::Elem) -> R::Elem) -> MPoly<R::Elem> {
        self.reduce_terms(a.terms.iter().map(|(m, c)| (m.clone(), f(c))).collect())
    }

    pub fn scale(&self, a: &MPoly<R::Elem>, c: &R::Elem) -> Result<MPoly<R::Elem>, CoeffError> {
        let base = &self.0.base;
        let mut terms = Vec::with_capacity(a.len());
        for (m, x) in &a.terms {
            let y = base.mul(x, c)?;
            if !base.is_zero(&y) {
                terms.push((m.clone(), y));
            }
        }
        Ok(MPoly { terms })
    }

    fn check_cap(&self, degree: u32) -> Result<(), CoeffError> {
        match self.0.degree_cap {
            Some(cap) if degree > cap => Err(CoeffError::DegreeCap { cap, degree }),
            _ => Ok(()),
        }
    }

    /// Evaluates `a` in another ring given images of the coefficients and variables.
    pub fn evaluate<S: CoeffRing>(
        &self,
        a: &MPoly<R::Elem>,
        target: &S,
        coeff: impl Fn(&R::Elem) -> S::Elem,
        values: &[S::Elem],
    ) -> Result<S::Elem, CoeffError> {
        let mut acc = target.zero();
        for (m, c) in &a.terms {
            let mut t = coeff(c);
            for (v, &e) in values.iter().zip(m.exps()) {
                if e > 0 {
                    t = target.mul(&t, &target.pow(v, e as u64)?)?;
                }
            }
            acc = target.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Standard monomials of a finite-dimensional quotient, ascending.
    pub fn standard_monomials(&self) -> Option<Vec<Monomial>> {
        let n = self.nvars();
        match &self.0.ideal {
            Ideal::Zero if n == 0 => Some(vec![Monomial::one(0)]),
            Ideal::Zero => None,
            Ideal::Principal(gen) => Some(
                (0..gen.len() - 1)
                    .map(|i| {
                        let mut m = Monomial::one(1);
                        m.0[0] = i as u32;
                        m
                    })
                    .collect(),
            ),
            Ideal::Monomial(gens) => {
                let mut bounds = vec![u32::MAX; n];
                for g in gens {
                    let nz: Vec<usize> = (0..n).filter(|&i| g.0[i] > 0).collect();
                    if nz.len() == 1 {
                        bounds[nz[0]] = bounds[nz[0]].min(g.0[nz[0]]);
                    }
                }
                if bounds.iter().any(|&b| b == u32::MAX) {
                    return None;
                }
                let mut out = Vec::new();
                let mut cur = Monomial::one(n);
                loop {
                    if !self.in_monomial_ideal(&cur) {
                        out.push(cur.clone());
                    }
                    let mut i = 0;
                    loop {
                        if i == n {
                            out.sort();
                            return Some(out);
                        }
                        cur.0[i] += 1;
                        if cur.0[i] < bounds[i] {
                            break;
                        }
                        cur.0[i] = 0;
                        i += 1;
                    }
                }
            }
        }
    }

    fn format_monomial(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    self.0.vars[i].clone()
                } else {
                    format!("{}^{}", self.0.vars[i], e)
                }
            })
            .collect();
        parts.join("*")
    }
}

impl<R: CoeffRing> CoeffRing for MPolyRing<R> {
    type Elem = MPoly<R::Elem>;

    fn zero(&self) -> Self::Elem {
        MPoly::zero()
    }

    fn one(&self) -> Self::Elem {
        self.constant(self.0.base.one())
    }

    fn from_int(&self, n: i64) -> Self::Elem {
        self.constant(self.0.base.from_int(n))
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let base = &self.0.base;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a.terms[i].0.cmp(&b.terms[j].0) {
                Ordering::Less => {
                    out.push(a.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = base.add(&a.terms[i].1, &b.terms[j].1);
                    if !base.is_zero(&c) {
                        out.push((a.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a.terms[i..]);
        out.extend_from_slice(&b.terms[j..]);
        MPoly { terms: out }
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        let base = &self.0.base;
        MPoly {
            terms: a.terms.iter().map(|(m, c)| (m.clone(), base.neg(c))).collect(),
        }
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, CoeffError> {
        if a.is_empty() || b.is_empty() {
            return Ok(MPoly::zero());
        }
        if self.0.degree_cap.is_some() {
            self.check_cap(a.total_degree() + b.total_degree())?;
        }
        let base = &self.0.base;
        let mut map: MonomialMap<R::Elem> = MonomialMap::default();
        map.reserve(a.len().max(b.len()) * 2);
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let m = ma.mul(mb);
                if self.in_monomial_ideal(&m) {
                    continue;
                }
                let c = base.mul(ca, cb)?;
                match map.get_mut(&m) {
                    Some(v) => *v = base.add(v, &c),
                    None => {
                        map.insert(m, c);
                    }
                }
            }
        }
        let poly = self.collect(map);
        Ok(match &self.0.ideal {
            Ideal::Principal(gen) => self.reduce_principal(poly, gen),
            _ => poly,
        })
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_empty()
    }

    fn prime(&self) -> u64 {
        self.0.base.prime()
    }

    fn is_char_p(&self) -> bool {
        self.0.base.is_char_p()
    }

    fn q_power_frobenius(&self, a: &Self::Elem, q: u64) -> Result<Self::Elem, CoeffError> {
        let base = &self.0.base;
        let termwise = base.is_char_p() && !matches!(self.0.ideal, Ideal::Principal(_));
        if !termwise {
            return self.pow(a, q);
        }
        if let Some(cap) = self.0.degree_cap {
            let degree = a.total_degree() as u64 * q;
            if degree > cap as u64 {
                return Err(CoeffError::DegreeCap {
                    cap,
                    degree: degree.min(u32::MAX as u64) as u32,
                });
            }
        }
        let mut terms = Vec::with_capacity(a.len());
        for (m, c) in &a.terms {
            let m = m.pow(q as u32);
            if self.in_monomial_ideal(&m) {
                continue;
            }
            terms.push((m, base.q_power_frobenius(c, q)?));
        }
        Ok(self.reduce_terms(terms))
    }

    fn q_root(&self, a: &Self::Elem, q: u64) -> Option<Self::Elem> {
        let base = &self.0.base;
        if !base.is_char_p() {
            return None;
        }
        if matches!(self.0.ideal, Ideal::Principal(_)) {
            let els = self.elements()?;
            return els
                .into_iter()
                .find(|y| self.q_power_frobenius(y, q).ok().as_ref() == Some(a));
        }
        let q32 = u32::try_from(q).ok()?;
        let mut terms = Vec::with_capacity(a.len());
        for (m, c) in &a.terms {
            if m.0.iter().any(|e| e % q32 != 0) {
                return None;
            }
            let root = Monomial(m.0.iter().map(|e| e / q32).collect());
            terms.push((root, base.q_root(c, q)?));
        }
        Some(self.reduce_terms(terms))
    }

    fn elements(&self) -> Option<Vec<Self::Elem>> {
        let basis = self.standard_monomials()?;
        let coeffs = self.0.base.elements()?;
        let total = (coeffs.len() as u64).checked_pow(basis.len() as u32)?;
        if total > 1 << 22 {
            return None;
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; basis.len()];
        loop {
            let terms = basis
                .iter()
                .zip(&idx)
                .map(|(m, &i)| (m.clone(), coeffs[i].clone()))
                .collect();
            out.push(self.reduce_terms(terms));
            let mut k = basis.len();
            loop {
                if k == 0 {
                    return Some(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < coeffs.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn cardinality(&self) -> Option<u64> {
        let basis = self.standard_monomials()?;
        self.0.base.cardinality()?.checked_pow(basis.len() as u32)
    }

    fn random_element(&self, rng: &mut dyn RngCore) -> Self::Elem {
        let base = &self.0.base;
        let monomials = match self.standard_monomials() {
            Some(b) => b,
            None => {
                let n = self.nvars();
                let top = if self.0.degree_cap.is_some() {
                    rng.gen_range(0..=self.0.sample_degree)
                } else {
                    self.0.sample_degree
                };
                let mut out = Vec::new();
                let mut cur = Monomial::one(n);
                loop {
                    if cur.degree() <= top {
                        out.push(cur.clone());
                    }
                    let mut i = 0;
                    loop {
                        if i == n {
                            break;
                        }
                        cur.0[i] += 1;
                        if cur.0[i] <= top {
                            break;
                        }
                        cur.0[i] = 0;
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                }
                out
            }
        };
        let terms = monomials
            .into_iter()
            .map(|m| (m, base.random_element(rng)))
            .collect();
        self.reduce_terms(terms)
    }

    fn residue_root(&self, modulus: &[i64]) -> Option<Self::Elem> {
        self.0.base.residue_root(modulus).map(|c| self.constant(c))
    }

    fn from_local(&self, x: &LocalElem) -> Option<Self::Elem> {
        self.0.base.from_local(x).map(|c| self.constant(c))
    }

    fn lift_precision(&self) -> Option<u32> {
        self.0.base.lift_precision()
    }

    fn symbol(&self, name: &str) -> Option<Self::Elem> {
        if let Some(i) = self.0.vars.iter().position(|v| v == name) {
            return Some(self.reduce_terms(vec![(Monomial::var(self.nvars(), i), self.0.base.one())]));
        }
        self.0.base.symbol(name).map(|c| self.constant(c))
    }

    fn format(&self, a: &Self::Elem) -> String {
        if a.is_empty() {
            return "0".to_string();
        }
        let base = &self.0.base;
        let mut out = String::new();
        for (m, c) in &a.terms {
            let cs = base.format(c);
            let term = if m.is_one() {
                if cs.contains(' ') && !out.is_empty() {
                    format!("({cs})")
                } else {
                    cs
                }
            } else {
                let ms = self.format_monomial(m);
                match cs.as_str() {
                    "1" => ms,
                    "-1" => format!("-{ms}"),
                    _ if cs.contains(' ') => format!("({cs})*{ms}"),
                    _ => format!("{cs}*{ms}"),
                }
            };
            if out.is_empty() {
                out = term;
            } else if let Some(rest) = term.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&term);
            }
        }
        out
    }

    fn describe(&self) -> String {
        let base = self.0.base.describe();
        if self.nvars() == 0 {
            return base;
        }
        let vars = self.0.vars.join(",");
        match (&self.0.ideal, self.0.degree_cap) {
            (Ideal::Zero, Some(cap)) => format!("{base}[{vars}] (degree <= {cap})"),
            (Ideal::Zero, None) => format!("{base}[{vars}]"),
            (Ideal::Monomial(gens), _) => {
                let gs: Vec<String> = gens.iter().map(|g| self.format_monomial(g)).collect();
                format!("{base}[{vars}]/({})", gs.join(","))
            }
            (Ideal::Principal(gen), _) => {
                let mut parts = Vec::new();
                for (i, c) in gen.iter().enumerate().rev() {
                    if self.0.base.is_zero(c) {
                        continue;
                    }
                    let m = match i {
                        0 => String::new(),
                        1 => vars.clone(),
                        _ => format!("{vars}^{i}"),
                    };
                    let cs = self.0.base.format(c);
                    parts.push(match (cs.as_str(), m.is_empty()) {
                        (_, true) => cs,
                        ("1", false) => m,
                        (_, false) => format!("({cs})*{m}"),
                    });
                }
                format!("{base}[{vars}]/({})", parts.join(" + "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_ring::parse_elem;
    use crate::local_ring::FiniteField;

    fn f2() -> FiniteField {
        FiniteField::prime_field(2).unwrap()
    }

    #[test]
    fn dual_numbers_square_to_zero() {
        let r = MPolyRing::with_monomial_ideal(f2(), vec!["x".into()], vec![{
            let mut m = Monomial::one(1);
            m.0[0] = 2;
            m
        }]);
        let x = r.var(0);
        assert!(r.mul(&x, &x).unwrap().is_empty());
        assert_eq!(r.elements().unwrap().len(), 4);
        assert_eq!(r.q_root(&x, 2), None);
        assert_eq!(r.q_root(&r.one(), 2), Some(r.one()));
    }

    #[test]
    fn bounded_poly_cap() {
        let r = MPolyRing::bounded(f2(), "x".into(), 64, 4).unwrap();
        let x40 = r.pow(&r.var(0), 40).unwrap();
        assert!(matches!(r.mul(&x40, &x40), Err(CoeffError::DegreeCap { cap: 64, degree: 80 })));
        let x3 = r.pow(&r.var(0), 3).unwrap();
        let y = r.add(&x3, &r.one());
        let sq = r.q_power_frobenius(&y, 2).unwrap();
        assert_eq!(sq, r.mul(&y, &y).unwrap());
        assert_eq!(r.q_root(&sq, 2), Some(y));
    }

    #[test]
    fn principal_quotient_is_a_field() {
        // F_2[x]/(x^2 + x + 1) is F_4.
        let k = f2();
        let gen = vec![k.one(), k.one(), k.one()];
        let r = MPolyRing::with_principal_ideal(k, "x".into(), gen).unwrap();
        let x = r.var(0);
        let x3 = r.pow(&x, 3).unwrap();
        assert_eq!(x3, r.one());
        assert_eq!(r.elements().unwrap().len(), 4);
        let root = r.q_root(&x, 2).unwrap();
        assert_eq!(r.mul(&root, &root).unwrap(), x);
    }

    #[test]
    fn format_and_parse_round_trip() {
        let k = FiniteField::with_degree(2, 2).unwrap();
        let r = MPolyRing::new(k, vec!["x".into(), "y".into()]);
        let a = parse_elem(&r, "(w + 1)*x^2*y + w*y + 1").unwrap();
        let text = r.format(&a);
        assert_eq!(parse_elem(&r, &text).unwrap(), a);
        assert_eq!(text, "1 + w*y + (1 + w)*x^2*y");
    }
}
