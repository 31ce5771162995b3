//! Small prime-power fields `F_p[w]/(g)` with log/exp tables.
//!
//! Elements are encoded as `u32` values whose base-`p` digits are the
//! coefficients of `1, w, w^2, ...`. Fields up to `2^20` elements are
//! supported, which is far beyond anything the enumeration checks touch.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest field order accepted by [`FiniteField::new`].
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus must be monic of degree at least 1")]
    NotMonic,
    #[error("modulus is reducible over F_{0}")]
    Reducible(u64),
    #[error("field of order {0} is too large")]
    TooLarge(u64),
}

/// An element of a [`FiniteField`], stored as its digit encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FfElem(pub u32);

struct FieldData {
    p: u64,
    degree: usize,
    order: u32,
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
    place: Vec<u32>,
}

/// The field `F_p[w]/(g)` for a monic irreducible `g`.
#[derive(Clone)]
pub struct FiniteField(Arc<FieldData>);

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn reduce_mod_p(coeffs: &[i64], p: u64) -> Vec<u64> {
    coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect()
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of `a` modulo the monic polynomial `m`, coefficients in `F_p`.
fn poly_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = m.len() - 1;
    trim(&mut a);
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        for (i, &c) in m.iter().enumerate() {
            let t = (lead * c) % p;
            a[shift + i] = (a[shift + i] + p - t) % p;
        }
        trim(&mut a);
    }
    a
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn is_irreducible(m: &[u64], p: u64) -> bool {
    let d = m.len() - 1;
    if d <= 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=d/2.
    for deg in 1..=d / 2 {
        let count = p.pow(deg as u32);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(deg + 1);
            let mut r = idx;
            for _ in 0..deg {
                cand.push(r % p);
                r /= p;
            }
            cand.push(1);
            if poly_rem(m.to_vec(), &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    /// Builds `F_p[w]/(g)` from integer coefficients of `g`, lowest degree first.
    pub fn new(p: u64, modulus: &[i64]) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let lead = modulus.iter().rposition(|&c| c != 0);
        if lead.map_or(true, |i| i == 0 || modulus[i] != 1) {
            return Err(FieldError::NotMonic);
        }
        let mut m = reduce_mod_p(&modulus[..=lead.unwrap()], p);
        trim(&mut m);
        if m.len() < 2 {
            return Err(FieldError::NotMonic);
        }
        let degree = m.len() - 1;
        let order = p
            .checked_pow(degree as u32)
            .filter(|&o| o <= MAX_FIELD_ORDER)
            .ok_or(FieldError::TooLarge(p))?;
        if !is_irreducible(&m, p) {
            return Err(FieldError::Reducible(p));
        }
        let place: Vec<u32> = (0..degree).map(|i| p.pow(i as u32) as u32).collect();
        let encode = |v: &[u64]| -> u32 {
            v.iter().zip(&place).map(|(&c, &pl)| c as u32 * pl).sum()
        };
        let decode = |x: u32| -> Vec<u64> {
            let mut out = Vec::with_capacity(degree);
            let mut r = x as u64;
            for _ in 0..degree {
                out.push(r % p);
                r /= p;
            }
            out
        };
        let slow_mul = |a: u32, b: u32| -> u32 {
            encode(&poly_rem(poly_mul(&decode(a), &decode(b), p), &m, p))
        };
        let order32 = order as u32;
        let group = order32 - 1;
        let mut exp = vec![0u32; group.max(1) as usize];
        let mut log = vec![0u32; order as usize];
        if group == 1 {
            exp[0] = 1;
            log[1] = 0;
        } else {
            let mut found = false;
            for g in 2..order32 {
                let mut x = 1u32;
                let mut ok = true;
                for k in 0..group {
                    if k > 0 && x == 1 {
                        ok = false;
                        break;
                    }
                    exp[k as usize] = x;
                    x = slow_mul(x, g);
                }
                if ok && x == 1 {
                    found = true;
                    break;
                }
            }
            assert!(found, "multiplicative group of a finite field is cyclic");
            for (k, &x) in exp.iter().enumerate() {
                log[x as usize] = k as u32;
            }
        }
        Ok(FiniteField(Arc::new(FieldData {
            p,
            degree,
            order: order32,
            modulus: m,
            exp,
            log,
            place,
        })))
    }

    /// `F_{p^d}` with the smallest monic irreducible modulus in digit order.
    /// For `d = 1` the modulus is `w`, so `w = 0`.
    pub fn with_degree(p: u64, d: usize) -> Result<Self, FieldError> {
        Self::new(p, &default_modulus(p, d)?)
    }

    pub fn prime_field(p: u64) -> Result<Self, FieldError> {
        Self::with_degree(p, 1)
    }

    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn order(&self) -> u64 {
        self.0.order as u64
    }

    /// Modulus coefficients in `F_p`, lowest degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FfElem {
        FfElem(0)
    }

    pub fn one(&self) -> FfElem {
        FfElem(1)
    }

    /// The class of `w`.
    pub fn generator(&self) -> FfElem {
        self.from_coeffs(&[0, 1])
    }

    pub fn from_int(&self, n: i64) -> FfElem {
        FfElem(n.rem_euclid(self.0.p as i64) as u32)
    }

    /// The element `sum c_i w^i`, reduced modulo `g`.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> FfElem {
        let p = self.0.p;
        let r = poly_rem(reduce_mod_p(coeffs, p), &self.0.modulus, p);
        FfElem(r.iter().zip(&self.0.place).map(|(&c, &pl)| c as u32 * pl).sum())
    }

    /// Coefficients of `1, w, ..., w^{d-1}`.
    pub fn coeffs(&self, a: FfElem) -> Vec<u64> {
        let p = self.0.p;
        let mut r = a.0 as u64;
        (0..self.0.degree)
            .map(|_| {
                let c = r % p;
                r /= p;
                c
            })
            .collect()
    }

    pub fn add(&self, a: FfElem, b: FfElem) -> FfElem {
        let p = self.0.p as u32;
        if p == 2 {
            return FfElem(a.0 ^ b.0);
        }
        if self.0.degree == 1 {
            return FfElem((a.0 + b.0) % p);
        }
        let (mut x, mut y, mut out, mut pl) = (a.0, b.0, 0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * pl;
            x /= p;
            y /= p;
            pl *= p;
        }
        FfElem(out)
    }

    pub fn neg(&self, a: FfElem) -> FfElem {
        let p = self.0.p as u32;
        if p == 2 {
            return a;
        }
        let (mut x, mut out, mut pl) = (a.0, 0u32, 1u32);
        while x > 0 {
            out += ((p - x % p) % p) * pl;
            x /= p;
            pl *= p;
        }
        FfElem(out)
    }

    pub fn sub(&self, a: FfElem, b: FfElem) -> FfElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FfElem, b: FfElem) -> FfElem {
        if a.0 == 0 || b.0 == 0 {
            return FfElem(0);
        }
        let d = &self.0;
        let group = d.order - 1;
        let k = (d.log[a.0 as usize] + d.log[b.0 as usize]) % group;
        FfElem(d.exp[k as usize])
    }

    pub fn pow(&self, a: FfElem, k: u64) -> FfElem {
        if k == 0 {
            return FfElem(1);
        }
        if a.0 == 0 {
            return FfElem(0);
        }
        let d = &self.0;
        let group = (d.order - 1) as u64;
        let l = d.log[a.0 as usize] as u64;
        FfElem(d.exp[((l * (k % group)) % group) as usize])
    }

    /// `a^(p^j)`, an automorphism power.
    pub fn frobenius_pow(&self, a: FfElem, j: u32) -> FfElem {
        let mut x = a;
        for _ in 0..(j as usize % self.0.degree) {
            x = self.pow(x, self.0.p);
        }
        x
    }

    pub fn inv(&self, a: FfElem) -> Option<FfElem> {
        if a.0 == 0 {
            return None;
        }
        let d = &self.0;
        let group = d.order - 1;
        let l = d.log[a.0 as usize];
        Some(FfElem(d.exp[((group - l) % group) as usize]))
    }

    /// The unique `y` with `y^p = a`.
    pub fn p_root(&self, a: FfElem) -> FfElem {
        self.frobenius_pow(a, (self.0.degree - 1) as u32)
    }

    /// All elements in ascending encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FfElem> + '_ {
        (0..self.0.order).map(FfElem)
    }

    /// Roots in this field of an integer polynomial, lowest degree first.
    pub fn roots(&self, coeffs: &[i64]) -> Vec<FfElem> {
        let cs: Vec<FfElem> = coeffs.iter().map(|&c| self.from_int(c)).collect();
        self.elements()
            .filter(|&x| {
                let mut acc = FfElem(0);
                for &c in cs.iter().rev() {
                    acc = self.add(self.mul(acc, x), c);
                }
                acc.0 == 0
            })
            .collect()
    }

    pub fn format(&self, a: FfElem) -> String {
        let cs = self.coeffs(a);
        let mut parts = Vec::new();
        for (i, &c) in cs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            parts.push(match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "w".to_string(),
                (1, c) => format!("{c}*w"),
                (i, 1) => format!("w^{i}"),
                (i, c) => format!("{c}*w^{i}"),
            });
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.modulus == other.0.modulus
    }
}

impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}[{:?}]", self.0.p, self.0.degree, self.0.modulus)
    }
}

/// Smallest monic irreducible polynomial of degree `d` over `F_p`, as signed
/// coefficients lowest degree first. Degree one gives `w`.
pub fn default_modulus(p: u64, d: usize) -> Result<Vec<i64>, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if d == 0 {
        return Err(FieldError::NotMonic);
    }
    match p.checked_pow(d as u32) {
        Some(o) if o <= MAX_FIELD_ORDER => {}
        _ => return Err(FieldError::TooLarge(p)),
    }
    let count = p.pow(d as u32);
    for idx in 0..count {
        let mut cand = Vec::with_capacity(d + 1);
        let mut r = idx;
        for _ in 0..d {
            cand.push(r % p);
            r /= p;
        }
        cand.push(1);
        if d > 1 && cand[0] == 0 {
            continue;
        }
        if is_irreducible(&cand, p) {
            return Ok(cand.into_iter().map(|c| c as i64).collect());
        }
    }
    Err(FieldError::Reducible(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_generator_cubes_to_one() {
        let k = FiniteField::with_degree(2, 2).unwrap();
        assert_eq!(k.modulus(), &[1, 1, 1]);
        let w = k.generator();
        assert_eq!(k.pow(w, 3), k.one());
        assert_eq!(k.p_root(w), k.mul(w, w));
        for x in k.elements() {
            assert_eq!(k.pow(x, 4), x);
            assert_eq!(k.pow(k.p_root(x), 2), x);
        }
    }

    #[test]
    fn field_axioms_f9_and_f8() {
        for (p, d) in [(3, 2), (2, 3), (5, 1)] {
            let k = FiniteField::with_degree(p, d).unwrap();
            let els: Vec<_> = k.elements().collect();
            assert_eq!(els.len() as u64, p.pow(d as u32));
            for &a in &els {
                assert_eq!(k.add(a, k.neg(a)), k.zero());
                if a != k.zero() {
                    assert_eq!(k.mul(a, k.inv(a).unwrap()), k.one());
                }
                for &b in &els {
                    assert_eq!(k.add(a, b), k.add(b, a));
                    // cross-check against schoolbook multiplication
                    let prod = k.from_coeffs(
                        &poly_mul(&k.coeffs(a), &k.coeffs(b), p)
                            .iter()
                            .map(|&c| c as i64)
                            .collect::<Vec<_>>(),
                    );
                    assert_eq!(k.mul(a, b), prod);
                }
            }
        }
    }

    #[test]
    fn rejects_reducible_and_composite() {
        assert_eq!(FiniteField::new(2, &[1, 0, 1]).unwrap_err(), FieldError::Reducible(2));
        assert_eq!(FiniteField::new(4, &[0, 1]).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(FiniteField::new(2, &[1, 1, 2]).unwrap_err(), FieldError::NotMonic);
    }

    #[test]
    fn roots_of_quadratic() {
        let k = FiniteField::with_degree(2, 2).unwrap();
        let r = k.roots(&[1, 1, 1]);
        assert_eq!(r.len(), 2);
        assert!(r.contains(&k.generator()));
        assert_eq!(k.format(k.add(k.generator(), k.one())), "1 + w");
    }
}
