//! The truncated Greenberg algebra `R_{me}(A) = W_m(A)[T]/(f_pi(T))` of a
//! `k`-algebra `A`, and the comparison map `r: R_{me}(A) -> W_{O,me}(A)`.
//!
//! `r` factors as `u^un (x) id` for `Z_p -> W(k)` followed by `u^ra` for
//! the totally ramified `W(k) -> O`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::coeff_ring::{CoeffRing, OAlgebra};
use crate::drinfeld::DrinfeldMap;
use crate::local_ring::{Extension, ExtensionDescriptor, LocalElem, LocalFieldSpec, SpecDescriptor};
use crate::witt::{WittError, WittRing, WittVector};

/// `sum_i parts[i] T^i` with `p`-typical components of a common length `m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GreenbergElem<E> {
    pub parts: Vec<WittVector<E>>,
}

impl<E: Clone> GreenbergElem<E> {
    pub fn len(&self) -> usize {
        self.parts.first().map_or(0, |v| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

type Elem<R> = GreenbergElem<<R as CoeffRing>::Elem>;

/// `R_{me}(A)` for a local ring `O` with unramified subring `W(k)`.
pub struct GreenbergRing<R: CoeffRing> {
    spec: Arc<LocalFieldSpec>,
    unram: Arc<LocalFieldSpec>,
    u_un: DrinfeldMap<R>,
    u_ra: DrinfeldMap<R>,
    fpi: Vec<LocalElem>,
    fpi_witt: RwLock<HashMap<usize, Arc<Vec<WittVector<R::Elem>>>>>,
}

/// `W(k)` for the residue field of `spec`, sharing its residue modulus.
pub fn unramified_subring(spec: &LocalFieldSpec) -> SpecDescriptor {
    let d = spec.descriptor();
    let mut a0 = vec![0; d.h];
    a0[0] = -(d.p as i64);
    let mut lead = vec![0; d.h];
    lead[0] = 1;
    SpecDescriptor {
        p: d.p,
        h: d.h,
        e: 1,
        unram_modulus: d.unram_modulus.clone(),
        eisenstein: vec![a0, lead],
        precision: d.precision,
    }
}

impl<R: CoeffRing> GreenbergRing<R> {
    /// `ring` must be a `k`-algebra for the residue field `k` of `spec`.
    pub fn new(spec: &Arc<LocalFieldSpec>, ring: R) -> Result<Self, WittError> {
        let alg = OAlgebra::residue(ring, spec)?;
        let wk = unramified_subring(spec);
        let zp = SpecDescriptor::zp(spec.p(), spec.default_precision());
        let ext_ra = Extension::new(ExtensionDescriptor::new(wk.clone(), spec.descriptor().clone()))?;
        let ext_un = Extension::new(ExtensionDescriptor::new(zp, wk))?;
        let u_ra = DrinfeldMap::new(&ext_ra, alg)?;
        let u_un = DrinfeldMap::new(&ext_un, u_ra.base().algebra().clone())?;
        let unram = ext_ra.base().clone();
        let prec = unram.max_precision();
        let fpi = spec.descriptor().eisenstein[..spec.e()]
            .iter()
            .map(|row| LocalElem::from_signed(&unram, row, prec))
            .collect();
        Ok(GreenbergRing {
            spec: spec.clone(),
            unram,
            u_un,
            u_ra,
            fpi,
            fpi_witt: RwLock::default(),
        })
    }

    pub fn spec(&self) -> &Arc<LocalFieldSpec> {
        &self.spec
    }

    pub fn ring(&self) -> &R {
        self.u_ra.top().ring()
    }

    /// `p`-typical Witt vectors over `A`.
    pub fn ptypical(&self) -> &WittRing<R> {
        self.u_un.base()
    }

    /// `W_O(A)`.
    pub fn target(&self) -> &WittRing<R> {
        self.u_ra.top()
    }

    pub fn e(&self) -> usize {
        self.spec.e()
    }

    /// Coefficients of `f_pi` below the leading term as `p`-typical Witt
    /// vectors of length `m` over `A`.
    pub fn fpi_witt(&self, m: usize) -> Result<Arc<Vec<WittVector<R::Elem>>>, WittError> {
        if let Some(v) = self.fpi_witt.read().expect("coefficient lock").get(&m) {
            return Ok(v.clone());
        }
        let alg = self.u_ra.top().algebra();
        let mut out = Vec::with_capacity(self.fpi.len());
        for a in &self.fpi {
            let coords = a.unram_to_witt_coords(m)?;
            out.push(WittVector::new(coords.into_iter().map(|c| alg.map_residue(c)).collect()));
        }
        let out = Arc::new(out);
        self.fpi_witt.write().expect("coefficient lock").insert(m, out.clone());
        Ok(out)
    }

    pub fn element(&self, parts: Vec<WittVector<R::Elem>>) -> Result<Elem<R>, WittError> {
        if parts.len() != self.e() {
            return Err(WittError::Unsupported(format!("expected {} components", self.e())));
        }
        let m = parts[0].len();
        if m == 0 {
            return Err(WittError::Empty);
        }
        if let Some(bad) = parts.iter().find(|v| v.len() != m) {
            return Err(WittError::LengthMismatch(m, bad.len()));
        }
        Ok(GreenbergElem { parts })
    }

    pub fn zero(&self, m: usize) -> Elem<R> {
        GreenbergElem {
            parts: vec![self.ptypical().zero(m); self.e()],
        }
    }

    pub fn one(&self, m: usize) -> Elem<R> {
        let mut x = self.zero(m);
        x.parts[0] = self.ptypical().one(m);
        x
    }

    /// The class of `T`.
    pub fn t_class(&self, m: usize) -> Result<Elem<R>, WittError> {
        if self.e() > 1 {
            let mut x = self.zero(m);
            x.parts[1] = self.ptypical().one(m);
            return Ok(x);
        }
        let minus_a0 = self.ptypical().neg(&self.fpi_witt(m)?[0])?;
        Ok(GreenbergElem { parts: vec![minus_a0] })
    }

    pub fn add(&self, x: &Elem<R>, y: &Elem<R>) -> Result<Elem<R>, WittError> {
        let w = self.ptypical();
        let parts = x.parts.iter().zip(&y.parts).map(|(a, b)| w.add(a, b)).collect::<Result<_, _>>()?;
        self.element(parts)
    }

    pub fn neg(&self, x: &Elem<R>) -> Result<Elem<R>, WittError> {
        let w = self.ptypical();
        let parts = x.parts.iter().map(|a| w.neg(a)).collect::<Result<_, _>>()?;
        self.element(parts)
    }

    /// Polynomial product reduced by `T^e = -sum_t a_t T^t`.
    pub fn mul(&self, x: &Elem<R>, y: &Elem<R>) -> Result<Elem<R>, WittError> {
        let w = self.ptypical();
        let e = self.e();
        let m = x.len();
        if y.len() != m {
            return Err(WittError::LengthMismatch(m, y.len()));
        }
        let coeffs = self.fpi_witt(m)?;
        let mut prod = vec![w.zero(m); 2 * e - 1];
        for (i, a) in x.parts.iter().enumerate() {
            for (j, b) in y.parts.iter().enumerate() {
                prod[i + j] = w.add(&prod[i + j], &w.mul(a, b)?)?;
            }
        }
        for k in (e..2 * e - 1).rev() {
            let lead = prod[k].clone();
            for (t, a_t) in coeffs.iter().enumerate() {
                prod[k - e + t] = w.sub(&prod[k - e + t], &w.mul(a_t, &lead)?)?;
            }
        }
        prod.truncate(e);
        self.element(prod)
    }

    /// `r(x)` truncated to length `n <= me`.
    pub fn r_eval(&self, x: &Elem<R>, n: usize) -> Result<WittVector<R::Elem>, WittError> {
        let m = x.len();
        if n > m * self.e() {
            return Err(WittError::Length {
                needed: n.div_ceil(self.e()),
                available: m,
            });
        }
        let lifted = x
            .parts
            .iter()
            .map(|b| self.u_un.u_eval(b, m))
            .collect::<Result<Vec<_>, _>>()?;
        self.u_ra.u_ra_eval(&lifted, n)
    }

    /// `r(x)` at the matched length `me`.
    pub fn r_matched(&self, x: &Elem<R>) -> Result<WittVector<R::Elem>, WittError> {
        self.r_eval(x, x.len() * self.e())
    }

    /// Exponent killing coordinate `n` of component `i` on the kernel of `r`:
    /// `p^{n(h-1)}` from `u^un`, then `q^{n(e-1)+i}` from `u^ra`.
    pub fn kernel_exponent(&self, n: usize, i: usize) -> u64 {
        let (p, h, e) = (self.spec.p(), self.spec.h() as u32, self.e());
        p.pow(n as u32 * (h - 1)) * self.spec.q().pow((n * (e - 1) + i) as u32)
    }

    /// Whether `x` lies on the locus cut out by the kernel generators of
    /// `r` truncated to length `out`.
    pub fn in_kernel_locus(&self, x: &Elem<R>, out: usize) -> Result<bool, WittError> {
        let ring = self.ring();
        let e = self.e();
        for s in 0..out {
            let (n, i) = (s / e, s % e);
            let c = &x.parts[i].coords[n];
            if !ring.is_zero(&ring.pow(c, self.kernel_exponent(n, i))?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All elements with components of length `m`, for finite `A`.
    pub fn elements(&self, m: usize) -> Option<Vec<Elem<R>>> {
        let comps = self.ptypical().elements(m)?;
        let total = (comps.len() as u64).checked_pow(self.e() as u32)?;
        if total > 1 << 22 {
            return None;
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; self.e()];
        loop {
            out.push(GreenbergElem {
                parts: idx.iter().map(|&i| comps[i].clone()).collect(),
            });
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return Some(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < comps.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    pub fn random(&self, m: usize, rng: &mut dyn rand::RngCore) -> Elem<R> {
        GreenbergElem {
            parts: (0..self.e()).map(|_| self.ptypical().random(m, rng)).collect(),
        }
    }

    pub fn format(&self, x: &Elem<R>) -> String {
        let parts: Vec<String> = x.parts.iter().map(|v| self.ptypical().format(v)).collect();
        format!("[{}]", parts.join(", "))
    }

    /// The unramified subring `W(k)` used in the factorization.
    pub fn unramified(&self) -> &Arc<LocalFieldSpec> {
        &self.unram
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_ring::FiniteField;

    fn ram2() -> Arc<LocalFieldSpec> {
        LocalFieldSpec::new(SpecDescriptor::pure_root(2, 1, 2, 8).unwrap()).unwrap()
    }

    #[test]
    fn t_squared_is_two() {
        let k = FiniteField::prime_field(2).unwrap();
        let g = GreenbergRing::new(&ram2(), k.clone()).unwrap();
        let t = g.t_class(2).unwrap();
        let tt = g.mul(&t, &t).unwrap();
        let two = WittVector::new(vec![k.zero(), k.one()]);
        assert_eq!(tt.parts, vec![two, g.ptypical().zero(2)]);
        let one = g.one(2);
        for x in g.elements(2).unwrap() {
            assert_eq!(g.mul(&one, &x).unwrap(), x);
        }
    }

    #[test]
    fn r_sends_t_to_the_uniformizer() {
        let k = FiniteField::prime_field(2).unwrap();
        let g = GreenbergRing::new(&ram2(), k.clone()).unwrap();
        let t = g.t_class(1).unwrap();
        let r_t = g.r_matched(&t).unwrap();
        let pi = LocalElem::uniformizer(g.spec(), 8);
        assert_eq!(r_t, g.target().from_scalar(&pi, 2).unwrap());
        assert_eq!(g.r_matched(&g.one(1)).unwrap(), g.target().one(2));
    }

    #[test]
    fn unramified_t_class() {
        let k = FiniteField::with_degree(2, 2).unwrap();
        let spec = LocalFieldSpec::unramified(2, 2, 8).unwrap();
        let g = GreenbergRing::new(&spec, k.clone()).unwrap();
        let t = g.t_class(2).unwrap();
        assert_eq!(t.parts[0].coords, vec![k.zero(), k.one()]);
        assert_eq!(g.kernel_exponent(1, 0), 2);
    }
}
