//! The Drinfeld morphism `u: W_O -> W_{O'}` for an extension `O'/O`, and
//! its extension `u^ra` to `W_O(B) (x)_O O'` when `O'/O` is totally ramified.

use std::sync::Arc;

use crate::coeff_ring::{CoeffRing, LocalRing, MPoly, MPolyRing, Monomial, OAlgebra};
use crate::local_ring::{Coords, Extension, FfElem, FiniteField, LocalElem};
use crate::witt::{
    substitute, FamilyCache, FamilyKind, FamilySource, PolyFamily, WittError, WittRing, WittVector,
};

type Vector<R> = WittVector<<R as CoeffRing>::Elem>;

/// `u` for one extension, evaluated in one `O'`-algebra `B`.
pub struct DrinfeldMap<R: CoeffRing> {
    ext: Arc<Extension>,
    source: FamilySource,
    top: WittRing<R>,
    base: WittRing<R>,
}

impl<R: CoeffRing> Clone for DrinfeldMap<R> {
    fn clone(&self) -> Self {
        DrinfeldMap {
            ext: self.ext.clone(),
            source: self.source.clone(),
            top: self.top.clone(),
            base: self.base.clone(),
        }
    }
}

impl<R: CoeffRing> DrinfeldMap<R> {
    /// `alg` is `B` as an algebra over the top ring of `ext`.
    pub fn new(ext: &Arc<Extension>, alg: OAlgebra<R>) -> Result<Self, WittError> {
        Self::with_cache(ext, alg, FamilyCache::global())
    }

    pub fn with_cache(ext: &Arc<Extension>, alg: OAlgebra<R>, cache: Arc<FamilyCache>) -> Result<Self, WittError> {
        let base_alg = alg.restrict(ext)?;
        Ok(DrinfeldMap {
            ext: ext.clone(),
            source: FamilySource::Extension(ext.clone()),
            top: WittRing::with_cache(alg, cache.clone()),
            base: WittRing::with_cache(base_alg, cache),
        })
    }

    pub fn extension(&self) -> &Arc<Extension> {
        &self.ext
    }

    /// `W_{O'}(B)`.
    pub fn top(&self) -> &WittRing<R> {
        &self.top
    }

    /// `W_O(B)`.
    pub fn base(&self) -> &WittRing<R> {
        &self.base
    }

    pub fn family(&self, n: usize) -> Result<Arc<PolyFamily>, WittError> {
        Ok(self.top.evaluator().cache().get(&FamilyKind::DrinfeldU, &self.source, n)?)
    }

    /// Coordinates `u_0..u_{m-1}` read universally.
    pub fn universal_input_len(&self, m: usize) -> usize {
        (m - 1) * self.ext.residue_degree() + 1
    }

    /// Upper bound on the output length determined by `len` input
    /// coordinates: over characteristic-`p` algebras `u_{je}` reads up to
    /// `X_j`, universally `u_m` reads `X_0..X_{mr}`.
    pub fn matched_len(&self, len: usize) -> usize {
        if len == 0 {
            0
        } else if self.top.algebra().is_residue() {
            (len - 1) * self.ext.ramification() + 1
        } else {
            (len - 1) / self.ext.residue_degree() + 1
        }
    }

    /// `u(x)` truncated to length `m`.
    pub fn u_eval(&self, x: &Vector<R>, m: usize) -> Result<Vector<R>, WittError> {
        let out = self
            .top
            .evaluator()
            .apply(&FamilyKind::DrinfeldU, &self.source, &[&x.coords], m)?;
        Ok(WittVector::new(out))
    }

    /// `u(x)` at the longest length `x` determines.
    pub fn u_max(&self, x: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.u_upto(x, usize::MAX)
    }

    /// `u(x)` at the longest length `x` determines, capped at `cap`.
    pub fn u_upto(&self, x: &Vector<R>, cap: usize) -> Result<Vector<R>, WittError> {
        let bound = self.matched_len(x.len()).min(cap);
        let out = self
            .top
            .evaluator()
            .apply_max(&FamilyKind::DrinfeldU, &self.source, &[&x.coords], bound)?;
        Ok(WittVector::new(out))
    }

    fn check_ra(&self) -> Result<(), WittError> {
        if self.ext.residue_degree() != 1 {
            return Err(WittError::Unsupported("u^ra needs a totally ramified extension".into()));
        }
        Ok(())
    }

    /// `u^ra(sum_i t_i (x) varpi^i)` truncated to length `m`.
    pub fn u_ra_eval(&self, t: &[Vector<R>], m: usize) -> Result<Vector<R>, WittError> {
        self.check_ra()?;
        self.check_tensor(t)?;
        let blocks: Vec<&[R::Elem]> = t.iter().map(|v| v.coords.as_slice()).collect();
        let out = self
            .top
            .evaluator()
            .apply(&FamilyKind::DrinfeldURa, &self.source, &blocks, m)?;
        Ok(WittVector::new(out))
    }

    /// `u^ra` at the longest length the components determine.
    pub fn u_ra_max(&self, t: &[Vector<R>]) -> Result<Vector<R>, WittError> {
        self.u_ra_upto(t, usize::MAX)
    }

    /// `u^ra` at the longest length the components determine, capped at `cap`.
    pub fn u_ra_upto(&self, t: &[Vector<R>], cap: usize) -> Result<Vector<R>, WittError> {
        self.check_ra()?;
        let len = self.check_tensor(t)?;
        let bound = if self.top.algebra().is_residue() {
            len * self.ext.ramification()
        } else {
            len
        }
        .min(cap);
        let blocks: Vec<&[R::Elem]> = t.iter().map(|v| v.coords.as_slice()).collect();
        let out = self
            .top
            .evaluator()
            .apply_max(&FamilyKind::DrinfeldURa, &self.source, &blocks, bound)?;
        Ok(WittVector::new(out))
    }

    fn check_tensor(&self, t: &[Vector<R>]) -> Result<usize, WittError> {
        if t.len() != self.ext.ramification() {
            return Err(WittError::Unsupported(format!(
                "a tensor has {} components, got {}",
                self.ext.ramification(),
                t.len()
            )));
        }
        let len = t[0].len();
        if let Some(bad) = t.iter().find(|v| v.len() != len) {
            return Err(WittError::LengthMismatch(len, bad.len()));
        }
        if len == 0 {
            return Err(WittError::Empty);
        }
        Ok(len)
    }

    /// Coefficients `a_0..a_{e-1}` of the Eisenstein polynomial of `varpi`
    /// over `O`, as elements of `O`.
    pub fn eisenstein_over_base(&self) -> Result<Vec<LocalElem>, WittError> {
        let base = self.ext.base();
        let top = self.ext.top();
        if base.e() != 1 || base.descriptor().unram_modulus != top.descriptor().unram_modulus {
            return Err(WittError::Unsupported(
                "tensor products need an unramified base sharing the residue modulus".into(),
            ));
        }
        let prec = base.max_precision();
        let coeffs: Vec<LocalElem> = top.descriptor().eisenstein[..top.e()]
            .iter()
            .map(|row| LocalElem::from_signed(base, row, prec))
            .collect();
        Ok(coeffs)
    }

    pub fn ra_add(&self, a: &[Vector<R>], b: &[Vector<R>]) -> Result<Vec<Vector<R>>, WittError> {
        a.iter().zip(b).map(|(x, y)| self.base.add(x, y)).collect()
    }

    /// Product in `W_O(B) (x)_O O'`, folding `varpi^e` with its Eisenstein relation.
    pub fn ra_mul(&self, a: &[Vector<R>], b: &[Vector<R>]) -> Result<Vec<Vector<R>>, WittError> {
        let coeffs = self.eisenstein_over_base()?;
        let e = coeffs.len();
        let n = self.check_tensor(a)?;
        self.check_tensor(b)?;
        let w = &self.base;
        let mut prod = vec![w.zero(n); 2 * e - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = w.add(&prod[i + j], &w.mul(x, y)?)?;
            }
        }
        for k in (e..2 * e - 1).rev() {
            let top = prod[k].clone();
            for (t, a_t) in coeffs.iter().enumerate() {
                let s = w.scalar(a_t, &top)?;
                prod[k - e + t] = w.sub(&prod[k - e + t], &s)?;
            }
        }
        prod.truncate(e);
        Ok(prod)
    }
}

/// `u_m` reduced modulo the top uniformizer, over the top residue field.
pub fn residue_poly(fam: &PolyFamily, m: usize) -> (MPolyRing<FiniteField>, MPoly<FfElem>) {
    let spec = fam.source().coeff_spec();
    let k = spec.residue_field().clone();
    let ring = MPolyRing::new(k, fam.vars().to_vec());
    let terms = fam.poly(m).terms.iter().map(|(mono, c)| (mono.clone(), spec.residue(c))).collect();
    (ring.clone(), ring.reduce_terms(terms))
}

fn single_term(ring: &MPolyRing<FiniteField>, var: usize, exp: u32, coeff: FfElem) -> MPoly<FfElem> {
    ring.monomial(Monomial::var(ring.nvars(), var).pow(exp), coeff)
}

/// Coordinates `m < n` where `u_m` is not `X_m^{q^{m(r-1)}}` modulo `varpi`
/// (unramified extensions).
pub fn unramified_closed_form_failures(ext: &Arc<Extension>, n: usize) -> Result<Vec<usize>, WittError> {
    if ext.ramification() != 1 {
        return Err(WittError::Unsupported("the closed form is for unramified extensions".into()));
    }
    let fam = FamilyCache::global().get(&FamilyKind::DrinfeldU, &FamilySource::Extension(ext.clone()), n)?;
    let q = ext.base().q();
    let r = ext.residue_degree() as u32;
    let mut bad = Vec::new();
    for m in 0..n {
        let (ring, red) = residue_poly(&fam, m);
        let exp = q.pow(m as u32 * (r - 1)) as u32;
        let expect = single_term(&ring, m, exp, ring.base().one());
        if red != expect {
            bad.push(m);
        }
    }
    Ok(bad)
}

/// One row of the ramified support check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportRow {
    pub m: usize,
    pub residue: String,
    pub expected: String,
    pub ok: bool,
}

/// For `pi = alpha varpi^e`, `u_m` modulo `varpi` vanishes unless `e`
/// divides `m`, and `u_{je}` reduces to `alpha^j X_j^{q^{j(e-1)}}`.
pub fn ramified_support(ext: &Arc<Extension>, n: usize) -> Result<Vec<SupportRow>, WittError> {
    if ext.residue_degree() != 1 {
        return Err(WittError::Unsupported("the support check is for totally ramified extensions".into()));
    }
    let fam = FamilyCache::global().get(&FamilyKind::DrinfeldU, &FamilySource::Extension(ext.clone()), n)?;
    let e = ext.ramification();
    let q = ext.base().q();
    let alpha = ext.unit_ratio().residue();
    let mut rows = Vec::with_capacity(n);
    for m in 0..n {
        let (ring, red) = residue_poly(&fam, m);
        let expect = if m % e != 0 {
            ring.zero()
        } else {
            let j = m / e;
            let exp = q.pow((j * (e - 1)) as u32) as u32;
            single_term(&ring, j, exp, ring.base().pow(alpha, j as u64))
        };
        rows.push(SupportRow {
            m,
            residue: ring.format(&red),
            expected: ring.format(&expect),
            ok: red == expect,
        });
    }
    Ok(rows)
}

/// One row of the kernel congruence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceRow {
    pub s: usize,
    pub n: usize,
    pub i: usize,
    pub residue: String,
    pub expected: String,
    pub ok: bool,
}

/// Exponent of `X_{n,i}` in the kernel generators: `q^{n(e-1)+i}`.
pub fn kernel_exponent(q: u64, e: usize, n: usize, i: usize) -> u64 {
    q.pow((n * (e - 1) + i) as u32)
}

/// Reduces `u^ra_s` modulo `varpi` and the monomials `X_{m,j}^{q^{m(e-1)+j}}`
/// with `me + j < s`, and compares with `alpha^n X_{n,i}^{q^{n(e-1)+i}}`
/// for `s = ne + i`.
pub fn kernel_congruence(ext: &Arc<Extension>, s_max: usize) -> Result<Vec<CongruenceRow>, WittError> {
    if ext.residue_degree() != 1 {
        return Err(WittError::Unsupported("the congruence is for totally ramified extensions".into()));
    }
    let len = s_max + 1;
    let fam = FamilyCache::global().get(&FamilyKind::DrinfeldURa, &FamilySource::Extension(ext.clone()), len)?;
    let lay = fam.layout();
    let e = ext.ramification();
    let q = ext.top().q();
    let k = ext.top().residue_field().clone();
    let alpha = ext.unit_ratio().residue();
    let mut rows = Vec::with_capacity(len);
    for s in 0..len {
        let gens: Vec<Monomial> = (0..s)
            .map(|t| {
                let (m, j) = (t / e, t % e);
                Monomial::var(lay.nvars(), lay.index(j, m)).pow(kernel_exponent(q, e, m, j) as u32)
            })
            .collect();
        let ring = MPolyRing::with_monomial_ideal(k.clone(), fam.vars().to_vec(), gens);
        let terms = fam
            .poly(s)
            .terms
            .iter()
            .map(|(mono, c)| (mono.clone(), ext.top().residue(c)))
            .collect();
        let red = ring.reduce_terms(terms);
        let (n, i) = (s / e, s % e);
        let expect = ring.monomial(
            Monomial::var(lay.nvars(), lay.index(i, n)).pow(kernel_exponent(q, e, n, i) as u32),
            k.pow(alpha, n as u64),
        );
        rows.push(CongruenceRow {
            s,
            n,
            i,
            residue: ring.format(&red),
            expected: ring.format(&expect),
            ok: red == expect,
        });
    }
    Ok(rows)
}

/// Composes `u` for `lower: O -> O'` and `upper: O' -> O''` symbolically and
/// compares with `u` for `direct: O -> O''` at length `n`.
pub fn tower_composition_holds(
    lower: &Arc<Extension>,
    upper: &Arc<Extension>,
    direct: &Arc<Extension>,
    n: usize,
) -> Result<bool, WittError> {
    if **lower.top() != **upper.base() || **lower.base() != **direct.base() || **upper.top() != **direct.top() {
        return Err(WittError::Unsupported("extensions do not form a tower".into()));
    }
    let cache = FamilyCache::global();
    let get = |ext: &Arc<Extension>, len| cache.get(&FamilyKind::DrinfeldU, &FamilySource::Extension(ext.clone()), len);
    let outer = get(upper, n)?;
    let inner_len = (n - 1) * upper.residue_degree() + 1;
    let inner = get(lower, inner_len)?;
    let whole = get(direct, n)?;
    let top = direct.top();
    let prec = outer
        .precision(n - 1)
        .min(inner.precision(inner_len - 1) * upper.ramification() as u32)
        .min(whole.precision(n - 1));
    let target = MPolyRing::new(LocalRing::new(top, prec), whole.vars().to_vec());
    let values: Vec<MPoly<Coords>> = inner
        .polys()
        .iter()
        .map(|p| target.reduce_terms(p.terms.iter().map(|(m, c)| (m.clone(), upper.map_raw(c))).collect()))
        .collect();
    let outer_ring = outer.ring_at(prec);
    for m in 0..n {
        let composed = substitute(outer.poly(m), &outer_ring, &target, |c| c.clone(), &values)?;
        let expect = target.reduce_terms(whole.poly(m).terms.clone());
        if !target.is_zero(&target.sub(&composed, &expect)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_ring::{ExtensionDescriptor, SpecDescriptor};

    fn unram() -> Arc<Extension> {
        Extension::new(ExtensionDescriptor::new(
            SpecDescriptor::zp(2, 8),
            SpecDescriptor::unramified(2, 2, 8).unwrap(),
        ))
        .unwrap()
    }

    fn ram() -> Arc<Extension> {
        Extension::new(ExtensionDescriptor::new(
            SpecDescriptor::zp(2, 8),
            SpecDescriptor::pure_root(2, 1, 2, 8).unwrap(),
        ))
        .unwrap()
    }

    fn f4() -> FiniteField {
        FiniteField::with_degree(2, 2).unwrap()
    }

    #[test]
    fn first_polynomials() {
        let fam = FamilyCache::global()
            .get(&FamilyKind::DrinfeldU, &FamilySource::Extension(unram()), 3)
            .unwrap();
        assert_eq!(fam.format_poly(0), "X0");
        assert_eq!(fam.check_ghost_identity(), Ok(()));
        assert_eq!(unramified_closed_form_failures(&unram(), 3).unwrap(), Vec::<usize>::new());
        let rows = ramified_support(&ram(), 5).unwrap();
        assert!(rows.iter().all(|r| r.ok), "{rows:?}");
        assert_eq!(rows[1].residue, "0");
        assert_eq!(rows[2].residue, "X1^2");
    }

    #[test]
    fn unramified_closed_form_on_f4() {
        let k = f4();
        let d = DrinfeldMap::new(&unram(), OAlgebra::residue(k.clone(), unram().top()).unwrap()).unwrap();
        for x in d.base().elements(3).unwrap() {
            let y = d.u_eval(&x, 3).unwrap();
            let expect: Vec<FfElem> = (0..3).map(|m| k.pow(x.coords[m], 2u64.pow(m as u32))).collect();
            assert_eq!(y.coords, expect);
        }
    }

    #[test]
    fn ramified_tensor_example() {
        let k = FiniteField::prime_field(2).unwrap();
        let ext = ram();
        let d = DrinfeldMap::new(&ext, OAlgebra::residue(k.clone(), ext.top()).unwrap()).unwrap();
        let b = k.one();
        let t = vec![d.base().zero(2), d.base().teichmuller(b, 2)];
        let y = d.u_ra_max(&t).unwrap();
        assert_eq!(y.coords, vec![k.zero(), b, k.zero(), k.zero()]);
        let t0 = vec![d.base().teichmuller(b, 2), d.base().zero(2)];
        assert_eq!(d.u_ra_eval(&t0, 4).unwrap(), d.top().teichmuller(b, 4));
    }

    #[test]
    fn congruence_rows_for_e2() {
        let rows = kernel_congruence(&ram(), 3).unwrap();
        assert!(rows.iter().all(|r| r.ok), "{rows:?}");
        assert_eq!(rows[0].residue, "X0_0");
        assert_eq!(rows[2].expected, "X1_0^2");
        assert_eq!(rows[3].expected, "X1_1^4");
    }

    #[test]
    fn tower_through_the_unramified_subring() {
        let top = SpecDescriptor::pure_root(2, 2, 2, 8).unwrap();
        let mid = SpecDescriptor::unramified(2, 2, 8).unwrap();
        let lower = unram();
        let upper = Extension::new(ExtensionDescriptor::new(mid, top.clone())).unwrap();
        let direct = Extension::new(ExtensionDescriptor::new(SpecDescriptor::zp(2, 8), top)).unwrap();
        assert!(tower_composition_holds(&lower, &upper, &direct, 3).unwrap());
        assert!(tower_composition_holds(&lower, &upper, &unram(), 2).is_err());
    }

    #[test]
    fn tensor_multiplication_folds_the_eisenstein_relation() {
        let k = FiniteField::prime_field(2).unwrap();
        let ext = ram();
        let d = DrinfeldMap::new(&ext, OAlgebra::residue(k.clone(), ext.top()).unwrap()).unwrap();
        let w = d.base();
        let varpi = vec![w.zero(2), w.one(2)];
        let sq = d.ra_mul(&varpi, &varpi).unwrap();
        assert_eq!(sq, vec![w.from_scalar(&LocalElem::from_int(ext.base(), 2, 8), 2).unwrap(), w.zero(2)]);
    }
}
