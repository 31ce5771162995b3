//! Truncated ramified Witt vectors `W_{O,n}(B)`.
//!
//! Arithmetic evaluates universal structure polynomials through the
//! algebra's structure map. Operations return the longest result the
//! inputs determine: over characteristic-`p` algebras many structure
//! polynomials read fewer coordinates than they do universally.

pub mod cache;
pub mod eval;
pub mod family;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rand::RngCore;
use thiserror::Error;

use crate::coeff_ring::{CoeffError, CoeffRing, LocalRing, MPoly, MPolyRing, OAlgebra};
use crate::local_ring::{Coords, Extension, LocalElem, LocalFieldSpec};

pub use cache::{CacheEntry, CacheError, FamilyCache};
pub use eval::EvalFamily;
pub use family::{FamilyError, FamilyKind, FamilySource, Layout, PolyFamily};

#[derive(Debug, Error)]
pub enum WittError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("need {needed} coordinates, have {available}")]
    Length { needed: usize, available: usize },
    #[error("lengths differ: {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("Witt vectors have positive length")]
    Empty,
    #[error("supports overlap at coordinate {0}")]
    Overlap(usize),
    #[error("{0}")]
    Unsupported(String),
}

impl WittError {
    /// Whether the structure polynomial solver itself failed, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        let fam = match self {
            WittError::Family(f) | WittError::Cache(CacheError::Family(f)) => f,
            _ => return false,
        };
        matches!(fam, FamilyError::Integrality { .. } | FamilyError::SolverPrecision { .. })
    }
}

impl From<crate::local_ring::LocalError> for WittError {
    fn from(e: crate::local_ring::LocalError) -> Self {
        WittError::Family(e.into())
    }
}

/// Coordinates `(b_0, .., b_{n-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WittVector<E> {
    pub coords: Vec<E>,
}

impl<E: Clone> WittVector<E> {
    pub fn new(coords: Vec<E>) -> Self {
        WittVector { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn truncate(&self, n: usize) -> Self {
        WittVector {
            coords: self.coords[..n.min(self.len())].to_vec(),
        }
    }
}

/// Evaluates families through one algebra, memoizing the pushed-forward
/// coefficients.
pub struct Evaluator<R: CoeffRing> {
    alg: OAlgebra<R>,
    cache: Arc<FamilyCache>,
    evals: RwLock<HashMap<(String, String, usize), Arc<EvalFamily<R>>>>,
}

impl<R: CoeffRing> Evaluator<R> {
    pub fn new(alg: OAlgebra<R>, cache: Arc<FamilyCache>) -> Self {
        Evaluator {
            alg,
            cache,
            evals: RwLock::default(),
        }
    }

    pub fn algebra(&self) -> &OAlgebra<R> {
        &self.alg
    }

    pub fn cache(&self) -> &Arc<FamilyCache> {
        &self.cache
    }

    pub fn family(&self, kind: &FamilyKind, source: &FamilySource, n: usize) -> Result<Arc<EvalFamily<R>>, WittError> {
        let key = (source.fingerprint(), kind.key(), n);
        if let Some(f) = self.evals.read().expect("eval lock").get(&key) {
            return Ok(f.clone());
        }
        let fam = self.cache.get(kind, source, n)?;
        let need = self.alg.required_precision();
        if fam.precision(n - 1) < need {
            return Err(FamilyError::SolverPrecision {
                n,
                max: fam.solver_precision(),
            }
            .into());
        }
        let ev = Arc::new(EvalFamily::new(&fam, &self.alg));
        self.evals.write().expect("eval lock").insert(key, ev.clone());
        Ok(ev)
    }

    /// Outputs `0..out`; fails when the inputs are too short.
    pub fn apply(
        &self,
        kind: &FamilyKind,
        source: &FamilySource,
        blocks: &[&[R::Elem]],
        out: usize,
    ) -> Result<Vec<R::Elem>, WittError> {
        if out == 0 {
            return Err(WittError::Empty);
        }
        let ev = self.family(kind, source, out)?;
        let avail = blocks.iter().map(|b| b.len()).min().unwrap_or(0);
        let needed = ev.footprint(out - 1);
        if needed > avail {
            return Err(WittError::Length { needed, available: avail });
        }
        Ok(ev.eval(self.alg.ring(), blocks, out)?)
    }

    /// The longest output (at most `bound`) the inputs determine.
    pub fn apply_max(
        &self,
        kind: &FamilyKind,
        source: &FamilySource,
        blocks: &[&[R::Elem]],
        bound: usize,
    ) -> Result<Vec<R::Elem>, WittError> {
        let ev = self.family(kind, source, bound)?;
        let avail = blocks.iter().map(|b| b.len()).min().unwrap_or(0);
        let out = ev.max_output(avail);
        if out == 0 {
            return Err(WittError::Length {
                needed: ev.footprint(0),
                available: avail,
            });
        }
        Ok(ev.eval(self.alg.ring(), blocks, out)?)
    }
}

/// `W_{O,n}(B)` for an `O`-algebra `B`, all lengths at once.
pub struct WittRing<R: CoeffRing> {
    eval: Arc<Evaluator<R>>,
    source: FamilySource,
}

impl<R: CoeffRing> Clone for WittRing<R> {
    fn clone(&self) -> Self {
        WittRing {
            eval: self.eval.clone(),
            source: self.source.clone(),
        }
    }
}

impl<R: CoeffRing> fmt::Debug for WittRing<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WittRing({:?})", self.eval.alg)
    }
}

type Vector<R> = WittVector<<R as CoeffRing>::Elem>;

impl<R: CoeffRing> WittRing<R> {
    pub fn new(alg: OAlgebra<R>) -> Self {
        Self::with_cache(alg, FamilyCache::global())
    }

    pub fn with_cache(alg: OAlgebra<R>, cache: Arc<FamilyCache>) -> Self {
        let source = FamilySource::Local(alg.spec().clone());
        WittRing {
            eval: Arc::new(Evaluator::new(alg, cache)),
            source,
        }
    }

    pub fn algebra(&self) -> &OAlgebra<R> {
        &self.eval.alg
    }

    pub fn ring(&self) -> &R {
        self.eval.alg.ring()
    }

    pub fn spec(&self) -> &Arc<LocalFieldSpec> {
        self.eval.alg.spec()
    }

    pub fn evaluator(&self) -> &Arc<Evaluator<R>> {
        &self.eval
    }

    pub fn source(&self) -> &FamilySource {
        &self.source
    }

    /// The family of length `n`, from the cache.
    pub fn family(&self, kind: &FamilyKind, n: usize) -> Result<Arc<PolyFamily>, WittError> {
        Ok(self.eval.cache.get(kind, &self.source, n)?)
    }

    pub fn vector(&self, coords: Vec<R::Elem>) -> Result<Vector<R>, WittError> {
        if coords.is_empty() {
            return Err(WittError::Empty);
        }
        Ok(WittVector::new(coords))
    }

    pub fn zero(&self, n: usize) -> Vector<R> {
        WittVector::new(vec![self.ring().zero(); n])
    }

    pub fn one(&self, n: usize) -> Vector<R> {
        self.teichmuller(self.ring().one(), n)
    }

    /// `[b] = (b, 0, .., 0)`.
    pub fn teichmuller(&self, b: R::Elem, n: usize) -> Vector<R> {
        let mut coords = vec![self.ring().zero(); n];
        coords[0] = b;
        WittVector::new(coords)
    }

    /// Image of `lambda` under `O -> W_{O,n}(B)`.
    pub fn from_scalar(&self, lambda: &LocalElem, n: usize) -> Result<Vector<R>, WittError> {
        self.scalar(lambda, &self.one(n))
    }

    pub fn is_zero(&self, x: &Vector<R>) -> bool {
        x.coords.iter().all(|c| self.ring().is_zero(c))
    }

    fn same_len(x: &Vector<R>, y: &Vector<R>) -> Result<usize, WittError> {
        if x.len() != y.len() {
            return Err(WittError::LengthMismatch(x.len(), y.len()));
        }
        if x.is_empty() {
            return Err(WittError::Empty);
        }
        Ok(x.len())
    }

    fn binary(&self, kind: FamilyKind, x: &Vector<R>, y: &Vector<R>) -> Result<Vector<R>, WittError> {
        let n = Self::same_len(x, y)?;
        let out = self.eval.apply(&kind, &self.source, &[&x.coords, &y.coords], n)?;
        Ok(WittVector::new(out))
    }

    fn unary(&self, kind: FamilyKind, x: &Vector<R>) -> Result<Vector<R>, WittError> {
        if x.is_empty() {
            return Err(WittError::Empty);
        }
        let out = self.eval.apply(&kind, &self.source, &[&x.coords], x.len())?;
        Ok(WittVector::new(out))
    }

    pub fn add(&self, x: &Vector<R>, y: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.binary(FamilyKind::Sum, x, y)
    }

    pub fn mul(&self, x: &Vector<R>, y: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.binary(FamilyKind::Prod, x, y)
    }

    pub fn neg(&self, x: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.unary(FamilyKind::Neg, x)
    }

    pub fn sub(&self, x: &Vector<R>, y: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.add(x, &self.neg(y)?)
    }

    /// `lambda * x` for `lambda` in `O`.
    pub fn scalar(&self, lambda: &LocalElem, x: &Vector<R>) -> Result<Vector<R>, WittError> {
        if **lambda.spec() != **self.spec() {
            return Err(WittError::Unsupported("scalar from a different local ring".into()));
        }
        self.unary(
            FamilyKind::Scalar {
                lambda: lambda.signed_coords(),
            },
            x,
        )
    }

    /// Ghost components `Phi_0..Phi_{n-1}` in `B`.
    pub fn ghost(&self, x: &Vector<R>) -> Result<Vec<R::Elem>, WittError> {
        let ring = self.ring();
        let spec = self.spec();
        let pi = self.algebra().map_local(&LocalElem::uniformizer(spec, spec.max_precision()));
        let q = spec.q();
        // powers[i] = x_i^{q^{m-i}}
        let mut powers: Vec<R::Elem> = Vec::with_capacity(x.len());
        let mut out = Vec::with_capacity(x.len());
        for m in 0..x.len() {
            for p in powers.iter_mut() {
                *p = ring.pow(p, q)?;
            }
            powers.push(x.coords[m].clone());
            let mut acc = ring.zero();
            let mut pi_pow = ring.one();
            for p in &powers {
                acc = ring.add(&acc, &ring.mul(&pi_pow, p)?);
                pi_pow = ring.mul(&pi_pow, &pi)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Frobenius. Universally it consumes one coordinate; over
    /// characteristic-`p` algebras the length is kept.
    pub fn frobenius(&self, x: &Vector<R>) -> Result<Vector<R>, WittError> {
        if x.is_empty() {
            return Err(WittError::Empty);
        }
        let out = self
            .eval
            .apply_max(&FamilyKind::Frobenius, &self.source, &[&x.coords], x.len())?;
        Ok(WittVector::new(out))
    }

    pub fn frobenius_pow(&self, x: &Vector<R>, k: usize) -> Result<Vector<R>, WittError> {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.frobenius(&y)?;
        }
        Ok(y)
    }

    /// Verschiebung, the shift `(b_0, ..) -> (0, b_0, ..)`; length grows by one.
    pub fn verschiebung(&self, x: &Vector<R>) -> Vector<R> {
        let mut coords = Vec::with_capacity(x.len() + 1);
        coords.push(self.ring().zero());
        coords.extend(x.coords.iter().cloned());
        WittVector::new(coords)
    }

    /// Coordinatewise union of vectors with disjoint supports.
    pub fn glue(&self, parts: &[Vector<R>]) -> Result<Vector<R>, WittError> {
        let first = parts.first().ok_or(WittError::Empty)?;
        let n = first.len();
        let mut out = self.zero(n);
        let mut taken = vec![false; n];
        for part in parts {
            Self::same_len(first, part)?;
            for (i, c) in part.coords.iter().enumerate() {
                if self.ring().is_zero(c) {
                    continue;
                }
                if taken[i] {
                    return Err(WittError::Overlap(i));
                }
                taken[i] = true;
                out.coords[i] = c.clone();
            }
        }
        Ok(out)
    }

    /// `sum_j pi^j [b_j]`, computed with the ring operations.
    pub fn pi_series(&self, digits: &[R::Elem]) -> Result<Vector<R>, WittError> {
        let n = digits.len();
        if n == 0 {
            return Err(WittError::Empty);
        }
        let spec = self.spec();
        let pi = LocalElem::uniformizer(spec, spec.max_precision());
        let mut acc = self.zero(n);
        let mut pi_pow = LocalElem::one(spec, spec.max_precision());
        for b in digits {
            let term = self.scalar(&pi_pow, &self.teichmuller(b.clone(), n))?;
            acc = self.add(&acc, &term)?;
            pi_pow = pi_pow.mul(&pi);
        }
        Ok(acc)
    }

    /// Digits of `x` over a perfect characteristic-`p` algebra, using
    /// `x = (b_0, b_1^q, .., b_{n-1}^{q^{n-1}})`.
    pub fn pi_series_inverse(&self, x: &Vector<R>) -> Result<Vec<R::Elem>, WittError> {
        if !self.algebra().is_residue() {
            return Err(WittError::Unsupported("digits need a characteristic-p algebra".into()));
        }
        let q = self.spec().q();
        let mut out = Vec::with_capacity(x.len());
        for (j, c) in x.coords.iter().enumerate() {
            let mut b = c.clone();
            for _ in 0..j {
                b = self.ring().q_root(&b, q).ok_or_else(|| {
                    WittError::Unsupported(format!("{} has no q-th root in {}", self.ring().format(&b), self.ring().describe()))
                })?;
            }
            out.push(b);
        }
        Ok(out)
    }

    /// All of `W_{O,n}(B)` for finite `B`, in lexicographic order.
    pub fn elements(&self, n: usize) -> Option<Vec<Vector<R>>> {
        let base = self.ring().elements()?;
        let total = (base.len() as u64).checked_pow(n as u32)?;
        if total > 1 << 22 {
            return None;
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; n];
        loop {
            out.push(WittVector::new(idx.iter().map(|&i| base[i].clone()).collect()));
            let mut k = n;
            loop {
                if k == 0 {
                    return Some(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < base.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    pub fn random(&self, n: usize, rng: &mut dyn RngCore) -> Vector<R> {
        WittVector::new((0..n).map(|_| self.ring().random_element(rng)).collect())
    }

    pub fn format(&self, x: &Vector<R>) -> String {
        let parts: Vec<String> = x.coords.iter().map(|c| self.ring().format(c)).collect();
        format!("({})", parts.join(", "))
    }
}

/// Substitutes `values` into `poly` (coefficients in `outer_spec` at
/// precision `prec`), mapping coefficients with `map` into `target`'s base.
pub fn substitute(
    poly: &MPoly<Coords>,
    outer: &MPolyRing<LocalRing>,
    target: &MPolyRing<LocalRing>,
    map: impl Fn(&Coords) -> Coords,
    values: &[MPoly<Coords>],
) -> Result<MPoly<Coords>, CoeffError> {
    let base = target.base().clone();
    outer.evaluate(poly, target, |c| target.constant(base.reduce(&map(c))), values)
}

/// The change-of-uniformizer family `h` with `Phi_{varpi,m}(h) = Phi_{pi,m}`,
/// where `ext` maps the `pi`-presentation to the `varpi`-presentation.
pub fn change_of_uniformizer(ext: &Arc<Extension>, n: usize) -> Result<Arc<PolyFamily>, WittError> {
    Ok(FamilyCache::global().get(
        &FamilyKind::UniformizerChange,
        &FamilySource::Extension(ext.clone()),
        n,
    )?)
}

/// Composes the change of uniformizer with its reverse and checks it is
/// the identity at length `n`.
pub fn uniformizer_round_trip(
    forward: &Arc<Extension>,
    backward: &Arc<Extension>,
    n: usize,
) -> Result<bool, WittError> {
    let h = change_of_uniformizer(forward, n)?;
    let h_back = change_of_uniformizer(backward, n)?;
    // h_back(h(X)), computed over the pi-presentation
    let spec = backward.top().clone();
    let prec = h.precision(n - 1).min(h_back.precision(n - 1));
    let target = MPolyRing::new(LocalRing::new(&spec, prec), h.vars().to_vec());
    let inner: Vec<MPoly<Coords>> = h
        .polys()
        .iter()
        .map(|p| target.reduce_terms(p.terms.iter().map(|(m, c)| (m.clone(), backward.map_raw(c))).collect()))
        .collect();
    let outer = h_back.ring_at(prec);
    for m in 0..n {
        let composed = substitute(h_back.poly(m), &outer, &target, |c| c.clone(), &inner)?;
        if !target.is_zero(&target.sub(&composed, &target.var(m))) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
