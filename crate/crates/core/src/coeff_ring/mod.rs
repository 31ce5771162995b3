//! Coefficient algebras for Witt vectors.
//!
//! Every algebra implements [`CoeffRing`]; ring objects carry the structure
//! (field tables, ideals, precision) and elements are plain values. An
//! [`OAlgebra`] pairs a ring with its structure map from a local ring.

pub mod instance;
pub mod local;
pub mod poly;

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::expr::{self, ExprError, ExprTarget};
use crate::local_ring::{Extension, FfElem, FiniteField, LocalElem, LocalError, LocalFieldSpec};

pub use instance::{make_instance, AnyRing, InstanceDescriptor, ProductRing};
pub use local::LocalRing;
pub use poly::{Ideal, MPoly, MPolyRing, Monomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("degree {degree} exceeds the cap {cap}")]
    DegreeCap { cap: u32, degree: u32 },
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Parse(#[from] ExprError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error("{0} is not enumerable")]
    NotEnumerable(String),
    #[error("no structure map: {0}")]
    Structure(String),
}

/// A commutative ring of coefficients with residue characteristic `p`.
pub trait CoeffRing: Clone + Send + Sync + 'static {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, CoeffError>;

    /// Canonical representative of an element built outside the ring operations.
    fn canonical(&self, a: &Self::Elem) -> Self::Elem {
        a.clone()
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn pow(&self, a: &Self::Elem, mut k: u64) -> Result<Self::Elem, CoeffError> {
        let mut acc = self.one();
        let mut base = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// The residue characteristic.
    fn prime(&self) -> u64;

    /// Whether `p = 0` in the ring.
    fn is_char_p(&self) -> bool;

    fn q_power_frobenius(&self, a: &Self::Elem, q: u64) -> Result<Self::Elem, CoeffError> {
        self.pow(a, q)
    }

    /// Some `y` with `y^q = a`, when one exists and the ring can find it.
    fn q_root(&self, _a: &Self::Elem, _q: u64) -> Option<Self::Elem> {
        None
    }

    /// All elements in lexicographic order of their coordinates.
    fn elements(&self) -> Option<Vec<Self::Elem>> {
        None
    }

    fn cardinality(&self) -> Option<u64> {
        None
    }

    fn random_element(&self, rng: &mut dyn RngCore) -> Self::Elem;

    /// A root of an integer polynomial (lowest degree first) in a
    /// characteristic-`p` ring, used to realize `F_q -> B`.
    fn residue_root(&self, _modulus: &[i64]) -> Option<Self::Elem> {
        None
    }

    /// Image of a local ring element in a ring built over that local ring.
    fn from_local(&self, _x: &LocalElem) -> Option<Self::Elem> {
        None
    }

    /// Precision of the local ring this ring is built over, if any.
    fn lift_precision(&self) -> Option<u32> {
        None
    }

    fn symbol(&self, _name: &str) -> Option<Self::Elem> {
        None
    }

    fn format(&self, a: &Self::Elem) -> String;

    fn describe(&self) -> String;
}

struct Target<'a, R: CoeffRing>(&'a R);

impl<R: CoeffRing> ExprTarget for Target<'_, R> {
    type Value = R::Elem;

    fn int(&self, n: i64) -> R::Elem {
        self.0.from_int(n)
    }

    fn symbol(&self, name: &str) -> Option<R::Elem> {
        self.0.symbol(name)
    }

    fn add(&self, a: &R::Elem, b: &R::Elem) -> R::Elem {
        self.0.add(a, b)
    }

    fn neg(&self, a: &R::Elem) -> R::Elem {
        self.0.neg(a)
    }

    fn mul(&self, a: &R::Elem, b: &R::Elem) -> Result<R::Elem, String> {
        self.0.mul(a, b).map_err(|e| e.to_string())
    }
}

/// Parses an element written as an integer polynomial in the ring's symbols.
pub fn parse_elem<R: CoeffRing>(ring: &R, text: &str) -> Result<R::Elem, CoeffError> {
    Ok(expr::parse(&Target(ring), text)?)
}

/// Whether every element has a `q^{n-1}`-th root, decided by enumeration.
pub fn semiperfect_level<R: CoeffRing>(ring: &R, q: u64, n: usize) -> Result<bool, CoeffError> {
    let els = ring
        .elements()
        .ok_or_else(|| CoeffError::NotEnumerable(ring.describe()))?;
    if n <= 1 {
        return Ok(true);
    }
    let mut image = HashSet::with_capacity(els.len());
    for x in &els {
        let mut y = x.clone();
        for _ in 1..n {
            y = ring.q_power_frobenius(&y, q)?;
        }
        image.insert(y);
    }
    Ok(image.len() == els.len())
}

impl CoeffRing for FiniteField {
    type Elem = FfElem;

    fn zero(&self) -> FfElem {
        FiniteField::zero(self)
    }

    fn one(&self) -> FfElem {
        FiniteField::one(self)
    }

    fn from_int(&self, n: i64) -> FfElem {
        FiniteField::from_int(self, n)
    }

    fn add(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FiniteField::add(self, *a, *b)
    }

    fn neg(&self, a: &FfElem) -> FfElem {
        FiniteField::neg(self, *a)
    }

    fn sub(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FiniteField::sub(self, *a, *b)
    }

    fn mul(&self, a: &FfElem, b: &FfElem) -> Result<FfElem, CoeffError> {
        Ok(FiniteField::mul(self, *a, *b))
    }

    fn is_zero(&self, a: &FfElem) -> bool {
        a.0 == 0
    }

    fn pow(&self, a: &FfElem, k: u64) -> Result<FfElem, CoeffError> {
        Ok(FiniteField::pow(self, *a, k))
    }

    fn prime(&self) -> u64 {
        self.characteristic()
    }

    fn is_char_p(&self) -> bool {
        true
    }

    fn q_root(&self, a: &FfElem, q: u64) -> Option<FfElem> {
        let p = self.characteristic();
        let mut x = *a;
        let mut k = q;
        while k > 1 {
            if k % p != 0 {
                return None;
            }
            x = self.p_root(x);
            k /= p;
        }
        Some(x)
    }

    fn elements(&self) -> Option<Vec<FfElem>> {
        Some(FiniteField::elements(self).collect())
    }

    fn cardinality(&self) -> Option<u64> {
        Some(self.order())
    }

    fn random_element(&self, rng: &mut dyn RngCore) -> FfElem {
        FfElem(rng.gen_range(0..self.order() as u32))
    }

    fn residue_root(&self, modulus: &[i64]) -> Option<FfElem> {
        self.roots(modulus).first().copied()
    }

    fn symbol(&self, name: &str) -> Option<FfElem> {
        (name == "w").then(|| self.generator())
    }

    fn format(&self, a: &FfElem) -> String {
        FiniteField::format(self, *a)
    }

    fn describe(&self) -> String {
        format!("F_{}", self.order())
    }
}

#[derive(Clone)]
enum Structure<E> {
    /// `B` is a `k`-algebra; `w` maps to the stored element.
    Residue { omega_powers: Vec<E> },
    /// `B` is built over `O/pi^N` itself.
    Lift,
}

/// A coefficient ring together with an `O`-algebra structure.
///
/// The structure is either through the residue field, or by building `B`
/// over the local ring itself, optionally restricted along a chain of
/// extensions `O -> O' -> ...`.
#[derive(Clone)]
pub struct OAlgebra<R: CoeffRing> {
    ring: R,
    spec: Arc<LocalFieldSpec>,
    top_spec: Arc<LocalFieldSpec>,
    structure: Structure<R::Elem>,
    chain: Vec<Arc<Extension>>,
}

impl<R: CoeffRing> fmt::Debug for OAlgebra<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OAlgebra({} over {:?})", self.ring.describe(), self.spec.descriptor())
    }
}

impl<R: CoeffRing> OAlgebra<R> {
    /// Structure through `O -> F_q -> B`, sending `w` to a root of the modulus in `B`.
    pub fn residue(ring: R, spec: &Arc<LocalFieldSpec>) -> Result<Self, CoeffError> {
        if !ring.is_char_p() || ring.prime() != spec.p() {
            return Err(CoeffError::Structure(format!(
                "{} is not an F_{}-algebra",
                ring.describe(),
                spec.p()
            )));
        }
        let root = ring
            .residue_root(&spec.descriptor().unram_modulus)
            .ok_or_else(|| {
                CoeffError::Structure(format!("{} does not contain F_{}", ring.describe(), spec.q()))
            })?;
        Ok(Self::residue_with(ring, spec, root))
    }

    pub fn residue_with(ring: R, spec: &Arc<LocalFieldSpec>, omega: R::Elem) -> Self {
        let mut omega_powers = vec![ring.one()];
        for _ in 1..spec.h() {
            let next = ring.mul(omega_powers.last().unwrap(), &omega).expect("field elements");
            omega_powers.push(next);
        }
        OAlgebra {
            ring,
            spec: spec.clone(),
            top_spec: spec.clone(),
            structure: Structure::Residue { omega_powers },
            chain: Vec::new(),
        }
    }

    /// Structure for a ring built over `O/pi^N`.
    pub fn lift(ring: R, spec: &Arc<LocalFieldSpec>) -> Result<Self, CoeffError> {
        let one = LocalElem::one(spec, spec.max_precision());
        if ring.from_local(&one).is_none() {
            return Err(CoeffError::Structure(format!(
                "{} is not built over this local ring",
                ring.describe()
            )));
        }
        Ok(OAlgebra {
            ring,
            spec: spec.clone(),
            top_spec: spec.clone(),
            structure: Structure::Lift,
            chain: Vec::new(),
        })
    }

    /// Characteristic-`p` rings get the residue structure, rings over `O` the lift structure.
    pub fn natural(ring: R, spec: &Arc<LocalFieldSpec>) -> Result<Self, CoeffError> {
        if ring.lift_precision().is_some() {
            Self::lift(ring, spec)
        } else {
            Self::residue(ring, spec)
        }
    }

    /// The same ring viewed as an algebra over the base of `ext`.
    pub fn restrict(&self, ext: &Arc<Extension>) -> Result<Self, CoeffError> {
        if **ext.top() != *self.spec {
            return Err(CoeffError::Structure("extension does not end at this ring".into()));
        }
        let mut chain = vec![ext.clone()];
        chain.extend(self.chain.iter().cloned());
        Ok(OAlgebra {
            ring: self.ring.clone(),
            spec: ext.base().clone(),
            top_spec: self.top_spec.clone(),
            structure: self.structure.clone(),
            chain,
        })
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn spec(&self) -> &Arc<LocalFieldSpec> {
        &self.spec
    }

    pub fn is_residue(&self) -> bool {
        matches!(self.structure, Structure::Residue { .. })
    }

    /// Image of a residue class of the innermost ring's residue field.
    fn map_top_residue(&self, b: FfElem) -> R::Elem {
        let Structure::Residue { omega_powers } = &self.structure else {
            unreachable!("residue map requested for a lift structure")
        };
        let digits = self.top_spec.residue_field().coeffs(b);
        let mut acc = self.ring.zero();
        for (d, w) in digits.iter().zip(omega_powers) {
            if *d != 0 {
                let t = self.ring.mul(w, &self.ring.from_int(*d as i64)).expect("residue map");
                acc = self.ring.add(&acc, &t);
            }
        }
        acc
    }

    /// The structure map `O -> B`.
    pub fn map_local(&self, x: &LocalElem) -> R::Elem {
        let mut y = x.clone();
        for ext in &self.chain {
            y = ext.map(&y);
        }
        match self.structure {
            Structure::Residue { .. } => self.map_top_residue(y.residue()),
            Structure::Lift => self.ring.from_local(&y).expect("lift structure"),
        }
    }

    /// `F_q -> B` for the residue field of this algebra's local ring.
    pub fn map_residue(&self, b: FfElem) -> R::Elem {
        let lift = LocalElem::from_coords(&self.spec, self.spec.lift_residue(b), 1);
        self.map_local(&lift)
    }

    /// Precision of coefficients in this algebra's local ring needed for [`Self::map_local`].
    pub fn required_precision(&self) -> u32 {
        let mut need = match self.structure {
            Structure::Residue { .. } => 1,
            Structure::Lift => self.ring.lift_precision().unwrap_or(1),
        };
        for ext in self.chain.iter().rev() {
            need = need.div_ceil(ext.ramification() as u32);
        }
        need
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_ring::SpecDescriptor;

    #[test]
    fn semiperfect_levels() {
        let f4 = make_instance(&"F4".parse().unwrap(), None).unwrap();
        let dual = make_instance(&"F2[x]/(x^2)".parse().unwrap(), None).unwrap();
        let prod = make_instance(&"F2*F4".parse().unwrap(), None).unwrap();
        for n in 1..4 {
            assert!(crate::with_ring!(&f4, r => semiperfect_level(r, 2, n)).unwrap());
            assert!(crate::with_ring!(&prod, r => semiperfect_level(r, 2, n)).unwrap());
        }
        assert!(!crate::with_ring!(&dual, r => semiperfect_level(r, 2, 2)).unwrap());
        assert!(crate::with_ring!(&dual, r => semiperfect_level(r, 2, 1)).unwrap());
    }

    #[test]
    fn residue_structure_over_f4() {
        let spec = LocalFieldSpec::unramified(2, 2, 4).unwrap();
        let k = FiniteField::with_degree(2, 2).unwrap();
        let alg = OAlgebra::residue(k.clone(), &spec).unwrap();
        let w = LocalElem::omega(&spec, 4);
        let img = alg.map_local(&w);
        assert_eq!(k.add(k.mul(img, img), k.add(img, k.one())), k.zero());
        let f2 = FiniteField::prime_field(2).unwrap();
        assert!(OAlgebra::residue(f2, &spec).is_err());
    }

    #[test]
    fn structure_map_is_a_homomorphism() {
        let spec = LocalFieldSpec::new(SpecDescriptor::pure_root(2, 2, 2, 6).unwrap()).unwrap();
        let ring = MPolyRing::with_monomial_ideal(
            FiniteField::with_degree(2, 2).unwrap(),
            vec!["x".into()],
            vec![Monomial(smallvec::smallvec![2])],
        );
        let alg = OAlgebra::residue(ring.clone(), &spec).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
        for _ in 0..50 {
            let a = LocalElem::from_signed(&spec, &[rng.gen_range(-9..9), rng.gen_range(-9..9), 1, 3], 6);
            let b = LocalElem::from_signed(&spec, &[rng.gen_range(-9..9), 5, rng.gen_range(-9..9), 0], 6);
            let lhs = alg.map_local(&a.mul(&b));
            let rhs = ring.mul(&alg.map_local(&a), &alg.map_local(&b)).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(alg.map_local(&a.add(&b)), ring.add(&alg.map_local(&a), &alg.map_local(&b)));
        }
    }
}
