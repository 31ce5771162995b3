//! A family with coefficients pushed into a coefficient algebra.

use smallvec::SmallVec;

use super::family::{Layout, PolyFamily};
use crate::coeff_ring::{CoeffError, CoeffRing, OAlgebra};
use crate::local_ring::LocalElem;

struct Term<E> {
    coeff: E,
    /// `(slot, var)` pairs; `slot` indexes the power table.
    factors: SmallVec<[(u32, u32); 4]>,
}

/// Structure polynomials ready to evaluate in a fixed algebra. Terms whose
/// coefficients vanish in the algebra are dropped, so the footprint reflects
/// what the algebra actually sees.
pub struct EvalFamily<R: CoeffRing> {
    layout: Layout,
    polys: Vec<Vec<Term<R::Elem>>>,
    /// `(var, exponent)` for each power slot.
    slots: Vec<(u32, u32)>,
    footprint: Vec<usize>,
}

impl<R: CoeffRing> EvalFamily<R> {
    pub fn new(fam: &PolyFamily, alg: &OAlgebra<R>) -> Self {
        let lay = fam.layout();
        let spec = fam.source().coeff_spec();
        let mut slot_index = std::collections::HashMap::new();
        let mut slots = Vec::new();
        let mut polys = Vec::with_capacity(fam.len());
        let mut footprint = Vec::with_capacity(fam.len());
        let mut reach = 0usize;
        for (m, p) in fam.polys().iter().enumerate() {
            let prec = fam.precision(m);
            let mut terms = Vec::new();
            for (mono, c) in &p.terms {
                let coeff = alg.map_local(&LocalElem::from_coords(spec, c.clone(), prec));
                if alg.ring().is_zero(&coeff) {
                    continue;
                }
                let mut factors = SmallVec::new();
                for (v, &e) in mono.exps().iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    reach = reach.max(lay.split(v).1 + 1);
                    let next = slots.len() as u32;
                    let slot = *slot_index.entry((v as u32, e)).or_insert_with(|| {
                        slots.push((v as u32, e));
                        next
                    });
                    factors.push((slot, v as u32));
                }
                terms.push(Term { coeff, factors });
            }
            polys.push(terms);
            footprint.push(reach);
        }
        EvalFamily {
            layout: lay,
            polys,
            slots,
            footprint,
        }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Coordinates per block read by outputs `0..=m`.
    pub fn footprint(&self, m: usize) -> usize {
        self.footprint[m]
    }

    /// Largest output length computable from `avail` coordinates per block.
    pub fn max_output(&self, avail: usize) -> usize {
        self.footprint.iter().take_while(|&&f| f <= avail).count()
    }

    /// Evaluates outputs `0..out` at `blocks`; missing coordinates must lie
    /// outside the footprint.
    pub fn eval(&self, ring: &R, blocks: &[&[R::Elem]], out: usize) -> Result<Vec<R::Elem>, CoeffError> {
        assert_eq!(blocks.len(), self.layout.blocks, "block count");
        let zero = ring.zero();
        let value = |v: u32| -> &R::Elem {
            let (b, c) = self.layout.split(v as usize);
            blocks[b].get(c).unwrap_or(&zero)
        };
        let mut powers: Vec<Option<R::Elem>> = vec![None; self.slots.len()];
        let mut result = Vec::with_capacity(out);
        for terms in &self.polys[..out] {
            let mut acc = ring.zero();
            'term: for t in terms {
                for &(_, v) in &t.factors {
                    if ring.is_zero(value(v)) {
                        continue 'term;
                    }
                }
                let mut prod = t.coeff.clone();
                for &(slot, _) in &t.factors {
                    let s = slot as usize;
                    if powers[s].is_none() {
                        let (v, e) = self.slots[s];
                        powers[s] = Some(ring.pow(value(v), e as u64)?);
                    }
                    prod = ring.mul(&prod, powers[s].as_ref().unwrap())?;
                }
                acc = ring.add(&acc, &prod);
            }
            result.push(acc);
        }
        Ok(result)
    }
}
