//! Finite extensions `O -> O'` of local rings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{invalid, Coords, LocalElem, LocalError, LocalFieldSpec, SpecDescriptor};

/// Images of `w` and `pi` in the larger ring, written like Eisenstein
/// coefficients: one row of `h'` integers per power of the uniformizer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionDescriptor {
    pub base: SpecDescriptor,
    pub top: SpecDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingDescriptor>,
}

impl ExtensionDescriptor {
    pub fn new(base: SpecDescriptor, top: SpecDescriptor) -> Self {
        ExtensionDescriptor {
            base,
            top,
            embedding: None,
        }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }
}

/// A validated embedding of `base` into `top`.
pub struct Extension {
    desc: ExtensionDescriptor,
    base: Arc<LocalFieldSpec>,
    top: Arc<LocalFieldSpec>,
    basis_images: Vec<Coords>,
    pi_image: LocalElem,
    residue_degree: usize,
    ramification: usize,
    unit_ratio: LocalElem,
    pi_over_varpi: LocalElem,
}

impl std::fmt::Debug for Extension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Extension({})", self.desc.canonical_json())
    }
}

fn rows_to_coords(top: &LocalFieldSpec, rows: &[Vec<i64>]) -> Result<Coords, LocalError> {
    if rows.len() > top.e() || rows.iter().any(|r| r.len() > top.h()) {
        return Err(invalid("embedding image has too many coordinates"));
    }
    let mut flat = vec![0i64; top.dim()];
    for (j, row) in rows.iter().enumerate() {
        for (i, &c) in row.iter().enumerate() {
            flat[j * top.h() + i] = c;
        }
    }
    Ok(top.raw_from_signed(&flat))
}

/// Evaluates an integer polynomial at `x` in the raw arithmetic of `top`.
fn eval_int_poly(top: &LocalFieldSpec, coeffs: &[i64], x: &Coords) -> Coords {
    let mut acc = top.zero_coords();
    for &c in coeffs.iter().rev() {
        acc = top.raw_add(&top.raw_mul(&acc, x), &top.raw_from_int(c));
    }
    acc
}

impl Extension {
    pub fn new(desc: ExtensionDescriptor) -> Result<Arc<Self>, LocalError> {
        let base = LocalFieldSpec::new(desc.base.clone())?;
        let top = LocalFieldSpec::new(desc.top.clone())?;
        if base.p() != top.p() {
            return Err(invalid("base and top have different residue characteristic"));
        }
        if top.h() % base.h() != 0 {
            return Err(invalid("residue degree of base must divide that of top"));
        }
        if top.e() % base.e() != 0 {
            return Err(invalid("ramification index of base must divide that of top"));
        }
        let residue_degree = top.h() / base.h();
        let ramification = top.e() / base.e();
        let emb = desc.embedding.clone().unwrap_or(EmbeddingDescriptor {
            omega: None,
            pi: None,
        });
        let m = &base.descriptor().unram_modulus;

        let omega = match &emb.omega {
            Some(rows) => rows_to_coords(&top, rows)?,
            None if base.descriptor().unram_modulus == top.descriptor().unram_modulus => {
                LocalElem::omega(&top, top.max_precision()).coords().clone()
            }
            None => {
                let k = top.residue_field();
                let root = *k
                    .roots(m)
                    .first()
                    .ok_or_else(|| invalid("residue field of base does not embed"))?;
                hensel_root(&top, m, top.lift_residue(root))?
            }
        };

        // Images of w^i for the base unramified slice.
        let mut w_pows = vec![top.one_coords()];
        for _ in 1..base.h() {
            let next = top.raw_mul(w_pows.last().unwrap(), &omega);
            w_pows.push(next);
        }
        let map_unram = |row: &[i64]| -> Coords {
            let mut acc = top.zero_coords();
            for (i, &c) in row.iter().enumerate() {
                let scaled = top.raw_mul(&w_pows[i], &top.raw_from_int(c));
                acc = top.raw_add(&acc, &scaled);
            }
            acc
        };

        let pi = match &emb.pi {
            Some(rows) => rows_to_coords(&top, rows)?,
            None if base.e() == 1 => {
                let a0: Vec<i64> = base.descriptor().eisenstein[0].iter().map(|&x| -x).collect();
                map_unram(&a0)
            }
            None => {
                return Err(invalid(
                    "an explicit image of the uniformizer is required for a ramified base",
                ))
            }
        };

        let nmax = top.max_precision();
        if !top.is_zero_at(&eval_int_poly(&top, m, &omega), nmax) {
            return Err(invalid("image of w is not a root of the unramified modulus"));
        }
        // f(pi') with coefficients mapped through w -> w'.
        let mut f_at_pi = top.zero_coords();
        for row in base.descriptor().eisenstein.iter().rev() {
            f_at_pi = top.raw_add(&top.raw_mul(&f_at_pi, &pi), &map_unram(row));
        }
        if !top.is_zero_at(&f_at_pi, nmax) {
            return Err(invalid("image of pi is not a root of the Eisenstein polynomial"));
        }
        let pi_image = LocalElem::from_coords(&top, pi.clone(), nmax);
        if pi_image.valuation() != Some(ramification as u32) {
            return Err(invalid("image of pi has the wrong valuation"));
        }

        let mut basis_images = Vec::with_capacity(base.dim());
        let mut pi_pow = top.one_coords();
        for _ in 0..base.e() {
            for w in &w_pows {
                basis_images.push(top.raw_mul(w, &pi_pow));
            }
            pi_pow = top.raw_mul(&pi_pow, &pi);
        }

        let varpi = LocalElem::uniformizer(&top, nmax);
        let pi_over_varpi = pi_image.exact_div(&varpi)?;
        let unit_ratio = pi_image.exact_div(&varpi.pow(ramification as u64))?;
        Ok(Arc::new(Extension {
            desc,
            base,
            top,
            basis_images,
            pi_image,
            residue_degree,
            ramification,
            unit_ratio,
            pi_over_varpi,
        }))
    }

    pub fn from_json(text: &str) -> Result<Arc<Self>, LocalError> {
        let desc: ExtensionDescriptor =
            serde_json::from_str(text).map_err(|e| invalid(format!("malformed JSON: {e}")))?;
        Self::new(desc)
    }

    pub fn descriptor(&self) -> &ExtensionDescriptor {
        &self.desc
    }

    pub fn base(&self) -> &Arc<LocalFieldSpec> {
        &self.base
    }

    pub fn top(&self) -> &Arc<LocalFieldSpec> {
        &self.top
    }

    /// Residue degree `[k' : k]`.
    pub fn residue_degree(&self) -> usize {
        self.residue_degree
    }

    /// Relative ramification index.
    pub fn ramification(&self) -> usize {
        self.ramification
    }

    pub fn pi_image(&self) -> &LocalElem {
        &self.pi_image
    }

    /// The unit `pi / varpi^e` in the top ring.
    pub fn unit_ratio(&self) -> &LocalElem {
        &self.unit_ratio
    }

    pub fn pi_over_varpi(&self) -> &LocalElem {
        &self.pi_over_varpi
    }

    /// Raw image of base coordinates.
    pub fn map_raw(&self, c: &Coords) -> Coords {
        let top = &self.top;
        let mut acc = top.zero_coords();
        for (x, img) in c.iter().zip(&self.basis_images) {
            if *x != 0 {
                acc = top.raw_add(&acc, &top.raw_scale(img, *x));
            }
        }
        acc
    }

    /// Image of an element known modulo `pi^N`, known modulo `varpi^{eN}`.
    pub fn map(&self, x: &LocalElem) -> LocalElem {
        let prec = (x.precision() as usize * self.ramification).min(self.top.max_precision() as usize);
        LocalElem::from_coords(&self.top, self.map_raw(x.coords()), prec as u32)
    }
}

fn hensel_root(top: &LocalFieldSpec, m: &[i64], start: Coords) -> Result<Coords, LocalError> {
    let deriv: Vec<i64> = m.iter().enumerate().skip(1).map(|(i, &c)| c * i as i64).collect();
    let mut x = start;
    for _ in 0..64 {
        let fx = eval_int_poly(top, m, &x);
        if fx.iter().all(|&v| v == 0) {
            return Ok(x);
        }
        let d = top
            .raw_inverse(&eval_int_poly(top, &deriv, &x))
            .ok_or_else(|| invalid("unramified modulus is not separable"))?;
        x = top.raw_sub(&x, &top.raw_mul(&fx, &d));
    }
    Err(invalid("Hensel lifting did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unramified_extension_of_z2() {
        let ext = Extension::new(ExtensionDescriptor::new(
            SpecDescriptor::zp(2, 8),
            SpecDescriptor::unramified(2, 2, 8).unwrap(),
        ))
        .unwrap();
        assert_eq!(ext.residue_degree(), 2);
        assert_eq!(ext.ramification(), 1);
        let three = LocalElem::from_int(ext.base(), 3, 8);
        assert_eq!(ext.map(&three), LocalElem::from_int(ext.top(), 3, 8));
        assert_eq!(*ext.unit_ratio(), LocalElem::one(ext.top(), 8));
    }

    #[test]
    fn ramified_extension_and_unit_ratio() {
        let top = SpecDescriptor::pure_root(2, 1, 2, 8).unwrap();
        let ext = Extension::new(ExtensionDescriptor::new(SpecDescriptor::zp(2, 4), top)).unwrap();
        assert_eq!(ext.ramification(), 2);
        assert_eq!(ext.map(&LocalElem::from_int(ext.base(), 2, 4)).precision(), 8);
        assert_eq!(*ext.unit_ratio(), LocalElem::one(ext.top(), 8));
        let varpi = LocalElem::uniformizer(ext.top(), 8);
        assert_eq!(*ext.pi_over_varpi(), varpi);
    }

    #[test]
    fn wrong_images_are_rejected() {
        let mut desc = ExtensionDescriptor::new(
            SpecDescriptor::zp(2, 8),
            SpecDescriptor::pure_root(2, 1, 2, 8).unwrap(),
        );
        desc.embedding = Some(EmbeddingDescriptor {
            omega: None,
            pi: Some(vec![vec![0], vec![1]]),
        });
        assert!(Extension::new(desc).is_err());
    }

    #[test]
    fn nontrivial_unramified_embedding() {
        // W(F_4) -> W(F_16): w must land on a cube root of unity.
        let ext = Extension::new(ExtensionDescriptor::new(
            SpecDescriptor::unramified(2, 2, 6).unwrap(),
            SpecDescriptor::unramified(2, 4, 6).unwrap(),
        ))
        .unwrap();
        let w = LocalElem::omega(ext.base(), 6);
        let img = ext.map(&w);
        assert_eq!(img.pow(2).add(&img).add(&LocalElem::one(ext.top(), 6)), LocalElem::zero(ext.top(), 6));
    }
}
