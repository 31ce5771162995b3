//! Truncated arithmetic in `O = W(F_q)[pi]/(f)` for an Eisenstein polynomial `f`.
//!
//! An element is stored in the `Z_p`-basis `w^i pi^j` (`0 <= i < h`,
//! `0 <= j < e`) at index `j*h + i`, where `w` is the chosen root of the
//! unramified modulus. Arithmetic is carried out modulo `p^M` in every slot
//! (that quotient is `O/pi^{eM}`), and values are brought into canonical form
//! for a precision `N` by reducing slot `j` modulo `p^ceil((N-j)/e)`.

pub mod embedding;
pub mod finite_field;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smallvec::SmallVec;
use thiserror::Error;

pub use embedding::{EmbeddingDescriptor, Extension, ExtensionDescriptor};
pub use finite_field::{FfElem, FieldError, FiniteField};

/// Coordinates of an element of `O` in the `w^i pi^j` basis.
pub type Coords = SmallVec<[u64; 4]>;

/// Working moduli stay below this bound so products fit in a `u64`.
const WORD_BOUND: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("invalid local field description: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("element is not a unit")]
    NotUnit,
    #[error("not divisible: valuation {found} is below {needed}")]
    InsufficientValuation { needed: u32, found: u32 },
    #[error("precision {precision} is not enough for the requested operation (needs more than {requested})")]
    InsufficientPrecision { requested: u32, precision: u32 },
    #[error("precision {requested} exceeds the supported maximum {max}")]
    PrecisionTooLarge { requested: u32, max: u32 },
    #[error("elements belong to different local rings")]
    SpecMismatch,
    #[error("element does not lie in the unramified subring")]
    NotUnramified,
}

/// Serialized description of a local ring.
///
/// `unram_modulus` is a monic polynomial of degree `h` (lowest degree first)
/// whose reduction mod `p` is irreducible. `eisenstein[t]` holds the `h`
/// coordinates of the coefficient of `T^t` in the `w`-basis, for
/// `t = 0..=e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDescriptor {
    pub p: u64,
    pub h: usize,
    pub e: usize,
    pub unram_modulus: Vec<i64>,
    pub eisenstein: Vec<Vec<i64>>,
    pub precision: u32,
}

impl SpecDescriptor {
    /// `Z_p` with uniformizer `p`.
    pub fn zp(p: u64, precision: u32) -> Self {
        SpecDescriptor {
            p,
            h: 1,
            e: 1,
            unram_modulus: vec![0, 1],
            eisenstein: vec![vec![-(p as i64)], vec![1]],
            precision,
        }
    }

    /// `W(F_{p^h})` with uniformizer `p` and the default residue modulus.
    pub fn unramified(p: u64, h: usize, precision: u32) -> Result<Self, LocalError> {
        let unram_modulus = finite_field::default_modulus(p, h)?;
        let mut a0 = vec![0; h];
        a0[0] = -(p as i64);
        let mut lead = vec![0; h];
        lead[0] = 1;
        Ok(SpecDescriptor {
            p,
            h,
            e: 1,
            unram_modulus,
            eisenstein: vec![a0, lead],
            precision,
        })
    }

    /// `W(F_{p^h})[pi]/(pi^e - p)`.
    pub fn pure_root(p: u64, h: usize, e: usize, precision: u32) -> Result<Self, LocalError> {
        let mut d = Self::unramified(p, h, precision)?;
        d.e = e;
        let mut eis = vec![vec![0; h]; e + 1];
        eis[0][0] = -(p as i64);
        eis[e][0] = 1;
        d.eisenstein = eis;
        Ok(d)
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// A validated local ring together with its multiplication tables.
pub struct LocalFieldSpec {
    desc: SpecDescriptor,
    p: u64,
    h: usize,
    e: usize,
    q: u64,
    residue: FiniteField,
    word_exp: u32,
    word_mod: u64,
    p_pows: Vec<u64>,
    max_precision: u32,
    table: Vec<u64>,
    unram_poly: Vec<u64>,
    p_over_pi: Coords,
}

impl fmt::Debug for LocalFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalFieldSpec({})", self.desc.canonical_json())
    }
}

impl PartialEq for LocalFieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
    }
}

impl Eq for LocalFieldSpec {}

fn invalid(msg: impl Into<String>) -> LocalError {
    LocalError::InvalidSpec(msg.into())
}

fn modp(c: i64, m: u64) -> u64 {
    c.rem_euclid(m as i64) as u64
}

impl LocalFieldSpec {
    pub fn new(desc: SpecDescriptor) -> Result<Arc<Self>, LocalError> {
        let SpecDescriptor { p, h, e, .. } = desc;
        if !finite_field::is_prime(p) {
            return Err(invalid(format!("p = {p} is not prime")));
        }
        if h == 0 || e == 0 {
            return Err(invalid("h and e must be positive"));
        }
        if desc.unram_modulus.len() != h + 1 || desc.unram_modulus[h] != 1 {
            return Err(invalid(format!("unram_modulus must be monic of degree {h}")));
        }
        let residue = FiniteField::new(p, &desc.unram_modulus).map_err(|err| match err {
            FieldError::Reducible(_) => invalid("unram_modulus is reducible modulo p"),
            other => LocalError::Field(other),
        })?;
        if desc.eisenstein.len() != e + 1 {
            return Err(invalid(format!(
                "eisenstein must list {} coefficients, found {}",
                e + 1,
                desc.eisenstein.len()
            )));
        }
        if desc.eisenstein.iter().any(|c| c.len() != h) {
            return Err(invalid(format!("each eisenstein coefficient needs {h} entries")));
        }
        let lead = &desc.eisenstein[e];
        if lead[0] != 1 || lead[1..].iter().any(|&c| c != 0) {
            return Err(invalid("eisenstein polynomial must be monic"));
        }
        let pi = p as i64;
        for (t, c) in desc.eisenstein[..e].iter().enumerate() {
            if c.iter().any(|&x| x % pi != 0) {
                return Err(invalid(format!("coefficient of T^{t} is not divisible by p")));
            }
        }
        if desc.eisenstein[0].iter().all(|&x| x % (pi * pi) == 0) {
            return Err(invalid("constant coefficient must have p-adic valuation exactly 1"));
        }
        let q = p.pow(h as u32);

        let mut word_exp = 1u32;
        while p.pow(word_exp + 1) < WORD_BOUND {
            word_exp += 1;
        }
        let word_mod = p.pow(word_exp);
        let p_pows: Vec<u64> = (0..=word_exp).map(|k| p.pow(k)).collect();
        let max_precision = e as u32 * (word_exp - 1);
        if desc.precision == 0 || desc.precision > max_precision {
            return Err(LocalError::PrecisionTooLarge {
                requested: desc.precision,
                max: max_precision,
            });
        }

        let unram_poly: Vec<u64> = desc.unram_modulus.iter().map(|&c| modp(c, word_mod)).collect();
        let eis: Vec<Vec<u64>> = desc
            .eisenstein
            .iter()
            .map(|c| c.iter().map(|&x| modp(x, word_mod)).collect())
            .collect();

        let mut spec = LocalFieldSpec {
            desc,
            p,
            h,
            e,
            q,
            residue,
            word_exp,
            word_mod,
            p_pows,
            max_precision,
            table: Vec::new(),
            unram_poly,
            p_over_pi: Coords::new(),
        };
        spec.table = spec.build_table(&eis);

        // p = -pi (pi^{e-1} + a_{e-1} pi^{e-2} + ... + a_1) / u with a_0 = p u.
        let u: Vec<i64> = spec.desc.eisenstein[0].iter().map(|&x| x / pi).collect();
        let mut u_coords = spec.zero_coords();
        for (i, &c) in u.iter().enumerate() {
            u_coords[i] = modp(c, word_mod);
        }
        let u_inv = spec.raw_inverse(&u_coords).ok_or(LocalError::NotUnit)?;
        let mut s = spec.zero_coords();
        for j in 1..e {
            for i in 0..h {
                s[(j - 1) * h + i] = eis[j][i];
            }
        }
        for i in 0..h {
            let idx = (e - 1) * h + i;
            s[idx] = (s[idx] + if i == 0 { 1 } else { 0 }) % word_mod;
        }
        spec.p_over_pi = spec.raw_neg(&spec.raw_mul(&s, &u_inv));
        Ok(Arc::new(spec))
    }

    pub fn from_json(text: &str) -> Result<Arc<Self>, LocalError> {
        let desc: SpecDescriptor =
            serde_json::from_str(text).map_err(|e| invalid(format!("malformed JSON: {e}")))?;
        Self::new(desc)
    }

    pub fn zp(p: u64, precision: u32) -> Result<Arc<Self>, LocalError> {
        Self::new(SpecDescriptor::zp(p, precision))
    }

    pub fn unramified(p: u64, h: usize, precision: u32) -> Result<Arc<Self>, LocalError> {
        Self::new(SpecDescriptor::unramified(p, h, precision)?)
    }

    pub fn descriptor(&self) -> &SpecDescriptor {
        &self.desc
    }

    pub fn fingerprint(&self) -> String {
        self.desc.fingerprint()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn e(&self) -> usize {
        self.e
    }

    /// Residue field size.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Rank of `O` over `Z_p`.
    pub fn dim(&self) -> usize {
        self.h * self.e
    }

    pub fn default_precision(&self) -> u32 {
        self.desc.precision
    }

    pub fn max_precision(&self) -> u32 {
        self.max_precision
    }

    pub fn residue_field(&self) -> &FiniteField {
        &self.residue
    }

    pub fn zero_coords(&self) -> Coords {
        SmallVec::from_elem(0, self.dim())
    }

    pub fn one_coords(&self) -> Coords {
        let mut c = self.zero_coords();
        c[0] = 1;
        c
    }

    /// Exponent `k` such that slot `j` is reduced modulo `p^k` at precision `n`.
    pub fn slot_exponent(&self, n: u32, j: usize) -> u32 {
        let j = j as u32;
        if n <= j {
            0
        } else {
            (n - j).div_ceil(self.e as u32)
        }
    }

    pub fn canonical(&self, c: &Coords, n: u32) -> Coords {
        let mut out = c.clone();
        self.canonicalize(&mut out, n);
        out
    }

    pub fn canonicalize(&self, c: &mut Coords, n: u32) {
        for j in 0..self.e {
            let m = self.p_pows[self.slot_exponent(n, j) as usize];
            for v in &mut c[j * self.h..(j + 1) * self.h] {
                *v %= m;
            }
        }
    }

    pub fn is_zero_at(&self, c: &Coords, n: u32) -> bool {
        (0..self.e).all(|j| {
            let m = self.p_pows[self.slot_exponent(n, j) as usize];
            c[j * self.h..(j + 1) * self.h].iter().all(|&v| v % m == 0)
        })
    }

    /// `pi`-adic valuation at precision `n`, `None` when the value is zero there.
    pub fn valuation_at(&self, c: &Coords, n: u32) -> Option<u32> {
        let mut best: Option<u32> = None;
        for j in 0..self.e {
            let m = self.p_pows[self.slot_exponent(n, j) as usize];
            for &v in &c[j * self.h..(j + 1) * self.h] {
                let v = v % m;
                if v == 0 {
                    continue;
                }
                let mut k = 0u32;
                let mut x = v;
                while x % self.p == 0 {
                    x /= self.p;
                    k += 1;
                }
                let val = self.e as u32 * k + j as u32;
                best = Some(best.map_or(val, |b| b.min(val)));
            }
        }
        best
    }

    pub fn raw_from_int(&self, n: i64) -> Coords {
        let mut c = self.zero_coords();
        c[0] = modp(n, self.word_mod);
        c
    }

    pub fn raw_from_signed(&self, coords: &[i64]) -> Coords {
        let mut c = self.zero_coords();
        for (slot, &v) in c.iter_mut().zip(coords) {
            *slot = modp(v, self.word_mod);
        }
        c
    }

    pub fn raw_add(&self, a: &Coords, b: &Coords) -> Coords {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.word_mod).collect()
    }

    pub fn raw_neg(&self, a: &Coords) -> Coords {
        a.iter().map(|&x| (self.word_mod - x % self.word_mod) % self.word_mod).collect()
    }

    pub fn raw_sub(&self, a: &Coords, b: &Coords) -> Coords {
        self.raw_add(a, &self.raw_neg(b))
    }

    pub fn raw_scale(&self, a: &Coords, k: u64) -> Coords {
        let k = k % self.word_mod;
        a.iter().map(|&x| (x * k) % self.word_mod).collect()
    }

    pub fn raw_mul(&self, a: &Coords, b: &Coords) -> Coords {
        let d = self.dim();
        let m = self.word_mod;
        if d == 1 {
            return SmallVec::from_elem((a[0] * b[0]) % m, 1);
        }
        let mut out = self.zero_coords();
        for (ia, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (ib, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let t = (x * y) % m;
                let row = &self.table[(ia * d + ib) * d..(ia * d + ib + 1) * d];
                for (o, &s) in out.iter_mut().zip(row) {
                    if s != 0 {
                        *o = (*o + t * s) % m;
                    }
                }
            }
        }
        out
    }

    pub fn raw_pow(&self, a: &Coords, mut k: u64) -> Coords {
        let mut base = a.clone();
        let mut acc = self.one_coords();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.raw_mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.raw_mul(&base, &base);
            }
        }
        acc
    }

    /// Residue class in `F_q`.
    pub fn residue(&self, c: &Coords) -> FfElem {
        let digits: Vec<i64> = c[..self.h].iter().map(|&v| (v % self.p) as i64).collect();
        self.residue.from_coeffs(&digits)
    }

    /// Any lift of a residue class, with coordinates in `0..p`.
    pub fn lift_residue(&self, b: FfElem) -> Coords {
        let mut c = self.zero_coords();
        for (slot, d) in c.iter_mut().zip(self.residue.coeffs(b)) {
            *slot = d;
        }
        c
    }

    /// Inverse modulo `p^M` by Newton iteration, `None` for non-units.
    pub fn raw_inverse(&self, a: &Coords) -> Option<Coords> {
        let r = self.residue(a);
        let r_inv = self.residue.inv(r)?;
        let mut y = self.lift_residue(r_inv);
        let two = self.raw_from_int(2);
        let one = self.one_coords();
        for _ in 0..64 {
            let ay = self.raw_mul(a, &y);
            if ay == one {
                return Some(y);
            }
            y = self.raw_mul(&y, &self.raw_sub(&two, &ay));
        }
        unreachable!("Newton iteration for a unit converges")
    }

    /// Teichmuller representative of a residue class, modulo `p^M`.
    pub fn raw_teichmuller(&self, b: FfElem) -> Coords {
        let mut x = self.lift_residue(b);
        for _ in 0..=self.word_exp {
            let next = self.raw_pow(&x, self.q);
            if next == x {
                break;
            }
            x = next;
        }
        x
    }

    /// Divides by `pi` once; requires the slot-0 coordinates to be divisible by `p`.
    fn div_pi_once(&self, c: &Coords, n: u32) -> Result<Coords, LocalError> {
        let h = self.h;
        let mut c0 = self.zero_coords();
        for i in 0..h {
            if c[i] % self.p != 0 {
                return Err(LocalError::InsufficientValuation {
                    needed: 1,
                    found: 0,
                });
            }
            c0[i] = c[i] / self.p;
        }
        let mut out = self.raw_mul(&c0, &self.p_over_pi);
        for idx in h..self.dim() {
            out[idx - h] = (out[idx - h] + c[idx]) % self.word_mod;
        }
        self.canonicalize(&mut out, n - 1);
        Ok(out)
    }

    /// `c / pi^k` for `c` known at precision `n`; the result is known at `n - k`.
    pub fn div_pi_power(&self, c: &Coords, n: u32, k: u32) -> Result<Coords, LocalError> {
        if k == 0 {
            return Ok(self.canonical(c, n));
        }
        if k >= n {
            return Err(LocalError::InsufficientPrecision {
                requested: k,
                precision: n,
            });
        }
        let mut cur = self.canonical(c, n);
        for step in 0..k {
            cur = self.div_pi_once(&cur, n - step).map_err(|_| {
                LocalError::InsufficientValuation {
                    needed: k,
                    found: self.valuation_at(c, n).unwrap_or(n),
                }
            })?;
        }
        Ok(cur)
    }

    /// Symmetric integer coordinates at precision `n`.
    pub fn signed_coords(&self, c: &Coords, n: u32) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..self.e {
            let m = self.p_pows[self.slot_exponent(n, j) as usize];
            for &v in &c[j * self.h..(j + 1) * self.h] {
                let v = v % m;
                out.push(if v > m / 2 { v as i64 - m as i64 } else { v as i64 });
            }
        }
        out
    }

    pub fn format_coords(&self, c: &Coords, n: u32) -> String {
        let signed = self.signed_coords(c, n);
        let mut s = String::new();
        for (idx, &v) in signed.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (i, j) = (idx % self.h, idx / self.h);
            let mut factors = Vec::new();
            match i {
                0 => {}
                1 => factors.push("w".to_string()),
                _ => factors.push(format!("w^{i}")),
            }
            match j {
                0 => {}
                1 => factors.push("pi".to_string()),
                _ => factors.push(format!("pi^{j}")),
            }
            let mag = v.unsigned_abs();
            let body = if factors.is_empty() {
                mag.to_string()
            } else if mag == 1 {
                factors.join("*")
            } else {
                format!("{mag}*{}", factors.join("*"))
            };
            if s.is_empty() {
                if v < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(if v < 0 { " - " } else { " + " });
            }
            s.push_str(&body);
        }
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    }

    fn wk_reduce(&self, mut a: Vec<u64>) -> Vec<u64> {
        let h = self.h;
        let m = self.word_mod;
        while a.len() > h {
            let lead = a.pop().unwrap();
            if lead == 0 {
                continue;
            }
            let shift = a.len() - h;
            for i in 0..h {
                let t = (lead * self.unram_poly[i]) % m;
                a[shift + i] = (a[shift + i] + m - t) % m;
            }
        }
        a.resize(h, 0);
        a
    }

    fn wk_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let m = self.word_mod;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + (x * y) % m) % m;
            }
        }
        self.wk_reduce(out)
    }

    /// Structure constants for the basis `w^i pi^j`.
    fn build_table(&self, eis: &[Vec<u64>]) -> Vec<u64> {
        let (h, e, d) = (self.h, self.e, self.dim());
        let m = self.word_mod;
        let mut table = vec![0u64; d * d * d];
        for a in 0..d {
            for b in 0..d {
                let (ia, ja) = (a % h, a / h);
                let (ib, jb) = (b % h, b / h);
                let mut w = vec![0u64; ia + ib + 1];
                w[ia + ib] = 1;
                let w = self.wk_reduce(w);
                // Polynomial in pi with W(k) coefficients.
                let mut poly = vec![vec![0u64; h]; ja + jb + 1];
                poly[ja + jb] = w;
                for deg in (e..poly.len()).rev() {
                    let lead = std::mem::replace(&mut poly[deg], vec![0u64; h]);
                    if lead.iter().all(|&x| x == 0) {
                        continue;
                    }
                    for (t, coeff) in eis.iter().take(e).enumerate() {
                        let prod = self.wk_mul(&lead, coeff);
                        let target = &mut poly[deg - e + t];
                        for i in 0..h {
                            target[i] = (target[i] + m - prod[i]) % m;
                        }
                    }
                }
                for (j, coeff) in poly.iter().enumerate().take(e) {
                    for i in 0..h {
                        table[(a * d + b) * d + j * h + i] = coeff[i];
                    }
                }
            }
        }
        table
    }
}

/// An element of `O/pi^N`.
#[derive(Clone)]
pub struct LocalElem {
    spec: Arc<LocalFieldSpec>,
    coords: Coords,
    prec: u32,
}

impl fmt::Debug for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod pi^{})", self, self.prec)
    }
}

impl fmt::Display for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec.format_coords(&self.coords, self.prec))
    }
}

/// Equality after reducing both sides to the smaller precision.
impl PartialEq for LocalElem {
    fn eq(&self, other: &Self) -> bool {
        if !Arc::ptr_eq(&self.spec, &other.spec) && *self.spec != *other.spec {
            return false;
        }
        let n = self.prec.min(other.prec);
        let d = self.spec.raw_sub(&self.coords, &other.coords);
        self.spec.is_zero_at(&d, n)
    }
}

impl LocalElem {
    pub fn from_coords(spec: &Arc<LocalFieldSpec>, coords: Coords, prec: u32) -> Self {
        let prec = prec.min(spec.max_precision);
        let coords = spec.canonical(&coords, prec);
        LocalElem {
            spec: spec.clone(),
            coords,
            prec,
        }
    }

    pub fn from_signed(spec: &Arc<LocalFieldSpec>, coords: &[i64], prec: u32) -> Self {
        Self::from_coords(spec, spec.raw_from_signed(coords), prec)
    }

    pub fn from_int(spec: &Arc<LocalFieldSpec>, n: i64, prec: u32) -> Self {
        Self::from_coords(spec, spec.raw_from_int(n), prec)
    }

    pub fn zero(spec: &Arc<LocalFieldSpec>, prec: u32) -> Self {
        Self::from_int(spec, 0, prec)
    }

    pub fn one(spec: &Arc<LocalFieldSpec>, prec: u32) -> Self {
        Self::from_int(spec, 1, prec)
    }

    pub fn uniformizer(spec: &Arc<LocalFieldSpec>, prec: u32) -> Self {
        let mut c = spec.zero_coords();
        if spec.e > 1 {
            c[spec.h] = 1;
        } else {
            // pi = -a_0 when e = 1
            return Self::from_signed(
                spec,
                &spec.desc.eisenstein[0].iter().map(|&x| -x).collect::<Vec<_>>(),
                prec,
            );
        }
        Self::from_coords(spec, c, prec)
    }

    /// The chosen root `w` of the unramified modulus.
    pub fn omega(spec: &Arc<LocalFieldSpec>, prec: u32) -> Self {
        let mut c = spec.zero_coords();
        if spec.h > 1 {
            c[1] = 1;
        } else {
            c[0] = modp(-spec.desc.unram_modulus[0], spec.word_mod);
        }
        Self::from_coords(spec, c, prec)
    }

    pub fn teichmuller(spec: &Arc<LocalFieldSpec>, b: FfElem, prec: u32) -> Self {
        Self::from_coords(spec, spec.raw_teichmuller(b), prec)
    }

    pub fn spec(&self) -> &Arc<LocalFieldSpec> {
        &self.spec
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn signed_coords(&self) -> Vec<i64> {
        self.spec.signed_coords(&self.coords, self.prec)
    }

    /// Reduces to a lower precision.
    pub fn with_precision(&self, prec: u32) -> Self {
        Self::from_coords(&self.spec, self.coords.clone(), prec.min(self.prec))
    }

    /// Reinterprets the canonical representative at a higher precision.
    pub fn lift_to(&self, prec: u32) -> Self {
        LocalElem {
            spec: self.spec.clone(),
            coords: self.coords.clone(),
            prec: prec.min(self.spec.max_precision),
        }
    }

    fn check(&self, other: &Self) -> Result<(), LocalError> {
        if Arc::ptr_eq(&self.spec, &other.spec) || *self.spec == *other.spec {
            Ok(())
        } else {
            Err(LocalError::SpecMismatch)
        }
    }

    fn binary(&self, other: &Self, c: Coords) -> Self {
        Self::from_coords(&self.spec, c, self.prec.min(other.prec))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other).expect("same local ring");
        self.binary(other, self.spec.raw_add(&self.coords, &other.coords))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other).expect("same local ring");
        self.binary(other, self.spec.raw_sub(&self.coords, &other.coords))
    }

    pub fn neg(&self) -> Self {
        Self::from_coords(&self.spec, self.spec.raw_neg(&self.coords), self.prec)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other).expect("same local ring");
        self.binary(other, self.spec.raw_mul(&self.coords, &other.coords))
    }

    pub fn pow(&self, k: u64) -> Self {
        Self::from_coords(&self.spec, self.spec.raw_pow(&self.coords, k), self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.spec.is_zero_at(&self.coords, self.prec)
    }

    /// `None` when the element vanishes at its precision.
    pub fn valuation(&self) -> Option<u32> {
        self.spec.valuation_at(&self.coords, self.prec)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    pub fn residue(&self) -> FfElem {
        self.spec.residue(&self.coords)
    }

    pub fn inverse(&self) -> Result<Self, LocalError> {
        if self.prec == 0 {
            return Err(LocalError::InsufficientPrecision {
                requested: 0,
                precision: 0,
            });
        }
        let inv = self.spec.raw_inverse(&self.coords).ok_or(LocalError::NotUnit)?;
        Ok(Self::from_coords(&self.spec, inv, self.prec))
    }

    pub fn div_pi_power(&self, k: u32) -> Result<Self, LocalError> {
        let c = self.spec.div_pi_power(&self.coords, self.prec, k)?;
        Ok(LocalElem {
            spec: self.spec.clone(),
            coords: c,
            prec: self.prec - k,
        })
    }

    /// Witt coordinates `(c_0, .., c_{m-1})` over `F_q` of an element of the
    /// unramified subring, where `x = sum_j [t_j] p^j` and `c_j = t_j^{p^j}`.
    pub fn unram_to_witt_coords(&self, m: usize) -> Result<Vec<FfElem>, LocalError> {
        let spec = &self.spec;
        let needed = (m.saturating_sub(1) * spec.e + 1) as u32;
        if self.prec < needed {
            return Err(LocalError::InsufficientPrecision {
                requested: needed,
                precision: self.prec,
            });
        }
        if self.coords[spec.h..].iter().any(|&c| c != 0) {
            return Err(LocalError::NotUnramified);
        }
        let k = &spec.residue;
        let mut x = self.coords.clone();
        let mut out = Vec::with_capacity(m);
        for j in 0..m {
            let t = spec.residue(&x);
            out.push(k.frobenius_pow(t, j as u32));
            x = spec.raw_sub(&x, &spec.raw_teichmuller(t));
            for v in &mut x[..spec.h] {
                debug_assert_eq!(*v % spec.p, 0);
                *v /= spec.p;
            }
        }
        Ok(out)
    }

    /// Inverse of [`Self::unram_to_witt_coords`]; the result is known modulo `p^m`.
    pub fn from_witt_coords(spec: &Arc<LocalFieldSpec>, coords: &[FfElem]) -> Self {
        let k = &spec.residue;
        let mut acc = spec.zero_coords();
        let mut p_pow = spec.one_coords();
        for (j, &c) in coords.iter().enumerate() {
            let mut t = c;
            for _ in 0..j {
                t = k.p_root(t);
            }
            acc = spec.raw_add(&acc, &spec.raw_mul(&spec.raw_teichmuller(t), &p_pow));
            p_pow = spec.raw_scale(&p_pow, spec.p);
        }
        let prec = (coords.len() * spec.e) as u32;
        Self::from_coords(spec, acc, prec.max(1))
    }

    /// Exact division; fails when `other` does not divide `self`.
    pub fn exact_div(&self, other: &Self) -> Result<Self, LocalError> {
        self.check(other)?;
        let v = other.valuation().ok_or(LocalError::InsufficientPrecision {
            requested: other.prec,
            precision: other.prec,
        })?;
        if v >= self.prec {
            return Err(LocalError::InsufficientPrecision {
                requested: v,
                precision: self.prec,
            });
        }
        if let Some(found) = self.valuation() {
            if found < v {
                return Err(LocalError::InsufficientValuation { needed: v, found });
            }
        }
        let num = self.div_pi_power(v)?;
        let unit = other.div_pi_power(v)?.inverse()?;
        Ok(num.mul(&unit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ram2(prec: u32) -> Arc<LocalFieldSpec> {
        LocalFieldSpec::from_json(&format!(
            r#"{{"p":2,"h":1,"e":2,"unram_modulus":[0,1],"eisenstein":[[-2],[0],[1]],"precision":{prec}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn pi_squared_is_two() {
        let o = ram2(8);
        let pi = LocalElem::uniformizer(&o, 8);
        assert_eq!(pi.mul(&pi), LocalElem::from_int(&o, 2, 8));
        let one = LocalElem::one(&o, 8);
        let a = one.add(&pi);
        let b = one.sub(&pi);
        assert_eq!(a.mul(&b), LocalElem::from_int(&o, -1, 8));
        assert_eq!(pi.valuation(), Some(1));
        assert_eq!(LocalElem::from_int(&o, 12, 8).valuation(), Some(4));
    }

    #[test]
    fn inverse_of_two_mod_powers_of_three() {
        let z3 = LocalFieldSpec::zp(3, 10).unwrap();
        let two = LocalElem::from_int(&z3, 2, 10);
        let inv = two.inverse().unwrap();
        assert_eq!(two.mul(&inv), LocalElem::one(&z3, 10));
        assert_eq!(inv.coords()[0], (3u64.pow(10) + 1) / 2);
        let o = ram2(8);
        assert_eq!(
            LocalElem::uniformizer(&o, 8).inverse().unwrap_err(),
            LocalError::NotUnit
        );
    }

    #[test]
    fn exact_division() {
        let o = ram2(8);
        let pi = LocalElem::uniformizer(&o, 8);
        let pi2 = pi.mul(&pi);
        assert_eq!(pi2.exact_div(&pi2).unwrap(), LocalElem::one(&o, 8));
        let two = LocalElem::from_int(&o, 2, 8);
        assert_eq!(two.exact_div(&pi2).unwrap(), LocalElem::one(&o, 6));
        let x = two.add(&pi);
        assert_eq!(x.exact_div(&pi).unwrap(), pi.add(&LocalElem::one(&o, 8)));
        let low = ram2(2);
        let pi_low = LocalElem::uniformizer(&low, 2);
        let err = pi_low.mul(&pi_low).exact_div(&pi_low.mul(&pi_low)).unwrap_err();
        assert!(matches!(err, LocalError::InsufficientPrecision { .. }));
        assert!(matches!(
            pi.exact_div(&pi2).unwrap_err(),
            LocalError::InsufficientValuation { .. }
        ));
    }

    #[test]
    fn teichmuller_lifts() {
        let z3 = LocalFieldSpec::zp(3, 6).unwrap();
        let t = LocalElem::teichmuller(&z3, FfElem(2), 6);
        assert_eq!(t, LocalElem::from_int(&z3, -1, 6));
        let w4 = LocalFieldSpec::unramified(2, 2, 6).unwrap();
        let k = w4.residue_field().clone();
        let t = LocalElem::teichmuller(&w4, k.generator(), 6);
        assert_eq!(t.pow(4), t);
        assert_eq!(t.residue(), k.generator());
    }

    #[test]
    fn witt_coordinates_of_small_integers() {
        let z2 = LocalFieldSpec::zp(2, 8).unwrap();
        let coords = |n: i64| LocalElem::from_int(&z2, n, 8).unram_to_witt_coords(2).unwrap();
        assert_eq!(coords(1), vec![FfElem(1), FfElem(0)]);
        assert_eq!(coords(3), vec![FfElem(1), FfElem(1)]);
        assert_eq!(coords(2), vec![FfElem(0), FfElem(1)]);
        let w4 = LocalFieldSpec::unramified(2, 2, 10).unwrap();
        for a in 0..4u32 {
            for b in 0..4u32 {
                for c in 0..4u32 {
                    let v = vec![FfElem(a), FfElem(b), FfElem(c)];
                    let x = LocalElem::from_witt_coords(&w4, &v);
                    assert_eq!(x.unram_to_witt_coords(3).unwrap(), v);
                }
            }
        }
        let o = ram2(8);
        assert_eq!(
            LocalElem::uniformizer(&o, 8).unram_to_witt_coords(2).unwrap_err(),
            LocalError::NotUnramified
        );
    }

    #[test]
    fn residues() {
        let o = ram2(8);
        let pi = LocalElem::uniformizer(&o, 8);
        assert_eq!(pi.residue(), FfElem(0));
        assert_eq!(pi.add(&LocalElem::one(&o, 8)).residue(), FfElem(1));
    }

    #[test]
    fn rejects_bad_eisenstein() {
        for bad in [
            r#"{"p":2,"h":1,"e":2,"unram_modulus":[0,1],"eisenstein":[[-4],[0],[1]],"precision":8}"#,
            r#"{"p":2,"h":1,"e":2,"unram_modulus":[0,1],"eisenstein":[[-2],[1],[1]],"precision":8}"#,
            r#"{"p":2,"h":1,"e":2,"unram_modulus":[0,1],"eisenstein":[[-2],[0],[3]],"precision":8}"#,
            r#"{"p":2,"h":1,"e":3,"unram_modulus":[0,1],"eisenstein":[[-2],[0],[1]],"precision":8}"#,
            r#"{"p":2,"h":2,"e":1,"unram_modulus":[1,0,1],"eisenstein":[[-2,0],[1,0]],"precision":8}"#,
        ] {
            assert!(LocalFieldSpec::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn p_over_pi_times_pi_is_p() {
        let o = LocalFieldSpec::from_json(
            r#"{"p":3,"h":2,"e":3,"unram_modulus":[2,2,1],"eisenstein":[[3,3],[6,0],[-3,0],[1,0]],"precision":12}"#,
        )
        .unwrap();
        let ppi = LocalElem::from_coords(&o, o.p_over_pi.clone(), 12);
        let pi = LocalElem::uniformizer(&o, 12);
        assert_eq!(ppi.mul(&pi), LocalElem::from_int(&o, 3, 12));
        let x = LocalElem::from_signed(&o, &[5, 1, 2, 0, 7, 1], 12);
        let y = x.mul(&pi.pow(4));
        assert_eq!(y.div_pi_power(4).unwrap(), x.with_precision(8));
    }
}
