//! Universal structure polynomials, solved by recursive ghost inversion.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smallvec::SmallVec;
use thiserror::Error;

use crate::coeff_ring::{CoeffRing, LocalRing, MPoly, MPolyRing, Monomial};
use crate::local_ring::{Coords, Extension, ExtensionDescriptor, LocalError, LocalFieldSpec, SpecDescriptor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("coordinate {m}: coefficient of {monomial} is not divisible by the uniformizer power")]
    Integrality { m: usize, monomial: String },
    #[error("length {n} needs solver precision above the supported maximum {max}")]
    SolverPrecision { n: usize, max: u32 },
    #[error("family kind {kind} needs {needs}")]
    WrongSource { kind: String, needs: &'static str },
    #[error("malformed family: {0}")]
    Malformed(String),
    #[error(transparent)]
    Local(#[from] LocalError),
}

/// Which structure the polynomials describe.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    Sum,
    Prod,
    Neg,
    /// Multiplication by the element with these signed coordinates.
    Scalar { lambda: Vec<i64> },
    Frobenius,
    DrinfeldU,
    DrinfeldURa,
    UniformizerChange,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Sum => "sum",
            FamilyKind::Prod => "prod",
            FamilyKind::Neg => "neg",
            FamilyKind::Scalar { .. } => "scalar",
            FamilyKind::Frobenius => "frobenius",
            FamilyKind::DrinfeldU => "drinfeld_u",
            FamilyKind::DrinfeldURa => "drinfeld_u_ra",
            FamilyKind::UniformizerChange => "uniformizer_change",
        }
    }

    /// Stable key used by caches.
    pub fn key(&self) -> String {
        serde_json::to_string(self).expect("kind serializes")
    }

    fn needs_extension(&self) -> bool {
        matches!(
            self,
            FamilyKind::DrinfeldU | FamilyKind::DrinfeldURa | FamilyKind::UniformizerChange
        )
    }
}

/// The local ring (or extension) a family is defined over.
#[derive(Clone, Debug)]
pub enum FamilySource {
    Local(Arc<LocalFieldSpec>),
    Extension(Arc<Extension>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum SourceDescriptor {
    Extension(ExtensionDescriptor),
    Local(SpecDescriptor),
}

impl FamilySource {
    /// The ring holding the coefficients: the top ring of an extension.
    pub fn coeff_spec(&self) -> &Arc<LocalFieldSpec> {
        match self {
            FamilySource::Local(s) => s,
            FamilySource::Extension(e) => e.top(),
        }
    }

    fn descriptor(&self) -> SourceDescriptor {
        match self {
            FamilySource::Local(s) => SourceDescriptor::Local(s.descriptor().clone()),
            FamilySource::Extension(e) => SourceDescriptor::Extension(e.descriptor().clone()),
        }
    }

    fn from_descriptor(d: SourceDescriptor) -> Result<Self, FamilyError> {
        Ok(match d {
            SourceDescriptor::Local(s) => FamilySource::Local(LocalFieldSpec::new(s)?),
            SourceDescriptor::Extension(e) => FamilySource::Extension(Extension::new(e)?),
        })
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.descriptor()).expect("descriptor serializes")
    }

    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

impl PartialEq for FamilySource {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor() == other.descriptor()
    }
}

/// Variable layout: `blocks` groups of `block_len` coordinates, block-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub blocks: usize,
    pub block_len: usize,
}

impl Layout {
    pub fn nvars(&self) -> usize {
        self.blocks * self.block_len
    }

    pub fn index(&self, block: usize, coord: usize) -> usize {
        block * self.block_len + coord
    }

    pub fn split(&self, var: usize) -> (usize, usize) {
        (var / self.block_len, var % self.block_len)
    }
}

/// Variable layout of a family of length `n`.
pub fn layout(kind: &FamilyKind, source: &FamilySource, n: usize) -> Layout {
    let (blocks, block_len) = match kind {
        FamilyKind::Sum | FamilyKind::Prod => (2, n),
        FamilyKind::Neg | FamilyKind::Scalar { .. } => (1, n),
        FamilyKind::Frobenius => (1, n + 1),
        FamilyKind::DrinfeldU | FamilyKind::UniformizerChange => {
            let r = match source {
                FamilySource::Extension(e) => e.residue_degree(),
                FamilySource::Local(_) => 1,
            };
            (1, n.saturating_sub(1) * r + 1)
        }
        FamilyKind::DrinfeldURa => {
            let e = match source {
                FamilySource::Extension(e) => e.ramification(),
                FamilySource::Local(_) => 1,
            };
            (e, n)
        }
    };
    Layout { blocks, block_len }
}

fn var_names(kind: &FamilyKind, lay: Layout) -> Vec<String> {
    let mut out = Vec::with_capacity(lay.nvars());
    for b in 0..lay.blocks {
        for c in 0..lay.block_len {
            out.push(match kind {
                FamilyKind::Sum | FamilyKind::Prod => format!("{}{c}", ["X", "Y"][b]),
                FamilyKind::DrinfeldURa => format!("X{c}_{b}"),
                _ => format!("X{c}"),
            });
        }
    }
    out
}

/// Structure polynomials `G_0..G_{n-1}` with coefficients in the
/// coefficient ring of the source; `G_m` is known modulo `pi^(N - m)`.
#[derive(Clone, Debug)]
pub struct PolyFamily {
    kind: FamilyKind,
    source: FamilySource,
    n: usize,
    vars: Vec<String>,
    solver_precision: u32,
    polys: Vec<MPoly<Coords>>,
}

impl PartialEq for PolyFamily {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.source == other.source
            && self.n == other.n
            && self.vars == other.vars
            && self.solver_precision == other.solver_precision
            && self.polys == other.polys
    }
}

/// `sum_i pi^i X_{off+i}^{q^{m-i}}` in `ring`.
fn ghost_poly(
    ring: &MPolyRing<LocalRing>,
    offset: usize,
    m: usize,
    pi: &Coords,
    q: u64,
) -> MPoly<Coords> {
    let base = ring.base();
    let nv = ring.nvars();
    let mut terms = Vec::with_capacity(m + 1);
    let mut pi_pow = base.one();
    for i in 0..=m {
        let exp = q.pow((m - i) as u32) as u32;
        terms.push((Monomial::var(nv, offset + i).pow(exp), pi_pow.clone()));
        pi_pow = base.mul(&pi_pow, pi).expect("local multiplication");
    }
    ring.reduce_terms(terms)
}

/// Ghost targets of a family, built in the torsion-free solver ring.
struct Targets {
    kind: FamilyKind,
    ring: MPolyRing<LocalRing>,
    lay: Layout,
    varpi: Coords,
    q: u64,
    src_pi: Coords,
    src_q: u64,
    r: usize,
    lambda: Option<Coords>,
}

impl Targets {
    fn new(kind: &FamilyKind, source: &FamilySource, n: usize, prec: u32) -> Self {
        let spec = source.coeff_spec().clone();
        let lay = layout(kind, source, n);
        let ring = MPolyRing::new(LocalRing::new(&spec, prec), var_names(kind, lay));
        let base = ring.base().clone();
        let varpi = base.symbol("pi").expect("uniformizer");
        let q = spec.q();
        let (src_pi, src_q, r) = match source {
            FamilySource::Local(_) => (varpi.clone(), q, 1),
            FamilySource::Extension(e) => (
                base.reduce(e.pi_image().coords()),
                e.base().q(),
                e.residue_degree(),
            ),
        };
        let lambda = match kind {
            FamilyKind::Scalar { lambda } => Some(base.reduce(&spec.raw_from_signed(lambda))),
            _ => None,
        };
        Targets {
            kind: kind.clone(),
            ring,
            lay,
            varpi,
            q,
            src_pi,
            src_q,
            r,
            lambda,
        }
    }

    fn ghost(&self, block: usize, m: usize) -> MPoly<Coords> {
        ghost_poly(&self.ring, self.lay.index(block, 0), m, &self.varpi, self.q)
    }

    fn target(&self, m: usize) -> MPoly<Coords> {
        let ring = &self.ring;
        match &self.kind {
            FamilyKind::Sum => ring.add(&self.ghost(0, m), &self.ghost(1, m)),
            FamilyKind::Prod => ring.mul(&self.ghost(0, m), &self.ghost(1, m)).expect("unbounded ring"),
            FamilyKind::Neg => ring.neg(&self.ghost(0, m)),
            FamilyKind::Scalar { .. } => ring
                .scale(&self.ghost(0, m), self.lambda.as_ref().expect("scalar"))
                .expect("unbounded ring"),
            FamilyKind::Frobenius => self.ghost(0, m + 1),
            FamilyKind::DrinfeldU | FamilyKind::UniformizerChange => {
                ghost_poly(ring, 0, m * self.r, &self.src_pi, self.src_q)
            }
            FamilyKind::DrinfeldURa => {
                let base = ring.base();
                let mut acc = ring.zero();
                let mut vp = base.one();
                for j in 0..self.lay.blocks {
                    let g = ghost_poly(ring, self.lay.index(j, 0), m, &self.src_pi, self.src_q);
                    acc = ring.add(&acc, &ring.scale(&g, &vp).expect("unbounded ring"));
                    vp = base.mul(&vp, &self.varpi).expect("local multiplication");
                }
                acc
            }
        }
    }

    /// `sum_{i<=m} varpi^i polys[i]^{q^{m-i}}`.
    fn ghost_of(&self, polys: &[MPoly<Coords>], m: usize) -> MPoly<Coords> {
        let ring = &self.ring;
        let base = ring.base();
        let mut acc = ring.zero();
        let mut vp = base.one();
        for (i, g) in polys[..=m].iter().enumerate() {
            let lifted = ring.reduce_terms(g.terms.clone());
            let pw = ring.pow(&lifted, self.q.pow((m - i) as u32)).expect("unbounded ring");
            acc = ring.add(&acc, &ring.scale(&pw, &vp).expect("unbounded ring"));
            vp = base.mul(&vp, &self.varpi).expect("local multiplication");
        }
        acc
    }
}

fn check_source(kind: &FamilyKind, source: &FamilySource) -> Result<(), FamilyError> {
    let wrong = |needs| FamilyError::WrongSource {
        kind: kind.name().into(),
        needs,
    };
    match source {
        FamilySource::Local(_) if kind.needs_extension() => Err(wrong("an extension")),
        FamilySource::Extension(_) if !kind.needs_extension() => Err(wrong("a single local ring")),
        FamilySource::Extension(ext) => match kind {
            FamilyKind::DrinfeldURa if ext.residue_degree() != 1 => Err(wrong("a totally ramified extension")),
            FamilyKind::UniformizerChange if ext.residue_degree() != 1 || ext.ramification() != 1 => {
                Err(wrong("two presentations of the same ring"))
            }
            _ => Ok(()),
        },
        FamilySource::Local(_) => Ok(()),
    }
}

impl PolyFamily {
    /// Solves the family of length `n`.
    pub fn compute(kind: &FamilyKind, source: &FamilySource, n: usize) -> Result<Self, FamilyError> {
        check_source(kind, source)?;
        let spec = source.coeff_spec().clone();
        let n0 = spec.max_precision();
        if n == 0 || n as u32 >= n0 {
            return Err(FamilyError::SolverPrecision { n, max: n0 });
        }
        let t = Targets::new(kind, source, n, n0);
        let ring = &t.ring;
        let base = ring.base();
        let vars = ring.vars().to_vec();

        let mut polys: Vec<MPoly<Coords>> = Vec::with_capacity(n);
        // powers[i] = G_i^{q^{m-i}} at step m
        let mut powers: Vec<MPoly<Coords>> = Vec::with_capacity(n);
        let mut varpi_pows = vec![base.one()];
        for m in 0..n {
            for p in powers.iter_mut() {
                *p = ring.pow(p, t.q).expect("unbounded ring");
            }
            let mut rem = t.target(m);
            for (i, p) in powers.iter().enumerate() {
                rem = ring.sub(&rem, &ring.scale(p, &varpi_pows[i]).expect("unbounded ring"));
            }
            let mut terms = Vec::with_capacity(rem.len());
            for (mono, c) in rem.terms {
                let d = spec.div_pi_power(&c, n0, m as u32).map_err(|_| FamilyError::Integrality {
                    m,
                    monomial: format_monomial(&vars, &mono),
                })?;
                if !d.iter().all(|&x| x == 0) {
                    terms.push((mono, d));
                }
            }
            let g = MPoly { terms };
            powers.push(g.clone());
            polys.push(g);
            varpi_pows.push(base.mul(varpi_pows.last().unwrap(), &t.varpi).expect("local multiplication"));
        }
        Ok(PolyFamily {
            kind: kind.clone(),
            source: source.clone(),
            n,
            vars,
            solver_precision: n0,
            polys,
        })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn source(&self) -> &FamilySource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn layout(&self) -> Layout {
        layout(&self.kind, &self.source, self.n)
    }

    pub fn solver_precision(&self) -> u32 {
        self.solver_precision
    }

    /// Precision to which `G_m` is known.
    pub fn precision(&self, m: usize) -> u32 {
        self.solver_precision - m as u32
    }

    pub fn polys(&self) -> &[MPoly<Coords>] {
        &self.polys
    }

    pub fn poly(&self, m: usize) -> &MPoly<Coords> {
        &self.polys[m]
    }

    /// Polynomial ring in this family's variables over `O/pi^prec`.
    pub fn ring_at(&self, prec: u32) -> MPolyRing<LocalRing> {
        MPolyRing::new(LocalRing::new(self.source.coeff_spec(), prec), self.vars.clone())
    }

    /// `G_m` as an element of [`Self::ring_at`] at its own precision.
    pub fn format_poly(&self, m: usize) -> String {
        self.ring_at(self.precision(m)).format(&self.polys[m])
    }

    /// Coordinates each block needs for outputs `0..=m`.
    pub fn footprint(&self, m: usize) -> usize {
        let lay = self.layout();
        self.polys[..=m]
            .iter()
            .flat_map(|p| p.terms.iter())
            .flat_map(|(mono, _)| {
                mono.exps()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, _)| lay.split(v).1 + 1)
                    .collect::<Vec<_>>()
            })
            .max()
            .unwrap_or(0)
    }

    /// The first `n` polynomials, re-indexed for the shorter layout.
    pub fn truncated(&self, n: usize) -> PolyFamily {
        assert!(n > 0 && n <= self.n, "truncation length out of range");
        if n == self.n {
            return self.clone();
        }
        let old = self.layout();
        let new = layout(&self.kind, &self.source, n);
        let polys = self.polys[..n]
            .iter()
            .map(|p| MPoly {
                terms: p
                    .terms
                    .iter()
                    .map(|(mono, c)| {
                        let mut e: SmallVec<[u32; 8]> = SmallVec::from_elem(0, new.nvars());
                        for (v, &x) in mono.exps().iter().enumerate() {
                            if x > 0 {
                                let (b, k) = old.split(v);
                                e[new.index(b, k)] = x;
                            }
                        }
                        (Monomial(e), c.clone())
                    })
                    .collect(),
            })
            .collect();
        PolyFamily {
            kind: self.kind.clone(),
            source: self.source.clone(),
            n,
            vars: var_names(&self.kind, new),
            solver_precision: self.solver_precision,
            polys,
        }
    }

    /// Checks `Phi_m(G) = target_m` symbolically at the solver precision;
    /// returns the first coordinate where it fails.
    pub fn check_ghost_identity(&self) -> Result<(), usize> {
        let t = Targets::new(&self.kind, &self.source, self.n, self.solver_precision);
        for m in 0..self.n {
            if t.ghost_of(&self.polys, m) != t.target(m) {
                return Err(m);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let wire = WireFamily {
            kind: self.kind.clone(),
            spec: self.source.descriptor(),
            n: self.n,
            vars: self.vars.clone(),
            solver_precision: self.solver_precision,
            polys: self
                .polys
                .iter()
                .enumerate()
                .map(|(m, p)| {
                    let prec = self.precision(m);
                    let spec = self.source.coeff_spec();
                    WirePoly {
                        monomials: p
                            .terms
                            .iter()
                            .map(|(mono, c)| WireTerm {
                                exps: mono
                                    .exps()
                                    .iter()
                                    .enumerate()
                                    .filter(|(_, &e)| e > 0)
                                    .map(|(v, &e)| (self.vars[v].clone(), e))
                                    .collect(),
                                coeff: WireCoeff {
                                    coords: spec.signed_coords(c, prec),
                                    prec,
                                },
                            })
                            .collect(),
                    }
                })
                .collect(),
        };
        serde_json::to_string(&wire).expect("family serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        let wire: WireFamily =
            serde_json::from_str(text).map_err(|e| FamilyError::Malformed(e.to_string()))?;
        let source = FamilySource::from_descriptor(wire.spec)?;
        let spec = source.coeff_spec().clone();
        let lay = layout(&wire.kind, &source, wire.n);
        let vars = var_names(&wire.kind, lay);
        if vars != wire.vars || wire.polys.len() != wire.n || wire.solver_precision > spec.max_precision() {
            return Err(FamilyError::Malformed("layout does not match kind and length".into()));
        }
        let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut polys = Vec::with_capacity(wire.n);
        for (m, p) in wire.polys.iter().enumerate() {
            let prec = wire.solver_precision.checked_sub(m as u32).unwrap_or(0);
            let mut terms = Vec::with_capacity(p.monomials.len());
            for t in &p.monomials {
                if t.coeff.prec != prec || t.coeff.coords.len() != spec.dim() {
                    return Err(FamilyError::Malformed(format!("bad coefficient in coordinate {m}")));
                }
                let mut e: SmallVec<[u32; 8]> = SmallVec::from_elem(0, vars.len());
                for (name, &x) in &t.exps {
                    let v = index
                        .get(name.as_str())
                        .ok_or_else(|| FamilyError::Malformed(format!("unknown variable {name}")))?;
                    e[*v] = x;
                }
                terms.push((Monomial(e), spec.canonical(&spec.raw_from_signed(&t.coeff.coords), prec)));
            }
            let sorted = terms.windows(2).all(|w| w[0].0 < w[1].0);
            if !sorted {
                return Err(FamilyError::Malformed(format!("terms of coordinate {m} are not sorted")));
            }
            polys.push(MPoly { terms });
        }
        Ok(PolyFamily {
            kind: wire.kind,
            source,
            n: wire.n,
            vars,
            solver_precision: wire.solver_precision,
            polys,
        })
    }

    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in 0..self.n {
            writeln!(f, "{}_{m} = {}", self.kind.name(), self.format_poly(m))?;
        }
        Ok(())
    }
}

fn format_monomial(vars: &[String], m: &Monomial) -> String {
    let parts: Vec<String> = m
        .exps()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { vars[i].clone() } else { format!("{}^{e}", vars[i]) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

#[derive(Serialize, Deserialize)]
struct WireFamily {
    #[serde(flatten)]
    kind: FamilyKind,
    spec: SourceDescriptor,
    n: usize,
    vars: Vec<String>,
    solver_precision: u32,
    polys: Vec<WirePoly>,
}

#[derive(Serialize, Deserialize)]
struct WirePoly {
    monomials: Vec<WireTerm>,
}

#[derive(Serialize, Deserialize)]
struct WireTerm {
    exps: BTreeMap<String, u32>,
    coeff: WireCoeff,
}

#[derive(Serialize, Deserialize)]
struct WireCoeff {
    coords: Vec<i64>,
    prec: u32,
}
