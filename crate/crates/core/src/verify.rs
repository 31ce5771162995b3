//! Named verification suites. Each suite enumerates small instances, or
//! samples larger ones with a fixed seed, and reports every property with
//! counterexample witnesses.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff_ring::{
    make_instance, semiperfect_level, CoeffError, CoeffRing, InstanceDescriptor, LocalRing, OAlgebra,
};
use crate::drinfeld::{
    kernel_congruence, ramified_support, tower_composition_holds, unramified_closed_form_failures, DrinfeldMap,
};
use crate::greenberg::{GreenbergElem, GreenbergRing};
use crate::local_ring::{Extension, ExtensionDescriptor, LocalElem, LocalError, LocalFieldSpec, SpecDescriptor};
use crate::with_ring;
use crate::witt::{FamilyCache, FamilyKind, FamilySource, WittError, WittRing, WittVector};

/// Precision used for specs the suites build themselves.
pub const DEFAULT_PRECISION: u32 = 8;
const MAX_WITNESSES: usize = 3;
const TABLE_LIMIT: usize = 256;
const PAIR_LIMIT: usize = 4096;
const ENUM_LIMIT: usize = 1 << 17;
const DEFAULT_SAMPLES: usize = 256;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

impl VerifyError {
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, VerifyError::Witt(e) if e.is_solver_failure())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Ghost,
    RingAxioms,
    FvIdentities,
    Glue,
    PiSeries,
    DrinfeldIdentities,
    DrinfeldKernelUnram,
    DrinfeldKernelRam,
    U2Support,
    GreenbergRing,
    RBijectivity,
    RKernel,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Ghost,
        Suite::RingAxioms,
        Suite::FvIdentities,
        Suite::Glue,
        Suite::PiSeries,
        Suite::DrinfeldIdentities,
        Suite::DrinfeldKernelUnram,
        Suite::DrinfeldKernelRam,
        Suite::U2Support,
        Suite::GreenbergRing,
        Suite::RBijectivity,
        Suite::RKernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ghost => "ghost",
            Suite::RingAxioms => "ring-axioms",
            Suite::FvIdentities => "fv-identities",
            Suite::Glue => "glue",
            Suite::PiSeries => "pi-series",
            Suite::DrinfeldIdentities => "drinfeld-identities",
            Suite::DrinfeldKernelUnram => "drinfeld-kernel-unram",
            Suite::DrinfeldKernelRam => "drinfeld-kernel-ram",
            Suite::U2Support => "u2-support",
            Suite::GreenbergRing => "greenberg-ring",
            Suite::RBijectivity => "r-bijectivity",
            Suite::RKernel => "r-kernel",
        }
    }

    fn uses_greenberg_default(self) -> bool {
        matches!(self, Suite::GreenbergRing | Suite::RBijectivity | Suite::RKernel)
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, VerifyError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::Input(format!("unknown suite `{s}`")))
    }
}

/// Inputs to a suite; unset fields take per-suite defaults.
#[derive(Clone, Debug, Default)]
pub struct VerifyParams {
    pub spec: Option<Arc<LocalFieldSpec>>,
    pub ext: Option<Arc<Extension>>,
    pub instance: Option<InstanceDescriptor>,
    /// Witt vector length; for the Greenberg suites the `p`-typical length `m`.
    pub n: Option<usize>,
    pub e: Option<usize>,
    pub s_max: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub failures: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub params: Value,
    pub passed: bool,
    pub properties: Vec<Property>,
    pub elapsed_ms: u64,
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{} {} ({} ms)", verdict, self.suite, self.elapsed_ms);
        let _ = writeln!(out, "  params: {}", self.params);
        for p in &self.properties {
            let v = if p.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  {} {} [{} checked, {} failed]", v, p.name, p.checked, p.failures);
            for w in &p.witnesses {
                let _ = writeln!(out, "      witness: {w}");
            }
            for n in &p.notes {
                let _ = writeln!(out, "      {n}");
            }
        }
        out
    }
}

struct Check {
    name: String,
    checked: u64,
    failures: u64,
    witnesses: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            checked: 0,
            failures: 0,
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self) -> Property {
        Property {
            passed: self.failures == 0 && self.checked > 0,
            name: self.name,
            checked: self.checked,
            failures: self.failures,
            witnesses: self.witnesses,
            notes: self.notes,
        }
    }
}

/// Runs `suite` and times it.
pub fn run(suite: Suite, params: &VerifyParams) -> Result<VerifyReport, VerifyError> {
    let start = Instant::now();
    let mut ctx = Ctx::new(suite, params)?;
    let properties = match suite {
        Suite::Ghost => ctx.ghost()?,
        Suite::DrinfeldKernelRam => ctx.kernel_ram()?,
        _ => ctx.with_instances()?,
    };
    Ok(VerifyReport {
        suite: suite.name().to_string(),
        passed: properties.iter().all(|p| p.passed),
        params: Value::Object(ctx.echo),
        properties,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

fn pure_root_ext(p: u64, h: usize, e: usize) -> Result<Arc<Extension>, VerifyError> {
    let base = SpecDescriptor::unramified(p, h, DEFAULT_PRECISION)?;
    let top = SpecDescriptor::pure_root(p, h, e, DEFAULT_PRECISION)?;
    Ok(Extension::new(ExtensionDescriptor::new(base, top))?)
}

fn unramified_ext(p: u64, r: usize) -> Result<Arc<Extension>, VerifyError> {
    let base = SpecDescriptor::zp(p, DEFAULT_PRECISION);
    let top = SpecDescriptor::unramified(p, r, DEFAULT_PRECISION)?;
    Ok(Extension::new(ExtensionDescriptor::new(base, top))?)
}

fn field_desc(p: u64, d: usize) -> InstanceDescriptor {
    InstanceDescriptor::FiniteField { p, d, modulus: None }
}

fn nilpotent_desc(p: u64, d: usize, k: u32) -> InstanceDescriptor {
    InstanceDescriptor::Quotient {
        p,
        d,
        vars: vec!["x".into()],
        ideal: vec![format!("x^{k}")],
    }
}

struct Ctx {
    suite: Suite,
    spec: Arc<LocalFieldSpec>,
    params: VerifyParams,
    echo: serde_json::Map<String, Value>,
    rng: ChaCha8Rng,
}

impl Ctx {
    fn new(suite: Suite, params: &VerifyParams) -> Result<Self, VerifyError> {
        let spec = match &params.spec {
            Some(s) => s.clone(),
            None if suite.uses_greenberg_default() => {
                LocalFieldSpec::new(SpecDescriptor::pure_root(2, 1, 2, DEFAULT_PRECISION)?)?
            }
            None => LocalFieldSpec::zp(2, DEFAULT_PRECISION)?,
        };
        let mut echo = serde_json::Map::new();
        echo.insert("seed".into(), json!(params.seed));
        Ok(Ctx {
            suite,
            spec,
            params: params.clone(),
            echo,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
        })
    }

    fn set(&mut self, key: &str, v: impl Serialize) {
        self.echo.insert(key.into(), serde_json::to_value(v).expect("parameters serialize"));
    }

    fn n_or(&mut self, default: usize) -> Result<usize, VerifyError> {
        let n = self.params.n.unwrap_or(default);
        if n == 0 {
            return Err(VerifyError::Input("lengths must be positive".into()));
        }
        self.set("n", n);
        Ok(n)
    }

    fn samples(&mut self) -> usize {
        let s = self.params.samples.unwrap_or(DEFAULT_SAMPLES);
        self.set("samples", s);
        s
    }

    fn echo_spec(&mut self) {
        let d = self.spec.descriptor().clone();
        self.set("spec", d);
    }

    fn ghost(&mut self) -> Result<Vec<Property>, VerifyError> {
        self.echo_spec();
        let n = self.n_or(3)?;
        let samples = self.samples();
        ghost_suite(&self.spec, n, samples, &mut self.rng)
    }

    fn kernel_ram(&mut self) -> Result<Vec<Property>, VerifyError> {
        let ext = match &self.params.ext {
            Some(x) => x.clone(),
            None => pure_root_ext(self.spec.p(), 1, self.params.e.unwrap_or(2))?,
        };
        self.set("ext", ext.descriptor().clone());
        let s_max = self.params.s_max.unwrap_or(4);
        self.set("s_max", s_max);
        kernel_ram_suite(&ext, s_max)
    }

    fn default_instances(&self) -> Result<Vec<InstanceDescriptor>, VerifyError> {
        let (p, h) = (self.spec.p(), self.spec.h());
        let top_h = self.params.ext.as_ref().map_or(h, |x| x.top().h());
        Ok(match self.suite {
            Suite::RingAxioms | Suite::FvIdentities | Suite::GreenbergRing => vec![field_desc(p, h)],
            Suite::Glue => vec![nilpotent_desc(p, h, 2)],
            Suite::PiSeries | Suite::RBijectivity => vec![field_desc(p, 2 * h)],
            Suite::DrinfeldIdentities => vec![field_desc(p, if self.params.ext.is_some() { top_h } else { 2 })],
            Suite::DrinfeldKernelUnram => vec![nilpotent_desc(p, if self.params.ext.is_some() { top_h } else { 2 }, 2)],
            Suite::U2Support => vec![field_desc(p, top_h), nilpotent_desc(p, top_h, 2)],
            Suite::RKernel => vec![nilpotent_desc(p, h, 4)],
            Suite::Ghost | Suite::DrinfeldKernelRam => unreachable!("suite takes no instance"),
        })
    }

    fn with_instances(&mut self) -> Result<Vec<Property>, VerifyError> {
        let instances = match &self.params.instance {
            Some(d) => vec![d.clone()],
            None => self.default_instances()?,
        };
        self.set("instances", &instances);
        let mut out = Vec::new();
        let multi = instances.len() > 1;
        for desc in &instances {
            let ring = make_instance(desc, Some(&self.spec))?;
            let label = ring.describe();
            let mut props = with_ring!(ring, r => self.dispatch(r))?;
            if multi {
                for p in &mut props {
                    p.name = format!("{label}/{}", p.name);
                }
            }
            out.extend(props);
        }
        Ok(out)
    }

    fn dispatch<R: CoeffRing>(&mut self, ring: R) -> Result<Vec<Property>, VerifyError> {
        match self.suite {
            Suite::RingAxioms | Suite::FvIdentities | Suite::Glue | Suite::PiSeries => {
                self.echo_spec();
                let default_n = match self.suite {
                    Suite::Glue => 4,
                    Suite::PiSeries => 2,
                    _ => 3,
                };
                let n = self.n_or(default_n)?;
                let samples = self.samples();
                let w = WittRing::new(OAlgebra::natural(ring, &self.spec)?);
                let rng = &mut self.rng;
                match self.suite {
                    Suite::RingAxioms => ring_axioms_suite(&w, n, samples, rng),
                    Suite::FvIdentities => fv_suite(&w, n, samples, rng),
                    Suite::Glue => glue_suite(&w, n, samples, rng),
                    _ => pi_series_suite(&w, n),
                }
            }
            Suite::DrinfeldIdentities => {
                let n = self.n_or(3)?;
                let samples = self.samples();
                let exts: Vec<(String, Arc<Extension>)> = match &self.params.ext {
                    Some(x) => vec![("ext".into(), x.clone())],
                    None => {
                        let p = self.spec.p();
                        vec![
                            ("unramified".into(), unramified_ext(p, 2)?),
                            ("ramified".into(), pure_root_ext(p, 1, 2)?),
                            ("composite".into(), {
                                let base = SpecDescriptor::zp(p, DEFAULT_PRECISION);
                                let top = SpecDescriptor::pure_root(p, 2, 2, DEFAULT_PRECISION)?;
                                Extension::new(ExtensionDescriptor::new(base, top))?
                            }),
                            ("upper".into(), pure_root_ext(p, 2, 2)?),
                        ]
                    }
                };
                let descs: Vec<_> = exts.iter().map(|(l, x)| json!({ "label": l, "ext": x.descriptor() })).collect();
                self.set("exts", descs);
                let mut out = Vec::new();
                for (label, ext) in &exts {
                    let dm = DrinfeldMap::new(ext, OAlgebra::natural(ring.clone(), ext.top())?)?;
                    for mut p in drinfeld_identities(&dm, n, samples, &mut self.rng)? {
                        p.name = format!("{label}/{}", p.name);
                        out.push(p);
                    }
                }
                if self.params.ext.is_none() {
                    out.push(tower_check(&exts[0].1, &exts[3].1, &exts[2].1, ring, n, samples, &mut self.rng)?);
                }
                Ok(out)
            }
            Suite::DrinfeldKernelUnram => {
                let ext = match &self.params.ext {
                    Some(x) => x.clone(),
                    None => unramified_ext(self.spec.p(), 2)?,
                };
                self.set("ext", ext.descriptor().clone());
                let n = self.n_or(2)?;
                let samples = self.samples();
                let dm = DrinfeldMap::new(&ext, OAlgebra::natural(ring, ext.top())?)?;
                kernel_unram_suite(&dm, n, samples, &mut self.rng)
            }
            Suite::U2Support => {
                let ext = match &self.params.ext {
                    Some(x) => x.clone(),
                    None => pure_root_ext(self.spec.p(), 1, self.params.e.unwrap_or(2))?,
                };
                self.set("ext", ext.descriptor().clone());
                let n = self.n_or(4)?;
                let samples = self.samples();
                let dm = DrinfeldMap::new(&ext, OAlgebra::natural(ring, ext.top())?)?;
                u2_support_suite(&dm, n, samples, &mut self.rng)
            }
            Suite::GreenbergRing | Suite::RBijectivity | Suite::RKernel => {
                self.echo_spec();
                let m = self.n_or(2)?;
                let samples = self.samples();
                let g = GreenbergRing::new(&self.spec, ring)?;
                let rng = &mut self.rng;
                match self.suite {
                    Suite::GreenbergRing => greenberg_ring_suite(&g, m, samples, rng),
                    Suite::RBijectivity => r_bijectivity_suite(&g, m, samples, rng),
                    _ => r_kernel_suite(&g, m),
                }
            }
            Suite::Ghost | Suite::DrinfeldKernelRam => unreachable!("handled without an instance"),
        }
    }
}

type Vector<R> = WittVector<<R as CoeffRing>::Elem>;

/// Caps rejection sampling of distinct elements, so a sample pool smaller
/// than the requested count fails instead of looping forever.
struct DrawBudget {
    left: usize,
    samples: usize,
}

impl DrawBudget {
    fn new(samples: usize) -> Self {
        DrawBudget { left: samples.saturating_mul(32).max(1024), samples }
    }

    fn spend(&mut self) -> Result<(), VerifyError> {
        if self.left == 0 {
            return Err(VerifyError::Input(format!(
                "could not draw {} distinct samples; raise the instance's sample_degree or lower --samples",
                self.samples
            )));
        }
        self.left -= 1;
        Ok(())
    }
}

/// All of `W_{O,n}(B)` when small enough, otherwise `samples` random vectors.
fn witt_domain<R: CoeffRing>(w: &WittRing<R>, n: usize, samples: usize, rng: &mut ChaCha8Rng) -> (Vec<Vector<R>>, bool) {
    match w.elements(n) {
        Some(all) if all.len() <= ENUM_LIMIT => (all, true),
        _ => ((0..samples).map(|_| w.random(n, rng)).collect(), false),
    }
}

fn coverage(exhaustive: bool, count: usize) -> String {
    if exhaustive {
        format!("enumerated all {count} elements")
    } else {
        format!("sampled {count} elements")
    }
}

/// Index pairs: all of them when few enough, otherwise a random subset.
fn index_pairs(len: usize, limit: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if len * len <= limit {
        (0..len).flat_map(|i| (0..len).map(move |j| (i, j))).collect()
    } else {
        (0..limit).map(|_| (rng.gen_range(0..len), rng.gen_range(0..len))).collect()
    }
}

fn agree<E: Clone + PartialEq>(a: &WittVector<E>, b: &WittVector<E>) -> bool {
    let n = a.len().min(b.len());
    n > 0 && a.coords[..n] == b.coords[..n]
}

/// Scalars used for linearity checks: `pi`, `1 + pi`, `-1` and a unit root when `h > 1`.
fn test_scalars(spec: &Arc<LocalFieldSpec>) -> Vec<LocalElem> {
    let prec = spec.max_precision();
    let pi = LocalElem::uniformizer(spec, prec);
    let mut out = vec![pi.clone(), LocalElem::one(spec, prec).add(&pi), LocalElem::from_int(spec, -1, prec)];
    if spec.h() > 1 {
        out.push(LocalElem::omega(spec, prec));
    }
    out
}

type Op<'a, T> = Box<dyn Fn(&T, &T) -> Result<T, WittError> + 'a>;

/// A finite commutative ring presented by its operations.
struct RingOps<'a, T> {
    zero: T,
    one: T,
    add: Op<'a, T>,
    mul: Op<'a, T>,
    neg: Box<dyn Fn(&T) -> Result<T, WittError> + 'a>,
    fmt: Box<dyn Fn(&T) -> String + 'a>,
}

/// Commutative ring axioms, by operation tables on small enumerated rings
/// and on random triples otherwise.
fn ring_axioms<T: Clone + Eq + Hash>(
    ops: &RingOps<T>,
    elems: &[T],
    exhaustive: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Property>, WittError> {
    let names = [
        "add_commutative",
        "add_associative",
        "add_identity",
        "add_inverse",
        "mul_commutative",
        "mul_associative",
        "mul_identity",
        "distributive",
    ];
    let mut checks: Vec<Check> = names.iter().map(|n| Check::new(*n)).collect();
    let f = &ops.fmt;
    if exhaustive && elems.len() <= TABLE_LIMIT {
        let len = elems.len();
        let index: HashMap<&T, usize> = elems.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut closed = Check::new("closed_under_operations");
        let lookup = |t: &T, closed: &mut Check, what: &dyn Fn() -> String| -> Option<usize> {
            let i = index.get(t).copied();
            closed.record(i.is_some(), what);
            i
        };
        let mut add_t = vec![0usize; len * len];
        let mut mul_t = vec![0usize; len * len];
        let mut neg_t = vec![0usize; len];
        for i in 0..len {
            let nx = (ops.neg)(&elems[i])?;
            neg_t[i] = lookup(&nx, &mut closed, &|| format!("-{}", f(&elems[i]))).unwrap_or(usize::MAX);
            for j in 0..len {
                let s = (ops.add)(&elems[i], &elems[j])?;
                let p = (ops.mul)(&elems[i], &elems[j])?;
                add_t[i * len + j] = lookup(&s, &mut closed, &|| format!("{} + {}", f(&elems[i]), f(&elems[j]))).unwrap_or(usize::MAX);
                mul_t[i * len + j] = lookup(&p, &mut closed, &|| format!("{} * {}", f(&elems[i]), f(&elems[j]))).unwrap_or(usize::MAX);
            }
        }
        if closed.failures > 0 {
            let mut out = vec![closed.finish()];
            out.extend(checks.into_iter().map(Check::finish));
            return Ok(out);
        }
        let zero = index[&ops.zero];
        let one = index[&ops.one];
        let a = |i: usize, j: usize| add_t[i * len + j];
        let m = |i: usize, j: usize| mul_t[i * len + j];
        let w1 = |i: usize| f(&elems[i]);
        let w2 = |i: usize, j: usize| format!("x = {}, y = {}", f(&elems[i]), f(&elems[j]));
        let w3 = |i: usize, j: usize, k: usize| format!("x = {}, y = {}, z = {}", f(&elems[i]), f(&elems[j]), f(&elems[k]));
        for i in 0..len {
            checks[2].record(a(i, zero) == i, || w1(i));
            checks[3].record(a(i, neg_t[i]) == zero, || w1(i));
            checks[6].record(m(i, one) == i, || w1(i));
            for j in 0..len {
                checks[0].record(a(i, j) == a(j, i), || w2(i, j));
                checks[4].record(m(i, j) == m(j, i), || w2(i, j));
                for k in 0..len {
                    checks[1].record(a(a(i, j), k) == a(i, a(j, k)), || w3(i, j, k));
                    checks[5].record(m(m(i, j), k) == m(i, m(j, k)), || w3(i, j, k));
                    checks[7].record(m(i, a(j, k)) == a(m(i, j), m(i, k)), || w3(i, j, k));
                }
            }
        }
        let mut out = vec![closed.finish()];
        out.extend(checks.into_iter().map(|mut c| {
            c.note(format!("operation tables over all {len} elements"));
            c.finish()
        }));
        return Ok(out);
    }
    let len = elems.len();
    for _ in 0..PAIR_LIMIT.min(len * len * len).max(1) {
        let (x, y, z) = (
            &elems[rng.gen_range(0..len)],
            &elems[rng.gen_range(0..len)],
            &elems[rng.gen_range(0..len)],
        );
        let w = || format!("x = {}, y = {}, z = {}", f(x), f(y), f(z));
        let xy = (ops.add)(x, y)?;
        checks[0].record(xy == (ops.add)(y, x)?, w);
        checks[1].record((ops.add)(&xy, z)? == (ops.add)(x, &(ops.add)(y, z)?)?, w);
        checks[2].record((ops.add)(x, &ops.zero)? == *x, w);
        checks[3].record((ops.add)(x, &(ops.neg)(x)?)? == ops.zero, w);
        let mxy = (ops.mul)(x, y)?;
        checks[4].record(mxy == (ops.mul)(y, x)?, w);
        checks[5].record((ops.mul)(&mxy, z)? == (ops.mul)(x, &(ops.mul)(y, z)?)?, w);
        checks[6].record((ops.mul)(x, &ops.one)? == *x, w);
        let lhs = (ops.mul)(x, &(ops.add)(y, z)?)?;
        checks[7].record(lhs == (ops.add)(&mxy, &(ops.mul)(x, z)?)?, w);
    }
    Ok(checks
        .into_iter()
        .map(|mut c| {
            c.note(format!("random triples from {len} elements"));
            c.finish()
        })
        .collect())
}

fn witt_ops<R: CoeffRing>(w: &WittRing<R>, n: usize) -> RingOps<'_, Vector<R>> {
    RingOps {
        zero: w.zero(n),
        one: w.one(n),
        add: Box::new(move |x, y| w.add(x, y)),
        mul: Box::new(move |x, y| w.mul(x, y)),
        neg: Box::new(move |x| w.neg(x)),
        fmt: Box::new(move |x| w.format(x)),
    }
}

fn ghost_suite(spec: &Arc<LocalFieldSpec>, n: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, VerifyError> {
    let src = FamilySource::Local(spec.clone());
    let cache = FamilyCache::global();
    let pi = LocalElem::uniformizer(spec, spec.max_precision());
    let kinds = [
        FamilyKind::Sum,
        FamilyKind::Prod,
        FamilyKind::Neg,
        FamilyKind::Frobenius,
        FamilyKind::Scalar {
            lambda: pi.signed_coords(),
        },
    ];
    let mut out = Vec::new();
    for kind in &kinds {
        let fam = cache.get(kind, &src, n).map_err(WittError::from)?;
        let mut c = Check::new(format!("{}/ghost_identity", kind.name()));
        let res = fam.check_ghost_identity();
        c.record(res.is_ok(), || format!("first failing coordinate {}", res.unwrap_err()));
        c.note(format!("solver precision {}", fam.solver_precision()));
        out.push(c.finish());
    }
    // Numeric ghost map on O/pi^N, which is pi-torsion free below precision N.
    let lift = LocalRing::new(spec, spec.default_precision());
    let w = WittRing::new(OAlgebra::lift(lift.clone(), spec)?);
    let ring = w.ring().clone();
    let mut add = Check::new("ghost_additive");
    let mut mul = Check::new("ghost_multiplicative");
    let mut neg = Check::new("ghost_negation");
    let mut frob = Check::new("ghost_frobenius_shift");
    let mut ver = Check::new("ghost_verschiebung");
    let mut teich = Check::new("ghost_teichmuller");
    let pi_b = w.algebra().map_local(&pi);
    let q = spec.q();
    for _ in 0..samples {
        let x = w.random(n, rng);
        let y = w.random(n, rng);
        let wit = || format!("x = {}, y = {}", w.format(&x), w.format(&y));
        let (gx, gy) = (w.ghost(&x)?, w.ghost(&y)?);
        let gs = w.ghost(&w.add(&x, &y)?)?;
        add.record(gs.iter().zip(gx.iter().zip(&gy)).all(|(s, (a, b))| *s == ring.add(a, b)), wit);
        let gp = w.ghost(&w.mul(&x, &y)?)?;
        let mut ok = true;
        for (p, (a, b)) in gp.iter().zip(gx.iter().zip(&gy)) {
            ok &= *p == ring.mul(a, b)?;
        }
        mul.record(ok, wit);
        let gn = w.ghost(&w.neg(&x)?)?;
        neg.record(gn.iter().zip(&gx).all(|(a, b)| *a == ring.neg(b)), wit);
        if n > 1 {
            let gf = w.ghost(&w.frobenius(&x)?)?;
            frob.record(gf.len() == n - 1 && gf[..] == gx[1..], wit);
        }
        let gv = w.ghost(&w.verschiebung(&x))?;
        let mut ok = ring.is_zero(&gv[0]);
        for m in 0..n {
            ok &= gv[m + 1] == ring.mul(&pi_b, &gx[m])?;
        }
        ver.record(ok, wit);
        let b = ring.random_element(rng);
        let gt = w.ghost(&w.teichmuller(b.clone(), n))?;
        let mut pow = b.clone();
        let mut ok = true;
        for g in &gt {
            ok &= *g == pow;
            pow = ring.pow(&pow, q)?;
        }
        teich.record(ok, || format!("b = {}", ring.format(&b)));
    }
    for mut c in [add, mul, neg, frob, ver, teich] {
        c.note(format!("{samples} random vectors over {}", ring.describe()));
        out.push(c.finish());
    }
    Ok(out)
}

fn ring_axioms_suite<R: CoeffRing>(w: &WittRing<R>, n: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, VerifyError> {
    let (elems, exhaustive) = witt_domain(w, n, samples, rng);
    let mut out = ring_axioms(&witt_ops(w, n), &elems, exhaustive, rng)?;
    let ring = w.ring();
    let mut first = Check::new("first_coordinate_is_a_homomorphism");
    for (i, j) in index_pairs(elems.len(), PAIR_LIMIT, rng) {
        let (x, y) = (&elems[i], &elems[j]);
        let s = w.add(x, y)?;
        let p = w.mul(x, y)?;
        let ok = s.coords[0] == ring.add(&x.coords[0], &y.coords[0]) && p.coords[0] == ring.mul(&x.coords[0], &y.coords[0])?;
        first.record(ok, || format!("x = {}, y = {}", w.format(x), w.format(y)));
    }
    first.note(coverage(exhaustive, elems.len()));
    out.push(first.finish());
    if n == 1 {
        let mut c = Check::new("length_one_is_the_coefficient_ring");
        for (i, j) in index_pairs(elems.len(), PAIR_LIMIT, rng) {
            let (a, b) = (&elems[i].coords[0], &elems[j].coords[0]);
            let s = w.add(&elems[i], &elems[j])?.coords[0].clone();
            let p = w.mul(&elems[i], &elems[j])?.coords[0].clone();
            c.record(s == ring.add(a, b) && p == ring.mul(a, b)?, || format!("a = {}, b = {}", ring.format(a), ring.format(b)));
        }
        out.push(c.finish());
    }
    Ok(out)
}

fn fv_suite<R: CoeffRing>(w: &WittRing<R>, n: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, VerifyError> {
    let (elems, exhaustive) = witt_domain(w, n, samples, rng);
    let spec = w.spec().clone();
    let ring = w.ring();
    let residue = w.algebra().is_residue();
    let pi = LocalElem::uniformizer(&spec, spec.max_precision());
    let q = spec.q();
    let mut fv = Check::new("f_after_v_is_pi");
    let mut vf = Check::new("v_after_f_is_pi");
    let mut fq = Check::new("frobenius_is_coordinatewise_q_power");
    for x in &elems {
        let wit = || w.format(x);
        let pix = w.scalar(&pi, x)?;
        fv.record(agree(&w.frobenius(&w.verschiebung(x))?, &pix), wit);
        if residue {
            let fx = w.frobenius(x)?;
            vf.record(w.verschiebung(&fx).truncate(n) == pix, wit);
            let mut ok = fx.len() == n;
            for (a, b) in fx.coords.iter().zip(&x.coords) {
                ok &= *a == ring.pow(b, q)?;
            }
            fq.record(ok, wit);
        }
    }
    let mut hom = Check::new("frobenius_is_a_ring_homomorphism");
    let mut vadd = Check::new("verschiebung_is_additive");
    let mut proj = Check::new("projection_formula");
    let pairs = index_pairs(elems.len(), PAIR_LIMIT, rng);
    for &(i, j) in &pairs {
        let (x, y) = (&elems[i], &elems[j]);
        let wit = || format!("x = {}, y = {}", w.format(x), w.format(y));
        let (fx, fy) = (w.frobenius(x)?, w.frobenius(y)?);
        let ok = agree(&w.frobenius(&w.add(x, y)?)?, &w.add(&fx, &fy)?)
            && agree(&w.frobenius(&w.mul(x, y)?)?, &w.mul(&fx, &fy)?);
        hom.record(ok, wit);
        let vs = w.verschiebung(&w.add(x, y)?);
        vadd.record(vs == w.add(&w.verschiebung(x), &w.verschiebung(y))?, wit);
        if n > 1 {
            // x V(c) = V(F(x) c) in W_n
            let lhs = w.mul(x, &w.verschiebung(y).truncate(n))?;
            let rhs = w.verschiebung(&w.mul(&fx.truncate(n - 1), &y.truncate(n - 1))?);
            proj.record(lhs == rhs, wit);
        }
    }
    let mut vlin = Check::new("verschiebung_is_o_linear");
    for lambda in test_scalars(&spec) {
        for x in elems.iter().take(PAIR_LIMIT) {
            let lhs = w.verschiebung(&w.scalar(&lambda, x)?);
            let rhs = w.scalar(&lambda, &w.verschiebung(x))?;
            vlin.record(lhs == rhs, || format!("lambda = {lambda}, x = {}", w.format(x)));
        }
    }
    let mut teich = Check::new("teichmuller_is_a_multiplicative_section");
    let base: Vec<R::Elem> = match ring.elements() {
        Some(all) if all.len() * all.len() <= PAIR_LIMIT => all,
        _ => (0..64).map(|_| ring.random_element(rng)).collect(),
    };
    for a in &base {
        for b in &base {
            let ta = w.teichmuller(a.clone(), n);
            let prod = w.mul(&ta, &w.teichmuller(b.clone(), n))?;
            let ok = prod == w.teichmuller(ring.mul(a, b)?, n) && ta.coords[0] == *a;
            teich.record(ok, || format!("a = {}, b = {}", ring.format(a), ring.format(b)));
        }
    }
    let mut out = Vec::new();
    let cov = coverage(exhaustive, elems.len());
    for mut c in [fv, vf, fq, hom, vadd, proj, vlin, teich] {
        if c.checked == 0 && !residue && c.name.starts_with('v') {
            continue;
        }
        if c.checked == 0 && !residue {
            continue;
        }
        c.note(cov.clone());
        out.push(c.finish());
    }
    Ok(out)
}

fn glue_suite<R: CoeffRing>(w: &WittRing<R>, n: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, VerifyError> {
    let (elems, exhaustive) = witt_domain(w, n, samples, rng);
    let ring = w.ring();
    let mut digits = Check::new("digit_expansion");
    let mut glued = Check::new("glue_of_digits");
    for x in &elems {
        let parts: Vec<Vector<R>> = (0..n)
            .map(|i| {
                let mut v = w.teichmuller(x.coords[i].clone(), n - i);
                for _ in 0..i {
                    v = w.verschiebung(&v);
                }
                v
            })
            .collect();
        let mut sum = w.zero(n);
        for p in &parts {
            sum = w.add(&sum, p)?;
        }
        digits.record(sum == *x, || w.format(x));
        glued.record(w.glue(&parts)? == *x, || w.format(x));
    }
    let mut pairs = Check::new("glue_equals_sum");
    let mut overlap = Check::new("overlapping_supports_rejected");
    for (i, j) in index_pairs(elems.len(), PAIR_LIMIT, rng) {
        let (x, y) = (&elems[i], &elems[j]);
        let disjoint = x.coords.iter().zip(&y.coords).all(|(a, b)| ring.is_zero(a) || ring.is_zero(b));
        let res = w.glue(&[x.clone(), y.clone()]);
        if disjoint {
            let ok = matches!(&res, Ok(g) if *g == w.add(x, y)?);
            pairs.record(ok, || format!("x = {}, y = {}", w.format(x), w.format(y)));
        } else {
            overlap.record(matches!(res, Err(WittError::Overlap(_))), || format!("x = {}, y = {}", w.format(x), w.format(y)));
        }
    }
    let single = elems.iter().take(PAIR_LIMIT).all(|x| w.glue(std::slice::from_ref(x)).ok().as_ref() == Some(x));
    let mut one = Check::new("glue_of_one_part");
    one.record(single, || "glue(x) != x".into());
    let cov = coverage(exhaustive, elems.len());
    Ok([digits, glued, pairs, overlap, one]
        .into_iter()
        .filter(|c| c.checked > 0)
        .map(|mut c| {
            c.note(cov.clone());
            c.finish()
        })
        .collect())
}

fn pi_series_suite<R: CoeffRing>(w: &WittRing<R>, n: usize) -> Result<Vec<Property>, VerifyError> {
    let ring = w.ring();
    let base = ring
        .elements()
        .ok_or_else(|| VerifyError::Input("pi-series enumerates digit tuples and needs a finite ring".into()))?;
    let digit_tuples = w
        .elements(n)
        .ok_or_else(|| VerifyError::Input("too many digit tuples to enumerate".into()))?;
    let residue = w.algebra().is_residue();
    let q = w.spec().q();
    let mut closed = Check::new("closed_form");
    let mut teich = Check::new("single_digit_is_teichmuller");
    let mut images = HashSet::new();
    let mut round = Check::new("digits_round_trip");
    let perfect = residue && semiperfect_level(ring, q, n)?;
    for d in &digit_tuples {
        let x = w.pi_series(&d.coords)?;
        let wit = || format!("digits {}", w.format(d));
        if residue {
            let mut ok = true;
            for (j, (c, b)) in x.coords.iter().zip(&d.coords).enumerate() {
                ok &= *c == ring.pow(b, q.pow(j as u32))?;
            }
            closed.record(ok, wit);
        }
        if d.coords[1..].iter().all(|c| ring.is_zero(c)) {
            teich.record(x == w.teichmuller(d.coords[0].clone(), n), wit);
        }
        if perfect {
            round.record(w.pi_series_inverse(&x)? == d.coords, wit);
        }
        images.insert(x);
    }
    let mut out = Vec::new();
    if residue {
        closed.note(format!("(b_0, b_1^q, ..) with q = {q}"));
        out.push(closed.finish());
    }
    out.push(teich.finish());
    let total = (base.len() as u64).pow(n as u32);
    let mut bij = Check::new("bijection");
    if perfect {
        bij.record(images.len() as u64 == total, || format!("{} distinct images of {total} digit tuples", images.len()));
        bij.note(format!("|B|^n = {total}, |W_n(B)| = {total}, |image| = {}", images.len()));
        out.push(bij.finish());
        out.push(round.finish());
    } else {
        let mut c = Check::new("digits_need_roots");
        let probe = digit_tuples.iter().map(|d| w.pi_series_inverse(d)).find(|r| r.is_err());
        c.record(probe.is_some() || !residue, || "every vector has digits".into());
        c.note("coefficient ring lacks q-th roots; bijectivity is not expected");
        out.push(c.finish());
    }
    Ok(out)
}

fn drinfeld_identities<R: CoeffRing>(
    dm: &DrinfeldMap<R>,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Property>, VerifyError> {
    let ext = dm.extension().clone();
    let (base, top) = (dm.base(), dm.top());
    let ring = top.ring();
    let r = ext.residue_degree();
    let (elems, exhaustive) = witt_domain(base, n, samples, rng);
    let u = |x: &Vector<R>| dm.u_upto(x, n);
    let mut tau = Check::new("u_teichmuller");
    let coeffs: Vec<R::Elem> = match ring.elements() {
        Some(all) if all.len() <= PAIR_LIMIT => all,
        _ => (0..samples).map(|_| ring.random_element(rng)).collect(),
    };
    for b in &coeffs {
        let img = u(&base.teichmuller(b.clone(), n))?;
        tau.record(agree(&img, &top.teichmuller(b.clone(), n)), || ring.format(b));
    }
    let mut frob = Check::new("u_frobenius");
    let mut vf = Check::new("u_verschiebung");
    let mut lin = Check::new("u_o_linear");
    let scalars = test_scalars(ext.base());
    let ratio = ext.pi_over_varpi().clone();
    for x in &elems {
        let wit = || base.format(x);
        let ux = u(x)?;
        frob.record(agree(&u(&base.frobenius_pow(x, r)?)?, &top.frobenius(&ux)?), wit);
        let lhs = u(&base.verschiebung(x))?;
        let rhs = top.scalar(&ratio, &top.verschiebung(&u(&base.frobenius_pow(x, r - 1)?)?))?;
        vf.record(agree(&lhs, &rhs), wit);
        for lambda in &scalars {
            let lhs = u(&base.scalar(lambda, x)?)?;
            let rhs = top.scalar(&ext.map(lambda), &ux)?;
            lin.record(agree(&lhs, &rhs), || format!("lambda = {lambda}, x = {}", base.format(x)));
        }
    }
    let mut hom = Check::new("u_ring_homomorphism");
    for (i, j) in index_pairs(elems.len(), PAIR_LIMIT, rng) {
        let (x, y) = (&elems[i], &elems[j]);
        let (ux, uy) = (u(x)?, u(y)?);
        let ok = agree(&u(&base.add(x, y)?)?, &top.add(&ux, &uy)?) && agree(&u(&base.mul(x, y)?)?, &top.mul(&ux, &uy)?);
        hom.record(ok, || format!("x = {}, y = {}", base.format(x), base.format(y)));
    }
    let cov = coverage(exhaustive, elems.len());
    let mut out: Vec<Property> = [tau, frob, vf, lin, hom]
        .into_iter()
        .map(|mut c| {
            c.note(cov.clone());
            c.finish()
        })
        .collect();
    if r == 1 && dm.eisenstein_over_base().is_ok() {
        out.extend(u_ra_identities(dm, n, samples, rng)?);
    }
    Ok(out)
}

fn u_ra_identities<R: CoeffRing>(
    dm: &DrinfeldMap<R>,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Property>, VerifyError> {
    let (base, top) = (dm.base(), dm.top());
    let ring = top.ring();
    let e = dm.extension().ramification();
    // Output lengths past n need ghost polynomials of degree q^n and beyond.
    let cap = n;
    let varpi = LocalElem::uniformizer(top.spec(), top.spec().max_precision());
    let mut slots = Check::new("u_ra_on_teichmuller_slots");
    let coeffs: Vec<R::Elem> = match ring.elements() {
        Some(all) if all.len() <= PAIR_LIMIT => all,
        _ => (0..samples).map(|_| ring.random_element(rng)).collect(),
    };
    for b in &coeffs {
        for i in 0..e {
            let mut t = vec![base.zero(n); e];
            t[i] = base.teichmuller(b.clone(), n);
            let img = dm.u_ra_upto(&t, cap)?;
            let mut want = top.teichmuller(b.clone(), img.len());
            for _ in 0..i {
                want = top.scalar(&varpi, &want)?;
            }
            slots.record(img == want, || format!("b = {}, slot {i}", ring.format(b)));
        }
    }
    let mut hom = Check::new("u_ra_ring_homomorphism");
    for _ in 0..samples.min(PAIR_LIMIT) {
        let s: Vec<Vector<R>> = (0..e).map(|_| base.random(n, rng)).collect();
        let t: Vec<Vector<R>> = (0..e).map(|_| base.random(n, rng)).collect();
        let (us, ut) = (dm.u_ra_upto(&s, cap)?, dm.u_ra_upto(&t, cap)?);
        let sum = dm.u_ra_upto(&dm.ra_add(&s, &t)?, cap)?;
        let prod = dm.u_ra_upto(&dm.ra_mul(&s, &t)?, cap)?;
        let ok = agree(&sum, &top.add(&us, &ut)?) && agree(&prod, &top.mul(&us, &ut)?);
        let fmt = |v: &[Vector<R>]| v.iter().map(|x| base.format(x)).collect::<Vec<_>>().join(" + varpi * ");
        hom.record(ok, || format!("s = {}, t = {}", fmt(&s), fmt(&t)));
    }
    hom.note(format!("{} random tensor pairs", samples.min(PAIR_LIMIT)));
    Ok(vec![slots.finish(), hom.finish()])
}

#[allow(clippy::too_many_arguments)]
fn tower_check<R: CoeffRing>(
    lower: &Arc<Extension>,
    upper: &Arc<Extension>,
    direct: &Arc<Extension>,
    ring: R,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Property, VerifyError> {
    let mut c = Check::new("tower_composition");
    let sym_n = n;
    c.record(tower_composition_holds(lower, upper, direct, sym_n)?, || {
        format!("symbolic composition differs at length {sym_n}")
    });
    c.note(format!("symbolic composition at length {sym_n}"));
    let alg = OAlgebra::natural(ring, direct.top())?;
    let d_direct = DrinfeldMap::new(direct, alg.clone())?;
    let d_upper = DrinfeldMap::new(upper, alg.clone())?;
    let d_lower = DrinfeldMap::new(lower, alg.restrict(upper)?)?;
    let (elems, exhaustive) = witt_domain(d_direct.base(), n, samples, rng);
    for x in &elems {
        let two_step = d_upper.u_upto(&d_lower.u_upto(x, n)?, n)?;
        c.record(agree(&two_step, &d_direct.u_upto(x, n)?), || d_direct.base().format(x));
    }
    c.note(coverage(exhaustive, elems.len()));
    Ok(c.finish())
}

fn kernel_unram_suite<R: CoeffRing>(
    dm: &DrinfeldMap<R>,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Property>, VerifyError> {
    let ext = dm.extension().clone();
    if ext.ramification() != 1 {
        return Err(VerifyError::Input("drinfeld-kernel-unram needs an unramified extension".into()));
    }
    let (base, top) = (dm.base(), dm.top());
    let ring = top.ring();
    let q = ext.base().q();
    let r = ext.residue_degree() as u32;
    let residue = top.algebra().is_residue();
    let mut out = Vec::new();
    let mut sym = Check::new("closed_form_symbolic");
    let bad = unramified_closed_form_failures(&ext, n)?;
    sym.record(bad.is_empty(), || format!("coordinates {bad:?}"));
    out.push(sym.finish());
    let exps: Vec<u64> = (0..n).map(|i| q.pow(i as u32 * (r - 1))).collect();
    let mut closed = Check::new("closed_form_values");
    let full = |x: &Vector<R>| -> Result<Vector<R>, VerifyError> {
        let y = dm.u_upto(x, n)?;
        if y.len() < n {
            return Err(VerifyError::Input(format!("u reaches only length {} from length {n}", y.len())));
        }
        Ok(y)
    };
    match base.elements(n).filter(|all| all.len() <= ENUM_LIMIT) {
        Some(all) => {
            let mut ker = Check::new("kernel_equals_locus");
            let mut kernel_size = 0usize;
            for x in &all {
                let y = full(x)?;
                if residue {
                    let mut ok = true;
                    for (m, (c, b)) in y.coords.iter().zip(&x.coords).enumerate() {
                        ok &= *c == ring.pow(b, exps[m])?;
                    }
                    closed.record(ok, || base.format(x));
                }
                let in_kernel = top.is_zero(&y);
                let mut in_locus = true;
                for (b, &k) in x.coords.iter().zip(&exps) {
                    in_locus &= ring.is_zero(&ring.pow(b, k)?);
                }
                kernel_size += in_kernel as usize;
                ker.record(in_kernel == in_locus, || {
                    format!("{} (in kernel: {in_kernel}, in locus: {in_locus})", base.format(x))
                });
            }
            let gens: Vec<String> = exps.iter().enumerate().map(|(i, k)| format!("b_{i}^{k}")).collect();
            ker.note(format!("enumerated {} vectors; |kernel| = {kernel_size}; generators {}", all.len(), gens.join(", ")));
            out.push(ker.finish());
            let mut wit = Check::new("verschiebung_witness");
            let p = ring.prime();
            let nil: Vec<R::Elem> = ring
                .elements()
                .into_iter()
                .flatten()
                .filter(|b| !ring.is_zero(b) && ring.pow(b, p).map(|c| ring.is_zero(&c)).unwrap_or(false))
                .collect();
            if r > 1 && n > 1 {
                for b in nil.iter().take(PAIR_LIMIT) {
                    let v = base.verschiebung(&base.teichmuller(b.clone(), n - 1));
                    wit.record(top.is_zero(&full(&v)?), || ring.format(b));
                }
                if wit.checked > 0 {
                    out.push(wit.finish());
                }
            }
        }
        None => {
            let mut inj = Check::new("injective_on_sample");
            let mut seen = HashMap::new();
            let mut drawn = 0usize;
            let mut budget = DrawBudget::new(samples);
            while drawn < samples {
                let x = base.random(n, rng);
                budget.spend()?;
                if seen.contains_key(&x) {
                    continue;
                }
                drawn += 1;
                let y = full(&x)?;
                if residue {
                    let mut ok = true;
                    for (m, (c, b)) in y.coords.iter().zip(&x.coords).enumerate() {
                        ok &= *c == ring.pow(b, exps[m])?;
                    }
                    closed.record(ok, || base.format(&x));
                }
                seen.insert(x, y);
            }
            let mut images: HashMap<&Vector<R>, &Vector<R>> = HashMap::new();
            for (x, y) in &seen {
                let clash = images.insert(y, x);
                inj.record(clash.is_none(), || format!("{} and {}", base.format(x), base.format(clash.unwrap())));
            }
            inj.note(format!("{drawn} distinct random vectors over {}", ring.describe()));
            out.push(inj.finish());
        }
    }
    if residue {
        out.push(closed.finish());
    }
    Ok(out)
}

fn kernel_ram_suite(ext: &Arc<Extension>, s_max: usize) -> Result<Vec<Property>, VerifyError> {
    if ext.residue_degree() != 1 {
        return Err(VerifyError::Input("drinfeld-kernel-ram needs a totally ramified extension".into()));
    }
    let fam = FamilyCache::global().get(&FamilyKind::DrinfeldURa, &FamilySource::Extension(ext.clone()), s_max + 1).map_err(WittError::from)?;
    let mut ghost = Check::new("u_ra_ghost_identity");
    let res = fam.check_ghost_identity();
    ghost.record(res.is_ok(), || format!("first failing coordinate {}", res.unwrap_err()));
    let mut c = Check::new("kernel_congruence");
    for row in kernel_congruence(ext, s_max)? {
        c.record(row.ok, || format!("s = {}: residue {} expected {}", row.s, row.residue, row.expected));
        c.note(format!("s = {} (n = {}, i = {}): {}", row.s, row.n, row.i, row.residue));
    }
    Ok(vec![ghost.finish(), c.finish()])
}

fn u2_support_suite<R: CoeffRing>(
    dm: &DrinfeldMap<R>,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Property>, VerifyError> {
    let ext = dm.extension().clone();
    if ext.residue_degree() != 1 {
        return Err(VerifyError::Input("u2-support needs a totally ramified extension".into()));
    }
    let e = ext.ramification();
    let q = ext.base().q();
    let (base, top) = (dm.base(), dm.top());
    let ring = top.ring();
    let mut sym = Check::new("support_symbolic");
    for row in ramified_support(&ext, n)? {
        sym.record(row.ok, || format!("m = {}: residue {} expected {}", row.m, row.residue, row.expected));
        sym.note(format!("u_{} = {} mod varpi", row.m, row.residue));
    }
    let mut out = vec![sym.finish()];
    if !top.algebra().is_residue() {
        return Ok(out);
    }
    let alpha = top.algebra().map_local(ext.unit_ratio());
    let (elems, exhaustive) = witt_domain(base, n, samples, rng);
    let mut support = Check::new("support_on_multiples_of_e");
    let mut values = Check::new("values_on_multiples_of_e");
    for x in &elems {
        let y = dm.u_upto(x, n)?;
        let mut zero_off = y.len() == n;
        let mut vals = true;
        for (m, c) in y.coords.iter().enumerate() {
            if m % e != 0 {
                zero_off &= ring.is_zero(c);
            } else {
                let j = m / e;
                let want = ring.mul(&ring.pow(&alpha, j as u64)?, &ring.pow(&x.coords[j], q.pow((j * (e - 1)) as u32))?)?;
                vals &= *c == want;
            }
        }
        support.record(zero_off, || base.format(x));
        values.record(vals, || base.format(x));
    }
    let cov = coverage(exhaustive, elems.len());
    for mut c in [support, values] {
        c.note(cov.clone());
        out.push(c.finish());
    }
    if !exhaustive {
        out.push(u_injective_on_sample(dm, n, samples, rng)?);
    }
    Ok(out)
}

/// Distinct random vectors of length `n` have distinct images under `u`
/// read at full matched length. Only meaningful over reduced rings.
fn u_injective_on_sample<R: CoeffRing>(
    dm: &DrinfeldMap<R>,
    n: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Property, VerifyError> {
    let base = dm.base();
    let mut seen = HashMap::new();
    let mut budget = DrawBudget::new(samples);
    while seen.len() < samples {
        let x = base.random(n, rng);
        budget.spend()?;
        if let Entry::Vacant(slot) = seen.entry(x) {
            let y = dm.u_max(slot.key())?;
            slot.insert(y);
        }
    }
    let mut inj = Check::new("injective_on_sample");
    let mut images: HashMap<&Vector<R>, &Vector<R>> = HashMap::new();
    for (x, y) in &seen {
        let clash = images.insert(y, x);
        inj.record(clash.is_none(), || format!("{} and {}", base.format(x), base.format(clash.unwrap())));
    }
    inj.note(format!(
        "{} distinct random vectors over {}, images of length {}",
        seen.len(),
        dm.top().ring().describe(),
        dm.matched_len(n)
    ));
    Ok(inj.finish())
}

fn greenberg_domain<R: CoeffRing>(g: &GreenbergRing<R>, m: usize, samples: usize, rng: &mut ChaCha8Rng) -> (Vec<GreenbergElem<R::Elem>>, bool) {
    match g.elements(m) {
        Some(all) if all.len() <= ENUM_LIMIT => (all, true),
        _ => ((0..samples).map(|_| g.random(m, rng)).collect(), false),
    }
}

fn greenberg_ops<R: CoeffRing>(g: &GreenbergRing<R>, m: usize) -> RingOps<'_, GreenbergElem<R::Elem>> {
    RingOps {
        zero: g.zero(m),
        one: g.one(m),
        add: Box::new(move |x, y| g.add(x, y)),
        mul: Box::new(move |x, y| g.mul(x, y)),
        neg: Box::new(move |x| g.neg(x)),
        fmt: Box::new(move |x| g.format(x)),
    }
}

fn greenberg_ring_suite<R: CoeffRing>(g: &GreenbergRing<R>, m: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, VerifyError> {
    let (elems, exhaustive) = greenberg_domain(g, m, samples, rng);
    let mut out = ring_axioms(&greenberg_ops(g, m), &elems, exhaustive, rng)?;
    let w = g.ptypical();
    let coeffs = g.fpi_witt(m)?;
    let mut f_of_t = Check::new("t_class_satisfies_f_pi");
    let t = g.t_class(m)?;
    let e = g.e();
    let mut acc = g.one(m);
    let mut t_pow = g.one(m);
    acc.parts[0] = coeffs[0].clone();
    for a in coeffs.iter().skip(1) {
        t_pow = g.mul(&t_pow, &t)?;
        let mut term = g.zero(m);
        term.parts[0] = a.clone();
        acc = g.add(&acc, &g.mul(&term, &t_pow)?)?;
    }
    let t_e = g.mul(&t_pow, &t)?;
    let value = g.add(&acc, &t_e)?;
    f_of_t.record(value == g.zero(m), || format!("f_pi(T) = {}", g.format(&value)));
    out.push(f_of_t.finish());
    let mut conv = Check::new("f_pi_coefficients_round_trip");
    let unram = g.unramified().clone();
    let prec = unram.max_precision();
    for (t, row) in g.spec().descriptor().eisenstein[..e].iter().enumerate() {
        let a = LocalElem::from_signed(&unram, row, prec);
        let digits = a.unram_to_witt_coords(m)?;
        let back = LocalElem::from_witt_coords(&unram, &digits);
        conv.record(back == a, || format!("a_{t} = {a}"));
        conv.note(format!("a_{t} = {a} -> {}", w.format(&coeffs[t])));
    }
    out.push(conv.finish());
    let mut unit = Check::new("one_is_neutral");
    let one = g.one(m);
    for x in &elems {
        unit.record(g.mul(&one, x)? == *x, || g.format(x));
    }
    unit.note(coverage(exhaustive, elems.len()));
    out.push(unit.finish());
    Ok(out)
}

/// `O/pi^n -> W_{O,n}(k)` through the structure map, with its table when small.
fn structure_map_check(spec: &Arc<LocalFieldSpec>, n: usize, rng: &mut ChaCha8Rng) -> Result<Property, VerifyError> {
    let mut c = Check::new("structure_map_isomorphism");
    let k = spec.residue_field().clone();
    let w = WittRing::new(OAlgebra::residue(k, spec)?);
    let quotient = LocalRing::new(spec, n as u32);
    let Some(elems) = quotient.elements().filter(|e| e.len() <= PAIR_LIMIT) else {
        c.note(format!("O/pi^{n} too large to enumerate"));
        return Ok(c.finish());
    };
    let lambdas: Vec<LocalElem> = elems.iter().map(|x| quotient.to_local(x)).collect();
    let images: Vec<Vector<FiniteFieldRing>> = lambdas.iter().map(|l| w.from_scalar(l, n)).collect::<Result<_, _>>()?;
    let distinct: HashSet<_> = images.iter().collect();
    let total = w.elements(n).map_or(0, |v| v.len());
    c.record(distinct.len() == elems.len() && total == elems.len(), || {
        format!("|O/pi^{n}| = {}, |image| = {}, |W| = {total}", elems.len(), distinct.len())
    });
    for (i, j) in index_pairs(elems.len(), PAIR_LIMIT, rng) {
        let sum = w.from_scalar(&lambdas[i].add(&lambdas[j]), n)?;
        let prod = w.from_scalar(&lambdas[i].mul(&lambdas[j]), n)?;
        let ok = sum == w.add(&images[i], &images[j])? && prod == w.mul(&images[i], &images[j])?;
        c.record(ok, || format!("{} and {}", lambdas[i], lambdas[j]));
    }
    c.note(format!("|O/pi^{n}| = {} = |W_{n}(k)| = {total}", elems.len()));
    if elems.len() <= 16 {
        for (l, img) in lambdas.iter().zip(&images) {
            c.note(format!("{} -> {}", spec.format_coords(l.coords(), n as u32), w.format(img)));
        }
    }
    Ok(c.finish())
}

type FiniteFieldRing = crate::local_ring::FiniteField;

fn r_hom_checks<R: CoeffRing>(
    g: &GreenbergRing<R>,
    elems: &[GreenbergElem<R::Elem>],
    images: &[WittVector<R::Elem>],
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Property>, VerifyError> {
    let w = g.target();
    let m = elems[0].len();
    let n = m * g.e();
    let mut hom = Check::new("r_ring_homomorphism");
    for (i, j) in index_pairs(elems.len(), samples.min(PAIR_LIMIT), rng) {
        let (x, y) = (&elems[i], &elems[j]);
        let ok = g.r_matched(&g.add(x, y)?)? == w.add(&images[i], &images[j])?
            && g.r_matched(&g.mul(x, y)?)? == w.mul(&images[i], &images[j])?;
        hom.record(ok, || format!("x = {}, y = {}", g.format(x), g.format(y)));
    }
    let mut units = Check::new("r_unit_and_uniformizer");
    let pi = LocalElem::uniformizer(g.spec(), g.spec().max_precision());
    units.record(g.r_matched(&g.one(m))? == w.one(n), || "r(1) != 1".into());
    units.record(g.r_matched(&g.t_class(m)?)? == w.from_scalar(&pi, n)?, || "r(T) != pi".into());
    let mut lin = Check::new("r_o_linear");
    let k = g.spec().residue_field().clone();
    let alg = g.target().algebra();
    let p_typ = g.ptypical();
    let t = g.t_class(m)?;
    for a in k.elements().take(4) {
        let mut lifted = g.zero(m);
        lifted.parts[0] = p_typ.teichmuller(alg.map_residue(a), m);
        let lambda = LocalElem::teichmuller(g.spec(), a, g.spec().max_precision());
        for (x, rx) in elems.iter().zip(images).take(samples.min(PAIR_LIMIT)) {
            let ok = g.r_matched(&g.mul(&lifted, x)?)? == w.scalar(&lambda, rx)?
                && g.r_matched(&g.mul(&t, x)?)? == w.scalar(&pi, rx)?;
            lin.record(ok, || format!("[{}] and T acting on {}", k.format(a), g.format(x)));
        }
    }
    lin.note("Teichmuller lifts of k and T generate O");
    Ok(vec![hom.finish(), units.finish(), lin.finish()])
}

fn r_bijectivity_suite<R: CoeffRing>(g: &GreenbergRing<R>, m: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Property>, VerifyError> {
    let n = m * g.e();
    let w = g.target();
    let ring = g.ring();
    let mut out = vec![structure_map_check(g.spec(), n, rng)?];
    match g.elements(m).filter(|all| all.len() <= ENUM_LIMIT) {
        Some(all) => {
            let q = g.spec().q();
            if !semiperfect_level(ring, q, n)? {
                return Err(VerifyError::Input(format!(
                    "{} is not perfect; use r-kernel for non-reduced rings",
                    ring.describe()
                )));
            }
            let images: Vec<_> = all.iter().map(|x| g.r_matched(x)).collect::<Result<_, _>>()?;
            let distinct: HashSet<_> = images.iter().collect();
            let target = w.elements(n).map_or(0, |v| v.len());
            let mut inj = Check::new("r_injective");
            inj.record(distinct.len() == all.len(), || format!("{} distinct images of {}", distinct.len(), all.len()));
            let mut surj = Check::new("r_surjective");
            surj.record(distinct.len() == target, || format!("image has {} of {target} vectors", distinct.len()));
            let table = format!("|R_{n}(A)| = {}, |W_{n}(A)| = {target}, |image| = {}", all.len(), distinct.len());
            inj.note(table.clone());
            surj.note(table);
            out.push(inj.finish());
            out.push(surj.finish());
            out.extend(r_hom_checks(g, &all, &images, samples, rng)?);
        }
        None => {
            let mut inj = Check::new("r_injective_on_sample");
            let mut seen: HashMap<GreenbergElem<R::Elem>, WittVector<R::Elem>> = HashMap::new();
            let mut budget = DrawBudget::new(samples);
            while seen.len() < samples {
                let x = g.random(m, rng);
                budget.spend()?;
                if let Entry::Vacant(slot) = seen.entry(x) {
                    let y = g.r_matched(slot.key())?;
                    slot.insert(y);
                }
            }
            let mut images: HashMap<&WittVector<R::Elem>, &GreenbergElem<R::Elem>> = HashMap::new();
            for (x, y) in &seen {
                let clash = images.insert(y, x);
                inj.record(clash.is_none(), || format!("{} and {}", g.format(x), g.format(clash.unwrap())));
            }
            inj.note(format!("{} distinct random elements over {}", seen.len(), ring.describe()));
            out.push(inj.finish());
            let (elems, images): (Vec<_>, Vec<_>) = seen.into_iter().take(PAIR_LIMIT).unzip();
            out.extend(r_hom_checks(g, &elems, &images, samples.min(64), rng)?);
        }
    }
    Ok(out)
}

fn r_kernel_suite<R: CoeffRing>(g: &GreenbergRing<R>, m: usize) -> Result<Vec<Property>, VerifyError> {
    let all = g
        .elements(m)
        .filter(|all| all.len() <= ENUM_LIMIT)
        .ok_or_else(|| VerifyError::Input("r-kernel enumerates R_{me}(A) and needs a small finite ring".into()))?;
    let e = g.e();
    let n = m * e;
    let images: Vec<_> = all.iter().map(|x| g.r_matched(x)).collect::<Result<_, _>>()?;
    let w = g.target();
    let ring = g.ring();
    let mut out = Vec::new();
    let mut exps = Check::new("kernel_generators");
    for s in 0..n {
        exps.note(format!("x_{{{},{}}}^{}", s / e, s % e, g.kernel_exponent(s / e, s % e)));
    }
    exps.record(true, String::new);
    out.push(exps.finish());
    for len in 1..=n {
        let mut c = Check::new(format!("kernel_equals_locus_at_length_{len}"));
        let mut size = 0usize;
        for (x, y) in all.iter().zip(&images) {
            let in_kernel = y.coords[..len].iter().all(|c| ring.is_zero(c));
            let in_locus = g.in_kernel_locus(x, len)?;
            size += in_kernel as usize;
            c.record(in_kernel == in_locus, || {
                format!("{} (in kernel: {in_kernel}, in locus: {in_locus})", g.format(x))
            });
        }
        c.note(format!("enumerated {} elements; |kernel| = {size}", all.len()));
        out.push(c.finish());
    }
    let reduced = ring
        .elements()
        .into_iter()
        .flatten()
        .all(|a| ring.is_zero(&a) || !ring.is_zero(&ring.pow(&a, ring.prime()).unwrap_or_else(|_| ring.one())));
    if reduced {
        let mut triv = Check::new("kernel_trivial_for_reduced_ring");
        let zero = w.zero(n);
        let count = images.iter().filter(|y| **y == zero).count();
        triv.record(count == 1, || format!("{count} elements map to zero"));
        out.push(triv.finish());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_default(suite: Suite) -> VerifyReport {
        let report = run(suite, &VerifyParams::default()).unwrap();
        assert!(report.passed, "{}", report.to_text());
        report
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn cheap_suites_pass_with_defaults() {
        for s in [Suite::Ghost, Suite::RingAxioms, Suite::FvIdentities, Suite::PiSeries, Suite::GreenbergRing] {
            run_default(s);
        }
    }

    #[test]
    fn kernel_ram_lists_residues() {
        let params = VerifyParams {
            s_max: Some(3),
            ..Default::default()
        };
        let report = run(Suite::DrinfeldKernelRam, &params).unwrap();
        assert!(report.passed, "{}", report.to_text());
        let notes = &report.properties[1].notes;
        assert!(notes.iter().any(|n| n.ends_with("X1_1^4")), "{notes:?}");
    }

    #[test]
    fn failing_property_carries_witness() {
        let mut c = Check::new("demo");
        c.record(true, || unreachable!());
        c.record(false, || "x = 1".into());
        let p = c.finish();
        assert!(!p.passed);
        assert_eq!(p.witnesses, vec!["x = 1".to_string()]);
    }
}
