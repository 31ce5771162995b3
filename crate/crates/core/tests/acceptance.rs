//! Acceptance criteria for the library. Each criterion prints one
//! `PASS`/`FAIL` line with its runtime; the test fails if any line fails.

use std::fs;
use std::sync::Arc;
use std::time::{Duration, Instant};

use wittlab_core::coeff_ring::InstanceDescriptor;
use wittlab_core::local_ring::{LocalFieldSpec, SpecDescriptor};
use wittlab_core::verify::{self, Suite, VerifyParams, VerifyReport};
use wittlab_core::witt::{CacheEntry, FamilyCache, FamilyKind, FamilySource};

const PRECISION: u32 = 8;
const SEED: u64 = 0;

type Outcome = Result<Vec<String>, String>;

fn z2() -> Arc<LocalFieldSpec> {
    LocalFieldSpec::zp(2, PRECISION).unwrap()
}

fn z3() -> Arc<LocalFieldSpec> {
    LocalFieldSpec::zp(3, PRECISION).unwrap()
}

fn wf4() -> Arc<LocalFieldSpec> {
    LocalFieldSpec::unramified(2, 2, PRECISION).unwrap()
}

/// `Z_2[pi]/(pi^e - 2)`.
fn z2_root(e: usize) -> Arc<LocalFieldSpec> {
    LocalFieldSpec::new(SpecDescriptor::pure_root(2, 1, e, PRECISION).unwrap()).unwrap()
}

fn inst(text: &str) -> InstanceDescriptor {
    text.parse().unwrap()
}

fn bounded(sample_degree: u32) -> InstanceDescriptor {
    InstanceDescriptor::BoundedPoly {
        p: 2,
        d: 1,
        var: "x".into(),
        cap: 64,
        sample_degree,
    }
}

fn params(spec: Option<Arc<LocalFieldSpec>>, instance: Option<InstanceDescriptor>, n: Option<usize>) -> VerifyParams {
    VerifyParams {
        spec,
        instance,
        n,
        seed: SEED,
        ..VerifyParams::default()
    }
}

/// Runs a suite and turns failed properties into an error listing them.
fn suite(s: Suite, p: VerifyParams, label: &str) -> Result<VerifyReport, String> {
    let report = verify::run(s, &p).map_err(|e| format!("{label}: {e}"))?;
    if report.passed {
        return Ok(report);
    }
    let bad: Vec<String> = report
        .properties
        .iter()
        .filter(|x| !x.passed)
        .map(|x| format!("{} ({} of {} failed) {:?}", x.name, x.failures, x.checked, x.witnesses))
        .collect();
    Err(format!("{label}: {}", bad.join("; ")))
}

fn summary(label: &str, r: &VerifyReport) -> String {
    let checked: u64 = r.properties.iter().map(|p| p.checked).sum();
    format!("{label}: {} properties, {checked} checks", r.properties.len())
}

fn property<'a>(r: &'a VerifyReport, name: &str) -> Result<&'a verify::Property, String> {
    r.properties
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| format!("{} has no property {name}", r.suite))
}

fn ghost_master() -> Outcome {
    let mut out = Vec::new();
    for (label, spec) in [("Z_2", z2()), ("Z_3", z3()), ("Z_2[pi]/(pi^2-2)", z2_root(2)), ("W(F_4)", wf4())] {
        let r = suite(Suite::Ghost, params(Some(spec), None, Some(4)), label)?;
        out.push(summary(label, &r));
    }
    Ok(out)
}

fn classical_values() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = FamilySource::Local(z2());
    let expected = [
        (FamilyKind::Sum, "X1 + Y1 - X0*Y0"),
        (FamilyKind::Prod, "2*X1*Y1 + X0^2*Y1 + X1*Y0^2"),
    ];
    let writer = FamilyCache::with_dir(dir.path());
    for (kind, _) in &expected {
        writer.get(kind, &src, 2).map_err(|e| e.to_string())?;
    }
    // A fresh cache over the same directory reads the stored entries.
    let reader = FamilyCache::with_dir(dir.path());
    let mut out = Vec::new();
    for (kind, want) in &expected {
        let fam = reader.get(kind, &src, 2).map_err(|e| e.to_string())?;
        let got = fam.format_poly(1);
        if got != *want {
            return Err(format!("{}_1 = {got}, expected {want}", kind.name()));
        }
        out.push(format!("{}_1 = {got}", kind.name()));
    }
    let mut stored = 0;
    for entry in fs::read_dir(dir.path()).map_err(|e| e.to_string())? {
        let sub = entry.map_err(|e| e.to_string())?.path();
        let text = fs::read_to_string(sub.join("n2.json")).map_err(|e| e.to_string())?;
        let entry: CacheEntry = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let fam = entry.load().ok_or("stored entry fails its hash check")?;
        let live = reader.get(fam.kind(), &src, 2).map_err(|e| e.to_string())?;
        if fam.to_json() != live.to_json() {
            return Err(format!("stored {} differs from the served family", fam.kind().name()));
        }
        stored += 1;
    }
    if stored != expected.len() {
        return Err(format!("{stored} cache entries on disk, expected {}", expected.len()));
    }
    out.push(format!("{stored} disk entries match byte for byte"));
    Ok(out)
}

fn fv_identities() -> Outcome {
    let mut out = Vec::new();
    for text in ["F4", "F2[x]/(x^2)"] {
        let r = suite(Suite::FvIdentities, params(None, Some(inst(text)), Some(3)), text)?;
        let p = property(&r, "f_after_v_is_pi")?;
        if p.checked != 64 {
            return Err(format!("{text}: FV = pi checked on {} vectors, expected 64", p.checked));
        }
        out.push(summary(text, &r));
    }
    Ok(out)
}

fn gluing() -> Outcome {
    let r = suite(Suite::Glue, params(None, Some(inst("F2[x]/(x^2)")), Some(4)), "glue")?;
    Ok(vec![summary("F2[x]/(x^2), n = 4", &r)])
}

fn pi_series() -> Outcome {
    let r = suite(Suite::PiSeries, params(None, Some(inst("F4")), Some(2)), "pi-series")?;
    let checked = r.properties.iter().map(|p| p.checked).max().unwrap_or(0);
    if checked != 16 {
        return Err(format!("expected 16 digit pairs, saw {checked}"));
    }
    Ok(vec![summary("F4, n = 2", &r)])
}

fn drinfeld_identities() -> Outcome {
    let r = suite(Suite::DrinfeldIdentities, params(None, Some(inst("F4")), Some(3)), "drinfeld")?;
    Ok(vec![summary("F4, n = 3, unramified, ramified, composite", &r)])
}

fn unramified_kernel() -> Outcome {
    let closed = suite(Suite::DrinfeldKernelUnram, params(None, Some(inst("F4")), Some(3)), "F4")?;
    property(&closed, "closed_form_values")?;
    let kernel = suite(Suite::DrinfeldKernelUnram, params(None, Some(inst("F4[x]/(x^2)")), Some(2)), "F4[x]/(x^2)")?;
    Ok(vec![summary("closed form on F4", &closed), summary("kernel on F4[x]/(x^2), n = 2", &kernel)])
}

fn ramified_kernel() -> Outcome {
    let p = VerifyParams {
        spec: Some(z2()),
        e: Some(2),
        s_max: Some(4),
        seed: SEED,
        ..VerifyParams::default()
    };
    let r = suite(Suite::DrinfeldKernelRam, p, "kernel-ram")?;
    let rows: usize = r.properties.iter().map(|p| p.notes.len()).sum();
    Ok(vec![format!("p = 2, e = 2, s <= 4: {rows} congruence rows")])
}

fn u2_support() -> Outcome {
    let r = suite(Suite::U2Support, params(None, None, Some(4)), "u2-support")?;
    Ok(vec![summary("F2 and F2[x]/(x^2), n = 4", &r)])
}

fn greenberg() -> Outcome {
    let mut out = Vec::new();
    let iso = suite(Suite::RBijectivity, params(Some(z2_root(2)), Some(inst("F2")), Some(1)), "O/pi^2")?;
    let table = property(&iso, "structure_map_isomorphism")?;
    let rows = table.notes.iter().filter(|n| n.contains("->")).count();
    if rows != 4 {
        return Err(format!("isomorphism table has {rows} rows, expected 4"));
    }
    out.push(format!("W_2(F2) = O/pi^2: {}", table.notes[1..].join(", ")));
    let bij = suite(Suite::RBijectivity, params(Some(z2_root(2)), Some(inst("F4")), Some(2)), "r on F4")?;
    property(&bij, "r_surjective")?;
    out.push(summary("r bijective on F4", &bij));
    // h = 2 needs an F_4-algebra, so the nilpotent test ring is F4[x]/(x^4).
    for (label, spec, a) in [("W(F4), A = F4[x]/(x^4)", wf4(), "F4[x]/(x^4)"), ("Z2[pi]/(pi^2-2), A = F2[x]/(x^4)", z2_root(2), "F2[x]/(x^4)")] {
        let r = suite(Suite::RKernel, params(Some(spec), Some(inst(a)), Some(2)), label)?;
        let gens = property(&r, "kernel_generators")?;
        out.push(format!("{label}: generators {}", gens.notes.join(", ")));
    }
    Ok(out)
}

fn injectivity() -> Outcome {
    let samples = Some(10_000);
    let u = VerifyParams {
        samples,
        ..params(None, Some(bounded(4)), Some(3))
    };
    let ru = suite(Suite::U2Support, u, "u_B")?;
    let pu = property(&ru, "injective_on_sample")?;
    // O = Z_2[pi]/(pi^3 - 2) and m = 1 give the matched length 3.
    let r = VerifyParams {
        samples,
        ..params(Some(z2_root(3)), Some(bounded(4)), Some(1))
    };
    let rr = suite(Suite::RBijectivity, r, "r_A")?;
    let pr = property(&rr, "r_injective_on_sample")?;
    for (label, p) in [("u_B", pu), ("r_A", pr)] {
        if p.checked != 10_000 {
            return Err(format!("{label}: {} samples, expected 10000", p.checked));
        }
    }
    Ok(vec![format!("u_B: {} distinct samples, r_A: {} distinct samples, no collisions", pu.checked, pr.checked)])
}

#[test]
fn acceptance() {
    let criteria: [(&str, Option<u64>, fn() -> Outcome); 11] = [
        ("1 ghost identities for Z_2, Z_3, Z_2[pi]/(pi^2-2), W(F_4), n <= 4", Some(10), ghost_master),
        ("2 classical S_1 and P_1 from the disk cache", None, classical_values),
        ("3 F/V/Teichmuller identities on W_3(F4) and W_3(F2[x]/(x^2))", Some(5), fv_identities),
        ("4 gluing and digit expansion at n = 4", None, gluing),
        ("5 pi-series bijection on F4^2", None, pi_series),
        ("6 Drinfeld identities and tower composition", Some(30), drinfeld_identities),
        ("7 unramified closed form and kernel", None, unramified_kernel),
        ("8 totally ramified kernel congruences", Some(60), ramified_kernel),
        ("9 support on multiples of e", None, u2_support),
        ("10 Greenberg comparison", None, greenberg),
        ("11 injectivity over F2[x]", None, injectivity),
    ];
    let mut failed = Vec::new();
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let over = limit.filter(|&s| elapsed > Duration::from_secs(s));
        let bound = limit.map_or(String::new(), |s| format!(" (limit {s} s)"));
        match (&result, over) {
            (Ok(lines), None) => {
                println!("PASS {name} [{} ms{bound}]", elapsed.as_millis());
                for l in lines {
                    println!("     {l}");
                }
            }
            (Ok(_), Some(s)) => {
                println!("FAIL {name} [{} ms, over the {s} s limit]", elapsed.as_millis());
                failed.push(name);
            }
            (Err(e), _) => {
                println!("FAIL {name} [{} ms{bound}]: {e}", elapsed.as_millis());
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
