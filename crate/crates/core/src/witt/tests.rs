use super::*;
use crate::coeff_ring::{make_instance, parse_elem, AnyRing, InstanceDescriptor};
use crate::local_ring::{ExtensionDescriptor, FiniteField, SpecDescriptor};
use proptest::prelude::*;

fn z2() -> Arc<LocalFieldSpec> {
    LocalFieldSpec::zp(2, 8).unwrap()
}

fn ram2() -> Arc<LocalFieldSpec> {
    LocalFieldSpec::new(SpecDescriptor::pure_root(2, 1, 2, 8).unwrap()).unwrap()
}

fn f4_ring(spec: &Arc<LocalFieldSpec>) -> WittRing<FiniteField> {
    let k = FiniteField::with_degree(2, 2).unwrap();
    WittRing::new(OAlgebra::residue(k, spec).unwrap())
}

fn poly_ring(desc: &str) -> MPolyRing<crate::local_ring::FiniteField> {
    match make_instance(&desc.parse::<InstanceDescriptor>().unwrap(), None).unwrap() {
        AnyRing::Poly(r) => r,
        _ => panic!("expected a polynomial ring"),
    }
}

#[test]
fn classical_sum_and_product() {
    let src = FamilySource::Local(z2());
    let sum = PolyFamily::compute(&FamilyKind::Sum, &src, 2).unwrap();
    assert_eq!(sum.format_poly(0), "X0 + Y0");
    assert_eq!(sum.format_poly(1), "X1 + Y1 - X0*Y0");
    let prod = PolyFamily::compute(&FamilyKind::Prod, &src, 2).unwrap();
    let ring = prod.ring_at(prod.precision(1));
    let expect = parse_elem(&ring, "X0^2*Y1 + X1*Y0^2 + 2*X1*Y1").unwrap();
    assert_eq!(*prod.poly(1), expect);
    assert_eq!(prod.check_ghost_identity(), Ok(()));
}

#[test]
fn families_satisfy_their_ghost_identities() {
    let specs = [z2(), ram2(), LocalFieldSpec::unramified(2, 2, 8).unwrap()];
    for spec in specs {
        let src = FamilySource::Local(spec.clone());
        for kind in [
            FamilyKind::Sum,
            FamilyKind::Prod,
            FamilyKind::Neg,
            FamilyKind::Frobenius,
            FamilyKind::Scalar { lambda: vec![3; spec.dim()] },
        ] {
            let fam = PolyFamily::compute(&kind, &src, 3).unwrap();
            assert_eq!(fam.check_ghost_identity(), Ok(()), "{kind:?} over {spec:?}");
        }
    }
}

#[test]
fn frobenius_is_q_power_mod_pi() {
    let spec = ram2();
    let fam = PolyFamily::compute(&FamilyKind::Frobenius, &FamilySource::Local(spec.clone()), 3).unwrap();
    for m in 0..3 {
        let units: Vec<_> = fam
            .poly(m)
            .terms
            .iter()
            .filter(|(_, c)| LocalElem::from_coords(&spec, c.clone(), 1).is_unit())
            .map(|(mono, _)| mono.clone())
            .collect();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].exps()[m], 2);
        assert_eq!(units[0].degree(), 2);
    }
}

#[test]
fn serialization_round_trips() {
    let src = FamilySource::Local(ram2());
    for kind in [FamilyKind::Prod, FamilyKind::Scalar { lambda: vec![1, 1] }] {
        let fam = PolyFamily::compute(&kind, &src, 3).unwrap();
        let text = fam.to_json();
        let back = PolyFamily::from_json(&text).unwrap();
        assert_eq!(back, fam);
        assert_eq!(back.to_json(), text);
    }
    assert!(PolyFamily::from_json("{}").is_err());
}

#[test]
fn cache_prefix_and_disk() {
    let dir = std::env::temp_dir().join(format!("wittlab-cache-test-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let src = FamilySource::Local(z2());
    let cache = FamilyCache::with_dir(&dir);
    let long = cache.get(&FamilyKind::Sum, &src, 3).unwrap();
    let short = cache.get(&FamilyKind::Sum, &src, 2).unwrap();
    assert_eq!(*short, PolyFamily::compute(&FamilyKind::Sum, &src, 2).unwrap());
    let fresh = FamilyCache::with_dir(&dir);
    assert_eq!(*fresh.get(&FamilyKind::Sum, &src, 3).unwrap(), *long);
    assert_eq!(*fresh.get(&FamilyKind::Sum, &src, 2).unwrap(), *short);

    // a tampered entry is rejected
    let entry_dir = std::fs::read_dir(&dir).unwrap().next().unwrap().unwrap().path();
    let file = entry_dir.join("n3.json");
    let text = std::fs::read_to_string(&file).unwrap();
    std::fs::write(&file, text.replacen("\\\"X1\\\":1", "\\\"X1\\\":2", 1)).unwrap();
    let err = FamilyCache::with_dir(&dir).get(&FamilyKind::Sum, &src, 3).unwrap_err();
    assert!(matches!(err, CacheError::Corrupted(_)), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ghost_components() {
    let w = f4_ring(&z2());
    let k = w.ring().clone();
    let b = k.generator();
    let g = w.ghost(&w.teichmuller(b, 3)).unwrap();
    assert_eq!(g, vec![b, k.pow(b, 2), k.pow(b, 4)]);
    // pi maps to zero, so only b_0 matters
    let g = w.ghost(&WittVector::new(vec![b, k.one(), b])).unwrap();
    assert_eq!(g, vec![b, k.pow(b, 2), k.pow(b, 4)]);

    let spec = z2();
    let lift = MPolyRing::new(LocalRing::new(&spec, 6), vec![]);
    let wl = WittRing::new(OAlgebra::lift(lift.clone(), &spec).unwrap());
    let g = wl.ghost(&WittVector::new(vec![lift.one(), lift.one()])).unwrap();
    assert_eq!(g, vec![lift.one(), lift.from_int(3)]);
}

#[test]
fn ramified_addition_over_f2() {
    let spec = ram2();
    let k = FiniteField::prime_field(2).unwrap();
    let w = WittRing::new(OAlgebra::residue(k.clone(), &spec).unwrap());
    let one = w.one(2);
    assert!(w.is_zero(&w.add(&one, &one).unwrap()));
    let s = w.family(&FamilyKind::Sum, 2).unwrap();
    assert_eq!(s.format_poly(1), "X1 + Y1 - pi*X0*Y0");
    // W_{O,2}(F_2) against O/pi^2 through the structure map
    let elems: Vec<_> = (0..4)
        .map(|i| w.from_scalar(&LocalElem::from_signed(&spec, &[i & 1, i >> 1], 2), 2).unwrap())
        .collect();
    for (i, x) in elems.iter().enumerate() {
        assert_eq!(x.coords, vec![k.from_int(i as i64 & 1), k.from_int(i as i64 >> 1)]);
    }
}

#[test]
fn frobenius_and_verschiebung_over_f4() {
    let w = f4_ring(&z2());
    let k = w.ring().clone();
    let om = k.generator();
    let x = WittVector::new(vec![om, om]);
    let om2 = k.mul(om, om);
    assert_eq!(w.frobenius(&x).unwrap().coords, vec![om2, om2]);
    let two = LocalElem::from_int(w.spec(), 2, 8);
    for x in w.elements(3).unwrap() {
        let fv = w.frobenius(&w.verschiebung(&x)).unwrap().truncate(3);
        assert_eq!(fv, w.scalar(&two, &x).unwrap());
        let vf = w.verschiebung(&w.frobenius(&x).unwrap()).truncate(3);
        assert_eq!(vf, w.scalar(&two, &x).unwrap());
    }
    assert_eq!(w.verschiebung(&w.teichmuller(om, 2)).coords, vec![k.zero(), om, k.zero()]);
}

#[test]
fn lift_frobenius_consumes_a_coordinate() {
    let spec = z2();
    let lift = MPolyRing::new(LocalRing::new(&spec, 5), vec!["t".into()]);
    let w = WittRing::new(OAlgebra::lift(lift.clone(), &spec).unwrap());
    let t = lift.var(0);
    let x = WittVector::new(vec![t.clone(), lift.one(), t]);
    let f = w.frobenius(&x).unwrap();
    assert_eq!(f.len(), 2);
    let gx = w.ghost(&x).unwrap();
    assert_eq!(w.ghost(&f).unwrap(), gx[1..].to_vec());
}

#[test]
fn pi_series_closed_form() {
    let w = f4_ring(&z2());
    let k = w.ring().clone();
    let om = k.generator();
    let x = w.pi_series(&[om, om]).unwrap();
    assert_eq!(x.coords, vec![om, k.mul(om, om)]);
    assert_eq!(w.pi_series(&[om, k.zero()]).unwrap(), w.teichmuller(om, 2));
    assert_eq!(w.pi_series_inverse(&x).unwrap(), vec![om, om]);
    let dual = WittRing::new(OAlgebra::residue(poly_ring("F2[x]/(x^2)"), &z2()).unwrap());
    let x = dual.ring().symbol("x").unwrap();
    let v = WittVector::new(vec![dual.ring().zero(), x]);
    assert!(dual.pi_series_inverse(&v).is_err());
}

#[test]
fn glue_and_digit_expansion() {
    let w = WittRing::new(OAlgebra::residue(poly_ring("F2[x]/(x^2)"), &ram2()).unwrap());
    let r = w.ring().clone();
    let x = r.symbol("x").unwrap();
    let b = WittVector::new(vec![x.clone(), r.zero()]);
    let c = WittVector::new(vec![r.zero(), r.one()]);
    let g = w.glue(&[b.clone(), c.clone()]).unwrap();
    assert_eq!(g.coords, vec![x.clone(), r.one()]);
    assert_eq!(g, w.add(&b, &c).unwrap());
    assert!(matches!(w.glue(&[b.clone(), b.clone()]), Err(WittError::Overlap(0))));
    assert_eq!(w.glue(&[b.clone()]).unwrap(), b);
}

#[test]
fn degenerate_length_one() {
    let w = WittRing::new(OAlgebra::residue(poly_ring("F2[x]/(x^3)"), &ram2()).unwrap());
    let r = w.ring().clone();
    for a in r.elements().unwrap().iter().step_by(3) {
        for b in r.elements().unwrap().iter().step_by(5) {
            let (x, y) = (w.teichmuller(a.clone(), 1), w.teichmuller(b.clone(), 1));
            assert_eq!(w.add(&x, &y).unwrap().coords, vec![r.add(a, b)]);
            assert_eq!(w.mul(&x, &y).unwrap().coords, vec![r.mul(a, b).unwrap()]);
            assert_eq!(w.neg(&x).unwrap().coords, vec![r.neg(a)]);
        }
    }
}

#[test]
fn change_of_uniformizer_for_z3() {
    let base = SpecDescriptor::zp(3, 8);
    let mut top = base.clone();
    top.eisenstein[0] = vec![3];
    let forward = Extension::new(ExtensionDescriptor::new(base.clone(), top.clone())).unwrap();
    let backward = Extension::new(ExtensionDescriptor::new(top, base)).unwrap();
    let h = change_of_uniformizer(&forward, 3).unwrap();
    assert_eq!(h.format_poly(0), "X0");
    assert_eq!(h.format_poly(1), "-X1");
    assert!(uniformizer_round_trip(&forward, &backward, 3).unwrap());

    let same = Extension::new(ExtensionDescriptor::new(SpecDescriptor::zp(3, 8), SpecDescriptor::zp(3, 8))).unwrap();
    let id = change_of_uniformizer(&same, 3).unwrap();
    for m in 0..3 {
        assert_eq!(id.format_poly(m), format!("X{m}"));
    }
}

#[test]
fn solver_precision_is_bounded() {
    let spec = LocalFieldSpec::zp(3, 4).unwrap();
    let err = PolyFamily::compute(&FamilyKind::Sum, &FamilySource::Local(spec.clone()), 40).unwrap_err();
    assert!(matches!(err, FamilyError::SolverPrecision { .. }));
    let err = PolyFamily::compute(&FamilyKind::DrinfeldU, &FamilySource::Local(spec), 2).unwrap_err();
    assert!(matches!(err, FamilyError::WrongSource { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ghost_map_is_a_homomorphism_on_lifts(a in proptest::collection::vec(-50i64..50, 6), b in proptest::collection::vec(-50i64..50, 6)) {
        let spec = ram2();
        let lift = MPolyRing::new(LocalRing::new(&spec, 10), vec![]);
        let w = WittRing::new(OAlgebra::lift(lift.clone(), &spec).unwrap());
        let elem = |v: &[i64]| -> Vec<_> {
            v.chunks(2).map(|c| lift.constant(spec.canonical(&spec.raw_from_signed(c), 10))).collect()
        };
        let (x, y) = (WittVector::new(elem(&a)), WittVector::new(elem(&b)));
        let (gx, gy) = (w.ghost(&x).unwrap(), w.ghost(&y).unwrap());
        let gs = w.ghost(&w.add(&x, &y).unwrap()).unwrap();
        let gp = w.ghost(&w.mul(&x, &y).unwrap()).unwrap();
        for m in 0..3 {
            prop_assert_eq!(&gs[m], &lift.add(&gx[m], &gy[m]));
            prop_assert_eq!(&gp[m], &lift.mul(&gx[m], &gy[m]).unwrap());
        }
    }
}
