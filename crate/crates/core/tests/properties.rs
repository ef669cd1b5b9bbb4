use num::BigRational;
use pindex_core::catalog::{catalog_all, complex_monomial};
use pindex_core::lift::{index_descend_relation, index_lift_relation, reduction_sum_check, SingularPartition};
use pindex_core::obstruction::{foliation_feasibility, BagpipeSpec};
use pindex_core::surface::{discrete_ph_sum, generate_surface, SurfaceSpec};
use pindex_core::tangency::{census, surgery_replay, Scenario, SurgeryStep, TangencyError, TangencyOptions};
use pindex_core::{winding_index, Circle, Exec, FieldFile, HalfIndex, PlaneField, PolyExpr, PolyField, WindingOptions};
use proptest::prelude::*;

fn quarter(k: i64) -> PolyExpr {
    PolyExpr::constant(BigRational::new(k.into(), 4.into()))
}

/// `z − a` (or its conjugate), with `a = (ax, ay)/4`.
fn linear_factor(ax: i64, ay: i64, conjugate: bool) -> PolyField {
    let re = PolyExpr::x().sub(&quarter(ax));
    let im = PolyExpr::y().sub(&quarter(ay));
    PolyField::new(re, if conjugate { im.neg() } else { im })
}

fn negated(f: &PolyField) -> PlaneField {
    PlaneField::vector(f.p.neg(), f.q.neg())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Π(z − aᵢ) · Π conj(z − bⱼ) winds (#aᵢ inside) − (#bⱼ inside) times.
    #[test]
    fn product_of_factors(roots in prop::collection::vec((-12i64..=12, -12i64..=12, any::<bool>()), 1..5)) {
        let radius = 2.0;
        // Keep roots off the circle.
        let roots: Vec<_> = roots
            .into_iter()
            .filter(|&(x, y, _)| (((x * x + y * y) as f64).sqrt() / 4.0 - radius).abs() > 0.3)
            .collect();
        prop_assume!(!roots.is_empty());
        let mut f = linear_factor(roots[0].0, roots[0].1, roots[0].2);
        for &(x, y, c) in &roots[1..] {
            f = f.complex_mul(&linear_factor(x, y, c));
        }
        let expected: i64 = roots
            .iter()
            .filter(|&&(x, y, _)| ((x * x + y * y) as f64).sqrt() / 4.0 < radius)
            .map(|&(_, _, c)| if c { -1 } else { 1 })
            .sum();
        let circle = Circle::centered(radius).unwrap();
        let w = winding_index(&PlaneField::from_poly_field(f.clone()), &circle, &WindingOptions::default()).unwrap();
        prop_assert_eq!(w.index, HalfIndex::from_int(expected));
        let neg = winding_index(&negated(&f), &circle, &WindingOptions::default()).unwrap();
        prop_assert_eq!(neg.index, w.index);
    }

    #[test]
    fn winding_ignores_start_and_exec(k in -6i32..=6, start in 0.0f64..std::f64::consts::TAU, r in 0.05f64..10.0) {
        let f = PlaneField::from_poly_field(complex_monomial(k));
        let circle = Circle::centered(r).unwrap();
        let seq = WindingOptions { start_angle: start, exec: Exec::Sequential, ..Default::default() };
        let par = WindingOptions { start_angle: start, exec: Exec::Parallel, ..Default::default() };
        let a = winding_index(&f, &circle, &seq).unwrap();
        let b = winding_index(&f, &circle, &par).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.index, HalfIndex::from_int(k as i64));
    }

    #[test]
    fn line_model_winding(two_j in -9i64..=9, r in 0.05f64..10.0) {
        let f = PlaneField::line_model(two_j);
        let w = winding_index(&f, &Circle::centered(r).unwrap(), &WindingOptions::default()).unwrap();
        prop_assert_eq!(w.index.doubled(), two_j);
    }

    #[test]
    fn lift_round_trip(half in -20i64..20) {
        let j = HalfIndex::from_doubled(2 * half + 1);
        let i = index_lift_relation(j).unwrap();
        prop_assert!(i.is_integral());
        prop_assert_eq!(index_descend_relation(i).unwrap(), j);
    }

    #[test]
    fn reduction_passes_on_balanced_partitions(
        orientable in prop::collection::vec(-3i64..=3, 0..4),
        non_orientable in prop::collection::vec(-4i64..=3, 0..6),
        chi in -4i64..=2,
    ) {
        let orientable: Vec<HalfIndex> = orientable.into_iter().map(HalfIndex::from_int).collect();
        let mut non_orientable: Vec<HalfIndex> =
            non_orientable.into_iter().map(|k| HalfIndex::from_doubled(2 * k + 1)).collect();
        let sum: HalfIndex = orientable.iter().chain(&non_orientable).sum();
        let gap = HalfIndex::from_int(chi) - sum;
        let mut orientable = orientable;
        if gap.is_integral() { orientable.push(gap) } else { non_orientable.push(gap) }
        let p = SingularPartition { orientable, non_orientable, base_chi: chi };
        let r = reduction_sum_check(&p).unwrap();
        prop_assert!(r.holds);
        prop_assert_eq!(r.sum_j, HalfIndex::from_int(chi));
    }

    #[test]
    fn obstruction_closed_form(chi in -30i64..30, n in 0u32..40) {
        let v = foliation_feasibility(&BagpipeSpec::new(chi, n)).unwrap();
        prop_assert_eq!(v.feasible, if n == 0 { chi == 0 } else { chi >= 0 });
        if let Some(caps) = &v.witness {
            prop_assert!(caps.iter().all(|q| *q <= HalfIndex::ONE));
            let sum: HalfIndex = v.witness_centers.as_ref().unwrap().iter().sum();
            prop_assert_eq!(sum, HalfIndex::from_int(v.chi_f));
        }
        // Adding a pipe keeps a feasible ledger feasible.
        if n >= 1 && v.feasible {
            prop_assert!(foliation_feasibility(&BagpipeSpec::new(chi, n + 1)).unwrap().feasible);
        }
    }

    #[test]
    fn surgery_never_increases_concavities(
        c in 0u64..10,
        half_cp in 0u64..8,
        picks in prop::collection::vec(any::<bool>(), 0..20),
    ) {
        let cp = 2 * half_cp + (c % 2);
        let steps: Vec<SurgeryStep> = picks
            .iter()
            .map(|&b| SurgeryStep::plain(if b { Scenario::B } else { Scenario::A }))
            .collect();
        match surgery_replay((c, cp), &steps) {
            Ok(t) => {
                prop_assert!(t.pairs.windows(2).all(|w| w[1].1 < w[0].1));
                if let Some(b) = t.bound {
                    prop_assert!(b <= HalfIndex::ONE);
                }
            }
            Err(TangencyError::InsufficientConcavities { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
}

#[test]
fn census_is_sign_invariant() {
    let circle = Circle::new([0.13, -0.07], 1.0).unwrap();
    for entry in catalog_all() {
        let Some(f) = entry.field.as_poly() else { continue };
        let a = census(&entry.field, &circle, &TangencyOptions::default()).unwrap();
        let b = census(&negated(f), &circle, &TangencyOptions::default()).unwrap();
        assert_eq!(a.internal, b.internal, "{}", entry.name);
        assert_eq!(a.external, b.external, "{}", entry.name);
        assert_eq!(a.bendixson, b.bendixson, "{}", entry.name);
    }
}

#[test]
fn field_file_round_trip() {
    for text in [
        r#"{"kind":"vector_polynomial","P":"x^2 - y^2","Q":"2*x*y"}"#,
        r#"{"kind":"line_model","two_j":-1}"#,
        r#"{"kind":"builtin","name":"star"}"#,
    ] {
        let f = FieldFile::from_json(text).unwrap();
        assert_eq!(FieldFile::from_json(&f.to_json()).unwrap(), f);
        f.build().unwrap();
    }
    assert!(FieldFile::from_json(r#"{"kind":"builtin","name":"nope"}"#).unwrap().build().is_err());
    assert!(FieldFile::from_json(r#"{"kind":"vector_polynomial","P":"x^","Q":"y"}"#).unwrap().build().is_err());
}

#[test]
fn fixtures_sum_to_chi() {
    for g in 0..=8 {
        let t = generate_surface(SurfaceSpec::Orientable { genus: g }).unwrap();
        assert_eq!(discrete_ph_sum(&t).unwrap().chi, 2 - 2 * g as i64);
    }
    assert!(generate_surface(SurfaceSpec::NonOrientable { crosscaps: 0 }).is_err());
    assert!(generate_surface(SurfaceSpec::Orientable { genus: 9 }).is_err());
}
