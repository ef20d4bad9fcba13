use clusterkr_core::dt::{double_bruhat_dt, dt_closed_form_a, dt_transform, dt_with_sequence, default_reddening};
use clusterkr_core::error::EngineError;
use clusterkr_core::greenseq::{classify_sequence, SequenceKind};
use clusterkr_core::krchar::{
    batch_mgs_characters, combined_sequence, dimension, general_position, hl_sweep_character, is_green, kr_gvector,
    mgs_character, nested_sequence, run_on_truncation, IntervalCollection,
};
use clusterkr_core::quiver::{dynkin_quiver, format_sequence, product_with_line, DynkinType, VertexId};
use num_bigint::BigInt;

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn assert_collection(t: DynkinType, ivs: &IntervalCollection, run: &clusterkr_core::krchar::CollectionRun) {
    for iv in &ivs.intervals {
        for v in dynkin_quiver(t).ids() {
            let g = kr_gvector(&run.quiver, &v.node, iv.hi, iv.lo - 1).unwrap();
            assert!(run.contains(&g), "{t}: {iv} at {}", v.node);
        }
    }
}

#[test]
fn nested_collection_on_a2() {
    let t = DynkinType::a(2);
    let q = dynkin_quiver(t);
    let n = IntervalCollection::from_pairs(&[(3, 4), (2, 5), (4, 4)]).unwrap();
    let seq = nested_sequence(&n, &q).unwrap();
    let run = run_on_truncation(&q, 5, &seq.steps).unwrap();
    assert!(is_green(run.kind));
    assert_collection(t, &n, &run);
}

#[test]
fn combined_sequence_covers_both_collections() {
    let t = DynkinType::a(1);
    let q = dynkin_quiver(t);
    let h = t.coxeter_number();
    let n = IntervalCollection::from_pairs(&[(2, 3)]).unwrap();
    let n2 = IntervalCollection::from_pairs(&[(7, 8), (6, 9)]).unwrap();
    assert!(general_position(&n, &n2, h));
    let seq = combined_sequence(&n, &n2, &q, h).unwrap();
    let run = run_on_truncation(&q, 9, &seq.steps).unwrap();
    assert!(is_green(run.kind));
    assert_collection(t, &n.union(&n2), &run);
}

#[test]
fn combined_sequence_rejects_overlap() {
    let q = dynkin_quiver(DynkinType::a(2));
    let n = IntervalCollection::from_pairs(&[(2, 5)]).unwrap();
    let n2 = IntervalCollection::from_pairs(&[(3, 7)]).unwrap();
    assert!(combined_sequence(&n, &n2, &q, 3).is_err());
}

#[test]
fn fundamental_dimensions() {
    for n in 1..=4usize {
        let t = DynkinType::a(n);
        let l = (t.coxeter_number() as u32).div_ceil(2) + 1;
        for i in 1..=n {
            let c = mgs_character(t, 1, l, &i.to_string()).unwrap();
            assert!(!c.truncated);
            assert_eq!(dimension(&c.poly), BigInt::from(binom(n as u64 + 1, i as u64)), "A{n} node {i}");
        }
    }
}

#[test]
fn sl2_kr_modules_have_dimension_r_plus_one() {
    let t = DynkinType::a(1);
    for r in 1..=5 {
        let c = mgs_character(t, r, r + 2, "1").unwrap();
        assert_eq!(dimension(&c.poly), BigInt::from(r + 1));
    }
}

#[test]
fn sweep_and_mgs_agree_on_d4() {
    let t = DynkinType::d(4);
    for node in ["1", "2", "3", "4"] {
        let a = hl_sweep_character(t, 3, 1, node, 4).unwrap();
        let b = mgs_character(t, 1, 4, node).unwrap();
        assert_eq!(a.poly, b.poly, "node {node}");
    }
}

#[test]
fn shallow_truncations_are_rejected() {
    let t = DynkinType::a(3);
    assert!(matches!(hl_sweep_character(t, 3, 2, "1", 4), Err(EngineError::DepthViolation(_))));
    assert!(matches!(mgs_character(t, 4, 4, "1"), Err(EngineError::DepthViolation(_))));
}

#[test]
fn batch_matches_sequential() {
    let jobs: Vec<(DynkinType, u32, u32, String)> = vec![
        (DynkinType::a(3), 1, 3, "2".into()),
        (DynkinType::d(4), 1, 4, "1".into()),
        (DynkinType::a(2), 2, 4, "1".into()),
        (DynkinType::a(2), 5, 5, "1".into()),
    ];
    let out = batch_mgs_characters(&jobs);
    assert_eq!(out.len(), jobs.len());
    for ((t, a, l, node), r) in jobs.iter().zip(&out) {
        match (mgs_character(*t, *a, *l, node), r) {
            (Ok(x), Ok(y)) => assert_eq!(x.poly, y.poly),
            (Err(_), Err(_)) => {}
            _ => panic!("batch and direct disagree for {t} a={a}"),
        }
    }
    assert!(out[3].is_err());
}

#[test]
fn qcharacter_json_shape() {
    let c = mgs_character(DynkinType::a(2), 1, 3, "2").unwrap();
    let j = c.to_json();
    assert_eq!(j["module"]["node"], "v2");
    assert_eq!(j["module"]["k"], 1);
    assert_eq!(j["module"]["right"], 3);
    assert_eq!(j["truncated"], false);
    assert!(!j["character"].is_null());
}

#[test]
fn double_bruhat_matches_mutation_route() {
    for t in [DynkinType::a(3), DynkinType::d(4)] {
        let levels = t.coxeter_number() / 2;
        let q = product_with_line(&dynkin_quiver(t), levels, Some(levels as u32)).unwrap();
        assert_eq!(double_bruhat_dt(t).unwrap(), dt_transform(&q).unwrap(), "{t}");
    }
}

#[test]
fn dt_is_independent_of_the_reddening_sequence() {
    let q = dynkin_quiver(DynkinType::a(3));
    let expected = dt_transform(&q).unwrap();
    let ids: Vec<VertexId> = q.ids().to_vec();
    let mut reddening = 0;
    for len in 3..=6u32 {
        for code in 0..3usize.pow(len) {
            let seq: Vec<VertexId> = (0..len).map(|i| ids[code / 3usize.pow(i) % 3].clone()).collect();
            if classify_sequence(&q, &seq).unwrap().sigma.is_none() {
                continue;
            }
            reddening += 1;
            assert_eq!(dt_with_sequence(&q, &seq).unwrap(), expected, "{}", format_sequence(&seq));
        }
    }
    assert!(reddening > 1);
    assert_eq!(classify_sequence(&q, &default_reddening(&q).unwrap().steps).unwrap().kind, SequenceKind::MaximalGreen);
}

#[test]
fn dt_json_lists_every_vertex() {
    let dt = dt_closed_form_a(3, true).unwrap();
    let j = dt.to_json();
    assert_eq!(j["images"].as_object().unwrap().len(), 4);
}
