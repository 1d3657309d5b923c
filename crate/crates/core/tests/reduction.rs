mod common;

use std::collections::BTreeSet;

use common::{load_vm, naive_tree_size, read_corpus};
use plse_core::ingest::{parse_trace, serialize_trace, serialize_variability_model};
use plse_core::{
    check_completeness, check_uniqueness, identify_main_root, interacting_pairs, merge, reduce, replay, tree_size,
    Interaction, InteractionKind, Layer, ModelError, ProductLineModel, ReductionError, VariabilityModel, VariantId,
    VpId,
};

fn engine() -> ProductLineModel {
    load_vm("engine-flat/expected-vm.json")
}

fn vp(s: &str) -> VpId {
    VpId::from(s)
}

fn model(vps: &[(&str, &[&str])], edges: &[(&str, &str)]) -> VariabilityModel {
    let mut vm = VariabilityModel::default();
    for (id, variants) in vps {
        vm.add_variation_point(*id, *id, Layer::Functional);
        for v in *variants {
            vm.add_variant(*v, *v, *id);
        }
    }
    for (a, b) in edges {
        vm.add_interaction(Interaction::new((*a).into(), (*b).into(), InteractionKind::Information));
    }
    vm
}

#[test]
fn main_root() {
    assert_eq!(identify_main_root(&engine().vm).unwrap(), vp("Process Function"));
    let single = model(&[("Only", &["o1"])], &[]);
    assert_eq!(identify_main_root(&single).unwrap(), vp("Only"));
    let tied = model(&[("Zeta", &["z1", "z2"]), ("Alpha", &["a1", "a2"])], &[]);
    assert_eq!(identify_main_root(&tied).unwrap(), vp("Alpha"));
    assert_eq!(identify_main_root(&VariabilityModel::default()), Err(ModelError::EmptyModel));
}

#[test]
fn engine_first_pair() {
    let vm = engine().vm;
    assert_eq!(
        interacting_pairs(&vm, &vp("Process Function")),
        vec![(vp("Process Function"), vp("Sensing Function"))]
    );
    assert!(interacting_pairs(&model(&[("A", &["a"]), ("B", &["b"])], &[]), &vp("A")).is_empty());
}

#[test]
fn equal_size_source_is_the_first_encountered() {
    // Both encounter orders and both edge directions: the VP whose tree is
    // being walked is met first and becomes the source.
    for (from, to) in [("a1", "b2"), ("b2", "a1")] {
        let vm = model(&[("A", &["a1", "a2"]), ("B", &["b1", "b2"])], &[(from, to)]);
        assert_eq!(interacting_pairs(&vm, &vp("A")), vec![(vp("A"), vp("B"))]);
        assert_eq!(interacting_pairs(&vm, &vp("B")), vec![(vp("B"), vp("A"))]);
    }
}

#[test]
fn completeness() {
    let vm = engine().vm;
    assert!(check_completeness(&vm, &vp("Process Function"), &vp("Sensing Function")));

    // Exhaustive over which of a 3-variant target's variants interact.
    for mask in 0u8..8 {
        let edges: Vec<(&str, &str)> =
            ["t1", "t2", "t3"].iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, t)| (*t, "s1")).collect();
        let vm = model(&[("S", &["s1", "s2", "s3"]), ("T", &["t1", "t2", "t3"])], &edges);
        assert_eq!(check_completeness(&vm, &vp("S"), &vp("T")), mask == 0b111, "mask {mask:03b}");
    }
}

#[test]
fn uniqueness() {
    let vm = engine().vm;
    assert!(check_uniqueness(&vm, &vp("Process Function"), &vp("Sensing Function")));
    let single = model(&[("S", &["s"]), ("T", &["t"])], &[("t", "s")]);
    assert!(check_uniqueness(&single, &vp("S"), &vp("T")));

    // Two partners for one target variant: ambiguous pairing.
    let two = model(&[("S", &["s1", "s2"]), ("T", &["t"])], &[("t", "s1"), ("t", "s2")]);
    assert!(check_completeness(&two, &vp("S"), &vp("T")));
    assert!(!check_uniqueness(&two, &vp("S"), &vp("T")));

    // A detour through a third VP is an alternative path.
    let detour = model(&[("S", &["s"]), ("T", &["t"]), ("X", &["x"])], &[("t", "s"), ("t", "x"), ("x", "s")]);
    assert!(!check_uniqueness(&detour, &vp("S"), &vp("T")));
    // Paths follow direction: the reversed detour is no alternative.
    let reversed = model(&[("S", &["s"]), ("T", &["t"]), ("X", &["x"])], &[("t", "s"), ("x", "t"), ("s", "x")]);
    assert!(check_uniqueness(&reversed, &vp("S"), &vp("T")));
}

#[test]
fn parallel_edge_of_another_kind_breaks_uniqueness() {
    let mut vm = model(&[("S", &["s"]), ("T", &["t"])], &[("t", "s")]);
    vm.add_interaction(Interaction::new("t".into(), "s".into(), InteractionKind::Material));
    assert!(!check_uniqueness(&vm, &vp("S"), &vp("T")));
}

#[test]
fn extra_process_edge_and_full_reduction() {
    // Same kind as P3 -> S3: once Sensing Function folds into Process Function
    // the detour duplicates the direct edge and everything still merges.
    let mut same = engine();
    same.vm.add_interaction(Interaction::new("P3".into(), "PF3".into(), InteractionKind::Material));
    assert!(!check_uniqueness(&same.vm, &vp("Process Function"), &vp("Input Parameter")));
    assert_eq!(reduce(&same).0.vm.variation_points.len(), 1);

    // Another kind stays a parallel edge, so Input Parameter is never merged.
    let mut other = engine();
    other.vm.add_interaction(Interaction::new("P3".into(), "PF3".into(), InteractionKind::Information));
    let (reduced, trace) = reduce(&other);
    let merged: Vec<&str> = trace.merges.iter().map(|m| m.target_vp.as_str()).collect();
    assert_eq!(merged, ["Sensing Function"]);
    assert!(reduced.vm.variation_points.contains_key(&vp("Input Parameter")));
}

#[test]
fn engine_merge_sequence() {
    let plm = engine();
    let (pf, sf, ip) = (vp("Process Function"), vp("Sensing Function"), vp("Input Parameter"));
    let (after_sensing, record) = merge(&plm, &pf, &sf).unwrap();
    let edges: BTreeSet<(String, String)> =
        after_sensing.vm.interactions.iter().map(|i| (i.from.to_string(), i.to.to_string())).collect();
    let expected: BTreeSet<(String, String)> =
        [("P2", "PF2"), ("P3", "PF3")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    assert_eq!(edges, expected);
    assert_eq!(after_sensing.variant_of(&"S2".into()), Some(&VariantId::from("PF2")));
    assert_eq!(after_sensing.variant_of(&"S3".into()), Some(&VariantId::from("PF3")));
    assert_eq!(record.variant_pairing.len(), 2);
    assert_eq!(record.rebound_bindings.len(), 2);

    let (last, _) = merge(&after_sensing, &pf, &ip).unwrap();
    assert_eq!(last.vm.variation_points.len(), 1);
    assert_eq!(last.vm.variants.len(), 3);
    assert_eq!(serialize_variability_model(&last), read_corpus("engine-flat/expected-reduced.json"));
}

#[test]
fn merge_moves_subtrees_to_the_paired_variant() {
    // Target T's variant t1 carries child C (3 variants) which carries D (2).
    let mut vm = model(
        &[("S", &["s1", "s2"]), ("T", &["t1", "t2"]), ("C", &["c1", "c2", "c3"]), ("D", &["d1", "d2"])],
        &[("t1", "s2"), ("t2", "s1")],
    );
    vm.add_refinement("C", "t1");
    vm.add_refinement("D", "c3");
    let plm = ProductLineModel::from_vm(vm);
    let before = tree_size(&vp("S"), &plm.vm).unwrap();
    let subtree = naive_tree_size(&plm.vm, &vp("C"));
    assert_eq!(subtree, 5);

    let (after, record) = merge(&plm, &vp("S"), &vp("T")).unwrap();
    assert_eq!(after.vm.parent_of(&vp("C")), Some(&VariantId::from("s2")));
    assert_eq!(after.vm.parent_of(&vp("D")), Some(&VariantId::from("c3")));
    assert_eq!(tree_size(&vp("S"), &after.vm).unwrap(), before + subtree);
    assert_eq!(naive_tree_size(&after.vm, &vp("S")), before + subtree);
    assert_eq!(record.transferred_refinements.len(), 1);
}

#[test]
fn merge_refusals() {
    let plm = engine();
    let (pf, ip) = (vp("Process Function"), vp("Input Parameter"));
    // Input Parameter does not touch Process Function before the sensing merge.
    assert!(matches!(merge(&plm, &pf, &ip), Err(ReductionError::Refused { .. })));
    assert!(matches!(merge(&plm, &pf, &pf), Err(ReductionError::Refused { .. })));
    assert_eq!(
        merge(&plm, &pf, &vp("nope")).unwrap_err(),
        ReductionError::Model(ModelError::UnknownVariationPoint(vp("nope")))
    );

    // A source inside the target's own tree cannot absorb it.
    let mut vm = model(&[("P", &["p1"]), ("C", &["c1", "c2"])], &[("p1", "c1")]);
    vm.add_refinement("C", "p1");
    let nested = ProductLineModel::from_vm(vm);
    assert!(check_completeness(&nested.vm, &vp("C"), &vp("P")));
    assert!(matches!(merge(&nested, &vp("C"), &vp("P")), Err(ReductionError::Refused { .. })));
    let (reduced, trace) = reduce(&nested);
    assert!(trace.is_empty());
    assert_eq!(reduced, nested);
}

#[test]
fn corpus_reductions_match_golden_files() {
    for (input, dir, vps) in [
        ("engine-flat/expected-vm.json", "engine-flat", 1),
        ("engine-hierarchical/expected-vm.json", "engine-hierarchical", 8),
        ("logistics/vm.json", "logistics", 4),
        ("interaction-free/vm.json", "interaction-free", 2),
    ] {
        let plm = load_vm(input);
        let (reduced, trace) = reduce(&plm);
        assert_eq!(reduced.vm.variation_points.len(), vps, "{dir}");
        assert_eq!(serialize_variability_model(&reduced), read_corpus(&format!("{dir}/expected-reduced.json")), "{dir}");
        assert_eq!(serialize_trace(&trace), read_corpus(&format!("{dir}/expected-trace.json")), "{dir}");
        let parsed = parse_trace(&read_corpus(&format!("{dir}/expected-trace.json"))).unwrap();
        assert_eq!(replay(&plm, &parsed).unwrap(), reduced, "{dir}");
    }
}

#[test]
fn hierarchical_merges_carry_subtrees() {
    let plm = load_vm("engine-hierarchical/expected-vm.json");
    let (reduced, trace) = reduce(&plm);
    let merges: Vec<(&str, &str)> = trace.merges.iter().map(|m| (m.target_vp.as_str(), m.source_vp.as_str())).collect();
    assert_eq!(merges, [("Thrust Reverser", "Fuel Metering"), ("Valve Driver", "Torque Sensor")]);
    assert_eq!(reduced.vm.parent_of(&vp("Deploy Logic")), Some(&VariantId::from("FM-A")));
    assert_eq!(reduced.vm.parent_of(&vp("Lock Sensing")), Some(&VariantId::from("FM-B")));
    assert_eq!(reduced.bindings.len(), plm.bindings.len());
    let fm = vp("Fuel Metering");
    assert_eq!(
        tree_size(&fm, &reduced.vm).unwrap(),
        tree_size(&fm, &plm.vm).unwrap() + tree_size(&vp("Thrust Reverser"), &plm.vm).unwrap()
            - plm.vm.variant_count(&vp("Thrust Reverser"))
            - plm.vm.variant_count(&vp("Valve Driver"))
    );
}

#[test]
fn interaction_free_model_is_unchanged() {
    let plm = load_vm("interaction-free/vm.json");
    let (reduced, trace) = reduce(&plm);
    assert!(trace.is_empty());
    assert_eq!(trace.pass_count, 1);
    assert_eq!(reduced, plm);
}

#[test]
fn replay_detects_tampering() {
    let plm = engine();
    let (_, mut trace) = reduce(&plm);
    trace.merges[0].rebound_bindings.pop();
    assert_eq!(replay(&plm, &trace), Err(ReductionError::ReplayMismatch { index: 0 }));

    let (_, mut trace) = reduce(&plm);
    trace.merges.swap(0, 1);
    assert!(matches!(replay(&plm, &trace), Err(ReductionError::Refused { .. })));
}

#[test]
fn reduction_is_deterministic() {
    for rel in common::VM_CORPORA {
        let plm = load_vm(rel);
        let (a, ta) = reduce(&plm);
        let (b, tb) = reduce(&plm);
        assert_eq!(serialize_variability_model(&a), serialize_variability_model(&b), "{rel}");
        assert_eq!(serialize_trace(&ta), serialize_trace(&tb), "{rel}");
    }
}
