//! Shared fixtures for the integration tests: corpus loading, a seeded
//! random model generator and brute-force oracles that share no code with
//! the library's own traversals.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use plse_core::ingest::parse_variability_model;
use plse_core::{
    ActivityId, Binding, Interaction, InteractionKind, Layer, ProductLineModel, VariabilityModel, VariantId, VpId,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpora")
}

pub fn read_corpus(rel: &str) -> Vec<u8> {
    let path = corpus_dir().join(rel);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load_vm(rel: &str) -> ProductLineModel {
    parse_variability_model(&read_corpus(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Variability-model corpora that reduction and enumeration run on.
pub const VM_CORPORA: &[&str] = &[
    "engine-flat/expected-vm.json",
    "engine-hierarchical/expected-vm.json",
    "logistics/vm.json",
    "interaction-free/vm.json",
];

/// Every well-formed document shipped in the corpora.
pub fn all_corpus_documents() -> Vec<String> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(corpus_dir()).unwrap() {
        let dir = entry.unwrap().path();
        if dir.file_name().unwrap() == "negative" {
            continue;
        }
        for f in std::fs::read_dir(&dir).unwrap() {
            let f = f.unwrap().path();
            if f.extension().is_some_and(|e| e == "json") {
                let rel = f.strip_prefix(corpus_dir()).unwrap().to_string_lossy().into_owned();
                out.push(rel);
            }
        }
    }
    out.sort();
    out
}

pub struct GenParams {
    pub max_vps: usize,
    pub max_variants: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_vps: 50, max_variants: 200 }
    }
}

/// A random valid product-line model.
///
/// Variation points get 1..=6 variants, about half of them hang under a
/// variant of an earlier variation point (so the refinement graph is a
/// forest), and interactions are laid down in pairing patterns (every
/// variant of the smaller side wired to a distinct partner on the larger
/// side) so that merges actually happen, plus some noise edges. Every
/// variant gets one or two bound activities.
pub fn random_model(seed: u64, params: &GenParams) -> ProductLineModel {
    let mut rng = StdRng::seed_from_u64(seed);
    let vp_target = rng.gen_range(1..=params.max_vps);
    let mut vm = VariabilityModel::default();
    let mut vps: Vec<(VpId, Vec<VariantId>)> = Vec::new();
    let mut total = 0;

    for i in 0..vp_target {
        let room = params.max_variants.saturating_sub(total);
        if room == 0 {
            break;
        }
        let n = rng.gen_range(1..=6.min(room));
        let vp = VpId::new(format!("vp{i:02}"));
        let level = *Layer::ALL.choose(&mut rng).unwrap();
        vm.add_variation_point(vp.clone(), format!("Point {i}"), level);
        let mut variants = Vec::new();
        for j in 0..n {
            let v = VariantId::new(format!("vp{i:02}.{j}"));
            vm.add_variant(v.clone(), format!("variant {j} of point {i}"), vp.clone());
            variants.push(v);
        }
        total += n;
        if !vps.is_empty() && rng.gen_bool(0.5) {
            let (_, parent_variants) = vps.choose(&mut rng).unwrap();
            vm.add_refinement(vp.clone(), parent_variants.choose(&mut rng).unwrap().clone());
        }
        vps.push((vp, variants));
    }

    let kinds = [InteractionKind::Material, InteractionKind::Information];
    if vps.len() >= 2 {
        for _ in 0..rng.gen_range(0..=vps.len()) {
            let a = rng.gen_range(0..vps.len());
            let b = rng.gen_range(0..vps.len());
            if a == b {
                continue;
            }
            let (big, small) = if vps[a].1.len() >= vps[b].1.len() { (a, b) } else { (b, a) };
            let mut partners = vps[big].1.clone();
            partners.shuffle(&mut rng);
            let kind = *kinds.choose(&mut rng).unwrap();
            for (t, s) in vps[small].1.iter().zip(partners) {
                let (from, to) = if rng.gen_bool(0.5) { (t.clone(), s) } else { (s, t.clone()) };
                let mut edge = Interaction::new(from, to, kind);
                if rng.gen_bool(0.2) {
                    edge = edge.requiring();
                }
                vm.add_interaction(edge);
            }
        }
        for _ in 0..rng.gen_range(0..=vps.len() / 4) {
            let a = rng.gen_range(0..vps.len());
            let b = rng.gen_range(0..vps.len());
            if a == b {
                continue;
            }
            let from = vps[a].1.choose(&mut rng).unwrap().clone();
            let to = vps[b].1.choose(&mut rng).unwrap().clone();
            vm.add_interaction(Interaction::new(from, to, *kinds.choose(&mut rng).unwrap()));
        }
    }

    let mut plm = ProductLineModel::from_vm(vm);
    for (_, variants) in &vps {
        for v in variants {
            for k in 0..rng.gen_range(1..=2) {
                plm.bindings.insert(Binding::Activity {
                    activity: ActivityId::new(format!("act-{v}-{k}")),
                    variant: v.clone(),
                });
            }
        }
    }
    plm
}

// ---- oracles ----

/// Variants below `vp` at every depth, by a linear scan of the refinement
/// relation at each step.
pub fn naive_tree_size(vm: &VariabilityModel, vp: &VpId) -> usize {
    vm.variants
        .values()
        .filter(|v| &v.vp == vp)
        .map(|v| {
            1 + vm
                .refinements
                .iter()
                .filter(|(_, parent)| **parent == v.id)
                .map(|(child, _)| naive_tree_size(vm, child))
                .sum::<usize>()
        })
        .sum()
}

/// Validity judged directly from the definitions.
pub fn oracle_is_valid(plm: &ProductLineModel, selection: &BTreeSet<VariantId>) -> bool {
    let vm = &plm.vm;
    let active = |vp: &VpId| match vm.refinements.get(vp) {
        None => true,
        Some(parent) => selection.contains(parent),
    };
    for vp in vm.variation_points.keys() {
        let picked = vm.variants.values().filter(|v| &v.vp == vp && selection.contains(&v.id)).count();
        if active(vp) != (picked == 1) || picked > 1 {
            return false;
        }
    }
    for i in &vm.interactions {
        let ends_active = active(&vm.variants[&i.from].vp) && active(&vm.variants[&i.to].vp);
        if ends_active && selection.contains(&i.from) != selection.contains(&i.to) {
            return false;
        }
    }
    if !plm.bindings.is_empty() {
        let bound: BTreeSet<&VariantId> = plm
            .bindings
            .iter()
            .filter_map(|b| match b {
                Binding::Activity { variant, .. } => Some(variant),
                _ => None,
            })
            .collect();
        if selection.iter().any(|v| !bound.contains(v)) {
            return false;
        }
    }
    true
}

/// Every valid selection, found by trying "nothing or one variant" for each
/// variation point independently of the hierarchy.
pub fn oracle_valid_configs(plm: &ProductLineModel) -> BTreeSet<BTreeSet<VariantId>> {
    let options: Vec<Vec<Option<VariantId>>> = plm
        .vm
        .variation_points
        .keys()
        .map(|vp| {
            std::iter::once(None)
                .chain(plm.vm.variants.values().filter(|v| &v.vp == vp).map(|v| Some(v.id.clone())))
                .collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        let sel: BTreeSet<VariantId> = idx.iter().zip(&options).filter_map(|(i, o)| o[*i].clone()).collect();
        if oracle_is_valid(plm, &sel) {
            out.insert(sel);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Variation points below `vp` (inclusive), by linear scans.
pub fn naive_subtree(vm: &VariabilityModel, vp: &VpId) -> BTreeSet<VpId> {
    let mut out = BTreeSet::from([vp.clone()]);
    for v in vm.variants.values().filter(|v| &v.vp == vp) {
        for (child, parent) in &vm.refinements {
            if *parent == v.id {
                out.extend(naive_subtree(vm, child));
            }
        }
    }
    out
}

/// Subtree conservation across one merge of `target` into `source`.
///
/// Every variation point other than the target survives. A subtree holding
/// the source gains the target's subtree minus the target itself; one
/// holding only the target loses the target's whole subtree (its children
/// now hang under the source); every other subtree is unchanged.
pub fn check_subtree_conservation(
    before: &VariabilityModel,
    after: &VariabilityModel,
    source: &VpId,
    target: &VpId,
) -> Result<(), String> {
    let survivors: BTreeSet<&VpId> = before.variation_points.keys().filter(|vp| *vp != target).collect();
    let remaining: BTreeSet<&VpId> = after.variation_points.keys().collect();
    if survivors != remaining {
        return Err("variation points other than the target changed".into());
    }
    let target_tree = naive_subtree(before, target);
    for vp in survivors {
        let pre = naive_subtree(before, vp);
        let expected: BTreeSet<VpId> = if pre.contains(source) {
            pre.union(&target_tree).filter(|x| *x != target).cloned().collect()
        } else if pre.contains(target) {
            pre.difference(&target_tree).cloned().collect()
        } else {
            pre
        };
        let post = naive_subtree(after, vp);
        if post != expected {
            return Err(format!("subtree of {vp}: expected {expected:?}, found {post:?}"));
        }
    }
    let removed = before.variants.values().filter(|v| &v.vp == target).count();
    if after.variants.len() + removed != before.variants.len() {
        return Err("variant count not conserved".into());
    }
    Ok(())
}
