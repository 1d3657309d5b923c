//! Variation point reduction.
//!
//! Trees are visited from the largest (the main root) down. For every pair
//! of interacting variation points reachable from the current tree, the one
//! with fewer variants (the target) is merged into the other (the source)
//! when
//!
//! * every target variant interacts, in either direction, with exactly one
//!   source variant (completeness plus an unambiguous pairing), and
//! * each of those interactions is the only directed interaction path
//!   between its two endpoints (uniqueness).
//!
//! After each merge the pass restarts; reduction stops at the first pass
//! that merges nothing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ReductionError};
use crate::model::{ActivityId, ArtifactId, Binding, ProductLineModel, VariabilityModel, VariantId, VariantInteraction, VpId};
use crate::tree::{roots_by_size, ForestIndex};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BindingEnd {
    Activity { activity: ActivityId, variant: VariantId },
    Artifact { artifact: ArtifactId, vp: VpId },
}

impl From<&Binding> for BindingEnd {
    fn from(b: &Binding) -> Self {
        match b.clone() {
            Binding::Activity { activity, variant } => BindingEnd::Activity { activity, variant },
            Binding::Artifact { artifact, vp } => BindingEnd::Artifact { artifact, vp },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rebinding {
    pub before: BindingEnd,
    pub after: BindingEnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementTransfer {
    pub child_vp: VpId,
    pub from_variant: VariantId,
    pub to_variant: VariantId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionEdge {
    pub from: VariantId,
    pub to: VariantId,
    pub kind: crate::model::InteractionKind,
    #[serde(default)]
    pub requires: bool,
}

impl From<&VariantInteraction> for InteractionEdge {
    fn from(i: &VariantInteraction) -> Self {
        InteractionEdge { from: i.from.clone(), to: i.to.clone(), kind: i.kind, requires: i.requires }
    }
}

/// An interaction touching a removed variant and what became of it.
/// `rewritten` is `None` when the rewrite was a self-loop or a duplicate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionTransfer {
    pub original: InteractionEdge,
    pub rewritten: Option<InteractionEdge>,
}

/// One merge of `target_vp` into `source_vp`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeRecord {
    pub source_vp: VpId,
    pub target_vp: VpId,
    /// Target variant -> its interaction partner in the source.
    pub variant_pairing: BTreeMap<VariantId, VariantId>,
    pub rebound_bindings: Vec<Rebinding>,
    pub transferred_refinements: Vec<RefinementTransfer>,
    pub transferred_interactions: Vec<InteractionTransfer>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionTrace {
    pub merges: Vec<MergeRecord>,
    pub pass_count: usize,
}

impl ReductionTrace {
    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }
}

/// The root whose tree holds the most variants, ties broken by id.
pub fn identify_main_root(vm: &VariabilityModel) -> Result<VpId, ModelError> {
    roots_by_size(vm).into_iter().next().map(|(r, _)| r).ok_or(ModelError::EmptyModel)
}

/// Interacting variation point pairs `(source, target)` seen from the tree
/// of `root`.
///
/// Variants of the tree are visited in ascending id order and each one's
/// interaction partners (either direction) in ascending id order. The
/// variation point with more variants becomes the source; on a tie the one
/// owning the tree-side variant does. Each unordered pair appears once.
pub fn interacting_pairs(vm: &VariabilityModel, root: &VpId) -> Vec<(VpId, VpId)> {
    let index = ForestIndex::new(vm);
    let neighbours = neighbour_map(vm);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in index.tree_variants(root) {
        let Some(k) = vm.vp_of(v) else { continue };
        for w in neighbours.get(v).into_iter().flatten() {
            let Some(l) = vm.vp_of(w) else { continue };
            if k == l {
                continue;
            }
            let key = if k < l { (k, l) } else { (l, k) };
            if !seen.insert(key) {
                continue;
            }
            let (nk, nl) = (index.variants_of(k).len(), index.variants_of(l).len());
            if nk >= nl {
                out.push((k.clone(), l.clone()));
            } else {
                out.push((l.clone(), k.clone()));
            }
        }
    }
    out
}

/// Undirected neighbour sets over variant interactions.
fn neighbour_map(vm: &VariabilityModel) -> BTreeMap<&VariantId, BTreeSet<&VariantId>> {
    let mut map: BTreeMap<&VariantId, BTreeSet<&VariantId>> = BTreeMap::new();
    for i in &vm.interactions {
        map.entry(&i.from).or_default().insert(&i.to);
        map.entry(&i.to).or_default().insert(&i.from);
    }
    map
}

/// Whether every target variant interacts, in either direction, with at
/// least one source variant.
pub fn check_completeness(vm: &VariabilityModel, source: &VpId, target: &VpId) -> bool {
    vm.variants_of(target).all(|t| {
        vm.interactions
            .iter()
            .any(|i| i.other(t).and_then(|o| vm.vp_of(o)) == Some(source))
    })
}

/// Whether the source-target interactions are all unique paths and pair each
/// target variant with exactly one source variant.
///
/// An interaction `u -> v` is unique when no other directed path leads from
/// `u` to `v`, including a parallel interaction of another kind.
pub fn check_uniqueness(vm: &VariabilityModel, source: &VpId, target: &VpId) -> bool {
    if source == target {
        return false;
    }
    let crossing: Vec<&VariantInteraction> = vm
        .interactions
        .iter()
        .filter(|i| match (vm.vp_of(&i.from), vm.vp_of(&i.to)) {
            (Some(a), Some(b)) => (a == source && b == target) || (a == target && b == source),
            _ => false,
        })
        .collect();

    for t in vm.variants_of(target) {
        let partners: BTreeSet<&VariantId> = crossing.iter().filter_map(|i| i.other(t)).collect();
        if partners.len() != 1 {
            return false;
        }
    }
    crossing.iter().all(|e| !has_alternative_path(vm, e))
}

/// Directed reachability from `e.from` to `e.to` without using `e`.
fn has_alternative_path(vm: &VariabilityModel, e: &VariantInteraction) -> bool {
    let mut adjacency: BTreeMap<&VariantId, Vec<&VariantId>> = BTreeMap::new();
    for i in &vm.interactions {
        if i != e {
            adjacency.entry(&i.from).or_default().push(&i.to);
        }
    }
    let mut visited = BTreeSet::from([&e.from]);
    let mut queue = VecDeque::from([&e.from]);
    while let Some(n) = queue.pop_front() {
        for next in adjacency.get(n).into_iter().flatten() {
            if *next == &e.to {
                return true;
            }
            if visited.insert(*next) {
                queue.push_back(next);
            }
        }
    }
    false
}

/// Target variant -> partner source variant, when both checks pass.
fn pairing(vm: &VariabilityModel, source: &VpId, target: &VpId) -> Option<BTreeMap<VariantId, VariantId>> {
    if !check_completeness(vm, source, target) || !check_uniqueness(vm, source, target) {
        return None;
    }
    let map = vm
        .variants_of(target)
        .map(|t| {
            let partner = vm
                .interactions
                .iter()
                .filter_map(|i| i.other(t))
                .find(|o| vm.vp_of(o) == Some(source))
                .expect("completeness guarantees a partner");
            (t.clone(), partner.clone())
        })
        .collect();
    Some(map)
}

fn refuse(source: &VpId, target: &VpId, reason: &'static str) -> ReductionError {
    ReductionError::Refused { source_vp: source.clone(), target_vp: target.clone(), reason }
}

/// Merges `target` into `source`: the target and its variants disappear,
/// their bindings, child variation points and remaining interactions move to
/// the paired source variants.
///
/// Both must sit at the same place in the hierarchy (the same parent variant,
/// or both roots) so that every product keeps its meaning after the merge.
pub fn merge(plm: &ProductLineModel, source: &VpId, target: &VpId) -> Result<(ProductLineModel, MergeRecord), ReductionError> {
    let vm = &plm.vm;
    for vp in [source, target] {
        if !vm.variation_points.contains_key(vp) {
            return Err(ModelError::UnknownVariationPoint(vp.clone()).into());
        }
    }
    if source == target {
        return Err(refuse(source, target, "source and target are the same variation point"));
    }
    if vm.parent_of(source) != vm.parent_of(target) {
        return Err(refuse(source, target, "variation points do not share a parent variant"));
    }
    if !check_completeness(vm, source, target) {
        return Err(refuse(source, target, "target is not complete"));
    }
    let Some(pairs) = pairing(vm, source, target) else {
        return Err(refuse(source, target, "interactions are not unique"));
    };

    let mut out = plm.clone();
    for t in pairs.keys() {
        out.vm.variants.remove(t);
    }
    out.vm.variation_points.remove(target);
    out.vm.refinements.remove(target);

    let mut rebound_bindings = Vec::new();
    for b in &plm.bindings {
        let after = match b {
            Binding::Activity { activity, variant } => match pairs.get(variant) {
                Some(s) => Binding::Activity { activity: activity.clone(), variant: s.clone() },
                None => continue,
            },
            Binding::Artifact { artifact, vp } if vp == target => {
                Binding::Artifact { artifact: artifact.clone(), vp: source.clone() }
            }
            Binding::Artifact { .. } => continue,
        };
        out.bindings.remove(b);
        rebound_bindings.push(Rebinding { before: b.into(), after: (&after).into() });
        out.bindings.insert(after);
    }

    let mut transferred_refinements = Vec::new();
    for (child, parent) in &plm.vm.refinements {
        if let Some(s) = pairs.get(parent) {
            out.vm.refinements.insert(child.clone(), s.clone());
            transferred_refinements.push(RefinementTransfer {
                child_vp: child.clone(),
                from_variant: parent.clone(),
                to_variant: s.clone(),
            });
        }
    }

    let mut transferred_interactions = Vec::new();
    let (touching, mut kept): (Vec<_>, BTreeSet<_>) = {
        let (t, k): (Vec<_>, Vec<_>) =
            plm.vm.interactions.iter().cloned().partition(|i| pairs.contains_key(&i.from) || pairs.contains_key(&i.to));
        (t, k.into_iter().collect())
    };
    for i in &touching {
        let rewritten = i.map(|n| pairs.get(n).unwrap_or(n).clone());
        let result = if rewritten.from == rewritten.to || kept.contains(&rewritten) {
            None
        } else {
            kept.insert(rewritten.clone());
            Some(InteractionEdge::from(&rewritten))
        };
        transferred_interactions.push(InteractionTransfer { original: i.into(), rewritten: result });
    }
    out.vm.interactions = kept;

    let record = MergeRecord {
        source_vp: source.clone(),
        target_vp: target.clone(),
        variant_pairing: pairs,
        rebound_bindings,
        transferred_refinements,
        transferred_interactions,
    };
    Ok((out, record))
}

/// First mergeable pair in visiting order, if any.
fn next_merge(vm: &VariabilityModel) -> Option<(VpId, VpId)> {
    for (root, _) in roots_by_size(vm) {
        for (source, target) in interacting_pairs(vm, &root) {
            if vm.parent_of(&source) != vm.parent_of(&target) {
                continue;
            }
            if check_completeness(vm, &source, &target) && check_uniqueness(vm, &source, &target) {
                return Some((source, target));
            }
        }
    }
    None
}

/// Merges variation points until a full pass finds nothing to merge.
pub fn reduce(plm: &ProductLineModel) -> (ProductLineModel, ReductionTrace) {
    let mut current = plm.clone();
    let mut trace = ReductionTrace::default();
    loop {
        trace.pass_count += 1;
        let Some((source, target)) = next_merge(&current.vm) else { break };
        let (next, record) = merge(&current, &source, &target).expect("pair was checked as mergeable");
        trace.merges.push(record);
        current = next;
    }
    (current, trace)
}

/// Re-applies a trace to `plm`, checking each merge's preconditions and that
/// it reproduces the recorded merge exactly.
pub fn replay(plm: &ProductLineModel, trace: &ReductionTrace) -> Result<ProductLineModel, ReductionError> {
    let mut current = plm.clone();
    for (index, record) in trace.merges.iter().enumerate() {
        let (next, again) = merge(&current, &record.source_vp, &record.target_vp)?;
        if &again != record {
            return Err(ReductionError::ReplayMismatch { index });
        }
        current = next;
    }
    Ok(current)
}
