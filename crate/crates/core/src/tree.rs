//! Tree metrics over the refinement forest of a variability model.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ModelError;
use crate::model::{VariabilityModel, VariantId, VpId};

/// Adjacency index over a variability model: variants per variation point
/// and child variation points per variant.
pub(crate) struct ForestIndex<'a> {
    pub variants: BTreeMap<&'a VpId, Vec<&'a VariantId>>,
    pub children: BTreeMap<&'a VariantId, Vec<&'a VpId>>,
}

impl<'a> ForestIndex<'a> {
    pub fn new(vm: &'a VariabilityModel) -> Self {
        let mut variants: BTreeMap<&VpId, Vec<&VariantId>> = BTreeMap::new();
        for v in vm.variants.values() {
            variants.entry(&v.vp).or_default().push(&v.id);
        }
        let mut children: BTreeMap<&VariantId, Vec<&VpId>> = BTreeMap::new();
        for (child, parent) in &vm.refinements {
            children.entry(parent).or_default().push(child);
        }
        ForestIndex { variants, children }
    }

    pub fn variants_of(&self, vp: &VpId) -> &[&'a VariantId] {
        self.variants.get(vp).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn children_of(&self, variant: &VariantId) -> &[&'a VpId] {
        self.children.get(variant).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Variation points of the tree rooted at `root`, pre-order, `root` first.
    pub fn tree_vps(&self, root: &'a VpId) -> Vec<&'a VpId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(vp) = stack.pop() {
            if !seen.insert(vp) {
                continue;
            }
            out.push(vp);
            for v in self.variants_of(vp).iter().rev() {
                stack.extend(self.children_of(v).iter().rev());
            }
        }
        out
    }

    /// All variants in the tree rooted at `root`, ascending by id.
    pub fn tree_variants(&self, root: &'a VpId) -> Vec<&'a VariantId> {
        let mut out: Vec<_> = self.tree_vps(root).into_iter().flat_map(|vp| self.variants_of(vp).iter().copied()).collect();
        out.sort();
        out
    }
}

/// Number of variants reachable from `root` through realization and
/// refinement edges, at every depth.
pub fn tree_size(root: &VpId, vm: &VariabilityModel) -> Result<usize, ModelError> {
    if !vm.variation_points.contains_key(root) {
        return Err(ModelError::UnknownVariationPoint(root.clone()));
    }
    let index = ForestIndex::new(vm);
    Ok(index.tree_vps(root).iter().map(|vp| index.variants_of(vp).len()).sum())
}

/// Root variation points (no refinement parent), ascending by id.
pub fn roots(vm: &VariabilityModel) -> Vec<VpId> {
    vm.roots().into_iter().cloned().collect()
}

/// Roots ordered by descending tree size, ties by ascending id.
pub fn roots_by_size(vm: &VariabilityModel) -> Vec<(VpId, usize)> {
    let index = ForestIndex::new(vm);
    let mut sized: Vec<(VpId, usize)> = vm
        .roots()
        .into_iter()
        .map(|r| (r.clone(), index.tree_vps(r).iter().map(|vp| index.variants_of(vp).len()).sum()))
        .collect();
    sized.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    sized
}
