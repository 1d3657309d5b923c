//! Derivation of an initial hierarchical variability model from a layered
//! functional artifact.
//!
//! The pipeline is: find variable activities ([`diff`]), turn each group of
//! them into a variation point with one variant per activity
//! ([`create_variation_points`]), then carry the artifact structure over to
//! the variability model layer by layer ([`mapping`]):
//!
//! * an interaction between two variable activities becomes an interaction
//!   between their variants;
//! * an interaction between two variable activities whose artifacts refine
//!   activities one layer up induces an interaction between those parents;
//! * an artifact refining a bound activity makes the variation points of its
//!   variable activities refine that activity's variant.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::DerivationError;
use crate::ingest::ProductSet;
use crate::model::{ActivityId, Binding, Layer, LayeredModel, ProductLineModel, VariabilityModel, VariantId, VpId};
use crate::validate::validate;

/// Variable activities and their grouping into future variation points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DifSet {
    pub difs: BTreeSet<ActivityId>,
    /// Group key -> member activities. Groups partition `difs`.
    pub groups: BTreeMap<String, BTreeSet<ActivityId>>,
}

impl DifSet {
    pub fn is_empty(&self) -> bool {
        self.difs.is_empty()
    }
}

/// When refinement edges between variation points are created.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RefinementMode {
    /// For every refinement whose parent activity is bound to a variant.
    #[default]
    Unconditional,
    /// Only for refinements witnessed by an interaction between two variable
    /// child activities whose parents are both bound.
    InteractionWitnessed,
}

/// Finds the variable activities of `model`.
///
/// With a product set an activity is variable when its presence differs
/// between products; otherwise it is variable when it is not mandatory.
/// Each variable activity is grouped by its label, or failing that by the
/// activity its artifact refines.
pub fn diff(model: &LayeredModel, products: Option<&ProductSet>) -> Result<DifSet, DerivationError> {
    let difs: BTreeSet<ActivityId> = match products {
        Some(set) => model
            .activities
            .keys()
            .filter(|id| {
                let present = set.products.values().filter(|inc| inc.contains(*id)).count();
                present > 0 && present < set.products.len()
            })
            .cloned()
            .collect(),
        None => model.activities.values().filter(|a| !a.mandatory).map(|a| a.id.clone()).collect(),
    };

    let mut groups: BTreeMap<String, BTreeSet<ActivityId>> = BTreeMap::new();
    for id in &difs {
        let activity = &model.activities[id];
        let key = match (&activity.group, model.refined_parent(id)) {
            (Some(label), _) => label.clone(),
            (None, Some(parent)) => parent.to_string(),
            (None, None) => return Err(DerivationError::Ungroupable(id.clone())),
        };
        groups.entry(key).or_default().insert(id.clone());
    }
    Ok(DifSet { difs, groups })
}

/// One variation point per group (id and name are the group key), one
/// variant per variable activity (id = activity id, name = activity name)
/// and a binding between each activity and its variant.
pub fn create_variation_points(difset: &DifSet, model: &LayeredModel) -> Result<ProductLineModel, DerivationError> {
    let mut vm = VariabilityModel::default();
    let mut bindings = BTreeSet::new();
    for (key, members) in &difset.groups {
        let mut level = None;
        for id in members {
            let activity = model.activities.get(id).ok_or_else(|| DerivationError::UnknownActivity(id.clone()))?;
            match level {
                None => level = Some(activity.layer),
                Some(l) if l != activity.layer => {
                    return Err(DerivationError::GroupSpansLayers { group: key.clone(), first: l, second: activity.layer })
                }
                Some(_) => {}
            }
            vm.add_variant(id.as_str(), activity.name.as_str(), key.as_str());
            bindings.insert(Binding::Activity { activity: id.clone(), variant: VariantId::new(id.as_str()) });
        }
        if let Some(level) = level {
            vm.add_variation_point(key.as_str(), key.as_str(), level);
        }
    }
    Ok(ProductLineModel { vm, artifacts: model.clone(), bindings })
}

fn add_parent(vm: &mut VariabilityModel, child: &VpId, parent: &VariantId) -> Result<(), DerivationError> {
    match vm.refinements.get(child) {
        Some(existing) if existing != parent => Err(DerivationError::ConflictingParent {
            vp: child.clone(),
            existing: existing.clone(),
            new: parent.clone(),
        }),
        Some(_) => Ok(()),
        None => {
            vm.refinements.insert(child.clone(), parent.clone());
            Ok(())
        }
    }
}

/// Transfers relations from layer `lower` (and, when `upper` is the layer
/// directly above, into `upper`). Re-running a pass is a no-op.
pub fn mapping(
    lower: Layer,
    upper: Layer,
    plm: &ProductLineModel,
    mode: RefinementMode,
) -> Result<ProductLineModel, DerivationError> {
    let cross = match lower.above() {
        _ if upper == lower => false,
        Some(above) if above == upper => true,
        _ => return Err(DerivationError::LayerSkip { lower, upper }),
    };

    let mut out = plm.clone();
    let bound: BTreeMap<&ActivityId, &VariantId> = plm
        .bindings
        .iter()
        .filter_map(|b| match b {
            Binding::Activity { activity, variant } => Some((activity, variant)),
            Binding::Artifact { .. } => None,
        })
        .collect();
    let in_lower = |a: &ActivityId| plm.artifacts.layer_of(a) == Some(lower);
    let vp_of = |v: &VariantId| plm.vm.vp_of(v).cloned();

    for i in &plm.artifacts.interactions {
        if !in_lower(&i.from) || !in_lower(&i.to) {
            continue;
        }
        let (Some(&vi), Some(&vj)) = (bound.get(&i.from), bound.get(&i.to)) else { continue };

        // Interactions inside one variation point carry no constraint under
        // choose-exactly-one and would break the model invariants.
        if vp_of(vi) != vp_of(vj) {
            out.vm.interactions.insert(i.map(|a| bound[a].clone()));
        }

        if !cross {
            continue;
        }
        let (Some(pk), Some(pl)) = (plm.artifacts.refined_parent(&i.from), plm.artifacts.refined_parent(&i.to)) else {
            continue;
        };
        if pk != pl {
            out.artifacts.interactions.insert(i.map(|a| plm.artifacts.refined_parent(a).unwrap().clone()));
        }
        if mode == RefinementMode::InteractionWitnessed {
            if let (Some(&vk), Some(&vl)) = (bound.get(pk), bound.get(pl)) {
                add_parent(&mut out.vm, &vp_of(vi).expect("bound variant exists"), vk)?;
                add_parent(&mut out.vm, &vp_of(vj).expect("bound variant exists"), vl)?;
            }
        }
    }

    if cross && mode == RefinementMode::Unconditional {
        for r in &plm.artifacts.refinements {
            let Some(&parent_variant) = bound.get(&r.parent_activity) else { continue };
            let Some(child) = plm.artifacts.artifacts.get(&r.child_artifact) else { continue };
            if child.layer != lower {
                continue;
            }
            for act in &child.activities {
                if let Some(vp) = bound.get(act).and_then(|v| vp_of(v)) {
                    add_parent(&mut out.vm, &vp, parent_variant)?;
                }
            }
        }
    }

    Ok(out)
}

/// Full derivation: diff, variation point creation, then mapping from the
/// component layer up to the feature layer.
pub fn derive_initial_vm(
    model: &LayeredModel,
    products: Option<&ProductSet>,
    mode: RefinementMode,
) -> Result<ProductLineModel, DerivationError> {
    let difset = diff(model, products)?;
    let mut plm = create_variation_points(&difset, model)?;
    for (lower, upper) in [
        (Layer::Component, Layer::Functional),
        (Layer::Functional, Layer::Feature),
        (Layer::Feature, Layer::Feature),
    ] {
        plm = mapping(lower, upper, &plm, mode)?;
    }
    let violations = validate(&plm);
    if !violations.is_empty() {
        return Err(DerivationError::Invalid(violations));
    }
    Ok(plm)
}
