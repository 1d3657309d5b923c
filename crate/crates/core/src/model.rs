//! Product-line model types: layered functional artifacts, the hierarchical
//! variability model, and the artifact bindings that tie the two together.
//!
//! Collections are keyed by id in ordered maps so that every traversal is
//! deterministic (ascending lexicographic id order).

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

id_type!(
    /// Identifier of an activity inside a layered model.
    ActivityId
);
id_type!(
    /// Identifier of a functional artifact.
    ArtifactId
);
id_type!(
    /// Identifier of a variation point.
    VpId
);
id_type!(
    /// Identifier of a variant.
    VariantId
);

/// Abstraction layer of an artifact or variation point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Component,
    Functional,
    Feature,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Component, Layer::Functional, Layer::Feature];

    /// The layer directly above this one, if any.
    pub fn above(self) -> Option<Layer> {
        match self {
            Layer::Component => Some(Layer::Functional),
            Layer::Functional => Some(Layer::Feature),
            Layer::Feature => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Component => "component",
            Layer::Functional => "functional",
            Layer::Feature => "feature",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Activity {
    pub id: ActivityId,
    pub name: String,
    pub layer: Layer,
    pub artifact: ArtifactId,
    pub mandatory: bool,
    /// Variability group label, only meaningful on non-mandatory activities.
    pub group: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalArtifact {
    pub id: ArtifactId,
    pub layer: Layer,
    pub activities: BTreeSet<ActivityId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefinementKind {
    /// A functional-layer artifact refines a feature.
    FeatureRefinement,
    /// A component-layer artifact refines a functional requirement.
    FunctionalRefinement,
}

/// Cross-layer refinement: every activity of `child_artifact` refines
/// `parent_activity`, which lives exactly one layer above.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Refinement {
    pub child_artifact: ArtifactId,
    pub parent_activity: ActivityId,
    pub kind: RefinementKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionKind {
    Material,
    Information,
}

/// A directed material or information flow. The endpoint type fixes the
/// level: activities for the artifact level, variants for the variant level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interaction<N> {
    pub from: N,
    pub to: N,
    pub kind: InteractionKind,
    /// Marks a «requires» dependency, which is a special case of interaction.
    pub requires: bool,
}

impl<N> Interaction<N> {
    pub fn new(from: N, to: N, kind: InteractionKind) -> Self {
        Interaction { from, to, kind, requires: false }
    }

    pub fn requiring(mut self) -> Self {
        self.requires = true;
        self
    }

    /// Same interaction with both endpoints rewritten.
    pub fn map<M>(&self, mut f: impl FnMut(&N) -> M) -> Interaction<M> {
        Interaction { from: f(&self.from), to: f(&self.to), kind: self.kind, requires: self.requires }
    }
}

impl<N: PartialEq> Interaction<N> {
    pub fn touches(&self, node: &N) -> bool {
        &self.from == node || &self.to == node
    }

    /// The other endpoint, if `node` is one of them.
    pub fn other(&self, node: &N) -> Option<&N> {
        if &self.from == node {
            Some(&self.to)
        } else if &self.to == node {
            Some(&self.from)
        } else {
            None
        }
    }
}

pub type ActivityInteraction = Interaction<ActivityId>;
pub type VariantInteraction = Interaction<VariantId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariationPoint {
    pub id: VpId,
    pub name: String,
    pub level: Layer,
}

/// A variant; `vp` is its realization dependency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    pub id: VariantId,
    pub name: String,
    pub vp: VpId,
}

/// Artifact dependency between the functional artifacts and the variability
/// model.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binding {
    Activity { activity: ActivityId, variant: VariantId },
    Artifact { artifact: ArtifactId, vp: VpId },
}

/// Three-layer functional artifact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LayeredModel {
    pub artifacts: BTreeMap<ArtifactId, FunctionalArtifact>,
    pub activities: BTreeMap<ActivityId, Activity>,
    pub refinements: BTreeSet<Refinement>,
    pub interactions: BTreeSet<ActivityInteraction>,
}

impl LayeredModel {
    pub fn is_empty(&self) -> bool {
        self.artifacts.is_empty()
            && self.activities.is_empty()
            && self.refinements.is_empty()
            && self.interactions.is_empty()
    }

    /// Adds an activity and registers it with its artifact, creating the
    /// artifact on first use.
    pub fn add_activity(&mut self, activity: Activity) {
        self.artifacts
            .entry(activity.artifact.clone())
            .or_insert_with(|| FunctionalArtifact {
                id: activity.artifact.clone(),
                layer: activity.layer,
                activities: BTreeSet::new(),
            })
            .activities
            .insert(activity.id.clone());
        self.activities.insert(activity.id.clone(), activity);
    }

    /// The activity refined by `activity`'s artifact, if any.
    pub fn refined_parent(&self, activity: &ActivityId) -> Option<&ActivityId> {
        let artifact = &self.activities.get(activity)?.artifact;
        self.refinements
            .iter()
            .find(|r| &r.child_artifact == artifact)
            .map(|r| &r.parent_activity)
    }

    pub fn layer_of(&self, activity: &ActivityId) -> Option<Layer> {
        self.activities.get(activity).map(|a| a.layer)
    }
}

/// Variability model with hierarchy: variation points, their variants, the
/// variant-level dependencies and the refinement forest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariabilityModel {
    pub variation_points: BTreeMap<VpId, VariationPoint>,
    pub variants: BTreeMap<VariantId, Variant>,
    pub interactions: BTreeSet<VariantInteraction>,
    /// Refinement edges, child variation point -> parent variant. Keyed by
    /// child, so a variation point has at most one parent.
    pub refinements: BTreeMap<VpId, VariantId>,
}

impl VariabilityModel {
    pub fn add_variation_point(&mut self, id: impl Into<VpId>, name: impl Into<String>, level: Layer) {
        let id = id.into();
        self.variation_points.insert(id.clone(), VariationPoint { id, name: name.into(), level });
    }

    pub fn add_variant(&mut self, id: impl Into<VariantId>, name: impl Into<String>, vp: impl Into<VpId>) {
        let id = id.into();
        self.variants.insert(id.clone(), Variant { id, name: name.into(), vp: vp.into() });
    }

    pub fn add_refinement(&mut self, child: impl Into<VpId>, parent: impl Into<VariantId>) {
        self.refinements.insert(child.into(), parent.into());
    }

    pub fn add_interaction(&mut self, interaction: VariantInteraction) {
        self.interactions.insert(interaction);
    }

    /// Variants realizing `vp`, ascending by id.
    pub fn variants_of<'a>(&'a self, vp: &'a VpId) -> impl Iterator<Item = &'a VariantId> + 'a {
        self.variants.values().filter(move |v| &v.vp == vp).map(|v| &v.id)
    }

    pub fn variant_count(&self, vp: &VpId) -> usize {
        self.variants_of(vp).count()
    }

    pub fn vp_of(&self, variant: &VariantId) -> Option<&VpId> {
        self.variants.get(variant).map(|v| &v.vp)
    }

    /// Child variation points refining `variant`, ascending by id.
    pub fn children_of<'a>(&'a self, variant: &'a VariantId) -> impl Iterator<Item = &'a VpId> + 'a {
        self.refinements.iter().filter(move |(_, p)| *p == variant).map(|(c, _)| c)
    }

    pub fn parent_of(&self, vp: &VpId) -> Option<&VariantId> {
        self.refinements.get(vp)
    }

    /// Parent variant of a variant's own variation point, i.e. the derived
    /// variant-to-variant refinement edge.
    pub fn variant_parent(&self, variant: &VariantId) -> Option<&VariantId> {
        self.vp_of(variant).and_then(|vp| self.parent_of(vp))
    }

    /// Variation points with no refinement parent, ascending by id.
    pub fn roots(&self) -> Vec<&VpId> {
        self.variation_points.keys().filter(|vp| !self.refinements.contains_key(*vp)).collect()
    }

    /// Whether `descendant` lies in the tree below `ancestor` (strictly).
    pub fn is_descendant(&self, descendant: &VpId, ancestor: &VpId) -> bool {
        let mut current = descendant;
        let mut steps = 0;
        while let Some(parent_vp) = self.parent_of(current).and_then(|v| self.vp_of(v)) {
            if parent_vp == ancestor {
                return true;
            }
            current = parent_vp;
            steps += 1;
            if steps > self.variation_points.len() {
                // cyclic; validate() reports it
                return false;
            }
        }
        false
    }
}

/// Variability model bound to its functional artifacts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProductLineModel {
    pub vm: VariabilityModel,
    pub artifacts: LayeredModel,
    pub bindings: BTreeSet<Binding>,
}

impl ProductLineModel {
    pub fn from_vm(vm: VariabilityModel) -> Self {
        ProductLineModel { vm, ..Default::default() }
    }

    pub fn activity_binding_count(&self) -> usize {
        self.bindings.iter().filter(|b| matches!(b, Binding::Activity { .. })).count()
    }

    /// Activities bound to `variant`, ascending.
    pub fn activities_of<'a>(&'a self, variant: &'a VariantId) -> impl Iterator<Item = &'a ActivityId> + 'a {
        self.bindings.iter().filter_map(move |b| match b {
            Binding::Activity { activity, variant: v } if v == variant => Some(activity),
            _ => None,
        })
    }

    /// Variant bound to `activity`, if any (first in id order).
    pub fn variant_of(&self, activity: &ActivityId) -> Option<&VariantId> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Activity { activity: a, variant } if a == activity => Some(variant),
            _ => None,
        })
    }
}
