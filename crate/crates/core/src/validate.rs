//! Structural validation of product-line models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{
    ActivityId, Binding, Layer, LayeredModel, ProductLineModel, RefinementKind, VariabilityModel, VpId,
};

/// The invariant a [`Violation`] breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Map key and the stored id disagree.
    IdentifierKey,
    DanglingReference,
    /// Artifact membership and the activity's artifact field disagree.
    ArtifactMembership,
    /// Activity layer differs from its artifact's layer.
    LayerMismatch,
    /// Refinement parent is not exactly one layer above the child artifact.
    LayerAdjacency,
    RefinementKind,
    /// An artifact refines more than one activity.
    MultipleRefinementParents,
    GroupedMandatory,
    SelfInteraction,
    /// Artifact-level interaction between different layers.
    InteractionLayer,
    /// Variant-level interaction inside a single variation point.
    SameVariationPoint,
    /// A variant does not realize an existing variation point.
    Realization,
    /// The refinement relation over variation points has a cycle.
    ForestCycle,
    /// Activity and artifact bindings point at different variation points.
    BindingConsistency,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::IdentifierKey => "identifier-key",
            Rule::DanglingReference => "dangling-reference",
            Rule::ArtifactMembership => "artifact-membership",
            Rule::LayerMismatch => "layer-mismatch",
            Rule::LayerAdjacency => "layer-adjacency",
            Rule::RefinementKind => "refinement-kind",
            Rule::MultipleRefinementParents => "multiple-refinement-parents",
            Rule::GroupedMandatory => "grouped-mandatory",
            Rule::SelfInteraction => "self-interaction",
            Rule::InteractionLayer => "interaction-layer",
            Rule::SameVariationPoint => "same-variation-point",
            Rule::Realization => "realization",
            Rule::ForestCycle => "forest-cycle",
            Rule::BindingConsistency => "binding-consistency",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub rule: Rule,
    /// Offending identifiers.
    pub ids: Vec<String>,
    pub message: String,
}

impl Violation {
    pub fn new(rule: Rule, ids: impl IntoIterator<Item = impl ToString>, message: impl Into<String>) -> Self {
        Violation { rule, ids: ids.into_iter().map(|i| i.to_string()).collect(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} ({})", self.rule.as_str(), self.message, self.ids.join(", "))
    }
}

/// Checks every structural invariant of a product-line model. An empty
/// result means the model is valid.
///
/// When the model carries no layered artifacts (a bare variability model),
/// the activity and artifact ends of bindings are treated as external
/// references and are not resolved.
pub fn validate(plm: &ProductLineModel) -> Vec<Violation> {
    let mut out = validate_layered(&plm.artifacts);
    out.extend(validate_vm(&plm.vm));
    validate_bindings(plm, &mut out);
    out
}

pub fn validate_layered(model: &LayeredModel) -> Vec<Violation> {
    let mut out = Vec::new();

    for (key, artifact) in &model.artifacts {
        if key != &artifact.id {
            out.push(Violation::new(Rule::IdentifierKey, [key.as_str(), artifact.id.as_str()], "artifact key mismatch"));
        }
        for member in &artifact.activities {
            match model.activities.get(member) {
                None => out.push(Violation::new(
                    Rule::DanglingReference,
                    [artifact.id.as_str(), member.as_str()],
                    "artifact lists unknown activity",
                )),
                Some(act) if act.artifact != artifact.id => out.push(Violation::new(
                    Rule::ArtifactMembership,
                    [artifact.id.as_str(), member.as_str()],
                    format!("activity belongs to artifact {}", act.artifact),
                )),
                Some(_) => {}
            }
        }
    }

    for (key, act) in &model.activities {
        if key != &act.id {
            out.push(Violation::new(Rule::IdentifierKey, [key.as_str(), act.id.as_str()], "activity key mismatch"));
        }
        match model.artifacts.get(&act.artifact) {
            None => out.push(Violation::new(
                Rule::DanglingReference,
                [act.id.as_str(), act.artifact.as_str()],
                "activity references unknown artifact",
            )),
            Some(artifact) => {
                if !artifact.activities.contains(&act.id) {
                    out.push(Violation::new(
                        Rule::ArtifactMembership,
                        [act.artifact.as_str(), act.id.as_str()],
                        "artifact does not list its activity",
                    ));
                }
                if artifact.layer != act.layer {
                    out.push(Violation::new(
                        Rule::LayerMismatch,
                        [act.id.as_str(), act.artifact.as_str()],
                        format!("activity layer {} differs from artifact layer {}", act.layer, artifact.layer),
                    ));
                }
            }
        }
        if act.mandatory && act.group.is_some() {
            out.push(Violation::new(Rule::GroupedMandatory, [act.id.as_str()], "mandatory activity carries a group label"));
        }
    }

    let mut parents_per_child: BTreeMap<_, Vec<&ActivityId>> = BTreeMap::new();
    for r in &model.refinements {
        parents_per_child.entry(&r.child_artifact).or_default().push(&r.parent_activity);
        let child = model.artifacts.get(&r.child_artifact);
        let parent = model.activities.get(&r.parent_activity);
        if child.is_none() {
            out.push(Violation::new(Rule::DanglingReference, [r.child_artifact.as_str()], "refinement child artifact unknown"));
        }
        if parent.is_none() {
            out.push(Violation::new(
                Rule::DanglingReference,
                [r.parent_activity.as_str()],
                "refinement parent activity unknown",
            ));
        }
        let (Some(child), Some(parent)) = (child, parent) else { continue };
        if child.layer.above() != Some(parent.layer) {
            out.push(Violation::new(
                Rule::LayerAdjacency,
                [r.child_artifact.as_str(), r.parent_activity.as_str()],
                format!("{} artifact cannot refine a {} activity", child.layer, parent.layer),
            ));
        }
        let expected = if parent.layer == Layer::Feature {
            RefinementKind::FeatureRefinement
        } else {
            RefinementKind::FunctionalRefinement
        };
        if r.kind != expected {
            out.push(Violation::new(
                Rule::RefinementKind,
                [r.child_artifact.as_str(), r.parent_activity.as_str()],
                format!("refinement kind should be {expected:?}"),
            ));
        }
    }
    for (child, parents) in parents_per_child {
        if parents.len() > 1 {
            let mut ids = vec![child.to_string()];
            ids.extend(parents.iter().map(|p| p.to_string()));
            out.push(Violation::new(Rule::MultipleRefinementParents, ids, "artifact refines several activities"));
        }
    }

    for i in &model.interactions {
        let from = model.activities.get(&i.from);
        let to = model.activities.get(&i.to);
        for (end, found) in [(&i.from, from), (&i.to, to)] {
            if found.is_none() {
                out.push(Violation::new(Rule::DanglingReference, [end.as_str()], "interaction endpoint unknown"));
            }
        }
        if i.from == i.to {
            out.push(Violation::new(Rule::SelfInteraction, [i.from.as_str()], "interaction from an activity to itself"));
        }
        if let (Some(from), Some(to)) = (from, to) {
            if from.layer != to.layer {
                out.push(Violation::new(
                    Rule::InteractionLayer,
                    [i.from.as_str(), i.to.as_str()],
                    "artifact-level interaction crosses layers",
                ));
            }
        }
    }

    out
}

pub fn validate_vm(vm: &VariabilityModel) -> Vec<Violation> {
    let mut out = Vec::new();

    for (key, vp) in &vm.variation_points {
        if key != &vp.id {
            out.push(Violation::new(Rule::IdentifierKey, [key.as_str(), vp.id.as_str()], "variation point key mismatch"));
        }
    }
    for (key, v) in &vm.variants {
        if key != &v.id {
            out.push(Violation::new(Rule::IdentifierKey, [key.as_str(), v.id.as_str()], "variant key mismatch"));
        }
        if !vm.variation_points.contains_key(&v.vp) {
            out.push(Violation::new(
                Rule::Realization,
                [v.id.as_str(), v.vp.as_str()],
                "variant realizes an unknown variation point",
            ));
        }
    }

    for (child, parent) in &vm.refinements {
        if !vm.variation_points.contains_key(child) {
            out.push(Violation::new(Rule::DanglingReference, [child.as_str()], "refinement child variation point unknown"));
        }
        if !vm.variants.contains_key(parent) {
            out.push(Violation::new(Rule::DanglingReference, [parent.as_str()], "refinement parent variant unknown"));
        }
    }
    for cycle in refinement_cycles(vm) {
        out.push(Violation::new(Rule::ForestCycle, &cycle, "variability refinement forms a cycle"));
    }

    for i in &vm.interactions {
        for end in [&i.from, &i.to] {
            if !vm.variants.contains_key(end) {
                out.push(Violation::new(Rule::DanglingReference, [end.as_str()], "interaction endpoint unknown"));
            }
        }
        if i.from == i.to {
            out.push(Violation::new(Rule::SelfInteraction, [i.from.as_str()], "interaction from a variant to itself"));
        } else if let (Some(a), Some(b)) = (vm.vp_of(&i.from), vm.vp_of(&i.to)) {
            if a == b {
                out.push(Violation::new(
                    Rule::SameVariationPoint,
                    [i.from.as_str(), i.to.as_str()],
                    format!("both variants realize {a}"),
                ));
            }
        }
    }

    out
}

/// Each cycle once, as its sorted set of variation point ids.
fn refinement_cycles(vm: &VariabilityModel) -> BTreeSet<Vec<VpId>> {
    let mut cycles = BTreeSet::new();
    for start in vm.variation_points.keys() {
        let mut path: Vec<&VpId> = vec![start];
        let mut current = start;
        while let Some(next) = vm.parent_of(current).and_then(|v| vm.vp_of(v)) {
            if let Some(pos) = path.iter().position(|p| *p == next) {
                let mut cycle: Vec<VpId> = path[pos..].iter().map(|p| (*p).clone()).collect();
                cycle.sort();
                cycles.insert(cycle);
                break;
            }
            path.push(next);
            current = next;
        }
    }
    cycles
}

fn validate_bindings(plm: &ProductLineModel, out: &mut Vec<Violation>) {
    let resolve_artifacts = !plm.artifacts.is_empty();
    let mut artifact_vp: BTreeMap<_, Vec<&VpId>> = BTreeMap::new();

    for b in &plm.bindings {
        match b {
            Binding::Activity { activity, variant } => {
                if !plm.vm.variants.contains_key(variant) {
                    out.push(Violation::new(Rule::DanglingReference, [activity.as_str(), variant.as_str()], "binding to unknown variant"));
                }
                if resolve_artifacts && !plm.artifacts.activities.contains_key(activity) {
                    out.push(Violation::new(Rule::DanglingReference, [activity.as_str(), variant.as_str()], "binding of unknown activity"));
                }
            }
            Binding::Artifact { artifact, vp } => {
                if !plm.vm.variation_points.contains_key(vp) {
                    out.push(Violation::new(
                        Rule::DanglingReference,
                        [artifact.as_str(), vp.as_str()],
                        "binding to unknown variation point",
                    ));
                }
                if resolve_artifacts && !plm.artifacts.artifacts.contains_key(artifact) {
                    out.push(Violation::new(Rule::DanglingReference, [artifact.as_str(), vp.as_str()], "binding of unknown artifact"));
                }
                artifact_vp.entry(artifact).or_default().push(vp);
            }
        }
    }

    if artifact_vp.is_empty() {
        return;
    }
    for b in &plm.bindings {
        let Binding::Activity { activity, variant } = b else { continue };
        let Some(act) = plm.artifacts.activities.get(activity) else { continue };
        let Some(vps) = artifact_vp.get(&act.artifact) else { continue };
        let Some(realized) = plm.vm.vp_of(variant) else { continue };
        if !vps.contains(&realized) {
            out.push(Violation::new(
                Rule::BindingConsistency,
                [activity.as_str(), variant.as_str(), act.artifact.as_str()],
                format!("variant realizes {realized} but the artifact is bound elsewhere"),
            ));
        }
    }
}
