//! Versioned JSON document format for layered models, variability models,
//! product-line models, configurations and reduction traces.
//!
//! Every document is an object `{"schema_version", "kind", "body"}`.
//! Serialization is canonical: object keys sorted, collections ordered by
//! id, two-space indentation, UTF-8, trailing newline. Parsing rejects
//! unknown fields and validates references before returning.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::{DeserializeOwned, IgnoredAny};
use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::IngestError;
use crate::model::{
    Activity, ActivityId, ArtifactId, Binding, FunctionalArtifact, Interaction, InteractionKind, Layer,
    LayeredModel, ProductLineModel, Refinement, RefinementKind, VariabilityModel, Variant, VariantId,
    VariationPoint, VpId,
};
use crate::reduction::ReductionTrace;
use crate::validate::{validate, validate_layered, Rule, Violation};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentKind {
    LayeredModel,
    VariabilityModel,
    ProductLineModel,
    Configuration,
    ReductionTrace,
}

impl DocumentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DocumentKind::LayeredModel => "layered-model",
            DocumentKind::VariabilityModel => "variability-model",
            DocumentKind::ProductLineModel => "product-line-model",
            DocumentKind::Configuration => "configuration",
            DocumentKind::ReductionTrace => "reduction-trace",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            DocumentKind::LayeredModel,
            DocumentKind::VariabilityModel,
            DocumentKind::ProductLineModel,
            DocumentKind::Configuration,
            DocumentKind::ReductionTrace,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

/// Per-product activity inclusion, used to find variability by diffing
/// legacy products.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProductSet {
    pub products: BTreeMap<String, BTreeSet<ActivityId>>,
}

impl ProductSet {
    /// Violations for activities that do not exist in `model`.
    pub fn check_against(&self, model: &LayeredModel) -> Vec<Violation> {
        let mut out = Vec::new();
        for (product, includes) in &self.products {
            for a in includes {
                if !model.activities.contains_key(a) {
                    out.push(Violation::new(
                        Rule::DanglingReference,
                        [product.as_str(), a.as_str()],
                        "product includes unknown activity",
                    ));
                }
            }
        }
        out
    }
}

/// A parsed document of any kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelDocument {
    Layered { model: LayeredModel, products: Option<ProductSet> },
    Variability(ProductLineModel),
    ProductLine(ProductLineModel),
    Configuration(Configuration),
    Trace(ReductionTrace),
}

// ---- wire format ----

#[derive(Deserialize)]
struct Header {
    schema_version: String,
    kind: String,
    #[allow(dead_code)]
    body: IgnoredAny,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<B> {
    schema_version: String,
    kind: String,
    body: B,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireArtifact {
    id: ArtifactId,
    layer: Layer,
    activities: Vec<ActivityId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireActivity {
    id: ActivityId,
    name: String,
    layer: Layer,
    artifact: ArtifactId,
    mandatory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRefinement {
    child_artifact: ArtifactId,
    parent_activity: ActivityId,
    kind: RefinementKind,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireInteraction<N> {
    from: N,
    to: N,
    kind: InteractionKind,
    #[serde(default, skip_serializing_if = "is_false")]
    requires: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireProduct {
    id: String,
    includes: Vec<ActivityId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayeredBody {
    artifacts: Vec<WireArtifact>,
    activities: Vec<WireActivity>,
    refinements: Vec<WireRefinement>,
    interactions: Vec<WireInteraction<ActivityId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    products: Option<Vec<WireProduct>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireVariationPoint {
    id: VpId,
    name: String,
    level: Layer,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireVariant {
    id: VariantId,
    name: String,
    vp: VpId,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireVpRefinement {
    child_vp: VpId,
    parent_variant: VariantId,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireBinding {
    Activity(ActivityBinding),
    Artifact(ArtifactBinding),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivityBinding {
    activity: ActivityId,
    variant: VariantId,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArtifactBinding {
    artifact: ArtifactId,
    vp: VpId,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariabilityBody {
    variation_points: Vec<WireVariationPoint>,
    variants: Vec<WireVariant>,
    interactions: Vec<WireInteraction<VariantId>>,
    refinements: Vec<WireVpRefinement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    bindings: Vec<WireBinding>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductLineBody {
    layered_model: LayeredBody,
    variability_model: VariabilityBody,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigurationBody {
    selection: Vec<VariantId>,
}

// ---- parsing ----

fn typed<B: DeserializeOwned>(bytes: &[u8]) -> Result<B, IngestError> {
    let env: Envelope<B> = serde_json::from_slice(bytes).map_err(IngestError::from_json)?;
    Ok(env.body)
}

fn header(bytes: &[u8]) -> Result<DocumentKind, IngestError> {
    let h: Header = serde_json::from_slice(bytes).map_err(IngestError::from_json)?;
    if h.schema_version != SCHEMA_VERSION {
        return Err(IngestError::UnsupportedSchema(h.schema_version));
    }
    DocumentKind::parse(&h.kind).ok_or(IngestError::WrongKind { expected: "known".into(), found: h.kind })
}

fn expect(found: DocumentKind, allowed: &[DocumentKind]) -> Result<(), IngestError> {
    if allowed.contains(&found) {
        Ok(())
    } else {
        let expected = allowed.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(" or ");
        Err(IngestError::WrongKind { expected, found: found.as_str().into() })
    }
}

fn insert_unique<K: Ord + ToString, V>(map: &mut BTreeMap<K, V>, key: K, value: V, what: &'static str) -> Result<(), IngestError> {
    if map.contains_key(&key) {
        return Err(IngestError::DuplicateId { what, id: key.to_string() });
    }
    map.insert(key, value);
    Ok(())
}

fn layered_from_wire(body: LayeredBody) -> Result<(LayeredModel, Option<ProductSet>), IngestError> {
    let mut model = LayeredModel::default();
    for a in body.artifacts {
        let artifact = FunctionalArtifact { id: a.id.clone(), layer: a.layer, activities: a.activities.into_iter().collect() };
        insert_unique(&mut model.artifacts, a.id, artifact, "artifact")?;
    }
    for a in body.activities {
        let activity = Activity {
            id: a.id.clone(),
            name: a.name,
            layer: a.layer,
            artifact: a.artifact,
            mandatory: a.mandatory,
            group: a.group,
        };
        insert_unique(&mut model.activities, a.id, activity, "activity")?;
    }
    model.refinements = body
        .refinements
        .into_iter()
        .map(|r| Refinement { child_artifact: r.child_artifact, parent_activity: r.parent_activity, kind: r.kind })
        .collect();
    model.interactions = body
        .interactions
        .into_iter()
        .map(|i| Interaction { from: i.from, to: i.to, kind: i.kind, requires: i.requires })
        .collect();
    let products = match body.products {
        None => None,
        Some(list) => {
            let mut set = ProductSet::default();
            for p in list {
                insert_unique(&mut set.products, p.id, p.includes.into_iter().collect(), "product")?;
            }
            Some(set)
        }
    };
    Ok((model, products))
}

fn vm_from_wire(body: VariabilityBody) -> Result<(VariabilityModel, BTreeSet<Binding>), IngestError> {
    let mut vm = VariabilityModel::default();
    for vp in body.variation_points {
        let point = VariationPoint { id: vp.id.clone(), name: vp.name, level: vp.level };
        insert_unique(&mut vm.variation_points, vp.id, point, "variation point")?;
    }
    for v in body.variants {
        let variant = Variant { id: v.id.clone(), name: v.name, vp: v.vp };
        insert_unique(&mut vm.variants, v.id, variant, "variant")?;
    }
    vm.interactions = body
        .interactions
        .into_iter()
        .map(|i| Interaction { from: i.from, to: i.to, kind: i.kind, requires: i.requires })
        .collect();
    for r in body.refinements {
        if vm.refinements.contains_key(&r.child_vp) {
            return Err(IngestError::MultipleParents(r.child_vp));
        }
        vm.refinements.insert(r.child_vp, r.parent_variant);
    }
    let bindings = body
        .bindings
        .into_iter()
        .map(|b| match b {
            WireBinding::Activity(a) => Binding::Activity { activity: a.activity, variant: a.variant },
            WireBinding::Artifact(a) => Binding::Artifact { artifact: a.artifact, vp: a.vp },
        })
        .collect();
    Ok((vm, bindings))
}

fn check(violations: Vec<Violation>) -> Result<(), IngestError> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(IngestError::Invalid(violations))
    }
}

/// Parses any supported document and validates it.
pub fn parse_document(bytes: &[u8]) -> Result<ModelDocument, IngestError> {
    match header(bytes)? {
        DocumentKind::LayeredModel => {
            let (model, products) = parse_layered_model(bytes)?;
            Ok(ModelDocument::Layered { model, products })
        }
        DocumentKind::VariabilityModel => parse_variability_model(bytes).map(ModelDocument::Variability),
        DocumentKind::ProductLineModel => parse_variability_model(bytes).map(ModelDocument::ProductLine),
        DocumentKind::Configuration => parse_configuration(bytes).map(ModelDocument::Configuration),
        DocumentKind::ReductionTrace => parse_trace(bytes).map(ModelDocument::Trace),
    }
}

/// Parses a `layered-model` document, with its optional product set.
pub fn parse_layered_model(bytes: &[u8]) -> Result<(LayeredModel, Option<ProductSet>), IngestError> {
    expect(header(bytes)?, &[DocumentKind::LayeredModel])?;
    let (model, products) = layered_from_wire(typed(bytes)?)?;
    let mut violations = validate_layered(&model);
    if let Some(p) = &products {
        violations.extend(p.check_against(&model));
    }
    check(violations)?;
    Ok((model, products))
}

/// Parses a `variability-model` or `product-line-model` document.
pub fn parse_variability_model(bytes: &[u8]) -> Result<ProductLineModel, IngestError> {
    let kind = header(bytes)?;
    expect(kind, &[DocumentKind::VariabilityModel, DocumentKind::ProductLineModel])?;
    let plm = if kind == DocumentKind::VariabilityModel {
        let (vm, bindings) = vm_from_wire(typed(bytes)?)?;
        ProductLineModel { vm, artifacts: LayeredModel::default(), bindings }
    } else {
        let body: ProductLineBody = typed(bytes)?;
        let (artifacts, _) = layered_from_wire(body.layered_model)?;
        let (vm, bindings) = vm_from_wire(body.variability_model)?;
        ProductLineModel { vm, artifacts, bindings }
    };
    check(validate(&plm))?;
    Ok(plm)
}

pub fn parse_configuration(bytes: &[u8]) -> Result<Configuration, IngestError> {
    expect(header(bytes)?, &[DocumentKind::Configuration])?;
    let body: ConfigurationBody = typed(bytes)?;
    Ok(Configuration { selection: body.selection.into_iter().collect() })
}

pub fn parse_trace(bytes: &[u8]) -> Result<ReductionTrace, IngestError> {
    expect(header(bytes)?, &[DocumentKind::ReductionTrace])?;
    typed(bytes)
}

// ---- serialization ----

fn layered_to_wire(model: &LayeredModel, products: Option<&ProductSet>) -> LayeredBody {
    LayeredBody {
        artifacts: model
            .artifacts
            .values()
            .map(|a| WireArtifact { id: a.id.clone(), layer: a.layer, activities: a.activities.iter().cloned().collect() })
            .collect(),
        activities: model
            .activities
            .values()
            .map(|a| WireActivity {
                id: a.id.clone(),
                name: a.name.clone(),
                layer: a.layer,
                artifact: a.artifact.clone(),
                mandatory: a.mandatory,
                group: a.group.clone(),
            })
            .collect(),
        refinements: model
            .refinements
            .iter()
            .map(|r| WireRefinement {
                child_artifact: r.child_artifact.clone(),
                parent_activity: r.parent_activity.clone(),
                kind: r.kind,
            })
            .collect(),
        interactions: model.interactions.iter().map(wire_interaction).collect(),
        products: products.map(|p| {
            p.products
                .iter()
                .map(|(id, includes)| WireProduct { id: id.clone(), includes: includes.iter().cloned().collect() })
                .collect()
        }),
    }
}

fn wire_interaction<N: Clone>(i: &Interaction<N>) -> WireInteraction<N> {
    WireInteraction { from: i.from.clone(), to: i.to.clone(), kind: i.kind, requires: i.requires }
}

fn vm_to_wire(vm: &VariabilityModel, bindings: &BTreeSet<Binding>) -> VariabilityBody {
    VariabilityBody {
        variation_points: vm
            .variation_points
            .values()
            .map(|vp| WireVariationPoint { id: vp.id.clone(), name: vp.name.clone(), level: vp.level })
            .collect(),
        variants: vm
            .variants
            .values()
            .map(|v| WireVariant { id: v.id.clone(), name: v.name.clone(), vp: v.vp.clone() })
            .collect(),
        interactions: vm.interactions.iter().map(wire_interaction).collect(),
        refinements: vm
            .refinements
            .iter()
            .map(|(c, p)| WireVpRefinement { child_vp: c.clone(), parent_variant: p.clone() })
            .collect(),
        bindings: bindings
            .iter()
            .map(|b| match b {
                Binding::Activity { activity, variant } => {
                    WireBinding::Activity(ActivityBinding { activity: activity.clone(), variant: variant.clone() })
                }
                Binding::Artifact { artifact, vp } => {
                    WireBinding::Artifact(ArtifactBinding { artifact: artifact.clone(), vp: vp.clone() })
                }
            })
            .collect(),
    }
}

/// Canonical JSON text for any serializable value: sorted keys, two-space
/// indent, trailing newline.
pub(crate) fn canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    // Round-trip through Value so object keys come out sorted.
    let value = serde_json::to_value(value).expect("document values always serialize");
    let mut bytes = serde_json::to_vec_pretty(&value).expect("json values always serialize");
    bytes.push(b'\n');
    bytes
}

fn envelope<B: Serialize>(kind: DocumentKind, body: B) -> Vec<u8> {
    canonical_json(&Envelope { schema_version: SCHEMA_VERSION.to_owned(), kind: kind.as_str().to_owned(), body })
}

/// Canonical bytes of a document.
pub fn serialize(doc: &ModelDocument) -> Vec<u8> {
    match doc {
        ModelDocument::Layered { model, products } => serialize_layered_model(model, products.as_ref()),
        ModelDocument::Variability(plm) => serialize_variability_model(plm),
        ModelDocument::ProductLine(plm) => serialize_product_line_model(plm),
        ModelDocument::Configuration(cfg) => serialize_configuration(cfg),
        ModelDocument::Trace(trace) => serialize_trace(trace),
    }
}

pub fn serialize_layered_model(model: &LayeredModel, products: Option<&ProductSet>) -> Vec<u8> {
    envelope(DocumentKind::LayeredModel, layered_to_wire(model, products))
}

/// Variability model plus bindings; the layered artifacts are dropped.
pub fn serialize_variability_model(plm: &ProductLineModel) -> Vec<u8> {
    envelope(DocumentKind::VariabilityModel, vm_to_wire(&plm.vm, &plm.bindings))
}

pub fn serialize_product_line_model(plm: &ProductLineModel) -> Vec<u8> {
    envelope(
        DocumentKind::ProductLineModel,
        ProductLineBody {
            layered_model: layered_to_wire(&plm.artifacts, None),
            variability_model: vm_to_wire(&plm.vm, &plm.bindings),
        },
    )
}

pub fn serialize_configuration(cfg: &Configuration) -> Vec<u8> {
    envelope(DocumentKind::Configuration, ConfigurationBody { selection: cfg.selection.iter().cloned().collect() })
}

pub fn serialize_trace(trace: &ReductionTrace) -> Vec<u8> {
    envelope(DocumentKind::ReductionTrace, trace)
}
