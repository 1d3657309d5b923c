//! Python bindings: `import plse`.
//!
//! Models cross the boundary as immutable `Model` objects; everything else
//! comes back as plain lists, tuples, dicts and strings.

use std::collections::BTreeMap;

use plse_core::configuration::{enumerate_valid, unconstrained_count, validate_config, DEFAULT_BUDGET};
use plse_core::ingest::{
    parse_configuration, parse_layered_model, parse_trace, parse_variability_model, serialize_product_line_model,
    serialize_trace, serialize_variability_model,
};
use plse_core::report::reduction_percentage as percentage;
use plse_core::{
    check_completeness, check_uniqueness, derive_initial_vm, identify_main_root, interacting_pairs, merge, reduce,
    replay, tree_size, validate, Binding, ConfigError, Configuration, ProductLineModel, ReductionReport,
    ReductionTrace, RefinementMode, VpId,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(plse, PlseError, PyValueError, "Invalid model, document or operation.");
create_exception!(plse, BudgetExceeded, PlseError, "Enumeration would exceed the configured budget.");

fn err(e: impl ToString) -> PyErr {
    PlseError::new_err(e.to_string())
}

fn config_err(e: ConfigError) -> PyErr {
    match e {
        ConfigError::BudgetExceeded { .. } => BudgetExceeded::new_err(e.to_string()),
        other => err(other),
    }
}

fn text(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).expect("serializer emits UTF-8")
}

fn big_int<'py>(py: Python<'py>, digits: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("builtins")?.getattr("int")?.call1((digits,))
}

/// A variability model with its bindings.
#[pyclass(frozen, module = "plse")]
struct Model {
    inner: ProductLineModel,
}

#[pymethods]
impl Model {
    /// Parse a variability-model or product-line-model JSON document.
    #[staticmethod]
    fn from_json(document: &str) -> PyResult<Self> {
        parse_variability_model(document.as_bytes()).map(|inner| Model { inner }).map_err(err)
    }

    /// Canonical variability-model document.
    fn to_json(&self) -> String {
        text(serialize_variability_model(&self.inner))
    }

    fn to_product_line_json(&self) -> String {
        text(serialize_product_line_model(&self.inner))
    }

    #[getter]
    fn variation_points(&self) -> Vec<String> {
        self.inner.vm.variation_points.keys().map(ToString::to_string).collect()
    }

    /// Variant id -> owning variation point id.
    #[getter]
    fn variants(&self) -> BTreeMap<String, String> {
        self.inner.vm.variants.values().map(|v| (v.id.to_string(), v.vp.to_string())).collect()
    }

    /// `(from, to, kind, requires)` tuples.
    #[getter]
    fn interactions(&self) -> Vec<(String, String, &'static str, bool)> {
        self.inner
            .vm
            .interactions
            .iter()
            .map(|i| {
                let kind = match i.kind {
                    plse_core::InteractionKind::Material => "material",
                    plse_core::InteractionKind::Information => "information",
                };
                (i.from.to_string(), i.to.to_string(), kind, i.requires)
            })
            .collect()
    }

    /// Child variation point -> parent variant.
    #[getter]
    fn refinements(&self) -> BTreeMap<String, String> {
        self.inner.vm.refinements.iter().map(|(c, p)| (c.to_string(), p.to_string())).collect()
    }

    /// Activity id -> variant id, for activity bindings.
    #[getter]
    fn bindings(&self) -> BTreeMap<String, String> {
        self.inner
            .bindings
            .iter()
            .filter_map(|b| match b {
                Binding::Activity { activity, variant } => Some((activity.to_string(), variant.to_string())),
                Binding::Artifact { .. } => None,
            })
            .collect()
    }

    fn variants_of(&self, vp: &str) -> Vec<String> {
        let vp = VpId::from(vp);
        self.inner.vm.variants_of(&vp).map(ToString::to_string).collect()
    }

    /// Invariant violations as human-readable strings; empty when valid.
    fn validate(&self) -> Vec<String> {
        validate(&self.inner).iter().map(ToString::to_string).collect()
    }

    fn roots(&self) -> Vec<String> {
        plse_core::roots(&self.inner.vm).iter().map(ToString::to_string).collect()
    }

    fn tree_size(&self, root: &str) -> PyResult<usize> {
        tree_size(&VpId::from(root), &self.inner.vm).map_err(err)
    }

    fn main_root(&self) -> PyResult<String> {
        identify_main_root(&self.inner.vm).map(|r| r.to_string()).map_err(err)
    }

    /// `(source, target)` pairs seen from `root`'s tree.
    fn interacting_pairs(&self, root: &str) -> Vec<(String, String)> {
        interacting_pairs(&self.inner.vm, &VpId::from(root))
            .into_iter()
            .map(|(s, t)| (s.to_string(), t.to_string()))
            .collect()
    }

    fn check_completeness(&self, source: &str, target: &str) -> bool {
        check_completeness(&self.inner.vm, &VpId::from(source), &VpId::from(target))
    }

    fn check_uniqueness(&self, source: &str, target: &str) -> bool {
        check_uniqueness(&self.inner.vm, &VpId::from(source), &VpId::from(target))
    }

    /// Merge `target` into `source`; returns the new model and the variant
    /// pairing used.
    fn merge(&self, source: &str, target: &str) -> PyResult<(Model, BTreeMap<String, String>)> {
        let (inner, record) = merge(&self.inner, &VpId::from(source), &VpId::from(target)).map_err(err)?;
        let pairing = record.variant_pairing.iter().map(|(t, s)| (t.to_string(), s.to_string())).collect();
        Ok((Model { inner }, pairing))
    }

    fn reduce(&self) -> (Model, Trace) {
        let (inner, trace) = reduce(&self.inner);
        (Model { inner }, Trace { inner: trace })
    }

    /// Exact count as a Python int.
    fn unconstrained_count<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        big_int(py, unconstrained_count(&self.inner.vm).to_string())
    }

    /// Valid configurations as sorted lists of variant ids.
    #[pyo3(signature = (budget = DEFAULT_BUDGET))]
    fn enumerate_valid(&self, budget: u64) -> PyResult<Vec<Vec<String>>> {
        let all = enumerate_valid(&self.inner, budget).map_err(config_err)?;
        Ok(all.into_iter().map(|c| c.selection.iter().map(ToString::to_string).collect()).collect())
    }

    /// Violations of a selection of variant ids; empty when valid.
    fn validate_config(&self, selection: Vec<String>) -> PyResult<Vec<String>> {
        let cfg = Configuration::from_ids(selection);
        let violations = validate_config(&self.inner, &cfg).map_err(config_err)?;
        Ok(violations.iter().map(ToString::to_string).collect())
    }

    /// Violations of a configuration document.
    fn validate_config_json(&self, document: &str) -> PyResult<Vec<String>> {
        let cfg = parse_configuration(document.as_bytes()).map_err(err)?;
        let violations = validate_config(&self.inner, &cfg).map_err(config_err)?;
        Ok(violations.iter().map(ToString::to_string).collect())
    }

    fn __eq__(&self, other: &Model) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({} variation points, {} variants, {} interactions)",
            self.inner.vm.variation_points.len(),
            self.inner.vm.variants.len(),
            self.inner.vm.interactions.len()
        )
    }
}

/// The merges performed by a reduction.
#[pyclass(frozen, module = "plse")]
struct Trace {
    inner: ReductionTrace,
}

#[pymethods]
impl Trace {
    #[staticmethod]
    fn from_json(document: &str) -> PyResult<Self> {
        parse_trace(document.as_bytes()).map(|inner| Trace { inner }).map_err(err)
    }

    fn to_json(&self) -> String {
        text(serialize_trace(&self.inner))
    }

    /// `(source, target)` per merge, in order.
    #[getter]
    fn merges(&self) -> Vec<(String, String)> {
        self.inner.merges.iter().map(|m| (m.source_vp.to_string(), m.target_vp.to_string())).collect()
    }

    #[getter]
    fn pass_count(&self) -> usize {
        self.inner.pass_count
    }

    /// Re-apply to `model`, checking every merge.
    fn replay(&self, model: &Model) -> PyResult<Model> {
        replay(&model.inner, &self.inner).map(|inner| Model { inner }).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.merges.len()
    }

    fn __repr__(&self) -> String {
        format!("Trace({} merges, {} passes)", self.inner.merges.len(), self.inner.pass_count)
    }
}

/// Derive a variability model from a layered-model document.
#[pyfunction]
#[pyo3(signature = (document, strict = false))]
fn derive(document: &str, strict: bool) -> PyResult<Model> {
    let (model, products) = parse_layered_model(document.as_bytes()).map_err(err)?;
    let mode = if strict { RefinementMode::InteractionWitnessed } else { RefinementMode::Unconditional };
    derive_initial_vm(&model, products.as_ref(), mode).map(|inner| Model { inner }).map_err(err)
}

#[pyfunction]
fn reduction_percentage(initial: usize, final_count: usize) -> u64 {
    percentage(initial, final_count)
}

/// Before/after report as a JSON string.
#[pyfunction]
#[pyo3(signature = (before, after, trace, budget = DEFAULT_BUDGET))]
fn report(before: &Model, after: &Model, trace: &Trace, budget: u64) -> String {
    text(ReductionReport::new(&before.inner, &after.inner, &trace.inner, budget).to_json())
}

#[pymodule]
fn plse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(reduction_percentage, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add("PlseError", m.py().get_type::<PlseError>())?;
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    Ok(())
}
