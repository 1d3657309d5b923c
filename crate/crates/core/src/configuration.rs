//! Configurations: one variant per active variation point.
//!
//! A variation point is active when it is a root or its parent variant is
//! selected. A configuration is valid when every active variation point has
//! exactly one selected variant, no inactive one has any, every interaction
//! between two active variation points has both or neither endpoint
//! selected, and (when the model carries bindings) every selected variant is
//! bound to at least one activity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::ConfigError;
use crate::model::{Binding, ProductLineModel, VariabilityModel, VariantId, VpId};
use crate::tree::ForestIndex;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub selection: BTreeSet<VariantId>,
}

impl Configuration {
    pub fn from_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<VariantId>,
    {
        Configuration { selection: ids.into_iter().map(Into::into).collect() }
    }

    pub fn contains(&self, v: &VariantId) -> bool {
        self.selection.contains(v)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.selection.iter().map(VariantId::as_str).collect();
        write!(f, "{{{}}}", ids.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum ConfigViolation {
    /// Active variation point without a selected variant.
    MissingSelection { vp: VpId },
    MultipleSelections { vp: VpId, variants: Vec<VariantId> },
    /// Variant selected under an inactive variation point.
    InactiveSelection { vp: VpId, variant: VariantId },
    /// Exactly one endpoint of an interaction between active variation
    /// points is selected.
    ClosureBreach { from: VariantId, to: VariantId },
    /// Selected variant bound to no activity.
    UnboundVariant { variant: VariantId },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigViolation::MissingSelection { vp } => write!(f, "no variant selected for active variation point {vp}"),
            ConfigViolation::MultipleSelections { vp, variants } => {
                let v: Vec<&str> = variants.iter().map(VariantId::as_str).collect();
                write!(f, "several variants selected for {vp}: {}", v.join(", "))
            }
            ConfigViolation::InactiveSelection { vp, variant } => {
                write!(f, "{variant} selected but {vp} is not active")
            }
            ConfigViolation::ClosureBreach { from, to } => {
                write!(f, "interaction {from} -> {to} has exactly one endpoint selected")
            }
            ConfigViolation::UnboundVariant { variant } => write!(f, "{variant} binds no activity"),
        }
    }
}

/// Number of selections choosing exactly one variant per active variation
/// point, ignoring interactions.
pub fn unconstrained_count(vm: &VariabilityModel) -> BigUint {
    let index = ForestIndex::new(vm);
    vm.roots().into_iter().map(|r| count_tree(&index, r)).product()
}

fn count_tree(index: &ForestIndex<'_>, vp: &VpId) -> BigUint {
    index
        .variants_of(vp)
        .iter()
        .map(|v| index.children_of(v).iter().map(|c| count_tree(index, c)).product::<BigUint>())
        .sum()
}

fn is_active(vm: &VariabilityModel, cfg: &Configuration, vp: &VpId) -> bool {
    match vm.parent_of(vp) {
        None => true,
        Some(parent) => cfg.contains(parent),
    }
}

/// Everything wrong with `cfg`; empty when it is a valid product.
pub fn validate_config(plm: &ProductLineModel, cfg: &Configuration) -> Result<Vec<ConfigViolation>, ConfigError> {
    let vm = &plm.vm;
    for v in &cfg.selection {
        if !vm.variants.contains_key(v) {
            return Err(ConfigError::UnknownVariant(v.clone()));
        }
    }

    let mut out = Vec::new();
    let mut chosen: BTreeMap<&VpId, Vec<VariantId>> = BTreeMap::new();
    for v in &cfg.selection {
        chosen.entry(vm.vp_of(v).expect("checked above")).or_default().push(v.clone());
    }
    let active: BTreeSet<&VpId> = vm.variation_points.keys().filter(|vp| is_active(vm, cfg, vp)).collect();

    for vp in vm.variation_points.keys() {
        let picked = chosen.get(vp).map(Vec::as_slice).unwrap_or(&[]);
        if active.contains(vp) {
            match picked.len() {
                0 => out.push(ConfigViolation::MissingSelection { vp: vp.clone() }),
                1 => {}
                _ => out.push(ConfigViolation::MultipleSelections { vp: vp.clone(), variants: picked.to_vec() }),
            }
        } else {
            out.extend(picked.iter().map(|v| ConfigViolation::InactiveSelection { vp: vp.clone(), variant: v.clone() }));
        }
    }

    for i in &vm.interactions {
        let both_active = [&i.from, &i.to].iter().all(|v| vm.vp_of(v).is_some_and(|vp| active.contains(vp)));
        if both_active && cfg.contains(&i.from) != cfg.contains(&i.to) {
            out.push(ConfigViolation::ClosureBreach { from: i.from.clone(), to: i.to.clone() });
        }
    }

    if !plm.bindings.is_empty() {
        let bound: BTreeSet<&VariantId> = plm
            .bindings
            .iter()
            .filter_map(|b| match b {
                Binding::Activity { variant, .. } => Some(variant),
                Binding::Artifact { .. } => None,
            })
            .collect();
        for v in &cfg.selection {
            if !bound.contains(v) {
                out.push(ConfigViolation::UnboundVariant { variant: v.clone() });
            }
        }
    }
    Ok(out)
}

/// Every valid configuration, ordered lexicographically by sorted variant
/// ids. Fails without enumerating when the unconstrained count exceeds
/// `budget`.
pub fn enumerate_valid(plm: &ProductLineModel, budget: u64) -> Result<Vec<Configuration>, ConfigError> {
    let total = unconstrained_count(&plm.vm);
    if total > BigUint::from(budget) {
        return Err(ConfigError::BudgetExceeded { unconstrained: total.to_string(), budget });
    }
    let index = ForestIndex::new(&plm.vm);
    let pending: Vec<&VpId> = plm.vm.roots();
    let mut all = Vec::new();
    expand(&index, pending, &mut Vec::new(), &mut all);

    let mut valid: Vec<Configuration> = all
        .into_iter()
        .map(Configuration::from_ids)
        .filter(|cfg| validate_config(plm, cfg).map(|v| v.is_empty()).unwrap_or(false))
        .collect();
    valid.sort();
    valid.dedup();
    Ok(valid)
}

fn expand<'a>(index: &ForestIndex<'a>, mut pending: Vec<&'a VpId>, chosen: &mut Vec<&'a VariantId>, out: &mut Vec<Vec<VariantId>>) {
    let Some(vp) = pending.pop() else {
        out.push(chosen.iter().map(|v| (*v).clone()).collect());
        return;
    };
    for v in index.variants_of(vp) {
        let mut next = pending.clone();
        next.extend(index.children_of(v).iter().copied());
        chosen.push(v);
        expand(index, next, chosen, out);
        chosen.pop();
    }
}
