//! Before/after summary of a reduction.

use std::fmt::Write as _;

use serde::Serialize;

use crate::configuration::{enumerate_valid, unconstrained_count};
use crate::ingest::canonical_json;
use crate::model::{ProductLineModel, VpId};
use crate::reduction::ReductionTrace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeSummary {
    pub source: VpId,
    pub target: VpId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub initial_vp_count: usize,
    pub final_vp_count: usize,
    /// Nearest integer percent, halves rounded up.
    pub reduction_percentage: u64,
    pub merges: Vec<MergeSummary>,
    /// Decimal strings; counts can exceed any fixed-width integer.
    pub unconstrained_before: String,
    pub unconstrained_after: String,
    /// `None` when enumeration would exceed the budget.
    pub valid_before: Option<String>,
    pub valid_after: Option<String>,
}

/// `round(100 * (initial - final) / initial)`, 0 for an empty model.
pub fn reduction_percentage(initial: usize, final_count: usize) -> u64 {
    if initial == 0 {
        return 0;
    }
    let removed = initial.saturating_sub(final_count) as u64;
    let initial = initial as u64;
    (200 * removed + initial) / (2 * initial)
}

fn valid_count(plm: &ProductLineModel, budget: u64) -> Option<String> {
    enumerate_valid(plm, budget).ok().map(|v| v.len().to_string())
}

impl ReductionReport {
    pub fn new(before: &ProductLineModel, after: &ProductLineModel, trace: &ReductionTrace, budget: u64) -> Self {
        let initial = before.vm.variation_points.len();
        let final_count = after.vm.variation_points.len();
        ReductionReport {
            initial_vp_count: initial,
            final_vp_count: final_count,
            reduction_percentage: reduction_percentage(initial, final_count),
            merges: trace
                .merges
                .iter()
                .map(|m| MergeSummary { source: m.source_vp.clone(), target: m.target_vp.clone() })
                .collect(),
            unconstrained_before: unconstrained_count(&before.vm).to_string(),
            unconstrained_after: unconstrained_count(&after.vm).to_string(),
            valid_before: valid_count(before, budget),
            valid_after: valid_count(after, budget),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        canonical_json(self)
    }

    pub fn to_table(&self) -> String {
        let na = |v: &Option<String>| v.clone().unwrap_or_else(|| "n/a".into());
        let mut s = String::new();
        let _ = writeln!(s, "{:<26}{:>12}{:>12}", "", "before", "after");
        let _ = writeln!(s, "{:<26}{:>12}{:>12}", "variation points", self.initial_vp_count, self.final_vp_count);
        let _ = writeln!(
            s,
            "{:<26}{:>12}{:>12}",
            "unconstrained configs", self.unconstrained_before, self.unconstrained_after
        );
        let _ = writeln!(s, "{:<26}{:>12}{:>12}", "valid configs", na(&self.valid_before), na(&self.valid_after));
        let _ = writeln!(s, "reduction: {}%", self.reduction_percentage);
        for (i, m) in self.merges.iter().enumerate() {
            let _ = writeln!(s, "merge {}: {} -> {}", i + 1, m.target, m.source);
        }
        s
    }
}
