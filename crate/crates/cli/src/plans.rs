//! Plans shipped with the binary.

use isect_core::{InterpolationPlan, PlanSummary, Result};

/// Disk plan for `delta = 1/30` (every instance with `Delta = 5`), built for
/// ten events at `epsilon = 1e-4`.
pub const DELTA_1_30: &str = include_str!("../plans/delta-1-30.json");

pub fn shipped_summary() -> Result<PlanSummary> {
    serde_json::from_str(DELTA_1_30)
        .map_err(|e| isect_core::Error::Input(format!("shipped plan: {e}")))
}

/// Loads the shipped plan, re-validating the map and the tail bound.
pub fn shipped_plan() -> Result<InterpolationPlan> {
    InterpolationPlan::from_summary(&shipped_summary()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use isect_core::build_plan;
    use isect_core::rational::ratio;

    #[test]
    fn shipped_plan_matches_a_fresh_build() {
        let fresh = build_plan(&ratio(1, 30), 1e-4, 10).unwrap();
        assert_eq!(shipped_plan().unwrap(), fresh);
    }
}
