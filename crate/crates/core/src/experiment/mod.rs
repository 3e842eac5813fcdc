//! Batch experiments: seeded replications of the learning loop aggregated
//! into reward curves, calibration of the error bound, and the symbolic
//! divergence between two environments.

mod calibration;
mod divergence;
mod replications;
mod scenario;

pub use calibration::{calibrate_at, delta_calibration, CalibrationRow, CalibrationTable};
pub use divergence::{symbolic_divergence_report, DivergenceRow, DivergenceTable};
pub use replications::{
    run_replications, ConfigResult, CurvePoint, ExperimentPlan, RewardCurve, RunSettings,
};
pub use scenario::Scenario;

use crate::rules::State;

/// `1 - |s ∩ s'| / |s ∪ s'|`; 0 when both are empty.
pub fn jaccard_error(s: &State, s_prime: &State) -> f64 {
    let union = s.union_len(s_prime);
    if union == 0 {
        return 0.0;
    }
    1.0 - s.intersection_len(s_prime) as f64 / union as f64
}
