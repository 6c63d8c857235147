//! Fixtures shared by the benchmarks.

use aerogp::pipeline::Scenario;
use aerogp::synth::{simulate, ChannelNoise, TrueLinearModel};
use aerogp::{DerivedFlightSeries, STATE_DIM};

/// Derived series of the reference aircraft flying `scenario`.
pub fn derived_flight(scenario: Scenario) -> DerivedFlightSeries {
    let truth = TrueLinearModel::reference().expect("reference model");
    let raw = simulate(&truth, &scenario.profile(ChannelNoise::instrumentation()), 1).expect("simulate");
    aerogp::ingest::derive_channels(&raw, &Default::default()).expect("derive")
}

/// The first `n` (state, C_m) rows of a rollercoaster-plus-doublet flight,
/// strided to span the whole record.
pub fn cm_training_set(n: usize) -> (Vec<[f64; STATE_DIM]>, Vec<f64>) {
    let d = derived_flight(Scenario::RollercoasterDoublet);
    let truth = TrueLinearModel::reference().expect("reference model");
    let obs = aerogp::aero::compute_cm_observations(&d, &truth.geometry).expect("cm");
    let stride = (obs.len() / n).max(1);
    obs.iter()
        .step_by(stride)
        .take(n)
        .map(|(s, c)| (s.to_array(), *c))
        .unzip()
}
