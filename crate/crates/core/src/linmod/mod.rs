//! Linear time-invariant models: transfer functions, state space, frequency
//! responses and sampled simulation.

pub mod discrete;
pub mod freq;
pub mod poly;
pub mod ss;
pub mod tf;

pub use discrete::{simulate_lti, simulate_ss, simulate_tf, DiscreteLti, Lti};
pub use freq::{log_space, BodeTable, FrequencyResponse};
pub use ss::StateSpaceModel;
pub use tf::TransferFunction;

/// Transfer function of one channel of a state-space model.
pub fn tf_from_ss(model: &StateSpaceModel, input: usize, output: usize) -> crate::Result<TransferFunction> {
    model.tf(input, output)
}
