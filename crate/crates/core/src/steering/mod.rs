//! Assemblages, unsteerability certificates, steering quantifiers, and the
//! structural cross-checks between channel and state steering.

mod assemblage;
mod checks;
mod programs;
mod quantifier;
mod strategies;

pub use assemblage::{
    choi_state_assemblage, induced_channel_assemblage, ChannelAssemblage, MeasurementAssemblage, StateAssemblage,
};

pub use checks::{
    converse_extension, local_processing_covariance, theorem2_necessary_check, verify_theorem1, CovarianceReport,
    PptStatus, Theorem1Report, Theorem2Report,
};
pub use programs::{
    model_error, steerable_weight, steerable_weight_with, steering_robustness, steering_robustness_batch,
    steering_robustness_with, test_unsteerable, test_unsteerable_batch, test_unsteerable_with, unsteerable_bound,
    Quantity, SteeringVerdict, Witness,
};
pub use quantifier::{
    channel_quantifier, channel_quantifier_report, pure_input_assemblage, InputMode, QuantifierReport,
    SEARCH_DIM_CAP,
};
pub use strategies::{DeterministicStrategySet, STRATEGY_CAP};

pub(crate) use assemblage::contract_first;
