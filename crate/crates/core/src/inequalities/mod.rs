//! CHSH statistics, master-probability feasibility and the factorability counterexample.

pub mod bayes;
pub mod cards;
pub mod correlator;
pub mod estimate;
pub mod feasibility;
pub mod lp;
pub mod master;

pub use bayes::{bayes_chain_check, ChainReport, DiscreteJoint};
pub use cards::{card_deck_stats, card_deck_unconditional, CardDeckModel, DeckStats};
pub use correlator::{ChshReport, ChshSettings, CorrelatorEstimate, BELL_BOUND, CIRELSON_BOUND};
pub use estimate::{chsh_monte_carlo, shared_lambda_statistics, SharedLambdaStats};
pub use feasibility::{
    fine_feasibility, fine_feasibility_f64, relaxed_feasibility, Facet, FeasibilityReport, PairwiseData,
};
pub use master::MasterProb16;
