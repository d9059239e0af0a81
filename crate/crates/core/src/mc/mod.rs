//! Monte Carlo estimators: wedge and bridge stay probabilities, the
//! conditional half-space bounds, `P(R_alpha^C)`, the Campbell identity and
//! the discordant-facet probability.
//!
//! Every estimator is a deterministic function of its [`EstimatorConfig`]:
//! replica `i` draws from its own counter-based stream and results are reduced
//! in replica order.

mod conditional;
mod crossing;
mod engine;
mod events;
mod wedge_stay;

pub use conditional::*;
pub use crossing::no_cross;
pub use engine::*;
pub use events::*;
pub use wedge_stay::*;
