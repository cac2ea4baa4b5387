//! Worst-case batch Bayesian optimization over a box with a black-box
//! feasibility constraint.

pub mod campaign;
pub mod de;
pub mod error;
pub mod gp;
pub mod stub;
pub mod surrogate;
pub mod trust_region;

pub use campaign::{run_campaign, step, CampaignConfig, CampaignRecord, Evaluation, Evaluator, IterationLog};
pub use de::{DeConfig, Feasibility};
pub use error::{BayesError, Result};
pub use gp::{Gp, GpConfig, Hyperparameters};
pub use stub::AnalyticStub;
pub use surrogate::{acquisition, BaseSamples, Bounds, Surrogate};
pub use trust_region::{TrustRegion, TrustRegionConfig};
