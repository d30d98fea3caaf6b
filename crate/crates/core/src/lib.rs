//! Aerial spectrum surveying: synthetic shadowed radio maps, an online
//! Bayesian estimator over a grid, uncertainty fields and flight planners.

pub mod channel;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod planner;
pub mod spatial;
pub mod uncertainty;

pub use channel::{ChannelParams, GroundTruth, Measurement, Transmitter};
pub use error::{Result, SurveyError};
pub use estimator::{GridPrior, ObservationCoefficients, PosteriorState};
pub use harness::{
    monte_carlo, monte_carlo_planners, run_survey, MetricsRow, MonteCarloSummary, SurveyConfig,
    SurveyRecord, TransmitterLayout,
};
pub use planner::{Planner, PlannerKind, ShortestPath};
pub use spatial::{GridSpec, MotionGraph, Point};
pub use uncertainty::{Aggregation, MapKind, UncertaintyField};
