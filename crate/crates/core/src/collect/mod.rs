//! Gathering accuracy samples from a trainer that prunes and fine-tunes.

mod collector;
pub mod protocol;
mod schedule;
mod trainer;

pub use collector::{collect, CollectConfig, CollectOutcome};
pub use protocol::{Dimension, Request, Response, Status, ECHO_TOLERANCE, PROTOCOL_VERSION};
pub use schedule::{budget_floors, make_schedule, Schedule};
pub use trainer::{ProcessTrainer, SimulatedTrainer, Trainer};
