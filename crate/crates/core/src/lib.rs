//! Deterministic discrete-round simulator of the SHARKS perimeter swarm and
//! an adversarial counter-swarm that corrals it, plus a parameter-sweep
//! harness for the percent-access security metric.

pub mod engine;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod model;
pub mod sweep;

pub use engine::{run_simulation, DelayPolicy, SimConfig, SimOutcome, SimState};
pub use error::{ConfigError, Error, FormatError, GeometryError, Result};
pub use geometry::{Heading, Vec2, WorldConfig};
pub use io::RunRecord;
pub use metrics::{RoundMetrics, SimResult, StabilityParams};
pub use model::{AgentKind, AgentState, SwarmParams};
pub use sweep::{run_sweep, SweepResult, SweepSpec};
