//! Closed-loop assembly and fixed-step simulation.

mod network;
mod simulate;
mod statespace;
mod topology;

pub use network::{Chain, LoopModel, Source};
pub use simulate::{analytic_step_oracle, simulate, SimConfig, Topology, Trajectory};
pub use statespace::StateSpaceModel;
pub use topology::{build_loop, fit_controller, open_loop, wire_loop, PredictorBlocks};
