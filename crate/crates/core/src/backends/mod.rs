//! Terminal pipeline stages.

mod collector;
mod counter;
pub mod serialize;
mod sim;

pub use collector::CommandCollector;
pub use counter::{ResourceCounter, ResourceReport, ResourceRow};
pub use sim::{circuit_unitary, Simulator, MAX_SIM_QUBITS};
