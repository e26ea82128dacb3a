//! Bounded symbolic simulation of periodic static-dataflow networks.
//!
//! Processes are written once against [`Domain`] and run either over
//! decision diagrams ([`Symbolic`]) or over plain numbers for one assignment
//! of the uncertainties ([`Numeric`]).

mod assertions;
mod domain;
mod kernel;
pub mod oracle;
mod process;
mod schedule;
mod time;
mod trace;

pub use assertions::{check_assertions, Assertion, AssertionResult, Report, Severity, Status, Witness};
pub use domain::{Corner, Domain, Numeric, Summary, Symbolic, UncertainParam, Uncertainties};
pub use kernel::{run_bounded, RunOptions};
pub use process::{integrator_step, Integrator, Io, Param, PortSpec, Process, ProcessSpec, Sample};
pub use schedule::{compile_schedule, Channel, Connection, Endpoint, Firing, Schedule};
pub use time::SimTime;
pub use trace::{SignalTrace, Trace, TraceEvent};
