//! Design and analysis of periodic reconfigurable datacenter networks.
//!
//! A set of circuit switches cycling through fixed matchings emulates a
//! static `d`-regular graph with capacities scaled by the duty cycle. The
//! crate builds such schedules, evaluates their throughput, delay and buffer
//! figures in closed form, checks them against an exact flow oracle, and
//! runs a slotted fluid simulation with finite buffers.

pub mod analytics;
pub mod demand;
pub mod error;
pub mod lambert;
pub mod oracle;
pub mod io;
pub mod periodic;
pub mod sim;
pub mod topology;

pub use demand::DemandMatrix;
pub use error::{Error, ErrorKind, Result};
pub use topology::{Edge, Matching};
