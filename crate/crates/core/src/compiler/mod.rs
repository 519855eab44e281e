//! Circuit model, Z-frame tracking and scheduling onto global pulses.

mod circuit;
mod schedule;

pub use circuit::*;
pub use schedule::*;
