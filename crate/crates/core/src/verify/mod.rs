//! Logical reference simulation, encoding and decoding of wire states, and
//! end-to-end verification of compiled schedules.

mod codec;
mod corpus;
mod logical;
mod run;
mod tomography;

pub use codec::*;
pub use corpus::*;
pub use logical::*;
pub use run::*;
pub use tomography::*;
