//! Vibrotactile 2D target encoding for a four-motor wristband, and the
//! machinery to run, simulate and analyse target-acquisition sessions.

pub mod analysis;
pub mod device;
pub mod encoding;
pub mod experiment;
pub mod sim;
