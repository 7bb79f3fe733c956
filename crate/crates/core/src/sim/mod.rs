//! Electromagnetic transient simulation of the regulating transformer.

pub mod inductance;
pub mod network;
pub mod record;
pub mod ct;
pub mod event;
pub mod saturation;
pub mod sweep;
pub mod system;
