//! Discrete-event simulator of a mobile WiMAX downlink carrying
//! trace-driven mobile-TV (audio + video) traffic.
//!
//! The crate models one subscriber station moving through a 7-cell
//! hexagonal layout while a base station streams a movie to it. Per
//! 5 ms MAC frame the simulator samples the radio channel, runs link
//! adaptation (fixed MCS or one of two hysteresis AMC profiles),
//! schedules the downlink across 802.16 service classes, and applies
//! SINR-driven block errors. Scenarios sweep mobile speed, path-loss
//! environment, and service class, and report packet loss, end-to-end
//! delay, jitter, throughput, data dropped, and mean BLER per run.

pub mod amc;
pub mod channel;
pub mod error;
pub mod mac;
pub mod metrics;
pub mod mobility;
pub mod phy;
pub mod scenario;
pub mod sim;
pub mod traffic;

pub use error::Error;
pub use sim::{Engine, Event, EventKind, RngStream, SimTime};
