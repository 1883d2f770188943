//! Core of the image-generation studio: the domain model, backend gateways,
//! controversy retrieval, interpretation engine, interface modes and the
//! session state machine.

pub mod clock;
pub mod error;
pub mod gateways;
pub mod ids;
pub mod interpret;
pub mod jsonl;
pub mod model;
pub mod modes;
pub mod parallel;
pub mod prompts;
pub mod session;
pub mod text;
pub mod wiki;

pub use error::{Error, Result};
