//! Agents with coupled motor and perceptual neural maps babble at each other
//! and, without any coordination protocol, settle on a small shared set of
//! sound categories. This crate holds the simulation core: the neural maps
//! and their plasticity rules, the articulatory-to-perceptual mappings
//! (an abstract linear one and a vowel-formant synthesizer with an ear
//! model), the agent learning cascade, the interaction loop, and the
//! measurement toolkit (entropy traces, attractor extraction, inventory
//! statistics).

pub mod agent;
pub mod analysis;
pub mod config_text;
pub mod error;
pub mod neural_map;
pub mod report;
pub mod society;
pub mod vocal_tract;

pub use error::{Error, Result};

/// Tool version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
