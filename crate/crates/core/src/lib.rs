//! Adversarial authorship attribution toolkit.
//!
//! The crate covers the whole attribution/obfuscation arms race on a closed
//! set of authors: Writeprints-Static style features, a from-scratch random
//! forest attributor, two obfuscators (rule-based simplification and a
//! genetic word-substitution search), obfuscation/obfuscator detectors, the
//! METEOR soundness score and a harness that runs the attack scenarios
//! S0, S1, S2, S3, S2i, S3i and S4.

pub mod analysis;
pub mod corpus;
pub mod detectors;
pub mod error;
pub mod features;
pub mod forest;
pub mod harness;
pub mod metrics;
pub mod obfuscators;
pub mod rng;
pub mod textproc;

pub use error::{Error, Result};

/// Current on-disk schema version for every JSON artifact this crate writes.
pub const SCHEMA_VERSION: u32 = 1;
