//! Turn raw wearable sensor sessions plus affect annotations into a trained
//! strong-vs-neutral affect classifier, end to end.
//!
//! The pipeline stages, each its own module:
//!
//! 1. [`ingest`]: parse Empatica-style session directories and annotation
//!    CSVs, apply the exclusion rules (mistake marks, over-long delays).
//! 2. [`windowing`]: cut the 60 s multi-channel window preceding each kept
//!    event.
//! 3. [`preprocess`]: winsorize, low-pass filter, min-max normalize.
//! 4. [`features`]: pulse peaks, HRV statistics, EDA tonic/phasic split and
//!    SCR detection, per-channel moments; a fixed 64-feature catalog.
//! 5. [`sampling`]: stratified 80:20 split, stratified k-fold indices, and
//!    SMOTE balancing with stored synthesis provenance.
//! 6. [`model`]: CART-style decision trees boosted with discrete AdaBoost.
//! 7. [`eval`]: confusion/precision/recall/F1 and the leakage-free
//!    cross-validation harness.
//! 8. [`ema`]: offline simulation of the prompt-gating policy (minimum idle
//!    time plus randomized asking).
//! 9. [`synth`]: seeded synthetic-corpus generator with ground truth, so
//!    the whole pipeline is testable without private field data.
//!
//! The `affectkit` binary wires these into subcommands; `cli::run` is the
//! same entry point as a library call. See the `examples/` directory for a
//! runnable walk-through of every stage.

pub mod cli;
pub mod config;
pub mod ema;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod model;
pub mod preprocess;
pub mod sampling;
pub mod signal;
pub mod synth;
pub mod windowing;

pub use config::AppConfig;
pub use error::{Error, ErrorCategory, Result};
pub use signal::{AnnotatedEvent, ChannelKind, EventLabel, SessionRecording, TimeSeriesChannel, WindowSample};
