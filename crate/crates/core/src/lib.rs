//! Gaussian receptive field (GRF) population encoding as a per-sample
//! transform in front of incremental classifiers, with the prequential
//! machinery needed to compare encoded and raw learners on data streams:
//! test-then-train evaluation, Kappa, sliding-window McNemar tests and ADWIN
//! drift resets.
//!
//! ```
//! use grf_stream::encoding::{build_fields, encode_feature, FeatureRange, GrfConfig};
//!
//! let config = GrfConfig::new(3, 1.0).unwrap();
//! let fields = build_fields(FeatureRange::new(0.0, 1.0).unwrap(), &config);
//! let code = encode_feature(0.5, &fields);
//! assert_eq!(code[1], 1.0);
//! ```

// `!(x > 0.0)` is how the validators reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod drift;
pub mod encoding;
mod error;
pub mod eval;
pub mod harness;
pub mod learners;
mod sample;

pub use error::{Error, Result};
pub use sample::{ClassId, Sample};

pub use drift::{Adwin, AdwinParams};
pub use encoding::{FeatureLimits, FeatureRange, GrfConfig, GrfEncoder, GrfField, LimitStrategy};
pub use eval::{EvalLedger, McNemarWindow, RunReport};
pub use harness::{ExperimentConfig, PairedResult, RunOptions, Suite};
pub use learners::{LearnerKind, OnlineLearner};
