//! i-vector speaker-verification pipeline.
//!
//! The crate covers the classical chain end to end: a GMM universal
//! background model and per-utterance sufficient statistics ([`gmm`]),
//! closed-form i-vector extraction from a total-variability subspace that
//! can be stored in full or as a low-rank dictionary factorization
//! ([`extractor`]), generative EM training of the subspace plus
//! discriminative retraining against a multi-class speaker objective
//! ([`training`]), an LDA + two-covariance PLDA verification backend
//! ([`backend`]), and a synthetic-corpus evaluation harness reporting EER
//! ([`eval`]). On-disk formats live in [`io`].
//!
//! Everything is deterministic under a fixed seed: the linear algebra is
//! hand-rolled (no BLAS threading), RNGs are ChaCha-based, and parallel
//! maps reduce in index order.

pub mod backend;
pub mod error;
pub mod eval;
pub mod extractor;
pub mod gmm;
pub mod io;
pub mod linalg;
pub mod parallel;
pub mod training;

pub use error::{Error, Result};
