//! Receipt forgery detection benchmark toolkit.
//!
//! `forgebench` reimplements a full document-forgery evaluation pipeline and
//! scores every model lane with one shared ROC/AUC, F1, and calibration
//! engine:
//!
//! - **classical baselines** — a class-weighted SVM (SMO dual solver) over
//!   raw resized pixels, and a lightweight CNN trained with Adam on one-hot
//!   JPEG DCT features (OH-JPEG), optionally weighted by the image's
//!   quantization matrix (PQL);
//! - **zero-shot vision LLMs** — a provider-agnostic chat-with-image client
//!   with rate limiting, retries, a response cache, and string-processing
//!   fallbacks that recover `P(forgery)` from free-form replies;
//! - **reporting** — frozen run records that regenerate AUC summary tables,
//!   ROC overlays, and per-label calibration histograms deterministically.
//!
//! The library is the primary interface; each major capability has a runnable
//! example:
//!
//! ```bash
//! cargo run --release -p forgebench --example synthesize_dataset
//! cargo run --release -p forgebench --example ingest_manifest
//! cargo run --release -p forgebench --example dct_features
//! cargo run --release -p forgebench --example roc_metrics
//! cargo run --release -p forgebench --example train_svm_grid
//! cargo run --release -p forgebench --example train_cnn_patches
//! cargo run --release -p forgebench --example eval_llm_mock
//! cargo run --release -p forgebench --example full_report
//! cargo run --release -p forgebench --example full_pipeline
//! ```
//!
//! A thin `forgebench` binary drives the same stages as subcommands
//! (`ingest`, `features`, `train-svm`, `train-cnn`, `eval-llm`, `report`);
//! see the crate README for the stage-file handoff between them.

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod jpeg;
pub mod llm;
pub mod metrics;
pub mod report;
pub mod synth;
