//! Document structure reconstruction for visually rich pages: OCR fusion,
//! PDF-to-HTML alignment, reading-order inference and filtering, a
//! provider-abstracted QA annotation workflow, and evaluation metrics.

pub mod align;
pub mod fusion;
pub mod metrics;
pub mod model;
pub mod order;
pub mod qa;
pub mod synth;
pub mod text;
