//! Sidecar recording how a synthesized frame was produced.

use std::path::{Path, PathBuf};

use noisecal_core::NoiseParams;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    /// Index of the frame's random stream under `seed`.
    pub stream: u64,
    /// File name of the clean input frame.
    pub source: String,
    pub camera_name: String,
    /// ISO whose calibrated parameters were used; absent when sampled from the joint model.
    pub iso: Option<u32>,
    pub ratio: f64,
    pub clip: bool,
    pub params: NoiseParams,
}

/// `out/frame.eldr` -> `out/frame.provenance.json`.
pub fn provenance_path(frame: &Path) -> PathBuf {
    frame.with_extension("provenance.json")
}
