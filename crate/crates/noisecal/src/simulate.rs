//! Simulation spec files and on-disk virtual-camera datasets.

use std::path::Path;

use noisecal_core::vcam::{capture_protocol, VirtualCameraSpec};
use noisecal_core::{CfaLayout, NoiseParams, RandomSource, SensorMeta};
use serde::{Deserialize, Serialize};

use crate::eldr;
use crate::error::{write_json, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoTruth {
    pub iso: u32,
    pub truth: NoiseParams,
}

/// JSON spec for `simulate`. Every field is optional; missing ones take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSpec {
    pub width: usize,
    pub height: usize,
    pub cfa: CfaLayout,
    pub bit_depth: u8,
    pub black_level: [u16; 4],
    pub white_level: u16,
    /// Mean electron counts of the flat-field levels.
    pub flat_levels: Vec<f64>,
    pub frames_per_level: usize,
    pub bias_frame_count: usize,
    pub isos: Vec<IsoTruth>,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        let v = VirtualCameraSpec::default();
        SimulationSpec {
            width: v.frame_width,
            height: v.frame_height,
            cfa: v.sensor.cfa,
            bit_depth: v.sensor.bit_depth,
            black_level: v.sensor.black_level,
            white_level: v.sensor.white_level,
            flat_levels: v.flat_levels,
            frames_per_level: v.frames_per_level,
            bias_frame_count: v.bias_frame_count,
            isos: vec![IsoTruth { iso: v.iso.unwrap_or(1600), truth: v.truth }],
        }
    }
}

impl SimulationSpec {
    /// Camera spec for one ISO.
    pub fn camera(&self, iso: &IsoTruth) -> VirtualCameraSpec {
        VirtualCameraSpec {
            truth: iso.truth,
            frame_width: self.width,
            frame_height: self.height,
            sensor: SensorMeta {
                cfa: self.cfa,
                bit_depth: self.bit_depth,
                black_level: self.black_level,
                white_level: self.white_level,
            },
            iso: Some(iso.iso),
            flat_levels: self.flat_levels.clone(),
            frames_per_level: self.frames_per_level,
            bias_frame_count: self.bias_frame_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut isos: Vec<u32> = self.isos.iter().map(|t| t.iso).collect();
        isos.sort_unstable();
        if isos.contains(&0) {
            return Err(noisecal_core::Error::Domain("ISO must be positive").into());
        }
        if let Some(w) = isos.windows(2).find(|w| w[0] == w[1]) {
            return Err(noisecal_core::Error::DuplicateIso(w[0]).into());
        }
        for t in &self.isos {
            self.camera(t).validate()?;
        }
        Ok(())
    }

    pub fn frames_per_iso(&self) -> usize {
        self.flat_levels.len() * self.frames_per_level + self.bias_frame_count
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub seed: u64,
    pub spec: SimulationSpec,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
}

pub fn flat_name(level: usize, frame: usize) -> String {
    format!("flat_{level:02}_{frame:02}.eldr")
}

pub fn bias_name(frame: usize) -> String {
    format!("bias_{frame:03}.eldr")
}

/// Generates every frame and writes `iso_<N>/…`, `truth.json`, and finally `manifest.json`.
pub fn simulate_to_dir(spec: &SimulationSpec, seed: u64, out: &Path) -> Result<Manifest> {
    spec.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let rng = RandomSource::new(seed);
    let mut files = Vec::new();
    for t in &spec.isos {
        let camera = spec.camera(t);
        // one ISO at a time keeps memory bounded
        let (_, ds) = capture_protocol(&camera, &[(t.iso, t.truth)], &rng)?.remove(0);
        let sub = format!("iso_{}", t.iso);
        let dir = out.join(&sub);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (i, f) in ds.flat_fields.iter().enumerate() {
            let name = flat_name(i / spec.frames_per_level, i % spec.frames_per_level);
            eldr::write_frame(f, &dir.join(&name))?;
            files.push(format!("{sub}/{name}"));
        }
        for (i, f) in ds.bias_frames.iter().enumerate() {
            let name = bias_name(i);
            eldr::write_frame(f, &dir.join(&name))?;
            files.push(format!("{sub}/{name}"));
        }
    }
    write_json(&out.join("truth.json"), &spec.isos)?;
    files.push("truth.json".into());
    let manifest = Manifest { tool_version: crate::VERSION.into(), seed, spec: spec.clone(), files };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
