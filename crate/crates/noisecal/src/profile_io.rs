//! Camera profile persistence.

use std::path::Path;

use noisecal_core::model::PROFILE_SCHEMA_VERSION;
use noisecal_core::CameraProfile;

use crate::error::{read_bytes, write_json, Error, Result};

pub fn save_profile(profile: &CameraProfile, path: &Path) -> Result<()> {
    write_json(path, profile)
}

/// Loads and validates a profile, refusing other schema versions.
pub fn load_profile(path: &Path) -> Result<CameraProfile> {
    let bytes = read_bytes(path)?;
    let json_err = |source| Error::Json { path: path.into(), source };
    let value: serde_json::Value = serde_json::from_slice(&bytes).map_err(json_err)?;
    let found = value.get("schema_version").and_then(serde_json::Value::as_u64).unwrap_or(0) as u32;
    if found != PROFILE_SCHEMA_VERSION {
        return Err(Error::Schema { found, expected: PROFILE_SCHEMA_VERSION }.in_file(path));
    }
    let profile: CameraProfile = serde_json::from_value(value).map_err(json_err)?;
    profile.validate().map_err(|e| Error::Core(e).in_file(path))?;
    Ok(profile)
}
