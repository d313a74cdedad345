//! Loading calibration datasets from a directory tree.
//!
//! ```text
//! data/
//!   iso_800/
//!     flat_00_00.eldr  ...   (any name starting with "flat")
//!     bias_000.eldr    ...   (any name starting with "bias")
//!   iso_1600/
//!     ...
//! ```
//!
//! Frames may be `.eldr` or `.pgm` (with a `.meta.json` sidecar). A directory with no
//! `iso_<N>` subdirectories is read as a single dataset whose ISO comes from the frames.

use std::path::{Path, PathBuf};

use noisecal_core::calibrate::CalibrationDataset;
use noisecal_core::RawFrame;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::{eldr, pgm};

pub fn is_frame_file(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("eldr" | "pgm"))
}

/// Reads an `.eldr` or `.pgm` frame.
pub fn load_frame(path: &Path) -> Result<RawFrame> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("eldr") => eldr::read_frame(path),
        Some("pgm") => pgm::read_pgm16(path),
        _ => Err(Error::Dataset(format!("{}: unknown frame extension", path.display()))),
    }
}

fn entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(e.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

/// Frame files in `dir`, sorted by name, optionally restricted to a name prefix.
pub fn frame_files(dir: &Path, prefix: Option<&str>) -> Result<Vec<PathBuf>> {
    Ok(entries(dir)?
        .into_iter()
        .filter(|p| p.is_file() && is_frame_file(p))
        .filter(|p| {
            prefix.is_none_or(|pre| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with(pre)))
        })
        .collect())
}

pub fn load_frames(paths: &[PathBuf]) -> Result<Vec<RawFrame>> {
    paths.par_iter().map(|p| load_frame(p)).collect()
}

/// One ISO directory: `flat*` and `bias*` frames.
pub fn load_iso_dir(dir: &Path) -> Result<CalibrationDataset> {
    Ok(CalibrationDataset {
        flat_fields: load_frames(&frame_files(dir, Some("flat"))?)?,
        bias_frames: load_frames(&frame_files(dir, Some("bias"))?)?,
    })
}

fn iso_of_dir(path: &Path) -> Option<u32> {
    path.file_name()?.to_str()?.strip_prefix("iso_")?.parse().ok().filter(|&v| v > 0)
}

/// All datasets under `root`, ordered by ISO.
pub fn load_dataset_root(root: &Path) -> Result<Vec<(u32, CalibrationDataset)>> {
    let mut dirs: Vec<(u32, PathBuf)> =
        entries(root)?.into_iter().filter(|p| p.is_dir()).filter_map(|p| Some((iso_of_dir(&p)?, p))).collect();
    dirs.sort_by_key(|(iso, _)| *iso);

    if dirs.is_empty() {
        let ds = load_iso_dir(root)?;
        let iso = ds.iso().ok_or_else(|| {
            Error::Dataset(format!("{}: no iso_<N> directories and frames carry no ISO", root.display()))
        })?;
        return Ok(vec![(iso, ds)]);
    }
    dirs.into_iter()
        .map(|(iso, dir)| {
            let ds = load_iso_dir(&dir)?;
            let clash = ds.flat_fields.iter().chain(&ds.bias_frames).find_map(|f| f.iso().filter(|&i| i != iso));
            if let Some(other) = clash {
                return Err(Error::Dataset(format!("{}: frame ISO {other} does not match directory", dir.display())));
            }
            Ok((iso, ds))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use noisecal_core::{CfaLayout, SensorMeta};

    fn meta() -> SensorMeta {
        SensorMeta { cfa: CfaLayout::Bggr, bit_depth: 14, black_level: [64; 4], white_level: 16383 }
    }

    #[test]
    fn loads_mixed_formats() {
        let dir = tempfile::tempdir().unwrap();
        let iso = dir.path().join("iso_400");
        std::fs::create_dir(&iso).unwrap();
        let f = RawFrame::new(2, 2, vec![64, 100, 200, 300], meta(), Some(400)).unwrap();
        eldr::write_frame(&f, &iso.join("flat_a.eldr")).unwrap();
        pgm::export_pgm16(&f, &iso.join("flat_b.pgm")).unwrap();
        eldr::write_frame(&f, &iso.join("bias_0.eldr")).unwrap();
        std::fs::write(iso.join("notes.txt"), "x").unwrap();

        let all = load_dataset_root(dir.path()).unwrap();
        assert_eq!(all.len(), 1);
        let (n, ds) = &all[0];
        assert_eq!(*n, 400);
        assert_eq!(ds.flat_fields, vec![f.clone(), f.clone()]);
        assert_eq!(ds.bias_frames, vec![f]);
    }

    #[test]
    fn iso_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let iso = dir.path().join("iso_400");
        std::fs::create_dir(&iso).unwrap();
        let f = RawFrame::black(2, 2, meta(), Some(800)).unwrap();
        eldr::write_frame(&f, &iso.join("bias_0.eldr")).unwrap();
        assert!(matches!(load_dataset_root(dir.path()), Err(Error::Dataset(_))));
    }

    #[test]
    fn flat_directory_uses_frame_iso() {
        let dir = tempfile::tempdir().unwrap();
        let f = RawFrame::black(2, 2, meta(), Some(3200)).unwrap();
        eldr::write_frame(&f, &dir.path().join("bias_0.eldr")).unwrap();
        assert_eq!(load_dataset_root(dir.path()).unwrap()[0].0, 3200);

        let g = RawFrame::black(2, 2, meta(), None).unwrap();
        eldr::write_frame(&g, &dir.path().join("bias_0.eldr")).unwrap();
        assert!(load_dataset_root(dir.path()).is_err());
    }
}
