//! Deterministic run outputs: diagnostics CSV, field snapshots, manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::diagnostics::{series_csv, DiagnosticsRecord};
use crate::grid::snapshot::write_snapshot;
use crate::grid::ScalarField;
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path)(e)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    fn push(&mut self, file: String, bytes: &[u8]) {
        let digest = Sha256::digest(bytes);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.entries.push(ManifestEntry { file, sha256, bytes: bytes.len() });
    }

    /// One `sha256  bytes  file` line per entry, in write order.
    pub fn render(&self) -> String {
        self.entries.iter().map(|e| format!("{}  {}  {}\n", e.sha256, e.bytes, e.file)).collect()
    }
}

pub const SERIES_FILE: &str = "diagnostics.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Writes the diagnostics series, one AGGS file per snapshot
/// (`snapshot_<step>.aggs`), optional extra text files, and a manifest.
pub fn write_outputs<T: Real>(
    series: &[DiagnosticsRecord],
    snapshots: &[(usize, ScalarField<T>)],
    extra: &[(&str, String)],
    dir: &Path,
) -> Result<Manifest, OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = Manifest::default();
    let mut emit = |name: String, bytes: Vec<u8>| -> Result<(), OutputError> {
        write_atomic(&dir.join(&name), &bytes)?;
        manifest.push(name, &bytes);
        Ok(())
    };
    for (name, text) in extra {
        emit(name.to_string(), text.clone().into_bytes())?;
    }
    emit(SERIES_FILE.into(), series_csv(series).into_bytes())?;
    for (step, field) in snapshots {
        let mut buf = Vec::new();
        write_snapshot(field, &mut buf).expect("writing to memory");
        emit(format!("snapshot_{step:06}.aggs"), buf)?;
    }
    write_atomic(&dir.join(MANIFEST_FILE), manifest.render().as_bytes())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::CSV_HEADER;
    use crate::grid::snapshot::read_snapshot;
    use crate::grid::GridSpec;

    #[test]
    fn empty_series_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_outputs::<f64>(&[], &[], &[], dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join(SERIES_FILE)).unwrap();
        assert_eq!(csv.trim_end(), CSV_HEADER);
        assert_eq!(m.entries.len(), 1);
    }

    #[test]
    fn identical_outputs_give_identical_manifests_and_bitwise_snapshots() {
        let grid = GridSpec::<f64>::new(2, 3.0, 16).unwrap();
        let u = ScalarField::gaussian(grid, 2.0, 1.3, [0.1, -0.2, 0.0]);
        let rec = DiagnosticsRecord { t: 0.5, mass: 2.0, ..Default::default() };
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let m = write_outputs(&[rec], &[(3, u.clone())], &[("config.txt", "x = 1\n".into())], dir.path())
                .unwrap();
            let bytes = fs::read(dir.path().join("snapshot_000003.aggs")).unwrap();
            let back: ScalarField<f64> = read_snapshot(&bytes[..]).unwrap();
            assert!(back.values().iter().zip(u.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
            let listed = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
            assert_eq!(listed, m.render());
            assert!(!fs::read_dir(dir.path()).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
            m
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn unwritable_directory_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = write_outputs::<f64>(&[], &[], &[], &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
