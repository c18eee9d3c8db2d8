use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

const TEMP_MARKER: &str = ".tmp-";

/// Points in a write where a test can make the store stop as if the process
/// had died there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultPoint {
    /// Half of the new content reached the temp file.
    PartialTemp,
    /// The temp file is complete but was never renamed into place.
    BeforeRename,
}

static TEMP_SEQ: AtomicU64 = AtomicU64::new(0);

fn temp_path(target: &Path) -> PathBuf {
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("doc");
    let seq = TEMP_SEQ.fetch_add(1, Ordering::Relaxed);
    target.with_file_name(format!(".{name}{TEMP_MARKER}{}-{seq}", std::process::id()))
}

/// Replaces `target` with `bytes` so that readers see either the old or the
/// new file. With a fault, stops at that point and reports it; the temp
/// file is left behind like after a crash.
pub(crate) fn write_atomic(target: &Path, bytes: &[u8], fault: Option<FaultPoint>) -> io::Result<Result<(), FaultPoint>> {
    if let Some(dir) = target.parent() {
        fs::create_dir_all(dir)?;
    }
    let temp = temp_path(target);
    let mut file = File::create(&temp)?;
    if fault == Some(FaultPoint::PartialTemp) {
        file.write_all(&bytes[..bytes.len() / 2])?;
        return Ok(Err(FaultPoint::PartialTemp));
    }
    file.write_all(bytes)?;
    file.sync_all()?;
    drop(file);
    if fault == Some(FaultPoint::BeforeRename) {
        return Ok(Err(FaultPoint::BeforeRename));
    }
    fs::rename(&temp, target)?;
    Ok(Ok(()))
}

pub(crate) fn is_temp_file(path: &Path) -> bool {
    path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.') && n.contains(TEMP_MARKER))
}

/// Deletes temp files left by interrupted writes; returns how many.
pub(crate) fn remove_stale_temps(dir: &Path) -> io::Result<usize> {
    let mut removed = 0;
    if !dir.is_dir() {
        return Ok(0);
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            removed += remove_stale_temps(&path)?;
        } else if is_temp_file(&path) {
            fs::remove_file(&path)?;
            removed += 1;
        }
    }
    Ok(removed)
}
