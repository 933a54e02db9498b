//! Atomic file output: write to a sibling temp file, then rename over the target.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_with(path, |w| w.write_all(bytes).map_err(Into::into))
}

/// Stream into a temp file in the target's directory and rename it into place.
pub fn write_with<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<&mut tempfile::NamedTempFile>) -> splinenet::Result<()>,
{
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temp file in {}", dir.display()))?;
    {
        let mut w = std::io::BufWriter::new(&mut tmp);
        fill(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
    }
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
