//! Run-directory conventions: append-only output directories that carry the
//! exact resolved configuration that produced them.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Create `dir` (or reuse it when empty). An existing non-empty directory is
/// refused unless `force` is set; run directories are append-only records.
pub fn prepare(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .next()
            .is_some();
        if non_empty && !force {
            bail!(
                "output directory {} already exists and is not empty (pass --force to overwrite)",
                dir.display()
            );
        }
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

/// Write the resolved configuration echo every run directory must carry.
pub fn write_config_echo(dir: &Path, command: &str, config: serde_json::Value) -> Result<()> {
    let echo = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    fs::write(
        dir.join("resolved_config.json"),
        serde_json::to_string_pretty(&echo)? + "\n",
    )?;
    Ok(())
}
