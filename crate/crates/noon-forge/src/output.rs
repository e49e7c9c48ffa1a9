//! Output plumbing: atomic file writes, adjacent run manifests, and the
//! optional companion gnuplot scripts.
//!
//! Data files are written via a temporary file in the target directory and
//! renamed into place, so readers never observe a partial file. Every data
//! file gets an adjacent `<name>.manifest.json` recording the subcommand,
//! its full parameter set, the tool version and the wall time; the data
//! files themselves carry no volatile fields, so a repeated run with the
//! same seed is byte-identical.

use anyhow::{Context, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct Emitter {
    subcommand: &'static str,
    parameters: serde_json::Value,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl Emitter {
    pub fn new(subcommand: &'static str, parameters: serde_json::Value) -> Self {
        Emitter {
            subcommand,
            parameters,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn write_atomic(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
            .context("create temporary file")?;
        std::io::Write::write_all(&mut tmp, bytes).context("write data")?;
        tmp.persist(path)
            .with_context(|| format!("rename into {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn write_text(&mut self, path: &Path, text: &str) -> Result<()> {
        self.write_atomic(path, text.as_bytes())
    }

    pub fn write_json(&mut self, path: &Path, value: &serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_atomic(path, text.as_bytes())
    }

    /// Companion plot script next to `data_path`.
    pub fn write_gnuplot(&mut self, data_path: &Path, x: &str, y: &str) -> Result<()> {
        let script_path = data_path.with_extension("gp");
        let data_name = data_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let script = format!(
            "set datafile separator ','\n\
             set xlabel '{x}'\n\
             set ylabel '{y}'\n\
             set style data linespoints\n\
             plot '{data_name}' using 1:2 skip 1 title '{y}'\n"
        );
        self.write_atomic(&script_path, script.as_bytes())
    }

    /// Write the adjacent manifest for every produced file.
    pub fn finish(self) -> Result<()> {
        let manifest = json!({
            "tool": "noon-forge",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "outputs": self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>(),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
        });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        for path in &self.outputs {
            if path.extension().and_then(|e| e.to_str()) == Some("gp") {
                continue;
            }
            let manifest_path = manifest_path_for(path);
            let dir = manifest_path.parent().filter(|p| !p.as_os_str().is_empty());
            let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
            std::io::Write::write_all(&mut tmp, text.as_bytes())?;
            tmp.persist(&manifest_path)
                .with_context(|| format!("rename into {}", manifest_path.display()))?;
        }
        Ok(())
    }
}

fn manifest_path_for(data_path: &Path) -> PathBuf {
    let mut name = data_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    data_path.with_file_name(name)
}
