//! Output directory: CSV tables and records with a config-hash header, plus a
//! key=value manifest.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub struct Output {
    dir: PathBuf,
    pub hash: String,
    manifest: Vec<(String, String)>,
}

/// SHA-256 of the command name, the canonical JSON form of the config and the seed.
pub fn config_hash<T: Serialize>(command: &str, config: &T, seed: u64) -> Result<String> {
    let json = serde_json::to_string(config)?;
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(json.as_bytes());
    h.update(format!("\nseed={seed}").as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl Output {
    pub fn new<T: Serialize>(dir: &Path, command: &str, config: &T, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let hash = config_hash(command, config, seed)?;
        let manifest = vec![
            ("command".into(), command.into()),
            ("tool".into(), env!("CARGO_PKG_NAME").into()),
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("config_sha256".into(), hash.clone()),
            ("seed".into(), seed.to_string()),
        ];
        Ok(Self { dir: dir.to_path_buf(), hash, manifest })
    }

    fn create(&self, name: &str) -> Result<File> {
        let path = self.dir.join(name);
        let mut f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        writeln!(f, "# config-sha256={}", self.hash)?;
        Ok(f)
    }

    /// Writes rows of a serializable type; the header comes from its field names.
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.note(&format!("file.{name}"), rows.len().to_string());
        Ok(())
    }

    /// Writes a CSV with explicit columns.
    pub fn table(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.note(&format!("file.{name}"), rows.len().to_string());
        Ok(())
    }

    /// Writes a structured record as TOML.
    pub fn record<R: Serialize>(&mut self, name: &str, value: &R) -> Result<()> {
        let mut f = self.create(name)?;
        f.write_all(toml::to_string(value)?.as_bytes())?;
        self.note(&format!("file.{name}"), "record".into());
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: String) {
        self.manifest.push((key.into(), value));
    }

    pub fn finish(self) -> Result<()> {
        let mut f = File::create(self.dir.join("manifest.txt"))?;
        for (k, v) in &self.manifest {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
