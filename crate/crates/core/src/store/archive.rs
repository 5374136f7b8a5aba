//! Line-oriented solution archives.
//!
//! ```text
//! #qmarchive v1
//! #manifest {"level":"bhw",...}
//! {"id":"bhw-grape-00000","level":"bhw","T":0.1057,...}
//! ...
//! #checksum sha256:<hex> count=<records>
//! ```
//!
//! The checksum covers the manifest line and every record line, newline included.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::SolutionRecord;
use crate::error::{Error, Result};
use crate::problems::Level;

pub const MAGIC: &str = "#qmarchive v1";
pub const EXTENSION: &str = "qmarchive";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub level: Level,
    pub method: String,
    pub code_version: String,
    /// Unix time in milliseconds at creation.
    pub created_ms: u64,
    pub rng_seeds: Vec<u64>,
    #[serde(default)]
    pub config: serde_json::Value,
    /// Free-form settings, such as the command-line flags that produced the archive.
    #[serde(default)]
    pub settings: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(level: Level, method: impl Into<String>) -> Self {
        Self {
            level,
            method: method.into(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            created_ms: now_ms(),
            rng_seeds: Vec::new(),
            config: serde_json::Value::Null,
            settings: BTreeMap::new(),
        }
    }
}

pub(crate) fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub manifest: Manifest,
    records: Vec<SolutionRecord>,
}

impl Archive {
    pub fn new(manifest: Manifest) -> Self {
        Self { manifest, records: Vec::new() }
    }

    pub fn records(&self) -> &[SolutionRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SolutionRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: SolutionRecord) {
        self.records.push(record);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = ArchiveWriter::new(out, &self.manifest)?;
        for r in &self.records {
            w.append(r)?;
        }
        w.finish()?;
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("archives are UTF-8"))
    }

    /// Parses a complete archive; nothing is returned unless the checksum matches.
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let magic = lines.next().transpose()?.ok_or_else(|| Error::Archive("empty archive".into()))?;
        if magic != MAGIC {
            return Err(Error::Archive(format!("unsupported archive header '{magic}'")));
        }
        let manifest_line = lines.next().transpose()?.ok_or(Error::Checksum)?;
        let manifest_json = manifest_line
            .strip_prefix("#manifest ")
            .ok_or_else(|| Error::Archive("missing manifest line".into()))?;
        let mut hasher = Sha256::new();
        hasher.update(manifest_line.as_bytes());
        hasher.update(b"\n");

        let mut record_lines = Vec::new();
        let mut trailer = None;
        for line in lines {
            let line = line?;
            if trailer.is_some() {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::Archive("content after checksum line".into()));
            }
            if let Some(rest) = line.strip_prefix("#checksum ") {
                trailer = Some(rest.to_string());
            } else {
                hasher.update(line.as_bytes());
                hasher.update(b"\n");
                record_lines.push(line);
            }
        }
        let trailer = trailer.ok_or(Error::Checksum)?;
        let (digest, count) = parse_trailer(&trailer)?;
        if digest != hex::encode(hasher.finalize()) || count != record_lines.len() {
            return Err(Error::Checksum);
        }
        let manifest: Manifest = serde_json::from_str(manifest_json)?;
        let records = record_lines.iter().map(|l| serde_json::from_str(l)).collect::<std::result::Result<_, _>>()?;
        Ok(Self { manifest, records })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("partial");
        self.write(std::io::BufWriter::new(fs::File::create(&tmp)?))?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(fs::File::open(path)?)
    }

    /// Union of two archives of the same level. The manifest is taken from `self`
    /// with the seeds of both and the source methods noted in its settings.
    pub fn merge(&self, other: &Archive) -> Result<Archive> {
        if self.manifest.level != other.manifest.level {
            return Err(Error::Archive(format!(
                "cannot merge {} and {} archives",
                self.manifest.level, other.manifest.level
            )));
        }
        let mut manifest = self.manifest.clone();
        manifest.rng_seeds.extend(&other.manifest.rng_seeds);
        if other.manifest.method != manifest.method {
            manifest.method = format!("{}+{}", manifest.method, other.manifest.method);
        }
        manifest.settings.insert("merged".into(), "true".into());
        let mut records = self.records.clone();
        records.extend(other.records.iter().cloned());
        Ok(Archive { manifest, records })
    }

    /// Hash of everything that does not depend on wall-clock time: the manifest
    /// without its creation time and the records without timings.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        let mut manifest = self.manifest.clone();
        manifest.created_ms = 0;
        h.update(serde_json::to_vec(&manifest).expect("manifest serializes"));
        for r in &self.records {
            let mut r = r.clone();
            r.wall_s = 0.0;
            for t in &mut r.telemetry {
                t.wall_s = 0.0;
            }
            h.update(serde_json::to_vec(&r).expect("record serializes"));
        }
        hex::encode(h.finalize())
    }
}

fn parse_trailer(s: &str) -> Result<(String, usize)> {
    let mut parts = s.split_whitespace();
    let digest = parts.next().and_then(|d| d.strip_prefix("sha256:"));
    let count = parts.next().and_then(|c| c.strip_prefix("count=")).and_then(|c| c.parse().ok());
    match (digest, count) {
        (Some(d), Some(c)) => Ok((d.to_string(), c)),
        _ => Err(Error::Archive(format!("malformed checksum line '{s}'"))),
    }
}

/// Streams an archive record by record; the checksum is written by [`finish`](Self::finish).
pub struct ArchiveWriter<W: Write> {
    out: W,
    hasher: Sha256,
    count: usize,
}

impl<W: Write> ArchiveWriter<W> {
    pub fn new(mut out: W, manifest: &Manifest) -> Result<Self> {
        let line = format!("#manifest {}", serde_json::to_string(manifest)?);
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "{line}")?;
        let mut hasher = Sha256::new();
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
        Ok(Self { out, hasher, count: 0 })
    }

    pub fn append(&mut self, record: &SolutionRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        writeln!(self.out, "{line}")?;
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        writeln!(self.out, "#checksum sha256:{} count={}", hex::encode(self.hasher.finalize()), self.count)?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// `<root>/<level>/<method>/<timestamp>.qmarchive`.
pub fn archive_path(root: &Path, level: Level, method: &str, timestamp_ms: u64) -> PathBuf {
    root.join(level.id()).join(method).join(format!("{timestamp_ms}.{EXTENSION}"))
}

/// All archives below `root`, sorted by path.
pub fn list_archives(root: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == EXTENSION) {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}
