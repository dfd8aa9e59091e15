//! Line-oriented dataset index.
//!
//! ```text
//! softdeform-manifest 1
//! digest <sha256 hex of the generation config>
//! <train|val> <base seed> <relative path>
//! ...
//! ```

use crate::io::FormatError;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const MANIFEST_HEADER: &str = "softdeform-manifest 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "val",
        })
    }
}

impl FromStr for Split {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Validation),
            _ => Err(FormatError::Malformed(format!("unknown split {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub split: Split,
    pub base_seed: u64,
    /// Relative to the manifest's directory.
    pub path: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub digest: String,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MANIFEST_HEADER}\ndigest {}\n", self.digest);
        for e in &self.entries {
            s.push_str(&format!("{} {} {}\n", e.split, e.base_seed, e.path));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(FormatError::BadMagic {
                expected: MANIFEST_HEADER.into(),
            });
        }
        let digest = lines
            .next()
            .and_then(|l| l.strip_prefix("digest "))
            .ok_or_else(|| FormatError::Malformed("missing digest line".into()))?
            .to_string();
        let mut entries = Vec::new();
        for (no, line) in lines.enumerate() {
            let mut parts = line.splitn(3, ' ');
            let bad = || FormatError::Malformed(format!("manifest line {}: {line:?}", no + 3));
            let split = parts.next().ok_or_else(bad)?.parse()?;
            let base_seed = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let path = parts.next().filter(|p| !p.is_empty()).ok_or_else(bad)?.to_string();
            entries.push(ManifestEntry { split, base_seed, path });
        }
        Ok(Self { digest, entries })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Absolute path of an entry given the manifest file location.
    pub fn resolve(manifest_path: &Path, entry: &ManifestEntry) -> PathBuf {
        manifest_path.parent().unwrap_or(Path::new(".")).join(&entry.path)
    }
}
