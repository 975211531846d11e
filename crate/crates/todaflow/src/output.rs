//! Artifact writing: CSV, JSON and SVG files plus the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use todaflow_core::{LaurentMap, C64};

use crate::config::{sha256_hex, Formats, InputFile};
use crate::svg::{render_svg, Shape, Style};

/// Shortest decimal string that parses back to `x`.
pub fn real(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// `{"r": .., "coeffs": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MapJson {
    pub r: f64,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&LaurentMap> for MapJson {
    fn from(map: &LaurentMap) -> Self {
        MapJson {
            r: map.r(),
            coeffs: map.coeffs().iter().map(|c| pair(*c)).collect(),
        }
    }
}

impl MapJson {
    pub fn to_map(&self) -> Result<LaurentMap, todaflow_core::laurent::LaurentError> {
        LaurentMap::new(self.r, self.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breakdown {
    /// `cusp`, `univalence`, `absorption`, `shock` or `numerical`.
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub scenario: String,
    pub seed: u64,
    pub inputs: Vec<InputRecord>,
    pub formats: Vec<String>,
    /// `ok` or `breakdown`.
    pub status: String,
    /// False when a breakdown cut the run short.
    pub complete: bool,
    pub breakdown: Option<Breakdown>,
    pub warnings: Vec<String>,
    pub diagnostics: BTreeMap<String, Value>,
    /// Every artifact written, in write order; the manifest itself is not listed.
    pub files: Vec<FileRecord>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

impl From<&InputFile> for InputRecord {
    fn from(f: &InputFile) -> Self {
        InputRecord {
            path: f.path.clone(),
            sha256: f.sha256.clone(),
        }
    }
}

/// Writes files into the output directory, skipping disabled formats and
/// recording a hash for each file written.
pub struct Artifacts {
    dir: PathBuf,
    formats: Formats,
    files: Vec<FileRecord>,
}

impl Artifacts {
    pub fn create(dir: &Path, formats: Formats) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            formats,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn into_files(self) -> Vec<FileRecord> {
        self.files
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileRecord {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn csv<I>(&mut self, name: &str, header: &[String], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        if !self.formats.csv {
            return Ok(());
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header).map_err(io::Error::other)?;
        for row in rows {
            w.write_record(&row).map_err(io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        self.write(name, &bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        if !self.formats.json {
            return Ok(());
        }
        let mut bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn svg(&mut self, name: &str, shapes: &[Shape]) -> io::Result<()> {
        if !self.formats.svg {
            return Ok(());
        }
        let text = render_svg(shapes, &Style::default()).map_err(io::Error::other)?;
        self.write(name, text.as_bytes())
    }
}

/// Column names `prefix` + `re_`/`im_` pairs, e.g. `re_a0, im_a0, ...`.
pub fn complex_columns(stem: &str, count: usize, first: usize) -> Vec<String> {
    (first..first + count)
        .flat_map(|k| [format!("re_{stem}{k}"), format!("im_{stem}{k}")])
        .collect()
}

pub fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0, -1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(real(0.1), "0.1");
        assert_eq!(real(2.0), "2.0");
    }

    #[test]
    fn map_json_round_trip() {
        let m = LaurentMap::new(1.5, vec![C64::new(0.0, 0.0), C64::new(0.1, -0.2)]).unwrap();
        let text = serde_json::to_string(&MapJson::from(&m)).unwrap();
        assert_eq!(text, r#"{"r":1.5,"coeffs":[[0.0,0.0],[0.1,-0.2]]}"#);
        let back: MapJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_map().unwrap(), m);
    }

    #[test]
    fn disabled_formats_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let formats = Formats {
            csv: true,
            json: false,
            svg: false,
        };
        let mut a = Artifacts::create(dir.path(), formats).unwrap();
        a.json("x.json", &1).unwrap();
        a.svg("x.svg", &[]).unwrap();
        a.csv("x.csv", &header(&["a"]), vec![vec!["1".to_string()]]).unwrap();
        assert_eq!(a.files().len(), 1);
        assert_eq!(fs::read_to_string(dir.path().join("x.csv")).unwrap(), "a\n1\n");
        assert_eq!(a.files()[0].sha256, sha256_hex(b"a\n1\n"));
    }
}
