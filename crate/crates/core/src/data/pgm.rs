//! Binary PGM (P5, 8-bit) images and JSON image manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image must be non-empty".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                what: "pixels",
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major pixels.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("PGM: bad {what}")))
    }
}

pub fn parse_pgm(data: &[u8]) -> Result<GrayImage> {
    if data.len() < 2 || &data[..2] != b"P5" {
        return Err(Error::Format("PGM: expected P5 magic".into()));
    }
    let mut h = Header { data, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("PGM: maxval {maxval} is not 8-bit")));
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(h.pos) {
        Some(c) if c.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(Error::Format("PGM: missing raster separator".into())),
    }
    let raster = &data[h.pos..];
    if raster.len() < width * height {
        return Err(Error::Format(format!(
            "PGM: raster has {} bytes, expected {}",
            raster.len(),
            width * height
        )));
    }
    GrayImage::new(width, height, raster[..width * height].to_vec())
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(&fs::read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: i8,
}

/// `{"images": [{"path": "...", "label": 1}, ...]}`; relative paths are
/// resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub images: Vec<ManifestEntry>,
}

pub fn load_manifest(path: &Path) -> Result<(Vec<GrayImage>, Vec<i8>)> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut images = Vec::with_capacity(manifest.images.len());
    let mut labels = Vec::with_capacity(manifest.images.len());
    for entry in &manifest.images {
        let label = match entry.label {
            1 => 1,
            -1 | 0 => -1,
            other => {
                return Err(Error::Format(format!(
                    "manifest label {other} for {}",
                    entry.path.display()
                )))
            }
        };
        images.push(load_pgm(&base.join(&entry.path))?);
        labels.push(label);
    }
    Ok((images, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        assert_eq!(parse_pgm(&encode_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn header_comments() {
        let mut data = b"P5 # made by hand\n2 1\n# depth\n255\n".to_vec();
        data.extend([7, 9]);
        let img = parse_pgm(&data).unwrap();
        assert_eq!((img.width(), img.height(), img.get(1, 0)), (2, 1, 9));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x01").is_err());
        assert!(parse_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }

    #[test]
    fn manifest_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        fs::write(dir.path().join("a.pgm"), encode_pgm(&img)).unwrap();
        fs::write(
            dir.path().join("m.json"),
            r#"{"images":[{"path":"a.pgm","label":1},{"path":"a.pgm","label":0}]}"#,
        )
        .unwrap();
        let (imgs, labels) = load_manifest(&dir.path().join("m.json")).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(labels, vec![1, -1]);
    }
}
