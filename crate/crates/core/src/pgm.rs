//! Binary PGM (`P5`) grids plus the `.meta` sidecar that places them in the
//! world frame.
//!
//! Rows are written in storage order: the first row in the file is grid row 0
//! (the row nearest the map origin).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::costmap::{CostMap, GridGeometry, MapError, SemanticMap};
use crate::labels::MAX_LABEL;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a binary PGM (expected magic \"P5\")")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    Header(String),
    #[error("PGM maxval {0} unsupported (must be 1..=255)")]
    MaxVal(u32),
    #[error("PGM pixel data truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("pixel value {value} exceeds maxval {maxval}")]
    PixelOverMax { value: u8, maxval: u8 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Meta { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Map {
        path: PathBuf,
        #[source]
        source: MapError,
    },
}

/// An 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, PgmError> {
        if bytes.len() < 2 || &bytes[..2] != b"P5" {
            return Err(PgmError::BadMagic);
        }
        let mut pos = 2;
        let mut fields = [0u32; 3];
        for (i, field) in fields.iter_mut().enumerate() {
            skip_whitespace_and_comments(bytes, &mut pos);
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if start == pos {
                return Err(PgmError::Header(format!(
                    "missing {}",
                    ["width", "height", "maxval"][i]
                )));
            }
            let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
            *field = text
                .parse()
                .map_err(|_| PgmError::Header(format!("number too large: {text}")))?;
        }
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            _ => return Err(PgmError::Header("missing separator before raster".into())),
        }
        let [width, height, maxval] = fields;
        if maxval == 0 || maxval > 255 {
            return Err(PgmError::MaxVal(maxval));
        }
        let (width, height) = (width as usize, height as usize);
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| PgmError::Header("dimensions overflow".into()))?;
        let raster = &bytes[pos..];
        if raster.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                actual: raster.len(),
            });
        }
        let pixels = raster[..expected].to_vec();
        let maxval = maxval as u8;
        if let Some(&value) = pixels.iter().find(|&&p| p > maxval) {
            return Err(PgmError::PixelOverMax { value, maxval });
        }
        Ok(Self {
            width,
            height,
            maxval,
            pixels,
        })
    }

    pub fn read(path: &Path) -> Result<Self, PgmError> {
        let bytes = fs::read(path).map_err(|source| PgmError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::decode(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<(), PgmError> {
        fs::write(path, self.encode()).map_err(|source| PgmError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn skip_whitespace_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        if bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        } else if bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

/// World placement stored next to a PGM grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapMeta {
    pub resolution: f64,
    pub origin: (f64, f64),
}

impl Default for MapMeta {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            origin: (0.0, 0.0),
        }
    }
}

impl MapMeta {
    pub fn from_geometry(g: &GridGeometry) -> Self {
        Self {
            resolution: g.resolution,
            origin: g.origin,
        }
    }

    /// `{}` formatting of f64 is the shortest exact representation, so the
    /// sidecar round-trips bit for bit.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "resolution={}", self.resolution).unwrap();
        writeln!(s, "origin_x={}", self.origin.0).unwrap();
        writeln!(s, "origin_y={}", self.origin.1).unwrap();
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut resolution = None;
        let mut ox = None;
        let mut oy = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad number for {}", lineno + 1, key.trim()))?;
            match key.trim() {
                "resolution" => resolution = Some(value),
                "origin_x" => ox = Some(value),
                "origin_y" => oy = Some(value),
                other => return Err(format!("line {}: unknown key {other}", lineno + 1)),
            }
        }
        Ok(Self {
            resolution: resolution.ok_or("missing resolution")?,
            origin: (ox.ok_or("missing origin_x")?, oy.ok_or("missing origin_y")?),
        })
    }

    pub fn read(path: &Path) -> Result<Self, PgmError> {
        let text = fs::read_to_string(path).map_err(|source| PgmError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|message| PgmError::Meta {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), PgmError> {
        fs::write(path, self.to_text()).map_err(|source| PgmError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Sidecar path for a grid file: `maps/foo.pgm` → `maps/foo.meta`.
pub fn meta_path(pgm_path: &Path) -> PathBuf {
    pgm_path.with_extension("meta")
}

/// Encode a label grid as PGM with maxval 22.
pub fn semantic_to_pgm(map: &SemanticMap) -> GrayImage {
    GrayImage {
        width: map.width(),
        height: map.height(),
        maxval: MAX_LABEL,
        pixels: map.labels().to_vec(),
    }
}

/// Cost grid as PGM with maxval 255, each cell `round(c·255)`.
pub fn costmap_to_pgm(cm: &CostMap) -> GrayImage {
    let g = cm.geometry();
    GrayImage {
        width: g.width,
        height: g.height,
        maxval: 255,
        pixels: cm
            .costs()
            .iter()
            .map(|c| (c * 255.0).round() as u8)
            .collect(),
    }
}

pub fn semantic_from_pgm(img: &GrayImage, meta: MapMeta) -> Result<SemanticMap, MapError> {
    let geometry = GridGeometry::new(img.width, img.height, meta.resolution, meta.origin)?;
    SemanticMap::new(geometry, img.pixels.clone())
}

/// Read `path` and its `.meta` sidecar into a label grid.
pub fn load_semantic_map(path: &Path) -> Result<SemanticMap, PgmError> {
    let img = GrayImage::read(path)?;
    let meta = MapMeta::read(&meta_path(path))?;
    semantic_from_pgm(&img, meta).map_err(|source| PgmError::Map {
        path: path.to_path_buf(),
        source,
    })
}

/// Like [`load_semantic_map`], but a missing sidecar falls back to unit
/// resolution at the origin.
pub fn load_semantic_map_lenient(path: &Path) -> Result<SemanticMap, PgmError> {
    let img = GrayImage::read(path)?;
    let mp = meta_path(path);
    let meta = if mp.exists() {
        MapMeta::read(&mp)?
    } else {
        MapMeta::default()
    };
    semantic_from_pgm(&img, meta).map_err(|source| PgmError::Map {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_semantic_map(map: &SemanticMap, path: &Path) -> Result<(), PgmError> {
    semantic_to_pgm(map).write(path)?;
    MapMeta::from_geometry(map.geometry()).write(&meta_path(path))
}

pub fn save_costmap(cm: &CostMap, path: &Path) -> Result<(), PgmError> {
    costmap_to_pgm(cm).write(path)?;
    MapMeta::from_geometry(cm.geometry()).write(&meta_path(path))
}
