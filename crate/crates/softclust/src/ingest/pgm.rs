use std::fs;
use std::path::Path;

use super::GrayImage;
use crate::ambiguity::{OutcomeSet, Status};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse {
        row: 0,
        column: 0,
        message: message.into(),
    }
}

/// Pulls whitespace/comment-separated header tokens from a PGM byte stream,
/// returning each token with the offset just past it.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_fill(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_fill();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            if self.bytes[self.pos] == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn next_usize(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .next_token()
            .ok_or_else(|| parse_err(format!("missing {what} in image header")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(format!("invalid {what} in image header")))
    }

    fn rest_is_blank(&mut self) -> bool {
        self.skip_fill();
        self.pos >= self.bytes.len()
    }
}

/// Reads a plain (P2) or binary (P5) PGM file with maxval 255.
pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    let mut tokens = Tokens::new(&bytes);
    let magic = tokens
        .next_token()
        .ok_or_else(|| parse_err("empty image file"))?
        .to_vec();
    if magic != b"P2" && magic != b"P5" {
        return Err(parse_err("unsupported image magic (want P2 or P5)"));
    }
    let width = tokens.next_usize("width")?;
    let height = tokens.next_usize("height")?;
    let maxval = tokens.next_usize("maxval")?;
    if maxval != 255 {
        return Err(parse_err(format!("unsupported maxval {maxval} (want 255)")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| parse_err("image dimensions overflow"))?;

    let pixels = if magic == b"P5" {
        // Exactly one whitespace byte separates the header from the raster.
        let start = tokens.pos + 1;
        if tokens.pos >= bytes.len() || !bytes[tokens.pos].is_ascii_whitespace() {
            return Err(parse_err("missing separator before binary pixel data"));
        }
        let end = start + n;
        if bytes.len() < end {
            return Err(parse_err(format!(
                "truncated pixel data: want {n} bytes, found {}",
                bytes.len().saturating_sub(start)
            )));
        }
        if bytes[end..].iter().any(|b| !b.is_ascii_whitespace()) {
            return Err(parse_err("trailing bytes after pixel data"));
        }
        bytes[start..end].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(n);
        for _ in 0..n {
            let v = tokens.next_usize("pixel value")?;
            if v > 255 {
                return Err(parse_err(format!("pixel value {v} exceeds maxval")));
            }
            pixels.push(v as u8);
        }
        if !tokens.rest_is_blank() {
            return Err(parse_err("trailing tokens after pixel data"));
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

/// Writes a binary (P5) PGM file with maxval 255.
pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    fs::write(path, out)?;
    Ok(())
}

/// Flattens an image into a one-feature dataset: each pixel becomes a record
/// with its intensity scaled to [0, 1] (row-major order, so pixel (x, y) is
/// record `y·width + x`).
pub fn image_to_dataset(img: &GrayImage) -> Dataset {
    let records = img
        .pixels()
        .iter()
        .map(|&p| vec![p as f64 / 255.0])
        .collect();
    let mut data = Dataset::new(records, vec!["intensity".into()])
        .expect("a validated image is a non-empty dataset");
    data.set_normalization(vec![(0.0, 255.0)]);
    data
}

/// Paints each confidently assigned pixel with its cluster's centroid
/// intensity (rescaled to [0, 255], rounded half-up) and each ambiguous pixel
/// pure black.
pub fn render_segmentation(
    img: &GrayImage,
    outcomes: &OutcomeSet,
    centroids: &[Vec<f64>],
) -> Result<GrayImage> {
    let n = img.width() * img.height();
    if outcomes.len() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n} outcomes"),
            found: format!("{}", outcomes.len()),
        });
    }
    for v in centroids {
        if v.len() != 1 {
            return Err(Error::ShapeMismatch {
                expected: "1-feature centroids".into(),
                found: format!("{} features", v.len()),
            });
        }
    }
    let mut pixels = vec![0u8; n];
    for o in &outcomes.outcomes {
        let value = match o.status {
            Status::Ambiguous => 0,
            Status::Assigned(c) => {
                let v = centroids
                    .get(c)
                    .ok_or_else(|| Error::ShapeMismatch {
                        expected: format!("cluster index < {}", centroids.len()),
                        found: format!("{c}"),
                    })?[0];
                (v * 255.0).round().clamp(0.0, 255.0) as u8
            }
        };
        pixels[o.record_index] = value;
    }
    GrayImage::new(img.width(), img.height(), pixels)
}
