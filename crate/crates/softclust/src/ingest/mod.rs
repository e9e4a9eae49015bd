//! Data ingestion and emission: CSV tabular IO, grayscale PGM image IO with
//! segmentation rendering, and synthetic dataset generators.

mod csv;
mod pgm;
mod synth;

pub use csv::{load_csv, write_csv, CsvSchema, LabelColumn};
pub use pgm::{image_to_dataset, load_pgm, render_segmentation, write_pgm};
pub use synth::{make_blobs, make_diabetes_like};

use crate::error::{Error, Result};

/// A grayscale raster: `width · height` intensities in [0, 255], row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateData("image has zero extent".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: format!("{} pixels", width * height),
                found: format!("{}", pixels.len()),
            });
        }
        Ok(Self {
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

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}
