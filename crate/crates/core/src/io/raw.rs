use std::path::Path;

use crate::error::{Error, Result};
use crate::frontend::{to_luminance, GrayFrame, LuminanceFrame};

/// Splits a headerless 8-bit file into consecutive `width * height` frames.
pub fn read_raw_gray(path: &Path, width: usize, height: usize) -> Result<Vec<GrayFrame>> {
    if width == 0 || height == 0 {
        return Err(Error::config("raw-dims", "width and height must be positive"));
    }
    let bytes = super::read_file(path)?;
    let block = width * height;
    if bytes.len() % block != 0 {
        return Err(Error::PartialFrame {
            path: path.to_path_buf(),
            expected: block as u64,
            actual: bytes.len() as u64,
        });
    }
    bytes
        .chunks_exact(block)
        .map(|c| GrayFrame::new(width, height, c.to_vec()))
        .collect()
}

pub fn read_raw_y8(path: &Path, width: usize, height: usize) -> Result<Vec<LuminanceFrame>> {
    read_raw_gray(path, width, height)?
        .iter()
        .map(|f| to_luminance(f, (width, height)))
        .collect()
}
