use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frontend::{to_luminance, GrayFrame, LuminanceFrame};

fn format_err(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        message: message.into(),
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Returns the value and the offset where it started.
    fn number(&mut self, path: &Path, what: &str) -> Result<(usize, usize)> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format_err(path, start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map(|v| (v, start))
            .ok_or_else(|| format_err(path, start, format!("{what} out of range")))
    }
}

/// Decodes a binary (`P5`) PGM with maxval 255. `path` only labels errors.
pub fn parse_pgm(bytes: &[u8], path: &Path) -> Result<GrayFrame> {
    parse_with_offsets(bytes, path).map(|(frame, _)| frame)
}

fn parse_with_offsets(bytes: &[u8], path: &Path) -> Result<(GrayFrame, usize)> {
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some(m) if m[0] == b'P' => {
            return Err(format_err(
                path,
                0,
                format!("unsupported PGM variant `{}`; only binary P5 is accepted", String::from_utf8_lossy(m)),
            ))
        }
        _ => return Err(format_err(path, 0, "missing P5 magic")),
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(format_err(path, 2, "expected whitespace after magic"));
    }
    let (width, width_at) = cur.number(path, "width")?;
    let (height, _) = cur.number(path, "height")?;
    let (maxval, maxval_at) = cur.number(path, "maxval")?;
    if width == 0 || height == 0 {
        return Err(format_err(path, width_at, "zero image dimension"));
    }
    if maxval != 255 {
        return Err(format_err(path, maxval_at, format!("maxval {maxval} is not 255")));
    }
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format_err(path, cur.pos, "expected single whitespace before raster"));
    }
    let start = cur.pos + 1;
    let need = width
        .checked_mul(height)
        .ok_or_else(|| format_err(path, width_at, "image too large"))?;
    let available = bytes.len().saturating_sub(start);
    if available < need {
        return Err(format_err(
            path,
            bytes.len(),
            format!("raster truncated: need {need} bytes, found {available}"),
        ));
    }
    let frame = GrayFrame::new(width, height, bytes[start..start + need].to_vec())?;
    Ok((frame, width_at))
}

pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    parse_pgm(&super::read_file(path)?, path)
}

pub fn encode_pgm(frame: &GrayFrame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.data);
    out
}

pub fn write_pgm(path: &Path, frame: &GrayFrame) -> Result<()> {
    std::fs::write(path, encode_pgm(frame)).map_err(|e| Error::io(path, e))
}

fn is_pattern(path: &Path) -> bool {
    path.to_string_lossy().contains(['*', '?', '['])
}

fn sequence_paths(path: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = if path.is_dir() {
        let entries = std::fs::read_dir(path).map_err(|e| Error::io(path, e))?;
        let mut out = Vec::new();
        for entry in entries {
            let p = entry.map_err(|e| Error::io(path, e))?.path();
            let is_pgm = p
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
            if is_pgm && p.is_file() {
                out.push(p);
            }
        }
        out
    } else if is_pattern(path) {
        let pattern = path.to_string_lossy();
        glob::glob(&pattern)
            .map_err(|e| Error::config("input", format!("bad pattern `{pattern}`: {e}")))?
            .filter_map(|entry| entry.ok())
            .filter(|p| p.is_file())
            .collect()
    } else if path.exists() {
        vec![path.to_path_buf()]
    } else {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    };
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()).then_with(|| a.cmp(b)));
    Ok(paths)
}

/// Reads a PGM file, every `.pgm` in a directory, or every match of a glob
/// pattern, in lexicographic file-name order. All frames must share one size.
pub fn read_gray_sequence(path: &Path) -> Result<Vec<GrayFrame>> {
    let mut frames: Vec<GrayFrame> = Vec::new();
    for p in sequence_paths(path)? {
        let bytes = super::read_file(&p)?;
        let (frame, width_at) = parse_with_offsets(&bytes, &p)?;
        if let Some(first) = frames.first() {
            if (first.width, first.height) != (frame.width, frame.height) {
                return Err(format_err(
                    &p,
                    width_at,
                    format!(
                        "frame size {}x{} differs from sequence size {}x{}",
                        frame.width, frame.height, first.width, first.height
                    ),
                ));
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

pub fn read_pgm_sequence(path: &Path) -> Result<Vec<LuminanceFrame>> {
    read_gray_sequence(path)?
        .iter()
        .map(|f| to_luminance(f, (f.width, f.height)))
        .collect()
}
