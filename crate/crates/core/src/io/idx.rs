//! Big-endian IDX image and label files.

use std::fs;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder};

use crate::error::{Error, Result};
use crate::network::Pattern;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Default binarization cut: pixels at or above it are on.
pub const DEFAULT_THRESHOLD: u8 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub patterns: Vec<Pattern>,
}

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(BigEndian::read_u32)
        .ok_or_else(|| Error::Idx {
            offset,
            reason: format!("file ends before {what}"),
        })
}

fn check_magic(bytes: &[u8], want: u32) -> Result<()> {
    let magic = read_u32(bytes, 0, "magic number")?;
    if magic != want {
        return Err(Error::Idx {
            offset: 0,
            reason: format!("magic {magic:#010x}, expected {want:#010x}"),
        });
    }
    Ok(())
}

fn payload(bytes: &[u8], start: usize, len: usize) -> Result<&[u8]> {
    let end = start.checked_add(len).ok_or_else(|| Error::Idx {
        offset: start,
        reason: "declared size overflows".into(),
    })?;
    if bytes.len() < end {
        return Err(Error::Idx {
            offset: bytes.len(),
            reason: format!("payload truncated: header declares {len} bytes from offset {start}"),
        });
    }
    Ok(&bytes[start..end])
}

/// Pixels `>= threshold` become +1, others -1.
pub fn parse_idx_images(bytes: &[u8], threshold: u8) -> Result<IdxImages> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4, "image count")? as usize;
    let rows = read_u32(bytes, 8, "row count")? as usize;
    let cols = read_u32(bytes, 12, "column count")? as usize;
    let size = rows * cols;
    let data = payload(bytes, 16, count * size)?;
    let patterns = data
        .chunks(size.max(1))
        .take(count)
        .map(|img| Pattern::from_bits(&img.iter().map(|&px| px >= threshold).collect::<Vec<_>>()))
        .collect();
    Ok(IdxImages { rows, cols, patterns })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4, "label count")? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

pub fn load_idx(images_path: impl AsRef<Path>, threshold: u8) -> Result<IdxImages> {
    let path = images_path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx_images(&bytes, threshold)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx_labels(&bytes)
}
