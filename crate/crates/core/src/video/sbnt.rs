//! SBNT: a minimal little-endian container for `f32` frame stacks.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SBNT"
//! 4       2     version (u16, = 1)
//! 6       4     height  (u32)
//! 10      4     width   (u32)
//! 14      4     frames  (u32)
//! 18      4*n   pixels  (f32), frames concatenated, each row-major
//! ```

use std::fs;
use std::path::Path;

use super::FrameStack;
use crate::error::{Error, Result};

pub const SBNT_MAGIC: &[u8; 4] = b"SBNT";
pub const SBNT_VERSION: u16 = 1;
const HEADER_LEN: usize = 18;

pub fn encode_stack(stack: &FrameStack) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * stack.data().len());
    out.extend_from_slice(SBNT_MAGIC);
    out.extend_from_slice(&SBNT_VERSION.to_le_bytes());
    for dim in [stack.height(), stack.width(), stack.frames()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in stack.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::format(bytes.len(), "truncated header"))
}

pub fn decode_stack(bytes: &[u8]) -> Result<FrameStack> {
    if bytes.len() < 4 || &bytes[..4] != SBNT_MAGIC {
        return Err(Error::format(0, "bad magic, expected \"SBNT\""));
    }
    let version = bytes
        .get(4..6)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or_else(|| Error::format(bytes.len(), "truncated header"))?;
    if version != SBNT_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let height = read_u32(bytes, 6)? as usize;
    let width = read_u32(bytes, 10)? as usize;
    let frames = read_u32(bytes, 14)? as usize;
    if height == 0 || width == 0 || frames == 0 {
        return Err(Error::format(
            6,
            format!("zero dimension in header {height}x{width}x{frames}"),
        ));
    }
    let count = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(frames))
        .ok_or_else(|| Error::format(6, "header dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() / 4 < count {
        return Err(Error::format(
            bytes.len(),
            format!(
                "truncated payload: expected {} bytes",
                HEADER_LEN + 4 * count
            ),
        ));
    }
    if payload.len() != 4 * count {
        return Err(Error::format(
            HEADER_LEN + 4 * count,
            "trailing bytes after payload",
        ));
    }
    let mut data = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::format(HEADER_LEN + 4 * i, "non-finite pixel value"));
        }
        data.push(v);
    }
    FrameStack::new(height, width, frames, data)
}

pub fn load_stack(path: impl AsRef<Path>) -> Result<FrameStack> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_stack(&bytes).map_err(|e| match e {
        Error::Format { offset, message } => Error::Parse {
            path: path.to_path_buf(),
            message: format!("format error at byte {offset}: {message}"),
        },
        other => other,
    })
}

pub fn save_stack(stack: &FrameStack, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_stack(stack)).map_err(|e| Error::io(path, e))
}
