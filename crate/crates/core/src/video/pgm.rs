//! Binary ("P5") PGM frames with maxval 255.

use std::fs;
use std::path::{Path, PathBuf};

use super::FrameStack;
use crate::error::{Error, Result};
use crate::metrics::GrayImage;

/// Parses a P5 file into `[0, 1]` intensities (`v / 255`).
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::format(0, "unsupported PGM variant, expected P5"));
    }
    let width = parse_header_int(bytes, &mut pos)?;
    let height = parse_header_int(bytes, &mut pos)?;
    let maxval_at = pos;
    let maxval = parse_header_int(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(Error::format(
            maxval_at,
            format!("unsupported maxval {maxval}, expected 255"),
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::format(pos, "missing whitespace after maxval"));
    }
    pos += 1;
    let count = width * height;
    if width == 0 || height == 0 {
        return Err(Error::format(pos, "zero image dimension"));
    }
    let raster = bytes
        .get(pos..pos + count)
        .ok_or_else(|| Error::format(bytes.len(), "truncated raster"))?;
    let values = raster.iter().map(|&b| f64::from(b) / 255.0).collect();
    GrayImage::new(height, width, values)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::format(*pos, "truncated header")),
        }
    }
    let start = *pos;
    while bytes
        .get(*pos)
        .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
    {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn parse_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let start = *pos;
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(start, "expected an integer in PGM header"))
}

/// Encodes `img` as P5, clamping to `[0, 1]` and rounding `v * 255`.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.levels());
    out
}

fn pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every `*.pgm` file in `dir`, in lexicographic filename order.
pub fn import_frames(dir: impl AsRef<Path>) -> Result<FrameStack> {
    let dir = dir.as_ref();
    let files = pgm_files(dir)?;
    if files.is_empty() {
        return Err(Error::Parse {
            path: dir.to_path_buf(),
            message: "no .pgm files found".into(),
        });
    }
    let mut frames = Vec::with_capacity(files.len());
    for path in &files {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let img = read_pgm(&bytes).map_err(|e| Error::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if let Some(first) = frames.first() {
            let first: &GrayImage = first;
            if (img.height(), img.width()) != (first.height(), first.width()) {
                return Err(Error::Dimension(format!(
                    "{} is {}x{}, earlier frames are {}x{}",
                    path.display(),
                    img.height(),
                    img.width(),
                    first.height(),
                    first.width()
                )));
            }
        }
        frames.push(img);
    }
    FrameStack::from_frames(&frames)
}

/// Writes `frame_00000.pgm`, `frame_00001.pgm`, ... into `dir`.
///
/// With `normalize`, the stack minimum maps to 0 and its maximum to 255;
/// otherwise values are clamped to `[0, 1]` before scaling.
pub fn export_frames(stack: &FrameStack, dir: impl AsRef<Path>, normalize: bool) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let source = if normalize {
        stack.normalized()
    } else {
        stack.clone()
    };
    for k in 0..source.frames() {
        let path = dir.join(format!("frame_{k:05}.pgm"));
        fs::write(&path, write_pgm(&source.frame_image(k))).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
