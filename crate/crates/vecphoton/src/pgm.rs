//! Binary PGM (P5) images for count archives and custom pattern maps.
//!
//! The format is the classic Netpbm portable graymap:
//!
//! ```text
//! P5\n<width> <height>\n<maxval>\n<raw samples>
//! ```
//!
//! Writing always uses 16-bit big-endian samples with `maxval = 65535`, which
//! covers Poisson counts for every supported exposure. Reading accepts both
//! 8-bit and 16-bit graymaps so externally produced maps (e.g. hand-drawn
//! intensity or phase masks) can be ingested; `#` comment lines in the header
//! are honored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Maximum sample value written by [`write_pgm16`].
pub const PGM16_MAX: u32 = 65_535;

/// An image read from a PGM file: row-major samples plus the header maxval.
#[derive(Clone, Debug)]
pub struct PgmImage {
    /// Samples as `[row, col]`, in file units (0..=maxval).
    pub samples: Array2<u32>,
    /// Header maxval (255 for 8-bit files, up to 65535 for 16-bit).
    pub maxval: u32,
}

impl PgmImage {
    /// Samples rescaled to `[0, 1]` by the header maxval.
    pub fn normalized(&self) -> Array2<f64> {
        let scale = 1.0 / self.maxval as f64;
        self.samples.mapv(|s| s as f64 * scale)
    }
}

/// Write `data` (row-major `[row, col]`) as a 16-bit binary PGM.
///
/// Values must lie in `0..=65535`; anything larger is a
/// [`Error::CountsOverflow`], fractional values are rounded.
pub fn write_pgm16(path: &Path, data: &Array2<f64>) -> Result<()> {
    let (rows, cols) = data.dim();
    let mut max = 0.0_f64;
    for &v in data.iter() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                reason: format!("cannot encode sample {v} as a count"),
            });
        }
        if v > max {
            max = v;
        }
    }
    if max.round() > PGM16_MAX as f64 {
        return Err(Error::CountsOverflow { max });
    }

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = format!("P5\n{cols} {rows}\n{PGM16_MAX}\n");
    w.write_all(header.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::with_capacity(rows * cols * 2);
    for &v in data.iter() {
        let s = v.round() as u16;
        buf.extend_from_slice(&s.to_be_bytes());
    }
    w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a binary PGM (8-bit or 16-bit).
pub fn read_pgm(path: &Path) -> Result<PgmImage> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;

    let malformed = |reason: &str| Error::Malformed {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed("not a binary PGM (missing P5 magic)"));
    }

    // Header tokens after the magic: width, height, maxval. Whitespace
    // separated; '#' starts a comment running to end of line.
    let mut pos = 2usize;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(malformed("truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(malformed("expected integer in header"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are ascii");
        *field = text
            .parse::<u32>()
            .map_err(|_| malformed("header value out of range"))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimension"));
    }
    if maxval == 0 || maxval > PGM16_MAX {
        return Err(malformed("maxval must lie in 1..=65535"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(malformed("missing separator before raster")),
    }

    let (w, h) = (width as usize, height as usize);
    let bytes_per = if maxval > 255 { 2 } else { 1 };
    let need = w * h * bytes_per;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| malformed("raster shorter than header promises"))?;

    let mut samples = Array2::<u32>::zeros((h, w));
    if bytes_per == 2 {
        for (slot, chunk) in samples.iter_mut().zip(raster.chunks_exact(2)) {
            *slot = u32::from(u16::from_be_bytes([chunk[0], chunk[1]]));
        }
    } else {
        for (slot, &b) in samples.iter_mut().zip(raster.iter()) {
            *slot = u32::from(b);
        }
    }
    for &s in samples.iter() {
        if s > maxval {
            return Err(malformed("sample exceeds header maxval"));
        }
    }
    Ok(PgmImage { samples, maxval })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trips_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.pgm");
        let data = array![[0.0, 1.0, 2.0], [65535.0, 12345.0, 7.0]];
        write_pgm16(&path, &data).unwrap();
        let img = read_pgm(&path).unwrap();
        assert_eq!(img.maxval, 65535);
        assert_eq!(img.samples, data.mapv(|v| v as u32));
    }

    #[test]
    fn rejects_overflowing_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.pgm");
        let data = array![[0.0, 70000.0]];
        assert!(matches!(
            write_pgm16(&path, &data),
            Err(Error::CountsOverflow { .. })
        ));
    }

    #[test]
    fn reads_eight_bit_files_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.pgm");
        let mut bytes = b"P5\n# drawn by hand\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255, 64]);
        std::fs::write(&path, bytes).unwrap();
        let img = read_pgm(&path).unwrap();
        assert_eq!(img.maxval, 255);
        assert_eq!(img.samples, array![[0u32, 128], [255, 64]]);
        let norm = img.normalized();
        assert!((norm[[1, 0]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_truncated_raster() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.pgm");
        std::fs::write(&path, b"P5\n4 4\n65535\nxx").unwrap();
        assert!(matches!(read_pgm(&path), Err(Error::Malformed { .. })));
    }
}
