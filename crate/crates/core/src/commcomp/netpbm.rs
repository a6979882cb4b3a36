//! Raw Netpbm export of matrices: P4 for two values, P5 otherwise.
//!
//! Value 0 is white; larger values are darker.

use std::io::{self, Write};

use super::matrix::PredMatrix;
use crate::error::{Error, Result};

/// P4 bitmap; only for matrices over two values.
pub fn write_pbm(m: &PredMatrix, out: &mut impl Write) -> Result<()> {
    if m.values() > 2 {
        return Err(Error::Dimension(format!(
            "PBM needs two values, matrix has {}",
            m.values()
        )));
    }
    io_result(write_pbm_raw(m, out))
}

fn write_pbm_raw(m: &PredMatrix, out: &mut impl Write) -> io::Result<()> {
    write!(out, "P4\n{} {}\n", m.cols(), m.rows())?;
    let mut line = vec![0u8; m.cols().div_ceil(8)];
    for r in 0..m.rows() {
        line.fill(0);
        for c in 0..m.cols() {
            if m.entry(r, c) != 0 {
                line[c / 8] |= 0x80 >> (c % 8);
            }
        }
        out.write_all(&line)?;
    }
    Ok(())
}

/// P5 graymap with `maxval = values - 1`.
pub fn write_pgm(m: &PredMatrix, out: &mut impl Write) -> Result<()> {
    if m.values() > 256 {
        return Err(Error::Dimension(format!(
            "PGM export supports at most 256 values, matrix has {}",
            m.values()
        )));
    }
    io_result(write_pgm_raw(m, out))
}

fn write_pgm_raw(m: &PredMatrix, out: &mut impl Write) -> io::Result<()> {
    let maxval = (m.values().max(2) - 1) as u8;
    write!(out, "P5\n{} {}\n{}\n", m.cols(), m.rows(), maxval)?;
    let mut line = vec![0u8; m.cols()];
    for r in 0..m.rows() {
        for (c, px) in line.iter_mut().enumerate() {
            *px = maxval - m.entry(r, c) as u8;
        }
        out.write_all(&line)?;
    }
    Ok(())
}

fn io_result(r: io::Result<()>) -> Result<()> {
    r.map_err(|e| Error::Parse(format!("write failed: {e}")))
}

/// Decoded raw Netpbm image.
#[derive(Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// One byte per pixel, row-major; PBM pixels are 1 for black.
    pub pixels: Vec<u8>,
}

/// Parses the P4/P5 files written above (single whitespace separators, no
/// comments).
pub fn read_netpbm(bytes: &[u8]) -> Result<Image> {
    let bad = |msg: &str| Error::Parse(format!("netpbm: {msg}"));
    let mut pos = 0;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let num = |s: String| s.parse::<usize>().map_err(|_| bad("bad number"));
    let width = num(token()?)?;
    let height = num(token()?)?;
    let maxval = match magic.as_str() {
        "P4" => 1,
        "P5" => num(token()?)?,
        _ => return Err(bad("unsupported magic")),
    };
    let data = &bytes[pos + 1..];
    let pixels = if magic == "P4" {
        let stride = width.div_ceil(8);
        if data.len() != stride * height {
            return Err(bad("wrong raster size"));
        }
        (0..height)
            .flat_map(|r| (0..width).map(move |c| (data[r * stride + c / 8] >> (7 - c % 8)) & 1))
            .collect()
    } else {
        if data.len() != width * height || maxval > 255 {
            return Err(bad("wrong raster size"));
        }
        data.to_vec()
    };
    Ok(Image {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pbm_bytes() {
        let m = PredMatrix::from_rows(2, &[vec![1, 0, 0, 0, 0, 0, 0, 0, 1], vec![0; 9]]).unwrap();
        let mut buf = Vec::new();
        write_pbm(&m, &mut buf).unwrap();
        assert_eq!(&buf[..7], b"P4\n9 2\n");
        assert_eq!(&buf[7..], &[0x80, 0x80, 0, 0]);
        let img = read_netpbm(&buf).unwrap();
        assert_eq!((img.width, img.height), (9, 2));
        assert_eq!(img.pixels[8], 1);
    }

    #[test]
    fn pgm_bytes() {
        let m = PredMatrix::from_rows(3, &[vec![0, 1, 2]]).unwrap();
        let mut buf = Vec::new();
        write_pgm(&m, &mut buf).unwrap();
        assert_eq!(buf, b"P5\n3 1\n2\n\x02\x01\x00");
        assert!(write_pbm(&m, &mut Vec::new()).is_err());
    }
}
