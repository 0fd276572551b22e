//! Netpbm graymap I/O.
//!
//! Reads ASCII (`P2`) and binary (`P5`, 8- or 16-bit) files, mapping samples
//! to `[0, 1]` by dividing by maxval. Writes binary `P5` with maxval 255,
//! clamping to `[0, 1]` and rounding.

use std::fs;
use std::path::Path;

use super::ImagePlane;
use crate::error::{Error, Result};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("unexpected end of PGM data".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::Format("non-ASCII PGM header".into()))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let t = self.token()?;
        t.parse()
            .map_err(|_| Error::Format(format!("bad PGM {what} `{t}`")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<ImagePlane> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token()?;
    let binary = match magic {
        "P2" => false,
        "P5" => true,
        other => return Err(Error::Format(format!("not a graymap: magic `{other}`"))),
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format("PGM dimensions must be positive".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    let n = width * height;
    let scale = 1.0 / maxval as f64;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        let wide = maxval > 255;
        let need = if wide { 2 * n } else { n };
        let raster = bytes
            .get(start..start + need)
            .ok_or_else(|| Error::Format("truncated P5 raster".into()))?;
        if wide {
            for pair in raster.chunks_exact(2) {
                let v = u16::from_be_bytes([pair[0], pair[1]]) as usize;
                pixels.push(v.min(maxval) as f64 * scale);
            }
        } else {
            pixels.extend(raster.iter().map(|&v| (v as usize).min(maxval) as f64 * scale));
        }
    } else {
        for _ in 0..n {
            let v = cur.number("sample")?;
            if v > maxval {
                return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as f64 * scale);
        }
    }
    ImagePlane::new(width, height, pixels)
}

pub fn encode_pgm(img: &ImagePlane) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(
        img.pixels()
            .iter()
            .map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<ImagePlane> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &ImagePlane) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_with_comments() {
        let text = b"P2\n# a comment\n3 2\n# another\n4\n0 1 2\n3 4 4\n";
        let img = decode_pgm(text).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.pixels(), &[0.0, 0.25, 0.5, 0.75, 1.0, 1.0]);
    }

    #[test]
    fn binary_8_and_16_bit() {
        let mut b = b"P5 2 1 255\n".to_vec();
        b.extend([0u8, 255]);
        assert_eq!(decode_pgm(&b).unwrap().pixels(), &[0.0, 1.0]);

        let mut w = b"P5\n1 2\n1000\n".to_vec();
        w.extend(500u16.to_be_bytes());
        w.extend(1000u16.to_be_bytes());
        assert_eq!(decode_pgm(&w).unwrap().pixels(), &[0.5, 1.0]);
    }

    #[test]
    fn encode_clamps_and_rounds() {
        let img = ImagePlane::new(4, 1, vec![-0.2, 0.5, 1.3, 0.1]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[..11], b"P5\n4 1\n255\n");
        assert_eq!(&bytes[11..], &[0, 128, 255, 26]);
        let back = decode_pgm(&bytes).unwrap();
        assert_eq!(back.width(), 4);
        assert!((back.pixels()[1] - 128.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn malformed() {
        assert!(decode_pgm(b"P6 1 1 255\n\0\0\0").is_err());
        assert!(decode_pgm(b"P5 2 2 255\n\0").is_err());
        assert!(decode_pgm(b"P2 2 1 3\n1 9\n").is_err());
        assert!(decode_pgm(b"P2 2 1\n").is_err());
        assert!(decode_pgm(b"P2 0 1 255\n").is_err());
    }
}
