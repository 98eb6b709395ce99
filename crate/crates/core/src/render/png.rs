//! Deterministic 8-bit grayscale PNG encoder.
//!
//! Every scanline uses filter type 0 and the image data is a single zlib
//! stream at compression level 6, emitted as one IDAT chunk. Equal images
//! therefore always encode to equal bytes.

use std::io::Write;

use flate2::write::ZlibEncoder;
use flate2::Compression;

use super::Image2D;
use crate::error::{Error, Result};

pub const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];
pub const MEDIA_TYPE: &str = "image/png";

fn chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    let mut crc = crc32fast::Hasher::new();
    crc.update(kind);
    crc.update(data);
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    out.extend_from_slice(&crc.finalize().to_be_bytes());
}

pub fn encode_png(image: &Image2D) -> Result<Vec<u8>> {
    if image.width == 0 || image.height == 0 {
        return Err(Error::InvalidImage { width: image.width, height: image.height });
    }
    debug_assert_eq!(image.pixels.len(), image.width * image.height);
    let too_big = |d: usize| u32::try_from(d).map_err(|_| Error::InvalidImage {
        width: image.width,
        height: image.height,
    });
    let (w, h) = (too_big(image.width)?, too_big(image.height)?);

    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&w.to_be_bytes());
    ihdr.extend_from_slice(&h.to_be_bytes());
    // bit depth 8, grayscale, deflate, adaptive filtering, no interlace
    ihdr.extend_from_slice(&[8, 0, 0, 0, 0]);

    let mut z = ZlibEncoder::new(Vec::new(), Compression::new(6));
    for row in image.pixels.chunks(image.width) {
        z.write_all(&[0]).expect("in-memory write");
        z.write_all(row).expect("in-memory write");
    }
    let idat = z.finish().expect("in-memory write");

    let mut out = Vec::with_capacity(idat.len() + 64);
    out.extend_from_slice(&SIGNATURE);
    chunk(&mut out, b"IHDR", &ihdr);
    chunk(&mut out, b"IDAT", &idat);
    chunk(&mut out, b"IEND", &[]);
    Ok(out)
}
