//! NIfTI-1 single-file (`n+1`) reader and writer.
//!
//! Only the fields needed for a calibrated 3D grid are interpreted: `dim`,
//! `datatype`, `bitpix`, `pixdim`, `vox_offset`, `scl_slope`, `scl_inter` and
//! the magic string. Orientation (qform/sform) is ignored. Big-endian files are
//! detected through `sizeof_hdr` and read transparently.

use std::io::{Read, Write};

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HEADER_SIZE: usize = 348;
/// Header plus the 4-byte extension flag.
pub const DEFAULT_VOX_OFFSET: usize = 352;

mod offsets {
    pub const SIZEOF_HDR: usize = 0;
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const XYZT_UNITS: usize = 123;
    pub const MAGIC: usize = 344;
}

/// Voxel storage types accepted by the reader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Datatype {
    Uint8,
    Int16,
    Int32,
    Float32,
    Float64,
}

impl Datatype {
    pub const ALL: [Datatype; 5] = [
        Datatype::Uint8,
        Datatype::Int16,
        Datatype::Int32,
        Datatype::Float32,
        Datatype::Float64,
    ];

    pub fn from_code(code: i16) -> Result<Self> {
        match code {
            2 => Ok(Datatype::Uint8),
            4 => Ok(Datatype::Int16),
            8 => Ok(Datatype::Int32),
            16 => Ok(Datatype::Float32),
            64 => Ok(Datatype::Float64),
            other => Err(Error::UnsupportedDatatype(other)),
        }
    }

    pub fn code(self) -> i16 {
        match self {
            Datatype::Uint8 => 2,
            Datatype::Int16 => 4,
            Datatype::Int32 => 8,
            Datatype::Float32 => 16,
            Datatype::Float64 => 64,
        }
    }

    pub fn size_bytes(self) -> usize {
        match self {
            Datatype::Uint8 => 1,
            Datatype::Int16 => 2,
            Datatype::Int32 | Datatype::Float32 => 4,
            Datatype::Float64 => 8,
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Datatype::Uint8 | Datatype::Int16 | Datatype::Int32)
    }

    pub fn name(self) -> &'static str {
        match self {
            Datatype::Uint8 => "uint8",
            Datatype::Int16 => "int16",
            Datatype::Int32 => "int32",
            Datatype::Float32 => "float32",
            Datatype::Float64 => "float64",
        }
    }
}

/// The subset of header fields the toolkit cares about.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub datatype: Datatype,
    pub vox_offset: usize,
    pub scl_slope: f64,
    pub scl_inter: f64,
}

/// A decoded file: header plus the raw (unscaled) voxel values in file order.
#[derive(Debug, Clone)]
pub struct RawNifti {
    pub header: Header,
    pub raw: Vec<f64>,
}

impl RawNifti {
    /// Applies `raw * slope + inter`, with slope 0 (or non-finite) meaning identity.
    pub fn scaled(&self) -> Result<Vec<f64>> {
        let (slope, inter) = effective_scaling(self.header.scl_slope, self.header.scl_inter);
        self.raw
            .iter()
            .enumerate()
            .map(|(idx, &r)| {
                let v = r * slope + inter;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteVoxel(idx))
                }
            })
            .collect()
    }
}

fn effective_scaling(slope: f64, inter: f64) -> (f64, f64) {
    if slope == 0.0 || !slope.is_finite() {
        (1.0, 0.0)
    } else {
        (slope, if inter.is_finite() { inter } else { 0.0 })
    }
}

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

pub fn is_gzip(bytes: &[u8]) -> bool {
    bytes.len() >= 2 && bytes[..2] == GZIP_MAGIC
}

/// Decompresses gzip input when the magic prefix is present, otherwise borrows.
pub fn maybe_gunzip(bytes: &[u8]) -> Result<std::borrow::Cow<'_, [u8]>> {
    if !is_gzip(bytes) {
        return Ok(std::borrow::Cow::Borrowed(bytes));
    }
    let mut out = Vec::new();
    MultiGzDecoder::new(bytes)
        .read_to_end(&mut out)
        .map_err(|e| Error::Decompression(e.to_string()))?;
    Ok(std::borrow::Cow::Owned(out))
}

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

struct Reader<'a> {
    bytes: &'a [u8],
    endian: Endian,
}

impl Reader<'_> {
    fn array<const N: usize>(&self, at: usize) -> [u8; N] {
        let mut buf = [0u8; N];
        buf.copy_from_slice(&self.bytes[at..at + N]);
        buf
    }

    fn i16(&self, at: usize) -> i16 {
        match self.endian {
            Endian::Little => i16::from_le_bytes(self.array(at)),
            Endian::Big => i16::from_be_bytes(self.array(at)),
        }
    }

    fn f32(&self, at: usize) -> f32 {
        match self.endian {
            Endian::Little => f32::from_le_bytes(self.array(at)),
            Endian::Big => f32::from_be_bytes(self.array(at)),
        }
    }

    fn value(&self, datatype: Datatype, at: usize) -> f64 {
        let b = self.bytes;
        match (datatype, self.endian) {
            (Datatype::Uint8, _) => b[at] as f64,
            (Datatype::Int16, _) => self.i16(at) as f64,
            (Datatype::Int32, Endian::Little) => i32::from_le_bytes(self.array(at)) as f64,
            (Datatype::Int32, Endian::Big) => i32::from_be_bytes(self.array(at)) as f64,
            (Datatype::Float32, _) => self.f32(at) as f64,
            (Datatype::Float64, Endian::Little) => f64::from_le_bytes(self.array(at)),
            (Datatype::Float64, Endian::Big) => f64::from_be_bytes(self.array(at)),
        }
    }
}

/// Parses the header of an (already decompressed) NIfTI-1 byte buffer.
pub fn parse_header(bytes: &[u8]) -> Result<(Header, bool)> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::MalformedHeader(format!(
            "need {HEADER_SIZE} header bytes, got {}",
            bytes.len()
        )));
    }
    let magic = &bytes[offsets::MAGIC..offsets::MAGIC + 4];
    if magic != b"n+1\0" {
        return Err(Error::MalformedHeader(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let sizeof = &bytes[offsets::SIZEOF_HDR..offsets::SIZEOF_HDR + 4];
    let endian = if i32::from_le_bytes(sizeof.try_into().unwrap()) == HEADER_SIZE as i32 {
        Endian::Little
    } else if i32::from_be_bytes(sizeof.try_into().unwrap()) == HEADER_SIZE as i32 {
        Endian::Big
    } else {
        return Err(Error::MalformedHeader("sizeof_hdr is not 348".into()));
    };
    let r = Reader { bytes, endian };

    let ndim = r.i16(offsets::DIM);
    if !(1..=7).contains(&ndim) {
        return Err(Error::MalformedHeader(format!("dim[0] = {ndim}")));
    }
    let mut dims = [1usize; 3];
    for (axis, d) in dims.iter_mut().enumerate() {
        if (axis as i16) < ndim {
            let v = r.i16(offsets::DIM + 2 * (axis + 1));
            if v <= 0 {
                return Err(Error::MalformedHeader(format!("dim[{}] = {v}", axis + 1)));
            }
            *d = v as usize;
        }
    }
    for extra in 4..=(ndim as usize) {
        let v = r.i16(offsets::DIM + 2 * extra);
        if v > 1 {
            return Err(Error::UnsupportedDimensions(format!("dim[{extra}] = {v}")));
        }
    }

    let datatype = Datatype::from_code(r.i16(offsets::DATATYPE))?;
    let bitpix = r.i16(offsets::BITPIX);
    if bitpix != 0 && bitpix as usize != datatype.size_bytes() * 8 {
        return Err(Error::MalformedHeader(format!(
            "bitpix {bitpix} inconsistent with {}",
            datatype.name()
        )));
    }

    let mut spacing = [1.0f64; 3];
    for (axis, s) in spacing.iter_mut().enumerate() {
        let v = r.f32(offsets::PIXDIM + 4 * (axis + 1)) as f64;
        if !v.is_finite() || v == 0.0 {
            return Err(Error::MalformedHeader(format!("pixdim[{}] = {v}", axis + 1)));
        }
        *s = v.abs();
    }

    let vox_offset = r.f32(offsets::VOX_OFFSET);
    if !vox_offset.is_finite() || vox_offset < HEADER_SIZE as f32 {
        return Err(Error::MalformedHeader(format!("vox_offset = {vox_offset}")));
    }

    let header = Header {
        dims,
        spacing,
        datatype,
        vox_offset: vox_offset as usize,
        scl_slope: r.f32(offsets::SCL_SLOPE) as f64,
        scl_inter: r.f32(offsets::SCL_INTER) as f64,
    };
    Ok((header, matches!(endian, Endian::Big)))
}

/// Decodes a NIfTI-1 file (optionally gzipped) into header and raw values.
pub fn read(bytes: &[u8]) -> Result<RawNifti> {
    let data = maybe_gunzip(bytes)?;
    let (header, big_endian) = parse_header(&data)?;
    let count = header.dims.iter().product::<usize>();
    let width = header.datatype.size_bytes();
    let needed = count * width;
    let available = data.len().saturating_sub(header.vox_offset);
    if available < needed {
        return Err(Error::TruncatedPayload {
            offset: header.vox_offset,
            needed,
            available,
        });
    }
    let r = Reader {
        bytes: &data,
        endian: if big_endian { Endian::Big } else { Endian::Little },
    };
    let raw = (0..count)
        .map(|n| r.value(header.datatype, header.vox_offset + n * width))
        .collect();
    Ok(RawNifti { header, raw })
}

/// Little-endian NIfTI-1 encoder used for fixtures and phantoms.
#[derive(Debug, Clone)]
pub struct Writer {
    pub datatype: Datatype,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub gzip: bool,
}

impl Writer {
    pub fn new(datatype: Datatype) -> Self {
        Writer {
            datatype,
            scl_slope: 1.0,
            scl_inter: 0.0,
            gzip: false,
        }
    }

    pub fn scaling(mut self, slope: f32, inter: f32) -> Self {
        self.scl_slope = slope;
        self.scl_inter = inter;
        self
    }

    pub fn gzip(mut self, gzip: bool) -> Self {
        self.gzip = gzip;
        self
    }

    /// Serializes `raw` (already in storage units) into a complete file.
    ///
    /// Values are cast to the storage type with Rust `as` semantics; callers
    /// are responsible for passing representable values.
    pub fn encode(&self, dims: [usize; 3], spacing: [f64; 3], raw: &[f64]) -> Vec<u8> {
        assert_eq!(raw.len(), dims.iter().product::<usize>());
        let mut out = vec![0u8; DEFAULT_VOX_OFFSET];
        out[offsets::SIZEOF_HDR..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
        let mut dim = [1i16; 8];
        dim[0] = 3;
        for axis in 0..3 {
            dim[axis + 1] = i16::try_from(dims[axis]).expect("dimension exceeds NIfTI-1 range");
        }
        for (n, d) in dim.iter().enumerate() {
            out[offsets::DIM + 2 * n..offsets::DIM + 2 * n + 2].copy_from_slice(&d.to_le_bytes());
        }
        out[offsets::DATATYPE..offsets::DATATYPE + 2]
            .copy_from_slice(&self.datatype.code().to_le_bytes());
        out[offsets::BITPIX..offsets::BITPIX + 2]
            .copy_from_slice(&((self.datatype.size_bytes() * 8) as i16).to_le_bytes());
        let mut pixdim = [1.0f32; 8];
        for axis in 0..3 {
            pixdim[axis + 1] = spacing[axis] as f32;
        }
        for (n, p) in pixdim.iter().enumerate() {
            out[offsets::PIXDIM + 4 * n..offsets::PIXDIM + 4 * n + 4]
                .copy_from_slice(&p.to_le_bytes());
        }
        out[offsets::VOX_OFFSET..offsets::VOX_OFFSET + 4]
            .copy_from_slice(&(DEFAULT_VOX_OFFSET as f32).to_le_bytes());
        out[offsets::SCL_SLOPE..offsets::SCL_SLOPE + 4]
            .copy_from_slice(&self.scl_slope.to_le_bytes());
        out[offsets::SCL_INTER..offsets::SCL_INTER + 4]
            .copy_from_slice(&self.scl_inter.to_le_bytes());
        // millimetres
        out[offsets::XYZT_UNITS] = 2;
        out[offsets::MAGIC..offsets::MAGIC + 4].copy_from_slice(b"n+1\0");

        out.reserve(raw.len() * self.datatype.size_bytes());
        for &v in raw {
            match self.datatype {
                Datatype::Uint8 => out.push(v as u8),
                Datatype::Int16 => out.extend_from_slice(&(v as i16).to_le_bytes()),
                Datatype::Int32 => out.extend_from_slice(&(v as i32).to_le_bytes()),
                Datatype::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                Datatype::Float64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
        if self.gzip {
            let mut enc = GzEncoder::new(Vec::new(), Compression::new(6));
            enc.write_all(&out).expect("in-memory write");
            enc.finish().expect("in-memory write")
        } else {
            out
        }
    }
}
