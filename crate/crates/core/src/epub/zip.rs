//! Minimal deterministic zip writer and reader (PKZIP 2.0 features only:
//! stored and deflate entries, no zip64, no data descriptors).
//!
//! Determinism: entry order is caller-controlled, timestamps are supplied
//! explicitly, and no platform-dependent fields are written — the same
//! inputs always produce the same bytes.

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::{Compression, Crc};
use thiserror::Error;

const LOCAL_SIG: u32 = 0x0403_4b50;
const CENTRAL_SIG: u32 = 0x0201_4b50;
const EOCD_SIG: u32 = 0x0605_4b50;

pub const METHOD_STORED: u16 = 0;
pub const METHOD_DEFLATE: u16 = 8;

#[derive(Debug, Error)]
pub enum ZipError {
    #[error("not a zip archive")]
    NotAZip,
    #[error("archive truncated")]
    Truncated,
    #[error("unsupported compression method {0}")]
    UnsupportedMethod(u16),
    #[error("entry `{0}` is corrupt")]
    BadEntry(String),
}

/// MS-DOS date/time pair used in zip headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DosTime {
    pub date: u16,
    pub time: u16,
}

impl DosTime {
    pub fn new(year: u16, month: u16, day: u16, hour: u16, minute: u16, second: u16) -> DosTime {
        DosTime {
            date: (year.saturating_sub(1980) << 9) | (month << 5) | day,
            time: (hour << 11) | (minute << 5) | (second / 2),
        }
    }
}

struct Entry {
    name: String,
    method: u16,
    crc: u32,
    compressed: Vec<u8>,
    uncompressed_len: u32,
    time: DosTime,
    offset: u32,
}

#[derive(Default)]
pub struct ZipWriter {
    buf: Vec<u8>,
    entries: Vec<Entry>,
}

fn crc32(data: &[u8]) -> u32 {
    let mut crc = Crc::new();
    crc.update(data);
    crc.sum()
}

impl ZipWriter {
    pub fn new() -> ZipWriter {
        ZipWriter::default()
    }

    pub fn add_stored(&mut self, name: &str, data: &[u8], time: DosTime) {
        self.add(name, METHOD_STORED, data.to_vec(), data, time);
    }

    pub fn add_deflated(&mut self, name: &str, data: &[u8], time: DosTime) {
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
        enc.write_all(data).expect("in-memory write");
        let compressed = enc.finish().expect("in-memory finish");
        self.add(name, METHOD_DEFLATE, compressed, data, time);
    }

    fn add(&mut self, name: &str, method: u16, compressed: Vec<u8>, data: &[u8], time: DosTime) {
        let offset = self.buf.len() as u32;
        let crc = crc32(data);
        self.push_u32(LOCAL_SIG);
        self.push_u16(20); // version needed
        self.push_u16(0); // flags
        self.push_u16(method);
        self.push_u16(time.time);
        self.push_u16(time.date);
        self.push_u32(crc);
        self.push_u32(compressed.len() as u32);
        self.push_u32(data.len() as u32);
        self.push_u16(name.len() as u16);
        self.push_u16(0); // extra length
        self.buf.extend_from_slice(name.as_bytes());
        self.buf.extend_from_slice(&compressed);
        self.entries.push(Entry {
            name: name.to_string(),
            method,
            crc,
            uncompressed_len: data.len() as u32,
            compressed,
            time,
            offset,
        });
    }

    pub fn finish(mut self) -> Vec<u8> {
        let central_start = self.buf.len() as u32;
        let mut central = Vec::new();
        for e in &self.entries {
            push_u32(&mut central, CENTRAL_SIG);
            push_u16(&mut central, 20); // version made by
            push_u16(&mut central, 20); // version needed
            push_u16(&mut central, 0); // flags
            push_u16(&mut central, e.method);
            push_u16(&mut central, e.time.time);
            push_u16(&mut central, e.time.date);
            push_u32(&mut central, e.crc);
            push_u32(&mut central, e.compressed.len() as u32);
            push_u32(&mut central, e.uncompressed_len);
            push_u16(&mut central, e.name.len() as u16);
            push_u16(&mut central, 0); // extra
            push_u16(&mut central, 0); // comment
            push_u16(&mut central, 0); // disk number
            push_u16(&mut central, 0); // internal attrs
            push_u32(&mut central, 0); // external attrs
            push_u32(&mut central, e.offset);
            central.extend_from_slice(e.name.as_bytes());
        }
        let central_len = central.len() as u32;
        self.buf.extend_from_slice(&central);
        let n = self.entries.len() as u16;
        self.push_u32(EOCD_SIG);
        self.push_u16(0); // disk
        self.push_u16(0); // central dir disk
        self.push_u16(n);
        self.push_u16(n);
        self.push_u32(central_len);
        self.push_u32(central_start);
        self.push_u16(0); // comment length
        self.buf
    }

    fn push_u16(&mut self, v: u16) {
        push_u16(&mut self.buf, v);
    }

    fn push_u32(&mut self, v: u32) {
        push_u32(&mut self.buf, v);
    }
}

fn push_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

/// One archive entry as read back, decompressed.
#[derive(Debug, Clone)]
pub struct ZipEntry {
    pub name: String,
    pub method: u16,
    pub extra_len: u16,
    pub data: Vec<u8>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u16(&mut self) -> Result<u16, ZipError> {
        let b = self
            .bytes
            .get(self.pos..self.pos + 2)
            .ok_or(ZipError::Truncated)?;
        self.pos += 2;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, ZipError> {
        let b = self
            .bytes
            .get(self.pos..self.pos + 4)
            .ok_or(ZipError::Truncated)?;
        self.pos += 4;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ZipError> {
        let b = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or(ZipError::Truncated)?;
        self.pos += n;
        Ok(b)
    }
}

/// Walk local headers in archive order, decompressing each entry and
/// checking its CRC.
pub fn read_zip(bytes: &[u8]) -> Result<Vec<ZipEntry>, ZipError> {
    let mut r = Reader { bytes, pos: 0 };
    let mut out = Vec::new();
    loop {
        let Ok(sig) = r.u32() else {
            if out.is_empty() {
                return Err(ZipError::NotAZip);
            }
            return Ok(out);
        };
        if sig != LOCAL_SIG {
            if out.is_empty() && sig != CENTRAL_SIG && sig != EOCD_SIG {
                return Err(ZipError::NotAZip);
            }
            return Ok(out);
        }
        let _version = r.u16()?;
        let flags = r.u16()?;
        let method = r.u16()?;
        let _time = r.u16()?;
        let _date = r.u16()?;
        let crc = r.u32()?;
        let comp_len = r.u32()? as usize;
        let uncomp_len = r.u32()? as usize;
        let name_len = r.u16()? as usize;
        let extra_len = r.u16()?;
        let name = String::from_utf8_lossy(r.take(name_len)?).into_owned();
        r.take(extra_len as usize)?;
        if flags & 0x08 != 0 {
            // data descriptors make sizes unknowable in a linear walk
            return Err(ZipError::BadEntry(name));
        }
        let raw = r.take(comp_len)?;
        let data = match method {
            METHOD_STORED => raw.to_vec(),
            METHOD_DEFLATE => {
                let mut out = Vec::with_capacity(uncomp_len);
                let mut dec = flate2::write::DeflateDecoder::new(&mut out);
                dec.write_all(raw)
                    .and_then(|_| dec.finish().map(|_| ()))
                    .map_err(|_| ZipError::BadEntry(name.clone()))?;
                out
            }
            other => return Err(ZipError::UnsupportedMethod(other)),
        };
        if data.len() != uncomp_len || crc32(&data) != crc {
            return Err(ZipError::BadEntry(name));
        }
        out.push(ZipEntry {
            name,
            method,
            extra_len,
            data,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_stored_and_deflated() {
        let t = DosTime::new(2013, 9, 1, 12, 0, 0);
        let mut w = ZipWriter::new();
        w.add_stored("mimetype", b"application/epub+zip", t);
        w.add_deflated("a/b.txt", b"hello hello hello hello", t);
        let bytes = w.finish();
        let entries = read_zip(&bytes).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].name, "mimetype");
        assert_eq!(entries[0].method, METHOD_STORED);
        assert_eq!(entries[0].data, b"application/epub+zip");
        assert_eq!(entries[1].name, "a/b.txt");
        assert_eq!(entries[1].method, METHOD_DEFLATE);
        assert_eq!(entries[1].data, b"hello hello hello hello");
    }

    #[test]
    fn identical_inputs_give_identical_bytes() {
        let build = || {
            let t = DosTime::new(2020, 1, 2, 3, 4, 6);
            let mut w = ZipWriter::new();
            w.add_stored("mimetype", b"application/epub+zip", t);
            w.add_deflated("x.xhtml", b"<html/>", t);
            w.finish()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn garbage_is_not_a_zip() {
        assert!(matches!(read_zip(b"nonsense"), Err(ZipError::NotAZip)));
        assert!(matches!(read_zip(b""), Err(ZipError::NotAZip)));
    }

    #[test]
    fn local_header_layout_is_exact() {
        let t = DosTime::new(2013, 9, 1, 12, 0, 0);
        let mut w = ZipWriter::new();
        w.add_stored("mimetype", b"application/epub+zip", t);
        let bytes = w.finish();
        // offset 0: signature; offset 8: method 0; offset 26: name length 8;
        // offset 28: extra length 0; offset 30: name
        assert_eq!(&bytes[0..4], &[0x50, 0x4b, 0x03, 0x04]);
        assert_eq!(&bytes[8..10], &[0, 0]);
        assert_eq!(&bytes[26..28], &[8, 0]);
        assert_eq!(&bytes[28..30], &[0, 0]);
        assert_eq!(&bytes[30..38], b"mimetype");
        assert_eq!(&bytes[38..58], b"application/epub+zip");
    }
}
