//! Binary Netpbm reader/writer (P5 graymap, P6 pixmap, maxval 255).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{Channels, Image};

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported magic {0:?}, expected P5 or P6")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
}

/// Header fields of a binary PNM file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PnmHeader {
    pub width: usize,
    pub height: usize,
    pub channels: Channels,
    /// Byte offset of the first payload byte.
    pub payload_offset: usize,
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    /// Skips whitespace and `#` comments up to the next token.
    fn skip_blank(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PnmError> {
        self.skip_blank();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::MalformedHeader(format!("missing {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse::<u32>()
            .map_err(|_| PnmError::MalformedHeader(format!("{what} out of range: {text}")))
    }
}

pub fn parse_header(bytes: &[u8]) -> Result<PnmHeader, PnmError> {
    if bytes.len() < 2 {
        return Err(PnmError::MalformedHeader("file too short".into()));
    }
    let channels = match &bytes[..2] {
        b"P5" => Channels::Gray,
        b"P6" => Channels::Rgb,
        other => return Err(PnmError::BadMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if cur.pos < bytes.len() && !(bytes[cur.pos].is_ascii_whitespace() || bytes[cur.pos] == b'#') {
        return Err(PnmError::BadMagic(
            String::from_utf8_lossy(&bytes[..3.min(bytes.len())]).into_owned(),
        ));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(PnmError::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates maxval from the payload.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(PnmError::MalformedHeader("garbage after maxval".into())),
        None => {
            return Err(PnmError::Truncated {
                expected: width * height * channels.count(),
                found: 0,
            })
        }
    }
    Ok(PnmHeader {
        width,
        height,
        channels,
        payload_offset: cur.pos,
    })
}

pub fn decode(bytes: &[u8]) -> Result<Image, PnmError> {
    let header = parse_header(bytes)?;
    let expected = header.width * header.height * header.channels.count();
    let payload = &bytes[header.payload_offset..];
    if payload.len() < expected {
        return Err(PnmError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    Ok(Image::new(
        header.width,
        header.height,
        header.channels,
        payload[..expected].to_vec(),
    )
    .expect("length checked above"))
}

pub fn load_image(path: &Path) -> Result<Image, PnmError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Reads only as much of the file as needed to recover the header.
pub fn read_header(path: &Path) -> Result<PnmHeader, PnmError> {
    let mut bytes = Vec::with_capacity(512);
    File::open(path)?.take(4096).read_to_end(&mut bytes)?;
    parse_header(&bytes)
}

pub fn encode(img: &Image) -> Vec<u8> {
    let magic = match img.channels() {
        Channels::Gray => "P5",
        Channels::Rgb => "P6",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn save_image(img: &Image, path: &Path) -> Result<(), PnmError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(img))?;
    w.flush()?;
    Ok(())
}
