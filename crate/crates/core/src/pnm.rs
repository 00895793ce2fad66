//! Minimal binary Netpbm codec: P6 (RGB frames) and P7 PAM with RGBA tuples
//! (compositing templates). 8-bit samples only.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imgproc::Frame;

/// An RGBA image as stored in a PAM file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbaImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.data());
    out
}

pub fn write_ppm(path: &Path, frame: &Frame) -> Result<()> {
    fs::write(path, encode_ppm(frame)).map_err(|e| Error::io(path, e))
}

pub fn read_ppm(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut cursor = std::io::Cursor::new(bytes);
    read_ppm_from(&mut cursor)?.ok_or_else(|| Error::Format(format!("{}: empty file", path.display())))
}

/// Reads one P6 image. Returns `Ok(None)` on a clean end of stream, which is
/// how a concatenated P6 stream terminates.
pub fn read_ppm_from<R: BufRead>(reader: &mut R) -> Result<Option<Frame>> {
    // skip whitespace between concatenated images
    loop {
        let buf = reader.fill_buf().map_err(|e| Error::io("<stream>", e))?;
        match buf.first() {
            None => return Ok(None),
            Some(b) if b.is_ascii_whitespace() => reader.consume(1),
            Some(_) => break,
        }
    }
    let magic = read_token(reader)?;
    if magic != "P6" {
        return Err(Error::Format(format!("expected P6 magic, found {magic:?}")));
    }
    let width = parse_dim(&read_token(reader)?, "width")?;
    let height = parse_dim(&read_token(reader)?, "height")?;
    let maxval = read_token(reader)?;
    if maxval != "255" {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    // read_token consumed the single whitespace byte that ends the header
    let mut data = vec![0u8; width * height * 3];
    reader
        .read_exact(&mut data)
        .map_err(|_| Error::Format(format!("truncated {width}x{height} P6 raster")))?;
    Frame::new(width, height, data).map(Some)
}

pub fn encode_pam(image: &RgbaImage) -> Vec<u8> {
    let mut out = format!(
        "P7\nWIDTH {}\nHEIGHT {}\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n",
        image.width, image.height
    )
    .into_bytes();
    out.extend_from_slice(&image.data);
    out
}

pub fn write_pam(path: &Path, image: &RgbaImage) -> Result<()> {
    fs::write(path, encode_pam(image)).map_err(|e| Error::io(path, e))
}

pub fn read_pam(path: &Path) -> Result<RgbaImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pam(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Decodes an 8-bit, depth-4 PAM. Both `RGB_ALPHA` (the netpbm name) and
/// `RGBA` are accepted as tuple types.
pub fn decode_pam(bytes: &[u8]) -> Result<RgbaImage> {
    let mut pos = 0;
    let mut next_line = || -> Option<&[u8]> {
        if pos >= bytes.len() {
            return None;
        }
        let end = bytes[pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |i| pos + i);
        let line = &bytes[pos..end];
        pos = end + 1;
        Some(line)
    };
    let magic = next_line().ok_or_else(|| Error::Format("empty PAM".into()))?;
    if magic.trim_ascii() != b"P7" {
        return Err(Error::Format("expected P7 magic".into()));
    }
    let (mut width, mut height, mut depth, mut maxval, mut tupltype) = (None, None, None, None, None);
    loop {
        let line = next_line().ok_or_else(|| Error::Format("PAM header lacks ENDHDR".into()))?;
        let line = std::str::from_utf8(line)
            .map_err(|_| Error::Format("non-UTF-8 PAM header".into()))?
            .trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "ENDHDR" {
            break;
        }
        let (key, value) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let value = value.trim();
        match key {
            "WIDTH" => width = Some(parse_dim(value, "WIDTH")?),
            "HEIGHT" => height = Some(parse_dim(value, "HEIGHT")?),
            "DEPTH" => depth = Some(parse_dim(value, "DEPTH")?),
            "MAXVAL" => maxval = Some(parse_dim(value, "MAXVAL")?),
            "TUPLTYPE" => tupltype = Some(value.to_string()),
            other => return Err(Error::Format(format!("unknown PAM header field {other}"))),
        }
    }
    let width = width.ok_or_else(|| Error::Format("PAM missing WIDTH".into()))?;
    let height = height.ok_or_else(|| Error::Format("PAM missing HEIGHT".into()))?;
    if depth != Some(4) {
        return Err(Error::Format(format!("PAM depth must be 4, got {depth:?}")));
    }
    if maxval != Some(255) {
        return Err(Error::Format(format!("PAM maxval must be 255, got {maxval:?}")));
    }
    match tupltype.as_deref() {
        Some("RGB_ALPHA") | Some("RGBA") => {}
        other => return Err(Error::Format(format!("unsupported TUPLTYPE {other:?}"))),
    }
    let n = width * height * 4;
    let raster = bytes.get(pos..pos + n).ok_or_else(|| Error::Format("truncated PAM raster".into()))?;
    Ok(RgbaImage {
        width,
        height,
        data: raster.to_vec(),
    })
}

fn parse_dim(s: &str, what: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::Format(format!("bad {what}: {s:?}"))),
    }
}

/// Reads a whitespace-delimited header token, skipping `#` comments. The
/// terminating whitespace byte is consumed.
fn read_token<R: BufRead>(reader: &mut R) -> Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte).map_err(|e| Error::io("<stream>", e))? == 0 {
            if token.is_empty() {
                return Err(Error::Format("unexpected end of header".into()));
            }
            break;
        }
        match byte[0] {
            b'#' if token.is_empty() => {
                let mut skip = Vec::new();
                reader.read_until(b'\n', &mut skip).map_err(|e| Error::io("<stream>", e))?;
            }
            b if b.is_ascii_whitespace() => {
                if token.is_empty() {
                    continue;
                }
                break;
            }
            b => token.push(b),
        }
        if token.len() > 32 {
            return Err(Error::Format("header token too long".into()));
        }
    }
    String::from_utf8(token).map_err(|_| Error::Format("non-ASCII header".into()))
}

/// Writes `frames` as one concatenated P6 stream.
pub fn write_ppm_stream<W: Write>(out: &mut W, frames: &[Frame]) -> std::io::Result<()> {
    for f in frames {
        out.write_all(&encode_ppm(f))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn ppm_stream_of_two_frames() {
        let a = Frame::filled(3, 2, [1, 2, 3]);
        let mut b = Frame::filled(2, 2, [9, 9, 9]);
        b.set_pixel(1, 1, *b"\n #");
        let mut bytes = Vec::new();
        write_ppm_stream(&mut bytes, &[a.clone(), b.clone()]).unwrap();
        let mut cur = Cursor::new(bytes);
        assert_eq!(read_ppm_from(&mut cur).unwrap(), Some(a));
        assert_eq!(read_ppm_from(&mut cur).unwrap(), Some(b));
        assert_eq!(read_ppm_from(&mut cur).unwrap(), None);
    }

    #[test]
    fn ppm_header_comments() {
        let mut bytes = b"P6\n# made by hand\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[10, 20, 30]);
        let f = read_ppm_from(&mut Cursor::new(bytes)).unwrap().unwrap();
        assert_eq!(f.pixel(0, 0), [10, 20, 30]);
    }

    #[test]
    fn ppm_rejects_truncation_and_bad_magic() {
        let mut bytes = encode_ppm(&Frame::filled(4, 4, [0; 3]));
        bytes.truncate(bytes.len() - 1);
        assert!(read_ppm_from(&mut Cursor::new(bytes)).is_err());
        assert!(read_ppm_from(&mut Cursor::new(b"P5\n1 1\n255\n\0".to_vec())).is_err());
    }

    #[test]
    fn pam_round_trip_and_tupltype_alias() {
        let img = RgbaImage { width: 2, height: 1, data: vec![1, 2, 3, 4, 5, 6, 7, 8] };
        assert_eq!(decode_pam(&encode_pam(&img)).unwrap(), img);
        let mut alt = b"P7\nWIDTH 2\nHEIGHT 1\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGBA\nENDHDR\n".to_vec();
        alt.extend_from_slice(&img.data);
        assert_eq!(decode_pam(&alt).unwrap(), img);
    }

    #[test]
    fn pam_rejects_rgb() {
        let bytes = b"P7\nWIDTH 1\nHEIGHT 1\nDEPTH 3\nMAXVAL 255\nTUPLTYPE RGB\nENDHDR\nabc".to_vec();
        assert!(decode_pam(&bytes).is_err());
    }
}
