//! Image file writers and readers for rendered planes.
//!
//! `.hdep` is a small raw depth format: the magic `HDEP`, then width, height and a reserved
//! zero as u32 LE, then `width * height` f32 LE values in row-major order.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

pub const HDEP_MAGIC: &[u8; 4] = b"HDEP";

fn invalid(m: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, m.into())
}

pub fn write_png(path: &Path, width: u32, height: u32, rgb: &[u8]) -> io::Result<()> {
    if rgb.len() != (width * height * 3) as usize {
        return Err(invalid("rgb plane size mismatch"));
    }
    let w = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(w, width, height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(io::Error::other)?;
    writer.write_image_data(rgb).map_err(io::Error::other)?;
    writer.finish().map_err(io::Error::other)
}

/// Returns `(width, height, rgb)`.
pub fn read_png(path: &Path) -> io::Result<(u32, u32, Vec<u8>)> {
    let dec = png::Decoder::new(File::open(path)?);
    let mut reader = dec.read_info().map_err(io::Error::other)?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(io::Error::other)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(invalid("expected 8-bit RGB"));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}

pub fn write_hdep(path: &Path, width: u32, height: u32, depth: &[f32]) -> io::Result<()> {
    if depth.len() != (width * height) as usize {
        return Err(invalid("depth plane size mismatch"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(HDEP_MAGIC)?;
    for v in [width, height, 0] {
        w.write_all(&v.to_le_bytes())?;
    }
    for d in depth {
        w.write_all(&d.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_hdep(path: &Path) -> io::Result<(u32, u32, Vec<f32>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != HDEP_MAGIC {
        return Err(invalid("not an HDEP file"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (w, h) = (word(4), word(8));
    let body = &bytes[16..];
    if body.len() != (w as usize) * (h as usize) * 4 {
        return Err(invalid("HDEP body size mismatch"));
    }
    let depth = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((w, h, depth))
}

/// Binary 16-bit PGM. Samples are big-endian as the format requires.
pub fn write_pgm16(path: &Path, width: u32, height: u32, data: &[u16]) -> io::Result<()> {
    if data.len() != (width * height) as usize {
        return Err(invalid("segmentation plane size mismatch"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{width} {height}\n65535\n")?;
    for v in data {
        w.write_all(&v.to_be_bytes())?;
    }
    w.flush()
}

pub fn read_pgm16(path: &Path) -> io::Result<(u32, u32, Vec<u16>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    // Header: four whitespace-separated tokens, a single whitespace byte, then samples.
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < 4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(invalid("truncated PGM header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    i += 1;
    if tokens[0] != "P5" || tokens[3] != "65535" {
        return Err(invalid("expected a 16-bit P5 PGM"));
    }
    let parse = |s: &str| s.parse::<u32>().map_err(|_| invalid("bad PGM dimension"));
    let (w, h) = (parse(&tokens[1])?, parse(&tokens[2])?);
    let body = bytes.get(i..).unwrap_or(&[]);
    if body.len() != (w as usize) * (h as usize) * 2 {
        return Err(invalid("PGM body size mismatch"));
    }
    Ok((w, h, body.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

/// Stereo 16-bit PCM WAV. Signals peaking above 1 are scaled down to fit; the applied
/// scale is returned.
pub fn write_wav(path: &Path, sample_rate: u32, left: &[f64], right: &[f64]) -> io::Result<f64> {
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let peak = left.iter().chain(right).fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 1.0 { 1.0 / peak } else { 1.0 };
    let q = |v: f64| (v * scale * i16::MAX as f64).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
    let mut w = hound::WavWriter::create(path, spec).map_err(io::Error::other)?;
    for (l, r) in left.iter().zip(right) {
        w.write_sample(q(*l)).map_err(io::Error::other)?;
        w.write_sample(q(*r)).map_err(io::Error::other)?;
    }
    w.finalize().map_err(io::Error::other)?;
    Ok(scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planes_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rgb: Vec<u8> = (0..2 * 3 * 3).map(|i| i as u8 * 7).collect();
        let p = dir.path().join("a.png");
        write_png(&p, 3, 2, &rgb).unwrap();
        assert_eq!(read_png(&p).unwrap(), (3, 2, rgb));

        let depth = vec![0.5, f32::INFINITY, 1.25, 3.0, 0.0, 7.5];
        let p = dir.path().join("a.hdep");
        write_hdep(&p, 3, 2, &depth).unwrap();
        assert_eq!(read_hdep(&p).unwrap(), (3, 2, depth));
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 16 + 24);

        let seg = vec![0, 1, 258, 65535, 7, 0];
        let p = dir.path().join("a.pgm");
        write_pgm16(&p, 3, 2, &seg).unwrap();
        let raw = std::fs::read(&p).unwrap();
        assert!(raw.starts_with(b"P5\n3 2\n65535\n"));
        assert_eq!(&raw[raw.len() - 8..raw.len() - 6], &[1, 2]);
        assert_eq!(read_pgm16(&p).unwrap(), (3, 2, seg));
    }

    #[test]
    fn size_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_png(&dir.path().join("x.png"), 2, 2, &[0; 5]).is_err());
        assert!(write_hdep(&dir.path().join("x.hdep"), 2, 2, &[0.0; 3]).is_err());
        assert!(write_pgm16(&dir.path().join("x.pgm"), 2, 2, &[0; 3]).is_err());
    }

    #[test]
    fn wav_is_pcm16_and_scaled() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        assert_eq!(write_wav(&p, 16000, &[0.5, -0.25], &[0.0, 1.0]).unwrap(), 1.0);
        let mut r = hound::WavReader::open(&p).unwrap();
        assert_eq!((r.spec().channels, r.spec().bits_per_sample), (2, 16));
        let s: Vec<i16> = r.samples::<i16>().map(Result::unwrap).collect();
        assert_eq!(s, vec![16384, 0, -8192, 32767]);
        assert_eq!(write_wav(&p, 16000, &[4.0], &[-2.0]).unwrap(), 0.25);
    }
}
