//! PGM (P5) and PNG reading and writing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{to_luminance, ImageF};
use crate::error::{Error, Result};

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// An image as decoded from disk, before any colour reduction.
#[derive(Debug, Clone)]
pub enum LoadedImage {
    Gray(ImageF),
    Rgb { r: ImageF, g: ImageF, b: ImageF },
}

impl LoadedImage {
    pub fn luminance(&self) -> ImageF {
        match self {
            LoadedImage::Gray(y) => y.clone(),
            LoadedImage::Rgb { r, g, b } => to_luminance(r, g, b).expect("planes share dimensions"),
        }
    }
}

/// Loads an image and reduces colour input to BT.601 luminance.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageF> {
    Ok(load_color(path)?.luminance())
}

/// Loads an image keeping colour planes when present.
pub fn load_color(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let mut bytes = Vec::new();
    File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(&bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(&bytes).map(LoadedImage::Gray)
    } else {
        Err(Error::Format(format!(
            "{}: not a binary PGM or PNG file",
            path.as_ref().display()
        )))
    }
}

/// Clamps to `[0, 255]` and rounds half away from zero.
pub fn quantize(img: &ImageF) -> Vec<u8> {
    img.data().iter().map(|&v| to_byte(v)).collect()
}

#[inline]
fn to_byte(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

enum Container {
    Pgm,
    Png,
}

fn container_for(path: &Path) -> Result<Container> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("pgm") => Ok(Container::Pgm),
        Some("png") => Ok(Container::Png),
        _ => Err(Error::Format(format!(
            "{}: output extension must be .pgm or .png",
            path.display()
        ))),
    }
}

/// Writes an 8-bit grayscale image; the container follows the extension.
pub fn save_image(img: &ImageF, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let container = container_for(path)?;
    let bytes = quantize(img);
    let mut out = BufWriter::new(File::create(path)?);
    match container {
        Container::Pgm => {
            write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
            out.write_all(&bytes)?;
        }
        Container::Png => {
            write_png(&mut out, img.width(), img.height(), png::ColorType::Grayscale, &bytes)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes an RGB image as PNG.
pub fn save_rgb(r: &ImageF, g: &ImageF, b: &ImageF, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if !matches!(container_for(path)?, Container::Png) {
        return Err(Error::Format(format!(
            "{}: colour output requires .png",
            path.display()
        )));
    }
    let mut bytes = Vec::with_capacity(3 * r.len());
    for ((&rv, &gv), &bv) in r.data().iter().zip(g.data()).zip(b.data()) {
        bytes.extend_from_slice(&[to_byte(rv), to_byte(gv), to_byte(bv)]);
    }
    let mut out = BufWriter::new(File::create(path)?);
    write_png(&mut out, r.width(), r.height(), png::ColorType::Rgb, &bytes)?;
    out.flush()?;
    Ok(())
}

fn write_png<W: Write>(
    out: W,
    width: usize,
    height: usize,
    color: png::ColorType,
    bytes: &[u8],
) -> Result<()> {
    let mut encoder = png::Encoder::new(out, width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(bytes).map_err(png_err)?;
    Ok(())
}

fn png_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Format(format!("png: {e}"))
}

fn decode_png(bytes: &[u8]) -> Result<LoadedImage> {
    let mut decoder = png::Decoder::new(BufReader::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Format(format!(
            "png: only 8-bit samples are supported, got {:?}",
            info.bit_depth
        )));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => return Err(Error::Format(format!("png: unsupported colour type {other:?}"))),
    };
    let buf = &buf[..info.buffer_size()];
    let plane = |k: usize| {
        ImageF::new(
            w,
            h,
            buf.chunks_exact(channels).map(|px| px[k] as f64).collect(),
        )
    };
    if channels <= 2 {
        Ok(LoadedImage::Gray(plane(0)?))
    } else {
        Ok(LoadedImage::Rgb {
            r: plane(0)?,
            g: plane(1)?,
            b: plane(2)?,
        })
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<ImageF> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        *field = next_header_uint(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "pgm: only maxval 255 is supported, got {maxval}"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("pgm: truncated header".into()));
    }
    pos += 1;
    let n = width * height;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| Error::Format(format!("pgm: expected {n} raster bytes")))?;
    ImageF::new(width, height, raster.iter().map(|&b| b as f64).collect())
        .map_err(|e| Error::Format(format!("pgm: {e}")))
}

fn next_header_uint(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::Format("pgm: truncated header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("pgm: malformed header field".into()))
}
