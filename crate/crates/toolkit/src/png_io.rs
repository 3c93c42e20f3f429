//! 8-bit RGB PNG, non-interlaced.

use std::fs::File;
use std::io::{BufWriter, Cursor, Write};
use std::path::Path;

use vdp_core::raster::RasterImage;

use crate::{Error, Result};

pub fn encode_png(image: &RasterImage, out: impl Write) -> std::result::Result<(), png::EncodingError> {
    let mut encoder = png::Encoder::new(out, image.width as u32, image.height as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(&image.pixels)?;
    writer.finish()
}

pub fn png_bytes(image: &RasterImage) -> Vec<u8> {
    let mut buf = Vec::new();
    encode_png(image, &mut buf).expect("in-memory PNG encoding cannot fail for a valid image");
    buf
}

pub fn save_png(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    encode_png(image, &mut w).map_err(|e| match e {
        png::EncodingError::IoError(source) => Error::Io { path: path.into(), source },
        other => Error::Format { path: path.into(), message: other.to_string() },
    })?;
    w.flush().map_err(Error::io(path))
}

/// Decodes any 8-bit PNG into RGB; grey is widened and alpha dropped.
pub fn decode_png(bytes: &[u8], path: &Path) -> Result<RasterImage> {
    let malformed = |m: String| Error::MalformedPng { path: path.into(), message: m };
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| malformed(e.to_string()))?;
    let size = reader.output_buffer_size().ok_or_else(|| malformed("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| malformed(e.to_string()))?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width as usize, info.height as usize);
    let pixels = match info.color_type {
        png::ColorType::Rgb => buf,
        png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect(),
        png::ColorType::Indexed => return Err(malformed("unexpanded palette".into())),
    };
    Ok(RasterImage::from_pixels(w, h, pixels)?)
}

pub fn load_png(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(Error::io(path))?;
    decode_png(&bytes, path)
}
