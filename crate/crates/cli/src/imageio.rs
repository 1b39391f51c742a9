//! 8-bit PNG and PGM/PPM reading and writing.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use elastica::{Boundary, GridShape, ScalarField};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, DynamicImage, ImageEncoder, ImageFormat};

use crate::error::CliError;

/// An image as one (gray) or three (RGB) channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub channels: Vec<ScalarField>,
}

impl Image {
    pub fn gray(channel: ScalarField) -> Self {
        Self {
            channels: vec![channel],
        }
    }

    pub fn shape(&self) -> GridShape {
        self.channels[0].shape()
    }

    pub fn is_color(&self) -> bool {
        self.channels.len() == 3
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn load(path: &Path, boundary: Boundary) -> Result<Image, CliError> {
    let img = image::open(path).map_err(|e| io_err(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let shape = GridShape::new(h, w, boundary).map_err(|e| io_err(path, e))?;
    let to_field = |bytes: Vec<u8>, stride: usize, offset: usize| {
        let values = bytes
            .iter()
            .skip(offset)
            .step_by(stride)
            .map(|&v| f64::from(v) / 255.0)
            .collect();
        ScalarField::new(shape, values).expect("buffer matches image size")
    };
    if img.color().has_color() {
        let rgb = img.to_rgb8().into_raw();
        Ok(Image {
            channels: (0..3).map(|c| to_field(rgb.clone(), 3, c)).collect(),
        })
    } else {
        Ok(Image::gray(to_field(img.to_luma8().into_raw(), 1, 0)))
    }
}

fn quantize(v: f64) -> u8 {
    // NaN maps to 0
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Clamps to `[0, 1]`, rounds to 8 bits and writes in the format implied by
/// the extension.
pub fn save(path: &Path, img: &Image) -> Result<(), CliError> {
    let shape = img.shape();
    let (w, h) = (shape.width() as u32, shape.height() as u32);
    let format = ImageFormat::from_path(path).map_err(|e| io_err(path, e))?;
    let (bytes, color) = if img.is_color() {
        let mut bytes = Vec::with_capacity(shape.len() * 3);
        for i in 0..shape.len() {
            bytes.extend(img.channels.iter().map(|c| quantize(c.values()[i])));
        }
        (bytes, ColorType::Rgb8)
    } else {
        let bytes = img.channels[0]
            .values()
            .iter()
            .map(|&v| quantize(v))
            .collect();
        (bytes, ColorType::L8)
    };
    if format == ImageFormat::Pnm {
        // the encoder's default picks PAM; write P5/P6 for gray/RGB instead
        let subtype = match color {
            ColorType::Rgb8 => PnmSubtype::Pixmap(SampleEncoding::Binary),
            _ => PnmSubtype::Graymap(SampleEncoding::Binary),
        };
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        return PnmEncoder::new(BufWriter::new(file))
            .with_subtype(subtype)
            .write_image(&bytes, w, h, color.into())
            .map_err(|e| io_err(path, e));
    }
    let dynamic = match color {
        ColorType::Rgb8 => DynamicImage::ImageRgb8(
            image::RgbImage::from_raw(w, h, bytes).expect("buffer matches image size"),
        ),
        _ => DynamicImage::ImageLuma8(
            image::GrayImage::from_raw(w, h, bytes).expect("buffer matches image size"),
        ),
    };
    dynamic
        .save_with_format(path, format)
        .map_err(|e| io_err(path, e))
}
