//! Scalar raster images, file I/O, colour conversion and quality metrics.

mod color;
mod io;
mod metrics;

pub use color::{rgb_to_ycbcr, to_luminance, upsample_chroma_bicubic, ycbcr_to_rgb};
pub use io::{load_color, load_image, quantize, save_image, save_rgb, LoadedImage};
pub use metrics::{evaluate, psnr, ssim, QualityReport};

use crate::error::{contract, Result};

/// A single-channel raster stored row-major in double precision.
///
/// Intensities are nominally in `[0, 255]` but intermediate results may leave
/// that range; values are clamped only when written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageF {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageF {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        contract!(
            width >= 1 && height >= 1,
            "image dimensions must be positive, got {width}x{height}"
        );
        contract!(
            data.len() == width * height,
            "image data has {} values, expected {}",
            data.len(),
            width * height
        );
        contract!(
            data.iter().all(|v| v.is_finite()),
            "image data contains non-finite values"
        );
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width >= 1 && height >= 1, "empty image");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width >= 1 && height >= 1, "empty image");
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Wraps a buffer produced internally; the caller guarantees the length.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn same_dims(&self, other: &ImageF) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copies the `width`x`height` window whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<ImageF> {
        contract!(
            width >= 1 && height >= 1 && row + height <= self.height && col + width <= self.width,
            "crop {width}x{height} at ({row},{col}) exceeds {}x{} image",
            self.width,
            self.height
        );
        let mut data = Vec::with_capacity(width * height);
        for r in row..row + height {
            data.extend_from_slice(&self.row(r)[col..col + width]);
        }
        Ok(ImageF::from_raw(width, height, data))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageF {
        ImageF::from_raw(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Standard inner product over all pixels.
    pub fn dot(&self, other: &ImageF) -> f64 {
        assert!(self.same_dims(other), "dot of images with different dimensions");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs_diff(&self, other: &ImageF) -> f64 {
        assert!(self.same_dims(other));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
