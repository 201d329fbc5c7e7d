//! Linear operators of the degradation model and the filter prior.
//!
//! Every operator here has an exact adjoint under the standard inner
//! product, which the energy gradient relies on.

mod bicubic;
mod conv;
mod sampling;

pub use bicubic::{bicubic_resize, keys_weight, resize_bicubic, KEYS_A};
pub use conv::{conv2_adjoint, conv2_same};
pub use sampling::{downsample, upsample_zero};

use std::fmt;
use std::str::FromStr;

use crate::error::{contract, Error, Result};

/// How samples outside the image are synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Mirror about the edge pixel without repeating it: `x[-1] = x[1]`.
    #[default]
    Symmetric,
    /// Periodic wrap-around.
    Circular,
}

impl Boundary {
    /// Maps a possibly out-of-range index onto `0..n`.
    #[inline]
    pub fn index(self, i: isize, n: usize) -> usize {
        match self {
            Boundary::Circular => i.rem_euclid(n as isize) as usize,
            Boundary::Symmetric => {
                if n == 1 {
                    return 0;
                }
                let period = 2 * (n as isize - 1);
                let m = i.rem_euclid(period);
                if m < n as isize {
                    m as usize
                } else {
                    (period - m) as usize
                }
            }
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Symmetric => "symmetric",
            Boundary::Circular => "circular",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Boundary::Symmetric),
            "circular" => Ok(Boundary::Circular),
            _ => Err(Error::Contract(format!(
                "unknown boundary `{s}` (expected symmetric or circular)"
            ))),
        }
    }
}

/// Odd-sized 2-D filter kernel, centred, row-major taps.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    rows: usize,
    cols: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    pub fn new(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self> {
        contract!(
            rows % 2 == 1 && cols % 2 == 1,
            "kernel dimensions must be odd, got {rows}x{cols}"
        );
        contract!(
            taps.len() == rows * cols,
            "kernel has {} taps, expected {}",
            taps.len(),
            rows * cols
        );
        contract!(taps.iter().all(|t| t.is_finite()), "kernel taps must be finite");
        Ok(Self { rows, cols, taps })
    }

    pub fn identity() -> Self {
        Self {
            rows: 1,
            cols: 1,
            taps: vec![1.0],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.taps[row * self.cols + col]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    /// The kernel rotated by 180 degrees.
    pub fn flipped(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            taps: self.taps.iter().rev().copied().collect(),
        }
    }

    pub(crate) fn radius(&self) -> (usize, usize) {
        ((self.rows - 1) / 2, (self.cols - 1) / 2)
    }
}

/// Sampled isotropic Gaussian normalized to unit sum.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel2D> {
    contract!(size % 2 == 1, "Gaussian kernel size must be odd, got {size}");
    contract!(
        sigma > 0.0 && sigma.is_finite(),
        "Gaussian sigma must be positive, got {sigma}"
    );
    let half = (size / 2) as isize;
    let mut taps = Vec::with_capacity(size * size);
    for dy in -half..=half {
        for dx in -half..=half {
            let d2 = (dx * dx + dy * dy) as f64;
            taps.push((-d2 / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Kernel2D::new(size, size, taps)
}

/// Default blur for an integer scale: sigma `s/3`, support `2 ceil(3 sigma) + 1 = 2s + 1`.
pub fn default_blur(scale: usize) -> Kernel2D {
    gaussian_kernel(2 * scale + 1, scale as f64 / 3.0).expect("valid default blur parameters")
}
