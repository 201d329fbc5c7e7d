//! PSNR and single-scale SSIM on the 8-bit intensity scale.

use super::ImageF;
use crate::error::{contract, Result};

const PEAK: f64 = 255.0;
const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// Decibels; `f64::INFINITY` for identical inputs.
    pub psnr: f64,
    pub ssim: f64,
    pub border_shave: usize,
}

fn shaved_pair(a: &ImageF, b: &ImageF, shave: usize) -> Result<(ImageF, ImageF)> {
    contract!(
        a.same_dims(b),
        "images differ in size: {}x{} vs {}x{}",
        a.width(),
        a.height(),
        b.width(),
        b.height()
    );
    contract!(
        2 * shave < a.width().min(a.height()),
        "shave {shave} leaves no pixels in a {}x{} image",
        a.width(),
        a.height()
    );
    let (w, h) = (a.width() - 2 * shave, a.height() - 2 * shave);
    Ok((a.crop(shave, shave, w, h)?, b.crop(shave, shave, w, h)?))
}

/// `10 log10(255^2 / MSE)` over the image with `shave` pixels removed per side.
pub fn psnr(a: &ImageF, b: &ImageF, shave: usize) -> Result<f64> {
    let (a, b) = shaved_pair(a, b, shave)?;
    let sse: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse / a.len() as f64;
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    w
}

/// Separable 'valid' filtering with the SSIM window.
fn window_filter(data: &[f64], width: usize, height: usize, w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let (ow, oh) = (width + 1 - n, height + 1 - n);
    let mut horiz = vec![0.0; ow * height];
    for r in 0..height {
        let row = &data[r * width..(r + 1) * width];
        for c in 0..ow {
            horiz[r * ow + c] = w.iter().zip(&row[c..c + n]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..n).map(|i| w[i] * horiz[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03.
pub fn ssim(a: &ImageF, b: &ImageF, shave: usize) -> Result<f64> {
    let (a, b) = shaved_pair(a, b, shave)?;
    contract!(
        a.width() >= SSIM_WINDOW && a.height() >= SSIM_WINDOW,
        "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels after shaving, got {}x{}",
        a.width(),
        a.height()
    );
    let (w, h) = (a.width(), a.height());
    let win = gaussian_window();
    let prod = |f: fn(f64, f64) -> f64| -> Vec<f64> {
        a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect()
    };
    let mu_a = window_filter(a.data(), w, h, &win);
    let mu_b = window_filter(b.data(), w, h, &win);
    let e_aa = window_filter(&prod(|x, _| x * x), w, h, &win);
    let e_bb = window_filter(&prod(|_, y| y * y), w, h, &win);
    let e_ab = window_filter(&prod(|x, y| x * y), w, h, &win);

    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .sum();
    Ok(total / n as f64)
}

pub fn evaluate(reconstruction: &ImageF, reference: &ImageF, shave: usize) -> Result<QualityReport> {
    Ok(QualityReport {
        psnr: psnr(reconstruction, reference, shave)?,
        ssim: ssim(reconstruction, reference, shave)?,
        border_shave: shave,
    })
}
