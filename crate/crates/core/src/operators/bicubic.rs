use super::Boundary;
use crate::error::{contract, Result};
use crate::exec;
use crate::image::ImageF;

/// Free parameter of the Keys cubic convolution kernel.
pub const KEYS_A: f64 = -0.5;

/// Keys cubic convolution kernel evaluated at distance `x`.
#[inline]
pub fn keys_weight(x: f64) -> f64 {
    let a = KEYS_A;
    let x = x.abs();
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

struct Taps {
    index: [usize; 4],
    weight: [f64; 4],
}

/// Per-output-sample taps along one axis, align-centers convention.
fn axis_taps(n_in: usize, n_out: usize) -> Vec<Taps> {
    let ratio = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|o| {
            let src = (o as f64 + 0.5) * ratio - 0.5;
            let base = src.floor();
            let t = src - base;
            let base = base as isize;
            let mut index = [0; 4];
            let mut weight = [0.0; 4];
            for k in 0..4 {
                index[k] = Boundary::Symmetric.index(base - 1 + k as isize, n_in);
                weight[k] = keys_weight(t + 1.0 - k as f64);
            }
            let sum: f64 = weight.iter().sum();
            weight.iter_mut().for_each(|w| *w /= sum);
            Taps { index, weight }
        })
        .collect()
}

/// Bicubic resampling to an explicit output size.
pub fn resize_bicubic(img: &ImageF, out_width: usize, out_height: usize) -> Result<ImageF> {
    contract!(
        out_width >= 1 && out_height >= 1,
        "bicubic output must be at least 1x1, got {out_width}x{out_height}"
    );
    let (w, h) = (img.width(), img.height());
    let cols = axis_taps(w, out_width);
    let rows = axis_taps(h, out_height);

    let mut horiz = vec![0.0; out_width * h];
    exec::fill_rows(&mut horiz, out_width, |r, row| {
        let src = img.row(r);
        for (v, t) in row.iter_mut().zip(&cols) {
            *v = (0..4).map(|k| t.weight[k] * src[t.index[k]]).sum();
        }
    });
    let mut out = vec![0.0; out_width * out_height];
    exec::fill_rows(&mut out, out_width, |r, row| {
        let t = &rows[r];
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..4)
                .map(|k| t.weight[k] * horiz[t.index[k] * out_width + c])
                .sum();
        }
    });
    Ok(ImageF::from_raw(out_width, out_height, out))
}

/// Bicubic resampling by `scale`; output dimensions are `round(dim * scale)`.
pub fn bicubic_resize(img: &ImageF, scale: f64) -> Result<ImageF> {
    contract!(scale > 0.0 && scale.is_finite(), "scale must be positive, got {scale}");
    let ow = (img.width() as f64 * scale).round() as usize;
    let oh = (img.height() as f64 * scale).round() as usize;
    resize_bicubic(img, ow, oh)
}
