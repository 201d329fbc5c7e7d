//! BT.601 full-range YCbCr conversion.

use super::ImageF;
use crate::error::{contract, Result};
use crate::operators::bicubic_resize;

const KR: f64 = 0.299;
const KB: f64 = 0.114;

/// BT.601 luma `0.299 R + 0.587 G + 0.114 B`.
///
/// Evaluated as `G + KR (R - G) + KB (B - G)` so gray pixels map to themselves
/// exactly.
#[inline]
fn luma(r: f64, g: f64, b: f64) -> f64 {
    g + KR * (r - g) + KB * (b - g)
}

fn check_planes(r: &ImageF, g: &ImageF, b: &ImageF) -> Result<()> {
    contract!(
        r.same_dims(g) && r.same_dims(b),
        "colour planes have mismatched dimensions"
    );
    Ok(())
}

pub fn to_luminance(r: &ImageF, g: &ImageF, b: &ImageF) -> Result<ImageF> {
    check_planes(r, g, b)?;
    let data = r
        .data()
        .iter()
        .zip(g.data())
        .zip(b.data())
        .map(|((&r, &g), &b)| luma(r, g, b))
        .collect();
    Ok(ImageF::from_raw(r.width(), r.height(), data))
}

/// Returns the `(Y, Cb, Cr)` planes; chroma is offset by 128.
pub fn rgb_to_ycbcr(r: &ImageF, g: &ImageF, b: &ImageF) -> Result<(ImageF, ImageF, ImageF)> {
    let y = to_luminance(r, g, b)?;
    let cb_scale = 0.5 / (1.0 - KB);
    let cr_scale = 0.5 / (1.0 - KR);
    let cb = ImageF::from_raw(
        y.width(),
        y.height(),
        b.data()
            .iter()
            .zip(y.data())
            .map(|(b, y)| 128.0 + cb_scale * (b - y))
            .collect(),
    );
    let cr = ImageF::from_raw(
        y.width(),
        y.height(),
        r.data()
            .iter()
            .zip(y.data())
            .map(|(r, y)| 128.0 + cr_scale * (r - y))
            .collect(),
    );
    Ok((y, cb, cr))
}

pub fn ycbcr_to_rgb(y: &ImageF, cb: &ImageF, cr: &ImageF) -> Result<(ImageF, ImageF, ImageF)> {
    check_planes(y, cb, cr)?;
    let kg = 1.0 - KR - KB;
    let n = y.len();
    let (mut r, mut g, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for ((&yv, &cbv), &crv) in y.data().iter().zip(cb.data()).zip(cr.data()) {
        let rv = yv + 2.0 * (1.0 - KR) * (crv - 128.0);
        let bv = yv + 2.0 * (1.0 - KB) * (cbv - 128.0);
        let gv = (yv - KR * rv - KB * bv) / kg;
        r.push(rv);
        g.push(gv);
        b.push(bv);
    }
    let (w, h) = (y.width(), y.height());
    Ok((
        ImageF::from_raw(w, h, r),
        ImageF::from_raw(w, h, g),
        ImageF::from_raw(w, h, b),
    ))
}

/// Chroma planes are only interpolated, never reconstructed.
pub fn upsample_chroma_bicubic(plane: &ImageF, scale: usize) -> Result<ImageF> {
    contract!(scale >= 1, "chroma upsampling scale must be >= 1");
    bicubic_resize(plane, scale as f64)
}
