use crate::error::{contract, Result};
use crate::image::ImageF;

/// Keeps every `scale`-th pixel starting at `(0, 0)`.
pub fn downsample(img: &ImageF, scale: usize) -> Result<ImageF> {
    contract!(scale >= 1, "scale must be >= 1");
    contract!(
        img.width().is_multiple_of(scale) && img.height().is_multiple_of(scale),
        "{}x{} image is not divisible by scale {scale}",
        img.width(),
        img.height()
    );
    let (w, h) = (img.width() / scale, img.height() / scale);
    let mut data = Vec::with_capacity(w * h);
    for r in 0..h {
        let src = img.row(r * scale);
        data.extend((0..w).map(|c| src[c * scale]));
    }
    Ok(ImageF::from_raw(w, h, data))
}

/// Zero insertion; the exact adjoint of [`downsample`].
pub fn upsample_zero(img: &ImageF, scale: usize) -> Result<ImageF> {
    contract!(scale >= 1, "scale must be >= 1");
    let (w, h) = (img.width() * scale, img.height() * scale);
    let mut data = vec![0.0; w * h];
    for r in 0..img.height() {
        for (c, &v) in img.row(r).iter().enumerate() {
            data[r * scale * w + c * scale] = v;
        }
    }
    Ok(ImageF::from_raw(w, h, data))
}
