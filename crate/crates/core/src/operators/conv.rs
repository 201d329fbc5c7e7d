use super::{Boundary, Kernel2D};
use crate::error::{contract, Result};
use crate::exec;
use crate::image::ImageF;

fn check_fit(img: &ImageF, k: &Kernel2D) -> Result<()> {
    contract!(
        k.rows() <= img.height() && k.cols() <= img.width(),
        "{}x{} kernel does not fit in {}x{} image",
        k.rows(),
        k.cols(),
        img.width(),
        img.height()
    );
    Ok(())
}

/// Same-size 2-D convolution (kernel flipped) with the given boundary rule.
///
/// Output pixel `(r, c)` is `sum_{a,b} k[a][b] * x[r + ry - a][c + rx - b]`
/// where out-of-range indices are mapped by `boundary`. Taps are accumulated
/// in row-major kernel order.
pub fn conv2_same(img: &ImageF, k: &Kernel2D, boundary: Boundary) -> Result<ImageF> {
    check_fit(img, k)?;
    let (w, h) = (img.width(), img.height());
    let (ry, rx) = k.radius();
    let (pw, ph) = (w + 2 * rx, h + 2 * ry);

    let col_map: Vec<usize> = (0..pw)
        .map(|j| boundary.index(j as isize - rx as isize, w))
        .collect();
    let mut padded = vec![0.0; pw * ph];
    exec::fill_rows(&mut padded, pw, |i, row| {
        let src = img.row(boundary.index(i as isize - ry as isize, h));
        for (v, &j) in row.iter_mut().zip(&col_map) {
            *v = src[j];
        }
    });

    let (kr, kc) = (k.rows(), k.cols());
    let taps = k.taps();
    let mut out = vec![0.0; w * h];
    exec::fill_rows(&mut out, w, |r, row| {
        for (c, v) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in 0..kr {
                let prow = &padded[(r + 2 * ry - a) * pw..];
                let trow = &taps[a * kc..(a + 1) * kc];
                for (b, t) in trow.iter().enumerate() {
                    acc += t * prow[c + 2 * rx - b];
                }
            }
            *v = acc;
        }
    });
    Ok(ImageF::from_raw(w, h, out))
}

/// Exact adjoint of [`conv2_same`] for the same kernel and boundary.
///
/// The transpose is evaluated as a correlation onto the padded grid followed
/// by folding every padded sample back onto the pixel it was copied from.
pub fn conv2_adjoint(img: &ImageF, k: &Kernel2D, boundary: Boundary) -> Result<ImageF> {
    check_fit(img, k)?;
    let (w, h) = (img.width(), img.height());
    let (ry, rx) = k.radius();
    let (pw, ph) = (w + 2 * rx, h + 2 * ry);
    let (kr, kc) = (k.rows(), k.cols());
    let taps = k.taps();
    let y = img.data();

    // ext[i][j] = sum_{a,b} k[a][b] * y[i - 2ry + a][j - 2rx + b], in-range terms only
    let mut ext = vec![0.0; pw * ph];
    exec::fill_rows(&mut ext, pw, |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in 0..kr {
                let yr = i as isize - 2 * ry as isize + a as isize;
                if yr < 0 || yr >= h as isize {
                    continue;
                }
                let yrow = &y[yr as usize * w..(yr as usize + 1) * w];
                for b in 0..kc {
                    let yc = j as isize - 2 * rx as isize + b as isize;
                    if yc < 0 || yc >= w as isize {
                        continue;
                    }
                    acc += taps[a * kc + b] * yrow[yc as usize];
                }
            }
            *v = acc;
        }
    });

    // padded column j was copied from column col_map[j]
    let mut col_sources: Vec<Vec<usize>> = vec![Vec::new(); w];
    for j in 0..pw {
        col_sources[boundary.index(j as isize - rx as isize, w)].push(j);
    }
    let mut row_sources: Vec<Vec<usize>> = vec![Vec::new(); h];
    for i in 0..ph {
        row_sources[boundary.index(i as isize - ry as isize, h)].push(i);
    }

    let mut folded = vec![0.0; w * ph];
    exec::fill_rows(&mut folded, w, |i, row| {
        let erow = &ext[i * pw..(i + 1) * pw];
        for (v, srcs) in row.iter_mut().zip(&col_sources) {
            *v = srcs.iter().map(|&j| erow[j]).sum();
        }
    });
    let mut out = vec![0.0; w * h];
    exec::fill_rows(&mut out, w, |p, row| {
        for &i in &row_sources[p] {
            for (v, f) in row.iter_mut().zip(&folded[i * w..(i + 1) * w]) {
                *v += f;
            }
        }
    });
    Ok(ImageF::from_raw(w, h, out))
}
