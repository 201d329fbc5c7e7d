#![allow(dead_code)]
//! Test oracles built independently from the operator implementations.

use foesr::operators::{Boundary, Kernel2D};
use foesr::prior::{Filter, FilterBank, GsmPotential, LorentzianPotential, Potential};
use foesr::energy::SrProblem;
use foesr::ImageF;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, lo: f64, hi: f64) -> ImageF {
    ImageF::from_fn(w, h, |_, _| rng.gen_range(lo..hi))
}

pub fn random_kernel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Kernel2D {
    Kernel2D::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .unwrap()
}

/// Row-major dense matrix, `m[out][in]`.
pub type Dense = Vec<Vec<f64>>;

/// Convolution matrix from the index definition
/// `out[r][c] = sum_{a,b} k[a][b] x[map(r + ry - a)][map(c + rx - b)]`.
pub fn dense_conv(k: &Kernel2D, w: usize, h: usize, boundary: Boundary) -> Dense {
    let (ry, rx) = ((k.rows() / 2) as isize, (k.cols() / 2) as isize);
    let mut m = vec![vec![0.0; w * h]; w * h];
    for r in 0..h {
        for c in 0..w {
            for a in 0..k.rows() {
                for b in 0..k.cols() {
                    let sr = boundary.index(r as isize + ry - a as isize, h);
                    let sc = boundary.index(c as isize + rx - b as isize, w);
                    m[r * w + c][sr * w + sc] += k.get(a, b);
                }
            }
        }
    }
    m
}

/// Phase-0 decimation matrix.
pub fn dense_downsample(w: usize, h: usize, s: usize) -> Dense {
    let (lw, lh) = (w / s, h / s);
    let mut m = vec![vec![0.0; w * h]; lw * lh];
    for r in 0..lh {
        for c in 0..lw {
            m[r * lw + c][(r * s) * w + c * s] = 1.0;
        }
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b[0].len();
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn apply(m: &Dense, x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn apply_t(m: &Dense, y: &[f64]) -> Vec<f64> {
    let n = m[0].len();
    let mut out = vec![0.0; n];
    for (row, yi) in m.iter().zip(y) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * yi;
        }
    }
    out
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = f(&xp);
            xp[i] = orig - h;
            let fm = f(&xp);
            xp[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Largest per-entry error relative to the gradient's max-norm.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / scale)
        .fold(0.0, f64::max)
}

pub fn random_bank(rng: &mut ChaCha8Rng, n: usize, size: usize, gsm: bool) -> FilterBank {
    let filters = (0..n)
        .map(|_| {
            let kernel = random_kernel(rng, size, size);
            let potential = if gsm {
                let a: f64 = rng.gen_range(0.2..0.8);
                Potential::Gsm(
                    GsmPotential::new(vec![a, 1.0 - a], vec![1.0, 9.0], rng.gen_range(0.5..2.0))
                        .unwrap(),
                )
            } else {
                Potential::Lorentzian(LorentzianPotential::new(rng.gen_range(0.1..2.0)).unwrap())
            };
            Filter { kernel, potential }
        })
        .collect();
    FilterBank::new(filters).unwrap()
}

/// Central difference `(E(x + h e_i) - E(x - h e_i)) / 2h` of the SR energy,
/// assembled from dense operator matrices. Each penalty and residual term is
/// differenced on its own in cancellation-free form, so terms far from pixel
/// `i` contribute exactly zero instead of rounding noise of size `eps * E / h`.
pub fn termwise_fd_gradient(x: &ImageF, p: &SrProblem, bank: &FilterBank, h: f64) -> Vec<f64> {
    let (w, ht) = (x.width(), x.height());
    let data_op = matmul(
        &dense_downsample(w, ht, p.model.scale),
        &dense_conv(&p.model.blur, w, ht, p.model.boundary),
    );
    let residual: Vec<f64> = apply(&data_op, x.data())
        .iter()
        .zip(p.y.data())
        .map(|(a, b)| a - b)
        .collect();
    let priors: Vec<(Dense, Vec<f64>)> = bank
        .filters()
        .iter()
        .map(|f| {
            let m = dense_conv(&f.kernel, w, ht, p.boundary);
            let z = apply(&m, x.data());
            (m, z)
        })
        .collect();

    (0..w * ht)
        .map(|i| {
            let mut diff = 0.0;
            for (f, (m, z)) in bank.filters().iter().zip(&priors) {
                for (row, &z0) in m.iter().zip(z) {
                    let k = row[i];
                    if k != 0.0 {
                        diff += potential_difference(&f.potential, z0, h * k);
                    }
                }
            }
            for (row, &r0) in data_op.iter().zip(&residual) {
                let a = row[i];
                if a != 0.0 {
                    // (r0 + ha)^2 - (r0 - ha)^2
                    diff += 0.5 * p.lambda * 4.0 * h * a * r0;
                }
            }
            diff / (2.0 * h)
        })
        .collect()
}

/// `theta * (rho(z + d) - rho(z - d))` without subtracting two large penalties.
fn potential_difference(potential: &Potential, z: f64, d: f64) -> f64 {
    let zm = z - d;
    let sq = 4.0 * z * d; // (z + d)^2 - (z - d)^2
    match potential {
        Potential::Lorentzian(l) => l.weight() * (sq / (1.0 + zm * zm)).ln_1p(),
        Potential::Gsm(g) => {
            let comps: Vec<(f64, f64)> = g
                .alphas()
                .iter()
                .zip(g.scales())
                .filter(|(a, _)| **a > 0.0)
                .map(|(a, s)| {
                    let prec = s / g.base_variance();
                    (a.ln() + 0.5 * prec.ln() - 0.5 * zm * zm * prec, prec)
                })
                .collect();
            let max = comps.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
            let norm: f64 = comps.iter().map(|c| (c.0 - max).exp()).sum();
            // log phi(zp) - log phi(zm) = log sum_j pi_j(zm) exp(-delta_j)
            let change: f64 = comps
                .iter()
                .map(|(lw, prec)| (lw - max).exp() / norm * (-0.5 * sq * prec).exp_m1())
                .sum();
            -change.ln_1p()
        }
    }
}
