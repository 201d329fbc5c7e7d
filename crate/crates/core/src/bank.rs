//! Plain-text filter bank files and the built-in derivative banks.
//!
//! ```text
//! FOEBANK v1 <lorentzian|gsm> <N> <rows> <cols>
//! <rows*cols taps, row-major>            one line per filter, followed by
//! theta <weight>                         (lorentzian)
//! gsm <eta2> <J> <s_1..s_J> <alpha_1..alpha_J>   (gsm)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Numbers are written
//! with 17 significant digits so files round-trip bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::operators::Kernel2D;
use crate::prior::{Filter, FilterBank, GsmPotential, LorentzianPotential, Potential, PotentialKind};

const MAGIC: &str = "FOEBANK";
const VERSION: &str = "v1";
const FILE_ALPHA_TOLERANCE: f64 = 1e-8;

pub const LORENTZIAN_BANK: &str = "deriv8-3x3-lorentzian";
pub const GSM_BANK: &str = "deriv8-3x3-gsm";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn serialize_bank(bank: &FilterBank) -> String {
    let first = &bank.filters()[0].kernel;
    let kind = match bank.kind() {
        PotentialKind::Gsm => "gsm",
        PotentialKind::Lorentzian => "lorentzian",
    };
    let mut s = format!(
        "{MAGIC} {VERSION} {kind} {} {} {}\n",
        bank.len(),
        first.rows(),
        first.cols()
    );
    for f in bank.filters() {
        let taps: Vec<String> = f.kernel.taps().iter().map(|&t| num(t)).collect();
        s.push_str(&taps.join(" "));
        s.push('\n');
        match &f.potential {
            Potential::Lorentzian(l) => {
                let _ = writeln!(s, "theta {}", num(l.weight()));
            }
            Potential::Gsm(g) => {
                let _ = write!(s, "gsm {} {}", num(g.base_variance()), g.scales().len());
                for v in g.scales().iter().chain(g.alphas()) {
                    let _ = write!(s, " {}", num(*v));
                }
                s.push('\n');
            }
        }
    }
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("filter bank line {line}: {msg}"))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| bad(line, format!("`{tok}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(line, format!("`{tok}` is not finite")))
    }
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(line, format!("missing or invalid {what}")))
}

pub fn parse_bank(text: &str) -> Result<FilterBank> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Format("filter bank file is empty".into()))?;
    let mut h = header.split_whitespace();
    if h.next() != Some(MAGIC) || h.next() != Some(VERSION) {
        return Err(bad(hline, format!("expected `{MAGIC} {VERSION}` header")));
    }
    let kind = match h.next() {
        Some("lorentzian") => PotentialKind::Lorentzian,
        Some("gsm") => PotentialKind::Gsm,
        other => return Err(bad(hline, format!("unknown potential {other:?}"))),
    };
    let n = parse_usize(h.next(), hline, "filter count")?;
    let rows = parse_usize(h.next(), hline, "kernel rows")?;
    let cols = parse_usize(h.next(), hline, "kernel cols")?;
    if h.next().is_some() {
        return Err(bad(hline, "trailing tokens in header"));
    }

    let mut filters = Vec::with_capacity(n);
    for _ in 0..n {
        let (tline, taps) = lines
            .next()
            .ok_or_else(|| Error::Format(format!("filter bank ends after {} filters", filters.len())))?;
        let taps = taps
            .split_whitespace()
            .map(|t| parse_f64(t, tline))
            .collect::<Result<Vec<_>>>()?;
        if taps.len() != rows * cols {
            return Err(bad(tline, format!("expected {} taps, found {}", rows * cols, taps.len())));
        }
        let kernel = Kernel2D::new(rows, cols, taps).map_err(|e| bad(tline, e))?;

        let (pline, params) = lines
            .next()
            .ok_or_else(|| Error::Format("filter bank ends before a parameter line".into()))?;
        let mut p = params.split_whitespace();
        let potential = match (kind, p.next()) {
            (PotentialKind::Lorentzian, Some("theta")) => {
                let theta = parse_f64(p.next().ok_or_else(|| bad(pline, "missing theta"))?, pline)?;
                Potential::Lorentzian(LorentzianPotential::new(theta).map_err(|e| bad(pline, e))?)
            }
            (PotentialKind::Gsm, Some("gsm")) => {
                let eta2 = parse_f64(p.next().ok_or_else(|| bad(pline, "missing eta2"))?, pline)?;
                let j = parse_usize(p.next(), pline, "component count")?;
                let values = p.by_ref().map(|t| parse_f64(t, pline)).collect::<Result<Vec<_>>>()?;
                if values.len() != 2 * j {
                    return Err(bad(pline, format!("expected {} GSM values, found {}", 2 * j, values.len())));
                }
                let scales = values[..j].to_vec();
                let mut alphas = values[j..].to_vec();
                let sum: f64 = alphas.iter().sum();
                if (sum - 1.0).abs() > FILE_ALPHA_TOLERANCE {
                    return Err(bad(pline, format!("GSM weights sum to {sum}")));
                }
                if (sum - 1.0).abs() > 1e-10 {
                    alphas.iter_mut().for_each(|a| *a /= sum);
                }
                Potential::Gsm(GsmPotential::new(alphas, scales, eta2).map_err(|e| bad(pline, e))?)
            }
            (_, other) => return Err(bad(pline, format!("unexpected parameter line {other:?}"))),
        };
        if p.next().is_some() {
            return Err(bad(pline, "trailing tokens"));
        }
        filters.push(Filter { kernel, potential });
    }
    if let Some((extra, _)) = lines.next() {
        return Err(bad(extra, "content after the last filter"));
    }
    FilterBank::new(filters)
}

pub fn load_bank(path: impl AsRef<Path>) -> Result<FilterBank> {
    parse_bank(&std::fs::read_to_string(path)?)
}

pub fn save_bank(bank: &FilterBank, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize_bank(bank))?;
    Ok(())
}

/// The eight zero-mean 3x3 derivative kernels shared by the built-in banks.
pub fn derivative_kernels() -> Vec<Kernel2D> {
    #[rustfmt::skip]
    let taps: [[f64; 9]; 8] = [
        // first differences: horizontal, vertical, diagonal, anti-diagonal
        [0., 0., 0.,  0., -1., 1.,  0., 0., 0.],
        [0., 0., 0.,  0., -1., 0.,  0., 1., 0.],
        [0., 0., 0.,  0., -1., 0.,  0., 0., 1.],
        [0., 0., 0.,  0., -1., 0.,  1., 0., 0.],
        // second differences: horizontal, vertical
        [0., 0., 0.,  1., -2., 1.,  0., 0., 0.],
        [0., 1., 0.,  0., -2., 0.,  0., 1., 0.],
        // Laplacian
        [0., 1., 0.,  1., -4., 1.,  0., 1., 0.],
        // checker
        [1., -2., 1.,  -2., 4., -2.,  1., -2., 1.],
    ];
    taps.iter()
        .map(|t| Kernel2D::new(3, 3, t.to_vec()).expect("static kernel"))
        .collect()
}

pub fn builtin_bank(name: &str) -> Option<FilterBank> {
    let potential = match name {
        LORENTZIAN_BANK => Potential::Lorentzian(LorentzianPotential::new(1.0).ok()?),
        GSM_BANK => Potential::Gsm(
            GsmPotential::new(vec![0.6, 0.3, 0.1], vec![1.0, 4.0, 16.0], 1.0).ok()?,
        ),
        _ => return None,
    };
    let filters = derivative_kernels()
        .into_iter()
        .map(|kernel| Filter {
            kernel,
            potential: potential.clone(),
        })
        .collect();
    FilterBank::new(filters).ok()
}

/// `(name, bank)` for every built-in bank.
pub fn builtin_banks() -> Vec<(&'static str, FilterBank)> {
    [LORENTZIAN_BANK, GSM_BANK]
        .into_iter()
        .map(|n| (n, builtin_bank(n).expect("built-in bank")))
        .collect()
}

/// Resolves a built-in bank name, falling back to a file path.
pub fn resolve_bank(spec: &str) -> Result<FilterBank> {
    match builtin_bank(spec) {
        Some(bank) => Ok(bank),
        None => load_bank(spec),
    }
}
