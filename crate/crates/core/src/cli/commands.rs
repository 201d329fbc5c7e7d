use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::energy::{degrade, energy, SrObjective, SrProblem};
use crate::error::Error;
use crate::exec;
use crate::image::{
    evaluate, load_color, load_image, quantize, rgb_to_ycbcr, save_image, save_rgb,
    upsample_chroma_bicubic, ycbcr_to_rgb, ImageF, LoadedImage, QualityReport,
};
use crate::ipiano::{minimize, Trace};
use crate::operators::bicubic_resize;
use crate::prior::FilterBank;

use super::{CliError, RunConfig};

/// Crops bottom/right so both dimensions are multiples of `scale`.
pub fn crop_to_multiple(img: &ImageF, scale: usize) -> Result<ImageF, Error> {
    let w = img.width() - img.width() % scale;
    let h = img.height() - img.height() % scale;
    if w == img.width() && h == img.height() {
        return Ok(img.clone());
    }
    img.crop(0, 0, w, h)
}

/// The value an image would hold after a save/load round trip.
pub fn quantized(img: &ImageF) -> ImageF {
    let data = quantize(img).into_iter().map(f64::from).collect();
    ImageF::new(img.width(), img.height(), data).expect("quantized image is valid")
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn default_trace_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".trace.csv");
    PathBuf::from(s)
}

/// Degrades `input` and writes the low-resolution image plus a `.meta` sidecar.
pub fn cmd_degrade(input: &Path, out: &Path, cfg: &RunConfig) -> Result<String, CliError> {
    let hr = load_image(input)?;
    let model = cfg.model()?;
    let cropped = crop_to_multiple(&hr, cfg.scale)?;
    let mut report = String::new();
    if !cropped.same_dims(&hr) {
        report.push_str(&format!(
            "cropped {}x{} to {}x{}\n",
            hr.width(),
            hr.height(),
            cropped.width(),
            cropped.height()
        ));
    }
    let lr = degrade(&cropped, &model)?;
    save_image(&lr, out)?;
    let (size, sigma) = cfg.blur_spec();
    let meta = format!(
        "seed={} sigma={} scale={} blur_size={} blur_sigma={} boundary={} hr={}x{} lr={}x{}\n",
        cfg.seed,
        cfg.noise_sigma,
        cfg.scale,
        size,
        sigma,
        cfg.boundary,
        cropped.width(),
        cropped.height(),
        lr.width(),
        lr.height()
    );
    std::fs::write(sidecar_path(out), &meta)?;
    report.push_str(&format!("wrote {} ({}x{})", out.display(), lr.width(), lr.height()));
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub image: ImageF,
    pub energy: f64,
    pub iters: usize,
    pub seconds: f64,
    pub trace: Trace,
}

/// Bicubic initialization followed by MAP refinement of a luminance image.
pub fn reconstruct(
    y: &ImageF,
    cfg: &RunConfig,
    bank: &FilterBank,
) -> Result<Reconstruction, (CliError, Trace)> {
    let fail = |e: Error| {
        let trace = match &e {
            Error::Divergence { trace, .. } | Error::Stall { trace, .. } => trace.clone(),
            _ => Trace::default(),
        };
        (CliError::from(e), trace)
    };
    let lambda = cfg.lambda().map_err(|e| (e, Trace::default()))?;
    let model = cfg.model().map_err(fail)?;
    let x0 = bicubic_resize(y, cfg.scale as f64).map_err(fail)?;
    let problem = SrProblem::new(y.clone(), model, lambda)
        .map_err(fail)?
        .with_prior_boundary(cfg.boundary);
    let start = Instant::now();
    if cfg.iters == 0 {
        let e = energy(&x0, &problem, bank).map_err(fail)?;
        return Ok(Reconstruction {
            image: x0,
            energy: e,
            iters: 0,
            seconds: start.elapsed().as_secs_f64(),
            trace: Trace {
                initial_energy: e,
                records: Vec::new(),
            },
        });
    }
    let objective = SrObjective::new(&problem, bank).map_err(fail)?;
    let out = minimize(&objective, x0.data(), &cfg.optimizer()).map_err(fail)?;
    let image = ImageF::new(x0.width(), x0.height(), out.x).map_err(fail)?;
    Ok(Reconstruction {
        image,
        energy: out.energy,
        iters: out.trace.len(),
        seconds: start.elapsed().as_secs_f64(),
        trace: out.trace,
    })
}

fn write_trace(trace: &Trace, path: &Path) -> Result<(), Error> {
    let mut f = BufWriter::new(File::create(path)?);
    trace.write_csv(&mut f)?;
    f.flush()?;
    Ok(())
}

/// Super-resolves `input`, writing the image and the optimizer trace.
pub fn cmd_sr(
    input: &Path,
    out: &Path,
    trace_path: Option<&Path>,
    cfg: &RunConfig,
) -> Result<String, CliError> {
    let loaded = load_color(input)?;
    let y = loaded.luminance();
    let bank = cfg.bank()?;
    let trace_path = trace_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_trace_path(out));
    let rec = match reconstruct(&y, cfg, &bank) {
        Ok(rec) => rec,
        Err((err, trace)) => {
            if !trace.is_empty() {
                write_trace(&trace, &trace_path)?;
            }
            return Err(err);
        }
    };
    write_trace(&rec.trace, &trace_path)?;

    let colour_out = out
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    match (&loaded, colour_out) {
        (LoadedImage::Rgb { r, g, b }, true) => {
            let (_, cb, cr) = rgb_to_ycbcr(r, g, b)?;
            let cb = upsample_chroma_bicubic(&cb, cfg.scale)?;
            let cr = upsample_chroma_bicubic(&cr, cfg.scale)?;
            let (r, g, b) = ycbcr_to_rgb(&rec.image, &cb, &cr)?;
            save_rgb(&r, &g, &b, out)?;
        }
        _ => save_image(&rec.image, out)?,
    }
    Ok(format!(
        "energy={:.6e} iters={} seconds={:.3}",
        rec.energy, rec.iters, rec.seconds
    ))
}

fn fmt_psnr(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p:.3}")
    }
}

pub fn format_report(q: &QualityReport) -> String {
    format!("psnr={} ssim100={:.3}", fmt_psnr(q.psnr), 100.0 * q.ssim)
}

pub fn cmd_eval(recon: &Path, truth: &Path, shave: usize) -> Result<String, CliError> {
    let a = load_image(recon)?;
    let b = load_image(truth)?;
    Ok(format_report(&evaluate(&a, &b, shave)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub outcome: Result<BenchScores, String>,
    exit_code: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchScores {
    pub bicubic: QualityReport,
    pub map: QualityReport,
    pub seconds: f64,
    pub iters: usize,
}

fn bench_one(path: &Path, cfg: &RunConfig, bank: &FilterBank) -> Result<BenchScores, CliError> {
    let hr = crop_to_multiple(&load_image(path)?, cfg.scale)?;
    let model = cfg.model()?;
    let y = degrade(&hr, &model)?;
    let bicubic = quantized(&bicubic_resize(&y, cfg.scale as f64)?);
    let rec = reconstruct(&y, cfg, bank).map_err(|(e, _)| e)?;
    let shave = cfg.shave();
    Ok(BenchScores {
        bicubic: evaluate(&bicubic, &hr, shave)?,
        map: evaluate(&quantized(&rec.image), &hr, shave)?,
        seconds: rec.seconds,
        iters: rec.iters,
    })
}

/// Image files of a benchmark directory in file-name order.
pub fn bench_inputs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(CliError::Lib(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no .pgm or .png images in {}", dir.display()),
        ))));
    }
    Ok(files)
}

/// Runs degrade, reconstruct and evaluate for every image in `dir`.
pub fn run_bench(dir: &Path, cfg: &RunConfig) -> Result<Vec<BenchRow>, CliError> {
    let files = bench_inputs(dir)?;
    cfg.lambda()?;
    let bank = cfg.bank()?;
    Ok(exec::map_ordered(&files, |path| {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match bench_one(path, cfg, &bank) {
            Ok(scores) => BenchRow {
                name,
                outcome: Ok(scores),
                exit_code: 0,
            },
            Err(e) => BenchRow {
                name,
                exit_code: e.exit_code(),
                outcome: Err(e.to_string()),
            },
        }
    }))
}

pub const BENCH_HEADER: [&str; 8] = [
    "name",
    "psnr_bicubic",
    "psnr_map",
    "ssim100_bicubic",
    "ssim100_map",
    "seconds",
    "iters",
    "status",
];

/// Writes the benchmark table followed by an `average` row over successful images.
pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(BENCH_HEADER).map_err(io)?;
    let ssim100 = |q: &QualityReport| format!("{:.3}", 100.0 * q.ssim);
    for row in rows {
        let record = match &row.outcome {
            Ok(s) => vec![
                row.name.clone(),
                fmt_psnr(s.bicubic.psnr),
                fmt_psnr(s.map.psnr),
                ssim100(&s.bicubic),
                ssim100(&s.map),
                format!("{:.3}", s.seconds),
                s.iters.to_string(),
                "ok".to_string(),
            ],
            Err(msg) => {
                let mut r = vec![row.name.clone()];
                r.extend(std::iter::repeat_n(String::new(), 6));
                r.push(format!("error: {msg}"));
                r
            }
        };
        w.write_record(&record).map_err(io)?;
    }
    let ok: Vec<&BenchScores> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let n = ok.len() as f64;
    let mean = |f: &dyn Fn(&BenchScores) -> f64| ok.iter().map(|s| f(s)).sum::<f64>() / n;
    let average = if ok.is_empty() {
        let mut r = vec!["average".to_string()];
        r.extend(std::iter::repeat_n(String::new(), 6));
        r.push("error: no successful images".to_string());
        r
    } else {
        vec![
            "average".to_string(),
            fmt_psnr(mean(&|s| s.bicubic.psnr)),
            fmt_psnr(mean(&|s| s.map.psnr)),
            format!("{:.3}", mean(&|s| 100.0 * s.bicubic.ssim)),
            format!("{:.3}", mean(&|s| 100.0 * s.map.ssim)),
            format!("{:.3}", mean(&|s| s.seconds)),
            format!("{:.1}", mean(&|s| s.iters as f64)),
            if ok.len() == rows.len() { "ok" } else { "partial" }.to_string(),
        ]
    };
    w.write_record(&average).map_err(io)?;
    w.flush()?;
    Ok(())
}

/// Exit code of the first failed row, or 0.
pub fn bench_exit_code(rows: &[BenchRow]) -> i32 {
    rows.iter()
        .map(|r| r.exit_code)
        .find(|&c| c != 0)
        .unwrap_or(0)
}
