//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::time::Instant;

use common::{random_bank, random_image, random_kernel, rng, termwise_fd_gradient};
use foesr::bank::{builtin_bank, LORENTZIAN_BANK};
use foesr::cli::{lambda_for_sigma, quantized, run_with};
use foesr::energy::{degrade, energy_gradient, DegradationModel, SrObjective, SrProblem};
use foesr::image::{evaluate, load_image, save_image};
use foesr::ipiano::{gradient_descent, minimize, Minimized, Objective, OptimizerConfig};
use foesr::operators::{
    bicubic_resize, conv2_adjoint, conv2_same, default_blur, downsample, upsample_zero, Boundary,
};
use foesr::prior::{GsmPotential, LorentzianPotential};
use foesr::ImageF;
use rand::Rng;

const CAMERAMAN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/cameraman_255.pgm");

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        println!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

fn rel_dot_error(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

fn adjoint_suite(report: &mut Report) {
    let start = Instant::now();
    let mut g = rng(2024);
    let (mut worst_conv, mut worst_down) = (0.0f64, 0.0f64);
    for trial in 0..100 {
        let scale = g.gen_range(1..=3);
        let lo = 5usize.div_ceil(scale);
        let w = scale * g.gen_range(lo..=32 / scale);
        let h = scale * g.gen_range(lo..=32 / scale);
        let kr = 2 * g.gen_range(0..=(h.min(7) - 1) / 2) + 1;
        let kc = 2 * g.gen_range(0..=(w.min(7) - 1) / 2) + 1;
        let k = random_kernel(&mut g, kr, kc);
        let boundary = if trial % 2 == 0 { Boundary::Symmetric } else { Boundary::Circular };
        let x = random_image(&mut g, w, h, -1.0, 1.0);
        let y = random_image(&mut g, w, h, -1.0, 1.0);
        let lhs = conv2_same(&x, &k, boundary).unwrap().dot(&y);
        let rhs = x.dot(&conv2_adjoint(&y, &k, boundary).unwrap());
        worst_conv = worst_conv.max(rel_dot_error(lhs, rhs));

        let ly = random_image(&mut g, w / scale, h / scale, -1.0, 1.0);
        let lhs = downsample(&x, scale).unwrap().dot(&ly);
        let rhs = x.dot(&upsample_zero(&ly, scale).unwrap());
        worst_down = worst_down.max(rel_dot_error(lhs, rhs));
    }
    let secs = start.elapsed().as_secs_f64();
    report.check(
        "1",
        "adjoint suite",
        worst_conv <= 1e-12 && worst_down <= 1e-12 && secs < 5.0,
        format!("conv {worst_conv:.2e}, downsample {worst_down:.2e} (<= 1e-12), {secs:.2} s (< 5 s)"),
    );
}

/// Worst of `|a - n| / max(|a|, |n|)` over entries where either is non-zero.
fn per_pixel_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| {
            let d = a.abs().max(n.abs());
            if d == 0.0 {
                0.0
            } else {
                (a - n).abs() / d
            }
        })
        .fold(0.0, f64::max)
}

fn gradient_suite(report: &mut Report) {
    let start = Instant::now();
    let mut g = rng(99);
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    for i in 0..20 {
        let hr = g.gen_range(12..=16usize);
        let scales: Vec<usize> = (1..=3).filter(|s| hr % s == 0).collect();
        let scale = scales[g.gen_range(0..scales.len())];
        let gsm = i % 2 == 1;
        let model = DegradationModel::for_scale(scale).unwrap();
        let truth = random_image(&mut g, hr, hr, 0.0, 255.0);
        let mut y = degrade(&truth, &model).unwrap();
        y.data_mut().iter_mut().for_each(|v| *v += g.gen_range(-2.0..2.0));
        let lambda = [200.0, 3.0, 1.0, 0.5][g.gen_range(0..4)];
        let problem = SrProblem::new(y, model, lambda).unwrap();
        let n = g.gen_range(1..=4);
        let bank = random_bank(&mut g, n, 3, gsm);
        let x = random_image(&mut g, hr, hr, 0.0, 255.0);
        let analytic = energy_gradient(&x, &problem, &bank).unwrap();
        let numeric = termwise_fd_gradient(&x, &problem, &bank, 1e-4);
        let err = per_pixel_rel_error(analytic.data(), &numeric);
        if err > worst {
            worst = err;
            worst_case = format!("hr={hr} scale={scale} gsm={gsm} lambda={lambda}");
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report.check(
        "2",
        "gradient suite",
        worst <= 1e-5 && secs < 30.0,
        format!("worst per-pixel relative error {worst:.2e} at {worst_case} (<= 1e-5), {secs:.2} s (< 30 s)"),
    );
}

fn gsm_degeneracy(report: &mut Report) {
    let mut g = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = g.gen_range(0.1..20.0);
        let eta2 = g.gen_range(0.1..10.0);
        let p = GsmPotential::new(vec![1.0], vec![s], eta2).unwrap();
        let z = g.gen_range(-50.0..50.0);
        let expect = z * s / eta2;
        worst = worst.max((p.rho_prime(z) - expect).abs() / expect.abs().max(1.0));
    }
    let lorentz = LorentzianPotential::rho_prime(1.0);
    report.check(
        "3",
        "potential degeneracy",
        worst <= 1e-12 && lorentz == 1.0,
        format!("J=1 GSM rho' worst error {worst:.2e} (<= 1e-12), Lorentzian rho'(1) = {lorentz}"),
    );
}

struct Quadratic(Vec<f64>);

impl Objective for Quadratic {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().zip(&self.0).map(|(a, c)| (a - c).powi(2)).sum::<f64>()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.0).map(|(a, c)| a - c).collect()
    }
}

struct Rosenbrock;

impl Objective for Rosenbrock {
    fn value(&self, x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]
    }
}

fn monotone(m: &Minimized) -> bool {
    let mut prev = m.trace.initial_energy;
    m.trace.energies().all(|e| {
        let ok = e <= prev;
        prev = e;
        ok
    })
}

struct Desk {
    truth: ImageF,
    problem: SrProblem,
    x0: ImageF,
}

fn desk_problem() -> Desk {
    let truth = load_image(CAMERAMAN).unwrap();
    let model = DegradationModel::for_scale(3).unwrap();
    let y = degrade(&truth, &model).unwrap();
    let x0 = bicubic_resize(&y, 3.0).unwrap();
    Desk {
        truth,
        problem: SrProblem::new(y, model, 200.0).unwrap(),
        x0,
    }
}

fn optimizer_criteria(report: &mut Report, desk: &Desk, map: &Minimized) {
    let c: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() * 40.0).collect();
    let cfg = OptimizerConfig { max_iters: 500, ..Default::default() };
    let q = minimize(&Quadratic(c.clone()), &vec![0.0; c.len()], &cfg).unwrap();
    let q_err = q.x.iter().zip(&c).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    report.check(
        "4a",
        "quadratic",
        q_err <= 1e-8 && q.trace.len() <= 500,
        format!("||x - c||_inf = {q_err:.2e} (<= 1e-8) after {} iterations (<= 500)", q.trace.len()),
    );

    let cfg = OptimizerConfig { max_iters: 200_000, grad_tol: 1e-8, ..Default::default() };
    let r = minimize(&Rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
    let dist = (r.x[0] - 1.0).hypot(r.x[1] - 1.0);
    let gn = {
        let g = Rosenbrock.gradient(&r.x);
        g[0].hypot(g[1])
    };
    report.check(
        "4b",
        "Rosenbrock",
        dist <= 1e-4 && gn < 1e-6,
        format!("distance to (1,1) {dist:.2e} (<= 1e-4), |grad| {gn:.2e} (< 1e-6), {} iterations", r.trace.len()),
    );

    let bank = builtin_bank(LORENTZIAN_BANK).unwrap();
    let objective = SrObjective::new(&desk.problem, &bank).unwrap();
    let cfg = OptimizerConfig { max_iters: 200, ..Default::default() };
    let gd = gradient_descent(&objective, desk.x0.data(), &cfg).unwrap();
    let gd_small = [
        gradient_descent(&Rosenbrock, &[-1.2, 1.0], &OptimizerConfig { max_iters: 2000, ..cfg }).unwrap(),
        gradient_descent(&Quadratic(c), &vec![0.0; 64], &cfg).unwrap(),
    ];
    let all_monotone = monotone(&gd) && gd_small.iter().all(monotone);
    report.check(
        "4c",
        "beta=0 monotone",
        all_monotone,
        "energy non-increasing on SR desk problem, Rosenbrock and quadratic".to_string(),
    );

    let target = gd.energy;
    let gd_iters = gd.trace.first_reaching(target).unwrap_or(usize::MAX);
    let inertial = map.trace.first_reaching(target);
    report.check(
        "4d",
        "inertia speedup",
        inertial.is_some_and(|k| k < gd_iters),
        format!(
            "beta=0.8 reaches {target:.6e} at iteration {} vs beta=0 at {gd_iters}",
            inertial.map_or("never".to_string(), |k| k.to_string())
        ),
    );
}

fn end_to_end(report: &mut Report, desk: &Desk, map: &Minimized, wall: f64) {
    let hr = ImageF::new(desk.x0.width(), desk.x0.height(), map.x.clone()).unwrap();
    let bicubic = evaluate(&quantized(&desk.x0), &desk.truth, 3).unwrap();
    let result = evaluate(&quantized(&hr), &desk.truth, 3).unwrap();
    let gain = result.psnr - bicubic.psnr;
    report.check(
        "5",
        "desk SR quality",
        gain >= 0.3 && map.energy < map.trace.initial_energy,
        format!(
            "PSNR bicubic {:.3} dB, MAP {:.3} dB, gain {gain:.3} dB (>= 0.3); energy {:.6e} -> {:.6e}",
            bicubic.psnr, result.psnr, map.trace.initial_energy, map.energy
        ),
    );
    let per_iter = wall / map.trace.len() as f64;
    report.check(
        "6",
        "desk SR runtime",
        per_iter <= 0.5 && wall < 120.0,
        format!(
            "{per_iter:.4} s per iteration (<= 0.5), {wall:.2} s for {} iterations (< 120 s)",
            map.trace.len()
        ),
    );
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(std::iter::once("foesr").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn lambda_schedule(report: &mut Report, dir: &Path) {
    let lr = dir.join("schedule_lr.pgm");
    save_image(&load_image(CAMERAMAN).unwrap().crop(100, 100, 24, 24).unwrap(), &lr).unwrap();
    let lr = lr.to_str().unwrap();
    let mut ok = true;
    let mut seen = Vec::new();
    for (sigma, lambda) in [("0", 200.0), ("1", 3.0), ("2", 1.0), ("3", 0.5)] {
        ok &= lambda_for_sigma(sigma.parse().unwrap()) == Some(lambda);
        let auto = dir.join(format!("auto{sigma}.pgm"));
        let manual = dir.join(format!("manual{sigma}.pgm"));
        let (ca, sa) = run_cli(&["sr", lr, "--sigma", sigma, "--iters", "3", "--out", auto.to_str().unwrap()]);
        let (cm, sm) = run_cli(&[
            "sr", lr, "--sigma", sigma, "--iters", "3", "--lambda", &lambda.to_string(),
            "--out", manual.to_str().unwrap(),
        ]);
        let energy = |s: &str| s.split_whitespace().next().unwrap_or_default().to_string();
        ok &= ca == 0 && cm == 0 && energy(&sa) == energy(&sm);
        ok &= std::fs::read(&auto).ok() == std::fs::read(&manual).ok();
        seen.push(format!("{sigma}->{lambda}"));
    }
    let out = dir.join("unscheduled.pgm");
    let (code, _) = run_cli(&["sr", lr, "--sigma", "1.5", "--iters", "1", "--out", out.to_str().unwrap()]);
    ok &= code == 1;
    report.check(
        "7",
        "lambda schedule",
        ok,
        format!("sigma->lambda {} via CLI; sigma=1.5 without --lambda exits {code}", seen.join(", ")),
    );
}

fn strip_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(5);
            f.join(",")
        })
        .collect()
}

fn bench_determinism(report: &mut Report, dir: &Path) {
    let images = dir.join("bench");
    std::fs::create_dir_all(&images).unwrap();
    let truth = load_image(CAMERAMAN).unwrap();
    for (i, (r, c)) in [(0, 0), (60, 120), (150, 30)].into_iter().enumerate() {
        save_image(&truth.crop(r, c, 96, 96).unwrap(), images.join(format!("crop{i}.pgm"))).unwrap();
    }
    let run = |name: &str| {
        let out = dir.join(name);
        let (code, _) = run_cli(&["bench", images.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        (code, std::fs::read_to_string(out).unwrap_or_default())
    };
    let (ca, a) = run("bench_a.csv");
    let (cb, b) = run("bench_b.csv");
    let rows = a.lines().count();
    report.check(
        "8",
        "bench determinism",
        ca == 0 && cb == 0 && rows == 5 && strip_timing(&a) == strip_timing(&b),
        format!("two runs over 3 images, {rows} CSV lines, identical apart from seconds: {}", strip_timing(&a) == strip_timing(&b)),
    );
}

fn main() {
    let mut report = Report { failures: 0 };
    let dir = tempfile::TempDir::new().unwrap();

    adjoint_suite(&mut report);
    gradient_suite(&mut report);
    gsm_degeneracy(&mut report);

    let desk = desk_problem();
    let bank = builtin_bank(LORENTZIAN_BANK).unwrap();
    let objective = SrObjective::new(&desk.problem, &bank).unwrap();
    let cfg = OptimizerConfig { max_iters: 200, ..Default::default() };
    let start = Instant::now();
    let map = minimize(&objective, desk.x0.data(), &cfg).unwrap();
    let wall = start.elapsed().as_secs_f64();
    assert_eq!(desk.problem.lambda, 200.0);
    assert_eq!(desk.problem.model.blur, default_blur(3));

    optimizer_criteria(&mut report, &desk, &map);
    end_to_end(&mut report, &desk, &map, wall);
    lambda_schedule(&mut report, dir.path());
    bench_determinism(&mut report, dir.path());

    if report.failures > 0 {
        println!("{} acceptance criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
