//! The MAP super-resolution objective
//! `E(x) = sum_i theta_i rho(k_i * x) + lambda/2 |D B x - y|^2`
//! together with the synthetic degradation `y = D B x + noise`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};
use crate::image::ImageF;
use crate::ipiano::Objective;
use crate::operators::{
    conv2_adjoint, conv2_same, default_blur, downsample, upsample_zero, Boundary, Kernel2D,
};
use crate::prior::{prior_energy, prior_energy_and_gradient, FilterBank};

#[derive(Debug, Clone, PartialEq)]
pub struct DegradationModel {
    /// Mass-preserving blur `B`.
    pub blur: Kernel2D,
    pub scale: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub boundary: Boundary,
}

impl DegradationModel {
    pub fn new(blur: Kernel2D, scale: usize, noise_sigma: f64, seed: u64) -> Result<Self> {
        let model = Self {
            blur,
            scale,
            noise_sigma,
            seed,
            boundary: Boundary::Symmetric,
        };
        model.validate()?;
        Ok(model)
    }

    /// Default Gaussian blur for `scale`, no noise.
    pub fn for_scale(scale: usize) -> Result<Self> {
        contract!(scale >= 1, "scale must be >= 1");
        Self::new(default_blur(scale), scale, 0.0, 0)
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Result<Self> {
        self.noise_sigma = sigma;
        self.seed = seed;
        self.validate()?;
        Ok(self)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        contract!(self.scale >= 1, "scale must be >= 1");
        contract!(
            (self.blur.sum() - 1.0).abs() <= 1e-12,
            "blur taps sum to {}, expected 1",
            self.blur.sum()
        );
        contract!(
            self.noise_sigma >= 0.0 && self.noise_sigma.is_finite(),
            "noise sigma must be non-negative"
        );
        Ok(())
    }

    /// Noise-free forward model `D B x`.
    pub fn forward(&self, x: &ImageF) -> Result<ImageF> {
        self.check_hr(x)?;
        downsample(&conv2_same(x, &self.blur, self.boundary)?, self.scale)
    }

    /// `B^T D^T r`.
    pub fn adjoint(&self, residual: &ImageF) -> Result<ImageF> {
        conv2_adjoint(&upsample_zero(residual, self.scale)?, &self.blur, self.boundary)
    }

    fn check_hr(&self, x: &ImageF) -> Result<()> {
        contract!(
            x.width().is_multiple_of(self.scale) && x.height().is_multiple_of(self.scale),
            "{}x{} high-resolution image is not divisible by scale {}",
            x.width(),
            x.height(),
            self.scale
        );
        Ok(())
    }
}

/// Adds white Gaussian noise drawn with Box-Muller from a seeded ChaCha8 stream.
pub fn add_gaussian_noise(img: &mut ImageF, sigma: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    for pair in img.data_mut().chunks_mut(2) {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let radius = (-2.0 * u1.ln()).sqrt();
        pair[0] += sigma * radius * (two_pi * u2).cos();
        if let Some(second) = pair.get_mut(1) {
            *second += sigma * radius * (two_pi * u2).sin();
        }
    }
}

/// `y = D B x + noise`, deterministic given the model seed.
pub fn degrade(x_hr: &ImageF, model: &DegradationModel) -> Result<ImageF> {
    model.validate()?;
    let mut y = model.forward(x_hr)?;
    if model.noise_sigma > 0.0 {
        add_gaussian_noise(&mut y, model.noise_sigma, model.seed);
    }
    Ok(y)
}

/// Observation, forward model and data weight of one reconstruction.
#[derive(Debug, Clone)]
pub struct SrProblem {
    pub y: ImageF,
    pub model: DegradationModel,
    pub lambda: f64,
    /// Boundary rule for the prior filters.
    pub boundary: Boundary,
    pub hr_width: usize,
    pub hr_height: usize,
}

impl SrProblem {
    pub fn new(y: ImageF, model: DegradationModel, lambda: f64) -> Result<Self> {
        model.validate()?;
        contract!(
            lambda >= 0.0 && lambda.is_finite(),
            "lambda must be non-negative and finite, got {lambda}"
        );
        let (hr_width, hr_height) = (y.width() * model.scale, y.height() * model.scale);
        let boundary = model.boundary;
        Ok(Self {
            y,
            model,
            lambda,
            boundary,
            hr_width,
            hr_height,
        })
    }

    pub fn with_prior_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    fn check_x(&self, x: &ImageF) -> Result<()> {
        contract!(
            x.width() == self.hr_width && x.height() == self.hr_height,
            "estimate is {}x{}, problem expects {}x{}",
            x.width(),
            x.height(),
            self.hr_width,
            self.hr_height
        );
        Ok(())
    }

    fn residual(&self, x: &ImageF) -> Result<ImageF> {
        let mut r = self.model.forward(x)?;
        r.data_mut()
            .iter_mut()
            .zip(self.y.data())
            .for_each(|(a, b)| *a -= b);
        Ok(r)
    }

    /// `lambda/2 |D B x - y|^2`.
    pub fn data_energy(&self, x: &ImageF) -> Result<f64> {
        self.check_x(x)?;
        let r = self.residual(x)?;
        Ok(0.5 * self.lambda * r.dot(&r))
    }
}

pub fn energy(x: &ImageF, prob: &SrProblem, bank: &FilterBank) -> Result<f64> {
    prob.check_x(x)?;
    let prior = prior_energy(x, bank, prob.boundary)?;
    Ok(prior + prob.data_energy(x)?)
}

/// `sum_i K_i^T rho'(K_i x) + lambda (D B)^T (D B x - y)`.
pub fn energy_gradient(x: &ImageF, prob: &SrProblem, bank: &FilterBank) -> Result<ImageF> {
    Ok(energy_and_gradient(x, prob, bank)?.1)
}

pub fn energy_and_gradient(
    x: &ImageF,
    prob: &SrProblem,
    bank: &FilterBank,
) -> Result<(f64, ImageF)> {
    prob.check_x(x)?;
    let (prior, mut grad) = prior_energy_and_gradient(x, bank, prob.boundary)?;
    let r = prob.residual(x)?;
    let data = 0.5 * prob.lambda * r.dot(&r);
    let back = prob.model.adjoint(&r)?;
    grad.data_mut()
        .iter_mut()
        .zip(back.data())
        .for_each(|(g, b)| *g += prob.lambda * b);
    Ok((prior + data, grad))
}

/// Adapter exposing the SR energy to the optimizer.
///
/// Evaluation errors cannot occur once the shapes have been checked here, so
/// the trait methods report them as non-finite values.
pub struct SrObjective<'a> {
    problem: &'a SrProblem,
    bank: &'a FilterBank,
}

impl<'a> SrObjective<'a> {
    pub fn new(problem: &'a SrProblem, bank: &'a FilterBank) -> Result<Self> {
        let probe = ImageF::zeros(problem.hr_width, problem.hr_height);
        energy(&probe, problem, bank)?;
        Ok(Self { problem, bank })
    }

    fn image(&self, x: &[f64]) -> ImageF {
        ImageF::from_raw(self.problem.hr_width, self.problem.hr_height, x.to_vec())
    }
}

impl Objective for SrObjective<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        energy(&self.image(x), self.problem, self.bank).unwrap_or(f64::NAN)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match energy_gradient(&self.image(x), self.problem, self.bank) {
            Ok(g) => g.into_data(),
            Err(_) => vec![f64::NAN; x.len()],
        }
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match energy_and_gradient(&self.image(x), self.problem, self.bank) {
            Ok((e, g)) => (e, g.into_data()),
            Err(_) => (f64::NAN, vec![f64::NAN; x.len()]),
        }
    }
}
