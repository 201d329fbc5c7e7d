use crate::bank::{resolve_bank, LORENTZIAN_BANK};
use crate::energy::DegradationModel;
use crate::error::Result;
use crate::ipiano::OptimizerConfig;
use crate::operators::{gaussian_kernel, Boundary};
use crate::prior::FilterBank;

use super::CliError;

/// Data weight used for a noise level when none is given explicitly.
///
/// Only the noise levels 0, 1, 2 and 3 have an established weight.
pub fn lambda_for_sigma(sigma: f64) -> Option<f64> {
    [(0.0, 200.0), (1.0, 3.0), (2.0, 1.0), (3.0, 0.5)]
        .into_iter()
        .find(|&(s, _)| s == sigma)
        .map(|(_, lambda)| lambda)
}

/// Everything one degrade / reconstruct / evaluate run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scale: usize,
    /// `None` selects the weight from [`lambda_for_sigma`].
    pub lambda: Option<f64>,
    pub noise_sigma: f64,
    pub blur_size: Option<usize>,
    pub blur_sigma: Option<f64>,
    pub boundary: Boundary,
    pub optimizer: OptimizerConfig,
    /// Number of optimizer iterations; 0 returns the bicubic initialization.
    pub iters: usize,
    /// Built-in bank name or path to a bank file.
    pub filters: String,
    /// Border excluded from evaluation; defaults to the scale.
    pub shave: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scale: 3,
            lambda: None,
            noise_sigma: 0.0,
            blur_size: None,
            blur_sigma: None,
            boundary: Boundary::Symmetric,
            optimizer: OptimizerConfig::default(),
            iters: 200,
            filters: LORENTZIAN_BANK.to_string(),
            shave: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn lambda(&self) -> std::result::Result<f64, CliError> {
        match self.lambda {
            Some(l) => Ok(l),
            None => lambda_for_sigma(self.noise_sigma).ok_or_else(|| {
                CliError::Usage(format!(
                    "no default lambda for sigma {}; pass --lambda",
                    self.noise_sigma
                ))
            }),
        }
    }

    pub fn shave(&self) -> usize {
        self.shave.unwrap_or(self.scale)
    }

    /// `(size, sigma)` of the Gaussian blur; defaults to sigma `scale/3`
    /// with support `2 ceil(3 sigma) + 1`.
    pub fn blur_spec(&self) -> (usize, f64) {
        let sigma = self.blur_sigma.unwrap_or(self.scale as f64 / 3.0);
        let size = self.blur_size.unwrap_or_else(|| match self.blur_sigma {
            None => 2 * self.scale + 1,
            Some(s) => 2 * (3.0 * s).ceil() as usize + 1,
        });
        (size, sigma)
    }

    pub fn model(&self) -> Result<DegradationModel> {
        let (size, sigma) = self.blur_spec();
        let blur = gaussian_kernel(size, sigma)?;
        Ok(DegradationModel::new(blur, self.scale, self.noise_sigma, self.seed)?
            .with_boundary(self.boundary))
    }

    pub fn bank(&self) -> Result<FilterBank> {
        resolve_bank(&self.filters)
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iters: self.iters.max(1),
            ..self.optimizer
        }
    }
}
