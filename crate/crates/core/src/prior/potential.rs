//! Expert potentials and their penalties `rho = -log phi`.

use std::f64::consts::PI;

use crate::error::{contract, Result};

/// Gaussian scale mixture `phi(z) = sum_j alpha_j N(z; 0, eta^2 / s_j)`.
///
/// Densities are combined in the log domain so that the penalty and its
/// derivative stay finite far into the tails.
#[derive(Debug, Clone, PartialEq)]
pub struct GsmPotential {
    alphas: Vec<f64>,
    scales: Vec<f64>,
    base_variance: f64,
    // log(alpha_j) - 0.5 log(2 pi eta^2 / s_j), one per component with alpha_j > 0
    log_consts: Vec<f64>,
    // s_j / eta^2 for the same components
    precisions: Vec<f64>,
}

impl GsmPotential {
    pub fn new(alphas: Vec<f64>, scales: Vec<f64>, base_variance: f64) -> Result<Self> {
        contract!(!alphas.is_empty(), "GSM needs at least one component");
        contract!(
            alphas.len() == scales.len(),
            "GSM has {} weights but {} scales",
            alphas.len(),
            scales.len()
        );
        contract!(
            alphas.iter().all(|a| a.is_finite() && *a >= 0.0),
            "GSM weights must be non-negative"
        );
        let total: f64 = alphas.iter().sum();
        contract!(
            (total - 1.0).abs() <= 1e-10,
            "GSM weights sum to {total}, expected 1"
        );
        contract!(
            scales.iter().all(|s| s.is_finite() && *s > 0.0),
            "GSM scales must be positive"
        );
        contract!(
            base_variance.is_finite() && base_variance > 0.0,
            "GSM base variance must be positive"
        );
        let (log_consts, precisions) = alphas
            .iter()
            .zip(&scales)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, s)| {
                let var = base_variance / s;
                (a.ln() - 0.5 * (2.0 * PI * var).ln(), s / base_variance)
            })
            .unzip();
        Ok(Self {
            alphas,
            scales,
            base_variance,
            log_consts,
            precisions,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn base_variance(&self) -> f64 {
        self.base_variance
    }

    /// Maximum component log density, and the normalizer of the shifted sum.
    #[inline]
    fn log_terms(&self, z: f64, mut each: impl FnMut(f64, f64)) -> (f64, f64) {
        let z2 = z * z;
        let max = self
            .log_consts
            .iter()
            .zip(&self.precisions)
            .map(|(c, p)| c - 0.5 * z2 * p)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (c, p) in self.log_consts.iter().zip(&self.precisions) {
            let e = (c - 0.5 * z2 * p - max).exp();
            each(e, *p);
            sum += e;
        }
        (max, sum)
    }

    pub fn log_density(&self, z: f64) -> f64 {
        let (max, sum) = self.log_terms(z, |_, _| {});
        max + sum.ln()
    }

    pub fn density(&self, z: f64) -> f64 {
        self.log_density(z).exp()
    }

    pub fn rho(&self, z: f64) -> f64 {
        -self.log_density(z)
    }

    /// `z / phi(z) * sum_j (s_j alpha_j / eta^2) N(z; 0, eta^2 / s_j)`.
    pub fn rho_prime(&self, z: f64) -> f64 {
        self.rho_and_prime(z).1
    }

    pub fn rho_and_prime(&self, z: f64) -> (f64, f64) {
        let mut weighted = 0.0;
        let (max, sum) = self.log_terms(z, |e, p| weighted += e * p);
        (-(max + sum.ln()), z * weighted / sum)
    }
}

/// Student-t expert with penalty `log(1 + z^2)` and per-filter weight `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianPotential {
    weight: f64,
}

impl LorentzianPotential {
    pub fn new(weight: f64) -> Result<Self> {
        contract!(
            weight.is_finite() && weight > 0.0,
            "Lorentzian weight must be positive, got {weight}"
        );
        Ok(Self { weight })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    #[inline]
    pub fn rho(z: f64) -> f64 {
        z.mul_add(z, 1.0).ln()
    }

    #[inline]
    pub fn rho_prime(z: f64) -> f64 {
        2.0 * z / z.mul_add(z, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Gsm,
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Gsm(GsmPotential),
    Lorentzian(LorentzianPotential),
}

impl Potential {
    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Gsm(_) => PotentialKind::Gsm,
            Potential::Lorentzian(_) => PotentialKind::Lorentzian,
        }
    }

    /// Multiplier of this filter's penalty in the prior energy.
    pub fn weight(&self) -> f64 {
        match self {
            Potential::Gsm(_) => 1.0,
            Potential::Lorentzian(l) => l.weight(),
        }
    }

    #[inline]
    pub fn rho(&self, z: f64) -> f64 {
        match self {
            Potential::Gsm(g) => g.rho(z),
            Potential::Lorentzian(_) => LorentzianPotential::rho(z),
        }
    }

    #[inline]
    pub fn rho_prime(&self, z: f64) -> f64 {
        match self {
            Potential::Gsm(g) => g.rho_prime(z),
            Potential::Lorentzian(_) => LorentzianPotential::rho_prime(z),
        }
    }

    #[inline]
    pub fn rho_and_prime(&self, z: f64) -> (f64, f64) {
        match self {
            Potential::Gsm(g) => g.rho_and_prime(z),
            Potential::Lorentzian(_) => {
                (LorentzianPotential::rho(z), LorentzianPotential::rho_prime(z))
            }
        }
    }
}

/// The GSM density itself.
pub fn phi_gsm(z: f64, p: &GsmPotential) -> f64 {
    p.density(z)
}

pub fn rho(z: f64, potential: &Potential) -> f64 {
    potential.rho(z)
}

pub fn rho_prime(z: f64, potential: &Potential) -> f64 {
    potential.rho_prime(z)
}
