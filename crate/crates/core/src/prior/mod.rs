//! Fields-of-Experts prior: a bank of linear filters, each paired with a
//! heavy-tailed expert potential applied at every pixel of its response.

mod potential;

pub use potential::{
    phi_gsm, rho, rho_prime, GsmPotential, LorentzianPotential, Potential, PotentialKind,
};

use crate::error::{contract, Result};
use crate::exec;
use crate::image::ImageF;
use crate::operators::{conv2_adjoint, conv2_same, Boundary, Kernel2D};

#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub kernel: Kernel2D,
    pub potential: Potential,
}

/// Filters with one potential family shared by the whole bank.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Vec<Filter>,
}

impl FilterBank {
    pub fn new(filters: Vec<Filter>) -> Result<Self> {
        contract!(!filters.is_empty(), "filter bank must contain at least one filter");
        let kind = filters[0].potential.kind();
        contract!(
            filters.iter().all(|f| f.potential.kind() == kind),
            "filter bank mixes potential families"
        );
        Ok(Self { filters })
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn kind(&self) -> PotentialKind {
        self.filters[0].potential.kind()
    }

    fn check_fits(&self, x: &ImageF) -> Result<()> {
        for (i, f) in self.filters.iter().enumerate() {
            contract!(
                f.kernel.rows() <= x.height() && f.kernel.cols() <= x.width(),
                "filter {i} ({}x{}) does not fit in {}x{} image",
                f.kernel.rows(),
                f.kernel.cols(),
                x.width(),
                x.height()
            );
        }
        Ok(())
    }
}

fn filter_energy(x: &ImageF, f: &Filter, boundary: Boundary) -> Result<f64> {
    let response = conv2_same(x, &f.kernel, boundary)?;
    let p = &f.potential;
    let sum = exec::sum_rows(response.data(), x.width(), |row| {
        row.iter().map(|&z| p.rho(z)).sum()
    });
    Ok(p.weight() * sum)
}

/// `(theta_i rho(K_i x), K_i^T theta_i rho'(K_i x))` for one filter.
fn filter_energy_and_gradient(
    x: &ImageF,
    f: &Filter,
    boundary: Boundary,
) -> Result<(f64, ImageF)> {
    let mut response = conv2_same(x, &f.kernel, boundary)?;
    let p = &f.potential;
    let theta = p.weight();
    let w = x.width();
    // response is overwritten in place with theta * rho'(response)
    let sum = exec::transform_rows(response.data_mut(), w, |row| {
        let mut acc = 0.0;
        for z in row.iter_mut() {
            let (r, d) = p.rho_and_prime(*z);
            acc += r;
            *z = theta * d;
        }
        acc
    });
    let energy = theta * sum;
    let grad = conv2_adjoint(&response, &f.kernel, boundary)?;
    Ok((energy, grad))
}

/// `sum_i theta_i sum_c rho((k_i * x)_c)`; `theta_i = 1` for GSM banks.
pub fn prior_energy(x: &ImageF, bank: &FilterBank, boundary: Boundary) -> Result<f64> {
    bank.check_fits(x)?;
    let per_filter = exec::map_ordered(bank.filters(), |f| filter_energy(x, f, boundary));
    let mut total = 0.0;
    for e in per_filter {
        total += e?;
    }
    Ok(total)
}

/// `sum_i K_i^T theta_i rho'(K_i x)`.
pub fn prior_gradient(x: &ImageF, bank: &FilterBank, boundary: Boundary) -> Result<ImageF> {
    Ok(prior_energy_and_gradient(x, bank, boundary)?.1)
}

/// Energy and gradient sharing the filter responses. Per-filter terms are
/// reduced in ascending filter order.
pub fn prior_energy_and_gradient(
    x: &ImageF,
    bank: &FilterBank,
    boundary: Boundary,
) -> Result<(f64, ImageF)> {
    bank.check_fits(x)?;
    let per_filter = exec::map_ordered(bank.filters(), |f| {
        filter_energy_and_gradient(x, f, boundary)
    });
    let mut energy = 0.0;
    let mut grad = vec![0.0; x.len()];
    for term in per_filter {
        let (e, g) = term?;
        energy += e;
        grad.iter_mut().zip(g.data()).for_each(|(a, b)| *a += b);
    }
    Ok((energy, ImageF::from_raw(x.width(), x.height(), grad)))
}
