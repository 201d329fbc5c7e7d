//! Inertial gradient minimization with Lipschitz backtracking.
//!
//! For a smooth objective `f` the iteration is
//!
//! ```text
//! x_{k+1} = x_k - alpha_k grad f(x_k) + beta (x_k - x_{k-1}),   x_{-1} = x_0
//! alpha_k = 2 (1 - beta) c / L_k,                                c = 0.99
//! ```
//!
//! where `L_k` is the smallest value of `l_shrink * L_{k-1} * l_grow^m`
//! satisfying the descent surrogate
//! `f(x_{k+1}) <= f(x_k) + <grad f(x_k), x_{k+1} - x_k> + L_k/2 |x_{k+1} - x_k|^2`.
//! The nonsmooth part of the general scheme is absent, so the proximal map
//! is the identity; a constrained variant would project `x_{k+1}` here.

use std::io::Write;
use std::time::Instant;

use crate::error::{contract, Error, Result};

/// Step-size safety factor applied to the admissible bound `2 (1 - beta) / L`.
pub const STEP_SAFETY: f64 = 0.99;
/// Maximum number of `l_grow` multiplications within one iteration.
pub const MAX_BACKTRACKS: usize = 60;

/// A differentiable objective over flat vectors.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Inertial weight in `[0, 1)`.
    pub beta: f64,
    pub l_init: f64,
    pub l_grow: f64,
    pub l_shrink: f64,
    pub max_iters: usize,
    /// Stop once the gradient max-norm at the new iterate is at most this.
    pub grad_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            beta: 0.8,
            l_init: 1.0,
            l_grow: 2.0,
            l_shrink: 0.9,
            max_iters: 200,
            grad_tol: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        contract!(
            (0.0..1.0).contains(&self.beta),
            "beta must lie in [0, 1), got {}",
            self.beta
        );
        contract!(
            self.l_init > 0.0 && self.l_init.is_finite(),
            "l_init must be positive"
        );
        contract!(self.l_grow > 1.0, "l_grow must exceed 1");
        contract!(
            self.l_shrink > 0.0 && self.l_shrink <= 1.0,
            "l_shrink must lie in (0, 1]"
        );
        contract!(self.max_iters >= 1, "max_iters must be at least 1");
        contract!(
            self.grad_tol >= 0.0 && !self.grad_tol.is_nan(),
            "grad_tol must be non-negative"
        );
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based index of the completed iteration.
    pub iter: usize,
    /// Objective at the new iterate.
    pub energy: f64,
    /// Gradient max-norm at the new iterate.
    pub grad_inf: f64,
    pub alpha: f64,
    pub lipschitz: f64,
    pub backtracks: usize,
    /// Right-hand side of the accepted surrogate inequality.
    pub surrogate_bound: f64,
    /// Wall time since the start of the run.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    /// Objective at the starting point.
    pub initial_energy: f64,
    pub records: Vec<IterationRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.energy)
    }

    /// First iteration whose energy is at most `target`.
    pub fn first_reaching(&self, target: f64) -> Option<usize> {
        self.records.iter().find(|r| r.energy <= target).map(|r| r.iter)
    }

    /// CSV with columns `iter,energy,grad_inf,alpha,backtracks,seconds`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["iter", "energy", "grad_inf", "alpha", "backtracks", "seconds"])
            .map_err(io)?;
        for r in &self.records {
            w.write_record([
                r.iter.to_string(),
                format!("{:.17e}", r.energy),
                format!("{:.17e}", r.grad_inf),
                format!("{:.17e}", r.alpha),
                r.backtracks.to_string(),
                format!("{:.6}", r.seconds),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Minimized {
    /// Lowest-energy point visited, including the starting point.
    pub x: Vec<f64>,
    pub energy: f64,
    /// Iteration that produced `x`; 0 when no iterate beat the start.
    pub best_iter: usize,
    pub trace: Trace,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, g| m.max(g.abs()))
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|g| g.is_finite())
}

/// Inertial minimization of `objective` from `x0`.
pub fn minimize<O: Objective + ?Sized>(
    objective: &O,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Minimized> {
    cfg.validate()?;
    contract!(all_finite(x0), "starting point must be finite");
    let start = Instant::now();

    let (mut f, mut g) = objective.value_and_gradient(x0);
    let mut trace = Trace {
        initial_energy: f,
        records: Vec::with_capacity(cfg.max_iters),
    };
    if !f.is_finite() || !all_finite(&g) {
        let what = if f.is_finite() { "gradient" } else { "energy" };
        return Err(Error::Divergence {
            iteration: 0,
            what,
            trace,
        });
    }

    let n = x0.len();
    let mut x = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let mut trial = vec![0.0; n];
    let mut best = (f, x.clone(), 0);
    let mut lipschitz = cfg.l_init;

    for iter in 1..=cfg.max_iters {
        let mut l = if iter == 1 {
            cfg.l_init
        } else {
            cfg.l_shrink * lipschitz
        };
        let mut backtracks = 0;
        let (alpha, f_trial, bound) = loop {
            let alpha = 2.0 * (1.0 - cfg.beta) * STEP_SAFETY / l;
            let mut lin = 0.0;
            let mut sq = 0.0;
            for i in 0..n {
                trial[i] = x[i] - alpha * g[i] + cfg.beta * (x[i] - x_prev[i]);
                let d = trial[i] - x[i];
                lin += g[i] * d;
                sq += d * d;
            }
            let f_trial = objective.value(&trial);
            let bound = f + lin + 0.5 * l * sq;
            // a non-finite trial value fails the comparison and backtracks
            if f_trial <= bound {
                break (alpha, f_trial, bound);
            }
            if backtracks == MAX_BACKTRACKS {
                return Err(Error::Stall {
                    iteration: iter,
                    backtracks,
                    trace,
                });
            }
            l *= cfg.l_grow;
            backtracks += 1;
        };
        lipschitz = l;

        std::mem::swap(&mut x_prev, &mut x);
        std::mem::swap(&mut x, &mut trial);
        f = f_trial;
        g = objective.gradient(&x);
        if !all_finite(&g) {
            return Err(Error::Divergence {
                iteration: iter,
                what: "gradient",
                trace,
            });
        }
        let grad_inf = max_abs(&g);
        trace.records.push(IterationRecord {
            iter,
            energy: f,
            grad_inf,
            alpha,
            lipschitz: l,
            backtracks,
            surrogate_bound: bound,
            seconds: start.elapsed().as_secs_f64(),
        });
        if f < best.0 {
            best = (f, x.clone(), iter);
        }
        if grad_inf <= cfg.grad_tol {
            break;
        }
    }

    let (energy, x, best_iter) = best;
    Ok(Minimized {
        x,
        energy,
        best_iter,
        trace,
    })
}

/// The non-inertial special case (`beta = 0`) with identical backtracking.
pub fn gradient_descent<O: Objective + ?Sized>(
    objective: &O,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Minimized> {
    minimize(objective, x0, &OptimizerConfig { beta: 0.0, ..*cfg })
}
