//! Backfitting estimators for `Y = alpha + m1(U) + m2(V) + eps`.
//!
//! The fitted components at the sample points solve the normal equations
//!
//! ```text
//! m1 = S1* (y - m2)
//! m2 = S2* (y - m1)
//! ```
//!
//! either by alternating the two updates ([`backfit_iterative`]) or by one
//! dense solve of `(I - S2* S1*) m2 = S2* (I - S1*) y` ([`backfit_direct`]).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bandwidth::BandwidthSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{fill_weight_row, Kernel};
use crate::linalg::inverse_with_condition;
use crate::smoother::SmootherPair;

/// Direct solves refuse systems whose 1-norm condition number exceeds this.
pub const MAX_CONDITION: f64 = 1e12;

/// Order of the two component updates within one backfitting sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    /// `m1` is updated first and the fresh `m1` feeds the `m2` update.
    #[default]
    GaussSeidel,
    /// Both updates use the previous sweep's values.
    Jacobi,
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-seidel" => Ok(Sweep::GaussSeidel),
            "jacobi" => Ok(Sweep::Jacobi),
            _ => Err(Error::Parse(format!("unknown sweep `{s}` (gauss-seidel|jacobi)"))),
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sweep::GaussSeidel => "gauss-seidel",
            Sweep::Jacobi => "jacobi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Iterative,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterativeOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub sweep: Sweep,
}

impl IterativeOptions {
    /// `tol = 1e-10`, `max_iter = 10 n + 1000`, Gauss-Seidel sweeps.
    pub fn for_size(n: usize) -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10 * n + 1000,
            sweep: Sweep::GaussSeidel,
        }
    }

    pub fn with_sweep(mut self, sweep: Sweep) -> Self {
        self.sweep = sweep;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_hat: f64,
    pub m1_hat: Vec<f64>,
    pub m2_hat: Vec<f64>,
    pub method: FitMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<Sweep>,
    /// Number of sweeps; 0 for the direct solve.
    pub iterations: usize,
    /// Largest sup-norm component update in the last sweep.
    pub final_delta: f64,
    /// `||m1 - S1*(y - m2)||_inf + ||m2 - S2*(y - m1)||_inf`.
    pub residual_normal_eq: f64,
    /// Condition estimate of `I - S2* S1*` (direct solve only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub condition: Option<f64>,
    /// Per-sweep deltas of the iterative method.
    #[serde(skip)]
    pub delta_history: Vec<f64>,
}

impl FitResult {
    /// In-sample fitted values `alpha + m1_i + m2_i`.
    pub fn fitted(&self) -> Vec<f64> {
        self.m1_hat
            .iter()
            .zip(&self.m2_hat)
            .map(|(a, b)| self.alpha_hat + a + b)
            .collect()
    }

    pub fn residuals(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.m1_hat)
            .zip(&self.m2_hat)
            .map(|((y, a), b)| y - self.alpha_hat - a - b)
            .collect()
    }
}

fn check_dims(pair: &SmootherPair, y: &[f64]) -> Result<DVector<f64>> {
    if y.len() != pair.n() {
        return Err(Error::Dimension(format!(
            "response has {} entries but smoothers are {}x{}",
            y.len(),
            pair.n(),
            pair.n()
        )));
    }
    Ok(DVector::from_column_slice(y))
}

fn sup_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sum of the sup-norm violations of the two normal equations.
pub fn normal_equation_residual(pair: &SmootherPair, y: &[f64], m1: &[f64], m2: &[f64]) -> f64 {
    let y = DVector::from_column_slice(y);
    let m1 = DVector::from_column_slice(m1);
    let m2 = DVector::from_column_slice(m2);
    let r1 = sup_diff(&m1, &(&pair.s1_star * (&y - &m2)));
    let r2 = sup_diff(&m2, &(&pair.s2_star * (&y - &m1)));
    r1 + r2
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

/// Alternates `m1 <- S1*(y - m2)` and `m2 <- S2*(y - m1)` from zero until the
/// largest update falls to `tol`.
pub fn backfit_iterative(pair: &SmootherPair, y: &[f64], opts: IterativeOptions) -> Result<FitResult> {
    let yv = check_dims(pair, y)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let n = pair.n();
    let mut m1 = DVector::zeros(n);
    let mut m2 = DVector::zeros(n);
    let mut history = Vec::new();
    let mut delta = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let m1_new = &pair.s1_star * (&yv - &m2);
        let m2_new = match opts.sweep {
            Sweep::GaussSeidel => &pair.s2_star * (&yv - &m1_new),
            Sweep::Jacobi => &pair.s2_star * (&yv - &m1),
        };
        delta = sup_diff(&m1_new, &m1).max(sup_diff(&m2_new, &m2));
        m1 = m1_new;
        m2 = m2_new;
        history.push(delta);
        if !delta.is_finite() {
            break;
        }
        if delta <= opts.tol {
            let (m1_hat, m2_hat) = (m1.as_slice().to_vec(), m2.as_slice().to_vec());
            let residual_normal_eq = normal_equation_residual(pair, y, &m1_hat, &m2_hat);
            return Ok(FitResult {
                alpha_hat: mean(y),
                m1_hat,
                m2_hat,
                method: FitMethod::Iterative,
                sweep: Some(opts.sweep),
                iterations: it,
                final_delta: delta,
                residual_normal_eq,
                condition: None,
                delta_history: history,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: history.len(),
        last_delta: delta,
    })
}

/// Solves the normal equations in one step: `m2` from the
/// `(I - S2* S1*)` system, then `m1 = S1*(y - m2)`.
pub fn backfit_direct(pair: &SmootherPair, y: &[f64]) -> Result<FitResult> {
    let yv = check_dims(pair, y)?;
    let n = pair.n();
    let system = DMatrix::identity(n, n) - &pair.s2_star * &pair.s1_star;
    let (inv, cond) = inverse_with_condition(&system);
    let inv = match inv {
        Some(inv) if cond <= MAX_CONDITION => inv,
        _ => return Err(Error::Singular { condition: cond }),
    };
    let rhs = &pair.s2_star * (&yv - &pair.s1_star * &yv);
    let m2 = &inv * rhs;
    let m1 = &pair.s1_star * (&yv - &m2);
    let (m1_hat, m2_hat) = (m1.as_slice().to_vec(), m2.as_slice().to_vec());
    let residual_normal_eq = normal_equation_residual(pair, y, &m1_hat, &m2_hat);
    Ok(FitResult {
        alpha_hat: mean(y),
        m1_hat,
        m2_hat,
        method: FitMethod::Direct,
        sweep: None,
        iterations: 0,
        final_delta: 0.0,
        residual_normal_eq,
        condition: Some(cond),
        delta_history: Vec::new(),
    })
}

/// The two textbook closed forms
/// `m1 = S1* (I - S2* S1*)^-1 (I - S2*) y` and
/// `m2 = (I - S2* S1*)^-1 S2* (I - S1*) y`,
/// evaluated independently of [`backfit_direct`] as a cross-check.
pub fn closed_form_components(pair: &SmootherPair, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let yv = check_dims(pair, y)?;
    let n = pair.n();
    let eye = DMatrix::<f64>::identity(n, n);
    let system = &eye - &pair.s2_star * &pair.s1_star;
    let inv = system
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { condition: f64::INFINITY })?;
    let m1 = &pair.s1_star * (&inv * ((&eye - &pair.s2_star) * &yv));
    let m2 = &inv * (&pair.s2_star * ((&eye - &pair.s1_star) * &yv));
    Ok((m1.as_slice().to_vec(), m2.as_slice().to_vec()))
}

fn query_bandwidth(x: &[f64], at: f64, bw: &BandwidthSpec) -> Result<f64> {
    if let Some(h) = bw.constant() {
        return Ok(h);
    }
    let realized = bw.realize(x)?;
    let nearest = (0..x.len())
        .min_by(|&a, &b| (x[a] - at).abs().total_cmp(&(x[b] - at).abs()))
        .ok_or_else(|| Error::Dimension("empty sample".into()))?;
    Ok(realized[nearest])
}

/// Out-of-sample prediction `alpha + sum_k l_k(u) m1_k + sum_k w_k(v) m2_k`,
/// where `l(u)` and `w(v)` are Nadaraya-Watson weights at the query point.
/// Varying bandwidths use the bandwidth of the nearest sample point.
pub fn predict(
    data: &Dataset,
    fit: &FitResult,
    at: (f64, f64),
    kernel: Kernel,
    bw_u: &BandwidthSpec,
    bw_v: &BandwidthSpec,
) -> Result<f64> {
    let n = data.len();
    if fit.m1_hat.len() != n || fit.m2_hat.len() != n {
        return Err(Error::Dimension(format!(
            "fit has {} components for a dataset of {n}",
            fit.m1_hat.len()
        )));
    }
    let (u, v) = at;
    let hu = query_bandwidth(data.u(), u, bw_u)?;
    let hv = query_bandwidth(data.v(), v, bw_v)?;
    let mut w = vec![0.0; n];
    let mass_u = fill_weight_row(kernel, data.u(), u, hu, &mut w);
    let part_u: f64 = w.iter().zip(&fit.m1_hat).map(|(a, b)| a * b).sum();
    let mass_v = fill_weight_row(kernel, data.v(), v, hv, &mut w);
    let part_v: f64 = w.iter().zip(&fit.m2_hat).map(|(a, b)| a * b).sum();
    if !(mass_u > 0.0 && mass_v > 0.0) {
        return Err(Error::ZeroKernelMass { u, v });
    }
    Ok(fit.alpha_hat + part_u + part_v)
}
