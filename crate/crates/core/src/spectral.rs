//! Convergence certification for kernel backfitting.
//!
//! Three layers of evidence are collected for a smoother pair:
//!
//! 1. Adjacent-gap positivity: for every order statistic `x_(i)` the kernel,
//!    at that point's bandwidth, is positive at the distance to each sorted
//!    neighbour. This chains all points together, so the smoother's
//!    transition graph is strongly connected, and the positive diagonal
//!    (`K(0) > 0`) makes it aperiodic.
//! 2. Markov regularity of `S1` and `S2`, checked on the graph of positive
//!    entries. A regular stochastic matrix has a simple eigenvalue 1 with
//!    eigenvector `1/sqrt(n)` and every other eigenvalue inside the unit disk.
//!    Centering moves that eigenvalue to 0 and keeps the rest.
//! 3. The spectral radius of `S2* S1*`, computed directly. It is the operative
//!    test: `rho(S2* S1*) < 1` makes `I - S2* S1*` invertible and the
//!    alternating iteration contractive.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bandwidth::{sort_permutation, BandwidthSpec};
use crate::data::Dataset;
use crate::error::{domain, Result};
use crate::kernel::Kernel;
use crate::linalg::{eigenvalues, inverse_with_condition, transition_eigenvalues};
use crate::smoother::SmootherPair;

/// Spectral radii must clear 1 by this margin to count as certified.
pub const CERTIFICATE_MARGIN: f64 = 1e-8;

/// Row sums of a stochastic matrix must be within this of 1.
pub const STOCHASTIC_TOL: f64 = 1e-10;
/// Eigenvalues closer than this count as one repeated eigenvalue. The unit
/// eigenvalue of a stochastic matrix is semisimple, so a genuine repeat shows
/// up at rounding level rather than split by `sqrt(eps)`.
pub const EIGEN_COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    U,
    V,
}

/// Outcome of the adjacent-gap conditions on one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub coordinate: Coordinate,
    /// `x_(i+1) - x_(i)` for the sorted sample.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub condition_holds: bool,
    /// Order-statistic positions (0-based) whose kernel vanishes at a
    /// neighbouring gap.
    pub failing_indices: Vec<usize>,
}

/// Evaluates `K_{h_(i)}(x_(i) - x_(i-1)) > 0` and `K_{h_(i)}(x_(i) - x_(i+1)) > 0`
/// at every order statistic that has the corresponding neighbour.
pub fn check_gap_conditions(
    coordinate: Coordinate,
    x: &[f64],
    kernel: Kernel,
    bw: &BandwidthSpec,
) -> Result<GapReport> {
    let n = x.len();
    if n < 2 {
        return domain(format!("gap conditions need n >= 2, got {n}"));
    }
    let h = bw.realize(x)?;
    let order = sort_permutation(x);
    let sorted: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);

    let mut failing_indices = Vec::new();
    for p in 0..n {
        let hp = h[order[p]];
        let left_ok = p == 0 || kernel.scaled_unchecked(sorted[p] - sorted[p - 1], hp) > 0.0;
        let right_ok = p + 1 == n || kernel.scaled_unchecked(sorted[p] - sorted[p + 1], hp) > 0.0;
        if !(left_ok && right_ok) {
            failing_indices.push(p);
        }
    }
    Ok(GapReport {
        coordinate,
        gaps,
        max_gap,
        condition_holds: failing_indices.is_empty(),
        failing_indices,
    })
}

/// Maximum adjacent difference of the sorted values.
pub fn max_gap(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn ensure_stochastic(s: &DMatrix<f64>) -> Result<()> {
    if !s.is_square() {
        return domain(format!("transition matrix must be square, got {:?}", s.shape()));
    }
    for (i, row) in s.row_iter().enumerate() {
        if let Some(v) = row.iter().find(|v| !(**v >= 0.0)) {
            return domain(format!("row {i} has a negative or NaN entry {v}"));
        }
        let sum = row.sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return domain(format!("row {i} sums to {sum}, not 1"));
        }
    }
    Ok(())
}

/// Communication structure of a finite Markov chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStructure {
    pub irreducible: bool,
    /// Period of the chain; only defined when irreducible.
    pub period: Option<usize>,
    pub positive_diagonal: bool,
}

impl ChainStructure {
    pub fn is_regular(&self) -> bool {
        self.irreducible && self.period == Some(1)
    }
}

/// Strong connectivity and period of the directed graph `i -> j` on `s[i][j] > 0`.
pub fn chain_structure(s: &DMatrix<f64>) -> Result<ChainStructure> {
    ensure_stochastic(s)?;
    let n = s.nrows();
    let positive_diagonal = (0..n).all(|i| s[(i, i)] > 0.0);
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| s[(i, j)] > 0.0).collect())
        .collect();
    let mut pred = vec![Vec::new(); n];
    for (i, out) in succ.iter().enumerate() {
        for &j in out {
            pred[j].push(i);
        }
    }
    if n == 0 {
        return Ok(ChainStructure {
            irreducible: false,
            period: None,
            positive_diagonal,
        });
    }
    let level = bfs_levels(&succ);
    let irreducible = level.iter().all(Option::is_some) && bfs_levels(&pred).iter().all(Option::is_some);
    if !irreducible {
        return Ok(ChainStructure {
            irreducible,
            period: None,
            positive_diagonal,
        });
    }
    let period = if positive_diagonal {
        1
    } else {
        // The period is the gcd of level[i] + 1 - level[j] over all edges.
        let mut g = 0usize;
        for (i, out) in succ.iter().enumerate() {
            let li = level[i].unwrap() as i64;
            for &j in out {
                let d = (li + 1 - level[j].unwrap() as i64).unsigned_abs() as usize;
                g = gcd(g, d);
            }
        }
        g
    };
    Ok(ChainStructure {
        irreducible,
        period: Some(period),
        positive_diagonal,
    })
}

fn bfs_levels(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    level[0] = Some(0);
    while let Some(i) = queue.pop_front() {
        let next = level[i].unwrap() + 1;
        for &j in &adj[i] {
            if level[j].is_none() {
                level[j] = Some(next);
                queue.push_back(j);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// True iff the chain with transition matrix `s` is irreducible and aperiodic.
pub fn check_regularity(s: &DMatrix<f64>) -> Result<bool> {
    Ok(chain_structure(s)?.is_regular())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralMethod {
    /// Full eigenvalue set from the real Schur form.
    Dense,
    /// Dominant-modulus estimate by iterating the matrix on a two-vector block.
    PowerIteration { tol: f64, max_iter: usize },
}

impl SpectralMethod {
    pub fn power_default() -> Self {
        SpectralMethod::PowerIteration {
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRadius {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn spectral_radius(m: &DMatrix<f64>, method: SpectralMethod) -> Result<SpectralRadius> {
    if !m.is_square() {
        return domain(format!("spectral radius needs a square matrix, got {:?}", m.shape()));
    }
    Ok(match method {
        SpectralMethod::Dense => SpectralRadius {
            value: dense_radius(m),
            converged: true,
            iterations: 0,
        },
        SpectralMethod::PowerIteration { tol, max_iter } => power_radius(m, tol, max_iter),
    })
}

fn dense_radius(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).iter().map(|e| e.norm()).fold(0.0, f64::max)
}

fn start_vector(n: usize) -> DVector<f64> {
    // Deterministic, non-constant and sign-varying so it is not annihilated by
    // centered smoothers (whose kernel contains the constant vector).
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let v = DVector::from_fn(n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    let norm = v.norm();
    v / norm
}

/// Power iteration that tracks the pair `(x, Mx, M^2 x)`. A real dominant
/// eigenvalue shows up as convergence of `||Mx||`; a complex-conjugate (or
/// `+-lambda`) dominant pair is resolved from the two-term recurrence
/// `M^2 x = a Mx + b x` fitted in the Krylov block.
fn power_radius(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> SpectralRadius {
    let n = m.nrows();
    if n == 0 {
        return SpectralRadius {
            value: 0.0,
            converged: true,
            iterations: 0,
        };
    }
    let mut x = start_vector(n);
    let mut prev_ratio = f64::NAN;
    let mut prev_pair = f64::NAN;
    let mut stable_ratio = 0;
    let mut stable_pair = 0;
    let mut last = 0.0;
    for it in 1..=max_iter {
        let y = m * &x;
        let ny = y.norm();
        if ny == 0.0 {
            return SpectralRadius {
                value: 0.0,
                converged: true,
                iterations: it,
            };
        }
        let z = m * &y;

        let ratio = ny;
        if (ratio - prev_ratio).abs() <= tol * ratio {
            stable_ratio += 1;
        } else {
            stable_ratio = 0;
        }
        prev_ratio = ratio;
        last = ratio;
        if stable_ratio >= 3 {
            return SpectralRadius {
                value: ratio,
                converged: true,
                iterations: it,
            };
        }

        // x is unit-norm; solve the 2x2 least-squares fit z ~ a y + b x.
        let (yy, xy, xx) = (y.dot(&y), x.dot(&y), 1.0);
        let det = yy * xx - xy * xy;
        if det > 1e-8 * yy {
            let (zy, zx) = (z.dot(&y), z.dot(&x));
            let a = (zy * xx - zx * xy) / det;
            let b = (yy * zx - xy * zy) / det;
            let resid = (&z - &y * a - &x * b).norm();
            let disc = a * a + 4.0 * b;
            let pair = if disc >= 0.0 {
                let r = disc.sqrt();
                ((a + r) / 2.0).abs().max(((a - r) / 2.0).abs())
            } else {
                (-b).sqrt()
            };
            if (pair - prev_pair).abs() <= tol * pair && resid <= tol.sqrt() * z.norm().max(f64::MIN_POSITIVE) {
                stable_pair += 1;
            } else {
                stable_pair = 0;
            }
            prev_pair = pair;
            if stable_pair >= 3 {
                return SpectralRadius {
                    value: pair,
                    converged: true,
                    iterations: it,
                };
            }
        } else {
            stable_pair = 0;
            prev_pair = f64::NAN;
        }
        x = y / ny;
    }
    SpectralRadius {
        value: last,
        converged: false,
        iterations: max_iter,
    }
}

/// Leading eigenvalue of the (uncentered) smoother `S1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopEigenvalue {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// No other eigenvalue lies within [`EIGEN_COINCIDENCE_TOL`] of it.
    pub simple: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub rho_s1_star: f64,
    pub rho_s2_star: f64,
    /// Spectral radius of `S2* S1*`.
    pub rho_product: f64,
    pub top_eigenvalue_s1: TopEigenvalue,
    /// `||S1 theta - theta||_2` with `theta = 1/sqrt(n)`.
    pub perron_vector_check: f64,
    pub method: SpectralMethod,
    /// Total power iterations spent (0 for the dense method).
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Gap conditions hold on both coordinates and the computed radius confirms.
    CertifiedByTheorem1,
    /// Gap conditions fail but `rho(S2* S1*) < 1 - margin` anyway.
    CertifiedBySpectralRadius,
    NotCertified,
}

impl Verdict {
    pub fn is_certified(self) -> bool {
        self != Verdict::NotCertified
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::CertifiedByTheorem1 => "certified (adjacent-gap conditions)",
            Verdict::CertifiedBySpectralRadius => "certified (spectral radius)",
            Verdict::NotCertified => "not certified",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub gap_u: GapReport,
    pub gap_v: GapReport,
    pub regular_s1: bool,
    pub regular_s2: bool,
    pub spectral: SpectralReport,
    pub verdict: Verdict,
    pub notes: String,
}

/// Spectral radius of `center(s)` for a stochastic `s` with eigenvalues `ev`.
/// Centering is a rank-one update that sends the unit eigenvalue to 0 and
/// keeps the others, so no second decomposition is needed.
fn centered_radius(ev: &[Complex<f64>]) -> f64 {
    let unit = ev
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).norm().total_cmp(&(b.1 - 1.0).norm()))
        .map(|(k, _)| k);
    ev.iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != unit)
        .map(|(_, e)| e.norm())
        .fold(0.0, f64::max)
}

pub fn spectral_report(pair: &SmootherPair, method: SpectralMethod) -> Result<SpectralReport> {
    let n = pair.n();
    let product = &pair.s2_star * &pair.s1_star;
    let mut iterations = 0;
    let mut used = method;
    let mut radius = |m: &DMatrix<f64>| -> Result<f64> {
        let r = spectral_radius(m, used)?;
        iterations += r.iterations;
        if r.converged {
            Ok(r.value)
        } else {
            // Fall back for this and all remaining matrices.
            used = SpectralMethod::Dense;
            Ok(dense_radius(m))
        }
    };
    let ev = transition_eigenvalues(&pair.s1);
    let dense = matches!(method, SpectralMethod::Dense);
    let (rho_s1_star, rho_s2_star) =
        if dense && ensure_stochastic(&pair.s1).is_ok() && ensure_stochastic(&pair.s2).is_ok() {
            (centered_radius(&ev), centered_radius(&transition_eigenvalues(&pair.s2)))
        } else {
            (radius(&pair.s1_star)?, radius(&pair.s2_star)?)
        };
    let rho_product = radius(&product)?;

    let top = ev
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)))
        .unwrap_or_default();
    let simple = ev.iter().filter(|e| (*e - top).norm() < EIGEN_COINCIDENCE_TOL).count() == 1;
    let theta = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let perron_vector_check = (&pair.s1 * &theta - &theta).norm();

    Ok(SpectralReport {
        rho_s1_star,
        rho_s2_star,
        rho_product,
        top_eigenvalue_s1: TopEigenvalue {
            re: top.re,
            im: top.im,
            modulus: top.norm(),
            simple,
        },
        perron_vector_check,
        method: used,
        iterations,
    })
}

/// Certifies convergence of backfitting on `pair` with the dense method.
pub fn certify(
    data: &Dataset,
    pair: &SmootherPair,
    kernel: Kernel,
    bw_u: &BandwidthSpec,
    bw_v: &BandwidthSpec,
) -> Result<ConvergenceCertificate> {
    certify_with(data, pair, kernel, bw_u, bw_v, SpectralMethod::Dense)
}

pub fn certify_with(
    data: &Dataset,
    pair: &SmootherPair,
    kernel: Kernel,
    bw_u: &BandwidthSpec,
    bw_v: &BandwidthSpec,
    method: SpectralMethod,
) -> Result<ConvergenceCertificate> {
    if pair.n() != data.len() {
        return Err(crate::Error::Dimension(format!(
            "smoothers are {}x{} but the dataset has {} rows",
            pair.n(),
            pair.n(),
            data.len()
        )));
    }
    let gap_u = check_gap_conditions(Coordinate::U, data.u(), kernel, bw_u)?;
    let gap_v = check_gap_conditions(Coordinate::V, data.v(), kernel, bw_v)?;
    let regular_s1 = check_regularity(&pair.s1)?;
    let regular_s2 = check_regularity(&pair.s2)?;
    let spectral = spectral_report(pair, method)?;

    let gaps_hold = gap_u.condition_holds && gap_v.condition_holds;
    let contractive = spectral.rho_product < 1.0 - CERTIFICATE_MARGIN;
    let mut notes = Vec::new();
    if !gap_u.condition_holds {
        notes.push(format!(
            "U gap condition fails at {} order statistic(s); max gap {:.6e}",
            gap_u.failing_indices.len(),
            gap_u.max_gap
        ));
    }
    if !gap_v.condition_holds {
        notes.push(format!(
            "V gap condition fails at {} order statistic(s); max gap {:.6e}",
            gap_v.failing_indices.len(),
            gap_v.max_gap
        ));
    }
    if spectral.method != method {
        notes.push("power iteration did not converge; fell back to dense eigenvalues".into());
    }
    let verdict = match (gaps_hold, contractive) {
        (true, true) => Verdict::CertifiedByTheorem1,
        (false, true) => Verdict::CertifiedBySpectralRadius,
        (_, false) => {
            let product = &pair.s2_star * &pair.s1_star;
            let system = DMatrix::identity(pair.n(), pair.n()) - product;
            let (_, cond) = inverse_with_condition(&system);
            notes.push(format!(
                "rho(S2* S1*) = {:.12} is not below 1 - {CERTIFICATE_MARGIN:e}; condition estimate of I - S2* S1* is {cond:.3e}",
                spectral.rho_product
            ));
            Verdict::NotCertified
        }
    };
    Ok(ConvergenceCertificate {
        gap_u,
        gap_v,
        regular_s1,
        regular_s2,
        spectral,
        verdict,
        notes: notes.join("; "),
    })
}
