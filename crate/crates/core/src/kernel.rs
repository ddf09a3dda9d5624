//! Kernel shapes and Nadaraya-Watson weight rows.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Scaled kernel values below this are flushed to exact zero, so positivity
/// tests on compact-support kernels are never decided by denormals.
pub const KERNEL_ZERO_THRESHOLD: f64 = 1e-300;

/// Symmetric second-order kernel shapes. Every shape has `K(0) > 0` and is
/// positive on the open interval `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `K(t) = 1/2` on `|t| <= 1`.
    Uniform,
    /// `K(t) = 3/4 (1 - t^2)` on `|t| < 1`.
    Epanechnikov,
    /// `K(t) = 1 - |t|` on `|t| < 1`.
    Triangular,
    /// Standard normal density; positive everywhere.
    Gaussian,
}

impl Kernel {
    pub const ALL: [Kernel; 4] = [
        Kernel::Uniform,
        Kernel::Epanechnikov,
        Kernel::Triangular,
        Kernel::Gaussian,
    ];

    /// Unscaled kernel `K(t)`.
    pub fn eval(self, t: f64) -> f64 {
        let a = t.abs();
        match self {
            Kernel::Uniform => {
                if a <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            Kernel::Epanechnikov => {
                if a < 1.0 {
                    0.75 * (1.0 - t * t)
                } else {
                    0.0
                }
            }
            Kernel::Triangular => {
                if a < 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
            Kernel::Gaussian => (-0.5 * t * t).exp() / (2.0 * PI).sqrt(),
        }
    }

    pub fn has_compact_support(self) -> bool {
        !matches!(self, Kernel::Gaussian)
    }

    /// `K_h(t) = K(t / h) / h`, flushed to zero below [`KERNEL_ZERO_THRESHOLD`].
    pub fn eval_scaled(self, t: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) || !h.is_finite() {
            return domain(format!("bandwidth must be positive and finite, got {h}"));
        }
        Ok(self.scaled_unchecked(t, h))
    }

    #[inline]
    pub(crate) fn scaled_unchecked(self, t: f64, h: f64) -> f64 {
        let k = self.eval(t / h) / h;
        if k < KERNEL_ZERO_THRESHOLD {
            0.0
        } else {
            k
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Uniform => "uniform",
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Triangular => "triangular",
            Kernel::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Kernel::Uniform),
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            "triangular" => Ok(Kernel::Triangular),
            "gaussian" => Ok(Kernel::Gaussian),
            other => Err(Error::Parse(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Nadaraya-Watson weights of observation `i` against every sample point:
/// `K_h(x_i - x_k) / sum_k K_h(x_i - x_k)`.
///
/// The denominator is positive because the self-weight `K(0) / h` is.
pub fn weight_row(kernel: Kernel, x: &[f64], i: usize, h: f64) -> Result<Vec<f64>> {
    if i >= x.len() {
        return Err(Error::Dimension(format!(
            "row index {i} out of range for {} points",
            x.len()
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return domain(format!("bandwidth at index {i} must be positive, got {h}"));
    }
    let mut row = vec![0.0; x.len()];
    fill_weight_row(kernel, x, x[i], h, &mut row);
    Ok(row)
}

/// Writes normalized weights of a query location `at` into `out` and returns
/// the unnormalized kernel mass. `out` is left all-zero when the mass is zero.
pub(crate) fn fill_weight_row(kernel: Kernel, x: &[f64], at: f64, h: f64, out: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (w, &xk) in out.iter_mut().zip(x) {
        *w = kernel.scaled_unchecked(at - xk, h);
        total += *w;
    }
    if total > 0.0 {
        for w in out.iter_mut() {
            *w /= total;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn uniform_scaled_at_zero() {
        assert_eq!(Kernel::Uniform.eval_scaled(0.0, 2.0).unwrap(), 0.25);
    }

    #[test]
    fn epanechnikov_half() {
        assert_abs_diff_eq!(
            Kernel::Epanechnikov.eval_scaled(0.5, 1.0).unwrap(),
            0.75 * (1.0 - 0.25),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(Kernel::Epanechnikov.eval(0.5), 0.5625, epsilon = 1e-15);
    }

    #[test]
    fn positive_at_origin_and_symmetric() {
        for k in Kernel::ALL {
            assert!(k.eval_scaled(0.0, 1.0).unwrap() > 0.0, "{k}");
            for t in [0.1, 0.5, 0.99, 1.0, 1.5, 3.0] {
                assert_eq!(k.eval(t), k.eval(-t), "{k} at {t}");
            }
        }
    }

    #[test]
    fn compact_support_vanishes_outside() {
        for k in Kernel::ALL.into_iter().filter(|k| k.has_compact_support()) {
            for t in [1.0 + 1e-12, 1.5, 10.0] {
                assert_eq!(k.eval(t), 0.0, "{k} at {t}");
            }
            assert!(k.eval(0.999) > 0.0);
        }
        assert_eq!(Kernel::Epanechnikov.eval(1.0), 0.0);
        assert_eq!(Kernel::Triangular.eval(1.0), 0.0);
        assert!(Kernel::Gaussian.eval(8.0) > 0.0);
    }

    #[test]
    fn nonpositive_bandwidth_rejected() {
        assert!(Kernel::Gaussian.eval_scaled(0.0, 0.0).is_err());
        assert!(Kernel::Gaussian.eval_scaled(0.0, -1.0).is_err());
        assert!(Kernel::Gaussian.eval_scaled(0.0, f64::NAN).is_err());
        assert!(weight_row(Kernel::Gaussian, &[0.0, 1.0], 0, 0.0).is_err());
    }

    #[test]
    fn denormal_flush() {
        // exp(-t^2/2) at t = 38 is ~1e-314: a denormal that must read as zero.
        assert_eq!(Kernel::Gaussian.eval_scaled(38.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn uniform_row_example() {
        let row = weight_row(Kernel::Uniform, &[0.0, 0.5, 2.0], 0, 1.0).unwrap();
        assert_eq!(row, vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn wide_uniform_gives_equal_weights() {
        let x = [0.3, -1.2, 4.0, 2.2, 0.0];
        let row = weight_row(Kernel::Uniform, &x, 2, 100.0).unwrap();
        for w in row {
            assert_abs_diff_eq!(w, 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_point() {
        for k in Kernel::ALL {
            assert_eq!(weight_row(k, &[3.0], 0, 0.1).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn ties_share_weight() {
        let row = weight_row(Kernel::Epanechnikov, &[1.0, 1.0, 1.2], 0, 0.5).unwrap();
        assert_eq!(row[0], row[1]);
    }

    #[test]
    fn parse_names() {
        for k in Kernel::ALL {
            assert_eq!(k.name().parse::<Kernel>().unwrap(), k);
        }
        assert!("cosine".parse::<Kernel>().is_err());
    }

    fn kernel_strategy() -> impl Strategy<Value = Kernel> {
        prop::sample::select(Kernel::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn rows_are_probability_vectors(
            kernel in kernel_strategy(),
            x in prop::collection::vec(-5.0f64..5.0, 1..40),
            h in 0.01f64..3.0,
            pick in any::<prop::sample::Index>(),
        ) {
            let i = pick.index(x.len());
            let row = weight_row(kernel, &x, i, h).unwrap();
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(row.iter().all(|&w| w >= 0.0));
            prop_assert!(row[i] > 0.0);
        }

        #[test]
        fn gaussian_rows_strictly_positive(
            x in prop::collection::vec(-3.0f64..3.0, 1..30),
            h in 0.2f64..3.0,
        ) {
            for i in 0..x.len() {
                let row = weight_row(Kernel::Gaussian, &x, i, h).unwrap();
                prop_assert!(row.iter().all(|&w| w > 0.0));
            }
        }

        #[test]
        fn permutation_equivariance(
            kernel in kernel_strategy(),
            x in prop::collection::vec(-5.0f64..5.0, 2..25),
            h in 0.05f64..2.0,
            seed in any::<u64>(),
        ) {
            // Rotation by a seed-dependent offset is enough to exercise relabelling.
            let n = x.len();
            let shift = (seed as usize) % n;
            let perm: Vec<usize> = (0..n).map(|j| (j + shift) % n).collect();
            let xp: Vec<f64> = perm.iter().map(|&j| x[j]).collect();
            for i in 0..n {
                let row = weight_row(kernel, &x, perm[i], h).unwrap();
                let row_p = weight_row(kernel, &xp, i, h).unwrap();
                for j in 0..n {
                    prop_assert!((row_p[j] - row[perm[j]]).abs() <= 1e-14);
                }
            }
        }
    }
}
