//! Row-stochastic smoother matrices and their centered versions.
//!
//! Row `i` of a smoother holds the Nadaraya-Watson weights of observation `i`,
//! so `S y` is the vector of kernel-smoothed values at the sample points.
//! Rows follow the original observation order. Centering premultiplies by the
//! mean-removal projector `I - 1 1^T / n`, which enforces the in-sample
//! zero-mean constraint on fitted components.

use nalgebra::DMatrix;

use crate::bandwidth::BandwidthSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{fill_weight_row, Kernel};

/// Builds the n x n smoother whose row `i` is `weight_row(kernel, x, i, h_i)`.
pub fn build_smoother(x: &[f64], kernel: Kernel, bw: &BandwidthSpec) -> Result<DMatrix<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Dimension(format!("smoother needs n >= 2, got {n}")));
    }
    let h = bw.realize(x)?;
    let mut s = DMatrix::zeros(n, n);
    let mut row = vec![0.0; n];
    for i in 0..n {
        fill_weight_row(kernel, x, x[i], h[i], &mut row);
        for (j, &w) in row.iter().enumerate() {
            s[(i, j)] = w;
        }
    }
    Ok(s)
}

/// `(I - 1 1^T / n) s`: subtracts the column-mean row from every row.
pub fn center(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let mut out = s.clone();
    if n == 0 {
        return out;
    }
    for j in 0..s.ncols() {
        let mean = s.column(j).sum() / n as f64;
        for i in 0..n {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// The two smoothers of a bivariate additive fit and their centered forms.
#[derive(Debug, Clone)]
pub struct SmootherPair {
    pub s1: DMatrix<f64>,
    pub s2: DMatrix<f64>,
    pub s1_star: DMatrix<f64>,
    pub s2_star: DMatrix<f64>,
}

impl SmootherPair {
    pub fn from_smoothers(s1: DMatrix<f64>, s2: DMatrix<f64>) -> Result<Self> {
        if !s1.is_square() || s1.shape() != s2.shape() {
            return Err(Error::Dimension(format!(
                "smoothers must be square and equal-sized, got {:?} and {:?}",
                s1.shape(),
                s2.shape()
            )));
        }
        let s1_star = center(&s1);
        let s2_star = center(&s2);
        Ok(Self {
            s1,
            s2,
            s1_star,
            s2_star,
        })
    }

    pub fn n(&self) -> usize {
        self.s1.nrows()
    }
}

/// Smoothers on `U` (with `bw_u`) and `V` (with `bw_v`) for one dataset.
pub fn build_pair(
    data: &Dataset,
    kernel: Kernel,
    bw_u: &BandwidthSpec,
    bw_v: &BandwidthSpec,
) -> Result<SmootherPair> {
    let s1 = build_smoother(data.u(), kernel, bw_u)?;
    let s2 = build_smoother(data.v(), kernel, bw_v)?;
    SmootherPair::from_smoothers(s1, s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    #[test]
    fn three_point_uniform() {
        let s = build_smoother(&[0.0, 0.5, 2.0], Kernel::Uniform, &BandwidthSpec::Constant(1.0)).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(s, expected);
    }

    #[test]
    fn wide_uniform_is_constant() {
        let x = [0.1, 0.9, 0.4, 0.35, 0.7];
        let s = build_smoother(&x, Kernel::Uniform, &BandwidthSpec::Constant(50.0)).unwrap();
        for &w in s.iter() {
            assert_abs_diff_eq!(w, 0.2, epsilon = 1e-15);
        }
        assert!(max_abs(&center(&s)) <= 1e-14);
    }

    #[test]
    fn gaussian_two_points_positive() {
        for h in [0.01, 1.0, 100.0] {
            let s = build_smoother(&[0.0, 0.05], Kernel::Gaussian, &BandwidthSpec::Constant(h)).unwrap();
            assert!(s.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn knn_tie_error_propagates() {
        let err = build_smoother(&[0.0, 1.0, 1.0, 3.0], Kernel::Gaussian, &BandwidthSpec::KNearest(1));
        assert!(matches!(err, Err(Error::ZeroBandwidth { .. })));
    }

    #[test]
    fn center_examples() {
        let s = DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.4, 0.6]);
        let c = center(&s);
        let expected = DMatrix::from_row_slice(2, 2, &[0.2, -0.2, -0.2, 0.2]);
        assert!(max_abs(&(c - expected)) <= 1e-15);

        let n = 4;
        let flat = DMatrix::from_element(n, n, 1.0 / n as f64);
        assert_eq!(max_abs(&center(&flat)), 0.0);
    }

    #[test]
    fn pair_with_identical_coordinates() {
        let x = vec![0.2, 0.9, 0.5, 0.1, 0.45];
        let d = Dataset::new(vec![1.0; 5], x.clone(), x).unwrap();
        let bw = BandwidthSpec::Constant(0.3);
        let p = build_pair(&d, Kernel::Epanechnikov, &bw, &bw).unwrap();
        assert_eq!(p.s1, p.s2);
        assert_eq!(p.s1_star, p.s2_star);
    }

    #[test]
    fn pair_huge_uniform_centers_to_zero() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.4, 1.0], vec![5.0, 2.0, 3.0]).unwrap();
        let bw = BandwidthSpec::Constant(1e3);
        let p = build_pair(&d, Kernel::Uniform, &bw, &bw).unwrap();
        assert!(max_abs(&p.s1_star) <= 1e-14);
        assert!(max_abs(&p.s2_star) <= 1e-14);
    }

    #[test]
    fn two_point_pair_oracle() {
        // Epanechnikov, h = 2, gap 1: raw weights 0.375 (self) and 0.28125.
        let d = Dataset::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 10.0]).unwrap();
        let p = build_pair(&d, Kernel::Epanechnikov, &BandwidthSpec::Constant(2.0), &BandwidthSpec::Constant(2.0)).unwrap();
        let a = 0.375 / (0.375 + 0.28125);
        let b = 0.28125 / (0.375 + 0.28125);
        assert_abs_diff_eq!(p.s1[(0, 0)], a, epsilon = 1e-15);
        assert_abs_diff_eq!(p.s1[(0, 1)], b, epsilon = 1e-15);
        assert_abs_diff_eq!(p.s1_star[(0, 0)], a - 0.5, epsilon = 1e-15);
        assert_eq!(p.s2, DMatrix::identity(2, 2));
        assert_abs_diff_eq!(p.s2_star[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.s2_star[(0, 1)], -0.5, epsilon = 1e-15);
    }

    fn kernel_strategy() -> impl Strategy<Value = Kernel> {
        prop::sample::select(Kernel::ALL.to_vec())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn row_stochastic_and_centering(
            kernel in kernel_strategy(),
            x in prop::collection::vec(-2.0f64..2.0, 2..40),
            h in 0.05f64..2.0,
            w in prop::collection::vec(-3.0f64..3.0, 40),
        ) {
            let n = x.len();
            let s = build_smoother(&x, kernel, &BandwidthSpec::Constant(h)).unwrap();
            for i in 0..n {
                let row = s.row(i);
                prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
                prop_assert!(row.iter().all(|&e| e >= 0.0));
            }
            let c = center(&s);
            let ones = DVector::from_element(n, 1.0);
            prop_assert!((&c * &ones).amax() <= 1e-10);

            let w = DVector::from_column_slice(&w[..n]);
            let sw = &s * &w;
            let expected = &sw - DVector::from_element(n, sw.mean());
            prop_assert!((&c * &w - expected).amax() <= 1e-10);
        }

        #[test]
        fn scale_covariance(
            kernel in kernel_strategy(),
            x in prop::collection::vec(-2.0f64..2.0, 2..30),
            h in 0.05f64..2.0,
            scale in 0.01f64..100.0,
        ) {
            let s = build_smoother(&x, kernel, &BandwidthSpec::Constant(h)).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let ss = build_smoother(&xs, kernel, &BandwidthSpec::Constant(h * scale)).unwrap();
            // Compact kernels can flip at exact support boundaries under rescaling.
            let boundary = kernel.has_compact_support() && x.iter().any(|a| x.iter().any(|b| {
                let t = (a - b).abs() / h;
                t != 0.0 && (t - 1.0).abs() < 1e-9
            }));
            if !boundary {
                prop_assert!((s - ss).amax() <= 1e-12);
            }
        }
    }
}
