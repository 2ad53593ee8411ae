//! Conformalized quantile regression, one calibrated model set per
//! treatment arm.
//!
//! An arm bundles a mean forest with a quantile forest queried at levels
//! `alpha/2` and `1 - alpha/2`. Calibration shifts the raw quantile band
//! outward by the finite-sample-corrected empirical quantile of the
//! nonconformity scores, which guarantees marginal coverage under
//! exchangeability. [`WidthForm`] rewrites the calibrated interval around
//! the mean estimate as nonnegative lower/upper widths, the shape consumed
//! by the cross-world estimator.

use crate::data::Matrix;
use crate::error::RcpError;
use crate::forest::{self, ForestParams, MeanForest, QuantileForest};
use crate::seeding::{derive_seed, tag};
use crate::Result;

/// Nonconformity score: how far `y` falls outside `[lo, hi]`.
pub fn conformity_score(y: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi, "conformity_score: crossed interval");
    (lo - y).max(y - hi).max(0.0)
}

/// Finite-sample conformal offset: the `ceil((m+1)(1-alpha))`-th smallest
/// score. When that rank exceeds `m` the offset saturates at the maximum
/// score and the second return value is `true`.
pub fn calibration_offset(scores: &[f64], alpha: f64) -> Result<(f64, bool)> {
    if scores.is_empty() {
        return Err(RcpError::Validation("calibration requires at least one unit".into()));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(RcpError::InvalidParam(format!("alpha must be in (0,1), got {alpha}")));
    }
    let m = scores.len();
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (((m as f64 + 1.0) * (1.0 - alpha)) - 1e-9).ceil() as usize;
    if rank > m {
        Ok((sorted[m - 1], true))
    } else {
        Ok((sorted[rank.max(1) - 1], false))
    }
}

/// Calibrated CQR interval re-centered on the mean estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthForm {
    pub mu_hat: f64,
    /// Lower width, `>= 0`.
    pub l: f64,
    /// Upper width, `>= 0`.
    pub u: f64,
    /// Original calibrated interval bounds (kept so that the exact
    /// `rho = 0` reduction can return them bit-for-bit).
    pub lo: f64,
    pub hi: f64,
    /// Set when `mu_hat` fell outside `[lo, hi]` and a width was clamped
    /// to zero.
    pub clamped: bool,
}

impl WidthForm {
    /// Re-center `[lo, hi]` around `mu_hat`; widths clamp at zero.
    pub fn from_interval(mu_hat: f64, lo: f64, hi: f64) -> Self {
        let clamped = mu_hat < lo || mu_hat > hi;
        WidthForm {
            mu_hat,
            l: (mu_hat - lo).max(0.0),
            u: (hi - mu_hat).max(0.0),
            lo,
            hi,
            clamped,
        }
    }

    /// Symmetric analytic interval `mu_hat ± half`.
    pub fn symmetric(mu_hat: f64, half: f64) -> Self {
        assert!(half >= 0.0);
        WidthForm {
            mu_hat,
            l: half,
            u: half,
            lo: mu_hat - half,
            hi: mu_hat + half,
            clamped: false,
        }
    }

    pub fn total_width(&self) -> f64 {
        self.l + self.u
    }
}

/// Mean and quantile models for one treatment arm, plus the conformal
/// offset once calibrated.
#[derive(Debug, Clone)]
pub struct FittedArm {
    pub arm: u8,
    mean: MeanForest,
    quantiles: QuantileForest,
    pub alpha: f64,
    offset: Option<f64>,
    pub offset_saturated: bool,
}

impl FittedArm {
    /// Fit mean and quantile forests on this arm's training rows. Each
    /// model gets its own stream derived from `(params.seed, model, arm)`.
    pub fn fit(x: &Matrix, y: &[f64], arm: u8, alpha: f64, params: &ForestParams) -> Result<Self> {
        if arm > 1 {
            return Err(RcpError::InvalidParam(format!("arm must be 0 or 1, got {arm}")));
        }
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(RcpError::InvalidParam(format!("alpha must be in (0,1), got {alpha}")));
        }
        let mean_params = params
            .clone()
            .with_seed(derive_seed(params.seed, &[tag::MEAN_MODEL, arm as u64]));
        let quant_params = params
            .clone()
            .with_seed(derive_seed(params.seed, &[tag::QUANTILE_MODEL, arm as u64]));
        Ok(FittedArm {
            arm,
            mean: forest::fit_mean(x, y, &mean_params)?,
            quantiles: forest::fit_quantile(x, y, &quant_params)?,
            alpha,
            offset: None,
            offset_saturated: false,
        })
    }

    /// Conformal calibration on this arm's held-out units.
    pub fn calibrate(mut self, x: &Matrix, y: &[f64]) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(RcpError::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.nrows() == 0 {
            return Err(RcpError::ArmTooSmall {
                arm: self.arm,
                n: 0,
                need: 1,
            });
        }
        let mut scores = Vec::with_capacity(y.len());
        for i in 0..x.nrows() {
            let (lo, hi) = self.raw_quantiles(x.row(i))?;
            scores.push(conformity_score(y[i], lo, hi));
        }
        let (offset, saturated) = calibration_offset(&scores, self.alpha)?;
        self.offset = Some(offset);
        self.offset_saturated = saturated;
        Ok(self)
    }

    pub fn is_calibrated(&self) -> bool {
        self.offset.is_some()
    }

    pub fn offset(&self) -> Option<f64> {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    /// Mean-model prediction.
    pub fn mu_hat(&self, x: &[f64]) -> Result<f64> {
        self.mean.predict(x)
    }

    /// Uncalibrated quantile band at levels `alpha/2` and `1 - alpha/2`.
    pub fn raw_quantiles(&self, x: &[f64]) -> Result<(f64, f64)> {
        let q = self
            .quantiles
            .predict_many(x, &[self.alpha / 2.0, 1.0 - self.alpha / 2.0])?;
        Ok((q[0], q[1]))
    }

    /// Calibrated interval `[q_lo(x) - offset, q_hi(x) + offset]`.
    pub fn predict_interval(&self, x: &[f64]) -> Result<(f64, f64)> {
        let offset = self.offset.ok_or(RcpError::Uncalibrated { arm: self.arm })?;
        let (lo, hi) = self.raw_quantiles(x)?;
        Ok((lo - offset, hi + offset))
    }

    /// Calibrated interval re-centered on the mean estimate.
    pub fn width_form(&self, x: &[f64]) -> Result<WidthForm> {
        let mu = self.mu_hat(x)?;
        let (lo, hi) = self.predict_interval(x)?;
        Ok(WidthForm::from_interval(mu, lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conformity_score_cases() {
        assert_eq!(conformity_score(0.5, 0.0, 1.0), 0.0);
        assert_eq!(conformity_score(1.5, 0.0, 1.0), 0.5);
        assert_eq!(conformity_score(-2.0, 0.0, 1.0), 2.0);
    }

    #[test]
    fn offset_rank_arithmetic() {
        let scores: Vec<f64> = (1..=9).map(|i| i as f64).collect();
        let (offset, saturated) = calibration_offset(&scores, 0.1).unwrap();
        assert_eq!(offset, 9.0);
        assert!(!saturated);
    }

    #[test]
    fn offset_saturates_when_rank_exceeds_m() {
        let scores = [0.3, 0.1, 0.5, 0.2, 0.4];
        let (offset, saturated) = calibration_offset(&scores, 0.1).unwrap();
        assert_eq!(offset, 0.5);
        assert!(saturated);
    }

    #[test]
    fn offset_zero_for_perfect_models() {
        let scores = [0.0; 12];
        let (offset, saturated) = calibration_offset(&scores, 0.1).unwrap();
        assert_eq!(offset, 0.0);
        assert!(!saturated);
    }

    #[test]
    fn offset_rejects_empty() {
        assert!(calibration_offset(&[], 0.1).is_err());
    }

    fn unit_band_arm() -> (FittedArm, Matrix) {
        // single-leaf quantile forest over targets {0, 1}: q_0.05 = 0, q_0.95 = 1
        let x = Matrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let y = vec![0.0, 1.0];
        let params = ForestParams {
            n_trees: 1,
            min_leaf: 1,
            max_depth: Some(0),
            bootstrap_rows: false,
            ..ForestParams::default()
        };
        let arm = FittedArm::fit(&x, &y, 0, 0.1, &params).unwrap();
        (arm, x)
    }

    #[test]
    fn predict_interval_applies_offset() {
        let (arm, _) = unit_band_arm();
        // 19 calibration points all scoring 0.2: rank ceil(20 * 0.9) = 18 -> 0.2
        let cx = Matrix::from_rows(vec![vec![0.5]; 19]).unwrap();
        let cy = vec![1.2; 19];
        let arm = arm.calibrate(&cx, &cy).unwrap();
        assert_eq!(arm.offset(), Some(0.19999999999999996));
        let (lo, hi) = arm.predict_interval(&[0.3]).unwrap();
        assert!((lo - -0.2).abs() < 1e-15);
        assert!((hi - 1.2).abs() < 1e-15);
    }

    #[test]
    fn zero_offset_returns_raw_band() {
        let (arm, _) = unit_band_arm();
        let cx = Matrix::from_rows(vec![vec![0.5]; 10]).unwrap();
        let cy = vec![0.5; 10];
        let arm = arm.calibrate(&cx, &cy).unwrap();
        assert_eq!(arm.offset(), Some(0.0));
        assert_eq!(arm.predict_interval(&[0.3]).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn uncalibrated_interval_is_an_error() {
        let (arm, _) = unit_band_arm();
        assert!(matches!(
            arm.predict_interval(&[0.3]),
            Err(RcpError::Uncalibrated { arm: 0 })
        ));
    }

    #[test]
    fn width_form_recenters() {
        let w = WidthForm::from_interval(0.5, 0.0, 1.0);
        assert_eq!(w.l, 0.5);
        assert_eq!(w.u, 0.5);
        assert!(!w.clamped);
    }

    #[test]
    fn width_form_clamps_outside_mean() {
        let w = WidthForm::from_interval(1.5, 0.0, 1.0);
        assert_eq!(w.l, 1.5);
        assert_eq!(w.u, 0.0);
        assert!(w.clamped);
        // reconstruction covers the interval on the unclamped side
        assert!(w.mu_hat - w.l <= 0.0 && w.mu_hat + w.u >= 1.0 - w.l);
    }

    #[test]
    fn width_form_end_to_end() {
        let (arm, _) = unit_band_arm();
        let cx = Matrix::from_rows(vec![vec![0.5]; 10]).unwrap();
        let cy = vec![0.5; 10];
        let arm = arm.calibrate(&cx, &cy).unwrap();
        // mean of leaf {0,1} is 0.5, interval [0,1]
        let w = arm.width_form(&[0.2]).unwrap();
        assert_eq!(w.mu_hat, 0.5);
        assert_eq!(w.l, 0.5);
        assert_eq!(w.u, 0.5);
    }

    proptest! {
        #[test]
        fn offset_monotone_in_alpha(
            scores in prop::collection::vec(0.0f64..10.0, 1..50),
            a1 in 0.01f64..0.98,
            bump in 0.001f64..0.5,
        ) {
            let a2 = (a1 + bump).min(0.99);
            let (o1, _) = calibration_offset(&scores, a1).unwrap();
            let (o2, _) = calibration_offset(&scores, a2).unwrap();
            prop_assert!(o2 <= o1, "alpha {a1}->{a2} raised offset {o1}->{o2}");
        }

        #[test]
        fn width_form_nonnegative(mu in -10.0f64..10.0, a in -5.0f64..5.0, w in 0.0f64..8.0) {
            let form = WidthForm::from_interval(mu, a, a + w);
            prop_assert!(form.l >= 0.0 && form.u >= 0.0);
            prop_assert!(form.clamped == (mu < a || mu > a + w));
        }
    }
}
