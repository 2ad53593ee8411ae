//! Cross-world counterfactual estimation.
//!
//! Given per-arm baseline models in width form (mean estimate plus
//! nonnegative lower/upper interval widths), the point predictor shifts the
//! unobserved arm's mean toward the unit's factual residual, scaled by the
//! cross-world correlation `rho` and the relative interval width
//! `lambda(x)`:
//!
//! ```text
//! t = 0:  mu_rho(x, y) = mu1(x) + rho * lambda(x) * (y - mu0(x))
//! t = 1:  mu_rho(x, y) = mu0(x) + rho / lambda(x) * (y - mu1(x))
//! ```
//!
//! The `C_rho` interval places the unobserved arm's widths around that
//! point, shrunk by `sqrt(1 - rho^2)`; `C_rho^{+CI}` additionally widens by
//! a `c`-scaled bootstrap confidence radius for `mu_rho` (default
//! `c = rho^2`). Two algebraic reductions are implemented exactly, not just
//! to rounding: at `rho = 0` the output is bit-for-bit the unobserved arm's
//! baseline (the direct-outcome predictor), and at `rho = 1, lambda = 1`
//! the point is bit-for-bit the CATE-adjusted imputation `y + tau(x)`.

use crate::conformal::{FittedArm, WidthForm};
use crate::data::{Dataset, SplitPlan, Unit};
use crate::error::RcpError;
use crate::forest::ForestParams;
use crate::special::norm_quantile;
use crate::Result;

/// Cross-world correlation, constant or looked up from the nearest
/// covariate cell.
#[derive(Debug, Clone)]
pub enum RhoSpec {
    Constant(f64),
    Table {
        centers: Vec<Vec<f64>>,
        values: Vec<f64>,
    },
}

impl RhoSpec {
    pub fn constant(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(RhoSpec::Constant(rho))
    }

    pub fn table(cells: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if cells.is_empty() {
            return Err(RcpError::InvalidParam("rho table needs at least one cell".into()));
        }
        let dim = cells[0].0.len();
        let mut centers = Vec::with_capacity(cells.len());
        let mut values = Vec::with_capacity(cells.len());
        for (center, rho) in cells {
            if center.len() != dim {
                return Err(RcpError::InvalidParam("rho table cells have mixed dimensions".into()));
            }
            check_rho(rho)?;
            centers.push(center);
            values.push(rho);
        }
        Ok(RhoSpec::Table { centers, values })
    }

    /// Nearest-cell lookup (squared Euclidean; first cell wins ties).
    pub fn value_at(&self, x: &[f64]) -> f64 {
        match self {
            RhoSpec::Constant(r) => *r,
            RhoSpec::Table { centers, values } => {
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (i, c) in centers.iter().enumerate() {
                    let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                values[best]
            }
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || !(-1.0..=1.0).contains(&rho) {
        return Err(RcpError::InvalidParam(format!("rho must be in [-1,1], got {rho}")));
    }
    Ok(())
}

/// Relative baseline interval width `(l1 + u1) / (l0 + u0)`.
pub fn lambda(arm0: &WidthForm, arm1: &WidthForm) -> Result<f64> {
    let w0 = arm0.total_width();
    let w1 = arm1.total_width();
    if w0 <= 0.0 {
        return Err(RcpError::DegenerateInterval { arm: 0 });
    }
    if w1 <= 0.0 {
        return Err(RcpError::DegenerateInterval { arm: 1 });
    }
    Ok(w1 / w0)
}

/// Point predictor for the unobserved arm; computes `lambda` internally and
/// propagates its degenerate-interval error.
pub fn mu_rho(unit: &Unit, arm0: &WidthForm, arm1: &WidthForm, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let lam = lambda(arm0, arm1)?;
    Ok(mu_rho_with_lambda(unit, arm0, arm1, rho, lam))
}

/// Point predictor with an explicit `lambda` (used by the `lambda = 1`
/// override for equal-variance settings).
pub fn mu_rho_with_lambda(unit: &Unit, arm0: &WidthForm, arm1: &WidthForm, rho: f64, lam: f64) -> f64 {
    let (obs, unobs) = if unit.t == 0 { (arm0, arm1) } else { (arm1, arm0) };
    if rho == 0.0 {
        // exact reduction: the factual outcome carries no information
        return unobs.mu_hat;
    }
    if rho == 1.0 && lam == 1.0 {
        // exact reduction: CATE-adjusted imputation y +/- tau(x)
        let tau = arm1.mu_hat - arm0.mu_hat;
        return if unit.t == 0 { unit.y_obs + tau } else { unit.y_obs - tau };
    }
    let scale = if unit.t == 0 { rho * lam } else { rho / lam };
    unobs.mu_hat + scale * (unit.y_obs - obs.mu_hat)
}

/// `C_rho` interval; computes the point internally.
pub fn c_rho(unit: &Unit, arm0: &WidthForm, arm1: &WidthForm, rho: f64) -> Result<(f64, f64)> {
    let point = mu_rho(unit, arm0, arm1, rho)?;
    Ok(c_rho_from_point(unit.t, point, arm0, arm1, rho))
}

/// `C_rho` interval around an already-computed point. At `rho = 0` returns
/// the unobserved arm's calibrated interval bit-for-bit.
pub fn c_rho_from_point(t: u8, point: f64, arm0: &WidthForm, arm1: &WidthForm, rho: f64) -> (f64, f64) {
    let unobs = if t == 0 { arm1 } else { arm0 };
    if rho == 0.0 {
        return (unobs.lo, unobs.hi);
    }
    let shrink = (1.0 - rho * rho).sqrt();
    (point - shrink * unobs.l, point + shrink * unobs.u)
}

/// Default confidence-scaling hyperparameter `c = rho^2`.
pub fn default_correction(rho: f64) -> f64 {
    rho * rho
}

/// Bias-corrected interval: `C_rho` widened by `c`-scaled confidence radii
/// for the point estimate. Contains the uncorrected interval by
/// construction.
pub fn c_rho_plus_ci(
    unit: &Unit,
    arm0: &WidthForm,
    arm1: &WidthForm,
    rho: f64,
    r_l: f64,
    r_u: f64,
    c: f64,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&c) {
        return Err(RcpError::InvalidParam(format!("c must be in [0,1], got {c}")));
    }
    if r_l < 0.0 || r_u < 0.0 {
        return Err(RcpError::InvalidParam("confidence radii must be nonnegative".into()));
    }
    let (lo, hi) = c_rho(unit, arm0, arm1, rho)?;
    Ok((lo - c * r_l, hi + c * r_u))
}

/// Exact conditional law of the unobserved arm when the potential-outcome
/// pair is jointly Gaussian given covariates. Used as the verification
/// anchor for the estimator and as the synthetic-data oracle.
pub struct GaussianOracle {
    mu0: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    mu1: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    sigma0: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    sigma1: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    rho: f64,
}

impl GaussianOracle {
    pub fn new(
        mu0: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        mu1: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        sigma0: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        sigma1: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        rho: f64,
    ) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self {
            mu0: Box::new(mu0),
            mu1: Box::new(mu1),
            sigma0: Box::new(sigma0),
            sigma1: Box::new(sigma1),
            rho,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu0(&self, x: &[f64]) -> f64 {
        (self.mu0)(x)
    }

    pub fn mu1(&self, x: &[f64]) -> f64 {
        (self.mu1)(x)
    }

    pub fn sigma0(&self, x: &[f64]) -> f64 {
        (self.sigma0)(x)
    }

    pub fn sigma1(&self, x: &[f64]) -> f64 {
        (self.sigma1)(x)
    }

    /// Exact conditional mean of the unobserved arm given `(x, y_obs, t)`.
    pub fn mu(&self, unit: &Unit) -> f64 {
        let x = unit.x.as_slice();
        let (s0, s1) = ((self.sigma0)(x), (self.sigma1)(x));
        debug_assert!(s0 > 0.0 && s1 > 0.0, "oracle sigmas must be positive");
        if unit.t == 0 {
            (self.mu1)(x) + self.rho * (s1 / s0) * (unit.y_obs - (self.mu0)(x))
        } else {
            (self.mu0)(x) + self.rho * (s0 / s1) * (unit.y_obs - (self.mu1)(x))
        }
    }

    /// Exact equal-tailed conditional interval at miscoverage `alpha`.
    pub fn interval(&self, unit: &Unit, alpha: f64) -> (f64, f64) {
        assert!(0.0 < alpha && alpha < 1.0, "alpha in (0,1)");
        let x = unit.x.as_slice();
        let sigma_unobs = if unit.t == 0 { (self.sigma1)(x) } else { (self.sigma0)(x) };
        let z = norm_quantile(1.0 - alpha / 2.0);
        let half = z * sigma_unobs * (1.0 - self.rho * self.rho).sqrt();
        let center = self.mu(unit);
        (center - half, center + half)
    }
}

/// Free-function form of [`GaussianOracle::mu`].
pub fn oracle_mu(oracle: &GaussianOracle, unit: &Unit) -> f64 {
    oracle.mu(unit)
}

/// Free-function form of [`GaussianOracle::interval`].
pub fn oracle_interval(oracle: &GaussianOracle, unit: &Unit, alpha: f64) -> (f64, f64) {
    oracle.interval(unit, alpha)
}

/// Per-unit flags surfaced alongside a prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PredictionDiagnostics {
    /// Mean estimate fell outside the calibrated interval in the factual arm.
    pub clamped_factual: bool,
    /// Same, in the counterfactual arm.
    pub clamped_counterfactual: bool,
    /// `lambda` was forced to 1 rather than estimated.
    pub lambda_forced: bool,
    /// Bootstrap replicates behind the corrected interval, if any.
    pub bootstrap_b: Option<usize>,
}

/// Point estimate plus intervals for one unit's unobserved outcome.
#[derive(Debug, Clone)]
pub struct CounterfactualPrediction {
    pub point: f64,
    pub interval: (f64, f64),
    pub corrected_interval: Option<(f64, f64)>,
    pub lambda: f64,
    pub diagnostics: PredictionDiagnostics,
}

/// Train/calibration row indices per arm, resolved from a split plan.
#[derive(Debug, Clone)]
pub struct ArmIndices {
    pub train: [Vec<usize>; 2],
    pub calib: [Vec<usize>; 2],
}

impl ArmIndices {
    pub fn from_plan(ds: &Dataset, plan: &SplitPlan) -> Self {
        let by_arm = |idx: &[usize]| -> [Vec<usize>; 2] {
            let mut out = [Vec::new(), Vec::new()];
            for &i in idx {
                out[ds.treatment()[i] as usize].push(i);
            }
            out
        };
        ArmIndices {
            train: by_arm(&plan.train_indices),
            calib: by_arm(&plan.calib_indices),
        }
    }
}

/// Both calibrated arms; the full model object behind predictions.
pub struct RcpPipeline {
    pub arm0: FittedArm,
    pub arm1: FittedArm,
}

impl RcpPipeline {
    /// Fit and calibrate both arms from a split plan.
    pub fn fit(ds: &Dataset, plan: &SplitPlan, alpha: f64, params: &ForestParams) -> Result<Self> {
        Self::fit_with_indices(ds, &ArmIndices::from_plan(ds, plan), alpha, params)
    }

    /// Fit from explicit per-arm row indices (the bootstrap resamples these).
    pub fn fit_with_indices(
        ds: &Dataset,
        idx: &ArmIndices,
        alpha: f64,
        params: &ForestParams,
    ) -> Result<Self> {
        let mut arms = Vec::with_capacity(2);
        for arm in [0usize, 1usize] {
            if idx.train[arm].is_empty() {
                return Err(RcpError::ArmTooSmall {
                    arm: arm as u8,
                    n: 0,
                    need: 2,
                });
            }
            if idx.calib[arm].is_empty() {
                return Err(RcpError::ArmTooSmall {
                    arm: arm as u8,
                    n: 0,
                    need: 1,
                });
            }
            let tx = ds.covariates().select_rows(&idx.train[arm]);
            let ty: Vec<f64> = idx.train[arm].iter().map(|&i| ds.outcome()[i]).collect();
            let cx = ds.covariates().select_rows(&idx.calib[arm]);
            let cy: Vec<f64> = idx.calib[arm].iter().map(|&i| ds.outcome()[i]).collect();
            let fitted = FittedArm::fit(&tx, &ty, arm as u8, alpha, params)?.calibrate(&cx, &cy)?;
            arms.push(fitted);
        }
        let arm1 = arms.pop().unwrap();
        let arm0 = arms.pop().unwrap();
        Ok(RcpPipeline { arm0, arm1 })
    }

    pub fn arm(&self, t: u8) -> &FittedArm {
        if t == 0 {
            &self.arm0
        } else {
            &self.arm1
        }
    }

    /// Width forms for both arms at the unit's covariates.
    pub fn width_forms(&self, x: &[f64]) -> Result<(WidthForm, WidthForm)> {
        Ok((self.arm0.width_form(x)?, self.arm1.width_form(x)?))
    }

    /// Point and `C_rho` interval for one unit.
    pub fn predict(&self, unit: &Unit, rho: f64, lambda_one: bool) -> Result<CounterfactualPrediction> {
        check_rho(rho)?;
        let (w0, w1) = self.width_forms(&unit.x)?;
        let lam = if lambda_one { 1.0 } else { lambda(&w0, &w1)? };
        let point = mu_rho_with_lambda(unit, &w0, &w1, rho, lam);
        let interval = c_rho_from_point(unit.t, point, &w0, &w1, rho);
        let (wf, wc) = if unit.t == 0 { (&w0, &w1) } else { (&w1, &w0) };
        Ok(CounterfactualPrediction {
            point,
            interval,
            corrected_interval: None,
            lambda: lam,
            diagnostics: PredictionDiagnostics {
                clamped_factual: wf.clamped,
                clamped_counterfactual: wc.clamped,
                lambda_forced: lambda_one,
                bootstrap_b: None,
            },
        })
    }

    /// Prediction with the bias-corrected interval attached; `r_l`/`r_u`
    /// come from [`crate::bootstrap`], `c` defaults to `rho^2`.
    pub fn predict_corrected(
        &self,
        unit: &Unit,
        rho: f64,
        lambda_one: bool,
        r_l: f64,
        r_u: f64,
        c: Option<f64>,
        bootstrap_b: usize,
    ) -> Result<CounterfactualPrediction> {
        let mut pred = self.predict(unit, rho, lambda_one)?;
        let c = c.unwrap_or_else(|| default_correction(rho));
        if !(0.0..=1.0).contains(&c) {
            return Err(RcpError::InvalidParam(format!("c must be in [0,1], got {c}")));
        }
        pred.corrected_interval = Some((pred.interval.0 - c * r_l, pred.interval.1 + c * r_u));
        pred.diagnostics.bootstrap_b = Some(bootstrap_b);
        Ok(pred)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit0(y: f64) -> Unit {
        Unit::new(vec![0.0], y, 0).unwrap()
    }

    #[test]
    fn lambda_arithmetic() {
        let w0 = WidthForm::symmetric(1.0, 0.5);
        let w1 = WidthForm::symmetric(2.0, 1.0);
        assert_eq!(lambda(&w0, &w1).unwrap(), 2.0);
        assert_eq!(lambda(&w1, &w1).unwrap(), 1.0);
        let degenerate = WidthForm::symmetric(1.0, 0.0);
        assert!(matches!(
            lambda(&degenerate, &w1),
            Err(RcpError::DegenerateInterval { arm: 0 })
        ));
        assert!(matches!(
            lambda(&w0, &degenerate),
            Err(RcpError::DegenerateInterval { arm: 1 })
        ));
    }

    #[test]
    fn mu_rho_zero_ignores_outcome() {
        let w0 = WidthForm::symmetric(1.0, 0.5);
        let w1 = WidthForm::symmetric(2.0, 1.0);
        for y in [-5.0, 0.0, 3.0, 100.0] {
            assert_eq!(mu_rho(&unit0(y), &w0, &w1, 0.0).unwrap(), 2.0);
        }
    }

    #[test]
    fn mu_rho_one_is_cate_shift() {
        let w0 = WidthForm::symmetric(1.0, 1.0);
        let w1 = WidthForm::symmetric(2.0, 1.0);
        // lambda = 1 naturally; y + tau = 3 + (2 - 1) = 4
        assert_eq!(mu_rho(&unit0(3.0), &w0, &w1, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn mu_rho_formula_evaluation() {
        let w0 = WidthForm::symmetric(1.0, 0.5);
        let w1 = WidthForm::symmetric(2.0, 0.25);
        // lambda = 0.5/1.0 = 0.5; 2 + 0.6*0.5*(3-1) = 2.6
        let v = mu_rho(&unit0(3.0), &w0, &w1, 0.6).unwrap();
        assert!((v - 2.6).abs() < 1e-15);
    }

    #[test]
    fn mu_rho_t1_branch() {
        let w0 = WidthForm::symmetric(1.0, 1.0);
        let w1 = WidthForm::symmetric(3.0, 1.0);
        let u = Unit::new(vec![0.0], 5.0, 1).unwrap();
        // t = 1, rho = 1, lambda = 1: y - tau = 5 - 2 = 3
        assert_eq!(mu_rho(&u, &w0, &w1, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn c_rho_zero_is_baseline_bitwise() {
        let w0 = WidthForm::from_interval(1.0, 0.3, 1.9);
        let w1 = WidthForm::from_interval(2.0, 1.1, 3.3);
        let (lo, hi) = c_rho(&unit0(7.0), &w0, &w1, 0.0).unwrap();
        assert_eq!(lo.to_bits(), w1.lo.to_bits());
        assert_eq!(hi.to_bits(), w1.hi.to_bits());
    }

    #[test]
    fn c_rho_one_is_singleton() {
        let w0 = WidthForm::symmetric(1.0, 1.0);
        let w1 = WidthForm::symmetric(2.0, 1.0);
        let (lo, hi) = c_rho(&unit0(3.0), &w0, &w1, 1.0).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(lo, 4.0);
    }

    #[test]
    fn c_rho_shrink_factor() {
        let w0 = WidthForm::symmetric(1.0, 2.0);
        let w1 = WidthForm::symmetric(2.0, 1.0);
        // lambda = 2/4 = 0.5; point = 2 + 0.6*0.5*2 = 2.6; sqrt(1-0.36) = 0.8
        let (lo, hi) = c_rho(&unit0(3.0), &w0, &w1, 0.6).unwrap();
        assert!((lo - 1.8).abs() < 1e-12);
        assert!((hi - 3.4).abs() < 1e-12);
    }

    #[test]
    fn corrected_interval_examples() {
        let w0 = WidthForm::symmetric(1.0, 2.0);
        let w1 = WidthForm::symmetric(2.0, 1.0);
        let u = unit0(3.0);
        // rho = 0, c = 0: identical to c_rho
        let base = c_rho(&u, &w0, &w1, 0.0).unwrap();
        let plus = c_rho_plus_ci(&u, &w0, &w1, 0.0, 0.7, 0.7, 0.0).unwrap();
        assert_eq!(base.0.to_bits(), plus.0.to_bits());
        assert_eq!(base.1.to_bits(), plus.1.to_bits());
        // rho = 1 with equal widths (lambda = 1): full confidence interval
        // around the CATE-shifted point y + tau = 4
        let weq0 = WidthForm::symmetric(1.0, 1.0);
        let weq1 = WidthForm::symmetric(2.0, 1.0);
        let (lo, hi) = c_rho_plus_ci(&u, &weq0, &weq1, 1.0, 0.3, 0.4, 1.0).unwrap();
        assert!((lo - (4.0 - 0.3)).abs() < 1e-15);
        assert!((hi - (4.0 + 0.4)).abs() < 1e-15);
        // rho = 0.6, c = rho^2 = 0.36, r = 0.5: widens each side by 0.18
        let (lo, hi) = c_rho_plus_ci(&u, &w0, &w1, 0.6, 0.5, 0.5, default_correction(0.6)).unwrap();
        assert!((lo - 1.62).abs() < 1e-12);
        assert!((hi - 3.58).abs() < 1e-12);
    }

    #[test]
    fn gaussian_oracle_mu() {
        let o = GaussianOracle::new(|_| 0.0, |_| 0.0, |_| 1.0, |_| 2.0, 0.5).unwrap();
        assert_eq!(o.mu(&unit0(2.0)), 2.0);
        let o0 = GaussianOracle::new(|_| 1.0, |_| 5.0, |_| 1.0, |_| 2.0, 0.0).unwrap();
        assert_eq!(o0.mu(&unit0(123.0)), 5.0);
        // t = 1 branch conditions on arm-1 residual with sigma0/sigma1
        let u1 = Unit::new(vec![0.0], 2.0, 1).unwrap();
        assert_eq!(o.mu(&u1), 0.5 * 0.5 * 2.0);
    }

    #[test]
    fn gaussian_oracle_interval() {
        let o = GaussianOracle::new(|_| 0.0, |_| 0.0, |_| 1.0, |_| 2.0, 1.0).unwrap();
        let (lo, hi) = o.interval(&unit0(1.0), 0.1);
        assert_eq!(lo, hi);
        let o = GaussianOracle::new(|_| 0.0, |_| 0.0, |_| 1.0, |_| 2.0, 0.0).unwrap();
        let (lo, hi) = o.interval(&unit0(0.0), 0.1);
        let half = (hi - lo) / 2.0;
        assert!((half - 3.2897072539029444).abs() < 1e-9);
        // the constant itself, to the printed precision 1.6449
        assert!((half / 2.0 - 1.6449).abs() < 1e-4);
    }

    #[test]
    fn oracle_matches_estimator_on_analytic_arms() {
        let z = norm_quantile(0.95);
        let (mu0v, mu1v, s0, s1) = (0.7, -0.4, 1.3, 2.2);
        let oracle =
            GaussianOracle::new(move |_| mu0v, move |_| mu1v, move |_| s0, move |_| s1, -0.35).unwrap();
        let w0 = WidthForm::symmetric(mu0v, z * s0);
        let w1 = WidthForm::symmetric(mu1v, z * s1);
        for y in [-3.0, 0.0, 1.7] {
            for t in [0u8, 1u8] {
                let u = Unit::new(vec![0.0], y, t).unwrap();
                let est = mu_rho(&u, &w0, &w1, -0.35).unwrap();
                assert!((est - oracle.mu(&u)).abs() < 1e-12);
                let (clo, chi) = c_rho(&u, &w0, &w1, -0.35).unwrap();
                let (olo, ohi) = oracle.interval(&u, 0.1);
                assert!((clo - olo).abs() < 1e-12);
                assert!((chi - ohi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rho_spec_lookup() {
        assert!(RhoSpec::constant(1.5).is_err());
        let spec = RhoSpec::table(vec![(vec![0.0, 0.0], 0.2), (vec![1.0, 1.0], 0.8)]).unwrap();
        assert_eq!(spec.value_at(&[0.1, 0.1]), 0.2);
        assert_eq!(spec.value_at(&[0.9, 1.2]), 0.8);
        assert_eq!(RhoSpec::constant(0.4).unwrap().value_at(&[9.9]), 0.4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn corrected_contains_uncorrected(
            rho in -1.0f64..1.0,
            r_l in 0.0f64..3.0,
            r_u in 0.0f64..3.0,
            y in -5.0f64..5.0,
            half0 in 0.1f64..4.0,
            half1 in 0.1f64..4.0,
        ) {
            let w0 = WidthForm::symmetric(1.0, half0);
            let w1 = WidthForm::symmetric(2.0, half1);
            let u = unit0(y);
            let base = c_rho(&u, &w0, &w1, rho).unwrap();
            let plus = c_rho_plus_ci(&u, &w0, &w1, rho, r_l, r_u, default_correction(rho)).unwrap();
            prop_assert!(plus.0 <= base.0 && plus.1 >= base.1);
        }

        #[test]
        fn width_strictly_decreasing_in_abs_rho(
            rho_small in 0.0f64..0.99,
            gap in 0.01f64..0.5,
            y in -5.0f64..5.0,
        ) {
            let rho_big = (rho_small + gap).min(1.0);
            let w0 = WidthForm::symmetric(1.0, 1.0);
            let w1 = WidthForm::symmetric(2.0, 1.5);
            let u = unit0(y);
            let narrow = c_rho(&u, &w0, &w1, rho_big).unwrap();
            let wide = c_rho(&u, &w0, &w1, rho_small).unwrap();
            prop_assert!(narrow.1 - narrow.0 < wide.1 - wide.0);
            // and the sign of rho does not matter for the width
            let mirrored = c_rho(&u, &w0, &w1, -rho_big).unwrap();
            prop_assert!((mirrored.1 - mirrored.0 - (narrow.1 - narrow.0)).abs() < 1e-12);
        }
    }
}
