//! Pairs bootstrap over the fitted pipeline.
//!
//! Each replicate resamples the training rows with replacement *within each
//! treatment arm*, refits the mean/quantile/conformal pipeline (calibration
//! rows stay fixed), and re-evaluates a caller-supplied statistic vector.
//! Confidence radii come from left-continuous empirical percentiles of the
//! replicate distribution, floored at zero around the full-data point
//! estimates. Replicates run independently on streams derived from
//! `(seed, replicate)`, and replicate values are sorted before percentile
//! extraction, so results do not depend on scheduling or worker count.

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Dataset, SplitPlan, Unit};
use crate::error::RcpError;
use crate::estimator::{ArmIndices, RcpPipeline};
use crate::forest::ForestParams;
use crate::seeding::{derive_seed, stream_rng, tag};
use crate::special::empirical_quantile;
use crate::Result;

/// Bootstrap configuration: replicate count, CI miscoverage level, seed.
#[derive(Debug, Clone, Copy)]
pub struct BootstrapSpec {
    pub b: usize,
    /// Two-sided miscoverage: percentiles at `level/2` and `1 - level/2`.
    pub level: f64,
    pub seed: u64,
}

impl BootstrapSpec {
    pub fn new(b: usize, level: f64, seed: u64) -> Result<Self> {
        if b < 2 {
            return Err(RcpError::InvalidParam(format!("bootstrap needs B >= 2, got {b}")));
        }
        if !(0.0 < level && level < 1.0) {
            return Err(RcpError::InvalidParam(format!("level must be in (0,1), got {level}")));
        }
        Ok(Self { b, level, seed })
    }
}

/// Percentile confidence radii around `point` from sorted replicate values.
pub fn percentile_ci(sorted: &[f64], point: f64, level: f64) -> (f64, f64) {
    let q_lo = empirical_quantile(sorted, level / 2.0);
    let q_hi = empirical_quantile(sorted, 1.0 - level / 2.0);
    ((point - q_lo).max(0.0), (q_hi - point).max(0.0))
}

const MAX_RETRIES: usize = 10;

/// Run the pairs bootstrap. `stat` maps a refit pipeline to a vector of
/// statistics (one per query of interest); `points` are the full-data
/// values of the same statistics. Returns per-coordinate `(r_l, r_u)`.
pub fn bootstrap_pipeline<F>(
    ds: &Dataset,
    plan: &SplitPlan,
    alpha: f64,
    forest: &ForestParams,
    spec: &BootstrapSpec,
    points: &[f64],
    stat: F,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&RcpPipeline) -> Result<Vec<f64>> + Sync,
{
    let base_idx = ArmIndices::from_plan(ds, plan);
    let replicates: Vec<Result<Vec<f64>>> = (0..spec.b)
        .into_par_iter()
        .map(|rep| {
            let mut last_err = None;
            for retry in 0..MAX_RETRIES {
                let mut rng = stream_rng(spec.seed, &[tag::BOOTSTRAP, rep as u64, retry as u64]);
                let mut idx = base_idx.clone();
                for arm in 0..2 {
                    let src = &base_idx.train[arm];
                    idx.train[arm] = (0..src.len())
                        .map(|_| src[rng.random_range(0..src.len())])
                        .collect();
                }
                let params = forest
                    .clone()
                    .with_seed(derive_seed(forest.seed, &[tag::BOOTSTRAP, rep as u64, retry as u64]));
                match RcpPipeline::fit_with_indices(ds, &idx, alpha, &params).and_then(|p| stat(&p)) {
                    Ok(v) => {
                        if v.len() != points.len() {
                            return Err(RcpError::InvalidParam(format!(
                                "bootstrap statistic returned {} values, expected {}",
                                v.len(),
                                points.len()
                            )));
                        }
                        return Ok(v);
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            Err(RcpError::BootstrapFailed {
                retries: MAX_RETRIES,
                message: last_err.map(|e| e.to_string()).unwrap_or_default(),
            })
        })
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.b); points.len()];
    for rep in replicates {
        let v = rep?;
        for (k, value) in v.into_iter().enumerate() {
            columns[k].push(value);
        }
    }
    Ok(points
        .iter()
        .zip(columns.iter_mut())
        .map(|(&p, col)| {
            col.sort_by(f64::total_cmp);
            percentile_ci(col, p, spec.level)
        })
        .collect())
}

/// Confidence radii for `mu_rho` at a single unit: fits the full pipeline,
/// takes its point estimate, then bootstraps around it.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_ci(
    ds: &Dataset,
    plan: &SplitPlan,
    unit: &Unit,
    rho: f64,
    alpha: f64,
    forest: &ForestParams,
    lambda_one: bool,
    spec: &BootstrapSpec,
) -> Result<(f64, f64)> {
    let pipeline = RcpPipeline::fit(ds, plan, alpha, forest)?;
    let point = pipeline.predict(unit, rho, lambda_one)?.point;
    let radii = bootstrap_pipeline(ds, plan, alpha, forest, spec, &[point], |p| {
        Ok(vec![p.predict(unit, rho, lambda_one)?.point])
    })?;
    Ok(radii[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split, Dataset, Matrix};
    use crate::seeding;

    #[test]
    fn percentile_ci_convention() {
        let sorted: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let (r_l, r_u) = percentile_ci(&sorted, 50.5, 0.1);
        assert_eq!(r_l, 45.5); // 50.5 - 5
        assert_eq!(r_u, 44.5); // 95 - 50.5
    }

    #[test]
    fn percentile_ci_floors_at_zero() {
        let sorted = [1.0, 2.0, 3.0];
        let (r_l, r_u) = percentile_ci(&sorted, -10.0, 0.1);
        assert_eq!(r_l, 0.0);
        assert!(r_u > 0.0);
    }

    fn toy_dataset(n: usize, constant: bool, seed: u64) -> Dataset {
        use rand::Rng;
        let mut rng = seeding::stream_rng(seed, &[77]);
        let mut rows = Vec::with_capacity(n);
        let mut t = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            rows.push(vec![x]);
            let arm = (i % 2) as u8;
            t.push(arm);
            if constant {
                y.push(if arm == 0 { 1.0 } else { 2.0 });
            } else {
                y.push(x + arm as f64 + rng.random_range(-0.3..0.3));
            }
        }
        Dataset::new(Matrix::from_rows(rows).unwrap(), t, y, None).unwrap()
    }

    fn small_forest(seed: u64) -> ForestParams {
        ForestParams {
            n_trees: 20,
            min_leaf: 2,
            seed,
            ..ForestParams::default()
        }
    }

    #[test]
    fn constant_data_gives_zero_radii() {
        let ds = toy_dataset(60, true, 3);
        let plan = split(&ds, 0.2, 5).unwrap();
        let unit = Unit::new(vec![0.1], 1.0, 0).unwrap();
        let spec = BootstrapSpec::new(16, 0.1, 9).unwrap();
        let (r_l, r_u) =
            bootstrap_ci(&ds, &plan, &unit, 0.5, 0.1, &small_forest(1), true, &spec).unwrap();
        assert_eq!((r_l, r_u), (0.0, 0.0));
    }

    #[test]
    fn seed_fixed_radii_are_identical() {
        let ds = toy_dataset(80, false, 11);
        let plan = split(&ds, 0.2, 5).unwrap();
        let unit = Unit::new(vec![0.2], 0.4, 0).unwrap();
        let spec = BootstrapSpec::new(12, 0.1, 21).unwrap();
        let a = bootstrap_ci(&ds, &plan, &unit, 0.6, 0.1, &small_forest(2), false, &spec).unwrap();
        let b = bootstrap_ci(&ds, &plan, &unit, 0.6, 0.1, &small_forest(2), false, &spec).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn vector_statistic_shape_checked() {
        let ds = toy_dataset(60, false, 13);
        let plan = split(&ds, 0.2, 5).unwrap();
        let spec = BootstrapSpec::new(4, 0.1, 1).unwrap();
        let err = bootstrap_pipeline(&ds, &plan, 0.1, &small_forest(3), &spec, &[0.0, 1.0], |_| {
            Ok(vec![0.0])
        })
        .unwrap_err();
        assert!(matches!(err, RcpError::InvalidParam(_)));
    }
}
