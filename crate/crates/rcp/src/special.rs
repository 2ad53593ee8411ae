//! Self-contained statistical special functions and small test statistics.
//!
//! Everything the crate needs from classical statistics lives here: the
//! regularized incomplete gamma and beta functions, normal / Student-t /
//! chi-square / Laplace distribution functions and quantiles, the shared
//! left-continuous empirical-quantile convention, a two-sample
//! Kolmogorov-Smirnov test and Spearman rank correlation. All routines are
//! plain `f64` with accuracy well beyond the tolerances asserted in tests
//! (quantiles validated against tabulated values to 1e-9).

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_p domain");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_cf(a: f64, x: f64) -> f64 {
    // modified Lentz continued fraction
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x), "beta_inc domain");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h
}

/// Complementary error function via the incomplete gamma.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        gamma_q(0.5, x * x)
    } else {
        2.0 - gamma_q(0.5, x * x)
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile (Acklam's rational approximation plus two
/// Halley refinement steps; accurate to full double precision on (0, 1)).
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "norm_quantile domain: {p}");
    // Refine in the lower half only: there norm_cdf evaluates a direct tail
    // integral with full relative precision (no 1 - p cancellation).
    if p > 0.5 {
        return -norm_quantile_lower(1.0 - p);
    }
    norm_quantile_lower(p)
}

fn norm_quantile_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let p_low = 0.02425;
    let mut x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement
    for _ in 0..2 {
        let e = norm_cdf(x) - p;
        let u = e / norm_pdf(x);
        x -= u / (1.0 + x * u / 2.0);
    }
    x
}

/// Student-t CDF with `df` degrees of freedom.
pub fn student_t_cdf(x: f64, df: f64) -> f64 {
    assert!(df > 0.0, "student_t_cdf: df must be positive");
    if x == 0.0 {
        return 0.5;
    }
    let ib = beta_inc(df / 2.0, 0.5, df / (df + x * x));
    if x > 0.0 {
        1.0 - 0.5 * ib
    } else {
        0.5 * ib
    }
}

/// Student-t density.
pub fn student_t_pdf(x: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Student-t survival function P(T > x); direct tail integral for x > 0,
/// so no cancellation for extreme quantile levels.
pub fn student_t_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0 - student_t_cdf(x, df);
    }
    0.5 * beta_inc(df / 2.0, 0.5, df / (df + x * x))
}

/// Student-t quantile: safeguarded Newton on the survival function.
pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "student_t_quantile domain: {p}");
    assert!(df > 0.0);
    if p == 0.5 {
        return 0.0;
    }
    if p < 0.5 {
        return -student_t_quantile(1.0 - p, df);
    }
    // solve student_t_sf(x) = q for x > 0
    let q = 1.0 - p;
    let mut lo = 0.0;
    let mut hi = 2.0;
    while student_t_sf(hi, df) > q {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    let mut x = norm_quantile(p).max(0.5).min(0.9 * hi);
    for _ in 0..120 {
        let f = student_t_sf(x, df) - q;
        if f < 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let deriv = -student_t_pdf(x, df);
        let next = if deriv != 0.0 { x - f / deriv } else { 0.5 * (lo + hi) };
        let next = if next <= lo || next >= hi {
            0.5 * (lo + hi)
        } else {
            next
        };
        if (next - x).abs() <= 1e-14 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_p(df / 2.0, x / 2.0)
}

/// Chi-square survival function Q(df/2, x/2).
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Chi-square quantile via safeguarded Newton (Wilson-Hilferty start).
/// Solves on whichever of the CDF / survival scales avoids cancellation.
pub fn chi2_quantile(p: f64, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "chi2_quantile domain: {p}");
    assert!(df > 0.0);
    let upper_tail = p > 0.5;
    let q = 1.0 - p;
    let z = norm_quantile(p);
    let wh = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
    let mut x = wh.max(1e-8);
    let mut lo = 0.0;
    let mut hi = x.max(1.0);
    while chi2_cdf(hi, df) < p && chi2_sf(hi, df) > q {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    if x >= hi {
        x = 0.5 * hi;
    }
    let ln_norm = (df / 2.0) * 2f64.ln() + ln_gamma(df / 2.0);
    for _ in 0..200 {
        let f = if upper_tail {
            q - chi2_sf(x, df)
        } else {
            chi2_cdf(x, df) - p
        };
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let deriv = ((df / 2.0 - 1.0) * x.ln() - x / 2.0 - ln_norm).exp();
        let next = if deriv > 0.0 { x - f / deriv } else { 0.5 * (lo + hi) };
        let next = if next <= lo || next >= hi {
            0.5 * (lo + hi)
        } else {
            next
        };
        if (next - x).abs() <= 1e-13 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Laplace(0, 1) CDF.
pub fn laplace_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    }
}

/// Laplace(0, 1) quantile.
pub fn laplace_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "laplace_quantile domain: {p}");
    if p < 0.5 {
        (2.0 * p).ln()
    } else {
        -(2.0 * (1.0 - p)).ln()
    }
}

/// Left-continuous empirical quantile on a sorted slice: the smallest value
/// whose cumulative fraction reaches `beta`. This is the single quantile
/// convention used crate-wide.
pub fn empirical_quantile(sorted: &[f64], beta: f64) -> f64 {
    assert!(!sorted.is_empty(), "empirical_quantile: empty input");
    assert!(beta > 0.0 && beta <= 1.0, "empirical_quantile: beta in (0,1]");
    let n = sorted.len();
    let idx = ((beta * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[idx.min(n) - 1]
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (ddof = 1).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Unbiased sample standard deviation.
pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Two-sample Kolmogorov-Smirnov test; returns `(statistic, p_value)` using
/// the asymptotic Kolmogorov distribution with the usual finite-sample
/// effective-size correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty(), "ks_two_sample: empty sample");
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let xa = a[i];
        let xb = b[j];
        let x = xa.min(xb);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        let fa = i as f64 / na as f64;
        let fb = j as f64 / nb as f64;
        d = d.max((fa - fb).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += term;
        sign = -sign;
        if term.abs() < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut r = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn ln_gamma_tabulated() {
        close(ln_gamma(5.0), 3.1780538303479458, 1e-12);
        close(ln_gamma(0.5), 0.5723649429247001, 1e-12);
        close(ln_gamma(1.0), 0.0, 1e-13);
    }

    #[test]
    fn incomplete_gamma_and_beta_tabulated() {
        close(gamma_p(1.5, 2.3), 0.7964579183206351, 1e-12);
        close(gamma_p(0.5, 1.0) + gamma_q(0.5, 1.0), 1.0, 1e-14);
        close(beta_inc(1.5, 0.5, 0.3), 0.07727428998754561, 1e-12);
        close(beta_inc(2.0, 3.0, 1.0), 1.0, 0.0);
    }

    #[test]
    fn normal_cdf_and_quantile_tabulated() {
        close(norm_cdf(0.0), 0.5, 1e-15);
        close(norm_cdf(-1.96), 0.024997895148220435, 1e-13);
        close(norm_quantile(0.95), 1.6448536269514722, 1e-11);
        close(norm_quantile(0.975), 1.959963984540054, 1e-11);
        // round trip over a wide range
        for &p in &[1e-10, 1e-4, 0.2, 0.5, 0.77, 1.0 - 1e-4, 1.0 - 1e-10] {
            close(norm_cdf(norm_quantile(p)), p, 1e-12);
        }
    }

    #[test]
    fn student_t_tabulated() {
        // df = 1 closed form: quantile(p) = tan(pi * (p - 1/2))
        close(student_t_quantile(0.95, 1.0), 6.313751514675043, 1e-9);
        close(student_t_quantile(0.975, 9.0), 2.2621571627982055, 1e-10);
        close(student_t_quantile(0.95, 3.0), 2.353363434801824, 1e-10);
        close(student_t_quantile(0.95, 4.0), 2.1318467863266503, 1e-10);
        close(student_t_cdf(1.2, 3.0), 0.8418689426509476, 1e-12);
        // closed-form t3 CDF as an independent route
        let x = 0.83_f64;
        let phi = (x / 3f64.sqrt()).atan();
        let t3 = 0.5 + (phi + phi.sin() * phi.cos()) / std::f64::consts::PI;
        close(student_t_cdf(x, 3.0), t3, 1e-13);
        close(student_t_quantile(0.2, 2.0), -student_t_quantile(0.8, 2.0), 1e-12);
    }

    #[test]
    fn chi2_tabulated() {
        close(chi2_quantile(0.95, 3.0), 7.814727903251179, 1e-9);
        close(chi2_cdf(7.814727903251179, 3.0), 0.95, 1e-12);
        close(chi2_quantile(1e-10, 3.0), 5.20939762143448e-7, 1e-12);
        close(chi2_quantile(1.0 - 1e-12, 3.0), 58.9198006659047, 1e-6);
    }

    #[test]
    fn laplace_round_trip() {
        close(laplace_quantile(0.9), 1.6094379124341005, 1e-12);
        for &p in &[0.01, 0.3, 0.5000001, 0.9, 0.999] {
            close(laplace_cdf(laplace_quantile(p)), p, 1e-13);
        }
    }

    #[test]
    fn empirical_quantile_convention() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(empirical_quantile(&xs, 0.05), 5.0);
        assert_eq!(empirical_quantile(&xs, 0.95), 95.0);
        assert_eq!(empirical_quantile(&xs, 1.0), 100.0);
        let small = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&small, 0.5), 2.0);
        assert_eq!(empirical_quantile(&small, 0.51), 3.0);
    }

    #[test]
    fn kolmogorov_tabulated() {
        close(kolmogorov_sf(0.5), 0.9639452436648751, 1e-10);
        assert!(kolmogorov_sf(3.0) < 1e-7);
        // identical samples: D = 0, p = 1
        let a = [1.0, 2.0, 3.0, 4.0];
        let (d, p) = ks_two_sample(&a, &a);
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
        // disjoint samples: D = 1, p tiny
        let b = [10.0, 11.0, 12.0, 13.0];
        let (d, p) = ks_two_sample(&a, &b);
        assert_eq!(d, 1.0);
        assert!(p < 0.05);
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 6.0, 8.0, 10.0];
        close(spearman(&x, &y), 1.0, 1e-12);
        let y_rev = [10.0, 8.0, 6.0, 4.0, 2.0];
        close(spearman(&x, &y_rev), -1.0, 1e-12);
        // ties get average ranks
        let xt = [1.0, 1.0, 2.0];
        let yt = [3.0, 3.0, 5.0];
        close(spearman(&xt, &yt), 1.0, 1e-12);
    }
}
