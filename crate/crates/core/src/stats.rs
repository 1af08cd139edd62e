//! Within-subjects statistics for comparing filter conditions: one-way
//! repeated-measures ANOVA, paired t-tests with Bonferroni correction, and
//! Cohen's d effect sizes.
//!
//! p-values come from the regularized incomplete beta function evaluated by
//! continued fraction (tolerance 1e-12, at most 300 iterations), so the
//! module is self-contained.

use crate::error::{Error, Result};

mod special {
    /// ln Gamma via the Lanczos approximation (g = 7, 9 coefficients).
    pub fn ln_gamma(z: f64) -> f64 {
        const COEF: [f64; 9] = [
            0.99999999999980993,
            676.5203681218851,
            -1259.1392167224028,
            771.32342877765313,
            -176.61502916214059,
            12.507343278686905,
            -0.13857109526572012,
            9.9843695780195716e-6,
            1.5056327351493116e-7,
        ];
        if z < 0.5 {
            // reflection formula
            let pi = std::f64::consts::PI;
            return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
        }
        let z = z - 1.0;
        let mut x = COEF[0];
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
    }

    const CF_TOL: f64 = 1e-12;
    const CF_MAX_ITER: usize = 300;

    /// Continued fraction for the incomplete beta (modified Lentz method).
    fn betacf(a: f64, b: f64, x: f64) -> f64 {
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
        for m in 1..=CF_MAX_ITER {
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
            if (del - 1.0).abs() < CF_TOL {
                break;
            }
        }
        h
    }

    /// Regularized incomplete beta I_x(a, b).
    pub fn betainc_reg(a: f64, b: f64, x: f64) -> f64 {
        debug_assert!(a > 0.0 && b > 0.0);
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
            + a * x.ln()
            + b * (1.0 - x).ln();
        let bt = ln_bt.exp();
        if x < (a + 1.0) / (a + b + 2.0) {
            bt * betacf(a, b, x) / a
        } else {
            1.0 - bt * betacf(b, a, 1.0 - x) / b
        }
    }
}

pub use special::betainc_reg;

/// Two-sided p-value for a t statistic with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    betainc_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Survival function of the F distribution: P(F' > f).
pub fn f_survival(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    betainc_reg(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
}

/// Equal-length per-participant value lists for two conditions, paired by
/// index.
#[derive(Debug, Clone)]
pub struct PairedSamples {
    pub condition_a: Vec<f64>,
    pub condition_b: Vec<f64>,
}

impl PairedSamples {
    pub fn new(condition_a: Vec<f64>, condition_b: Vec<f64>) -> Result<Self> {
        if condition_a.len() != condition_b.len() {
            return Err(Error::InvalidInput(format!(
                "paired samples must have equal length ({} vs {})",
                condition_a.len(),
                condition_b.len()
            )));
        }
        if condition_a.len() < 2 {
            return Err(Error::InsufficientData(
                "paired comparison needs at least 2 subjects".into(),
            ));
        }
        Ok(Self {
            condition_a,
            condition_b,
        })
    }

    fn differences(&self) -> Vec<f64> {
        self.condition_a
            .iter()
            .zip(&self.condition_b)
            .map(|(a, b)| a - b)
            .collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Paired t-test: `t = mean(d) / (sd(d) / sqrt(n))`, df = n - 1, two sided.
pub fn paired_t(s: &PairedSamples) -> Result<(f64, f64)> {
    let d = s.differences();
    let sd = sample_sd(&d);
    if sd == 0.0 {
        // identical differences: t is 0/0 unless the mean is nonzero, where
        // it diverges; either way the statistic is not informative
        return Err(Error::DegenerateVariance(
            "paired differences have zero variance",
        ));
    }
    let n = d.len() as f64;
    let t = mean(&d) / (sd / n.sqrt());
    Ok((t, t_two_sided_p(t, n - 1.0)))
}

/// One-way within-subjects ANOVA table.
#[derive(Debug, Clone, PartialEq)]
pub struct RmAnovaTable {
    pub f_stat: f64,
    pub df_treatment: usize,
    pub df_error: usize,
    pub p_value: f64,
    pub condition_means: Vec<f64>,
}

/// One-way repeated-measures ANOVA on an `n_subjects x k_conditions` matrix
/// (rows = subjects, no missing cells):
/// `SS_total = SS_subjects + SS_treatment + SS_error`,
/// `F = MS_treatment / MS_error`.
pub fn rm_anova(data: &[Vec<f64>]) -> Result<RmAnovaTable> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "repeated-measures ANOVA needs at least 2 subjects".into(),
        ));
    }
    let k = data[0].len();
    if k < 2 {
        return Err(Error::InvalidInput(
            "repeated-measures ANOVA needs at least 2 conditions".into(),
        ));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != k {
            return Err(Error::InvalidInput(format!(
                "missing cells: subject {i} has {} of {k} conditions",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite cell for subject {i}"
            )));
        }
    }

    let grand = data.iter().flatten().sum::<f64>() / (n * k) as f64;
    let subject_means: Vec<f64> = data.iter().map(|row| mean(row)).collect();
    let condition_means: Vec<f64> = (0..k)
        .map(|j| data.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();
    let ss_total: f64 = data
        .iter()
        .flatten()
        .map(|v| (v - grand).powi(2))
        .sum();
    let ss_subjects: f64 = subject_means
        .iter()
        .map(|m| k as f64 * (m - grand).powi(2))
        .sum();
    let ss_treatment: f64 = condition_means
        .iter()
        .map(|m| n as f64 * (m - grand).powi(2))
        .sum();
    let ss_error = (ss_total - ss_subjects - ss_treatment).max(0.0);

    let df_treatment = k - 1;
    let df_error = (k - 1) * (n - 1);
    if ss_treatment == 0.0 {
        // no condition effect at all: F = 0, p = 1 (covers the all-equal
        // matrix, where SS_error is also zero)
        return Ok(RmAnovaTable {
            f_stat: 0.0,
            df_treatment,
            df_error,
            p_value: 1.0,
            condition_means,
        });
    }
    let ms_error = ss_error / df_error as f64;
    if ms_error == 0.0 {
        return Err(Error::DegenerateVariance(
            "zero error variance with a nonzero treatment effect",
        ));
    }
    let f_stat = (ss_treatment / df_treatment as f64) / ms_error;
    Ok(RmAnovaTable {
        f_stat,
        df_treatment,
        df_error,
        p_value: f_survival(f_stat, df_treatment as f64, df_error as f64),
        condition_means,
    })
}

/// Bonferroni correction: each p becomes `min(1, m * p)`. `m` must be at
/// least the number of p-values.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < p_values.len() {
        return Err(Error::InvalidInput(format!(
            "correction count m = {m} below the number of tests {}",
            p_values.len()
        )));
    }
    Ok(p_values
        .iter()
        .map(|p| (m as f64 * p).min(1.0))
        .collect())
}

/// Which Cohen's d convention to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohensDVariant {
    /// mean(differences) / sd(differences) — the default.
    Paired,
    /// mean difference / average of the two condition SDs (classic d).
    Pooled,
}

/// Paired Cohen's d: `mean(d) / sd(d)` with the sample (n-1) denominator.
pub fn cohens_d_paired(s: &PairedSamples) -> Result<f64> {
    let d = s.differences();
    let sd = sample_sd(&d);
    if sd == 0.0 {
        return Err(Error::DegenerateVariance(
            "paired differences have zero variance",
        ));
    }
    Ok(mean(&d) / sd)
}

/// Classic pooled-SD Cohen's d, offered behind a flag.
pub fn cohens_d_pooled(s: &PairedSamples) -> Result<f64> {
    let sa = sample_sd(&s.condition_a);
    let sb = sample_sd(&s.condition_b);
    let pooled = ((sa * sa + sb * sb) / 2.0).sqrt();
    if pooled == 0.0 {
        return Err(Error::DegenerateVariance("both conditions are constant"));
    }
    Ok((mean(&s.condition_a) - mean(&s.condition_b)) / pooled)
}

pub fn cohens_d(s: &PairedSamples, variant: CohensDVariant) -> Result<f64> {
    match variant {
        CohensDVariant::Paired => cohens_d_paired(s),
        CohensDVariant::Pooled => cohens_d_pooled(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Fixed 8x3 matrix shared with the reference computation
    // (scipy-based, frozen before this module was written).
    const MAT: [[f64; 3]; 8] = [
        [812.4, 797.1, 805.9],
        [743.2, 760.8, 751.5],
        [901.7, 884.3, 899.2],
        [668.9, 672.4, 655.0],
        [795.3, 810.6, 802.7],
        [852.1, 839.9, 861.4],
        [710.5, 698.2, 704.8],
        [934.8, 951.3, 940.6],
    ];

    fn matrix() -> Vec<Vec<f64>> {
        MAT.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn betainc_matches_reference() {
        // scipy.special.betainc values
        let cases = [
            (2.0, 3.0, 0.3, 0.34829999999999994),
            (0.5, 0.5, 0.7, 0.63098988043445459),
            (7.0, 1.0, 0.5, 0.0078125),
            (10.0, 0.5, 0.9, 0.15164090963470994),
            (0.5, 4.0, 0.1, 0.6266250825977403),
            (3.5, 2.5, 0.999, 0.99999965703242455),
        ];
        for (a, b, x, want) in cases {
            let got = betainc_reg(a, b, x);
            assert!(
                (got - want).abs() < 1e-12,
                "I_{x}({a},{b}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn cdf_plus_sf_is_one() {
        for (a, b) in [(0.5, 7.0), (3.0, 3.0), (10.0, 0.5), (1.0, 1.0)] {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let total = betainc_reg(a, b, x) + betainc_reg(b, a, 1.0 - x);
                assert!(
                    (total - 1.0).abs() < 1e-12,
                    "a={a} b={b} x={x}: {total}"
                );
            }
        }
    }

    #[test]
    fn distribution_tails_match_reference() {
        // scipy.stats.f.sf / t.sf values
        assert!((f_survival(3.2, 2.0, 14.0) - 0.071694374117623846).abs() < 1e-12);
        assert!((f_survival(0.5, 3.0, 21.0) - 0.68631974174906674).abs() < 1e-12);
        assert!((f_survival(10.0, 1.0, 7.0) - 0.015877803835188609).abs() < 1e-12);
        assert!((t_two_sided_p(2.5, 19.0) - 0.021740411168397436).abs() < 1e-12);
        assert!((t_two_sided_p(0.3, 7.0) - 0.77289005040213432).abs() < 1e-12);
        assert!((t_two_sided_p(4.0, 5.0) - 0.010323415480831452).abs() < 1e-12);
    }

    #[test]
    fn rm_anova_matches_reference() {
        let table = rm_anova(&matrix()).unwrap();
        assert_eq!(table.df_treatment, 2);
        assert_eq!(table.df_error, 14);
        assert!((table.f_stat - 0.0161799340057802).abs() < 1e-9);
        assert!((table.p_value - 0.983968629068601).abs() < 1e-6);
        for (got, want) in table
            .condition_means
            .iter()
            .zip([802.3625, 801.825, 802.6375])
        {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn rm_anova_all_equal_cells() {
        let data = vec![vec![5.0; 3]; 4];
        let table = rm_anova(&data).unwrap();
        assert_eq!(table.f_stat, 0.0);
        assert_eq!(table.p_value, 1.0);
    }

    #[test]
    fn rm_anova_k2_equals_t_squared() {
        let data: Vec<Vec<f64>> = MAT.iter().map(|r| vec![r[0], r[1]]).collect();
        let table = rm_anova(&data).unwrap();
        let s = PairedSamples::new(
            MAT.iter().map(|r| r[0]).collect(),
            MAT.iter().map(|r| r[1]).collect(),
        )
        .unwrap();
        let (t, pt) = paired_t(&s).unwrap();
        assert!((table.f_stat - t * t).abs() < 1e-9, "{} vs {}", table.f_stat, t * t);
        assert!((table.p_value - pt).abs() < 1e-9);
        // frozen reference: t = 0.0986333784743075, p = 0.924194424449317
        assert!((t - 0.0986333784743075).abs() < 1e-9);
        assert!((pt - 0.924194424449317).abs() < 1e-6);
    }

    #[test]
    fn rm_anova_rejects_missing_cells() {
        let data = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0]];
        assert!(matches!(rm_anova(&data), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rm_anova_subject_offsets_do_not_matter() {
        let mut shifted = matrix();
        for (i, row) in shifted.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v += 1000.0 * i as f64;
            }
        }
        let a = rm_anova(&matrix()).unwrap();
        let b = rm_anova(&shifted).unwrap();
        assert!((a.f_stat - b.f_stat).abs() < 1e-6);
        assert!((a.p_value - b.p_value).abs() < 1e-9);
    }

    #[test]
    fn paired_t_reference_and_edges() {
        let x = vec![
            5.1, 4.8, 6.2, 5.5, 4.9, 5.8, 6.0, 5.2, 4.7, 5.9, 5.3, 6.1, 4.6, 5.7, 5.0, 5.4,
            6.3, 4.5, 5.6, 5.15,
        ];
        let y = vec![
            4.9, 5.0, 5.8, 5.9, 4.4, 5.5, 6.4, 4.8, 4.9, 5.5, 5.6, 5.7, 4.2, 6.0, 4.6, 5.1,
            6.6, 4.1, 5.2, 5.05,
        ];
        let s = PairedSamples::new(x.clone(), y.clone()).unwrap();
        let (t, p) = paired_t(&s).unwrap();
        assert!((t - 1.67451908548411).abs() < 1e-9);
        assert!((p - 0.110410472467194).abs() < 1e-9);
        assert!((cohens_d_paired(&s).unwrap() - 0.374433850476324).abs() < 1e-12);

        // sign flip when conditions swap, p unchanged
        let swapped = PairedSamples::new(y, x).unwrap();
        let (t2, p2) = paired_t(&swapped).unwrap();
        assert!((t + t2).abs() < 1e-12);
        assert!((p - p2).abs() < 1e-12);

        // identical conditions -> zero-variance differences
        let same = PairedSamples::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            paired_t(&same),
            Err(Error::DegenerateVariance(_))
        ));

        // zero-mean alternating differences -> t = 0, p = 1
        let alt = PairedSamples::new(
            vec![1.0, -1.0, 1.0, -1.0],
            vec![0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let (t3, p3) = paired_t(&alt).unwrap();
        assert_eq!(t3, 0.0);
        assert!((p3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(&[0.01, 0.02], 2).unwrap(), vec![0.02, 0.04]);
        assert_eq!(bonferroni(&[0.9], 3).unwrap(), vec![1.0]);
        assert_eq!(bonferroni(&[], 0).unwrap(), Vec::<f64>::new());
        assert!(bonferroni(&[0.1, 0.2], 1).is_err());
    }

    #[test]
    fn cohens_d_closed_form() {
        let s = PairedSamples::new(vec![1.0, 3.0], vec![0.0, 0.0]).unwrap();
        assert!((cohens_d_paired(&s).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let same = PairedSamples::new(vec![2.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            cohens_d(&same, CohensDVariant::Paired),
            Err(Error::DegenerateVariance(_))
        ));
        // pooled variant on the same data
        let s2 = PairedSamples::new(vec![2.0, 4.0], vec![1.0, 1.0]).unwrap();
        let d = cohens_d(&s2, CohensDVariant::Pooled).unwrap();
        assert!((d - 2.0).abs() < 1e-12); // mean diff 2, pooled sd 1
    }
}
