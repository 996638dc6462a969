//! Interval and significance computations behind the accuracy and
//! literature-coding reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// A success/trial pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Proportion {
        assert!(successes <= trials, "successes {successes} > trials {trials}");
        Proportion { successes, trials }
    }

    pub fn value(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Wilson score interval. Chosen over Wald because several conditions sit
/// near accuracy 1.0, where Wald degenerates.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Invalid("wilson_interval requires at least one trial".into()));
    }
    if successes > trials {
        return Err(Error::Invalid(format!("{successes} successes out of {trials} trials")));
    }
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(Error::Invalid(format!("confidence {confidence} outside (0, 1)")));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z = normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the boundaries the interval touches 0 or 1 exactly; keep it exact
    // rather than leaving rounding dust.
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((low, high))
}

/// Result of the n-1 chi-squared test on a 2x2 proportion table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    /// Unscaled Pearson statistic.
    pub pearson: f64,
    /// Pearson scaled by (N-1)/N.
    pub statistic: f64,
    /// Upper tail of chi-squared with 1 df at `statistic`.
    pub p_value: f64,
    /// True when a margin of the table is zero; the test is undefined and
    /// the p-value is reported as 1.
    pub degenerate: bool,
}

impl ChiSquareResult {
    pub fn significant_at(&self, alpha: f64) -> bool {
        !self.degenerate && self.p_value < alpha
    }
}

/// Pearson chi-squared on the 2x2 table of two proportions, scaled by
/// (N-1)/N; the p-value comes from the chi-squared distribution with one
/// degree of freedom via the regularized upper incomplete gamma.
pub fn chisq_n_minus_1(p1: Proportion, p2: Proportion) -> Result<ChiSquareResult> {
    if p1.trials == 0 || p2.trials == 0 {
        return Err(Error::Invalid("both groups need at least one trial".into()));
    }
    let a = p1.successes as f64;
    let b = (p1.trials - p1.successes) as f64;
    let c = p2.successes as f64;
    let d = (p2.trials - p2.successes) as f64;
    let n = a + b + c + d;
    if n < 2.0 {
        return Err(Error::Invalid("n-1 chi-squared requires N >= 2".into()));
    }

    let col1 = a + c;
    let col2 = b + d;
    if col1 == 0.0 || col2 == 0.0 {
        log::warn!("chi-squared margin is zero; test undefined, reporting p = 1");
        return Ok(ChiSquareResult { pearson: 0.0, statistic: 0.0, p_value: 1.0, degenerate: true });
    }

    let pearson = n * (a * d - b * c).powi(2)
        / ((a + b) * (c + d) * col1 * col2);
    let statistic = pearson * (n - 1.0) / n;
    let p_value = chi2_sf_1df(statistic);
    Ok(ChiSquareResult { pearson, statistic, p_value, degenerate: false })
}

/// Survival function of chi-squared with 1 degree of freedom.
fn chi2_sf_1df(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(0.5, x / 2.0)
}

/// Annotator certainty labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certainty {
    Definitely,
    Probably,
    Unsure,
}

impl Certainty {
    pub fn parse(s: &str) -> Result<Certainty> {
        match s.trim().to_ascii_lowercase().as_str() {
            "definitely" => Ok(Certainty::Definitely),
            "probably" => Ok(Certainty::Probably),
            "unsure" => Ok(Certainty::Unsure),
            other => Err(Error::Invalid(format!(
                "unknown certainty label {other:?} (expected definitely, probably, or unsure)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Certainty::Definitely => "definitely",
            Certainty::Probably => "probably",
            Certainty::Unsure => "unsure",
        }
    }
}

/// Normalized certainty distribution for one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertaintyDist {
    pub counts: BTreeMap<Certainty, usize>,
    pub fractions: BTreeMap<Certainty, f64>,
    pub total: usize,
}

/// Tabulates `(condition, certainty label)` records into one normalized
/// distribution per condition. Unknown labels are rejected, naming the
/// offending record.
pub fn certainty_summary<'a>(
    records: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<BTreeMap<String, CertaintyDist>> {
    let mut counts: BTreeMap<String, BTreeMap<Certainty, usize>> = BTreeMap::new();
    for (row, (condition, label)) in records.into_iter().enumerate() {
        let certainty = Certainty::parse(label)
            .map_err(|e| Error::row(format!("{}", row + 1), e.to_string()))?;
        *counts.entry(condition.to_string()).or_default().entry(certainty).or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(condition, counts)| {
            let total: usize = counts.values().sum();
            let fractions = counts
                .iter()
                .map(|(c, n)| (*c, *n as f64 / total as f64))
                .collect();
            (condition, CertaintyDist { counts, fractions, total })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_midpoint_case() {
        let (low, high) = wilson_interval(50, 100, 0.95).unwrap();
        assert!((low - 0.4038).abs() < 5e-4, "{low}");
        assert!((high - 0.5962).abs() < 5e-4, "{high}");
    }

    #[test]
    fn wilson_boundaries_are_exact() {
        let (low, _) = wilson_interval(0, 10, 0.95).unwrap();
        assert_eq!(low, 0.0);
        let (_, high) = wilson_interval(10, 10, 0.95).unwrap();
        assert_eq!(high, 1.0);
    }

    #[test]
    fn wilson_rejects_zero_trials() {
        assert!(wilson_interval(0, 0, 0.95).is_err());
    }

    #[test]
    fn chisq_identical_proportions() {
        let r = chisq_n_minus_1(Proportion::new(5, 10), Proportion::new(5, 10)).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chisq_scaled_statistic() {
        let r = chisq_n_minus_1(Proportion::new(18, 20), Proportion::new(12, 20)).unwrap();
        assert!((r.pearson - 4.8).abs() < 1e-9, "{}", r.pearson);
        assert!((r.statistic - 4.68).abs() < 1e-9, "{}", r.statistic);
    }

    #[test]
    fn chisq_degenerate_margin() {
        let r = chisq_n_minus_1(Proportion::new(0, 10), Proportion::new(0, 10)).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chisq_is_symmetric() {
        let a = Proportion::new(7, 30);
        let b = Proportion::new(19, 25);
        let r1 = chisq_n_minus_1(a, b).unwrap();
        let r2 = chisq_n_minus_1(b, a).unwrap();
        assert!((r1.statistic - r2.statistic).abs() < 1e-12);
        assert!((r1.p_value - r2.p_value).abs() < 1e-12);
    }

    #[test]
    fn certainty_distribution() {
        let records = [
            ("Zero", "definitely"),
            ("Zero", "definitely"),
            ("Zero", "probably"),
            ("Orig", "unsure"),
        ];
        let summary = certainty_summary(records.iter().map(|(a, b)| (*a, *b))).unwrap();
        assert!((summary["Zero"].fractions[&Certainty::Definitely] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(summary["Orig"].total, 1);
    }

    #[test]
    fn unknown_certainty_label_names_the_row() {
        let records = [("Zero", "definitely"), ("Zero", "sure")];
        let err = certainty_summary(records.iter().map(|(a, b)| (*a, *b))).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    proptest! {
        #[test]
        fn wilson_contains_point_estimate(s in 0u64..=200, extra in 1u64..=200) {
            let n = s + extra;
            let (low, high) = wilson_interval(s, n, 0.95).unwrap();
            let p = s as f64 / n as f64;
            prop_assert!(low <= p + 1e-12 && p <= high + 1e-12);
            prop_assert!((0.0..=1.0).contains(&low) && (0.0..=1.0).contains(&high));
        }

        #[test]
        fn wilson_width_shrinks_with_trials(s in 1u64..=50) {
            // Fixed p = 1/2, growing n.
            let (l1, h1) = wilson_interval(s, 2 * s, 0.95).unwrap();
            let (l2, h2) = wilson_interval(s * 4, 8 * s, 0.95).unwrap();
            prop_assert!(h2 - l2 < h1 - l1);
        }

        #[test]
        fn scaled_statistic_is_below_pearson(a in 0u64..=30, n1 in 1u64..=30, c in 0u64..=30, n2 in 1u64..=30) {
            let p1 = Proportion::new(a.min(n1), n1);
            let p2 = Proportion::new(c.min(n2), n2);
            let r = chisq_n_minus_1(p1, p2).unwrap();
            if r.pearson > 0.0 {
                prop_assert!(r.statistic < r.pearson);
            } else {
                prop_assert_eq!(r.statistic, 0.0);
            }
        }
    }
}
