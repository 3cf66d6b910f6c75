//! Fairness statistics for ground-state sampling.
//!
//! A sampler's hits over a verified ground-state manifold are rank-sorted
//! into a histogram; the headline statistic is the maximal absolute
//! deviation of the empirical cumulative distribution from the uniform one.
//! Bootstrap resampling puts an interval on it, and a matched uniform
//! sampler provides the baseline band a fair sampler should fall in.

use crate::ising::SpinConfig;
use crate::oracle::GroundStateSet;
use crate::seeds::{domain, stream};
use crate::{exec, Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Per-ground-state hit counts for one sampler run on one instance.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HitHistogram {
    /// Content hash of the instance the ground states belong to.
    pub instance_id: String,
    /// Which sampler produced the samples.
    pub sampler_id: String,
    /// Hits aligned to the ground-state set's config order.
    pub counts: Vec<u64>,
    /// Samples that landed on a ground state (the sum of `counts`).
    pub total: u64,
    /// Samples that landed anywhere else.
    pub excited: u64,
}

impl HitHistogram {
    /// Tallies sampled configurations against a verified manifold.  Samples
    /// outside the manifold count as excited, not as errors.
    pub fn tally<'a>(
        instance_id: &str,
        sampler_id: &str,
        set: &GroundStateSet,
        samples: impl IntoIterator<Item = &'a SpinConfig>,
    ) -> Self {
        let mut counts = vec![0u64; set.configs().len()];
        let mut excited = 0;
        for config in samples {
            match set.index_of(config) {
                Some(i) => counts[i] += 1,
                None => excited += 1,
            }
        }
        let total = counts.iter().sum();
        HitHistogram {
            instance_id: instance_id.to_string(),
            sampler_id: sampler_id.to_string(),
            counts,
            total,
            excited,
        }
    }

    /// Builds a histogram directly from per-config hit counts.
    pub fn from_counts(instance_id: &str, sampler_id: &str, counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        HitHistogram {
            instance_id: instance_id.to_string(),
            sampler_id: sampler_id.to_string(),
            counts,
            total,
            excited: 0,
        }
    }

    pub fn n_gs(&self) -> usize {
        self.counts.len()
    }

    /// Fraction of all samples that hit the manifold.
    pub fn hit_fraction(&self) -> f64 {
        let all = self.total + self.excited;
        if all == 0 {
            0.0
        } else {
            self.total as f64 / all as f64
        }
    }
}

/// Counts sorted ascending, so the most-visited state has the largest rank.
/// Sorting is stable, preserving config order among ties.
pub fn rank_histogram(counts: &[u64]) -> Vec<u64> {
    let mut sorted = counts.to_vec();
    sorted.sort();
    sorted
}

/// Normalized rank coordinate of each histogram bin: (i + 1) / N_GS.
pub fn rank_coordinates(n_gs: usize) -> Vec<f64> {
    (1..=n_gs).map(|x| x as f64 / n_gs as f64).collect()
}

/// Maximal absolute difference between the empirical cumulative of the
/// rank-sorted counts and the uniform cumulative x / N_GS.
pub fn theta_max(sorted_counts: &[u64], n_gs: usize) -> Result<f64> {
    debug_assert_eq!(sorted_counts.len(), n_gs);
    debug_assert!(sorted_counts.windows(2).all(|w| w[0] <= w[1]));
    let total: u64 = sorted_counts.iter().sum();
    if total == 0 {
        return Err(Error::BadParams(
            "theta_max is undefined for an empty histogram".into(),
        ));
    }
    let mut cum = 0u64;
    let mut theta: f64 = 0.0;
    for (i, &count) in sorted_counts.iter().enumerate() {
        cum += count;
        let empirical = cum as f64 / total as f64;
        let uniform = (i + 1) as f64 / n_gs as f64;
        theta = theta.max((empirical - uniform).abs());
    }
    Ok(theta)
}

/// Convenience: rank-sort and evaluate in one step.
pub fn theta_max_of(counts: &[u64]) -> Result<f64> {
    theta_max(&rank_histogram(counts), counts.len())
}

/// The distribution of the deviation statistic under a perfectly uniform
/// sampler with a matched sample count.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BaselineDist {
    /// One statistic per trial, sorted ascending.
    pub thetas: Vec<f64>,
    pub mean: f64,
    /// Central 95% band (2.5th and 97.5th percentiles).
    pub ci: (f64, f64),
}

impl BaselineDist {
    pub fn contains(&self, theta: f64) -> bool {
        self.ci.0 <= theta && theta <= self.ci.1
    }
}

/// Draws `trials` histograms of `n_samples` uniform picks over `n_gs`
/// states and collects their deviation statistics.
pub fn uniform_baseline(n_samples: u64, n_gs: usize, trials: u32, seed: u64) -> BaselineDist {
    assert!(n_samples > 0 && n_gs > 0 && trials > 0);
    let mut thetas = exec::map_indexed(trials as usize, |trial| {
        let mut rng = stream(seed, domain::BASELINE, trial as u64);
        let mut counts = vec![0u64; n_gs];
        for _ in 0..n_samples {
            counts[rng.gen_range(0..n_gs)] += 1;
        }
        theta_max_of(&counts).expect("n_samples > 0")
    });
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = thetas.iter().sum::<f64>() / thetas.len() as f64;
    let ci = (percentile(&thetas, 2.5), percentile(&thetas, 97.5));
    BaselineDist { thetas, mean, ci }
}

/// Linear-interpolation percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=100.0).contains(&p));
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile bootstrap interval for the deviation statistic: resample the
/// empirical histogram with replacement, shuffle the state indices, re-sort
/// by rank, and take the central 95% of the recomputed statistics.
pub fn bootstrap_ci(counts: &[u64], resamples: u32, seed: u64) -> Result<(f64, f64)> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::BadParams(
            "cannot bootstrap an empty histogram".into(),
        ));
    }
    let n_gs = counts.len();
    // Cumulative thresholds turn a uniform draw into a categorical sample.
    let mut cum = Vec::with_capacity(n_gs);
    let mut acc = 0u64;
    for &count in counts {
        acc += count;
        cum.push(acc);
    }
    let mut thetas = exec::map_indexed(resamples as usize, |r| {
        let mut rng = stream(seed, domain::BOOTSTRAP, r as u64);
        let mut resampled = vec![0u64; n_gs];
        for _ in 0..total {
            let u = rng.gen_range(0..total);
            let idx = cum.partition_point(|&threshold| threshold <= u);
            resampled[idx] += 1;
        }
        resampled.shuffle(&mut rng);
        theta_max_of(&resampled).expect("total > 0")
    });
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((percentile(&thetas, 2.5), percentile(&thetas, 97.5)))
}

/// p-value of Pearson's chi-square test of the counts against the uniform
/// distribution over their bins.
pub fn chi_square_uniform_p(counts: &[u64]) -> Result<f64> {
    let n_gs = counts.len();
    let total: u64 = counts.iter().sum();
    if n_gs < 2 || total == 0 {
        return Err(Error::BadParams(
            "chi-square needs at least two bins and one sample".into(),
        ));
    }
    let expected = total as f64 / n_gs as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((n_gs - 1) as f64).expect("n_gs >= 2");
    Ok(1.0 - dist.cdf(statistic))
}

/// Everything the suite reports about one sampler run on one instance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FairnessReport {
    pub instance_id: String,
    pub sampler_id: String,
    pub n_gs: usize,
    /// Rank-sorted hit counts.
    pub ranked_counts: Vec<u64>,
    pub total: u64,
    pub excited: u64,
    pub theta_max: f64,
    /// Percentile bootstrap interval on `theta_max`.
    pub bootstrap_ci: (f64, f64),
    /// Mean deviation statistic of the matched uniform sampler.
    pub baseline_theta: f64,
    /// Central 95% band of the matched uniform sampler.
    pub baseline_ci: (f64, f64),
    /// Uniformity p-value of the raw counts.
    pub chi_square_p: f64,
}

/// Analysis knobs for [`build_report`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReportParams {
    /// Bootstrap resample count (at least 1000).
    pub bootstrap_resamples: u32,
    /// Matched uniform-sampler trials.
    pub baseline_trials: u32,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams {
            bootstrap_resamples: 10_000,
            baseline_trials: 1_000,
        }
    }
}

/// Computes the full fairness report for one histogram.
pub fn build_report(
    histogram: &HitHistogram,
    params: &ReportParams,
    seed: u64,
) -> Result<FairnessReport> {
    if params.bootstrap_resamples < 1000 {
        return Err(Error::BadParams(
            "bootstrap needs at least 1000 resamples".into(),
        ));
    }
    let ranked = rank_histogram(&histogram.counts);
    let theta = theta_max(&ranked, histogram.n_gs())?;
    let ci = bootstrap_ci(&histogram.counts, params.bootstrap_resamples, seed)?;
    let baseline = uniform_baseline(
        histogram.total,
        histogram.n_gs(),
        params.baseline_trials,
        seed,
    );
    let chi_square_p = chi_square_uniform_p(&histogram.counts)?;
    Ok(FairnessReport {
        instance_id: histogram.instance_id.clone(),
        sampler_id: histogram.sampler_id.clone(),
        n_gs: histogram.n_gs(),
        ranked_counts: ranked,
        total: histogram.total,
        excited: histogram.excited,
        theta_max: theta,
        bootstrap_ci: ci,
        baseline_theta: baseline.mean,
        baseline_ci: baseline.ci,
        chi_square_p,
    })
}

/// Drops reports whose ground-state sample count is below `floor`.
pub fn min_solutions_filter(reports: Vec<FairnessReport>, floor: u64) -> Vec<FairnessReport> {
    reports.into_iter().filter(|r| r.total >= floor).collect()
}

/// One instance present in both runs of a comparison.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompareRow {
    pub instance_id: String,
    pub theta_a: f64,
    pub ci_a: (f64, f64),
    pub theta_b: f64,
    pub ci_b: (f64, f64),
}

/// Inner-joins two report sets on instance id, keeping instances with
/// samples in both.  Returns the rows plus a warning flag that is set when
/// the join is empty.
pub fn compare_runs(a: &[FairnessReport], b: &[FairnessReport]) -> (Vec<CompareRow>, bool) {
    let mut rows = Vec::new();
    for ra in a {
        if ra.total == 0 {
            continue;
        }
        if let Some(rb) = b.iter().find(|rb| rb.instance_id == ra.instance_id) {
            if rb.total == 0 {
                continue;
            }
            rows.push(CompareRow {
                instance_id: ra.instance_id.clone(),
                theta_a: ra.theta_max,
                ci_a: ra.bootstrap_ci,
                theta_b: rb.theta_max,
                ci_b: rb.bootstrap_ci,
            });
        }
    }
    let warning = rows.is_empty();
    (rows, warning)
}
