//! Statistical audit of the disclosed soft metric: per-region uniformity
//! (Kolmogorov-Smirnov) and independence from the decision (chi-square on a
//! region x metric-bin contingency table).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::channel::{Constellation, ORDER};
use crate::error::{Error, Result};
use crate::quantizer::{Labelling, QuantizerSpec};
use crate::softmetric::{metric_unchecked, MetricConvention};

/// One-sample KS statistic of `values` against Uniform(0, 1]. Sorts in place.
pub fn ks_uniform(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let u = u.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - u).max(u - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `sqrt(-ln(alpha / 2) / 2) / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Pearson chi-square statistic of independence and its degrees of freedom.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<(f64, usize)> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 || table.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid(
            "contingency table must be rectangular and at least 2x2",
        ));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|c| table.iter().map(|r| r[c]).sum::<u64>() as f64)
        .collect();
    let total: f64 = row_sums.iter().sum();
    if row_sums.iter().chain(&col_sums).any(|&s| s == 0.0) {
        return Err(Error::invalid(
            "contingency table has an empty row or column",
        ));
    }
    let mut stat = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (c, &observed) in row.iter().enumerate() {
            let expected = row_sums[r] * col_sums[c] / total;
            stat += (observed as f64 - expected).powi(2) / expected;
        }
    }
    Ok((stat, (rows - 1) * (cols - 1)))
}

/// Upper `alpha` quantile of the chi-square distribution.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionAudit {
    pub samples: usize,
    pub ks_statistic: f64,
    pub ks_critical: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub snr_db: f64,
    pub alpha: f64,
    pub regions: Vec<RegionAudit>,
    pub chi_square: f64,
    pub chi_square_critical: f64,
    pub degrees_of_freedom: usize,
    pub total_samples: usize,
}

impl AuditReport {
    pub fn uniform(&self) -> bool {
        self.regions.iter().all(|r| r.ks_statistic < r.ks_critical)
    }

    pub fn independent(&self) -> bool {
        self.chi_square < self.chi_square_critical
    }

    pub fn passed(&self) -> bool {
        self.uniform() && self.independent()
    }
}

/// Audit settings.
#[derive(Debug, Clone, Copy)]
pub struct AuditConfig {
    /// Metric values collected in each region for the KS tests.
    pub per_region: usize,
    /// Equal-width metric bins of the contingency table.
    pub bins: usize,
    pub alpha: f64,
    pub convention: MetricConvention,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            per_region: 100_000,
            bins: 20,
            alpha: 1e-3,
            convention: MetricConvention::Cdf,
            seed: 0,
        }
    }
}

/// Channel uses are drawn until every region holds `per_region` metric
/// values. The KS tests use the first `per_region` values of each region; the
/// independence test uses every draw. Returns the report and all `(region, n)`
/// pairs in draw order.
pub fn audit_soft_metrics(
    constellation: &Constellation,
    config: &AuditConfig,
) -> Result<(AuditReport, Vec<(usize, f64)>)> {
    if config.per_region < 2 || config.bins < 2 || !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::invalid(
            "audit needs per_region >= 2, bins >= 2 and alpha in (0, 1)",
        ));
    }
    let spec = QuantizerSpec::new(constellation, Labelling::Natural);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut per_region: Vec<Vec<f64>> = (0..ORDER)
        .map(|_| Vec::with_capacity(config.per_region))
        .collect();
    let mut table = vec![vec![0u64; config.bins]; ORDER];
    let mut pairs = Vec::with_capacity(ORDER * config.per_region + config.per_region / 10);

    while per_region.iter().any(|v| v.len() < config.per_region) {
        let x = rng.gen_range(0..ORDER);
        let z: f64 = rng.sample(StandardNormal);
        let y = constellation.amplitudes()[x] + constellation.noise_sigma() * z;
        let region = spec.quantize(y);
        let n = metric_unchecked(y, region, constellation, config.convention);
        if per_region[region].len() < config.per_region {
            per_region[region].push(n);
        }
        let bin = ((n * config.bins as f64).ceil() as usize).clamp(1, config.bins) - 1;
        table[region][bin] += 1;
        pairs.push((region, n));
    }

    let critical = ks_critical(config.per_region, config.alpha);
    let regions = per_region
        .iter_mut()
        .map(|values| RegionAudit {
            samples: values.len(),
            ks_statistic: ks_uniform(values),
            ks_critical: critical,
        })
        .collect();
    let (chi_square, df) = chi_square_independence(&table)?;
    Ok((
        AuditReport {
            snr_db: constellation.snr_db(),
            alpha: config.alpha,
            regions,
            chi_square,
            chi_square_critical: chi_square_critical(df, config.alpha),
            degrees_of_freedom: df,
            total_samples: pairs.len(),
        },
        pairs,
    ))
}
