//! Bob's disclosed soft metric `N = g(Y)`: the CDF of the channel output
//! conditioned on its decision region, and Alice's inverse of it.
//!
//! Each region carries exactly a quarter of the output mass, so the
//! conditional CDF is `4 F_Y(y) - k` for region `k`. Under the channel law `N`
//! is uniform on `(0, 1]` in every region and hence independent of the
//! decision.

use serde::{Deserialize, Serialize};

use crate::channel::{Constellation, ORDER};
use crate::error::{Error, Result};
use crate::quantizer::QuantizerSpec;

/// Lower clamp applied to the metric so that it never reaches zero.
pub const MIN_METRIC: f64 = 1e-300;

/// Which form of the conditional CDF is disclosed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricConvention {
    /// Plain conditional CDF in all four regions.
    #[default]
    Cdf,
    /// Complementary CDF `1 - F` in regions 1 and 3.
    ComplementOddRegions,
}

impl MetricConvention {
    #[inline]
    fn complemented(self, region: usize) -> bool {
        matches!(self, MetricConvention::ComplementOddRegions) && region % 2 == 1
    }
}

/// A disclosed metric value in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SoftMetricValue(f64);

impl SoftMetricValue {
    pub fn new(n: f64) -> Result<Self> {
        if n > 0.0 && n <= 1.0 {
            Ok(SoftMetricValue(n))
        } else {
            Err(Error::invalid(format!(
                "soft metric must lie in (0, 1], got {n}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Computes `N` for an observation `y` already quantized to `region`.
pub fn soft_metric(
    y: f64,
    region: usize,
    spec: &QuantizerSpec,
    constellation: &Constellation,
    convention: MetricConvention,
) -> Result<SoftMetricValue> {
    if region >= ORDER || spec.quantize(y) != region {
        return Err(Error::invalid(format!(
            "observation {y} does not lie in region {region}"
        )));
    }
    Ok(SoftMetricValue(metric_unchecked(
        y,
        region,
        constellation,
        convention,
    )))
}

#[inline]
pub(crate) fn metric_unchecked(
    y: f64,
    region: usize,
    constellation: &Constellation,
    convention: MetricConvention,
) -> f64 {
    let scaled = 4.0 * constellation.mixture_cdf(y);
    let n = if convention.complemented(region) {
        (region + 1) as f64 - scaled
    } else {
        scaled - region as f64
    };
    n.clamp(MIN_METRIC, 1.0)
}

/// The unique observation in `region` that produces metric `n`.
pub fn invert_soft_metric(
    region: usize,
    n: f64,
    constellation: &Constellation,
    convention: MetricConvention,
) -> Result<f64> {
    if region >= ORDER {
        return Err(Error::invalid(format!("region {region} out of range 0..4")));
    }
    let n = SoftMetricValue::new(n)?.get();
    Ok(invert_unchecked(region, n, constellation, convention))
}

#[inline]
pub(crate) fn invert_unchecked(
    region: usize,
    n: f64,
    constellation: &Constellation,
    convention: MetricConvention,
) -> f64 {
    let within = if convention.complemented(region) {
        1.0 - n
    } else {
        n
    };
    constellation.quantile_unchecked((region as f64 + within) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_constellation;
    use crate::quantizer::Labelling;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(snr_db: f64) -> (Constellation, QuantizerSpec) {
        let c = make_constellation(snr_db).unwrap();
        let spec = QuantizerSpec::new(&c, Labelling::Natural);
        (c, spec)
    }

    #[test]
    fn metric_at_region_edges() {
        let (c, spec) = setup(-3.0);
        let cdf = MetricConvention::Cdf;
        let t = *spec.thresholds();
        // Upper edges belong to the region and give exactly 1.
        for (k, &edge) in t.iter().enumerate().take(3) {
            let n = soft_metric(edge, k, &spec, &c, cdf).unwrap().get();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
        // Just above a lower edge the metric tends to zero.
        for k in 1..4 {
            let y = t[k - 1] + 1e-9;
            let n = soft_metric(y, k, &spec, &c, cdf).unwrap().get();
            assert!(n > 0.0 && n < 1e-8, "{n}");
        }
        assert_eq!(soft_metric(0.0, 1, &spec, &c, cdf).unwrap().get(), 1.0);
    }

    #[test]
    fn region_mismatch_rejected() {
        let (c, spec) = setup(0.0);
        assert!(soft_metric(0.1, 0, &spec, &c, MetricConvention::Cdf).is_err());
        assert!(soft_metric(0.1, 7, &spec, &c, MetricConvention::Cdf).is_err());
    }

    #[test]
    fn inversion_rejects_bad_metric() {
        let (c, _) = setup(0.0);
        for n in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(invert_soft_metric(1, n, &c, MetricConvention::Cdf).is_err());
        }
        assert!(invert_soft_metric(4, 0.5, &c, MetricConvention::Cdf).is_err());
    }

    #[test]
    fn inversion_special_points() {
        let (c, _) = setup(-10.0);
        let y = invert_soft_metric(1, 1.0, &c, MetricConvention::Cdf).unwrap();
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-8);
        let y = invert_soft_metric(0, 0.5, &c, MetricConvention::Cdf).unwrap();
        assert_abs_diff_eq!(y, c.mixture_quantile(0.125).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn round_trip_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for convention in [
            MetricConvention::Cdf,
            MetricConvention::ComplementOddRegions,
        ] {
            for snr_db in [-18.0, -10.0, 0.0, 8.0] {
                let (c, spec) = setup(snr_db);
                let mut max_err = 0f64;
                for _ in 0..10_000 {
                    let region = rng.gen_range(0..4);
                    let n: f64 = rng.gen_range(1e-6..1.0);
                    let y = invert_soft_metric(region, n, &c, convention).unwrap();
                    assert_eq!(spec.quantize(y), region);
                    let back = soft_metric(y, region, &spec, &c, convention).unwrap().get();
                    max_err = max_err.max((back - n).abs());
                }
                assert!(max_err < 1e-7, "{convention:?} at {snr_db} dB: {max_err}");
            }
        }
    }

    #[test]
    fn complement_flips_odd_regions_only() {
        let (c, spec) = setup(-5.0);
        for y in [-2.0, -0.3, 0.4, 2.5] {
            let region = spec.quantize(y);
            let plain = soft_metric(y, region, &spec, &c, MetricConvention::Cdf)
                .unwrap()
                .get();
            let comp = soft_metric(y, region, &spec, &c, MetricConvention::ComplementOddRegions)
                .unwrap()
                .get();
            if region % 2 == 1 {
                assert_abs_diff_eq!(plain + comp, 1.0, epsilon = 1e-12);
            } else {
                assert_eq!(plain, comp);
            }
        }
    }
}
