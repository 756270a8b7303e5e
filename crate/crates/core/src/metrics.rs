//! Reconciliation efficiency and information rates.
//!
//! Efficiency follows the convention `beta = R m / log2(1 + SNR)`, i.e. the
//! operated rate of `m` coded bits per real symbol measured against
//! `log2(1 + SNR)`. Literature that uses the per-quadrature capacity
//! `0.5 log2(1 + SNR)` reports values twice as large.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Constellation, ORDER};
use crate::error::{Error, Result};
use crate::llr::{
    candidate_observations, llr_direct, normalize_log_weights, rrs_log_weights, transition_matrix,
    Scheme, SchemeEngine,
};
use crate::quantizer::{Labelling, QuantizerSpec};
use crate::softmetric::{metric_unchecked, MetricConvention};

/// Samples per Monte-Carlo shard. Each shard draws from its own stream.
const SHARD: usize = 16_384;

pub const MIN_SOFT_MI_SAMPLES: usize = 10_000;
pub const MIN_BMI_SAMPLES: usize = 100_000;

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    pub snr_db: f64,
    pub rate: f64,
    pub bits_per_symbol: u32,
    pub beta: f64,
}

impl EfficiencyPoint {
    pub fn new(snr_db: f64, rate: f64, bits_per_symbol: u32) -> Self {
        EfficiencyPoint {
            snr_db,
            rate,
            bits_per_symbol,
            beta: beta_from_snr(snr_db, rate, bits_per_symbol),
        }
    }
}

pub fn beta_from_snr(snr_db: f64, rate: f64, bits_per_symbol: u32) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    rate * bits_per_symbol as f64 * LN_2 / snr.ln_1p()
}

/// Inverse of [`beta_from_snr`] in the SNR argument.
pub fn snr_for_beta(beta: f64, rate: f64, bits_per_symbol: u32) -> f64 {
    let snr = (rate * bits_per_symbol as f64 * LN_2 / beta).exp_m1();
    10.0 * snr.log10()
}

/// `I(X; X^)` in bits per symbol for uniform inputs.
pub fn mi_hard(constellation: &Constellation, spec: &QuantizerSpec) -> f64 {
    let p = transition_matrix(constellation, spec);
    let prior = constellation.probabilities();
    let marginal: [f64; ORDER] =
        std::array::from_fn(|k| (0..ORDER).map(|x| prior[x] * p[x][k]).sum());
    let mut total = 0.0;
    for x in 0..ORDER {
        for k in 0..ORDER {
            if p[x][k] > 0.0 {
                total += prior[x] * p[x][k] * (p[x][k] / marginal[k]).log2();
            }
        }
    }
    total
}

/// `I(X; Y)` in bits per symbol by adaptive Simpson quadrature.
pub fn mi_xy(constellation: &Constellation) -> f64 {
    let integrand = |y: f64| -> f64 {
        let ln_fy = constellation.ln_mixture_pdf(y);
        (0..ORDER)
            .map(|x| {
                let ln_f = constellation.ln_conditional_pdf(y, x);
                constellation.probabilities()[x] * ln_f.exp() * (ln_f - ln_fy)
            })
            .sum::<f64>()
            / LN_2
    };
    let (lo, hi) = constellation.quantile_bracket();
    // Panels split at the amplitudes keep each piece unimodal.
    let mut knots = vec![lo];
    knots.extend(constellation.amplitudes());
    knots.push(hi);
    knots
        .windows(2)
        .map(|w| adaptive_simpson(&integrand, w[0], w[1], 1e-13))
        .sum()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Runs `per_sample` over `samples` draws split into shards with independent
/// streams, reducing in shard order so the result does not depend on the
/// thread count.
fn sharded_mean<F>(samples: usize, seed: u64, per_sample: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let shards = samples.div_ceil(SHARD);
    let partial: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let count = SHARD.min(samples - s * SHARD);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..count {
                let v = per_sample(&mut rng);
                sum += v;
                sq += v * v;
            }
            (sum, sq)
        })
        .collect();
    let (sum, sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    }
}

#[inline]
fn draw_channel_use(constellation: &Constellation, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let x = rng.gen_range(0..ORDER);
    let z: f64 = rng.sample(StandardNormal);
    (
        x,
        constellation.amplitudes()[x] + constellation.noise_sigma() * z,
    )
}

/// Plug-in estimate of `I(X^; X, N)`, the information Alice holds about Bob's
/// decision once the soft metric is disclosed.
pub fn mi_soft_mc<R: Rng + ?Sized>(
    constellation: &Constellation,
    convention: MetricConvention,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if samples < MIN_SOFT_MI_SAMPLES {
        return Err(Error::invalid(format!(
            "at least {MIN_SOFT_MI_SAMPLES} samples required, got {samples}"
        )));
    }
    let spec = QuantizerSpec::new(constellation, Labelling::Natural);
    let entropy = (ORDER as f64).log2();
    let seed = rng.gen();
    Ok(sharded_mean(samples, seed, |rng| {
        let (x, y) = draw_channel_use(constellation, rng);
        let region = spec.quantize(y);
        let n = metric_unchecked(y, region, constellation, convention);
        let candidates = candidate_observations(n, constellation, convention);
        let posterior = normalize_log_weights(&rrs_log_weights(x, &candidates, constellation));
        entropy + posterior[region].log2()
    }))
}

/// `log2(1 + exp(-v))` without overflow.
#[inline]
fn log2_1p_exp_neg(v: f64) -> f64 {
    ((-v).max(0.0) + (-v.abs()).exp().ln_1p()) / LN_2
}

/// Bitwise mutual information of the scheme's bit-metric decoder under a
/// labelling.
pub fn bmi_mc<R: Rng + ?Sized>(
    scheme: Scheme,
    labelling: Labelling,
    constellation: &Constellation,
    convention: MetricConvention,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if samples < MIN_BMI_SAMPLES {
        return Err(Error::invalid(format!(
            "at least {MIN_BMI_SAMPLES} samples required, got {samples}"
        )));
    }
    let engine = SchemeEngine::new(scheme, constellation.clone(), labelling, convention);
    let seed = rng.gen();
    Ok(sharded_mean(samples, seed, |rng| {
        let (x, y) = draw_channel_use(constellation, rng);
        let obs = engine.observe(x, y);
        let loss: f64 = obs
            .bits
            .iter()
            .zip(obs.llrs.as_array())
            .map(|(&b, l)| log2_1p_exp_neg(if b == 0 { l } else { -l }))
            .sum();
        2.0 - loss
    }))
}

/// Direct-scheme BMI by quadrature, used as a deterministic cross-check of
/// [`bmi_mc`].
pub fn bmi_direct_quadrature(constellation: &Constellation, labelling: Labelling) -> f64 {
    let mut total = 0.0;
    for x in 0..ORDER {
        let bits = labelling.bits(x);
        let a = constellation.amplitudes()[x];
        let integrand = |y: f64| {
            let llr = llr_direct(y, constellation, labelling).as_array();
            let loss: f64 = (0..2)
                .map(|i| log2_1p_exp_neg(if bits[i] == 0 { llr[i] } else { -llr[i] }))
                .sum();
            constellation.conditional_pdf(y, x) * loss
        };
        let w = 12.0 * constellation.noise_sigma();
        total += constellation.probabilities()[x]
            * (adaptive_simpson(&integrand, a - w, a, 1e-12)
                + adaptive_simpson(&integrand, a, a + w, 1e-12));
    }
    2.0 - total
}
