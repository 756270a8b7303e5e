//! PAM-4 source, real AWGN channel and the Gaussian-mixture law of the
//! channel output.
//!
//! The noise variance is fixed to one and the constellation is scaled so that
//! the mean symbol energy equals the requested SNR. SNR is therefore defined
//! per real symbol.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

/// Number of PAM symbols.
pub const ORDER: usize = 4;

/// Half-width of the quantile search bracket beyond the outer amplitudes, in
/// units of the noise standard deviation.
pub const BRACKET_SIGMAS: f64 = 12.0;

const QUANTILE_TOL: f64 = 1e-15;
const QUANTILE_MAX_ITER: usize = 200;

pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF via the complementary error function.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub(crate) fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// `P(lo < Z <= hi)` for a standard normal `Z`, evaluated on whichever tail
/// keeps the difference well conditioned.
pub(crate) fn std_normal_interval(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        std_normal_sf(lo) - std_normal_sf(hi)
    } else {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    }
}

/// Numerically stable `ln(sum(exp(v)))`.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// A uniformly-driven PAM-4 constellation over a real AWGN channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    amplitudes: [f64; ORDER],
    probabilities: [f64; ORDER],
    noise_sigma: f64,
}

/// One channel use: Alice's symbol index and Bob's observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub x_index: usize,
    pub y: f64,
}

/// Builds the unit-noise constellation `a * {-3, -1, 1, 3}` with mean energy
/// `5 a^2 = 10^(snr_db / 10)`.
pub fn make_constellation(snr_db: f64) -> Result<Constellation> {
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
    }
    let energy = 10f64.powf(snr_db / 10.0);
    let a = (energy / 5.0).sqrt();
    Constellation::new([-3.0 * a, -a, a, 3.0 * a], 1.0)
}

impl Constellation {
    /// Builds a constellation from explicit amplitudes, which must be strictly
    /// increasing and symmetric about zero. Symbols are equiprobable.
    pub fn new(amplitudes: [f64; ORDER], noise_sigma: f64) -> Result<Self> {
        if !(noise_sigma.is_finite() && noise_sigma > 0.0) {
            return Err(Error::invalid(format!(
                "noise sigma must be positive and finite, got {noise_sigma}"
            )));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        if amplitudes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("amplitudes must be strictly increasing"));
        }
        let scale = amplitudes[ORDER - 1].abs().max(f64::MIN_POSITIVE);
        for k in 0..ORDER {
            if (amplitudes[k] + amplitudes[ORDER - 1 - k]).abs() > 1e-12 * scale {
                return Err(Error::invalid("amplitudes must be symmetric about zero"));
            }
        }
        Ok(Constellation {
            amplitudes,
            probabilities: [1.0 / ORDER as f64; ORDER],
            noise_sigma,
        })
    }

    pub fn amplitudes(&self) -> &[f64; ORDER] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> &[f64; ORDER] {
        &self.probabilities
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn mean_energy(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.probabilities)
            .map(|(a, p)| p * a * a)
            .sum()
    }

    pub fn snr_linear(&self) -> f64 {
        self.mean_energy() / (self.noise_sigma * self.noise_sigma)
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr_linear().log10()
    }

    /// Search interval used by [`Constellation::mixture_quantile`].
    pub fn quantile_bracket(&self) -> (f64, f64) {
        let w = BRACKET_SIGMAS * self.noise_sigma;
        (self.amplitudes[0] - w, self.amplitudes[ORDER - 1] + w)
    }

    /// Sends Alice's symbols through the channel.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        x_indices: &[usize],
        rng: &mut R,
    ) -> Result<Vec<ChannelSample>> {
        if let Some(&bad) = x_indices.iter().find(|&&x| x >= ORDER) {
            return Err(Error::invalid(format!(
                "symbol index {bad} out of range 0..4"
            )));
        }
        Ok(x_indices
            .iter()
            .map(|&x| {
                let z: f64 = rng.sample(StandardNormal);
                ChannelSample {
                    x_index: x,
                    y: self.amplitudes[x] + self.noise_sigma * z,
                }
            })
            .collect())
    }

    /// `f(y | X = x)`.
    pub fn conditional_pdf(&self, y: f64, x_index: usize) -> f64 {
        std_normal_pdf((y - self.amplitudes[x_index]) / self.noise_sigma) / self.noise_sigma
    }

    /// `ln f(y | X = x)`.
    pub fn ln_conditional_pdf(&self, y: f64, x_index: usize) -> f64 {
        let z = (y - self.amplitudes[x_index]) / self.noise_sigma;
        -0.5 * z * z - self.noise_sigma.ln() - 0.5 * (2.0 * PI).ln()
    }

    pub fn mixture_pdf(&self, y: f64) -> f64 {
        (0..ORDER)
            .map(|x| self.probabilities[x] * self.conditional_pdf(y, x))
            .sum()
    }

    /// `ln f_Y(y)`, accurate far into the tails where the density underflows.
    pub fn ln_mixture_pdf(&self, y: f64) -> f64 {
        let terms: [f64; ORDER] =
            std::array::from_fn(|x| self.probabilities[x].ln() + self.ln_conditional_pdf(y, x));
        log_sum_exp(&terms)
    }

    pub fn mixture_cdf(&self, y: f64) -> f64 {
        (0..ORDER)
            .map(|x| {
                self.probabilities[x] * std_normal_cdf((y - self.amplitudes[x]) / self.noise_sigma)
            })
            .sum()
    }

    /// Inverse of [`Constellation::mixture_cdf`]: safeguarded Newton iteration
    /// inside the bracket returned by [`Constellation::quantile_bracket`].
    pub fn mixture_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        Ok(self.quantile_unchecked(p))
    }

    /// Quantile for `p` in `[0, 1]`; the bracket ends stand in for the
    /// infinite quantiles at 0 and 1.
    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = self.quantile_bracket();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        // Start from the moment-matched Gaussian approximation.
        let spread = (self.mean_energy() + self.noise_sigma * self.noise_sigma).sqrt();
        let mut y = (-SQRT_2 * erfc_inv(2.0 * p) * spread).clamp(lo, hi);
        for _ in 0..QUANTILE_MAX_ITER {
            let err = self.mixture_cdf(y) - p;
            if err.abs() <= QUANTILE_TOL {
                break;
            }
            if err > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let density = self.mixture_pdf(y);
            let newton = y - err / density;
            y = if density > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                mid
            };
        }
        y
    }
}
