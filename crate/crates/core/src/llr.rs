//! Log-likelihood ratios for the three reconciliation schemes.
//!
//! Sign convention: positive values favour bit 0. Every engine clips its
//! output to `[-LLR_CLIP, LLR_CLIP]`.
//!
//! * hard reverse reconciliation: Alice's LLRs on Bob's bits depend only on her
//!   symbol and are tabulated once from the 4x4 transition matrix;
//! * soft reverse reconciliation: Alice also sees the metric `N`; the four
//!   candidate observations `y_k = g_k^{-1}(N)` give the posterior weights
//!   `w_k = f(y_k | x) / f_Y(y_k)`;
//! * direct: Bob's LLRs on Alice's bits from the raw observation, the PAM-4
//!   benchmark.

use serde::{Deserialize, Serialize};

use crate::channel::{log_sum_exp, std_normal_interval, Constellation, ORDER};
use crate::error::{Error, Result};
use crate::quantizer::{Labelling, QuantizerSpec};
use crate::softmetric::{invert_unchecked, metric_unchecked, MetricConvention, SoftMetricValue};

pub const LLR_CLIP: f64 = 50.0;

/// Reconciliation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// PAM-4 over AWGN decoded directly from the channel output (benchmark).
    Direct,
    /// Reverse reconciliation with hard information only.
    Rrh,
    /// Reverse reconciliation with the disclosed soft metric.
    Rrs,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Direct => "direct",
            Scheme::Rrh => "rrh",
            Scheme::Rrs => "rrs",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Scheme::Direct),
            "rrh" => Ok(Scheme::Rrh),
            "rrs" => Ok(Scheme::Rrs),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// LLRs of the two bits of one symbol, MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LlrPair {
    pub msb: f64,
    pub lsb: f64,
}

impl LlrPair {
    pub fn as_array(self) -> [f64; 2] {
        [self.msb, self.lsb]
    }

    /// Number of components that hit the clip level.
    pub fn clipped(self) -> usize {
        self.as_array()
            .iter()
            .filter(|v| v.abs() >= LLR_CLIP)
            .count()
    }
}

#[inline]
fn clip(v: f64) -> f64 {
    v.clamp(-LLR_CLIP, LLR_CLIP)
}

/// Bitwise LLRs from per-index log-weights under a labelling.
#[inline]
fn bit_llrs(log_weights: &[f64; ORDER], labelling: Labelling) -> LlrPair {
    let map = labelling.bit_map();
    let mut out = [0.0; 2];
    for (bit, slot) in out.iter_mut().enumerate() {
        let mut zeros = [f64::NEG_INFINITY; 2];
        let mut ones = [f64::NEG_INFINITY; 2];
        let (mut nz, mut no) = (0, 0);
        for (k, lw) in log_weights.iter().enumerate() {
            if map[k][bit] == 0 {
                zeros[nz] = *lw;
                nz += 1;
            } else {
                ones[no] = *lw;
                no += 1;
            }
        }
        let diff = log_sum_exp(&zeros) - log_sum_exp(&ones);
        *slot = if diff.is_nan() { 0.0 } else { clip(diff) };
    }
    LlrPair {
        msb: out[0],
        lsb: out[1],
    }
}

/// Channel from Alice's symbol to Bob's region: `P[x][k] = P(X^ = k | X = x)`.
pub fn transition_matrix(
    constellation: &Constellation,
    spec: &QuantizerSpec,
) -> [[f64; ORDER]; ORDER] {
    let sigma = constellation.noise_sigma();
    let mut p = [[0.0; ORDER]; ORDER];
    for (x, row) in p.iter_mut().enumerate() {
        let a = constellation.amplitudes()[x];
        for (k, cell) in row.iter_mut().enumerate() {
            let (lo, hi) = spec.region_bounds(k);
            *cell = std_normal_interval((lo - a) / sigma, (hi - a) / sigma);
        }
    }
    p
}

/// Precomputed hard-reconciliation LLRs indexed by Alice's symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct RrhTable {
    llrs: [LlrPair; ORDER],
}

impl RrhTable {
    #[inline]
    pub fn get(&self, x_index: usize) -> LlrPair {
        self.llrs[x_index]
    }

    pub fn entries(&self) -> &[LlrPair; ORDER] {
        &self.llrs
    }
}

pub fn build_rrh_table(constellation: &Constellation, spec: &QuantizerSpec) -> RrhTable {
    let p = transition_matrix(constellation, spec);
    RrhTable {
        llrs: std::array::from_fn(|x| bit_llrs(&p[x].map(f64::ln), spec.labelling())),
    }
}

/// The four observations compatible with metric `n`, one per region.
#[inline]
pub fn candidate_observations(
    n: f64,
    constellation: &Constellation,
    convention: MetricConvention,
) -> [f64; ORDER] {
    std::array::from_fn(|k| invert_unchecked(k, n, constellation, convention))
}

/// `ln w_k = ln f(y_k | x) - ln f_Y(y_k)` for each region `k`.
#[inline]
pub fn rrs_log_weights(
    x_index: usize,
    candidates: &[f64; ORDER],
    constellation: &Constellation,
) -> [f64; ORDER] {
    std::array::from_fn(|k| {
        let y = candidates[k];
        constellation.ln_conditional_pdf(y, x_index) - constellation.ln_mixture_pdf(y)
    })
}

/// Posterior `P(X^ = k | X = x, N = n)` for every region.
pub fn rrs_posterior(
    x_index: usize,
    n: f64,
    constellation: &Constellation,
    convention: MetricConvention,
) -> Result<[f64; ORDER]> {
    if x_index >= ORDER {
        return Err(Error::invalid(format!(
            "symbol index {x_index} out of range 0..4"
        )));
    }
    let n = SoftMetricValue::new(n)?.get();
    let candidates = candidate_observations(n, constellation, convention);
    Ok(normalize_log_weights(&rrs_log_weights(
        x_index,
        &candidates,
        constellation,
    )))
}

pub(crate) fn normalize_log_weights(log_weights: &[f64; ORDER]) -> [f64; ORDER] {
    let total = log_sum_exp(log_weights);
    log_weights.map(|lw| (lw - total).exp())
}

/// Alice's LLRs on Bob's bits given her symbol and the disclosed metric.
pub fn llr_rrs(
    x_index: usize,
    n: f64,
    constellation: &Constellation,
    spec: &QuantizerSpec,
    convention: MetricConvention,
) -> Result<LlrPair> {
    if x_index >= ORDER {
        return Err(Error::invalid(format!(
            "symbol index {x_index} out of range 0..4"
        )));
    }
    let n = SoftMetricValue::new(n)?.get();
    let candidates = candidate_observations(n, constellation, convention);
    Ok(bit_llrs(
        &rrs_log_weights(x_index, &candidates, constellation),
        spec.labelling(),
    ))
}

/// Bob's LLRs on the bits of Alice's symbol, labelled with `labelling`.
pub fn llr_direct(y: f64, constellation: &Constellation, labelling: Labelling) -> LlrPair {
    let log_weights: [f64; ORDER] = std::array::from_fn(|x| constellation.ln_conditional_pdf(y, x));
    bit_llrs(&log_weights, labelling)
}

/// Everything needed to turn one channel use into the frame bits and the
/// decoder LLRs of a given scheme.
#[derive(Debug, Clone)]
pub struct SchemeEngine {
    scheme: Scheme,
    constellation: Constellation,
    spec: QuantizerSpec,
    convention: MetricConvention,
    rrh: RrhTable,
}

/// Frame bits and LLRs produced for one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolObservation {
    pub bits: [u8; 2],
    pub llrs: LlrPair,
    pub region: usize,
}

impl SchemeEngine {
    pub fn new(
        scheme: Scheme,
        constellation: Constellation,
        labelling: Labelling,
        convention: MetricConvention,
    ) -> Self {
        let spec = QuantizerSpec::new(&constellation, labelling);
        let rrh = build_rrh_table(&constellation, &spec);
        SchemeEngine {
            scheme,
            constellation,
            spec,
            convention,
            rrh,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn spec(&self) -> &QuantizerSpec {
        &self.spec
    }

    pub fn rrh_table(&self) -> &RrhTable {
        &self.rrh
    }

    /// The key bits carried by this channel use and the decoding party's
    /// LLRs on them.
    ///
    /// For reverse reconciliation the key bits are Bob's demapped decision and
    /// Alice holds the LLRs; for the direct benchmark the key bits are Alice's
    /// labelled symbol and Bob computes LLRs from `y`.
    #[inline]
    pub fn observe(&self, x_index: usize, y: f64) -> SymbolObservation {
        let labelling = self.spec.labelling();
        let region = self.spec.quantize(y);
        let (bits, llrs) = match self.scheme {
            Scheme::Direct => (
                labelling.bits(x_index),
                llr_direct(y, &self.constellation, labelling),
            ),
            Scheme::Rrh => (labelling.bits(region), self.rrh.get(x_index)),
            Scheme::Rrs => {
                let n = metric_unchecked(y, region, &self.constellation, self.convention);
                let candidates = candidate_observations(n, &self.constellation, self.convention);
                let lw = rrs_log_weights(x_index, &candidates, &self.constellation);
                (labelling.bits(region), bit_llrs(&lw, labelling))
            }
        };
        SymbolObservation { bits, llrs, region }
    }
}
