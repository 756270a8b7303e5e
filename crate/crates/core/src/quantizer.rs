//! Bob's detector: equiprobable decision regions, bit labelling and raw-key
//! frame assembly.

use serde::{Deserialize, Serialize};

use crate::channel::{Constellation, ORDER};
use crate::error::{Error, Result};

/// Bijection between the four regions (or symbols) and bit pairs, most
/// significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Labelling {
    /// Binary counting order: 00, 01, 10, 11.
    Natural,
    /// Reflected binary order: 00, 01, 11, 10.
    Gray,
}

impl Labelling {
    pub fn bit_map(self) -> [[u8; 2]; ORDER] {
        match self {
            Labelling::Natural => [[0, 0], [0, 1], [1, 0], [1, 1]],
            Labelling::Gray => [[0, 0], [0, 1], [1, 1], [1, 0]],
        }
    }

    /// Bit pair for a region or symbol index. Panics if `index >= 4`.
    #[inline]
    pub fn bits(self, index: usize) -> [u8; 2] {
        self.bit_map()[index]
    }

    /// Inverse of [`Labelling::bits`].
    pub fn index_of(self, bits: [u8; 2]) -> Option<usize> {
        self.bit_map().iter().position(|&b| b == bits)
    }
}

impl std::fmt::Display for Labelling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Labelling::Natural => "natural",
            Labelling::Gray => "gray",
        })
    }
}

/// Decision thresholds `t1 < t2 < t3` splitting the channel output into four
/// regions of equal probability, plus the labelling rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    thresholds: [f64; ORDER - 1],
    labelling: Labelling,
}

/// Raw-key frame, one bit per byte.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Frame(pub Vec<u8>);

impl Frame {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }
}

/// Quartiles of the channel-output mixture. The mixture is symmetric, so only
/// the upper quartile is solved for.
pub fn compute_thresholds(constellation: &Constellation) -> [f64; ORDER - 1] {
    let upper = constellation.quantile_unchecked(0.75);
    [-upper, 0.0, upper]
}

impl QuantizerSpec {
    pub fn new(constellation: &Constellation, labelling: Labelling) -> Self {
        QuantizerSpec {
            thresholds: compute_thresholds(constellation),
            labelling,
        }
    }

    pub fn thresholds(&self) -> &[f64; ORDER - 1] {
        &self.thresholds
    }

    pub fn labelling(&self) -> Labelling {
        self.labelling
    }

    /// Lower and upper edge of a region, with infinite outer edges.
    pub fn region_bounds(&self, region: usize) -> (f64, f64) {
        let lo = if region == 0 {
            f64::NEG_INFINITY
        } else {
            self.thresholds[region - 1]
        };
        let hi = if region == ORDER - 1 {
            f64::INFINITY
        } else {
            self.thresholds[region]
        };
        (lo, hi)
    }

    /// Region `k` such that `t_k < y <= t_{k+1}`; a value on a threshold falls
    /// into the lower region.
    #[inline]
    pub fn quantize(&self, y: f64) -> usize {
        self.thresholds.iter().filter(|&&t| t < y).count()
    }

    pub fn demap(&self, region: usize) -> Result<[u8; 2]> {
        demap(region, self.labelling)
    }
}

pub fn demap(region: usize, labelling: Labelling) -> Result<[u8; 2]> {
    if region >= ORDER {
        return Err(Error::invalid(format!("region {region} out of range 0..4")));
    }
    Ok(labelling.bits(region))
}

/// Quantizes and demaps `samples` into a frame of exactly `n` bits.
///
/// Bits are laid out MSB then LSB per symbol, symbols in time order; the last
/// pair is truncated when `n` is odd. The regions of every consumed sample are
/// returned alongside so the soft metric can be paired with them.
pub fn build_frame(samples: &[f64], spec: &QuantizerSpec, n: usize) -> Result<(Frame, Vec<usize>)> {
    let symbols = n.div_ceil(2);
    if samples.len() < symbols {
        return Err(Error::invalid(format!(
            "frame of {n} bits needs {symbols} samples, got {}",
            samples.len()
        )));
    }
    let regions: Vec<usize> = samples[..symbols]
        .iter()
        .map(|&y| spec.quantize(y))
        .collect();
    Ok((frame_from_regions(&regions, spec.labelling, n), regions))
}

pub(crate) fn frame_from_regions(regions: &[usize], labelling: Labelling, n: usize) -> Frame {
    let mut bits: Vec<u8> = regions.iter().flat_map(|&r| labelling.bits(r)).collect();
    bits.truncate(n);
    Frame(bits)
}
