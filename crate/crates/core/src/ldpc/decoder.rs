//! Syndrome-conditioned belief propagation.
//!
//! Check node `j` enforces parity `s_j` instead of zero, which amounts to
//! multiplying the outgoing check message sign by `1 - 2 s_j`. The schedule is
//! flooding, and decoding stops as soon as the hard decision reproduces the
//! target syndrome.

use serde::{Deserialize, Serialize};

use super::{ParityCheckMatrix, Syndrome};
use crate::error::{Error, Result};
use crate::llr::LLR_CLIP;
use crate::quantizer::Frame;

/// Normalization factor of the min-sum rule.
pub const MIN_SUM_SCALE: f64 = 0.75;

/// Check-node update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckRule {
    /// Exact tanh rule, evaluated in the log-tanh domain.
    #[default]
    SumProduct,
    /// Normalized min-sum with factor [`MIN_SUM_SCALE`].
    MinSum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub bits: Frame,
    pub iterations: usize,
    /// The hard decision satisfies the target syndrome.
    pub converged: bool,
}

/// Decoder with message memory for one parity-check matrix.
///
/// Each worker owns one of these; the matrix is shared read-only.
pub struct SyndromeDecoder<'a> {
    h: &'a ParityCheckMatrix,
    rule: CheckRule,
    var_to_check: Vec<f64>,
    check_to_var: Vec<f64>,
    scratch: Vec<f64>,
    posterior: Vec<f64>,
    hard: Vec<u8>,
}

impl<'a> SyndromeDecoder<'a> {
    pub fn new(h: &'a ParityCheckMatrix, rule: CheckRule) -> Self {
        let edges = h.num_edges();
        SyndromeDecoder {
            h,
            rule,
            var_to_check: vec![0.0; edges],
            check_to_var: vec![0.0; edges],
            scratch: vec![0.0; edges],
            posterior: vec![0.0; h.n()],
            hard: vec![0; h.n()],
        }
    }

    /// Posterior LLRs after the last call to [`SyndromeDecoder::decode`].
    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn decode(
        &mut self,
        llrs: &[f64],
        target: &Syndrome,
        max_iter: usize,
    ) -> Result<DecodeResult> {
        let h = self.h;
        if llrs.len() != h.n() {
            return Err(Error::invalid(format!(
                "{} LLRs for a code of length {}",
                llrs.len(),
                h.n()
            )));
        }
        if target.len() != h.m() {
            return Err(Error::invalid(format!(
                "syndrome of length {} for a code with {} checks",
                target.len(),
                h.m()
            )));
        }
        if llrs.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("LLRs must be finite"));
        }
        let target = target.bits();

        self.posterior.copy_from_slice(llrs);
        for (b, &l) in self.hard.iter_mut().zip(llrs) {
            *b = u8::from(l < 0.0);
        }
        if h.satisfies(&self.hard, target) {
            return Ok(self.result(0, true));
        }

        for (e, &c) in h.edge_cols().iter().enumerate() {
            self.var_to_check[e] = llrs[c as usize].clamp(-LLR_CLIP, LLR_CLIP);
        }
        for iteration in 1..=max_iter {
            match self.rule {
                CheckRule::SumProduct => self.check_update_sum_product(target),
                CheckRule::MinSum => self.check_update_min_sum(target),
            }
            self.variable_update(llrs);
            if h.satisfies(&self.hard, target) {
                return Ok(self.result(iteration, true));
            }
        }
        Ok(self.result(max_iter, false))
    }

    fn result(&self, iterations: usize, converged: bool) -> DecodeResult {
        DecodeResult {
            bits: Frame(self.hard.clone()),
            iterations,
            converged,
        }
    }

    /// Tanh rule with leave-one-out products formed from prefix and suffix
    /// products, so no division by a small `tanh` is needed.
    fn check_update_sum_product(&mut self, target: &[u8]) {
        let h = self.h;
        for (j, &s) in target.iter().enumerate() {
            let range = h.row_range(j);
            let mut prefix = if s == 1 { -1.0 } else { 1.0 };
            for e in range.clone() {
                let t = (0.5 * self.var_to_check[e]).tanh();
                self.scratch[e] = t;
                self.check_to_var[e] = prefix;
                prefix *= t;
            }
            let mut suffix = 1.0;
            for e in range.rev() {
                let p = self.check_to_var[e] * suffix;
                suffix *= self.scratch[e];
                self.check_to_var[e] = (2.0 * p.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
            }
        }
    }

    fn check_update_min_sum(&mut self, target: &[u8]) {
        let h = self.h;
        for (j, &s) in target.iter().enumerate() {
            let range = h.row_range(j);
            let mut negative = s == 1;
            let (mut min1, mut min2, mut argmin) = (f64::INFINITY, f64::INFINITY, usize::MAX);
            for e in range.clone() {
                let v = self.var_to_check[e];
                negative ^= v < 0.0;
                let a = v.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    argmin = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for e in range {
                let v = self.var_to_check[e];
                let magnitude = MIN_SUM_SCALE * if e == argmin { min2 } else { min1 };
                let magnitude = magnitude.min(LLR_CLIP);
                let flip = negative ^ (v < 0.0);
                self.check_to_var[e] = if flip { -magnitude } else { magnitude };
            }
        }
    }

    fn variable_update(&mut self, llrs: &[f64]) {
        let h = self.h;
        for (i, &channel) in llrs.iter().enumerate() {
            let edges = h.col_edge_ids(i);
            let total = channel
                + edges
                    .iter()
                    .map(|&e| self.check_to_var[e as usize])
                    .sum::<f64>();
            self.posterior[i] = total;
            self.hard[i] = u8::from(total < 0.0);
            for &e in edges {
                let e = e as usize;
                self.var_to_check[e] = (total - self.check_to_var[e]).clamp(-LLR_CLIP, LLR_CLIP);
            }
        }
    }
}

/// Sum-product syndrome decoding with a freshly allocated decoder.
pub fn decode_syndrome(
    h: &ParityCheckMatrix,
    llrs: &[f64],
    target: &Syndrome,
    max_iter: usize,
) -> Result<DecodeResult> {
    SyndromeDecoder::new(h, CheckRule::SumProduct).decode(llrs, target, max_iter)
}
