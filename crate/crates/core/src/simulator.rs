//! Monte-Carlo reconciliation rounds and BER/FER sweeps.
//!
//! Frame `i` of a point draws all of its randomness from a ChaCha8 stream
//! selected by `(seed, i)`, so a frame's outcome does not depend on which
//! worker runs it. Workers process frames in batches, and outcomes are folded
//! in frame order with the stopping rule applied after every frame. The
//! aggregate is therefore the same for any worker count.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{make_constellation, ORDER};
use crate::error::{Error, Result};
use crate::ldpc::{CheckRule, ParityCheckMatrix, Syndrome, SyndromeDecoder};
use crate::llr::{Scheme, SchemeEngine};
use crate::metrics::beta_from_snr;
use crate::quantizer::Labelling;
use crate::softmetric::MetricConvention;

/// Coded bits per channel use.
pub const BITS_PER_SYMBOL: u32 = 2;
pub const DEFAULT_MIN_FRAME_ERRORS: u64 = 50;
pub const DEFAULT_MAX_FRAMES: u64 = 100_000;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const CSV_HEADER: [&str; 6] = ["SNR", "BER", "FER", "beta", "frames", "iters"];

/// One operating point of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SimPoint<'a> {
    pub scheme: Scheme,
    pub labelling: Labelling,
    pub snr_db: f64,
    pub code: &'a ParityCheckMatrix,
    pub max_iter: usize,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub rule: CheckRule,
    pub convention: MetricConvention,
}

impl<'a> SimPoint<'a> {
    /// A point with default stopping rule, decoder and metric convention.
    pub fn new(
        scheme: Scheme,
        labelling: Labelling,
        snr_db: f64,
        code: &'a ParityCheckMatrix,
    ) -> Self {
        SimPoint {
            scheme,
            labelling,
            snr_db,
            code,
            max_iter: DEFAULT_MAX_ITER,
            min_frame_errors: DEFAULT_MIN_FRAME_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
            seed: 0,
            rule: CheckRule::default(),
            convention: MetricConvention::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.min_frame_errors == 0 || self.max_frames == 0 {
            return Err(Error::Config(
                "max_iter, min_frame_errors and max_frames must be at least 1".into(),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config(format!(
                "SNR {} dB is not finite",
                self.snr_db
            )));
        }
        Ok(())
    }

    /// Reconciliation efficiency at this point, using the code's design rate.
    pub fn beta(&self) -> f64 {
        beta_from_snr(self.snr_db, self.code.design_rate(), BITS_PER_SYMBOL)
    }

    pub fn engine(&self) -> Result<SchemeEngine> {
        let constellation = make_constellation(self.snr_db)?;
        Ok(SchemeEngine::new(
            self.scheme,
            constellation,
            self.labelling,
            self.convention,
        ))
    }
}

/// Outcome of a single reconciliation round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundOutcome {
    pub frame_error: bool,
    pub bit_errors: u64,
    pub iterations: usize,
    pub converged: bool,
    /// LLR components that hit the clipping bound.
    pub llr_clips: u64,
}

/// Random stream of frame `frame_index` under `seed`.
pub fn frame_rng(seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame_index);
    rng
}

/// Key bits and LLRs for one frame, without decoding.
pub fn draw_frame(
    engine: &SchemeEngine,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<u8>, Vec<f64>, u64) {
    let constellation = engine.constellation();
    let mut bits = Vec::with_capacity(n + 1);
    let mut llrs = Vec::with_capacity(n + 1);
    let mut clips = 0;
    for _ in 0..n.div_ceil(2) {
        let x = rng.gen_range(0..ORDER);
        let z: f64 = rng.sample(StandardNormal);
        let y = constellation.amplitudes()[x] + constellation.noise_sigma() * z;
        let obs = engine.observe(x, y);
        clips += obs.llrs.clipped() as u64;
        bits.extend(obs.bits);
        llrs.extend(obs.llrs.as_array());
    }
    bits.truncate(n);
    llrs.truncate(n);
    (bits, llrs, clips)
}

/// One round: draw symbols, form the key frame and its syndrome, compute the
/// decoding party's LLRs and decode toward the syndrome.
///
/// `decoder` must be built on `point.code`.
pub fn run_round(
    point: &SimPoint,
    engine: &SchemeEngine,
    decoder: &mut SyndromeDecoder,
    rng: &mut ChaCha8Rng,
) -> Result<RoundOutcome> {
    let code = point.code;
    let (key, llrs, llr_clips) = draw_frame(engine, code.n(), rng);
    let target: Syndrome = code.syndrome_of(&key)?;
    let decoded = decoder.decode(&llrs, &target, point.max_iter)?;
    let bit_errors = decoded
        .bits
        .bits()
        .iter()
        .zip(&key)
        .filter(|(a, b)| a != b)
        .count() as u64;
    Ok(RoundOutcome {
        frame_error: bit_errors > 0,
        bit_errors,
        iterations: decoded.iterations,
        converged: decoded.converged,
        llr_clips,
    })
}

/// Aggregated result of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub beta: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub frame_errors: u64,
    pub frames_total: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iterations: f64,
    pub llr_clips: u64,
}

#[derive(Debug, Default)]
struct Tally {
    bit_errors: u64,
    frame_errors: u64,
    frames: u64,
    iterations: u64,
    llr_clips: u64,
}

impl Tally {
    fn add(&mut self, outcome: &RoundOutcome) {
        self.bit_errors += outcome.bit_errors;
        self.frame_errors += u64::from(outcome.frame_error);
        self.frames += 1;
        self.iterations += outcome.iterations as u64;
        self.llr_clips += outcome.llr_clips;
    }

    fn done(&self, point: &SimPoint) -> bool {
        self.frame_errors >= point.min_frame_errors || self.frames >= point.max_frames
    }

    fn record(&self, point: &SimPoint) -> BerRecord {
        let bits_total = self.frames * point.code.n() as u64;
        BerRecord {
            snr_db: point.snr_db,
            beta: point.beta(),
            bit_errors: self.bit_errors,
            bits_total,
            frame_errors: self.frame_errors,
            frames_total: self.frames,
            ber: self.bit_errors as f64 / bits_total as f64,
            fer: self.frame_errors as f64 / self.frames as f64,
            avg_iterations: self.iterations as f64 / self.frames as f64,
            llr_clips: self.llr_clips,
        }
    }
}

/// Runs frames until `min_frame_errors` frame errors or `max_frames` frames,
/// on `jobs` worker threads.
pub fn run_point(point: &SimPoint, jobs: usize) -> Result<BerRecord> {
    point.validate()?;
    let engine = point.engine()?;
    let jobs = jobs.max(1);
    let mut decoders: Vec<SyndromeDecoder> = (0..jobs)
        .map(|_| SyndromeDecoder::new(point.code, point.rule))
        .collect();
    let mut tally = Tally::default();

    if jobs == 1 {
        while !tally.done(point) {
            let mut rng = frame_rng(point.seed, tally.frames);
            tally.add(&run_round(point, &engine, &mut decoders[0], &mut rng)?);
        }
        return Ok(tally.record(point));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    while !tally.done(point) {
        let first = tally.frames;
        let batch: Result<Vec<RoundOutcome>> = pool.install(|| {
            decoders
                .par_iter_mut()
                .enumerate()
                .map(|(w, decoder)| {
                    let mut rng = frame_rng(point.seed, first + w as u64);
                    run_round(point, &engine, decoder, &mut rng)
                })
                .collect()
        });
        for outcome in batch? {
            tally.add(&outcome);
            if tally.done(point) {
                break;
            }
        }
    }
    Ok(tally.record(point))
}

/// Runs every point in order and optionally writes the CSV.
pub fn run_sweep(points: &[SimPoint], jobs: usize, out: Option<&Path>) -> Result<Vec<BerRecord>> {
    if points.is_empty() {
        return Err(Error::Config("empty sweep".into()));
    }
    let records = points
        .iter()
        .map(|p| run_point(p, jobs))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = out {
        write_csv(path, &records)?;
    }
    Ok(records)
}

/// The columns of a sweep CSV file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub ber: f64,
    pub fer: f64,
    pub beta: f64,
    pub frames: u64,
    pub avg_iterations: f64,
}

impl From<&BerRecord> for CsvRow {
    fn from(r: &BerRecord) -> Self {
        CsvRow {
            snr_db: r.snr_db,
            ber: r.ber,
            fer: r.fer,
            beta: r.beta,
            frames: r.frames_total,
            avg_iterations: r.avg_iterations,
        }
    }
}

/// Writes records as CSV. Reals are printed in plain decimal notation with
/// the fewest digits that parse back to the same value.
pub fn write_csv_to<W: std::io::Write>(writer: W, records: &[BerRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER)?;
    for row in records.iter().map(CsvRow::from) {
        out.write_record([
            row.snr_db.to_string(),
            row.ber.to_string(),
            row.fer.to_string(),
            row.beta.to_string(),
            row.frames.to_string(),
            row.avg_iterations.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, records: &[BerRecord]) -> Result<()> {
    write_csv_to(std::fs::File::create(path)?, records)
}

/// Parses a sweep CSV.
pub fn read_csv_from<R: std::io::Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut input = csv::Reader::from_reader(reader);
    let header = input.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::parse(
            1,
            format!("expected header {}", CSV_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, record) in input.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let real = |k: usize| -> Result<f64> {
            record
                .get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(line, format!("bad {} value", CSV_HEADER[k])))
        };
        rows.push(CsvRow {
            snr_db: real(0)?,
            ber: real(1)?,
            fer: real(2)?,
            beta: real(3)?,
            frames: record
                .get(4)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(line, "bad frames value"))?,
            avg_iterations: real(5)?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    read_csv_from(std::fs::File::open(path)?)
}

/// Evenly spaced grid from `start` to `stop` inclusive with `steps` points.
pub fn snr_grid(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Config(format!(
            "invalid SNR grid {start}:{stop}:{steps} (need steps >= 1 and stop >= start)"
        )));
    }
    if steps == 1 {
        if start != stop {
            return Err(Error::Config(
                "a single-point grid needs start == stop".into(),
            ));
        }
        return Ok(vec![start]);
    }
    let step = (stop - start) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}
