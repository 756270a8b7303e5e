//! Command-line front end.
//!
//! Every simulation flag can also come from a JSON file given with
//! `--config`; flags on the command line take precedence over the file.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::audit::{audit_soft_metrics, AuditConfig};
use crate::channel::make_constellation;
use crate::error::{Error, Result};
use crate::ldpc::{
    degrees_for_rate, generate_regular_code, read_alist_file, write_alist_file, CheckRule,
    ParityCheckMatrix,
};
use crate::llr::Scheme;
use crate::metrics::{bmi_mc, mi_hard, mi_soft_mc, mi_xy};
use crate::quantizer::{Labelling, QuantizerSpec};
use crate::simulator::{
    run_point, snr_grid, write_csv, BerRecord, SimPoint, DEFAULT_MAX_FRAMES, DEFAULT_MAX_ITER,
    DEFAULT_MIN_FRAME_ERRORS,
};
use crate::softmetric::MetricConvention;

const DEFAULT_CODE_LENGTH: usize = 20_000;
const DEFAULT_CODE_SEED: u64 = 1;
const DEFAULT_INFO_SAMPLES: usize = 200_000;
const DEFAULT_AUDIT_SAMPLES: usize = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "recon-sim",
    version,
    about = "Reverse reconciliation with soft information for PAM-4 CV-QKD over AWGN"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run BER/FER simulations over an SNR grid.
    Sweep(SimArgs),
    /// Run BER/FER simulation at a single SNR.
    Point(SimArgs),
    /// Print information rates over an SNR grid.
    Info(InfoArgs),
    /// Test the soft metric for uniformity and independence from the decision.
    Audit(AuditArgs),
    /// Generate a regular LDPC code and write it in alist format.
    Gencode(GencodeArgs),
}

/// SNR grid `start:stop:steps` with inclusive endpoints, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SnrGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        snr_grid(self.start, self.stop, self.steps)
    }
}

impl FromStr for SnrGrid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let real = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{t}' is not a number"))
        };
        let grid = match parts.as_slice() {
            [single] => {
                let v = real(single)?;
                SnrGrid {
                    start: v,
                    stop: v,
                    steps: 1,
                }
            }
            [start, stop, steps] => SnrGrid {
                start: real(start)?,
                stop: real(stop)?,
                steps: steps
                    .trim()
                    .parse()
                    .map_err(|_| format!("'{steps}' is not a point count"))?,
            },
            _ => return Err(format!("'{s}' is not of the form start:stop:steps")),
        };
        grid.points().map_err(|e| e.to_string())?;
        Ok(grid)
    }
}

/// Regular code parameters `n,wc,wr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub col_weight: usize,
    pub row_weight: usize,
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let values: Vec<usize> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| format!("'{t}' is not a positive integer"))
            })
            .collect::<std::result::Result<_, _>>()?;
        match values.as_slice() {
            &[n, col_weight, row_weight] => Ok(GenSpec {
                n,
                col_weight,
                row_weight,
            }),
            _ => Err(format!("'{s}' is not of the form n,wc,wr")),
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct SimArgs {
    /// Reconciliation scheme [required, here or in --config]
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// Bit labelling of the four regions [default: natural]
    #[arg(long, value_enum)]
    pub labelling: Option<Labelling>,
    /// Code rate; selects a regular code of --length when neither --code nor --gen is given
    #[arg(long)]
    pub rate: Option<f64>,
    /// Length of the code generated from --rate [default: 20000]
    #[arg(long)]
    pub length: Option<usize>,
    /// Parity-check matrix in alist format
    #[arg(long, conflicts_with = "generate")]
    pub code: Option<PathBuf>,
    /// Generate a regular code with n columns, column weight wc and row weight wr
    #[arg(long = "gen", value_name = "N,WC,WR")]
    pub generate: Option<GenSpec>,
    /// Seed of the generated code [default: 1]
    #[arg(long)]
    pub code_seed: Option<u64>,
    /// SNR in dB per real symbol: start:stop:steps (inclusive, steps = point count) or one value
    #[arg(long, allow_hyphen_values = true, value_name = "START:STOP:STEPS")]
    pub snr: Option<SnrGrid>,
    /// Decoder iteration cap [default: 200]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stop a point after this many frame errors [default: 50]
    #[arg(long)]
    pub min_ferr: Option<u64>,
    /// Stop a point after this many frames [default: 100000]
    #[arg(long)]
    pub max_frames: Option<u64>,
    /// Master seed of the Monte-Carlo streams [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Check-node rule [default: sum-product]
    #[arg(long, value_enum)]
    pub decoder: Option<CheckRule>,
    /// Disclose the complementary CDF in regions 1 and 3
    #[arg(long)]
    pub complement_odd_regions: bool,
    /// CSV output path (columns SNR,BER,FER,beta,frames,iters)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: 1]
    #[arg(long, env = "RECON_SIM_JOBS")]
    pub jobs: Option<usize>,
    /// JSON file with any of the options above; command-line flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The JSON form of [`SimArgs`].
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfigFile {
    pub scheme: Option<Scheme>,
    pub labelling: Option<Labelling>,
    pub rate: Option<f64>,
    pub length: Option<usize>,
    pub code: Option<PathBuf>,
    #[serde(rename = "gen")]
    pub generate: Option<GenSpecString>,
    pub code_seed: Option<u64>,
    pub snr: Option<SnrGridString>,
    pub max_iter: Option<usize>,
    pub min_ferr: Option<u64>,
    pub max_frames: Option<u64>,
    pub seed: Option<u64>,
    pub decoder: Option<CheckRule>,
    pub complement_odd_regions: Option<bool>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(try_from = "String")]
pub struct SnrGridString(pub SnrGrid);

impl TryFrom<String> for SnrGridString {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse().map(SnrGridString)
    }
}

#[derive(Debug, Deserialize)]
#[serde(try_from = "String")]
pub struct GenSpecString(pub GenSpec);

impl TryFrom<String> for GenSpecString {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse().map(GenSpecString)
    }
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    /// SNR in dB: start:stop:steps (inclusive) or one value
    #[arg(long, allow_hyphen_values = true, value_name = "START:STOP:STEPS")]
    pub snr: SnrGrid,
    /// Labelling used for the bitwise rates
    #[arg(long, value_enum, default_value_t = Labelling::Natural)]
    pub labelling: Labelling,
    /// Monte-Carlo samples per estimate
    #[arg(long, default_value_t = DEFAULT_INFO_SAMPLES)]
    pub samples: usize,
    /// Seed of the Monte-Carlo streams
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disclose the complementary CDF in regions 1 and 3
    #[arg(long)]
    pub complement_odd_regions: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// SNR in dB: start:stop:steps (inclusive) or one value
    #[arg(long, allow_hyphen_values = true, value_name = "START:STOP:STEPS")]
    pub snr: SnrGrid,
    /// Metric values per region for the uniformity tests
    #[arg(long, default_value_t = DEFAULT_AUDIT_SAMPLES)]
    pub samples: usize,
    /// Metric bins of the independence test
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Significance level of both tests
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// Seed of the channel draws
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disclose the complementary CDF in regions 1 and 3
    #[arg(long)]
    pub complement_odd_regions: bool,
    /// Write every drawn (SNR, region, metric) triple to this CSV file
    #[arg(long)]
    pub dump_soft_metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GencodeArgs {
    /// Column count, column weight and row weight
    #[arg(long = "gen", value_name = "N,WC,WR", conflicts_with = "rate")]
    pub generate: Option<GenSpec>,
    /// Code rate; the smallest regular degrees with this design rate are used
    #[arg(long)]
    pub rate: Option<f64>,
    /// Code length used with --rate
    #[arg(long, default_value_t = DEFAULT_CODE_LENGTH)]
    pub length: usize,
    /// Construction seed
    #[arg(long, default_value_t = DEFAULT_CODE_SEED)]
    pub seed: u64,
    /// Output alist path
    #[arg(long)]
    pub out: PathBuf,
}

/// Where the parity-check matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeSource {
    Alist(PathBuf),
    Generate { spec: GenSpec, seed: u64 },
}

impl CodeSource {
    pub fn load(&self) -> Result<ParityCheckMatrix> {
        match self {
            CodeSource::Alist(path) => read_alist_file(path),
            CodeSource::Generate { spec, seed } => {
                generate_regular_code(spec.n, spec.col_weight, spec.row_weight, *seed)
            }
        }
    }
}

/// A fully resolved simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub scheme: Scheme,
    pub labelling: Labelling,
    pub snrs: Vec<f64>,
    pub code: CodeSource,
    /// Requested rate, checked against the code's design rate.
    pub rate: Option<f64>,
    pub max_iter: usize,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub rule: CheckRule,
    pub convention: MetricConvention,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Invocation {
    Simulate(SimulationPlan),
    Info(InfoArgs),
    Audit(AuditArgs),
    Gencode(GencodeArgs),
}

fn usage(kind: ErrorKind, message: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, message)
}

fn convention(complement_odd_regions: bool) -> MetricConvention {
    if complement_odd_regions {
        MetricConvention::ComplementOddRegions
    } else {
        MetricConvention::Cdf
    }
}

fn read_config(path: &PathBuf) -> std::result::Result<SimConfigFile, clap::Error> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        usage(
            ErrorKind::Io,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    serde_json::from_str(&text).map_err(|e| {
        usage(
            ErrorKind::ValueValidation,
            format!("bad config {}: {e}", path.display()),
        )
    })
}

fn resolve_simulation(
    args: SimArgs,
    single_point: bool,
) -> std::result::Result<SimulationPlan, clap::Error> {
    let file = match &args.config {
        Some(path) => read_config(path)?,
        None => SimConfigFile::default(),
    };
    let scheme = args
        .scheme
        .or(file.scheme)
        .ok_or_else(|| usage(ErrorKind::MissingRequiredArgument, "--scheme is required"))?;
    let grid = args
        .snr
        .or(file.snr.map(|g| g.0))
        .ok_or_else(|| usage(ErrorKind::MissingRequiredArgument, "--snr is required"))?;
    let snrs = grid
        .points()
        .map_err(|e| usage(ErrorKind::ValueValidation, e))?;
    if single_point && snrs.len() != 1 {
        return Err(usage(
            ErrorKind::ValueValidation,
            "point takes a single --snr value",
        ));
    }

    let rate = args.rate.or(file.rate);
    let code_seed = args
        .code_seed
        .or(file.code_seed)
        .unwrap_or(DEFAULT_CODE_SEED);
    let (code_path, generate) = if args.code.is_some() || args.generate.is_some() {
        (args.code, args.generate)
    } else {
        (file.code, file.generate.map(|g| g.0))
    };
    let code = match (code_path, generate, rate) {
        (Some(_), Some(_), _) => {
            return Err(usage(
                ErrorKind::ArgumentConflict,
                "--code and --gen are mutually exclusive",
            ))
        }
        (Some(path), None, _) => CodeSource::Alist(path),
        (None, Some(spec), _) => CodeSource::Generate {
            spec,
            seed: code_seed,
        },
        (None, None, Some(rate)) => {
            let (col_weight, row_weight) =
                degrees_for_rate(rate).map_err(|e| usage(ErrorKind::ValueValidation, e))?;
            let n = args.length.or(file.length).unwrap_or(DEFAULT_CODE_LENGTH);
            CodeSource::Generate {
                spec: GenSpec {
                    n,
                    col_weight,
                    row_weight,
                },
                seed: code_seed,
            }
        }
        (None, None, None) => {
            return Err(usage(
                ErrorKind::MissingRequiredArgument,
                "one of --code, --gen or --rate is required",
            ))
        }
    };

    let jobs = args.jobs.or(file.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(usage(
            ErrorKind::ValueValidation,
            "--jobs must be at least 1",
        ));
    }
    let plan = SimulationPlan {
        scheme,
        labelling: args
            .labelling
            .or(file.labelling)
            .unwrap_or(Labelling::Natural),
        snrs,
        code,
        rate,
        max_iter: args.max_iter.or(file.max_iter).unwrap_or(DEFAULT_MAX_ITER),
        min_frame_errors: args
            .min_ferr
            .or(file.min_ferr)
            .unwrap_or(DEFAULT_MIN_FRAME_ERRORS),
        max_frames: args
            .max_frames
            .or(file.max_frames)
            .unwrap_or(DEFAULT_MAX_FRAMES),
        seed: args.seed.or(file.seed).unwrap_or(0),
        rule: args.decoder.or(file.decoder).unwrap_or_default(),
        convention: convention(
            args.complement_odd_regions || file.complement_odd_regions.unwrap_or(false),
        ),
        jobs,
        out: args.out.or(file.out),
    };
    if plan.max_iter == 0 || plan.min_frame_errors == 0 || plan.max_frames == 0 {
        return Err(usage(
            ErrorKind::ValueValidation,
            "--max-iter, --min-ferr and --max-frames must be at least 1",
        ));
    }
    Ok(plan)
}

/// Parses and validates a command line (including the program name).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(argv)?.command {
        Command::Sweep(args) => resolve_simulation(args, false).map(Invocation::Simulate),
        Command::Point(args) => resolve_simulation(args, true).map(Invocation::Simulate),
        Command::Info(args) => {
            args.snr
                .points()
                .map_err(|e| usage(ErrorKind::ValueValidation, e))?;
            Ok(Invocation::Info(args))
        }
        Command::Audit(args) => Ok(Invocation::Audit(args)),
        Command::Gencode(args) => {
            if args.generate.is_none() && args.rate.is_none() {
                return Err(usage(
                    ErrorKind::MissingRequiredArgument,
                    "one of --gen or --rate is required",
                ));
            }
            Ok(Invocation::Gencode(args))
        }
    }
}

/// Executes a parsed invocation and returns the process exit code.
///
/// Results go to `stdout`, progress to `stderr`. A failed audit returns 1.
pub fn run(invocation: Invocation, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match invocation {
        Invocation::Simulate(plan) => simulate(&plan, stdout, stderr).map(|_| 0),
        Invocation::Info(args) => info(&args, stdout).map(|_| 0),
        Invocation::Audit(args) => audit(&args, stdout),
        Invocation::Gencode(args) => gencode(&args, stdout).map(|_| 0),
    }
}

/// Runs a simulation plan and writes its CSV and summary table.
pub fn simulate(
    plan: &SimulationPlan,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Vec<BerRecord>> {
    let code = plan.code.load()?;
    if let Some(rate) = plan.rate {
        if (rate - code.design_rate()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "--rate {rate} does not match the code's design rate {}",
                code.design_rate()
            )));
        }
    }
    writeln!(
        stderr,
        "{} / {} labelling, code n={} m={} rate={}, {} point(s)",
        plan.scheme,
        plan.labelling,
        code.n(),
        code.m(),
        code.design_rate(),
        plan.snrs.len()
    )?;
    let mut records = Vec::with_capacity(plan.snrs.len());
    for &snr_db in &plan.snrs {
        let point = SimPoint {
            max_iter: plan.max_iter,
            min_frame_errors: plan.min_frame_errors,
            max_frames: plan.max_frames,
            seed: plan.seed,
            rule: plan.rule,
            convention: plan.convention,
            ..SimPoint::new(plan.scheme, plan.labelling, snr_db, &code)
        };
        let record = run_point(&point, plan.jobs)?;
        writeln!(
            stderr,
            "  SNR {snr_db} dB: {} frame errors in {} frames",
            record.frame_errors, record.frames_total
        )?;
        records.push(record);
    }
    if let Some(path) = &plan.out {
        write_csv(path, &records)?;
    }
    write_summary(stdout, &records)?;
    Ok(records)
}

fn write_summary(out: &mut dyn Write, records: &[BerRecord]) -> Result<()> {
    writeln!(
        out,
        "{:>9} {:>8} {:>12} {:>9} {:>8} {:>8}",
        "SNR", "beta", "BER", "FER", "frames", "iters"
    )?;
    for r in records {
        writeln!(
            out,
            "{:>9.3} {:>8.4} {:>12.4e} {:>9.4} {:>8} {:>8.2}",
            r.snr_db, r.beta, r.ber, r.fer, r.frames_total, r.avg_iterations
        )?;
    }
    Ok(())
}

fn info(args: &InfoArgs, out: &mut dyn Write) -> Result<()> {
    let convention = convention(args.complement_odd_regions);
    writeln!(
        out,
        "{:>9} {:>9} {:>9} {:>9} {:>9} {:>11} {:>11} {:>11}",
        "SNR", "I(X;Y)", "I_hard", "I_soft", "stderr", "BMI_direct", "BMI_rrh", "BMI_rrs"
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for snr_db in args.snr.points()? {
        let c = make_constellation(snr_db)?;
        let spec = QuantizerSpec::new(&c, args.labelling);
        let soft = mi_soft_mc(&c, convention, args.samples, &mut rng)?;
        let mut bmi = |scheme| {
            bmi_mc(
                scheme,
                args.labelling,
                &c,
                convention,
                args.samples,
                &mut rng,
            )
        };
        let (direct, rrh, rrs) = (bmi(Scheme::Direct)?, bmi(Scheme::Rrh)?, bmi(Scheme::Rrs)?);
        writeln!(
            out,
            "{:>9.3} {:>9.5} {:>9.5} {:>9.5} {:>9.1e} {:>11.5} {:>11.5} {:>11.5}",
            snr_db,
            mi_xy(&c),
            mi_hard(&c, &spec),
            soft.value,
            soft.stderr,
            direct.value,
            rrh.value,
            rrs.value
        )?;
    }
    Ok(())
}

fn audit(args: &AuditArgs, out: &mut dyn Write) -> Result<i32> {
    let config = AuditConfig {
        per_region: args.samples,
        bins: args.bins,
        alpha: args.alpha,
        convention: convention(args.complement_odd_regions),
        seed: args.seed,
    };
    let mut dump = match &args.dump_soft_metrics {
        Some(path) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            writeln!(w, "snr,region,n")?;
            Some(w)
        }
        None => None,
    };
    let mut all_passed = true;
    writeln!(
        out,
        "{:>9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>7}",
        "SNR", "KS_0", "KS_1", "KS_2", "KS_3", "KS_crit", "chi2", "chi2_crit", "result"
    )?;
    for snr_db in args.snr.points()? {
        let c = make_constellation(snr_db)?;
        let (report, pairs) = audit_soft_metrics(&c, &config)?;
        if let Some(w) = dump.as_mut() {
            for (region, n) in &pairs {
                writeln!(w, "{snr_db},{region},{n}")?;
            }
        }
        let ks: Vec<String> = report
            .regions
            .iter()
            .map(|r| format!("{:>10.5}", r.ks_statistic))
            .collect();
        all_passed &= report.passed();
        writeln!(
            out,
            "{:>9.3} {} {:>10.5} {:>10.2} {:>10.2} {:>7}",
            snr_db,
            ks.join(" "),
            report.regions[0].ks_critical,
            report.chi_square,
            report.chi_square_critical,
            if report.passed() { "pass" } else { "FAIL" }
        )?;
    }
    if let Some(mut w) = dump {
        w.flush()?;
    }
    Ok(if all_passed { 0 } else { 1 })
}

fn gencode(args: &GencodeArgs, out: &mut dyn Write) -> Result<()> {
    let spec = match (args.generate, args.rate) {
        (Some(spec), _) => spec,
        (None, Some(rate)) => {
            let (col_weight, row_weight) = degrees_for_rate(rate)?;
            GenSpec {
                n: args.length,
                col_weight,
                row_weight,
            }
        }
        (None, None) => return Err(Error::Config("one of --gen or --rate is required".into())),
    };
    let code = generate_regular_code(spec.n, spec.col_weight, spec.row_weight, args.seed)?;
    write_alist_file(&code, &args.out)?;
    writeln!(
        out,
        "wrote {}: n={} m={} wc={} wr={} design rate {}",
        args.out.display(),
        code.n(),
        code.m(),
        spec.col_weight,
        spec.row_weight,
        code.design_rate()
    )?;
    Ok(())
}

/// Entry point of the binary: parses `argv`, runs, and maps errors to exit
/// code 2.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let invocation = match parse_args(argv) {
        Ok(invocation) => invocation,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match run(invocation, &mut stdout, &mut std::io::stderr()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(args: &[&str]) -> SimulationPlan {
        match parse_args(std::iter::once("recon-sim").chain(args.iter().copied())).unwrap() {
            Invocation::Simulate(plan) => plan,
            other => panic!("{other:?}"),
        }
    }

    fn parse_err(args: &[&str]) -> clap::Error {
        parse_args(std::iter::once("recon-sim").chain(args.iter().copied())).unwrap_err()
    }

    #[test]
    fn sweep_grid_with_negative_endpoints() {
        let p = plan(&[
            "sweep",
            "--scheme",
            "rrs",
            "--labelling",
            "natural",
            "--snr",
            "-11:-10.5:11",
            "--max-iter",
            "200",
            "--rate",
            "0.05",
        ]);
        assert_eq!(p.snrs.len(), 11);
        assert_eq!(p.snrs[0], -11.0);
        assert_eq!(p.snrs[10], -10.5);
        assert_eq!(p.max_iter, 200);
        assert_eq!(
            p.code,
            CodeSource::Generate {
                spec: GenSpec {
                    n: 20_000,
                    col_weight: 19,
                    row_weight: 20
                },
                seed: DEFAULT_CODE_SEED
            }
        );
    }

    #[test]
    fn defaults() {
        let p = plan(&[
            "point", "--scheme", "rrh", "--snr", "0:0:1", "--gen", "20,3,4",
        ]);
        assert_eq!(p.snrs, vec![0.0]);
        assert_eq!(p.labelling, Labelling::Natural);
        assert_eq!(p.min_frame_errors, 50);
        assert_eq!(p.max_frames, 100_000);
        assert_eq!(p.rule, CheckRule::SumProduct);
        assert_eq!(p.convention, MetricConvention::Cdf);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(
            parse_err(&["sweep", "--snr", "0:1:3", "--rate", "0.5"]).kind(),
            ErrorKind::MissingRequiredArgument
        );
        assert_eq!(
            parse_err(&["sweep", "--scheme", "rrs", "--snr", "0:1:3", "--rate", "0.5", "--bogus"])
                .kind(),
            ErrorKind::UnknownArgument
        );
        assert!(
            parse_err(&["sweep", "--scheme", "rrs", "--snr", "1:0:3", "--rate", "0.5"]).exit_code()
                == 2
        );
        assert!(
            parse_err(&["sweep", "--scheme", "rrs", "--snr", "0:1", "--rate", "0.5"]).exit_code()
                == 2
        );
        assert_eq!(
            parse_err(&[
                "sweep", "--scheme", "rrs", "--snr", "0", "--code", "h.alist", "--gen", "20,3,4"
            ])
            .kind(),
            ErrorKind::ArgumentConflict
        );
        parse_err(&[
            "point", "--scheme", "rrs", "--snr", "0:1:2", "--rate", "0.5",
        ]);
        parse_err(&["sweep", "--scheme", "rrs", "--snr", "0"]);
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"scheme": "rrh", "snr": "-3:-1:3", "gen": "40,3,4", "seed": 9, "labelling": "gray"}"#,
        )
        .unwrap();
        let p = plan(&[
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--scheme",
            "rrs",
        ]);
        assert_eq!(p.scheme, Scheme::Rrs);
        assert_eq!(p.labelling, Labelling::Gray);
        assert_eq!(p.seed, 9);
        assert_eq!(p.snrs, vec![-3.0, -2.0, -1.0]);
        std::fs::write(&path, r#"{"schema": "rrh"}"#).unwrap();
        parse_err(&["sweep", "--config", path.to_str().unwrap()]);
    }

    #[test]
    fn grid_and_gen_parsing() {
        assert_eq!(
            "-10".parse::<SnrGrid>().unwrap().points().unwrap(),
            vec![-10.0]
        );
        assert!("a:b:c".parse::<SnrGrid>().is_err());
        assert!("0:1:0".parse::<SnrGrid>().is_err());
        assert_eq!(
            "100,3,6".parse::<GenSpec>().unwrap(),
            GenSpec {
                n: 100,
                col_weight: 3,
                row_weight: 6
            }
        );
        assert!("100,3".parse::<GenSpec>().is_err());
    }

    #[test]
    fn help_lists_every_flag() {
        let mut cmd = Cli::command();
        let sweep = cmd.find_subcommand_mut("sweep").unwrap();
        let help = sweep.render_long_help().to_string();
        for flag in [
            "--scheme",
            "--labelling",
            "--rate",
            "--length",
            "--code",
            "--gen",
            "--code-seed",
            "--snr",
            "--max-iter",
            "--min-ferr",
            "--max-frames",
            "--seed",
            "--decoder",
            "--complement-odd-regions",
            "--out",
            "--jobs",
            "--config",
        ] {
            assert!(help.contains(flag), "{flag}");
        }
        assert!(help.contains("RECON_SIM_JOBS"));
        Cli::command().debug_assert();
    }
}
