//! Command-line front end.
//!
//! Exit statuses: 0 success, 1 a verification failed, 2 usage error,
//! 3 a comparison could not be certified at the available precision.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::{Float, Integer};
use serde::Serialize;

use crate::counting::{
    analytic_count, cover_bracket_on, default_depth, locate, pack_bracket_on, verify_product_inequalities,
    CountBracket, LengthScale,
};
use crate::error::{Error, Result};
use crate::geometry::{stage_set, DEFAULT_ENUMERATION_CAP};
use crate::profile::{
    dimension_report, log10_grid, loglog_grid, midband_bound_check, phase_sweep, profile_rows, ratio_limits,
    sum_profile_extrema, Band, WindowMembership,
};
use crate::real::{working_precision, Real};
use crate::schedule::{validate_k_sequence, GeneratorSchedule, KSequence, Outcome, ScheduleDocument};

/// Digits for floating values in CSV output.
const CSV_DIGITS: usize = 17;

#[derive(Debug, Parser)]
#[command(
    name = "boxdim",
    version,
    about = "Exact box-counting for generator-scheduled Cantor sets and their products"
)]
pub struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Working precision in bits for certified real arithmetic.
    #[arg(long, global = true, env = "BOXDIM_PRECISION_BITS", default_value_t = 256)]
    precision: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the growth conditions of a K-sequence.
    Validate(ValidateArgs),
    /// Emit the intervals of one construction stage as exact fractions.
    Stages(StagesArgs),
    /// Covering and packing counts at one length scale.
    Count(CountArgs),
    /// Both profiles and their sum on a log-log grid.
    Profile(ProfileArgs),
    /// The two-curve profile dataset over a log-log window.
    Figure1(Figure1Args),
    /// Profile values along the boundary subsequences of the dimensions.
    Dims(DimsArgs),
    /// Product covering and packing checks at one length scale.
    ProductCheck(ProductArgs),
    /// Phase-window membership of both sets over a log-uniform sweep.
    PhaseCheck(PhaseArgs),
    /// Generator-count ratios at the K-boundaries.
    Ratios(RatiosArgs),
    /// Window extrema of a profile against ln 2 / ln 5.
    Bands(BandsArgs),
    /// Extremes of the summed profile over an x-range.
    Extrema(ExtremaArgs),
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// `paper`, `desk`, or a comma-separated list of decimal K values.
    #[arg(long, default_value = "paper", conflicts_with = "schedule")]
    k: String,
    /// Take the K-sequence from a schedule file.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    horizon: usize,
}

#[derive(Debug, Args)]
struct StagesArgs {
    /// Built-in schedule name or schedule file path.
    #[arg(long, default_value = "F")]
    set: String,
    #[arg(long)]
    depth: u32,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Analytic,
    Greedy,
    Both,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[arg(long, default_value = "F")]
    set: String,
    /// `p/q`, `a,b,c` for 3^-a 5^-b 7^-c, a decimal, or `neglog:<x>`.
    #[arg(long, allow_hyphen_values = true)]
    delta: String,
    /// Enumeration depth for the greedy oracles (default: stage + 2).
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long, value_enum, default_value_t = Oracle::Both)]
    oracle: Oracle,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u32,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long = "f", default_value = "F")]
    f: String,
    #[arg(long = "g", default_value = "G")]
    g: String,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// `lo:hi` range of ln ln x.
    #[arg(long, default_value = "0.5:4.5")]
    window: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct Figure1Args {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value = "0.5:4.5")]
    window: String,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct DimsArgs {
    /// Schedules to report on; repeatable.
    #[arg(long, default_values_t = ["F".to_string(), "G".to_string()])]
    set: Vec<String>,
    #[arg(long, default_value_t = 2)]
    n_max: usize,
}

#[derive(Debug, Args)]
struct ProductArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, allow_hyphen_values = true)]
    delta: String,
    /// Enumeration depth (default: the larger stage + 2).
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// `lo:hi` range of log10 x.
    #[arg(long, default_value = "0:70")]
    log10_range: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct RatiosArgs {
    #[arg(long, default_values_t = ["F".to_string(), "G".to_string()])]
    set: Vec<String>,
    #[arg(long, default_value_t = 1)]
    n_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct BandsArgs {
    #[arg(long, default_value = "F")]
    set: String,
    #[arg(long, default_value = "upper")]
    band: Band,
    #[arg(long, default_value_t = 1)]
    n_max: usize,
}

#[derive(Debug, Args)]
struct ExtremaArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// `lo:hi` range of x = -ln delta, e.g. `1e4:1e70`.
    #[arg(long, default_value = "1e4:1e70")]
    x_range: String,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 5e-2)]
    tolerance: f64,
}

/// Result of a command: whether its checks passed.
enum Verdict {
    Ok,
    Failed(String),
}

pub fn resolve_schedule(name: &str) -> Result<GeneratorSchedule> {
    if let Some(s) = GeneratorSchedule::builtin(name) {
        return Ok(s);
    }
    let path = PathBuf::from(name);
    if !path.exists() {
        return Err(Error::InvalidArgument(format!(
            "{name:?} is neither a built-in schedule (F, G, F-desk, G-desk, pure-G3, pure-G5, pure-G7) nor a file"
        )));
    }
    ScheduleDocument::load(&path)?.to_schedule()
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Parse(format!("{text:?} is not a lo:hi range"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let (a, b): (f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_k(text: &str) -> Result<KSequence> {
    match text {
        "paper" => Ok(KSequence::paper()),
        "desk" => Ok(KSequence::desk()),
        list => {
            let values = list
                .split(',')
                .map(|v| crate::schedule::parse_decimal(v.trim()))
                .collect::<Result<Vec<Integer>>>()?;
            // validates ordering
            GeneratorSchedule::new(KSequence::explicit(values.clone()), crate::schedule::Role::F)?;
            Ok(KSequence::explicit(values))
        }
    }
}

fn sci(r: &Real) -> String {
    r.to_sci(CSV_DIGITS)
}

struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    fn open(path: &Option<PathBuf>) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink { out })
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer_pretty(&mut self.out, value)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    fn csv(&mut self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut self.out);
        w.write_record(header).map_err(csv_error)?;
        for row in rows {
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

fn run_validate(a: &ValidateArgs, sink: &mut Sink) -> Result<Verdict> {
    let k = match &a.schedule {
        Some(p) => ScheduleDocument::load(p)?.to_schedule()?.k().clone(),
        None => parse_k(&a.k)?,
    };
    let report = validate_k_sequence(&k, a.horizon)?;
    sink.json(&report)?;
    let worst = report.rows.iter().map(|r| r.outcome).collect::<Vec<_>>();
    if worst.contains(&Outcome::Fail) || worst.contains(&Outcome::Unavailable) {
        return Ok(Verdict::Failed("some growth conditions do not hold".into()));
    }
    if worst.contains(&Outcome::Indeterminate) {
        return Err(Error::Indeterminate {
            stage: "validate".into(),
            bits: working_precision(),
            hint: "a growth condition could not be decided".into(),
        });
    }
    Ok(Verdict::Ok)
}

fn run_stages(a: &StagesArgs, sink: &mut Sink) -> Result<Verdict> {
    let s = resolve_schedule(&a.set)?;
    let set = stage_set(&s, a.depth, a.cap)?;
    let stage = a.depth.to_string();
    let rows = set.intervals().map(|iv| {
        vec![
            stage.clone(),
            iv.left().numer().to_string(),
            iv.left().denom().to_string(),
            iv.right().numer().to_string(),
            iv.right().denom().to_string(),
        ]
    });
    sink.csv(&["stage", "left_num", "left_den", "right_num", "right_den"], rows)?;
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct CountRecord {
    set: String,
    delta: String,
    stage: String,
    delta_is_stage_length: bool,
    analytic: Option<String>,
    depth: Option<u32>,
    cover: Option<CountBracket>,
    pack: Option<CountBracket>,
    consistent: bool,
}

fn run_count(a: &CountArgs, sink: &mut Sink) -> Result<Verdict> {
    let start = Instant::now();
    let s = resolve_schedule(&a.set)?;
    let delta = LengthScale::parse(&a.delta)?;
    let pos = locate(&s, &delta)?;
    let analytic = analytic_count(&s, &delta)?;
    let mut record = CountRecord {
        set: a.set.clone(),
        delta: delta.to_string(),
        stage: pos.stage.to_string(),
        delta_is_stage_length: pos.on_boundary,
        analytic: matches!(a.oracle, Oracle::Analytic | Oracle::Both).then(|| analytic.to_string()),
        depth: None,
        cover: None,
        pack: None,
        consistent: true,
    };
    if a.oracle != Oracle::Analytic {
        let depth = a.depth.unwrap_or_else(|| default_depth(&pos.stage, a.cap));
        if depth < pos.stage {
            return Err(Error::DepthBelowStage {
                depth,
                stage: pos.stage.to_string(),
            });
        }
        let set = stage_set(&s, depth, a.cap)?;
        let cover = cover_bracket_on(&set, &delta)?;
        let pack = pack_bracket_on(&set, &delta)?;
        if let Some(v) = analytic.value() {
            let inside = |b: &CountBracket| b.lower <= v && v <= b.upper;
            record.consistent = inside(&cover) && inside(&pack);
        }
        record.depth = Some(depth);
        record.cover = Some(cover);
        record.pack = Some(pack);
    }
    sink.json(&record)?;
    eprintln!("count: {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
    Ok(if record.consistent {
        Verdict::Ok
    } else {
        Verdict::Failed(format!(
            "greedy brackets exclude the analytic count at delta = {}",
            record.delta
        ))
    })
}

fn run_profile(a: &ProfileArgs, sink: &mut Sink) -> Result<Verdict> {
    let (sf, sg) = (resolve_schedule(&a.pair.f)?, resolve_schedule(&a.pair.g)?);
    let (lo, hi) = parse_range(&a.window)?;
    let xs = loglog_grid(lo, hi, a.samples, working_precision() + 64);
    let rows = profile_rows(&sf, &sg, &xs)?;
    sink.csv(
        &["x", "loglog_x", "j_F", "phi_F", "j_G", "phi_G", "phi_sum"],
        rows.iter().map(|r| {
            vec![
                sci(&r.f.x),
                r.loglog_x.to_string(),
                r.f.stage.to_string(),
                sci(&r.f.phi),
                r.g.stage.to_string(),
                sci(&r.g.phi),
                sci(&r.sum),
            ]
        }),
    )?;
    Ok(Verdict::Ok)
}

fn run_figure1(a: &Figure1Args, sink: &mut Sink) -> Result<Verdict> {
    let (sf, sg) = (resolve_schedule(&a.pair.f)?, resolve_schedule(&a.pair.g)?);
    let (lo, hi) = parse_range(&a.window)?;
    let xs = loglog_grid(lo, hi, a.samples, working_precision() + 64);
    let rows = profile_rows(&sf, &sg, &xs)?;
    sink.csv(
        &["loglog_x", "phi_F", "phi_G"],
        rows.iter()
            .map(|r| vec![r.loglog_x.to_string(), sci(&r.f.phi), sci(&r.g.phi)]),
    )?;
    Ok(Verdict::Ok)
}

fn run_dims(a: &DimsArgs, sink: &mut Sink) -> Result<Verdict> {
    let reports = a
        .set
        .iter()
        .map(|name| dimension_report(&resolve_schedule(name)?, a.n_max))
        .collect::<Result<Vec<_>>>()?;
    sink.json(&reports)?;
    Ok(Verdict::Ok)
}

fn run_product(a: &ProductArgs, sink: &mut Sink) -> Result<Verdict> {
    let (sf, sg) = (resolve_schedule(&a.pair.f)?, resolve_schedule(&a.pair.g)?);
    let delta = LengthScale::parse(&a.delta)?;
    let depth = match a.depth {
        Some(d) => d,
        None => {
            let jf = locate(&sf, &delta)?.stage;
            let jg = locate(&sg, &delta)?.stage;
            default_depth(&jf.max(jg), a.cap)
        }
    };
    let report = verify_product_inequalities(&sf, &sg, &delta, depth, a.cap)?;
    sink.json(&report)?;
    Ok(if report.holds {
        Verdict::Ok
    } else {
        Verdict::Failed(format!("product checks failed at delta = {}", report.delta))
    })
}

fn window_tag(m: &WindowMembership) -> &'static str {
    match (m.thirds_window, m.sevenths_window) {
        (true, true) => "both",
        (true, false) => "thirds",
        (false, true) => "sevenths",
        (false, false) => "none",
    }
}

#[derive(Serialize)]
struct PhaseSummary {
    samples: usize,
    thirds_violations: usize,
    sevenths_violations: usize,
    /// Sample counts per (F window, G window) pair.
    attribution: std::collections::BTreeMap<String, usize>,
}

fn run_phase(a: &PhaseArgs, sink: &mut Sink) -> Result<Verdict> {
    let (sf, sg) = (resolve_schedule(&a.pair.f)?, resolve_schedule(&a.pair.g)?);
    let (lo, hi) = parse_range(&a.log10_range)?;
    let xs = log10_grid(lo, hi, a.samples, working_precision() + 64);
    let samples = phase_sweep(&sf, &sg, &xs)?;
    let thirds = samples.iter().filter(|s| s.thirds_violation).count();
    let sevenths = samples.iter().filter(|s| s.sevenths_violation).count();
    match a.format {
        Format::Csv => sink.csv(
            &[
                "x",
                "j_F",
                "bracket_F",
                "window_F",
                "j_G",
                "bracket_G",
                "window_G",
                "violation",
            ],
            samples.iter().map(|s| {
                vec![
                    s.x.clone(),
                    s.stage_f.clone(),
                    s.f.bracket.to_string(),
                    window_tag(&s.f).to_string(),
                    s.stage_g.clone(),
                    s.g.bracket.to_string(),
                    window_tag(&s.g).to_string(),
                    s.violated().to_string(),
                ]
            }),
        )?,
        Format::Json => {
            let mut attribution = std::collections::BTreeMap::new();
            for s in &samples {
                *attribution
                    .entry(format!("F:{}/G:{}", window_tag(&s.f), window_tag(&s.g)))
                    .or_insert(0) += 1;
            }
            sink.json(&PhaseSummary {
                samples: samples.len(),
                thirds_violations: thirds,
                sevenths_violations: sevenths,
                attribution,
            })?
        }
    }
    Ok(if thirds + sevenths == 0 {
        Verdict::Ok
    } else {
        Verdict::Failed(format!(
            "{} samples put both sets in matching windows",
            thirds + sevenths
        ))
    })
}

fn run_ratios(a: &RatiosArgs, sink: &mut Sink) -> Result<Verdict> {
    let mut rows = Vec::new();
    for name in &a.set {
        rows.extend(ratio_limits(&resolve_schedule(name)?, a.n_max)?);
    }
    match a.format {
        Format::Json => sink.json(&rows)?,
        Format::Csv => sink.csv(
            &[
                "set",
                "k_index",
                "n",
                "l",
                "g3_over_k",
                "target_g3",
                "distance_g3",
                "g7_over_k",
                "target_g7",
                "distance_g7",
            ],
            rows.iter().map(|r| {
                vec![
                    r.set.to_string(),
                    r.k_index.to_string(),
                    r.n.to_string(),
                    r.l.to_string(),
                    r.g3_over_k.clone(),
                    r.target_g3.to_string(),
                    r.distance_g3.clone(),
                    r.g7_over_k.clone(),
                    r.target_g7.to_string(),
                    r.distance_g7.clone(),
                ]
            }),
        )?,
    }
    Ok(Verdict::Ok)
}

fn run_bands(a: &BandsArgs, sink: &mut Sink) -> Result<Verdict> {
    let report = midband_bound_check(&resolve_schedule(&a.set)?, a.band, a.n_max)?;
    sink.json(&report)?;
    Ok(if report.holds() {
        Verdict::Ok
    } else {
        Verdict::Failed("a window extremum passes ln 2 / ln 5".into())
    })
}

fn parse_x(text: &str) -> Result<Real> {
    let f = Float::parse(text.trim()).map_err(|e| Error::Parse(format!("{text:?}: {e}")))?;
    Ok(Real::point(Float::with_val(working_precision() + 64, f)))
}

fn run_extrema(a: &ExtremaArgs, sink: &mut Sink) -> Result<Verdict> {
    let (sf, sg) = (resolve_schedule(&a.pair.f)?, resolve_schedule(&a.pair.g)?);
    let (lo, hi) = a
        .x_range
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("{:?} is not lo:hi", a.x_range)))?;
    let report = sum_profile_extrema(&sf, &sg, &parse_x(lo)?, &parse_x(hi)?, a.samples, a.tolerance)?;
    sink.json(&report)?;
    let ok = report.max_within && report.min_within && report.strict_upper && report.strict_lower;
    Ok(if ok {
        Verdict::Ok
    } else {
        Verdict::Failed("summed profile leaves its bounds".into())
    })
}

fn dispatch(cli: &Cli) -> Result<Verdict> {
    let mut sink = Sink::open(&cli.output)?;
    let verdict = match &cli.command {
        Command::Validate(a) => run_validate(a, &mut sink),
        Command::Stages(a) => run_stages(a, &mut sink),
        Command::Count(a) => run_count(a, &mut sink),
        Command::Profile(a) => run_profile(a, &mut sink),
        Command::Figure1(a) => run_figure1(a, &mut sink),
        Command::Dims(a) => run_dims(a, &mut sink),
        Command::ProductCheck(a) => run_product(a, &mut sink),
        Command::PhaseCheck(a) => run_phase(a, &mut sink),
        Command::Ratios(a) => run_ratios(a, &mut sink),
        Command::Bands(a) => run_bands(a, &mut sink),
        Command::Extrema(a) => run_extrema(a, &mut sink),
    }?;
    sink.finish()?;
    Ok(verdict)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Indeterminate { .. } => 3,
        _ => 2,
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if !(64..=crate::real::MAX_PRECISION).contains(&cli.precision) {
        eprintln!("error: --precision must lie in 64..={}", crate::real::MAX_PRECISION);
        return ExitCode::from(2);
    }
    std::env::set_var("BOXDIM_PRECISION_BITS", cli.precision.to_string());
    match dispatch(&cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
