//! Command-line front door: build instances, compute VC dimensions,
//! run the claim suite, simulate single protocol runs, and sweep bit
//! counts to CSV.
//!
//! Every artifact embeds its configuration as `# key=value` comment
//! lines, files are written atomically (temp file + rename), and no
//! output file contains wall-clock times, so the same config and seed
//! always produce byte-identical files. Protocol inputs that are not
//! given explicitly are drawn from a seed-derived input stream kept
//! separate from the protocol's own coin stream.
//!
//! Exit statuses: 0 ok, 1 verification failure, 2 config error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::protocols::{
    full_disclosure_disj, full_disclosure_int, gcd_protocol, line_disj_protocol, run, splitmix64,
    Transcript,
};
use crate::reductions::{learn_via_intersection, meets_learn_promise};
use crate::setsystems::{
    build_grid_instance, build_interval_instance, enumerate_interval_family, enumerate_line_family,
    generate_t1, generate_t2, GridInstance, IntervalFamily, LineFamily, LineFamilySet, Side,
    DEFAULT_ENUM_CAP,
};
use crate::vcdim::{sauer_shelah_slack, vc_dimension_with_witness, Family};
use crate::verify::{default_suite, suite_claim, ClaimReport, VerifyError, SUITE_CLAIM_IDS};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_TRIALS: u64 = 200;
pub const INSTANCE_FILE_VERSION: u32 = 1;

/// Salt separating input-drawing randomness from protocol coins.
const INPUT_STREAM_SALT: u64 = 0x696e_7075_7473;

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Geometry {
    Interval,
    Grid,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Geometry::Interval => "interval",
            Geometry::Grid => "grid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pretty,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Pretty => "pretty",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimProtocol {
    Gcd,
    LineDisj,
    Learn,
    FullDisclosure,
}

impl std::fmt::Display for SimProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimProtocol::Gcd => "gcd",
            SimProtocol::LineDisj => "line-disj",
            SimProtocol::Learn => "learn",
            SimProtocol::FullDisclosure => "full-disclosure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepProtocol {
    Gcd,
    LineDisj,
}

impl std::fmt::Display for SweepProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepProtocol::Gcd => "gcd",
            SweepProtocol::LineDisj => "line-disj",
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vcdisj",
    version,
    about = "Anchored set systems, VC dimension, and bit-exact two-party protocols",
    after_help = "Exit statuses: 0 ok, 1 verification failure, 2 config error."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an instance and write its description file (TOML with a
    /// version field).
    Build(BuildArgs),
    /// VC dimension, shattered witness, and Sauer–Shelah slack of an
    /// instance's enumerated families.
    #[command(after_help = "CSV columns: family, ground_size, members, \
                            vc_dimension, witness (';'-joined points, grid \
                            points as x|y), sauer_shelah_slack.")]
    Vcdim(VcdimArgs),
    /// Run exhaustive claim checks; nonzero exit on any failure.
    #[command(
        alias = "verify-claims",
        after_help = "CSV columns: claim, params, cases, failures, \
                      counterexample. Valid --claim ids: interval-claim, \
                      observation-blocks, grid-claims, subset-divides, \
                      reduction-augindex, reduction-ordisj, gcd-protocol."
    )]
    Verify(VerifyArgs),
    /// Run one protocol on seed-drawn inputs and report its cost.
    #[command(after_help = "CSV columns: protocol, input_a, input_b, answer, \
                            total_bits, rounds, messages. With \
                            --dump-transcript a second block follows with \
                            columns: message, sender, bits, payload_hex.")]
    Simulate(SimulateArgs),
    /// Measure mean protocol cost across a parameter grid.
    #[command(after_help = "CSV columns: param (k for gcd, n for line-disj), \
                            trials, mean_bits, stddev_bits, mean_rounds. \
                            Stddev is the population standard deviation.")]
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Instance geometry.
    #[arg(long, value_enum)]
    geometry: Geometry,
    /// Ground-set size (interval: d·(m+2) with m a power of two ≥ 2;
    /// grid: d·m² with m ≥ 2).
    #[arg(long)]
    n: u64,
    /// Number of blocks/grids.
    #[arg(long)]
    d: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VcdimArgs {
    #[arg(long, value_enum)]
    geometry: Geometry,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    d: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run the complete claim suite.
    #[arg(long)]
    all: bool,
    /// Run only the named claim; repeatable. See --help for ids.
    #[arg(long = "claim")]
    claims: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Protocol to run.
    #[arg(long, value_enum)]
    protocol: SimProtocol,
    /// Geometry for line-disj/learn (grid) or full-disclosure.
    #[arg(long, value_enum)]
    geometry: Option<Geometry>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    /// Input bound for the gcd protocol.
    #[arg(long)]
    k: Option<u64>,
    /// Error budget δ ∈ (0,1).
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also emit each message's payload as hex.
    #[arg(long)]
    dump_transcript: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Protocol to sweep.
    #[arg(long, value_enum)]
    protocol: SweepProtocol,
    /// gcd: input bounds to sweep; repeatable. Default 2⁸ 2¹² 2¹⁶ 2²⁰.
    #[arg(long = "k")]
    k: Vec<u64>,
    /// line-disj: ground sizes to sweep; repeatable. Default d·m² for
    /// m ∈ {4, 8, 16, 32}.
    #[arg(long = "n")]
    n: Vec<u64>,
    /// Number of grids for line-disj instances.
    #[arg(long, default_value_t = 1)]
    d: u64,
    /// Seeded input pairs per parameter point.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Config echo and errors
// ---------------------------------------------------------------------------

/// The resolved configuration echoed into every artifact.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub entries: Vec<(&'static str, String)>,
}

impl RunConfig {
    fn new(subcommand: &'static str) -> Self {
        RunConfig { subcommand, entries: Vec::new() }
    }

    fn push(&mut self, key: &'static str, value: impl std::fmt::Display) {
        self.entries.push((key, value.to_string()));
    }

    /// `# key=value` comment lines, `cmd` first.
    pub fn echo(&self) -> String {
        let mut out = format!("# cmd={}\n", self.subcommand);
        for (key, value) in &self.entries {
            let _ = writeln!(out, "# {key}={value}");
        }
        out
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad parameters; exit status 2.
    Config(String),
    /// A check failed or a run went wrong; exit status 1.
    Failure(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Failure(msg) => write!(f, "failure: {msg}"),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Finished command: text to deliver plus where, and whether the exit
/// status should signal a verification failure.
struct CmdResult {
    text: String,
    out: Option<PathBuf>,
    failed: bool,
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Parses arguments, dispatches, writes output; returns the process
/// exit status.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            // clap uses 2 for usage errors and 0 for help/version,
            // matching our config-error convention.
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(cli) {
        Ok(result) => {
            if let Some(path) = &result.out {
                if let Err(e) = write_atomic(path, &result.text) {
                    eprintln!("{e}");
                    return 1;
                }
            } else {
                print!("{}", result.text);
            }
            if result.failed {
                1
            } else {
                0
            }
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("failure: {msg}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<CmdResult, CliError> {
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Vcdim(args) => cmd_vcdim(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

/// Writes via a temp file in the target directory plus rename, so a
/// crash never leaves a half-written artifact.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Failure(format!("cannot create temp file in {dir:?}: {e}")))?;
    tmp.write_all(text.as_bytes())
        .map_err(|e| CliError::Failure(format!("cannot write {path:?}: {e}")))?;
    tmp.persist(path)
        .map_err(|e| CliError::Failure(format!("cannot persist {path:?}: {e}")))?;
    Ok(())
}

/// Quotes a CSV field only when it needs it.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

/// On-disk instance description. Grid anchors are (x, y) pairs.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    pub geometry: String,
    pub n: u64,
    pub d: u64,
    pub m: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval_anchors: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_anchors: Option<Vec<[i64; 2]>>,
}

/// Parses and version-checks an instance description.
pub fn parse_instance_file(text: &str) -> Result<InstanceFile, CliError> {
    let file: InstanceFile = toml::from_str(text).map_err(config_err)?;
    if file.version != INSTANCE_FILE_VERSION {
        return Err(CliError::Config(format!(
            "instance file version {} unsupported (expected {INSTANCE_FILE_VERSION})",
            file.version
        )));
    }
    Ok(file)
}

fn cmd_build(args: BuildArgs) -> Result<CmdResult, CliError> {
    let mut config = RunConfig::new("build");
    config.push("geometry", args.geometry);
    config.push("n", args.n);
    config.push("d", args.d);

    let file = match args.geometry {
        Geometry::Interval => {
            let inst = build_interval_instance(args.n, args.d).map_err(config_err)?;
            InstanceFile {
                version: INSTANCE_FILE_VERSION,
                geometry: args.geometry.to_string(),
                n: inst.n(),
                d: inst.d(),
                m: inst.m(),
                interval_anchors: Some(inst.anchors().to_vec()),
                grid_anchors: None,
            }
        }
        Geometry::Grid => {
            let inst = build_grid_instance(args.n, args.d).map_err(config_err)?;
            InstanceFile {
                version: INSTANCE_FILE_VERSION,
                geometry: args.geometry.to_string(),
                n: inst.n(),
                d: inst.d(),
                m: inst.m(),
                interval_anchors: None,
                grid_anchors: Some(inst.anchors().iter().map(|&(x, y)| [x, y]).collect()),
            }
        }
    };
    let body = toml::to_string_pretty(&file)
        .map_err(|e| CliError::Failure(format!("serialization: {e}")))?;
    Ok(CmdResult {
        text: format!("{}{body}", config.echo()),
        out: args.out,
        failed: false,
    })
}

// ---------------------------------------------------------------------------
// vcdim
// ---------------------------------------------------------------------------

struct FamilyRow {
    family: &'static str,
    ground_size: usize,
    members: usize,
    vc_dimension: usize,
    witness: String,
    slack: f64,
}

fn family_row<P: Ord + Copy>(
    name: &'static str,
    ground: &[P],
    sets: &[&BTreeSet<P>],
    show: impl Fn(P) -> String,
) -> Result<FamilyRow, CliError> {
    let fam = Family::from_point_sets(ground, sets.iter().map(|s| s.iter().copied()))
        .map_err(config_err)?;
    let (v, witness_mask) = vc_dimension_with_witness(&fam).map_err(config_err)?;
    let witness: Vec<String> = (0..ground.len())
        .filter(|i| witness_mask >> i & 1 == 1)
        .map(|i| show(ground[i]))
        .collect();
    Ok(FamilyRow {
        family: name,
        ground_size: ground.len(),
        members: fam.distinct_members(),
        vc_dimension: v,
        witness: witness.join(";"),
        slack: sauer_shelah_slack(&fam).map_err(config_err)?,
    })
}

fn cmd_vcdim(args: VcdimArgs) -> Result<CmdResult, CliError> {
    let mut config = RunConfig::new("vcdim");
    config.push("geometry", args.geometry);
    config.push("n", args.n);
    config.push("d", args.d);
    config.push("format", args.format);

    let rows = match args.geometry {
        Geometry::Interval => {
            let inst = build_interval_instance(args.n, args.d).map_err(config_err)?;
            let r0 = enumerate_interval_family(&inst, IntervalFamily::R0, DEFAULT_ENUM_CAP)
                .map_err(config_err)?;
            let rm1 = enumerate_interval_family(&inst, IntervalFamily::Rm1, DEFAULT_ENUM_CAP)
                .map_err(config_err)?;
            let ground = inst.ground_points();
            let r0_sets: Vec<_> = r0.iter().map(|s| s.points()).collect();
            let rm1_sets: Vec<_> = rm1.iter().map(|s| s.points()).collect();
            let union_sets: Vec<_> = r0_sets.iter().chain(&rm1_sets).copied().collect();
            vec![
                family_row("R0", &ground, &r0_sets, |p: i64| p.to_string())?,
                family_row("Rm1", &ground, &rm1_sets, |p: i64| p.to_string())?,
                family_row("union", &ground, &union_sets, |p: i64| p.to_string())?,
            ]
        }
        Geometry::Grid => {
            let inst = build_grid_instance(args.n, args.d).map_err(config_err)?;
            let t1 = enumerate_line_family(&inst, LineFamily::T1, DEFAULT_ENUM_CAP)
                .map_err(config_err)?;
            let t2 = enumerate_line_family(&inst, LineFamily::T2, DEFAULT_ENUM_CAP)
                .map_err(config_err)?;
            let ground = inst.ground_points();
            let t1_sets: Vec<_> = t1.iter().map(|s| s.points()).collect();
            let t2_sets: Vec<_> = t2.iter().map(|s| s.points()).collect();
            let union_sets: Vec<_> = t1_sets.iter().chain(&t2_sets).copied().collect();
            let show = |p: crate::setsystems::GridPoint| format!("{}|{}", p.x, p.y);
            vec![
                family_row("T1", &ground, &t1_sets, show)?,
                family_row("T2", &ground, &t2_sets, show)?,
                family_row("union", &ground, &union_sets, show)?,
            ]
        }
    };

    let mut text = config.echo();
    match args.format {
        Format::Csv => {
            text.push_str("family,ground_size,members,vc_dimension,witness,sauer_shelah_slack\n");
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{:.4}",
                    r.family, r.ground_size, r.members, r.vc_dimension, r.witness, r.slack
                );
            }
        }
        Format::Pretty => {
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{:6} ground={:3} members={:4} vc={} witness=[{}] slack={:.4}",
                    r.family, r.ground_size, r.members, r.vc_dimension, r.witness, r.slack
                );
            }
        }
    }
    Ok(CmdResult { text, out: args.out, failed: false })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn map_verify_err(e: VerifyError) -> CliError {
    match e {
        VerifyError::UnknownClaim(_) | VerifyError::CapExceeded { .. } => {
            CliError::Config(e.to_string())
        }
        other => CliError::Failure(other.to_string()),
    }
}

fn render_reports(reports: &[ClaimReport], format: Format, include_wall: bool) -> String {
    let mut text = String::new();
    match format {
        Format::Csv => {
            text.push_str("claim,params,cases,failures,counterexample\n");
            for r in reports {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{}",
                    r.claim,
                    csv_field(&r.params),
                    r.cases,
                    r.failures,
                    csv_field(r.counterexample.as_deref().unwrap_or(""))
                );
            }
        }
        Format::Pretty => {
            for r in reports {
                if include_wall {
                    let _ = writeln!(text, "{r}");
                } else {
                    let _ = writeln!(
                        text,
                        "{:24} {:32} {:>8} cases {:>4} failures [{}]",
                        r.claim,
                        r.params,
                        r.cases,
                        r.failures,
                        if r.passed() { "PASS" } else { "FAIL" }
                    );
                    if let Some(ce) = &r.counterexample {
                        let _ = writeln!(text, "  first counterexample: {ce}");
                    }
                }
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            let _ = writeln!(
                text,
                "{} claims, {} failed",
                reports.len(),
                failed
            );
        }
    }
    text
}

fn cmd_verify(args: VerifyArgs) -> Result<CmdResult, CliError> {
    if args.all != args.claims.is_empty() {
        return Err(CliError::Config(format!(
            "choose either --all or at least one --claim (valid ids: {})",
            SUITE_CLAIM_IDS.join(", ")
        )));
    }
    let mut config = RunConfig::new("verify");
    config.push("all", args.all);
    if !args.claims.is_empty() {
        config.push("claims", args.claims.join(";"));
    }
    config.push("format", args.format);

    let reports = if args.all {
        default_suite().map_err(map_verify_err)?
    } else {
        let mut reports = Vec::new();
        for id in &args.claims {
            reports.extend(suite_claim(id).map_err(map_verify_err)?);
        }
        reports
    };
    // Wall times stay off disk so identical configs give identical bytes.
    let include_wall = args.out.is_none() && args.format == Format::Pretty;
    let text = format!(
        "{}{}",
        config.echo(),
        render_reports(&reports, args.format, include_wall)
    );
    let failed = reports.iter().any(|r| !r.passed());
    Ok(CmdResult { text, out: args.out, failed })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn input_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(splitmix64(seed ^ INPUT_STREAM_SALT))
}

fn grid_instance_for(args: &SimulateArgs) -> Result<GridInstance, CliError> {
    match (args.geometry, args.n, args.d) {
        (Some(Geometry::Grid), Some(n), Some(d)) => build_grid_instance(n, d).map_err(config_err),
        _ => Err(CliError::Config(
            "this protocol needs --geometry grid --n <n> --d <d>".into(),
        )),
    }
}

/// Seed-drawn T₁/T₂ members for one simulated run.
fn draw_line_pair(
    inst: &GridInstance,
    rng: &mut ChaCha20Rng,
) -> (LineFamilySet, LineFamilySet) {
    let d = inst.d() as usize;
    let a: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=inst.m() - 1)).collect();
    let b: Vec<u64> = (0..d).map(|_| rng.gen_range(0..=inst.m() - 1)).collect();
    (
        generate_t1(inst, &a).expect("drawn in range"),
        generate_t2(inst, &b).expect("drawn in range"),
    )
}

fn show_params(params: &[u64]) -> String {
    params
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn show_interval_member(m: &crate::setsystems::AnchoredIntervalSet) -> String {
    let side = match m.side() {
        Side::Left => "left",
        Side::Right => "right",
    };
    format!("{side}:{}", show_params(m.lengths()))
}

fn show_line_member(m: &LineFamilySet) -> String {
    let kind = match m.kind() {
        crate::setsystems::LineKind::Slope => "slope",
        crate::setsystems::LineKind::Vertical => "vertical",
    };
    format!("{kind}:{}", show_params(m.params()))
}

struct SimRun {
    input_a: String,
    input_b: String,
    answer: String,
    transcript: Transcript,
}

fn simulate_run(args: &SimulateArgs) -> Result<SimRun, CliError> {
    let mut rng = input_rng(args.seed);
    match args.protocol {
        SimProtocol::Gcd => {
            let k = args
                .k
                .ok_or_else(|| CliError::Config("gcd needs --k <bound>".into()))?;
            let proto = gcd_protocol(k, args.delta).map_err(config_err)?;
            let a = rng.gen_range(1..=k);
            let b = rng.gen_range(1..=k);
            let outcome = run(&proto, &a, &b, args.seed)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            Ok(SimRun {
                input_a: a.to_string(),
                input_b: b.to_string(),
                answer: outcome.answer.to_string(),
                transcript: outcome.transcript,
            })
        }
        SimProtocol::LineDisj => {
            let inst = grid_instance_for(args)?;
            let proto = line_disj_protocol(&inst, args.delta).map_err(config_err)?;
            let (a, b) = draw_line_pair(&inst, &mut rng);
            let outcome =
                run(&proto, &a, &b, args.seed).map_err(|e| CliError::Failure(e.to_string()))?;
            Ok(SimRun {
                input_a: show_line_member(&a),
                input_b: show_line_member(&b),
                answer: outcome.answer.to_string(),
                transcript: outcome.transcript,
            })
        }
        SimProtocol::Learn => {
            let inst = grid_instance_for(args)?;
            let proto = full_disclosure_int(&inst).map_err(config_err)?;
            // Resample until the |A∩B| = d promise (off the anchor
            // columns) holds; (a=1…, b=1…) always satisfies it, so
            // this terminates fast.
            let (a, b) = std::iter::repeat_with(|| draw_line_pair(&inst, &mut rng))
                .take(10_000)
                .find(|(a, b)| meets_learn_promise(a, b, &inst))
                .ok_or_else(|| CliError::Failure("no promise pair found".into()))?;
            let outcome = learn_via_intersection(&proto, &a, &b, &inst, args.seed)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            Ok(SimRun {
                input_a: show_line_member(&a),
                input_b: show_line_member(&b),
                answer: format!(
                    "recovered:{};{}",
                    show_line_member(&outcome.a_learned_by_bob),
                    show_line_member(&outcome.b_learned_by_alice)
                ),
                transcript: outcome.transcript,
            })
        }
        SimProtocol::FullDisclosure => {
            match (args.geometry, args.n, args.d) {
                (Some(Geometry::Interval), Some(n), Some(d)) => {
                    let inst = build_interval_instance(n, d).map_err(config_err)?;
                    let mut family =
                        enumerate_interval_family(&inst, IntervalFamily::R0, DEFAULT_ENUM_CAP)
                            .map_err(config_err)?;
                    for m in
                        enumerate_interval_family(&inst, IntervalFamily::Rm1, DEFAULT_ENUM_CAP)
                            .map_err(config_err)?
                    {
                        if family.iter().all(|f| f.points() != m.points()) {
                            family.push(m);
                        }
                    }
                    let ia = rng.gen_range(0..family.len());
                    let ib = rng.gen_range(0..family.len());
                    let (a, b) = (family[ia].clone(), family[ib].clone());
                    let proto = full_disclosure_disj(family).map_err(config_err)?;
                    let outcome = run(&proto, &a, &b, args.seed)
                        .map_err(|e| CliError::Failure(e.to_string()))?;
                    Ok(SimRun {
                        input_a: show_interval_member(&a),
                        input_b: show_interval_member(&b),
                        answer: outcome.answer.to_string(),
                        transcript: outcome.transcript,
                    })
                }
                (Some(Geometry::Grid), Some(n), Some(d)) => {
                    let inst = build_grid_instance(n, d).map_err(config_err)?;
                    let mut family = enumerate_line_family(&inst, LineFamily::T1, DEFAULT_ENUM_CAP)
                        .map_err(config_err)?;
                    family.extend(
                        enumerate_line_family(&inst, LineFamily::T2, DEFAULT_ENUM_CAP)
                            .map_err(config_err)?,
                    );
                    let ia = rng.gen_range(0..family.len());
                    let ib = rng.gen_range(0..family.len());
                    let (a, b) = (family[ia].clone(), family[ib].clone());
                    let proto = full_disclosure_disj(family).map_err(config_err)?;
                    let outcome = run(&proto, &a, &b, args.seed)
                        .map_err(|e| CliError::Failure(e.to_string()))?;
                    Ok(SimRun {
                        input_a: show_line_member(&a),
                        input_b: show_line_member(&b),
                        answer: outcome.answer.to_string(),
                        transcript: outcome.transcript,
                    })
                }
                _ => Err(CliError::Config(
                    "full-disclosure needs --geometry {interval,grid} --n <n> --d <d>".into(),
                )),
            }
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<CmdResult, CliError> {
    let mut config = RunConfig::new("simulate");
    config.push("protocol", args.protocol);
    if let Some(g) = args.geometry {
        config.push("geometry", g);
    }
    if let Some(n) = args.n {
        config.push("n", n);
    }
    if let Some(d) = args.d {
        config.push("d", d);
    }
    if let Some(k) = args.k {
        config.push("k", k);
    }
    config.push("delta", args.delta);
    config.push("seed", args.seed);
    config.push("format", args.format);

    let sim = simulate_run(&args)?;
    let mut text = config.echo();
    match args.format {
        Format::Csv => {
            text.push_str("protocol,input_a,input_b,answer,total_bits,rounds,messages\n");
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{}",
                args.protocol,
                sim.input_a,
                sim.input_b,
                sim.answer,
                sim.transcript.total_bits(),
                sim.transcript.rounds(),
                sim.transcript.messages().len()
            );
            if args.dump_transcript {
                text.push_str("message,sender,bits,payload_hex\n");
                for (i, msg) in sim.transcript.messages().iter().enumerate() {
                    let _ = writeln!(
                        text,
                        "{},{},{},{}",
                        i + 1,
                        msg.sender,
                        msg.bits.len(),
                        msg.payload_hex()
                    );
                }
            }
        }
        Format::Pretty => {
            let _ = writeln!(text, "protocol   {}", args.protocol);
            let _ = writeln!(text, "input A    {}", sim.input_a);
            let _ = writeln!(text, "input B    {}", sim.input_b);
            let _ = writeln!(text, "answer     {}", sim.answer);
            let _ = writeln!(
                text,
                "cost       {} bits, {} rounds, {} messages",
                sim.transcript.total_bits(),
                sim.transcript.rounds(),
                sim.transcript.messages().len()
            );
            if args.dump_transcript {
                for (i, msg) in sim.transcript.messages().iter().enumerate() {
                    let _ = writeln!(
                        text,
                        "msg {:>3}    {:5} {:>5} bits  {}",
                        i + 1,
                        msg.sender.to_string(),
                        msg.bits.len(),
                        msg.payload_hex()
                    );
                }
            }
        }
    }
    Ok(CmdResult { text, out: args.out, failed: false })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    param: u64,
    trials: u64,
    mean_bits: f64,
    stddev_bits: f64,
    mean_rounds: f64,
}

fn stats(samples: &[(u64, u64)]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mean_bits = samples.iter().map(|&(b, _)| b as f64).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|&(b, _)| (b as f64 - mean_bits).powi(2))
        .sum::<f64>()
        / n;
    let mean_rounds = samples.iter().map(|&(_, r)| r as f64).sum::<f64>() / n;
    (mean_bits, var.sqrt(), mean_rounds)
}

/// Per-trial protocol seed, decorrelated from the input stream.
fn trial_seed(seed: u64, param: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed ^ param) ^ trial)
}

fn sweep_gcd(ks: &[u64], trials: u64, delta: f64, seed: u64) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    for &k in ks {
        let proto = gcd_protocol(k, delta).map_err(config_err)?;
        let mut rng = input_rng(splitmix64(seed ^ k));
        let inputs: Vec<(u64, u64)> = (0..trials)
            .map(|_| (rng.gen_range(1..=k), rng.gen_range(1..=k)))
            .collect();
        let samples: Vec<(u64, u64)> = inputs
            .par_iter()
            .enumerate()
            .map(|(t, &(a, b))| {
                let outcome =
                    run(&proto, &a, &b, trial_seed(seed, k, t as u64)).expect("inputs in range");
                (outcome.transcript.total_bits(), outcome.transcript.rounds())
            })
            .collect();
        let (mean_bits, stddev_bits, mean_rounds) = stats(&samples);
        rows.push(SweepRow { param: k, trials, mean_bits, stddev_bits, mean_rounds });
    }
    Ok(rows)
}

fn sweep_line_disj(
    ns: &[u64],
    d: u64,
    trials: u64,
    delta: f64,
    seed: u64,
) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    for &n in ns {
        let inst = build_grid_instance(n, d).map_err(config_err)?;
        let proto = line_disj_protocol(&inst, delta).map_err(config_err)?;
        let mut rng = input_rng(splitmix64(seed ^ n));
        let inputs: Vec<(LineFamilySet, LineFamilySet)> =
            (0..trials).map(|_| draw_line_pair(&inst, &mut rng)).collect();
        let samples: Vec<(u64, u64)> = inputs
            .par_iter()
            .enumerate()
            .map(|(t, (a, b))| {
                let outcome =
                    run(&proto, a, b, trial_seed(seed, n, t as u64)).expect("matching instance");
                (outcome.transcript.total_bits(), outcome.transcript.rounds())
            })
            .collect();
        let (mean_bits, stddev_bits, mean_rounds) = stats(&samples);
        rows.push(SweepRow { param: n, trials, mean_bits, stddev_bits, mean_rounds });
    }
    Ok(rows)
}

fn cmd_sweep(args: SweepArgs) -> Result<CmdResult, CliError> {
    if args.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let mut config = RunConfig::new("sweep");
    config.push("protocol", args.protocol);

    let rows = match args.protocol {
        SweepProtocol::Gcd => {
            let ks = if args.k.is_empty() {
                vec![1 << 8, 1 << 12, 1 << 16, 1 << 20]
            } else {
                args.k.clone()
            };
            config.push(
                "k",
                ks.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            );
            config.push("trials", args.trials);
            config.push("delta", args.delta);
            config.push("seed", args.seed);
            config.push("format", args.format);
            sweep_gcd(&ks, args.trials, args.delta, args.seed)?
        }
        SweepProtocol::LineDisj => {
            let ns = if args.n.is_empty() {
                [4u64, 8, 16, 32].iter().map(|m| args.d * m * m).collect()
            } else {
                args.n.clone()
            };
            config.push(
                "n",
                ns.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            );
            config.push("d", args.d);
            config.push("trials", args.trials);
            config.push("delta", args.delta);
            config.push("seed", args.seed);
            config.push("format", args.format);
            sweep_line_disj(&ns, args.d, args.trials, args.delta, args.seed)?
        }
    };

    let mut text = config.echo();
    match args.format {
        Format::Csv => {
            text.push_str("param,trials,mean_bits,stddev_bits,mean_rounds\n");
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{:.4},{:.4},{:.4}",
                    r.param, r.trials, r.mean_bits, r.stddev_bits, r.mean_rounds
                );
            }
        }
        Format::Pretty => {
            for r in &rows {
                let _ = writeln!(
                    text,
                    "param={:>8} trials={:>5} mean_bits={:>10.4} stddev={:>9.4} rounds={:>7.4}",
                    r.param, r.trials, r.mean_bits, r.stddev_bits, r.mean_rounds
                );
            }
        }
    }
    Ok(CmdResult { text, out: args.out, failed: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(line: &str) -> Cli {
        Cli::try_parse_from(line.split_whitespace()).unwrap()
    }

    #[test]
    fn config_echo_is_ordered_and_commented() {
        let mut config = RunConfig::new("sweep");
        config.push("protocol", "gcd");
        config.push("seed", 1);
        assert_eq!(config.echo(), "# cmd=sweep\n# protocol=gcd\n# seed=1\n");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn build_output_round_trips_through_toml() {
        for line in [
            "vcdisj build --geometry interval --n 12 --d 2",
            "vcdisj build --geometry grid --n 32 --d 2",
        ] {
            let cli = parse(line);
            let result = dispatch(cli).unwrap();
            let file = parse_instance_file(&result.text).unwrap();
            assert_eq!(file.version, INSTANCE_FILE_VERSION);
            assert_eq!(file.d, 2);
            match file.geometry.as_str() {
                "interval" => {
                    assert_eq!(file.m, 4);
                    assert_eq!(file.interval_anchors.as_deref(), Some(&[0i64, 7][..]));
                }
                "grid" => {
                    assert_eq!(file.m, 4);
                    assert_eq!(file.grid_anchors.as_deref().map(|a| a.len()), Some(2));
                }
                other => panic!("unexpected geometry {other}"),
            }
        }
    }

    #[test]
    fn instance_file_version_gate() {
        let text = "version = 9\ngeometry = \"interval\"\nn = 6\nd = 1\nm = 4\n";
        assert!(matches!(parse_instance_file(text), Err(CliError::Config(_))));
    }

    #[test]
    fn vcdim_interval_reports_frozen_dimensions() {
        let cli = parse("vcdisj vcdim --geometry interval --n 6 --d 1 --format csv");
        let result = dispatch(cli).unwrap();
        let lines: Vec<&str> = result.text.lines().collect();
        assert!(lines.contains(&"family,ground_size,members,vc_dimension,witness,sauer_shelah_slack"));
        let union = lines.iter().find(|l| l.starts_with("union,")).unwrap();
        let fields: Vec<&str> = union.split(',').collect();
        assert_eq!(fields[1], "6");
        assert_eq!(fields[2], "11");
        assert_eq!(fields[3], "2");
    }

    #[test]
    fn verify_requires_a_selection() {
        let cli = parse("vcdisj verify");
        assert!(matches!(dispatch(cli), Err(CliError::Config(_))));
        let cli = parse("vcdisj verify --all --claim subset-divides");
        assert!(matches!(dispatch(cli), Err(CliError::Config(_))));
        let cli = parse("vcdisj verify --claim no-such-claim");
        assert!(matches!(dispatch(cli), Err(CliError::Config(_))));
    }

    #[test]
    fn verify_single_claim_csv() {
        let cli = parse("vcdisj verify --claim reduction-ordisj --format csv");
        let result = dispatch(cli).unwrap();
        assert!(!result.failed);
        assert!(result.text.contains("claim,params,cases,failures,counterexample"));
        assert_eq!(result.text.matches("reduction-ordisj").count(), 4); // echo + 3 rows
    }

    #[test]
    fn simulate_gcd_is_reproducible() {
        let line = "vcdisj simulate --protocol gcd --k 60 --seed 7 --dump-transcript";
        let one = dispatch(parse(line)).unwrap();
        let two = dispatch(parse(line)).unwrap();
        assert_eq!(one.text, two.text);
        assert!(one.text.contains("message,sender,bits,payload_hex"));
        // The answer matches Euclid on the drawn pair.
        let row = one
            .text
            .lines()
            .find(|l| l.starts_with("gcd,"))
            .expect("summary row");
        let fields: Vec<&str> = row.split(',').collect();
        let (a, b): (u64, u64) = (fields[1].parse().unwrap(), fields[2].parse().unwrap());
        let g: u64 = fields[3].parse().unwrap();
        assert_eq!(g, crate::encoding::gcd(a, b).unwrap());
    }

    #[test]
    fn simulate_requires_protocol_parameters() {
        let cli = parse("vcdisj simulate --protocol gcd");
        assert!(matches!(dispatch(cli), Err(CliError::Config(_))));
        let cli = parse("vcdisj simulate --protocol line-disj");
        assert!(matches!(dispatch(cli), Err(CliError::Config(_))));
        let cli = parse("vcdisj simulate --protocol learn --geometry interval --n 6 --d 1");
        assert!(matches!(dispatch(cli), Err(CliError::Config(_))));
    }

    #[test]
    fn simulate_learn_recovers_members() {
        let cli = parse("vcdisj simulate --protocol learn --geometry grid --n 64 --d 1");
        let result = dispatch(cli).unwrap();
        assert!(result.text.contains("recovered:"));
    }

    #[test]
    fn simulate_full_disclosure_both_geometries() {
        for line in [
            "vcdisj simulate --protocol full-disclosure --geometry interval --n 6 --d 1",
            "vcdisj simulate --protocol full-disclosure --geometry grid --n 16 --d 1",
        ] {
            let result = dispatch(parse(line)).unwrap();
            assert!(result.text.contains("# cmd=simulate"));
            assert!(result.text.lines().any(|l| l.starts_with("full-disclosure,")));
        }
    }

    #[test]
    fn sweep_small_grid() {
        let cli = parse("vcdisj sweep --protocol gcd --k 16 --k 64 --trials 5");
        let result = dispatch(cli).unwrap();
        let data: Vec<&str> = result
            .text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("param"))
            .collect();
        assert_eq!(data.len(), 2);
        assert!(data[0].starts_with("16,5,"));
        assert!(data[1].starts_with("64,5,"));

        let cli = parse("vcdisj sweep --protocol line-disj --n 16 --trials 5");
        let result = dispatch(cli).unwrap();
        assert!(result.text.contains("# d=1"));

        let cli = parse("vcdisj sweep --protocol gcd --trials 0");
        assert!(matches!(dispatch(cli), Err(CliError::Config(_))));
    }

    #[test]
    fn sweep_is_reproducible() {
        let line = "vcdisj sweep --protocol line-disj --n 16 --n 64 --d 1 --trials 8 --seed 3";
        let one = dispatch(parse(line)).unwrap();
        let two = dispatch(parse(line)).unwrap();
        assert_eq!(one.text, two.text);
    }
}
