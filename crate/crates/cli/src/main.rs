//! `lamcert` command line.
//!
//! Exit codes: 0 success, 2 bad input, 3 a hypothesis of the criterion fails,
//! 4 a property check found a violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lamcert::certify::CertificationReport;
use lamcert::homology::{ThurstonData, ThurstonEntry};
use lamcert::family::{FamilySpec, FamilyTable, RowOutcome};
use lamcert::lattice::total_normalized_length;
use lamcert::report::{verify_report, ReportBody, ReportFile};
use lamcert::tube::nz_core_length_window;
use lamcert::verify::{verify_tubes, SuiteSizes};
use lamcert::{CohomologyClass, CompleteSlope, Constants, ManifoldBundle, Verdict};

#[derive(Parser)]
#[command(name = "lamcert", version, about = "Slope lengths, tube estimates and core-curve certification for Dehn fillings")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Slope lengths on each cusp and the total normalized length.
    Slope {
        #[arg(long)]
        manifold: PathBuf,
        /// Per-cusp slopes, "p,q;p,q;...".
        #[arg(long)]
        slope: String,
        #[arg(long)]
        json: bool,
    },
    /// Core-length window for a given total normalized length.
    Nz {
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        json: bool,
    },
    /// Certify one filling.
    Certify {
        #[arg(long)]
        manifold: PathBuf,
        /// Per-cusp filling slopes, "p,q;p,q;...".
        #[arg(long)]
        slope: String,
        /// Cohomology class as integer coordinates, "a,b,...".
        #[arg(long)]
        class: String,
        /// Thurston norm of the class; overrides the manifold's norm data.
        #[arg(long)]
        norm: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Certify every member of a surgery family and locate the threshold.
    Family {
        #[arg(long)]
        manifold: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Write the threshold table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded Monte-Carlo checks of the tube estimates.
    VerifyTubes {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive a saved report from its embedded inputs and compare.
    VerifyReport {
        report: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Override assumption constants: a number sets C, or "C=1,D=8.1,...".
    #[arg(short = 'C', long = "constants")]
    constants: Option<String>,
    #[arg(long)]
    json: bool,
    /// Write the full report file here.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Hypothesis(String),
    Property(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Hypothesis(_) => 3,
            Failure::Property(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Hypothesis(m) | Failure::Property(m) => m,
        }
    }
}

impl From<lamcert::Error> for Failure {
    fn from(e: lamcert::Error) -> Self {
        if e.is_hypothesis_failure() {
            Failure::Hypothesis(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn input<T>(what: &str, r: lamcert::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        if e.is_hypothesis_failure() {
            Failure::Hypothesis(format!("{what}: {e}"))
        } else {
            Failure::Input(format!("{what}: {e}"))
        }
    })
}

fn load_manifold(path: &Path, constants: Option<&str>) -> Result<ManifoldBundle, Failure> {
    let mut m = input(&format!("--manifold {}", path.display()), ManifoldBundle::load(path))?;
    if let Some(spec) = constants {
        apply_constants(&mut m.constants, spec)?;
        input("--constants", m.validate())?;
    }
    Ok(m)
}

fn apply_constants(c: &mut Constants, spec: &str) -> Outcome {
    if let Ok(v) = spec.trim().parse::<f64>() {
        c.c = v;
        return Ok(());
    }
    for part in spec.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--constants: expected KEY=VALUE, got {part:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("--constants: bad value for {}: {v:?}", k.trim())))?;
        match k.trim() {
            "C" => c.c = v,
            "L" => c.l = v,
            "mu" => c.mu = v,
            "D" => c.d = v,
            "t" => c.t = v,
            "mu3" => c.mu3 = Some(v),
            "systole" => c.systole = Some(v),
            other => return Err(Failure::Input(format!("--constants: unknown constant {other:?}"))),
        }
    }
    Ok(())
}

fn write_out(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Input(format!("--out {}: {e}", path.display())))
}

fn print_json(v: &impl serde::Serialize) -> Outcome {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Input(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn cmd_slope(manifold: &Path, slope: &str, as_json: bool) -> Outcome {
    let m = load_manifold(manifold, None)?;
    let s = input("--slope", CompleteSlope::parse(slope))?;
    let lats = input("manifold", m.lattices())?;
    let total = input("--slope", total_normalized_length(&lats, &s))?;
    let rows: Vec<_> = lats
        .iter()
        .zip(s.iter())
        .map(|(l, s)| (*s, l.slope_length(s), l.normalized_length(s)))
        .collect();
    if as_json {
        let cusps: Vec<_> = rows
            .iter()
            .map(|(s, len, norm)| json!({"slope": [s.p(), s.q()], "length": len, "normalized": norm}))
            .collect();
        return print_json(&json!({"cusps": cusps, "total_normalized_length": total}));
    }
    println!("{:>5}  {:>12}  {:>20}  {:>20}", "cusp", "slope", "length", "normalized");
    for (i, (s, len, norm)) in rows.iter().enumerate() {
        println!("{i:>5}  {:>12}  {len:>20}  {norm:>20}", s.to_string());
    }
    println!("total normalized length {total}");
    Ok(())
}

fn cmd_nz(ell: f64, as_json: bool) -> Outcome {
    let w = input("--ell", nz_core_length_window(ell))?;
    if as_json {
        return print_json(&json!({"ell": ell, "lo": w.lo, "hi": w.hi}));
    }
    println!("ell {ell}: core length in ({}, {})", w.lo, w.hi);
    Ok(())
}

fn describe(r: &CertificationReport) {
    println!("filling {}  slope {}  class {:?}", r.filling_id, r.slope, r.class.0);
    println!("  total normalized length  {}", r.ell);
    if let Some(w) = &r.nz_window {
        println!("  core length window       ({}, {})", w.lo, w.hi);
    }
    println!("  Thurston norm            {}", r.thurston_norm);
    if let (Some(lo), Some(m)) = (r.stable_lower, r.stable_lower_method) {
        println!("  stable norm lower bound  {lo} ({m:?})");
    }
    println!("  thick part upper bound   {}", r.thick_upper_conditional);
    if let Some(m) = r.criterion_margin {
        println!("  criterion margin         {m}");
    }
    let checks = r
        .side_conditions
        .iter()
        .chain(r.deepness_doubled.iter().flat_map(|v| v.checks.iter()));
    for c in checks.filter(|c| !c.status.is_pass()) {
        let tube = c.tube.map(|t| format!(" (tube {t})")).unwrap_or_default();
        println!("  failed: {}{tube}, margin {}", c.name, c.margin.lo);
    }
    for reason in &r.reasons {
        println!("  {reason}");
    }
    println!("  verdict: {}", verdict_name(r.verdict));
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::CertifiedCores => "certified-cores",
        Verdict::NotCertified => "not-certified",
        Verdict::HypothesesFailed => "hypotheses-failed",
    }
}

fn cmd_certify(manifold: &Path, slope: &str, class: &str, norm: Option<u64>, common: &Common) -> Outcome {
    let m = load_manifold(manifold, common.constants.as_deref())?;
    let s = input("--slope", CompleteSlope::parse(slope))?;
    let cls = input("--class", CohomologyClass::parse(class))?;
    let mut m = m;
    if let Some(norm) = norm {
        // recorded in the embedded manifold so the report re-derives
        let entry = ThurstonEntry { class: cls.clone(), norm };
        match &mut m.thurston {
            ThurstonData::Table(t) => {
                t.retain(|e| e.class != cls && e.class != cls.scale(-1));
                t.push(entry);
            }
            cone => *cone = ThurstonData::Table(vec![entry]),
        }
    }
    let file = ReportFile::certify(&m, &cls, &s, None)?;
    let ReportBody::Certify { report, dichotomy, .. } = &file.body else {
        unreachable!()
    };
    if let Some(out) = &common.out {
        write_out(out, &file.to_json()?)?;
    }
    if common.json {
        print_json(&file)?;
    } else {
        describe(report);
        println!("{}", dichotomy.text);
    }
    match report.verdict {
        Verdict::HypothesesFailed => Err(Failure::Hypothesis(report.reasons.join("; "))),
        _ => Ok(()),
    }
}

fn write_csv(path: &Path, table: &FamilyTable) -> Outcome {
    let err = |e: csv::Error| Failure::Input(format!("--csv {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["n", "slope", "ell", "thurston_norm", "lhs", "rhs", "margin", "holds", "verdict"])
        .map_err(err)?;
    let mut thr = table.threshold.rows.iter().peekable();
    for row in &table.rows {
        let RowOutcome::Report(r) = &row.outcome else {
            continue;
        };
        let t = thr.next_if(|t| t.index == row.n);
        let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            row.n.to_string(),
            r.slope.to_string(),
            r.ell.to_string(),
            r.thurston_norm.to_string(),
            f(t.map(|t| t.lhs)),
            f(t.map(|t| t.rhs)),
            f(t.map(|t| t.margin)),
            t.map(|t| t.holds.to_string()).unwrap_or_default(),
            verdict_name(r.verdict).to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Failure::Input(format!("--csv {}: {e}", path.display())))
}

fn cmd_family(manifold: &Path, spec: &Path, csv_out: Option<&Path>, common: &Common) -> Outcome {
    let m = load_manifold(manifold, common.constants.as_deref())?;
    let spec = input(&format!("--spec {}", spec.display()), FamilySpec::load(spec))?;
    input("--spec", spec.validate(&m.homology))?;
    let file = ReportFile::family(&m, &spec)?;
    let ReportBody::Family { table, .. } = &file.body else {
        unreachable!()
    };
    if let Some(out) = &common.out {
        write_out(out, &file.to_json()?)?;
    }
    if let Some(path) = csv_out {
        write_csv(path, table)?;
    }
    if common.json {
        return print_json(&file);
    }
    println!(
        "{:>8}  {:>20}  {:>6}  {:>14}  {:>14}  {:>5}  verdict",
        "n", "ell", "norm", "lhs", "rhs", "holds"
    );
    for t in &table.threshold.rows {
        let verdict = table
            .rows
            .iter()
            .find(|r| r.n == t.index)
            .and_then(|r| r.report())
            .map(|r| verdict_name(r.verdict))
            .unwrap_or("");
        println!(
            "{:>8}  {:>20}  {:>6}  {:>14.6}  {:>14.6}  {:>5}  {verdict}",
            t.index, t.ell, t.thurston_norm, t.lhs, t.rhs, t.holds
        );
    }
    let skipped = table.rows.len() - table.threshold.rows.len();
    if skipped > 0 {
        println!("{skipped} indices skipped (non-primitive slope)");
    }
    match table.threshold.n {
        Some(n) => println!("N = {n}"),
        None => println!(
            "no N: inequality fails at the last sample {}",
            table.threshold.trailing_violation.map(|v| v.to_string()).unwrap_or_default()
        ),
    }
    match table.certified_from {
        Some(n) => println!("certified from n = {n}"),
        None => println!("no trailing run of certified rows"),
    }
    Ok(())
}

fn cmd_verify_tubes(samples: usize, seed: u64, as_json: bool, out: Option<&Path>) -> Outcome {
    let report = verify_tubes(SuiteSizes::from_samples(samples), seed);
    if let Some(out) = out {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Input(e.to_string()))?;
        write_out(out, &text)?;
    }
    if as_json {
        print_json(&report)?;
    } else {
        for s in &report.suites {
            println!(
                "{:<24} {:>8} samples  {:>3} violations  worst margin {:.6e}  ({} guaranteed)",
                s.name, s.samples, s.violations, s.worst_margin, s.guaranteed
            );
        }
        println!("seed {seed}: {} violations", report.violations());
    }
    match report.suites.iter().find_map(|s| s.first_violation.as_ref().map(|v| (s, v))) {
        None => Ok(()),
        Some((s, v)) => Err(Failure::Property(format!("{} sample {}: {}", s.name, v.sample, v.detail))),
    }
}

fn cmd_verify_report(path: &Path, as_json: bool) -> Outcome {
    let file = input(&format!("report {}", path.display()), ReportFile::load(path))?;
    let check = verify_report(&file)?;
    if as_json {
        print_json(&check)?;
    } else if check.identical {
        println!("{}: identical on recomputation", path.display());
    } else {
        for m in &check.mismatches {
            println!("{m}");
        }
    }
    if check.identical {
        Ok(())
    } else {
        Err(Failure::Property(format!("{} fields differ on recomputation", check.mismatches.len())))
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Input(format!("--jobs: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Slope { manifold, slope, json } => cmd_slope(manifold, slope, *json),
        Cmd::Nz { ell, json } => cmd_nz(*ell, *json),
        Cmd::Certify {
            manifold,
            slope,
            class,
            norm,
            common,
        } => cmd_certify(manifold, slope, class, *norm, common),
        Cmd::Family {
            manifold,
            spec,
            csv,
            common,
        } => cmd_family(manifold, spec, csv.as_deref(), common),
        Cmd::VerifyTubes {
            samples,
            seed,
            json,
            out,
        } => cmd_verify_tubes(*samples, *seed, *json, out.as_deref()),
        Cmd::VerifyReport { report, json } => cmd_verify_report(report, *json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
