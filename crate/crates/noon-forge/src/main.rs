//! Reproduction harness: regenerate every table and figure dataset of the
//! feedforward NOON-interferometer study from the command line.

mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use noon_core::circuit::{standard_config, Angle, Detector, DetectorSet, Transmission};
use noon_core::efficiency;
use noon_core::engines::{conditional_distribution, summed_distribution, EngineKind};
use noon_core::feedforward;
use noon_core::metrology::{self, EstimationSetup, Likelihood};
use noon_core::quality;
use noon_core::selftest;

use output::Emitter;

#[derive(Parser)]
#[command(
    name = "noon-forge",
    version,
    about = "Exact and numerical simulation of NOON-state formation in a feedforward-corrected interferometer"
)]
struct Cli {
    /// Worker threads for sweeps (default: available parallelism; the
    /// NOON_FORGE_THREADS environment variable is the fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    /// Exact big-rational arithmetic (quarter-turn phases, rational T).
    Exact,
    /// Floating point: log-space sums for small N, quadrature beyond.
    Float,
    /// The quadrature representation.
    Integral,
}

impl From<EngineArg> for EngineKind {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Exact => EngineKind::Exact,
            EngineArg::Float => EngineKind::Float,
            EngineArg::Integral => EngineKind::Integral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    /// {1,2,5,6}: the uncorrected circuit, distribution over m5.
    #[value(name = "56")]
    Side56,
    /// {1,2,5',6,9}: counts before the final splitter, distribution over m9.
    #[value(name = "5p69")]
    Feedforward,
    /// {1,2,7,8,9}: the corrected output, distribution over m7.
    #[value(name = "789")]
    Output789,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional detection distribution for one side-count record.
    Dist(DistArgs),
    /// Quality-factor table over side-count rows.
    TableQuality(TableQualityArgs),
    /// Minimum-output acceptance percentages for the uncorrected circuit.
    TableMinn(TableMinnArgs),
    /// Averaged corrected/uncorrected output at fixed output count.
    Efficiency(EfficiencyArgs),
    /// Interference fringes of the probing configuration.
    Fringes(FringesArgs),
    /// Phase-state profile samples: Q12, or Q129·Q8 when m9/m78/T are given.
    Profile(ProfileArgs),
    /// Seeded Bayesian phase estimation against the Cramer-Rao bound.
    Estimate(EstimateArgs),
    /// Run the full acceptance suite.
    Selftest,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long)]
    na: u32,
    #[arg(long)]
    nb: u32,
    #[arg(long)]
    m1: u32,
    #[arg(long)]
    m2: u32,
    /// D9 count for the 789 set: a number, or "auto" for the most probable
    /// value under the feedforward plan.
    #[arg(long, default_value = "auto")]
    m9: String,
    /// D9 transmission: "auto" (the feedforward ratio), a number in [0,1],
    /// or an exact fraction like "8/22".
    #[arg(long, default_value = "auto")]
    t: String,
    /// Middle phase: "auto" (the feedforward branch), "pi/2" or "-pi/2".
    #[arg(long, default_value = "auto")]
    xi: String,
    #[arg(long, value_enum)]
    set: SetArg,
    #[arg(long, value_enum, default_value = "float")]
    engine: EngineArg,
    /// Output path (.csv or .json; a .manifest.json lands alongside).
    #[arg(long)]
    out: std::path::PathBuf,
    /// Also emit a companion gnuplot script.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct TableQualityArgs {
    #[arg(long)]
    n: u32,
    /// Side-count rows, e.g. "45,5;40,10;35,15;30,20;25,25".
    #[arg(long)]
    rows: String,
    #[arg(long, value_enum, default_value = "float")]
    engine: EngineArg,
    /// Optional CSV dump of the table.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct TableMinnArgs {
    #[arg(long)]
    n: u32,
    /// Minimum output numbers (rows).
    #[arg(long, value_delimiter = ',', default_value = "35,30,20,15")]
    nmins: Vec<u32>,
    /// Quality thresholds (columns), applied to two-decimal displayed
    /// qualities unless --strict-thresholds is set.
    #[arg(long, value_delimiter = ',', default_value = "0.90,0.95")]
    thresholds: Vec<f64>,
    #[arg(long)]
    strict_thresholds: bool,
    #[arg(long, value_enum, default_value = "float")]
    engine: EngineArg,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct EfficiencyArgs {
    #[arg(long)]
    n: u32,
    /// corrected: average over (m1, m2) at fixed m78.
    #[arg(long, conflicts_with = "m56")]
    m78: Option<u32>,
    /// uncorrected: average over m1 at fixed m56.
    #[arg(long)]
    m56: Option<u32>,
    #[arg(long, value_enum, default_value = "float")]
    engine: EngineArg,
    /// Averaged-distribution output (.csv or .json).
    #[arg(long)]
    out: std::path::PathBuf,
    /// Optional per-cell dump keyed by (m1, m2).
    #[arg(long)]
    cells: Option<std::path::PathBuf>,
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct FringesArgs {
    #[arg(long)]
    na: u32,
    #[arg(long)]
    nb: u32,
    #[arg(long)]
    m1: u32,
    #[arg(long)]
    m2: u32,
    #[arg(long, value_enum, default_value = "exact")]
    engine: EngineArg,
    #[arg(long)]
    out: std::path::PathBuf,
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    m1: u32,
    #[arg(long)]
    m2: u32,
    /// With --m78 and --t: sample the corrected profile Q129·Q8.
    #[arg(long, requires = "m78", requires = "t")]
    m9: Option<u32>,
    #[arg(long)]
    m78: Option<u32>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long)]
    out: std::path::PathBuf,
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct EstimateArgs {
    /// True probe phase χ.
    #[arg(long)]
    chi: f64,
    /// Detections per estimate.
    #[arg(long)]
    t: u32,
    /// Independent estimates.
    #[arg(long)]
    nu: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// NOON size of the ideal likelihood.
    #[arg(long, default_value_t = 4)]
    m78: u32,
    /// Posterior grid resolution.
    #[arg(long, default_value_t = 2048)]
    grid: usize,
    /// Half-width of the local uniform prior around χ (default: a quarter
    /// of the NOON fringe period).
    #[arg(long)]
    prior_halfwidth: Option<f64>,
    #[arg(long)]
    out: std::path::PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("NOON_FORGE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .expect("thread pool initialized once");
    }
    let code = match run(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn parse_transmission(s: &str, n: u32, m1: u32, m2: u32) -> Result<Transmission> {
    if s == "auto" {
        Ok(feedforward::plan(n, m1, m2)
            .context("feedforward plan for --t auto")?
            .transmission)
    } else {
        serde_json::from_value::<Transmission>(if s.contains('/') {
            json!(s)
        } else {
            json!(s
                .parse::<f64>()
                .map_err(|_| anyhow!("bad transmission {s:?}"))?)
        })
        .map_err(|e| anyhow!("bad transmission {s:?}: {e}"))
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Dist(args) => dist(args),
        Command::TableQuality(args) => table_quality(args),
        Command::TableMinn(args) => table_minn(args),
        Command::Efficiency(args) => efficiency_cmd(args),
        Command::Fringes(args) => fringes(args),
        Command::Profile(args) => profile(args),
        Command::Estimate(args) => estimate(args),
        Command::Selftest => selftest_cmd(),
    }
}

fn dist(args: DistArgs) -> Result<()> {
    let n = args.na + args.nb;
    let mut config = standard_config(args.na, args.nb, args.m1, args.m2);
    config.transmission = parse_transmission(&args.t, n, args.m1, args.m2)?;
    match args.xi.as_str() {
        "auto" => {}
        "pi/2" => config.xi = Angle::PI_2,
        "-pi/2" => config.xi = Angle::NEG_PI_2,
        "0" => config.xi = Angle::ZERO,
        other => bail!("bad --xi {other:?} (auto, pi/2, -pi/2 or 0)"),
    }
    let engine: EngineKind = args.engine.into();

    let (dist, free) = match args.set {
        SetArg::Side56 => {
            config.transmission = Transmission::ONE;
            let d = conditional_distribution(
                &config,
                DetectorSet::Side56,
                &[(Detector::D1, args.m1), (Detector::D2, args.m2)],
                Detector::D5,
                engine,
            )?;
            (d, Detector::D5)
        }
        SetArg::Feedforward => {
            let d = summed_distribution(
                &config,
                DetectorSet::Feedforward569,
                &[(Detector::D1, args.m1), (Detector::D2, args.m2)],
                Detector::D9,
                Detector::D5Prime,
                engine,
            )?;
            (d, Detector::D9)
        }
        SetArg::Output789 => {
            let m9 = if args.m9 == "auto" {
                feedforward::plan(n, args.m1, args.m2)
                    .context("feedforward plan for --m9 auto")?
                    .most_probable_m9
            } else {
                args.m9.parse().context("bad --m9")?
            };
            let d = conditional_distribution(
                &config,
                DetectorSet::Output789,
                &[
                    (Detector::D1, args.m1),
                    (Detector::D2, args.m2),
                    (Detector::D9, m9),
                ],
                Detector::D7,
                engine,
            )?;
            (d, Detector::D7)
        }
    };

    let report = quality::report(&dist).ok();
    let mut emitter = Emitter::new(
        "dist",
        json!({
            "config": config,
            "set": format!("{:?}", dist.set),
            "engine": engine_name(engine),
            "m1": args.m1, "m2": args.m2, "m9": args.m9, "t": args.t,
        }),
    );
    if args.out.extension().and_then(|e| e.to_str()) == Some("json") {
        let mut value = dist.json_value(engine == EngineKind::Exact);
        if let Some(r) = &report {
            value["quality"] = serde_json::to_value(r)?;
        }
        emitter.write_json(&args.out, &value)?;
    } else {
        emitter.write_text(&args.out, &dist.csv_string())?;
    }
    if args.gnuplot {
        emitter.write_gnuplot(&args.out, &format!("{free}"), "probability")?;
    }
    emitter.finish()?;
    if let Some(r) = report {
        println!("q1 = {:.4}  q2 = {:.4}  m78 = {}", r.q1, r.q2, r.m78);
    }
    println!("total absolute probability = {:.6e}", dist.total_absolute);
    Ok(())
}

fn engine_name(engine: EngineKind) -> &'static str {
    match engine {
        EngineKind::Exact => "exact",
        EngineKind::Float => "float",
        EngineKind::Integral => "integral",
    }
}

fn table_quality(args: TableQualityArgs) -> Result<()> {
    let engine: EngineKind = args.engine.into();
    if !args.n.is_multiple_of(2) {
        bail!("--n must be even (equal sources)");
    }
    let mut rows = Vec::new();
    for part in args.rows.split(';').filter(|p| !p.trim().is_empty()) {
        let mut it = part.split(',').map(str::trim);
        let m1: u32 = it
            .next()
            .ok_or_else(|| anyhow!("bad row {part:?}"))?
            .parse()?;
        let m2: u32 = it
            .next()
            .ok_or_else(|| anyhow!("bad row {part:?}"))?
            .parse()?;
        rows.push((m1, m2));
    }
    let mut lines = vec![format!(
        "{:>4} {:>4} {:>5} {:>5} {:>6} {:>7} {:>7}",
        "m1", "m2", "m78", "<m9>", "T", "q1", "q2"
    )];
    let mut csv = String::from("m1,m2,m78,m9,T,q1,q2\n");
    for (m1, m2) in rows {
        let plan = feedforward::plan(args.n, m1, m2)?;
        let m9 = plan.expected_m9.round() as u32;
        let m78 = args.n - m1 - m2 - m9;
        let mut config = standard_config(args.n / 2, args.n / 2, m1, m2);
        config.transmission = plan.transmission;
        let dist = conditional_distribution(
            &config,
            DetectorSet::Output789,
            &[(Detector::D1, m1), (Detector::D2, m2), (Detector::D9, m9)],
            Detector::D7,
            engine,
        )?;
        let r = quality::report(&dist)?;
        lines.push(format!(
            "{m1:>4} {m2:>4} {m78:>5} {m9:>5} {:>6.2} {:>7.3} {:>7.3}",
            plan.transmission.value(),
            r.q1,
            r.q2
        ));
        csv.push_str(&format!(
            "{m1},{m2},{m78},{m9},{},{},{}\n",
            plan.transmission.value(),
            r.q1,
            r.q2
        ));
    }
    for line in &lines {
        println!("{line}");
    }
    if let Some(out) = args.out {
        let mut emitter = Emitter::new(
            "table-quality",
            json!({"n": args.n, "rows": args.rows, "engine": engine_name(engine)}),
        );
        emitter.write_text(&out, &csv)?;
        emitter.finish()?;
    }
    Ok(())
}

fn table_minn(args: TableMinnArgs) -> Result<()> {
    let engine: EngineKind = args.engine.into();
    let thresholds: Vec<f64> = if args.strict_thresholds {
        args.thresholds.clone()
    } else {
        // Thresholds compare against two-decimal displayed qualities.
        args.thresholds.iter().map(|t| t - 0.005).collect()
    };
    let table = efficiency::table_minn(args.n, &args.nmins, &thresholds, engine)?;
    let header = args
        .thresholds
        .iter()
        .map(|t| format!("%(q1 = {t:.2})"))
        .collect::<Vec<_>>()
        .join("  ");
    println!("{:>6}  {header}", "N_min");
    let mut csv = String::from("n_min");
    for t in &args.thresholds {
        csv.push_str(&format!(",pct_q1_{t}"));
    }
    csv.push('\n');
    for (row, n_min) in table.iter().zip(&args.nmins) {
        let cells = row
            .iter()
            .map(|v| format!("{v:>12.2}"))
            .collect::<Vec<_>>()
            .join("  ");
        println!("{n_min:>6}  {cells}");
        csv.push_str(&format!("{n_min}"));
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    if let Some(out) = args.out {
        let mut emitter = Emitter::new(
            "table-minn",
            json!({
                "n": args.n, "nmins": args.nmins, "thresholds": args.thresholds,
                "strict": args.strict_thresholds, "engine": engine_name(engine),
            }),
        );
        emitter.write_text(&out, &csv)?;
        emitter.finish()?;
    }
    Ok(())
}

fn efficiency_cmd(args: EfficiencyArgs) -> Result<()> {
    let engine: EngineKind = args.engine.into();
    let (avg, mode, count) = match (args.m78, args.m56) {
        (Some(m78), None) => (
            efficiency::averaged_corrected(args.n, m78, engine)?,
            "corrected",
            m78,
        ),
        (None, Some(m56)) => (
            efficiency::averaged_uncorrected(args.n, m56, engine)?,
            "uncorrected",
            m56,
        ),
        _ => bail!("pass exactly one of --m78 (corrected) or --m56 (uncorrected)"),
    };
    let mut emitter = Emitter::new(
        "efficiency",
        json!({
            "n": args.n, "mode": mode, "output_count": count,
            "engine": engine_name(engine),
        }),
    );
    let free = if mode == "corrected" { "m7" } else { "m5" };
    if args.out.extension().and_then(|e| e.to_str()) == Some("json") {
        emitter.write_json(
            &args.out,
            &json!({
                "mode": mode,
                "probabilities": avg.probabilities,
                "quality": avg.quality,
                "total_probability": avg.total_probability,
            }),
        )?;
    } else {
        let mut csv = format!("{free},probability\n");
        for (i, p) in avg.probabilities.iter().enumerate() {
            csv.push_str(&format!("{i},{p:.17e}\n"));
        }
        emitter.write_text(&args.out, &csv)?;
    }
    if let Some(cells_path) = &args.cells {
        let mut csv = String::from("m1,m2,q1,q2,absolute\n");
        for c in &avg.cells {
            csv.push_str(&format!(
                "{},{},{},{},{:e}\n",
                c.m1, c.m2, c.q1, c.q2, c.absolute
            ));
        }
        emitter.write_text(cells_path, &csv)?;
    }
    if args.gnuplot {
        emitter.write_gnuplot(&args.out, free, "probability")?;
    }
    emitter.finish()?;
    println!(
        "{mode} (N = {}, output count {count}): q1 = {:.4}, q2 = {:.4}, total probability = {:.4e}",
        args.n, avg.quality.q1, avg.quality.q2, avg.total_probability
    );
    Ok(())
}

fn fringes(args: FringesArgs) -> Result<()> {
    let engine: EngineKind = args.engine.into();
    let dist = metrology::fringe_distribution(args.na, args.nb, args.m1, args.m2, engine)?;
    let mut emitter = Emitter::new(
        "fringes",
        json!({
            "na": args.na, "nb": args.nb, "m1": args.m1, "m2": args.m2,
            "engine": engine_name(engine),
        }),
    );
    if args.out.extension().and_then(|e| e.to_str()) == Some("json") {
        emitter.write_json(&args.out, &dist.json_value(engine == EngineKind::Exact))?;
    } else {
        emitter.write_text(&args.out, &dist.csv_string())?;
    }
    if args.gnuplot {
        emitter.write_gnuplot(&args.out, "m7", "probability")?;
    }
    emitter.finish()?;
    println!(
        "fringes over m7 = 0..{}: {} strict local maxima",
        dist.pair_total,
        metrology::strict_local_maxima(&dist.probabilities)
    );
    Ok(())
}

fn profile(args: ProfileArgs) -> Result<()> {
    use noon_core::phase;
    let (label, samples) = match (args.m9, args.m78, args.t) {
        (Some(m9), Some(m78), Some(t)) => {
            if !(0.0..=1.0).contains(&t) {
                bail!("--t must lie in [0, 1]");
            }
            let f = |phi: f64| phase::q129(phi, args.m1, args.m2, m9) * phase::q8(phi, m78, t);
            ("q129_q8", phase::sample_profile(f, args.samples))
        }
        (None, None, None) => {
            let f = |phi: f64| phase::q12(phi, args.m1, args.m2);
            ("q12", phase::sample_profile(f, args.samples))
        }
        _ => bail!("pass all of --m9/--m78/--t for the corrected profile, or none for Q12"),
    };
    let mut csv = format!("phi,{label}\n");
    for (phi, value) in &samples {
        csv.push_str(&format!("{phi:.12},{value:.17e}\n"));
    }
    let mut emitter = Emitter::new(
        "profile",
        json!({
            "m1": args.m1, "m2": args.m2, "m9": args.m9, "m78": args.m78,
            "t": args.t, "samples": args.samples,
        }),
    );
    emitter.write_text(&args.out, &csv)?;
    if args.gnuplot {
        emitter.write_gnuplot(&args.out, "phi", label)?;
    }
    emitter.finish()?;
    let peak = samples
        .iter()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap();
    println!("profile peak |{label}| at phi = {:.6}", peak.0);
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let period = 2.0 * std::f64::consts::PI / args.m78 as f64;
    let halfwidth = args.prior_halfwidth.unwrap_or(0.25 * period);
    let setup = EstimationSetup {
        true_chi: args.chi,
        shots: args.t,
        repetitions: args.nu,
        seed: args.seed,
        prior_lo: args.chi - halfwidth,
        prior_hi: args.chi + halfwidth,
        grid_points: args.grid,
    };
    let likelihood = Likelihood::IdealNoon { m78: args.m78 };
    let report = metrology::bayesian_estimate(&setup, &likelihood)?;
    let value = json!({
        "seed": args.seed,
        "true_chi": args.chi,
        "t": args.t,
        "nu": args.nu,
        "m78": args.m78,
        "grid_points": args.grid,
        "prior_halfwidth": halfwidth,
        "rms_error": report.rms_error,
        "cramer_rao_bound": report.cramer_rao_bound,
        "single_estimate_bound": report.single_bound,
        "final_estimate": report.final_estimate,
        "I_cl": report.i_classical,
        "I_qu": (args.m78 as f64).powi(2),
        "underflow_flagged": report.underflow_flagged,
    });
    let mut emitter = Emitter::new(
        "estimate",
        json!({"chi": args.chi, "t": args.t, "nu": args.nu, "seed": args.seed, "m78": args.m78}),
    );
    emitter.write_json(&args.out, &value)?;
    emitter.finish()?;
    println!(
        "rms error = {:.5} (single-estimate bound {:.5}, combined bound {:.5})",
        report.rms_error, report.single_bound, report.cramer_rao_bound
    );
    Ok(())
}

fn selftest_cmd() -> Result<()> {
    let results = selftest::run_all();
    let mut failures = 0;
    for r in &results {
        println!("{}", r.summary());
        for line in &r.lines {
            println!("{line}");
        }
        failures += r.failures;
    }
    let passed = results.iter().filter(|r| r.passed()).count();
    println!(
        "{passed}/{} criteria fully green; {failures} red sub-check(s) (see the printed analyses)",
        results.len()
    );
    if failures > 0 {
        bail!("{failures} acceptance sub-check(s) red");
    }
    Ok(())
}
